"""Outer iterations: the implicit (proximal) step with optional inertia, the
explicit projected step, and the Fejer-type distance diagnostic.

All three schemes share one step template. With kappa = k/(2r) and an
extrapolated base point

    z = u_n - (gamma_n / (1 + kappa)) (u_n - u_prev),

the implicit step returns the w solving the strengthened auxiliary inequality

    lam F(w, v) + (1 + kappa) <w - z, v - w>  >=  0   for all v in the set,

realized as the fixed point of w <- P[z - (lam/(1+kappa)) grad_v F(w, w)].
Dropping the quadratic term kappa ||v - w||^2 from the auxiliary inequality
only strengthens it, so any such w also solves the original relaxed step.
The explicit scheme freezes the gradient at the current iterate instead,
u_{n+1} = P[u_n - lam grad_v F(u_n, u_n)], and involves no kappa at all.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import EmptyTrace, MissingGradient, PointNotInSet, SubproblemFailed
from .geometry import Array, as_vector
from .model import SolverConfig, Status, Trace, TraceRecord, UREProblem


@dataclass(frozen=True, eq=False)
class SubproblemSpec:
    """One implicit step: current iterate, previous iterate, step and inertia
    weights. kappa is copied from the problem for direct access."""

    problem: UREProblem
    u_n: Array
    u_prev: Array
    lam: float
    gamma_n: float
    kappa: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "u_n", as_vector(self.u_n, self.problem.dim, "u_n"))
        object.__setattr__(self, "u_prev", as_vector(self.u_prev, self.problem.dim, "u_prev"))
        object.__setattr__(self, "kappa", self.problem.kappa)
        if not self.lam > 0:
            raise ValueError("lam must be positive")
        if self.gamma_n < 0:
            raise ValueError("gamma_n must be nonnegative")
        for name, pt in (("u_n", self.u_n), ("u_prev", self.u_prev)):
            if not self.problem.feasible_set.contains(pt):
                raise PointNotInSet(f"{name} is not in the feasible set")

    @property
    def base_point(self) -> Array:
        return self.u_n - (self.gamma_n / (1.0 + self.kappa)) * (self.u_n - self.u_prev)


def solve_subproblem(spec: SubproblemSpec, cfg: SolverConfig) -> Array:
    """Fixed point of w <- P[z - (lam/(1+kappa)) grad_v F(w, w)].

    Iterates until the successive change drops below cfg.inner_tol; raises
    SubproblemFailed when cfg.max_inner sweeps do not get there.
    """
    f = spec.problem.bifunction
    if f.grad_v is None:
        raise MissingGradient("solve_subproblem needs grad_v")
    project = spec.problem.feasible_set.project
    z = spec.base_point
    scale = spec.lam / (1.0 + spec.kappa)
    w = spec.u_n
    for _ in range(cfg.max_inner):
        w_new = project(z - scale * f.grad_v(w, w)).point
        if float(np.linalg.norm(w_new - w)) <= cfg.inner_tol:
            return w_new
        w = w_new
    raise SubproblemFailed(
        f"no fixed point to {cfg.inner_tol:g} within {cfg.max_inner} sweeps"
    )


@dataclass(frozen=True)
class SubproblemCheck:
    passed: bool
    worst_violation: float
    worst_point: Array
    n_samples: int


def verify_subproblem_inequality(
    spec: SubproblemSpec,
    w: Array,
    n_samples: int = 10000,
    seed: int = 0,
    tol: float = 1e-8,
) -> SubproblemCheck:
    """Sampled audit of the strengthened auxiliary inequality at w.

    Checks lam F(w, v) + (1+kappa) <w - z, v - w> >= -tol at sampled feasible
    v. Debug-mode tool: quadratic in nothing, but 10^4 bifunction calls.
    """
    w = as_vector(w, spec.problem.dim, "w")
    f = spec.problem.bifunction
    z = spec.base_point
    V = spec.problem.feasible_set.sample(n_samples, seed)
    shift = (1.0 + spec.kappa) * (w - z)
    worst = -np.inf
    worst_v = w
    for v in V:
        val = spec.lam * f(w, v) + float(shift @ (v - w))
        if -val > worst:
            worst = -val
            worst_v = v
    return SubproblemCheck(worst <= tol, worst, worst_v, n_samples)


def default_step_size(problem: UREProblem, seed: int = 0, n_pairs: int = 100) -> float:
    """0.5 / (1 + L) with L a sampled Lipschitz estimate of grad_v F."""
    f = problem.bifunction
    if f.grad_v is None:
        raise MissingGradient("step-size heuristic needs grad_v")
    X = problem.feasible_set.sample(n_pairs, seed)
    Y = problem.feasible_set.sample(n_pairs, seed + 1)
    L = 0.0
    for x, y in zip(X, Y):
        gap = float(np.linalg.norm(x - y))
        if gap <= 1e-12:
            continue
        L = max(L, float(np.linalg.norm(f.grad_v(x, x) - f.grad_v(y, y))) / gap)
    return 0.5 / (1.0 + L)


def _natural_residual(problem: UREProblem, u: Array, lam: float) -> float:
    f = problem.bifunction
    moved = problem.feasible_set.project(u - lam * f.grad_v(u, u)).point
    return float(np.linalg.norm(u - moved))


def _resolve_lam(problem: UREProblem, cfg: SolverConfig) -> float:
    return cfg.lam if cfg.lam is not None else default_step_size(problem, cfg.seed)


def inertial_proximal_solve(
    problem: UREProblem,
    cfg: SolverConfig,
    u0,
    gamma_schedule: Callable[[int], float] | None = None,
) -> Trace:
    """Implicit scheme with inertial extrapolation gamma_n (u_n - u_{n-1}).

    gamma_schedule maps the iteration index to gamma_n; the default is the
    constant cfg.gamma. Stops when the step norm falls below cfg.outer_tol.
    A subproblem failure ends the run early with the partial trace and
    status SUBPROBLEM_FAILED.
    """
    u0 = as_vector(u0, problem.dim, "u0")
    if not problem.feasible_set.contains(u0):
        raise PointNotInSet("u0 is not in the feasible set")
    if gamma_schedule is None:
        gamma_schedule = _constant_gamma(cfg.gamma)
    lam = _resolve_lam(problem, cfg)
    records = [TraceRecord(0, u0, 0.0, _natural_residual(problem, u0, lam))]
    u_prev = u0
    u_n = u0
    for n in range(cfg.max_outer):
        spec = SubproblemSpec(problem, u_n, u_prev, lam, float(gamma_schedule(n)))
        try:
            w = solve_subproblem(spec, cfg)
        except SubproblemFailed:
            return Trace(records, Status.SUBPROBLEM_FAILED)
        step = float(np.linalg.norm(w - u_n))
        records.append(TraceRecord(n + 1, w, step, _natural_residual(problem, w, lam)))
        if step < cfg.outer_tol:
            return Trace(records, Status.CONVERGED)
        u_prev, u_n = u_n, w
    return Trace(records, Status.MAX_ITERATIONS)


class _constant_gamma:
    """Picklable constant schedule (plain closures break process pools)."""

    def __init__(self, value: float):
        self.value = float(value)

    def __call__(self, n: int) -> float:
        return self.value


_zero_gamma = _constant_gamma(0.0)


def proximal_solve(problem: UREProblem, cfg: SolverConfig, u0) -> Trace:
    """Implicit scheme without inertia: gamma_n identically zero.

    Shares every instruction with inertial_proximal_solve, so a zero-gamma
    inertial run reproduces this trace bitwise.
    """
    return inertial_proximal_solve(problem, cfg, u0, gamma_schedule=_zero_gamma)


def explicit_solve(problem: UREProblem, cfg: SolverConfig, u0) -> Trace:
    """Explicit scheme u_{n+1} = P[u_n - lam grad_v F(u_n, u_n)]."""
    u0 = as_vector(u0, problem.dim, "u0")
    if not problem.feasible_set.contains(u0):
        raise PointNotInSet("u0 is not in the feasible set")
    f = problem.bifunction
    if f.grad_v is None:
        raise MissingGradient("explicit_solve needs grad_v")
    project = problem.feasible_set.project
    lam = _resolve_lam(problem, cfg)
    records = [TraceRecord(0, u0, 0.0, _natural_residual(problem, u0, lam))]
    u_n = u0
    for n in range(cfg.max_outer):
        u_next = project(u_n - lam * f.grad_v(u_n, u_n)).point
        step = float(np.linalg.norm(u_next - u_n))
        records.append(TraceRecord(n + 1, u_next, step, _natural_residual(problem, u_next, lam)))
        if step < cfg.outer_tol:
            return Trace(records, Status.CONVERGED)
        u_n = u_next
    return Trace(records, Status.MAX_ITERATIONS)


@dataclass(frozen=True, eq=False)
class FejerReport:
    passed: bool
    worst_margin: float
    worst_index: int
    n_pairs: int


def fejer_check(trace: Trace, u_star, epsilon: float) -> FejerReport:
    """Per-step distance inequality against a known solution u_star.

    For every consecutive pair checks, with e = epsilon,

        ||u_{n+1} - u*||^2 <= (1+e)^2 ||u_n - u*||^2
                              - ||u_{n+1} - (1+e) u_n + e u*||^2 + slack,

    slack = 1e-8 (1 + ||u_n - u*||^2). Reports the worst margin (right side
    minus left side; negative means violated) and where it occurred.
    """
    if not trace.records:
        raise EmptyTrace("trace has no records")
    if epsilon < 0:
        raise ValueError("epsilon must be nonnegative")
    dim = trace.records[0].point.shape[0]
    u_star = as_vector(u_star, dim, "u_star")
    worst = np.inf
    worst_index = -1
    pts = [r.point for r in trace.records]
    for i in range(len(pts) - 1):
        u_n, u_next = pts[i], pts[i + 1]
        dn = u_n - u_star
        lhs = float((u_next - u_star) @ (u_next - u_star))
        cross = u_next - (1.0 + epsilon) * u_n + epsilon * u_star
        slack = 1e-8 * (1.0 + float(dn @ dn))
        rhs = (1.0 + epsilon) ** 2 * float(dn @ dn) - float(cross @ cross) + slack
        margin = rhs - lhs
        if margin < worst:
            worst = margin
            worst_index = i
    return FejerReport(worst >= 0.0, float(worst), worst_index, len(pts) - 1)
