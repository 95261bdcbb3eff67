"""Brute-force and sampling oracles used to audit the solvers.

Everything here evaluates the bifunction directly on grids or samples and
never calls into the iterative machinery, so oracle agreement is independent
evidence rather than a consistency check of one code path against itself.

grid_solve scores every feasible grid point u by the worst value

    m(u) = min over feasible grid v of  F(u, v) + kappa ||v - u||^2,

and returns the argmax. Since v = u contributes zero, m(u) <= 0 with equality
exactly at grid solutions; the best point is certified when m is within a
sampled-Lipschitz tolerance C * h of zero. The VI form F(u, v) = <T(u), v-u>
expands to a matrix product, evaluated in chunks with early abandoning: a row
whose running minimum already fell below the best certified value so far can
never become the argmax and is dropped from later blocks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import EmptyGrid, GridTooLarge, NonFiniteValue, SamplingExhausted
from .geometry import Array, ConstraintSet, as_vector
from .model import Bifunction, UREProblem

MAX_GRID_POINTS = int(1e7)
MAX_GENERIC_EVALS = int(4e6)


@dataclass(frozen=True, eq=False)
class GridSpec:
    """Grid resolution as cells per axis (so resolution+1 points per axis and
    spacing width/resolution, which keeps round boxes on round lattices),
    an optional bounding box override, and the membership tolerance."""

    resolution: int
    box: tuple[Array, Array] | None = None
    membership_tol: float | None = None

    def __post_init__(self):
        if int(self.resolution) != self.resolution or self.resolution < 2:
            raise ValueError("resolution must be an integer >= 2")


@dataclass(frozen=True, eq=False)
class OracleResult:
    point: Array
    inner_value: float
    certified: bool
    tolerance: float
    spacing: float
    n_feasible: int


def finite_diff_gradient(fn, u, h: float | None = None) -> Array:
    """Central differences (fn(u + h e_i) - fn(u - h e_i)) / (2h)."""
    u = as_vector(u, name="u")
    if h is None:
        h = 1e-6 * (1.0 + float(np.linalg.norm(u)))
    if not h > 0:
        raise ValueError("h must be positive")
    out = np.empty_like(u)
    for i in range(u.shape[0]):
        e = np.zeros_like(u)
        e[i] = h
        hi = float(fn(u + e))
        lo = float(fn(u - e))
        if not (math.isfinite(hi) and math.isfinite(lo)):
            raise NonFiniteValue(f"fn is not finite near coordinate {i}")
        out[i] = (hi - lo) / (2.0 * h)
    return out


def _grid_points(s: ConstraintSet, gs: GridSpec) -> tuple[Array, float]:
    if s.dim > 3:
        raise GridTooLarge(f"grid oracle handles dimension <= 3, got {s.dim}")
    lo, hi = gs.box if gs.box is not None else s.bounding_box
    lo = as_vector(lo, s.dim, "box lower")
    hi = as_vector(hi, s.dim, "box upper")
    total = (gs.resolution + 1) ** s.dim
    if total > MAX_GRID_POINTS:
        raise GridTooLarge(f"{total} grid points exceeds the {MAX_GRID_POINTS} guard")
    axes = [np.linspace(lo[i], hi[i], gs.resolution + 1) for i in range(s.dim)]
    mesh = np.meshgrid(*axes, indexing="ij")
    points = np.stack([m.ravel() for m in mesh], axis=1)
    h = float(np.max((hi - lo) / gs.resolution))
    return points, h


def _inner_lipschitz(p: UREProblem, f: Bifunction, n_points: int = 1000, seed: int = 0) -> float:
    """Twice the largest sampled gradient norm of v -> F(u,v) + kappa||v-u||^2."""
    try:
        U = p.feasible_set.sample(n_points, seed)
        V = p.feasible_set.sample(n_points, seed + 1)
    except SamplingExhausted:
        U = V = p.feasible_set.sample(8, seed)
    worst = 0.0
    for u, v in zip(U, V):
        if f.grad_v is not None:
            grad = f.grad_v(u, v) + 2.0 * p.kappa * (v - u)
        else:
            grad = finite_diff_gradient(lambda x: f(u, x) + p.kappa * float((x - u) @ (x - u)), v)
        worst = max(worst, float(np.linalg.norm(grad)))
    return 2.0 * worst


def _batch_operator(T, V: Array):
    """Vectorized T over rows when T supports it and matches pointwise calls."""
    try:
        out = np.asarray(T(V), dtype=float)
    except Exception:
        return None
    if out.shape != V.shape:
        return None
    for i in (0, V.shape[0] // 2, V.shape[0] - 1):
        if not np.allclose(out[i], np.asarray(T(V[i]), dtype=float), rtol=1e-12, atol=1e-12):
            return None
    return out


def _apply_operator(T, V: Array) -> Array:
    out = _batch_operator(T, V)
    if out is not None:
        return out
    return np.array([np.asarray(T(v), dtype=float) for v in V])


def _vi_grid_argmax(T_all: Array, V: Array, kappa: float) -> tuple[int, float]:
    """Argmax over rows u of min over v of <T(u), v-u> + kappa||v-u||^2.

    For row u the inner objective over all v is one matrix-vector expression:
        (T(u) - 2 kappa u) . v + kappa ||v||^2 + (kappa ||u||^2 - T(u) . u).
    Rows are processed in chunks against shuffled v-blocks; a row whose
    running minimum falls below the best completed row is abandoned.
    """
    n = V.shape[0]
    vsq = np.einsum("ij,ij->i", V, V)
    lin = T_all - 2.0 * kappa * V
    const = kappa * vsq - np.einsum("ij,ij->i", T_all, V)

    order = np.argsort(np.einsum("ij,ij->i", T_all, T_all), kind="stable")
    shuffle = np.random.default_rng(0).permutation(n)
    v_lin = V[shuffle]
    v_off = kappa * vsq[shuffle]

    best_m = -np.inf
    best_row = -1
    v_block = 4096

    def full_min(rows: Array) -> tuple[Array, Array]:
        """Running minima plus a mask of rows evaluated against every block.

        An abandoned row's running minimum is only an upper bound on its true
        m, so callers must ignore it; abandonment is sound because the true m
        can only be lower, and the row was already beaten.
        """
        mins = np.full(rows.shape[0], np.inf)
        active = np.arange(rows.shape[0])
        for start in range(0, n, v_block):
            if active.size == 0:
                break
            block = lin[rows[active]] @ v_lin[start : start + v_block].T
            block += v_off[start : start + v_block][None, :]
            mins[active] = np.minimum(mins[active], block.min(axis=1))
            keep = mins[active] + const[rows[active]] >= best_m
            active = active[keep]
        completed = np.zeros(rows.shape[0], dtype=bool)
        completed[active] = True
        return mins + const[rows], completed

    boot = order[: min(32, n)]
    m_boot, done = full_min(boot)
    i = int(np.argmax(m_boot))
    best_m = float(m_boot[i])
    best_row = int(boot[i])

    rest = order[min(32, n) :]
    u_chunk = 512
    for start in range(0, rest.shape[0], u_chunk):
        rows = rest[start : start + u_chunk]
        m, done = full_min(rows)
        if not np.any(done):
            continue
        idx = np.flatnonzero(done)
        j = int(idx[np.argmax(m[idx])])
        if m[j] > best_m:
            best_m = float(m[j])
            best_row = int(rows[j])
    return best_row, best_m


def grid_solve(p: UREProblem, gs: GridSpec) -> OracleResult:
    """Exhaustive search for the grid point closest to solving the problem.

    Returns the feasible grid point with the largest worst-case inner value
    m(u), certified when m(u) >= -C h for the grid spacing h and a sampled
    Lipschitz bound C of the inner objective.
    """
    f = p.bifunction
    points, h = _grid_points(p.feasible_set, gs)
    feasible = p.feasible_set.contains_batch(points, gs.membership_tol)
    V = points[feasible]
    if V.shape[0] == 0:
        raise EmptyGrid("no grid point passed the membership test")
    C = _inner_lipschitz(p, f)

    if f.vi_operator is not None:
        T_all = _apply_operator(f.vi_operator, V)
        row, m_best = _vi_grid_argmax(T_all, V, p.kappa)
    else:
        n = V.shape[0]
        if n * n > MAX_GENERIC_EVALS:
            raise GridTooLarge(
                f"{n}^2 bifunction evaluations exceed the {MAX_GENERIC_EVALS} guard; "
                "lower the resolution for bifunctions without a VI operator"
            )
        m_best = -np.inf
        row = -1
        for i in range(n):
            u = V[i]
            running = np.inf
            for j in range(n):
                d = V[j] - u
                running = min(running, f(u, V[j]) + p.kappa * float(d @ d))
                if running < m_best:
                    break
            if running > m_best:
                m_best = running
                row = i
    tol = C * h
    return OracleResult(V[row], float(m_best), bool(m_best >= -tol), float(tol), h, int(V.shape[0]))


@dataclass(frozen=True, eq=False)
class PseudomonotoneReport:
    passed: bool
    n_pairs: int
    n_counterexamples: int
    counterexamples: tuple[tuple[Array, Array], ...]


def check_pseudomonotone(
    f: Bifunction,
    s: ConstraintSet,
    kappa: float,
    n_pairs: int = 10000,
    seed: int = 0,
    tol: float = 1e-10,
) -> PseudomonotoneReport:
    """Sampled implication check: whenever F(u,v) + kappa||v-u||^2 >= 0, the
    reverse value F(v,u) + kappa||v-u||^2 must not exceed tol.

    Stores at most 25 counterexample pairs; an empty tuple means passed.
    """
    if n_pairs <= 0:
        raise ValueError("n_pairs must be positive")
    if kappa < 0:
        raise ValueError("kappa must be nonnegative")
    U = s.sample(n_pairs, seed)
    V = s.sample(n_pairs, seed + 1)
    found = []
    n_bad = 0
    for u, v in zip(U, V):
        q = kappa * float((v - u) @ (v - u))
        if f(u, v) + q >= 0.0 and f(v, u) + q > tol:
            n_bad += 1
            if len(found) < 25:
                found.append((u, v))
    return PseudomonotoneReport(n_bad == 0, n_pairs, n_bad, tuple(found))
