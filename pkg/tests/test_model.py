"""Problem model: bifunctions, validation, residual."""

import math

import numpy as np
import pytest

from proxequil import (
    Ball,
    Bifunction,
    GridSpec,
    PointNotInSet,
    SolverConfig,
    Sphere,
    Status,
    UREProblem,
    finite_diff_gradient,
    grid_solve,
    make_vi_bifunction,
    problem_residual,
)
from problems import ball_pull, pull_bifunction


def test_vi_bifunction_values():
    f = pull_bifunction([2.0, 0.0])
    u = np.array([0.0, -1.0])
    v = np.array([1.0, 0.0])
    # F(u, v) = <u - p, v - u>
    assert f(u, v) == pytest.approx(-3.0)
    np.testing.assert_allclose(f.grad_v(u, v), [-2.0, -1.0])
    # d/du <T(u), v - u> = JT(u)^T (v - u) - T(u)
    np.testing.assert_allclose(f.grad_u(u, v), [3.0, 2.0])
    assert f.vi_operator is not None
    assert f.diagonal_zero


def test_vi_bifunction_without_jacobian_has_no_grad_u():
    f = make_vi_bifunction(lambda u: u)
    assert f.grad_u is None


def test_diagonal_zero_sampled():
    ball = Ball(np.zeros(2), 1.0)
    quad = Bifunction(
        eval=lambda u, v: float(v @ v - u @ u),
        grad_v=lambda u, v: 2.0 * v,
        grad_u=lambda u, v: -2.0 * u,
    )
    pts = ball.sample(1000, seed=3)
    for f in (pull_bifunction([2.0, 0.0]), quad):
        for u in pts:
            assert abs(f(u, u)) <= 1e-12


def test_declared_gradients_match_finite_differences():
    f = pull_bifunction([2.0, 0.0])
    rng = np.random.default_rng(11)
    for _ in range(20):
        u = rng.normal(size=2)
        v = rng.normal(size=2)
        fd_v = finite_diff_gradient(lambda w: f(u, w), v)
        fd_u = finite_diff_gradient(lambda w: f(w, v), u)
        assert np.linalg.norm(f.grad_v(u, v) - fd_v) <= 1e-5 * (1.0 + np.linalg.norm(fd_v))
        assert np.linalg.norm(f.grad_u(u, v) - fd_u) <= 1e-5 * (1.0 + np.linalg.norm(fd_u))


def test_problem_validation():
    f = pull_bifunction([2.0, 0.0])
    ball = Ball(np.zeros(2), 1.0)
    with pytest.raises(ValueError):
        UREProblem(f, ball, k=0.0, r=1.0)
    with pytest.raises(ValueError):
        UREProblem(f, ball, k=1.0, r=-1.0)
    # r may not exceed the set's prox-regularity constant
    with pytest.raises(ValueError):
        UREProblem(f, Sphere(np.zeros(2), 1.0), k=1.0, r=2.0)


def test_kappa_values():
    f = pull_bifunction([2.0, 0.0])
    ball = Ball(np.zeros(2), 1.0)
    assert UREProblem(f, ball, k=1.0, r=1.0).kappa == pytest.approx(0.5)
    assert UREProblem(f, ball, k=3.0, r=2.0).kappa == pytest.approx(0.75)
    assert UREProblem(f, ball, k=2.0, r=math.inf).kappa == 0.0


def test_solver_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(gamma=1.0)
    with pytest.raises(ValueError):
        SolverConfig(gamma=-0.1)
    with pytest.raises(ValueError):
        SolverConfig(lam=0.0)
    with pytest.raises(ValueError):
        SolverConfig(outer_tol=0.0)
    with pytest.raises(ValueError):
        SolverConfig(max_outer=0)


def test_problem_residual_frozen():
    p = ball_pull()
    # worst feasible direction from the origin is v = (1, 0):
    # <T(0), v> + 0.5*||v||^2 = -2 + 0.5 = -1.5
    assert problem_residual(p, np.zeros(2)) == pytest.approx(1.5, abs=1e-9)
    assert problem_residual(p, np.array([1.0, 0.0])) <= 1e-10


def test_problem_residual_nonnegative_sampled():
    p = ball_pull()
    for u in p.feasible_set.sample(50, seed=5):
        assert problem_residual(p, u) >= 0.0


def test_problem_residual_zero_at_oracle_solution():
    p = ball_pull()
    res = grid_solve(p, GridSpec(400))
    assert res.certified
    assert problem_residual(p, res.point) <= 1e-10


def test_problem_residual_requires_feasible_point():
    with pytest.raises(PointNotInSet):
        problem_residual(ball_pull(), np.array([5.0, 5.0]))


def test_status_values_are_stable_strings():
    assert Status.CONVERGED.value == "converged"
    assert Status.MAX_ITERATIONS.value == "max_iterations"
    assert Status.SUBPROBLEM_FAILED.value == "subproblem_failed"
