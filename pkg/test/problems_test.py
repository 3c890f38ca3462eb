import numpy as np
import pytest

from src.driver import integrate
from src.errors import ProblemError
from src.options import INTEGRATOR_NAMES, make_options
from src.problems import (
    PROBLEMS,
    grid,
    heat1d,
    heat1d_mode_decay,
    laplacian,
    make_problem,
    minimal_example,
    semi1,
)


def fd_jacobian(f, t, y, delta=1e-6):
    n = y.size
    J = np.empty((n, n))
    for j in range(n):
        e = np.zeros(n)
        e[j] = delta
        J[:, j] = (f(t, y + e) - f(t, y - e)) / (2 * delta)
    return J


def test_grid_and_laplacian():
    x, dx = grid(4)
    np.testing.assert_allclose(x, [0.2, 0.4, 0.6, 0.8])
    L = laplacian(4, dx)
    sums = L.sum(axis=1)
    np.testing.assert_allclose(sums[1:-1], 0.0, atol=1e-9)
    np.testing.assert_allclose(sums[[0, -1]], -1 / dx**2)


@pytest.mark.parametrize("N", [2, 3.5, -1])
def test_grid_rejects_small_or_fractional_sizes(N):
    with pytest.raises(ProblemError):
        grid(N)


def test_semi1_exact_solution_solves_the_grid_ode(rng):
    setup = semi1(N=20)
    problem = setup.problem
    np.testing.assert_array_equal(problem.exact(0.0), problem.y0)
    for t in rng.uniform(0.0, 1.0, 5):
        derivative = -problem.exact(t)
        defect = derivative - problem.rhs(t, problem.exact(t))
        assert np.max(np.abs(defect)) <= 1e-12


def test_semi1_callbacks_are_consistent(rng):
    problem = semi1(N=10).problem
    t = 0.3
    y = problem.y0 + 0.01 * rng.standard_normal(10)
    J = problem.jacobian(t, y)
    np.testing.assert_allclose(J, fd_jacobian(problem.rhs, t, y), atol=5e-6 * np.max(np.abs(J)))
    v = rng.standard_normal(10)
    np.testing.assert_allclose(problem.jacobian_v(t, y, v), J @ v, rtol=1e-12, atol=1e-10)
    np.testing.assert_allclose(problem.lin_op + problem.g_jacobian(t, y), J, rtol=1e-14)
    np.testing.assert_allclose(problem.rhs(t, y), problem.lin_op @ y + problem.g_fcn(t, y), rtol=1e-14)

    dt = 1e-6
    fd_dt = (problem.rhs(t + dt, y) - problem.rhs(t - dt, y)) / (2 * dt)
    np.testing.assert_allclose(problem.df_dt(t, y), fd_dt, rtol=1e-6, atol=1e-6)


SMALL_PARAMS = {"heat1d": dict(N=8), "semi1": dict(N=8), "minimal_example": dict()}


@pytest.mark.parametrize("name", sorted(PROBLEMS))
def test_jacobian_columns_match_jacobian_v(name, rng):
    problem = make_problem(name, **SMALL_PARAMS[name]).problem
    n = problem.dim
    t = 0.4
    y = problem.y0 + 0.01 * rng.standard_normal(n)
    J = problem.jacobian(t, y)
    np.testing.assert_allclose(J, fd_jacobian(problem.rhs, t, y), atol=5e-6 * max(1.0, np.max(np.abs(J))))
    np.testing.assert_allclose(np.asarray(problem.lin_op) + problem.g_jacobian(t, y), J, rtol=1e-14, atol=1e-14)
    for k in range(n):
        e = np.zeros(n)
        e[k] = 1.0
        if problem.jacobian_v is not None:
            assert np.linalg.norm(J @ e - problem.jacobian_v(t, y, e)) <= 1e-12 * max(1.0, np.linalg.norm(J[:, k]))
        if problem.g_jacobian_v is not None:
            np.testing.assert_allclose(problem.g_jacobian_v(t, y, e), problem.g_jacobian(t, y)[:, k], atol=1e-14)


def test_heat1d_parameters():
    setup = heat1d(epsilon=0.5, gamma=0.0, N=8)
    A = setup.problem.lin_op
    assert A.shape == (8, 8)
    _, dx = grid(8)
    assert A[0, 0] == pytest.approx(-2 * 0.5 / dx**2)
    assert setup.parameters == {"epsilon": 0.5, "gamma": 0.0, "N": 8}
    assert setup.options.integrator == "exprb"
    np.testing.assert_array_equal(setup.problem.g_fcn(0.3, setup.problem.y0), 0.0)


def test_heat1d_rejects_bad_diffusion():
    with pytest.raises(ProblemError):
        heat1d(epsilon=0.0)
    with pytest.raises(ProblemError):
        heat1d(epsilon=-1.0)


def test_heat1d_defaults_reach_the_end():
    setup = heat1d()
    sol = integrate(setup.problem, setup.options)
    assert sol.t[0] == 0.0 and sol.t[-1] == 1.0
    assert np.all(np.isfinite(sol.y))


def test_heat1d_mode_decay_without_source():
    setup = heat1d(gamma=0.0, N=40)
    opts = setup.options.with_option("Order", "43").with_option("RelTol", 1e-10).with_option("AbsTol", 1e-12)
    sol = integrate(setup.problem, opts)
    np.testing.assert_allclose(sol.final[1], heat1d_mode_decay(setup, 1.0), atol=1e-8)


def test_make_problem():
    assert set(PROBLEMS) == {"heat1d", "semi1", "minimal_example"}
    assert make_problem("semi1", N=12).parameters == {"N": 12}
    with pytest.raises(ProblemError, match="unknown problem"):
        make_problem("brusselator")
    with pytest.raises(ProblemError, match="invalid parameters"):
        make_problem("semi1", M=3)


@pytest.mark.parametrize("integrator", INTEGRATOR_NAMES)
def test_minimal_example_runs_everywhere(integrator):
    problem = minimal_example().problem
    sol = integrate(problem, make_options(integrator))
    assert sol.t[-1] == 1.0
    assert np.all(np.isfinite(sol.final[1]))
    # 선형부가 지배하는 해: y1 ≈ e^{-1}
    assert sol.final[1][0] == pytest.approx(np.exp(-1.0), abs=0.05)
