from fractions import Fraction

import numpy as np
import pytest
import scipy.linalg

from conftest import linear_problem, negative_definite
from src.errors import CapabilityError, MatrixFunctionError, StepReductionRequest
from src.exprb import rosenbrock_table
from src.krylov import KrylovEvaluator, arnoldi
from src.matfun import DirectEvaluator, JobTable, resolve_evaluator
from src.options import make_options, validate
from src.phi import PhiTerm, phi, phi_combo
from src.problem import ProblemFunctions, StatsCounters

EXP_AND_PHI1 = JobTable.build((PhiTerm(0), PhiTerm(1)), {"E": [{(0, 1): 1}], "F": [{(1, 1): 1}]})
KROGSTAD_B1 = JobTable.build(
    (PhiTerm(1), PhiTerm(2), PhiTerm(3)),
    {"b1": [{(1, 1): 1, (2, 1): -3, (3, 1): 4}]},
)


def linear_part(A, semilinear=False, matrix_free=False):
    """A 를 선형 부분으로 갖는 LinearPart 와 카운터"""
    problem = linear_problem(A, np.ones(len(A)))
    stats = StatsCounters()
    if semilinear:
        functions = ProblemFunctions(problem, stats, lin_op=A)
    elif matrix_free:
        functions = ProblemFunctions(problem, stats, jacobian_v=problem.jacobian_v)
    else:
        functions = ProblemFunctions(problem, stats, jacobian=problem.jacobian)
    return functions.linear_part(semilinear), stats


def ready(evaluator, A, jobs, h=0.1, **kwargs):
    linear, stats = linear_part(A, **kwargs)
    evaluator.init(linear, {}, stats)
    evaluator.register_jobs(jobs)
    evaluator.init_step(0.0, np.ones(len(A)), h)
    return evaluator, stats


# --- JobTable ---
def test_job_table_rejects_empty_and_wrong_width():
    with pytest.raises(MatrixFunctionError):
        JobTable((PhiTerm(1),), {})
    with pytest.raises(MatrixFunctionError, match="columns"):
        JobTable((PhiTerm(1), PhiTerm(2)), {"F": np.ones((1, 3))})
    with pytest.raises(MatrixFunctionError, match="not a job function"):
        JobTable.build((PhiTerm(1),), {"F": [{(2, 1): 1}]})


def test_exprb43_table_shape():
    table = rosenbrock_table(43)
    assert len(table.job_functions) == 6
    assert set(table.flags()) == {"F", "v", "D2", "D3"}
    assert all(rows.shape[1] == 6 for rows in table.rows.values())


# --- direct ---
def test_direct_scalar_matches_phi_kernel():
    lam, h = -3.0, 0.2
    evaluator, _ = ready(DirectEvaluator(), np.array([[lam]]), rosenbrock_table(43), h)
    result = evaluator.evaluate("F", np.array([1.0]))
    assert result.shape == (1, 2)
    assert result[0, 1] == pytest.approx(phi(1, h * lam), rel=1e-14)
    assert result[0, 0] == pytest.approx(phi(1, h * lam / 2), rel=1e-14)


def test_direct_diagonal_is_componentwise(rng):
    lam = -np.linspace(0.1, 40.0, 8)
    v = rng.standard_normal(8)
    evaluator, _ = ready(DirectEvaluator(), np.diag(lam), KROGSTAD_B1, h=0.3)
    result = evaluator.evaluate("b1", v)[:, 0]
    expected = [phi_combo([1, -3, 4], [(1, 1), (2, 1), (3, 1)], 0.3 * l) * vi for l, vi in zip(lam, v)]
    np.testing.assert_allclose(result, expected, rtol=1e-12, atol=1e-15)


def test_direct_matches_expm(rng):
    A = negative_definite(12, rng, spread=30)
    v = rng.standard_normal(12)
    h = 0.15
    evaluator, _ = ready(DirectEvaluator(), A, EXP_AND_PHI1, h)
    E = scipy.linalg.expm(h * A)
    np.testing.assert_allclose(evaluator.evaluate("E", v)[:, 0], E @ v, rtol=1e-11, atol=1e-12)
    expected_phi1 = np.linalg.solve(h * A, (E - np.eye(12)) @ v)
    np.testing.assert_allclose(evaluator.evaluate("F", v)[:, 0], expected_phi1, rtol=1e-11, atol=1e-12)


def test_direct_diagonalises_once_per_point(rng):
    A = negative_definite(6, rng)
    evaluator, stats = ready(DirectEvaluator(), A, EXP_AND_PHI1)
    v = rng.standard_normal(6)
    evaluator.evaluate("E", v)
    evaluator.evaluate("F", v)
    assert stats.matfun["NofDiag"] == 1
    assert stats.matfun["NofMFEv"] == 2

    # 같은 (t, y) 에서 h 만 바뀌면 다시 분해하지 않는다
    evaluator.init_step(0.0, np.ones(6), 0.05)
    evaluator.evaluate("E", v)
    assert stats.matfun["NofDiag"] == 1
    assert stats.per_flag["E"]["NofMFEv"] == 2


def test_zero_step_gives_phi_at_zero(rng):
    v = rng.standard_normal(5)
    evaluator, _ = ready(DirectEvaluator(), negative_definite(5, rng), KROGSTAD_B1, h=0.0)
    np.testing.assert_allclose(evaluator.evaluate("b1", v)[:, 0], (1 - 1.5 + 4 / 6) * v, rtol=1e-13)


def test_facs_layout(rng):
    lam = -np.array([0.5, 2.0, 9.0])
    v = rng.standard_normal(3)
    evaluator, _ = ready(DirectEvaluator(), np.diag(lam), EXP_AND_PHI1, h=0.1)
    result = evaluator.evaluate("F", v, facs=3)
    assert result.shape == (3, 3)
    for j in range(1, 4):
        np.testing.assert_allclose(result[:, j - 1], phi(1, j * 0.1 * lam) * v, rtol=1e-13)


def test_direct_is_linear(rng):
    A = negative_definite(8, rng)
    evaluator, _ = ready(DirectEvaluator(), A, KROGSTAD_B1)
    u, w = rng.standard_normal(8), rng.standard_normal(8)
    combined = evaluator.evaluate("b1", 2.0 * u - 0.5 * w)
    separate = 2.0 * evaluator.evaluate("b1", u) - 0.5 * evaluator.evaluate("b1", w)
    np.testing.assert_allclose(combined, separate, rtol=1e-11, atol=1e-13)


def test_reuse_with_direct_is_bitwise(rng):
    evaluator, _ = ready(DirectEvaluator(), negative_definite(8, rng), KROGSTAD_B1)
    v = rng.standard_normal(8)
    first = evaluator.evaluate("b1", v, reusable=True)
    again = evaluator.evaluate("b1", v, reusable=True, reuse=True)
    assert np.array_equal(first, again)


def test_semilinear_part_uses_lin_op(rng):
    A = negative_definite(4, rng)
    evaluator, _ = ready(DirectEvaluator(), A, EXP_AND_PHI1, h=0.5, semilinear=True)
    v = rng.standard_normal(4)
    np.testing.assert_allclose(evaluator.evaluate("E", v)[:, 0], scipy.linalg.expm(0.5 * A) @ v, rtol=1e-11)


# --- 프로토콜 위반 ---
def test_protocol_order_is_enforced(rng):
    A = negative_definite(3, rng)
    evaluator = DirectEvaluator()
    linear, stats = linear_part(A)
    with pytest.raises(MatrixFunctionError):
        evaluator.register_jobs(EXP_AND_PHI1)
    evaluator.init(linear, {}, stats)
    with pytest.raises(MatrixFunctionError):
        evaluator.init_step(0.0, np.ones(3), 0.1)
    evaluator.register_jobs(EXP_AND_PHI1)
    with pytest.raises(MatrixFunctionError):
        evaluator.evaluate("F", np.ones(3))
    evaluator.init_step(0.0, np.ones(3), 0.1)
    with pytest.raises(MatrixFunctionError, match="unknown job flag"):
        evaluator.evaluate("v", np.ones(3))
    with pytest.raises(MatrixFunctionError, match="dimension mismatch"):
        evaluator.evaluate("F", np.ones(2))


def test_direct_needs_explicit_matrix(rng):
    linear, stats = linear_part(negative_definite(4, rng), matrix_free=True)
    with pytest.raises(CapabilityError):
        DirectEvaluator().init(linear, {}, stats)


def test_caps_flags(rng):
    A = negative_definite(4, rng)
    linear, stats = linear_part(A)
    assert DirectEvaluator().init(linear, {}, stats).need_jac_explicit

    linear, stats = linear_part(A, matrix_free=True)
    caps = KrylovEvaluator().init(linear, {}, stats)
    assert not caps.need_jac_explicit and not caps.need_gjac_explicit


def test_cleanup_description_and_statistics(rng):
    evaluator = DirectEvaluator()
    linear, stats = linear_part(negative_definite(3, rng))
    evaluator.init(linear, {}, stats)
    assert evaluator.description() == "directly by diagonalisation"
    assert evaluator.statistics() == "NofMFEv = 0\nNofDiag = 0"
    evaluator.cleanup()
    evaluator.cleanup()
    assert evaluator.jobs is None
    assert KrylovEvaluator().description() == "using a Krylov subspace method"


def test_resolve_evaluator_from_options():
    assert isinstance(resolve_evaluator(validate(make_options("exprb"))), DirectEvaluator)
    assert isinstance(resolve_evaluator(validate(make_options("exprb", MatrixFunctions="arnoldi"))),
                      KrylovEvaluator)

    custom = DirectEvaluator()
    assert resolve_evaluator(validate(make_options("exprb", MatrixFunctions=custom))) is custom
    made = resolve_evaluator(validate(make_options("exprb", MatrixFunctions=lambda: KrylovEvaluator(max_dim=5))))
    assert isinstance(made, KrylovEvaluator)


# --- Krylov ---
def test_arnoldi_relation(rng):
    A = rng.standard_normal((20, 20))
    state = arnoldi(lambda x: A @ x, rng.standard_normal(20), 8)
    V, H = state.V[:, : state.m + 1], state.H[: state.m + 1, : state.m]
    np.testing.assert_allclose(A @ state.basis, V @ H, atol=1e-12)
    np.testing.assert_allclose(state.basis.T @ state.basis, np.eye(8), atol=1e-13)
    assert state.hessenberg.shape == (8, 8)


def test_full_krylov_matches_direct(rng):
    n = 30
    A = rng.standard_normal((n, n)) / np.sqrt(n) - 2.0 * np.eye(n)
    v = rng.standard_normal(n)
    direct, _ = ready(DirectEvaluator(), A, rosenbrock_table(43), h=0.5)
    krylov, stats = ready(KrylovEvaluator(max_dim=n, tol=1e-15), A, rosenbrock_table(43), h=0.5)
    for flag in ("F", "D2"):
        expected = direct.evaluate(flag, v)
        np.testing.assert_allclose(krylov.evaluate(flag, v), expected, rtol=1e-10,
                                   atol=1e-10 * np.max(np.abs(expected)))
    assert stats.matfun["NofMatVec"] > 0


def test_matrix_free_krylov_matches_direct(rng):
    A = negative_definite(25, rng, spread=20)
    v = rng.standard_normal(25)
    direct, _ = ready(DirectEvaluator(), A, EXP_AND_PHI1, h=0.2)
    krylov, _ = ready(KrylovEvaluator(tol=1e-12), A, EXP_AND_PHI1, h=0.2, matrix_free=True)
    np.testing.assert_allclose(krylov.evaluate("E", v), direct.evaluate("E", v), atol=1e-9)


def test_linear_operator_view(rng):
    A = negative_definite(6, rng)
    linear, stats = linear_part(A, matrix_free=True)
    op = linear.operator(0.0, np.ones(6))
    v = rng.standard_normal(6)
    assert op.shape == (6, 6)
    np.testing.assert_allclose(op.matvec(v), A @ v, rtol=1e-14)
    np.testing.assert_allclose(op @ v, A @ v, rtol=1e-14)
    assert stats.n_jac_evals == 2


@pytest.mark.parametrize("matrix_free", [False, True])
def test_krylov_is_linear(rng, matrix_free):
    A = negative_definite(30, rng, spread=40)
    u, w = rng.standard_normal(30), rng.standard_normal(30)
    krylov, _ = ready(KrylovEvaluator(tol=1e-12), A, KROGSTAD_B1, h=0.1, matrix_free=matrix_free)
    combined = krylov.evaluate("b1", 2.0 * u - 0.5 * w)
    separate = 2.0 * krylov.evaluate("b1", u) - 0.5 * krylov.evaluate("b1", w)
    np.testing.assert_allclose(combined, separate, rtol=0, atol=1e-9)


def test_scale_above_one(rng):
    # exp4 의 중간 단계는 h/3 스텝에 대해 배율 3/2
    lam = -np.array([0.5, 3.0, 12.0])
    jobs = JobTable.build((PhiTerm(2, Fraction(3, 2)),), {"v": [{(2, Fraction(3, 2)): 1}]})
    v = rng.standard_normal(3)
    expected = phi(2, 0.15 * lam) * v
    for evaluator in (DirectEvaluator(), KrylovEvaluator(tol=1e-14)):
        ready(evaluator, np.diag(lam), jobs, h=0.1)
        np.testing.assert_allclose(evaluator.evaluate("v", v)[:, 0], expected, rtol=1e-10)


def test_happy_breakdown_is_exact():
    lam = -np.array([1.0, 4.0, 9.0, 16.0])
    v = np.array([1.0, 0.0, 0.0, 0.0])
    krylov, stats = ready(KrylovEvaluator(tol=1e-14), np.diag(lam), EXP_AND_PHI1, h=0.3)
    result = krylov.evaluate("F", v)[:, 0]
    np.testing.assert_allclose(result, phi(1, 0.3 * lam) * v, rtol=1e-14, atol=1e-16)
    assert stats.per_flag["F"]["dimension"] == 1


def test_krylov_reuse_agrees(rng):
    A = negative_definite(40, rng, spread=100)
    v = rng.standard_normal(40)
    krylov, stats = ready(KrylovEvaluator(tol=1e-10), A, EXP_AND_PHI1, h=0.05)
    first = krylov.evaluate("F", v, reusable=True)
    again = krylov.evaluate("F", v, reusable=True, reuse=True)
    np.testing.assert_allclose(again, first, rtol=1e-12, atol=1e-14)
    assert stats.per_flag["F"]["reused"] == 1


def test_krylov_requests_smaller_step(rng):
    A = negative_definite(30, rng, spread=1000)
    krylov, _ = ready(KrylovEvaluator(max_dim=2, tol=1e-14), A, EXP_AND_PHI1, h=1.0)
    with pytest.raises(StepReductionRequest) as excinfo:
        krylov.evaluate("E", rng.standard_normal(30))
    assert excinfo.value.factor == 0.5


def test_krylov_test_index_out_of_range(rng):
    linear, stats = linear_part(negative_definite(3, rng))
    with pytest.raises(CapabilityError):
        KrylovEvaluator(test_index=5).init(linear, {}, stats)
