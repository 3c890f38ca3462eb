"""
문제 정의 / 평가 콜백 / 해 컨테이너 / 통계 카운터 모듈
- OdeProblem: y' = F(t, y) = A y + g(t, y)
- eval_rhs / eval_jacobian / eval_jacobian_v: 카운터를 올리며 콜백 호출
- ProblemFunctions: 옵션으로 결정된 콜백 묶음 (적분기/평가기가 공유)
- LinearPart: 평가기가 쓰는 A 또는 J(t, y) 원천
"""

from dataclasses import dataclass, field
from typing import Any, Callable, Optional

import numpy as np
from scipy.sparse.linalg import LinearOperator

from .errors import CallbackError, JacobianUnavailableError, ProblemError

_FD_STEP = np.sqrt(np.finfo(float).eps)


@dataclass(frozen=True)
class OdeProblem:
    """
    풀어야 할 방정식

    콜백은 모두 선택사항이며, context 가 주어지면 모든 콜백의 마지막 인자로 전달된다.
    """
    rhs: Callable
    y0: np.ndarray
    t0: float
    t_end: float
    jacobian: Optional[Callable] = None
    jacobian_v: Optional[Callable] = None
    lin_op: Any = None
    lin_op_v: Optional[Callable] = None
    g_fcn: Optional[Callable] = None
    g_jacobian: Optional[Callable] = None
    g_jacobian_v: Optional[Callable] = None
    df_dt: Optional[Callable] = None
    exact: Optional[Callable] = None
    output_times: Optional[np.ndarray] = None
    context: Any = None
    name: str = "ode"

    def __post_init__(self):
        y0 = np.atleast_1d(np.array(self.y0))
        if y0.ndim != 1 or y0.size < 1:
            raise ProblemError("y0 must be a non-empty vector")
        object.__setattr__(self, "y0", y0)

        if self.t0 == self.t_end:
            raise ProblemError("t0 and t_end must differ")

        if self.output_times is not None:
            times = np.asarray(self.output_times, dtype=float).ravel()
            lo, hi = min(self.t0, self.t_end), max(self.t0, self.t_end)
            if times.size < 2:
                raise ProblemError("output_times needs at least two entries")
            if times[0] != self.t0 or times[-1] != self.t_end:
                raise ProblemError("output_times must start at t0 and end at t_end")
            if np.any(times < lo) or np.any(times > hi):
                raise ProblemError("output_times must lie inside the integration interval")
            steps = np.diff(times) * self.t_dir
            if np.any(steps <= 0):
                raise ProblemError("output_times must be strictly monotone in the integration direction")
            object.__setattr__(self, "output_times", times)

    @property
    def dim(self) -> int:
        return int(self.y0.size)

    @property
    def t_dir(self) -> int:
        return 1 if self.t_end > self.t0 else -1

    @property
    def duration(self) -> float:
        return abs(self.t_end - self.t0)

    def callback_args(self, *args) -> tuple:
        if self.context is None:
            return args
        return (*args, self.context)


@dataclass
class StatsCounters:
    """적분 통계 (모두 단조 증가)"""
    n_steps: int = 0
    n_rejected: int = 0
    n_rhs_evals: int = 0
    n_jac_evals: int = 0
    n_linop_evals: int = 0
    n_g_evals: int = 0
    matfun: dict[str, int] = field(default_factory=dict)
    per_flag: dict[str, dict[str, int]] = field(default_factory=dict)

    def bump_matfun(self, key: str, by: int = 1) -> None:
        self.matfun[key] = self.matfun.get(key, 0) + by

    def bump_flag(self, flag: str, key: str, by: int = 1) -> None:
        counters = self.per_flag.setdefault(flag, {})
        counters[key] = counters.get(key, 0) + by

    def matfun_evaluations(self) -> int:
        return self.matfun.get("NofMFEv", 0)

    def report(self) -> str:
        lines = [
            f"{self.n_steps} successful steps",
            f"{self.n_rejected} failed attempts",
            f"{self.n_rhs_evals} function evaluations",
            f"{self.n_jac_evals} jacobian evaluations",
        ]
        if self.n_linop_evals:
            lines.append(f"{self.n_linop_evals} linear operator evaluations")
        for key in sorted(self.matfun):
            lines.append(f"{self.matfun[key]} {key}")
        return "\n".join(lines)


@dataclass
class Solution:
    """
    적분 결과

    t: 시각 벡터, y: 행마다 상태, dense_payload: 스텝별 조밀출력 레코드
    context: ClearInternalData 가 off 일 때만 RunContext 를 보존
    """
    t: np.ndarray
    y: np.ndarray
    stats: StatsCounters
    dense_payload: Optional[list] = None
    t_dir: int = 1
    context: Any = None

    @property
    def final(self) -> tuple[float, np.ndarray]:
        return float(self.t[-1]), self.y[-1]

    def select(self, output_sel: Optional[np.ndarray]) -> np.ndarray:
        """OutputSel 인덱스(0 기반) 열만 반환"""
        if output_sel is None:
            return self.y
        return self.y[:, np.asarray(output_sel, dtype=int)]


def _call(problem: OdeProblem, flag: str, fn: Callable, t: float, *args):
    try:
        return fn(*problem.callback_args(t, *args))
    except (CallbackError, ProblemError):
        raise
    except Exception as e:
        raise CallbackError(flag, t, e) from e


def _check_vector(problem: OdeProblem, v: np.ndarray, what: str) -> np.ndarray:
    v = np.asarray(v)
    if v.ndim != 1 or v.size != problem.dim:
        raise ProblemError(f"dimension mismatch: {what} has shape {v.shape}, expected ({problem.dim},)")
    return v


def eval_rhs(problem: OdeProblem, t: float, y: np.ndarray, stats: Optional[StatsCounters] = None) -> np.ndarray:
    """F(t, y) 평가, n_rhs_evals 증가"""
    y = _check_vector(problem, y, "y")
    res = _call(problem, "rhs", problem.rhs, t, y)
    if stats is not None:
        stats.n_rhs_evals += 1
    return _check_vector(problem, res, "rhs result")


def _fd_jacobian(problem: OdeProblem, t: float, y: np.ndarray, stats: Optional[StatsCounters]) -> np.ndarray:
    f0 = eval_rhs(problem, t, y, stats)
    jac = np.empty((problem.dim, problem.dim), dtype=np.result_type(f0, y, float))
    for j in range(problem.dim):
        delta = _FD_STEP * max(1.0, abs(y[j]))
        shifted = np.array(y, dtype=jac.dtype)
        shifted[j] += delta
        jac[:, j] = (eval_rhs(problem, t, shifted, stats) - f0) / delta
    return jac


def eval_jacobian(
    problem: OdeProblem,
    t: float,
    y: np.ndarray,
    stats: Optional[StatsCounters] = None,
    fd_fallback: bool = False,
) -> np.ndarray:
    """J = ∂F/∂y 평가, n_jac_evals 증가"""
    y = _check_vector(problem, y, "y")
    if problem.jacobian is not None:
        jac = np.asarray(_call(problem, "jacobian", problem.jacobian, t, y))
    elif problem.jacobian_v is not None:
        # 열 단위로 조립
        cols = [eval_jacobian_v(problem, t, y, e, None) for e in np.eye(problem.dim)]
        jac = np.column_stack(cols)
    elif fd_fallback:
        jac = _fd_jacobian(problem, t, y, stats)
    else:
        raise JacobianUnavailableError()

    if jac.shape != (problem.dim, problem.dim):
        raise ProblemError(f"dimension mismatch: jacobian has shape {jac.shape}")
    if stats is not None:
        stats.n_jac_evals += 1
    return jac


def eval_jacobian_v(
    problem: OdeProblem,
    t: float,
    y: np.ndarray,
    v: np.ndarray,
    stats: Optional[StatsCounters] = None,
    fd_fallback: bool = False,
) -> np.ndarray:
    """J·v 평가, n_jac_evals 증가"""
    y = _check_vector(problem, y, "y")
    v = _check_vector(problem, v, "v")
    if problem.jacobian_v is not None:
        res = _call(problem, "jacobian_v", problem.jacobian_v, t, y, v)
    elif problem.jacobian is not None:
        res = np.asarray(_call(problem, "jacobian", problem.jacobian, t, y)) @ v
    elif fd_fallback:
        norm_v = np.linalg.norm(v)
        if norm_v == 0:
            res = np.zeros_like(v)
        else:
            delta = _FD_STEP * max(1.0, np.linalg.norm(y)) / norm_v
            res = (eval_rhs(problem, t, y + delta * v, stats) - eval_rhs(problem, t, y, stats)) / delta
    else:
        raise JacobianUnavailableError()

    if stats is not None:
        stats.n_jac_evals += 1
    return _check_vector(problem, res, "jacobian_v result")


class ProblemFunctions:
    """
    옵션으로 결정된 평가 함수 묶음

    Args:
        problem: 풀 문제
        stats: 카운터
        jacobian / jacobian_v / lin_op / lin_op_v / g_fcn / g_jacobian / g_jacobian_v:
            옵션이 지정한 콜백 (None 이면 사용 안 함)
        semilin: 선형화 적분기에서 J = A + ∂g/∂y 를 쓸지 여부
        fd_fallback: 야코비안 콜백이 없을 때 유한차분 사용
        non_autonomous: ∂F/∂t 보정 사용 여부
    """

    def __init__(
        self,
        problem: OdeProblem,
        stats: StatsCounters,
        jacobian: Optional[Callable] = None,
        jacobian_v: Optional[Callable] = None,
        lin_op: Any = None,
        lin_op_v: Optional[Callable] = None,
        g_fcn: Optional[Callable] = None,
        g_jacobian: Optional[Callable] = None,
        g_jacobian_v: Optional[Callable] = None,
        semilin: bool = False,
        fd_fallback: bool = False,
        non_autonomous: bool = False,
    ):
        self.problem = problem
        self.stats = stats
        self._jacobian = jacobian
        self._jacobian_v = jacobian_v
        self._lin_op = lin_op
        self._lin_op_v = lin_op_v
        self._g_fcn = g_fcn
        self._g_jacobian = g_jacobian
        self._g_jacobian_v = g_jacobian_v
        self.semilin = semilin
        self.fd_fallback = fd_fallback
        self.non_autonomous = non_autonomous
        self._lin_op_matrix: Optional[np.ndarray] = None

    # --- F ---
    def rhs(self, t: float, y: np.ndarray) -> np.ndarray:
        return eval_rhs(self.problem, t, y, self.stats)

    def df_dt(self, t: float, y: np.ndarray) -> np.ndarray:
        """∂F/∂t. 콜백이 없으면 전진차분"""
        if not self.non_autonomous:
            return np.zeros_like(y)
        if self.problem.df_dt is not None:
            return _check_vector(self.problem, _call(self.problem, "df_dt", self.problem.df_dt, t, y), "df_dt result")
        delta = _FD_STEP * max(1.0, abs(t))
        return (self.rhs(t + delta, y) - self.rhs(t, y)) / delta

    # --- 선형 부분 A ---
    @property
    def has_lin_op(self) -> bool:
        return self._lin_op is not None or self._lin_op_v is not None

    @property
    def has_lin_op_matrix(self) -> bool:
        return self._lin_op is not None

    def lin_op_matrix(self) -> np.ndarray:
        if self._lin_op is None:
            raise ProblemError("linear part A is not available as a matrix")
        if self._lin_op_matrix is None:
            A = self._lin_op
            if callable(A):
                A = _call(self.problem, "linop", lambda *args: self._lin_op(*args[1:]), 0.0)
            A = np.asarray(A)
            if A.shape != (self.problem.dim, self.problem.dim):
                raise ProblemError(f"dimension mismatch: linear part has shape {A.shape}")
            self._lin_op_matrix = A
            self.stats.n_linop_evals += 1
        return self._lin_op_matrix

    def lin_op_v(self, v: np.ndarray) -> np.ndarray:
        if self._lin_op_v is not None:
            self.stats.n_linop_evals += 1
            res = _call(self.problem, "linop_v", lambda *args: self._lin_op_v(*args[1:]), 0.0, v)
            return _check_vector(self.problem, res, "linop_v result")
        return self.lin_op_matrix() @ v

    # --- g ---
    @property
    def has_g_fcn(self) -> bool:
        return self._g_fcn is not None

    def g(self, t: float, y: np.ndarray, f: Optional[np.ndarray] = None) -> np.ndarray:
        """비선형 부분 g(t, y). 콜백이 없으면 F - A y (f 가 주어지면 재사용)"""
        if self._g_fcn is not None:
            self.stats.n_g_evals += 1
            return _check_vector(self.problem, _call(self.problem, "g", self._g_fcn, t, y), "g result")
        if f is None:
            f = self.rhs(t, y)
        return f - self.lin_op_v(y)

    # --- J ---
    @property
    def has_jacobian_matrix(self) -> bool:
        if self.semilin:
            return self._lin_op is not None and self._g_jacobian is not None
        return self._jacobian is not None or self.fd_fallback

    @property
    def has_jacobian(self) -> bool:
        if self.semilin:
            return self.has_lin_op and (self._g_jacobian is not None or self._g_jacobian_v is not None)
        return self._jacobian is not None or self._jacobian_v is not None or self.fd_fallback

    def jacobian(self, t: float, y: np.ndarray) -> np.ndarray:
        if self.semilin:
            if self._g_jacobian is None or self._lin_op is None:
                raise JacobianUnavailableError("Semilin needs LinOp and GJacobian as matrices")
            jg = np.asarray(_call(self.problem, "gjacobian", self._g_jacobian, t, y))
            self.stats.n_jac_evals += 1
            return self.lin_op_matrix() + jg
        if self._jacobian is not None:
            jac = np.asarray(_call(self.problem, "jacobian", self._jacobian, t, y))
            if jac.shape != (self.problem.dim, self.problem.dim):
                raise ProblemError(f"dimension mismatch: jacobian has shape {jac.shape}")
            self.stats.n_jac_evals += 1
            return jac
        if self.fd_fallback:
            jac = _fd_jacobian(self.problem, t, y, self.stats)
            self.stats.n_jac_evals += 1
            return jac
        raise JacobianUnavailableError()

    def jacobian_v(self, t: float, y: np.ndarray, v: np.ndarray) -> np.ndarray:
        if self.semilin:
            if self._g_jacobian_v is not None:
                jgv = _call(self.problem, "gjacobian_v", self._g_jacobian_v, t, y, v)
            elif self._g_jacobian is not None:
                jgv = np.asarray(_call(self.problem, "gjacobian", self._g_jacobian, t, y)) @ v
            else:
                raise JacobianUnavailableError("Semilin needs GJacobian or GJacobianV")
            self.stats.n_jac_evals += 1
            return self.lin_op_v(v) + _check_vector(self.problem, jgv, "gjacobian_v result")
        if self._jacobian_v is not None:
            res = _call(self.problem, "jacobian_v", self._jacobian_v, t, y, v)
            self.stats.n_jac_evals += 1
            return _check_vector(self.problem, res, "jacobian_v result")
        if self._jacobian is not None:
            return self.jacobian(t, y) @ v
        if self.fd_fallback:
            return eval_jacobian_v(self.problem, t, y, v, self.stats, fd_fallback=True)
        raise JacobianUnavailableError()

    def linear_part(self, semilinear_integrator: bool) -> "LinearPart":
        return LinearPart(self, semilinear_integrator)


class LinearPart:
    """
    평가기가 사용하는 선형 연산자 원천

    semilinear 적분기는 고정된 A, 선형화 적분기는 J(t, y).
    J 는 마지막 (t, y) 에 대해 캐시되어 적분기와 평가기가 같은 행렬을 공유한다.
    """

    def __init__(self, functions: ProblemFunctions, semilinear: bool):
        self.functions = functions
        self.semilinear = semilinear
        self._key: Optional[tuple] = None
        self._matrix: Optional[np.ndarray] = None
        self.generation = 0

    @property
    def dim(self) -> int:
        return self.functions.problem.dim

    @property
    def explicit_available(self) -> bool:
        if self.semilinear:
            return self.functions.has_lin_op_matrix
        return self.functions.has_jacobian_matrix

    @property
    def available(self) -> bool:
        if self.semilinear:
            return self.functions.has_lin_op
        return self.functions.has_jacobian

    def _cache_key(self, t: float, y: np.ndarray) -> tuple:
        if self.semilinear:
            return ("A",)
        return (float(t), np.asarray(y).tobytes())

    def matrix(self, t: float, y: np.ndarray) -> np.ndarray:
        """A 또는 J(t, y) 를 행렬로 (캐시)"""
        key = self._cache_key(t, y)
        if self._key != key or self._matrix is None:
            if self.semilinear:
                self._matrix = self.functions.lin_op_matrix()
            else:
                self._matrix = self.functions.jacobian(t, y)
            self._key = key
            self.generation += 1
        return self._matrix

    def matvec(self, t: float, y: np.ndarray, v: np.ndarray) -> np.ndarray:
        if self.explicit_available:
            return self.matrix(t, y) @ v
        if self.semilinear:
            return self.functions.lin_op_v(v)
        return self.functions.jacobian_v(t, y, v)

    def operator(self, t: float, y: np.ndarray) -> LinearOperator:
        """(t, y) 에 고정된 scipy LinearOperator"""
        n = self.dim
        dtype = np.result_type(np.asarray(y).dtype, float)
        return LinearOperator((n, n), matvec=lambda v: self.matvec(t, y, np.ravel(v)), dtype=dtype)
