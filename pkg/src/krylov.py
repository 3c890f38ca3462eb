"""
Krylov (Arnoldi) 행렬함수 평가기 모듈
- ArnoldiState: 수정 Gram-Schmidt + 재직교화, 기저를 단계적으로 확장
- KrylovEvaluator: β V_m φ(h H_m) e₁ 근사, 행렬-벡터 곱만 필요
"""

import logging
from dataclasses import dataclass
from typing import Callable, Mapping, Optional

import numpy as np
import scipy.linalg

from .errors import CapabilityError, MatrixFunctionError, StepReductionRequest
from .matfun import JobTable, MatrixFunctionEvaluator, apply_eigen, eigen_decompose

logger = logging.getLogger("expokit.matFunLog")

MAX_KRYLOV_DIM = 36
_BREAKDOWN_TOL = 1e-14


@dataclass
class ArnoldiState:
    """
    Arnoldi 분해 A V_m = V_{m+1} H̄_m 의 현재 상태

    V: n × (max_dim+1) 정규직교 기저, H: (max_dim+1) × max_dim Hessenberg
    """
    V: np.ndarray
    H: np.ndarray
    beta: float
    max_dim: int
    m: int = 0
    breakdown: bool = False
    matvecs: int = 0

    @classmethod
    def start(cls, v: np.ndarray, max_dim: int) -> "ArnoldiState":
        n = v.size
        dtype = np.result_type(v.dtype, float)
        V = np.zeros((n, max_dim + 1), dtype=dtype)
        H = np.zeros((max_dim + 1, max_dim), dtype=dtype)
        beta = float(np.linalg.norm(v))
        if beta > 0:
            V[:, 0] = v / beta
        return cls(V, H, beta, max_dim)

    @property
    def exhausted(self) -> bool:
        return self.breakdown or self.m >= self.max_dim

    def extend(self, matvec: Callable[[np.ndarray], np.ndarray]) -> None:
        """기저 벡터 하나 추가"""
        if self.exhausted:
            raise MatrixFunctionError("Krylov subspace can not be extended")
        j = self.m
        w = np.asarray(matvec(self.V[:, j]), dtype=self.V.dtype)
        self.matvecs += 1
        for _ in range(2):
            for i in range(j + 1):
                c = np.vdot(self.V[:, i], w)
                self.H[i, j] += c
                w = w - c * self.V[:, i]
        h_next = float(np.linalg.norm(w))
        self.H[j + 1, j] = h_next
        self.m = j + 1

        h_norm = float(np.linalg.norm(self.H[: self.m + 1, : self.m]))
        # 불변 부분공간이거나 전체 차원에 도달하면 정확
        if h_next <= _BREAKDOWN_TOL * max(h_norm, np.finfo(float).tiny) or self.m == self.V.shape[0]:
            self.breakdown = True
        else:
            self.V[:, j + 1] = w / h_next

    @property
    def hessenberg(self) -> np.ndarray:
        return self.H[: self.m, : self.m]

    @property
    def basis(self) -> np.ndarray:
        return self.V[:, : self.m]


def arnoldi(matvec: Callable[[np.ndarray], np.ndarray], v: np.ndarray, m: int) -> ArnoldiState:
    """v 에서 시작해 m 차원 (또는 breakdown 까지) Arnoldi 분해"""
    v = np.asarray(v)
    state = ArnoldiState.start(v, min(m, v.size))
    if state.beta == 0:
        return state
    while not state.exhausted:
        state.extend(matvec)
    return state


def _phi_columns_expm(jobs: JobTable, flag: str, H: np.ndarray, h: float, facs: int) -> np.ndarray:
    """고유값분해가 불안정할 때: 확장행렬 지수로 φ_k(τH)e₁ 계산"""
    m = H.shape[0]
    table = jobs.rows[flag]
    out = np.zeros((m, table.shape[0] * facs), dtype=np.result_type(H.dtype, float))
    e1 = np.zeros(m)
    e1[0] = 1.0
    for j in range(1, facs + 1):
        columns = []
        for term in jobs.job_functions:
            tau = j * h * float(term.scale)
            k = term.k
            if k == 0:
                columns.append(scipy.linalg.expm(tau * H) @ e1)
                continue
            big = np.zeros((m + k, m + k), dtype=out.dtype)
            big[:m, :m] = tau * H
            big[:m, m] = e1
            for i in range(k - 1):
                big[m + i, m + i + 1] = 1.0
            columns.append(scipy.linalg.expm(big)[:m, -1])
        values = np.column_stack(columns)
        combo = values @ table.T
        for r in range(table.shape[0]):
            out[:, r * facs + (j - 1)] = combo[:, r]
    return out


class KrylovEvaluator(MatrixFunctionEvaluator):
    """
    Arnoldi 기반 평가기

    Args:
        max_dim: 부분공간 최대 차원 (기본 min(n, 36))
        tol: 수렴 허용오차 (기본 AbsTol / 100)
        test_index: 수렴 감시 성분 (0 기반, 기본 KrylovTestIndex - 1)
    """

    need_explicit = False
    description_text = "using a Krylov subspace method"

    def __init__(self, max_dim: Optional[int] = None, tol: Optional[float] = None,
                 test_index: Optional[int] = None):
        super().__init__()
        self._max_dim_arg = max_dim
        self._tol_arg = tol
        self._test_index_arg = test_index
        self.max_dim = MAX_KRYLOV_DIM
        self.tol = 1e-8
        self.test_index = 0

    def counter_names(self) -> tuple[str, ...]:
        return ("NofMFEv", "NofMatVec")

    def _setup(self, options: Mapping) -> None:
        n = self.linear.dim
        self.max_dim = min(n, self._max_dim_arg or MAX_KRYLOV_DIM)
        if self._tol_arg is not None:
            self.tol = float(self._tol_arg)
        else:
            self.tol = float(np.min(options.get("AbsTol", 1e-6))) * 1e-2
        if self._test_index_arg is not None:
            self.test_index = int(self._test_index_arg)
        else:
            self.test_index = int(options.get("KrylovTestIndex", 1)) - 1
        if not 0 <= self.test_index < n:
            raise CapabilityError(f"KrylovTestIndex {self.test_index + 1} exceeds the dimension {n}")

    def _project(self, flag: str, state: ArnoldiState, h: float, facs: int,
                 m: Optional[int] = None) -> tuple[np.ndarray, np.ndarray]:
        """앞쪽 m 개 기저 (기본 전부) 로 근사"""
        m = state.m if m is None else m
        H = state.H[:m, :m]
        try:
            lam, W = eigen_decompose(H)
            e1 = np.zeros(m, dtype=W.dtype)
            e1[0] = 1.0
            coords = np.linalg.solve(W, e1)
            small = apply_eigen(self.jobs, flag, W, lam, coords, h, facs)
        except MatrixFunctionError:
            small = _phi_columns_expm(self.jobs, flag, H, h, facs)
        return state.beta * (state.V[:, :m] @ small), small

    def _evaluate(self, flag, v, t, y, h, reusable, reuse, facs) -> np.ndarray:
        key = (float(t), y.tobytes(), v.tobytes())
        state: Optional[ArnoldiState] = None
        saved = self.caps.save.get(flag)
        if reuse and saved is not None and saved[0] == key:
            state = saved[1]
            self.stats.bump_flag(flag, "reused")
        if state is None:
            state = ArnoldiState.start(v, self.max_dim)

        cols = self.jobs.rows[flag].shape[0] * facs
        if state.beta == 0:
            return np.zeros((v.size, cols), dtype=state.V.dtype)

        operator = self.linear.operator(t, y)

        def matvec(x: np.ndarray) -> np.ndarray:
            self.stats.bump_matfun("NofMatVec")
            return operator.matvec(x)

        if reusable:
            self.caps.save[flag] = (key, state)

        previous: Optional[np.ndarray] = None
        if state.m == 0:
            state.extend(matvec)
        elif state.m > 1:
            # 재사용한 기저: 한 차원 작은 근사를 직전 반복값으로
            previous = self._project(flag, state, h, facs, state.m - 1)[0][self.test_index]
        while True:
            approx, small = self._project(flag, state, h, facs)
            if state.breakdown:
                break
            watched = approx[self.test_index]
            threshold = self.tol * max(1.0, float(np.max(np.abs(watched))))
            residual = state.beta * abs(state.H[state.m, state.m - 1]) * float(np.max(np.abs(small[-1])))
            if previous is not None and np.max(np.abs(watched - previous)) <= threshold and residual <= threshold:
                break
            if state.exhausted:
                logger.debug("Krylov not converged for '%s' at dimension %d (h=%g)", flag, state.m, h)
                raise StepReductionRequest(0.5, f"Krylov iteration for '{flag}' did not converge")
            previous = watched
            state.extend(matvec)

        self.stats.bump_flag(flag, "dimension", state.m)
        return approx
