"""
행렬함수 평가기 모듈
- JobTable: 플래그별 φ 조합 계수표
- MatrixFunctionEvaluator: init → register_jobs → (init_step → evaluate*)* → cleanup 수명주기
- DirectEvaluator: 고유값분해 기반 (작은 시스템용)
- resolve_evaluator: MatrixFunctions 옵션 값 → 평가기 인스턴스
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Mapping, Optional, Sequence

import numpy as np
import scipy.linalg

from .errors import CapabilityError, JacobianUnavailableError, MatrixFunctionError
from .phi import PhiTerm
from .problem import LinearPart, StatsCounters

logger = logging.getLogger("expokit.matFunLog")

# cond(S) 한계: 1 / (100 eps)
_COND_LIMIT = 1.0 / (100.0 * np.finfo(float).eps)

PhiRow = Mapping[tuple[int, Any], Any]


@dataclass(frozen=True)
class JobTable:
    """
    플래그 → 계수 행렬 (rows × len(job_functions))

    k 번째 행은 Σ_m rows[flag][k, m] · job_functions[m](hM) v 를 뜻한다.
    """
    job_functions: tuple[PhiTerm, ...]
    rows: Mapping[str, np.ndarray]

    def __post_init__(self):
        if not self.rows:
            raise MatrixFunctionError("job table is empty")
        width = len(self.job_functions)
        checked = {}
        for flag, table in self.rows.items():
            table = np.atleast_2d(np.asarray(table, dtype=float))
            if table.shape[0] < 1:
                raise MatrixFunctionError(f"job flag '{flag}' has no rows")
            if table.shape[1] != width:
                raise MatrixFunctionError(
                    f"job flag '{flag}' has {table.shape[1]} columns, expected {width}"
                )
            checked[flag] = table
        object.__setattr__(self, "rows", checked)

    @classmethod
    def build(cls, job_functions: Sequence[PhiTerm], jobs: Mapping[str, Sequence[PhiRow]]) -> "JobTable":
        """
        {(k, scale): 계수} 행 목록으로 JobTable 생성

        Args:
            job_functions: 적분기가 선언한 φ 목록
            jobs: 플래그 → 행 목록. 각 행은 (φ 인덱스, 배율) → 계수 맵
        """
        terms = tuple(job_functions)
        index = {(term.k, term.scale): i for i, term in enumerate(terms)}
        rows = {}
        for flag, flag_rows in jobs.items():
            table = np.zeros((len(flag_rows), len(terms)))
            for r, row in enumerate(flag_rows):
                for (k, scale), coeff in row.items():
                    key = (k, Fraction(scale))
                    if key not in index:
                        raise MatrixFunctionError(
                            f"job flag '{flag}' uses phi{k}(h*{scale}) which is not a job function"
                        )
                    table[r, index[key]] += float(coeff)
            rows[flag] = table
        return cls(terms, rows)

    def flags(self) -> tuple[str, ...]:
        return tuple(self.rows)

    def scalar_weights(self, flag: str, z: np.ndarray, facs: int = 1) -> np.ndarray:
        """
        고유값 z 에서의 스칼라 가중치

        Returns:
            (len(z), rows*facs) 배열. 열 k*facs + (j-1) 은 배율 j 의 k 번째 행
        """
        table = self.rows[flag]
        z = np.asarray(z)
        out = np.zeros((z.size, table.shape[0] * facs), dtype=np.result_type(z.dtype, float))
        for j in range(1, facs + 1):
            values = np.column_stack([term(j * z) for term in self.job_functions])
            combo = values @ table.T
            for k in range(table.shape[0]):
                out[:, k * facs + (j - 1)] = combo[:, k]
        return out


@dataclass
class EvaluatorCaps:
    """평가기 능력 플래그와 플래그별 저장공간"""
    need_jac_explicit: bool
    need_gjac_explicit: bool
    description: str
    save: dict[str, Any] = field(default_factory=dict)
    stats: dict[str, dict[str, int]] = field(default_factory=dict)


class MatrixFunctionEvaluator:
    """
    행렬함수 평가기 기본 클래스

    사용자 평가기는 이 클래스를 상속해 _evaluate 를 구현하거나,
    같은 메서드 집합을 가진 객체를 MatrixFunctions 옵션으로 넘긴다.
    """

    need_explicit = False
    description_text = "by a user supplied evaluator"

    def __init__(self):
        self.caps: Optional[EvaluatorCaps] = None
        self.jobs: Optional[JobTable] = None
        self.linear: Optional[LinearPart] = None
        self.stats: Optional[StatsCounters] = None
        self._step: Optional[tuple[float, np.ndarray, float]] = None

    # --- 수명주기 ---
    def init(self, linear: LinearPart, options: Optional[Mapping] = None,
             stats: Optional[StatsCounters] = None) -> EvaluatorCaps:
        if not linear.available:
            if linear.semilinear:
                raise CapabilityError("linear part A is not available (LinOp / LinOpV)")
            raise JacobianUnavailableError("no Jacobian or Jacobian-vector product")
        if self.need_explicit and not linear.explicit_available:
            raise CapabilityError(
                f"matrix functions {self.description_text} need an explicit matrix; "
                "use MatrixFunctions='arnoldi' for matrix-free problems"
            )
        self.linear = linear
        self.stats = stats if stats is not None else StatsCounters()
        self.caps = EvaluatorCaps(self.need_explicit, self.need_explicit, self.description())
        self.stats.matfun.update({key: 0 for key in self.counter_names()})
        self.jobs = None
        self._step = None
        self._setup(options or {})
        return self.caps

    def _setup(self, options: Mapping) -> None:
        pass

    def counter_names(self) -> tuple[str, ...]:
        return ("NofMFEv",)

    def register_jobs(self, jobs: JobTable) -> None:
        if self.caps is None:
            raise MatrixFunctionError("register_jobs called before init")
        if not isinstance(jobs, JobTable):
            raise MatrixFunctionError("register_jobs expects a JobTable")
        self.jobs = jobs
        self.caps.save.clear()
        logger.debug("registered job flags: %s", ", ".join(jobs.flags()))

    def init_step(self, t: float, y: np.ndarray, h: float) -> None:
        if self.jobs is None:
            raise MatrixFunctionError("init_step called before register_jobs")
        self._step = (t, np.asarray(y), float(h))
        self._prepare(t, np.asarray(y), float(h))

    def _prepare(self, t: float, y: np.ndarray, h: float) -> None:
        pass

    def evaluate(self, flag: str, v: np.ndarray, reusable: bool = False,
                 reuse: bool = False, facs: int = 1) -> np.ndarray:
        """
        Σ_m job[k][m] · φ_m(j h M) v 계산

        Returns:
            n × (rows·facs) 행렬. 열 k*facs + (j-1) 은 k 번째 행, 배율 j
        """
        if self.jobs is None or self._step is None:
            raise MatrixFunctionError("evaluate called before init_step")
        if flag not in self.jobs.rows:
            raise MatrixFunctionError(f"unknown job flag '{flag}'")
        if facs < 1:
            raise MatrixFunctionError("facs must be at least 1")
        v = np.asarray(v)
        if v.ndim != 1 or v.size != self.linear.dim:
            raise MatrixFunctionError("dimension mismatch: evaluate vector")

        t, y, h = self._step
        result = self._evaluate(flag, v, t, y, h, reusable, reuse, facs)
        self.stats.bump_matfun("NofMFEv")
        self.stats.bump_flag(flag, "NofMFEv")
        if not np.iscomplexobj(v) and not np.iscomplexobj(y) and np.iscomplexobj(result):
            result = result.real
        return result

    def _evaluate(self, flag, v, t, y, h, reusable, reuse, facs) -> np.ndarray:
        raise NotImplementedError

    def cleanup(self) -> None:
        if self.caps is not None:
            self.caps.save.clear()
        self.jobs = None
        self._step = None

    def description(self) -> str:
        return self.description_text

    def statistics(self) -> str:
        stats = self.stats or StatsCounters()
        lines = [f"{key} = {stats.matfun.get(key, 0)}" for key in self.counter_names()]
        for flag in sorted(stats.per_flag):
            counters = ", ".join(f"{k}={v}" for k, v in sorted(stats.per_flag[flag].items()))
            lines.append(f"  {flag}: {counters}")
        return "\n".join(lines)


def apply_eigen(jobs: JobTable, flag: str, vecs: np.ndarray, lam: np.ndarray,
                coords: np.ndarray, h: float, facs: int) -> np.ndarray:
    """S · diag(w(hλ)) · coords 를 행/배율별로 계산 (coords = S⁻¹ v)"""
    weights = jobs.scalar_weights(flag, h * lam, facs)
    return vecs @ (weights * coords[:, None])


def eigen_decompose(matrix: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """M = S Λ S⁻¹. S 가 거의 특이하면 MatrixFunctionError"""
    lam, vecs = scipy.linalg.eig(matrix)
    if not np.all(np.isfinite(lam)):
        raise MatrixFunctionError("diagonalisation failed: non-finite eigenvalues")
    cond = np.linalg.cond(vecs)
    if not np.isfinite(cond) or cond > _COND_LIMIT:
        raise MatrixFunctionError(
            f"diagonalisation is ill-conditioned (cond={cond:.2e}); use MatrixFunctions='arnoldi'"
        )
    return lam, vecs


class DirectEvaluator(MatrixFunctionEvaluator):
    """고유값분해로 φ(hM)v 를 직접 계산. 행렬은 (t, y) 가 바뀔 때만 다시 분해한다."""

    need_explicit = True
    description_text = "directly by diagonalisation"

    def __init__(self):
        super().__init__()
        self._generation = -1
        self._lam: Optional[np.ndarray] = None
        self._vecs: Optional[np.ndarray] = None
        self._lu = None

    def counter_names(self) -> tuple[str, ...]:
        return ("NofMFEv", "NofDiag")

    def _prepare(self, t: float, y: np.ndarray, h: float) -> None:
        matrix = self.linear.matrix(t, y)
        if self.linear.generation == self._generation and self._lam is not None:
            return
        self._lam, self._vecs = eigen_decompose(np.asarray(matrix))
        self._lu = scipy.linalg.lu_factor(self._vecs)
        self._generation = self.linear.generation
        self.stats.bump_matfun("NofDiag")
        logger.debug("diagonalised %dx%d matrix at t=%s", *matrix.shape, t)

    def _evaluate(self, flag, v, t, y, h, reusable, reuse, facs) -> np.ndarray:
        coords = scipy.linalg.lu_solve(self._lu, v.astype(self._vecs.dtype))
        return apply_eigen(self.jobs, flag, self._vecs, self._lam, coords, h, facs)

    def cleanup(self) -> None:
        super().cleanup()
        self._generation = -1
        self._lam = self._vecs = self._lu = None


def resolve_evaluator(options: Mapping, category: Optional[str] = None) -> MatrixFunctionEvaluator:
    """
    MatrixFunctions 옵션 값으로 평가기 생성

    Args:
        options: 정규화된 옵션
        category: MatrixFunctions 분류 (list / function_handle)
    """
    value = options["MatrixFunctions"]
    if category is None and hasattr(options, "category"):
        category = options.category("MatrixFunctions")

    if category == "function_handle":
        if hasattr(value, "evaluate") and not isinstance(value, type):
            return value
        evaluator = value()
        if not hasattr(evaluator, "evaluate"):
            raise CapabilityError("MatrixFunctions factory did not return an evaluator")
        return evaluator

    if value == 0:
        return DirectEvaluator()

    from .krylov import KrylovEvaluator
    return KrylovEvaluator()
