"""
적분기 공통 기반 모듈
- IntegratorSetup: 차수, 오차 차수, 다단계 수, jobFunctions 등 메타데이터
- StepResult: 한 스텝 결과 (새 값, 오차 벡터, 실제 h, 조밀출력 벡터)
- Integrator: 이력 (get_old_f), 평가기 축소 요청 재시도 루프
"""

from collections import deque
from dataclasses import dataclass
from typing import TYPE_CHECKING, Optional

import numpy as np

from .errors import HistoryError, MatrixFunctionError, StepReductionRequest, StepSizeUnderflowError
from .matfun import JobTable
from .phi import PhiTerm

if TYPE_CHECKING:
    from .driver import RunContext


@dataclass(frozen=True)
class IntegratorSetup:
    name: str
    order: int
    error_order: int
    multi_step: int
    semilin: bool
    dense_output_generator: Optional[str]
    job_functions: tuple[PhiTerm, ...]


@dataclass
class StepResult:
    y_new: np.ndarray
    error: Optional[np.ndarray] = None
    h_out: float = 0.0
    stages: Optional[list[np.ndarray]] = None


@dataclass(frozen=True)
class HistoryEntry:
    t: float
    y: np.ndarray
    f: np.ndarray
    g: Optional[np.ndarray]


class Integrator:
    """
    적분기 기본 클래스

    하위 클래스는 job_table 과 _step 을 구현한다.
    _step 안에서 평가기가 StepReductionRequest 를 던지면 h 를 줄여 다시 시도한다.
    """

    name = "integrator"
    semilinear = False
    order = 1
    error_order = 1
    multi_step = 1
    dense_output_generator: Optional[str] = None

    def __init__(self, ctx: "RunContext"):
        self.ctx = ctx
        self.history: deque[HistoryEntry] = deque(maxlen=max(1, self.multi_step))

    @property
    def options(self):
        return self.ctx.options

    @property
    def functions(self):
        return self.ctx.functions

    @property
    def linear(self):
        return self.ctx.linear

    @property
    def evaluator(self):
        return self.ctx.evaluator

    def job_table(self) -> JobTable:
        raise NotImplementedError

    def startup_table(self) -> Optional[JobTable]:
        """다단계법 시작 단계용 표 (없으면 None)"""
        return None

    def setup(self) -> IntegratorSetup:
        return IntegratorSetup(
            name=self.name,
            order=self.order,
            error_order=self.error_order,
            multi_step=self.multi_step,
            semilin=self.semilinear,
            dense_output_generator=self.dense_output_generator,
            job_functions=self.job_table().job_functions,
        )

    def initial_table(self) -> JobTable:
        return self.startup_table() or self.job_table()

    # --- 이력 ---
    def start(self, t0: float, y0: np.ndarray) -> None:
        self.history.clear()
        self.push(t0, y0)

    def push(self, t: float, y: np.ndarray) -> None:
        f = self.functions.rhs(t, y)
        g = self.functions.g(t, y, f) if self.semilinear else None
        self.history.append(HistoryEntry(float(t), np.array(y), f, g))

    def accept(self, t_new: float, y_new: np.ndarray) -> None:
        """수락된 스텝 이후 호출. 새 점의 F (와 g) 를 이력에 저장"""
        self.push(t_new, y_new)

    def get_old_f(self, steps_back: int) -> tuple[np.ndarray, Optional[np.ndarray]]:
        """
        저장된 F, G (최신이 0). 다시 계산하지 않는다.

        Raises:
            HistoryError: steps_back 이 이력 길이 밖
        """
        if steps_back < 0 or steps_back >= self.multi_step or steps_back >= len(self.history):
            raise HistoryError(
                f"history index {steps_back} out of range (multi_step={self.multi_step}, stored={len(self.history)})"
            )
        entry = self.history[-1 - steps_back]
        return entry.f, entry.g

    def old_entry(self, steps_back: int) -> HistoryEntry:
        self.get_old_f(steps_back)
        return self.history[-1 - steps_back]

    # --- 스텝 ---
    @property
    def can_reduce_step(self) -> bool:
        return True

    def step(self, t: float, y: np.ndarray, h: float, reuse: bool = False) -> StepResult:
        """
        한 스텝. 평가기가 축소를 요청하면 h 를 줄여 재시도

        Returns:
            StepResult (h_out 은 실제 사용한 부호 있는 h)
        """
        h_try = h
        while True:
            try:
                result = self._step(t, np.asarray(y), h_try, reuse)
            except StepReductionRequest as request:
                if not self.can_reduce_step:
                    raise MatrixFunctionError(
                        f"{self.name} uses a constant step and can not follow a step reduction request: {request}"
                    ) from request
                h_new = h_try * request.factor
                if abs(h_new) < self.ctx.h_min:
                    raise StepSizeUnderflowError(t, abs(h_new), self.ctx.h_min) from request
                self.ctx.log.step.info("t=%.6e: matrix functions requested h %.3e -> %.3e", t, h_try, h_new)
                h_try = h_new
                reuse = True
                continue
            result.h_out = h_try
            return result

    def _step(self, t: float, y: np.ndarray, h: float, reuse: bool) -> StepResult:
        raise NotImplementedError
