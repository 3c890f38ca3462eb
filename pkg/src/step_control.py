"""
스텝 크기 제어 모듈
- error_norm: AbsTol / RelTol / NormControl 로 스케일한 오차 노름
- propose_step: 수락 여부와 다음 h
- initial_step: InitialStep 'auto' 일 때 h0
"""

from dataclasses import dataclass
from typing import Union

import numpy as np

SAFETY = 0.9
SHRINK = 0.2
GROWTH = 5.0


@dataclass
class StepController:
    """
    스텝 제어 파라미터 (h 는 모두 크기, 부호는 드라이버가 붙인다)

    Args:
        rel_tol / abs_tol: 허용오차 (abs_tol 은 스칼라 또는 길이 n 벡터)
        norm_control: 전체 벡터 2-노름 사용 여부
        h_min / h_max / h_initial: 스텝 경계와 첫 스텝
        h_constant: 스텝 크기 고정
        error_order: 오차 추정의 차수
    """
    rel_tol: float
    abs_tol: Union[float, np.ndarray]
    norm_control: bool
    h_min: float
    h_max: float
    h_initial: float
    h_constant: bool = False
    error_order: int = 1
    safety: float = SAFETY
    shrink: float = SHRINK
    growth: float = GROWTH

    def __post_init__(self):
        if not 0 < self.h_min <= self.h_max:
            raise ValueError(f"invalid step bounds: MinStep={self.h_min}, MaxStep={self.h_max}")
        self.h_initial = self.clamp(self.h_initial)

    def clamp(self, h: float) -> float:
        return min(max(h, self.h_min), self.h_max)

    def propose_step(self, h: float, err_norm: float) -> tuple[bool, float]:
        return propose_step(self, h, err_norm)

    def error_norm(self, err: np.ndarray, y_old: np.ndarray, y_new: np.ndarray) -> float:
        return error_norm(self, err, y_old, y_new)


def propose_step(ctrl: StepController, h: float, err_norm: float) -> tuple[bool, float]:
    """
    수락 여부와 다음 스텝 크기

    h_next = h · clamp(safety · err^(-1/error_order), shrink, growth) 를 [h_min, h_max] 로 자른다.
    """
    if ctrl.h_constant:
        return True, h
    accept = err_norm <= 1.0
    if err_norm == 0:
        factor = ctrl.growth
    else:
        factor = ctrl.safety * err_norm ** (-1.0 / ctrl.error_order)
        factor = min(max(factor, ctrl.shrink), ctrl.growth)
    return accept, ctrl.clamp(h * factor)


def error_norm(ctrl: StepController, err: np.ndarray, y_old: np.ndarray, y_new: np.ndarray) -> float:
    """
    스케일된 오차 노름 (1 이하이면 수락)

    NormControl off: max_i |e_i| / (AbsTol_i + RelTol · max(|y_old,i|, |y_new,i|))
    NormControl on:  ‖e‖₂ / (AbsTol + RelTol · max(‖y_old‖₂, ‖y_new‖₂))
    """
    err = np.abs(np.asarray(err))
    if ctrl.norm_control:
        abs_tol = float(np.min(ctrl.abs_tol))
        scale = abs_tol + ctrl.rel_tol * max(np.linalg.norm(y_old), np.linalg.norm(y_new))
        return float(np.linalg.norm(err) / scale)
    scale = ctrl.abs_tol + ctrl.rel_tol * np.maximum(np.abs(y_old), np.abs(y_new))
    return float(np.max(err / scale))


def initial_step(duration: float, abs_tol: Union[float, np.ndarray], f0: np.ndarray, order: int) -> float:
    """h0 = 1e-2 · duration · (AbsTol / (‖F0‖ + AbsTol))^(1/order)"""
    tol = float(np.min(abs_tol))
    return 1e-2 * duration * (tol / (float(np.linalg.norm(f0)) + tol)) ** (1.0 / order)
