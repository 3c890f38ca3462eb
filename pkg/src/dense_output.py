"""
조밀 출력 모듈
- StepRecord: 스텝 하나의 보간 데이터
- HermiteGenerator: 양 끝 값과 기울기로 3차 Hermite (강성 문제에는 부적합)
- Exp4Generator: exp4 의 여덟 벡터 (y_n, k̂1..k̂3, k4..k7) 로 θ 에 대한 3차 보간
- dense_eval / refine_output
"""

from dataclasses import dataclass, replace
from typing import Any, Optional, Sequence

import numpy as np

from .errors import DenseOutputError
from .problem import Solution


@dataclass(frozen=True)
class StepRecord:
    t0: float
    t1: float
    data: tuple[np.ndarray, ...]
    generator: Any

    @property
    def h(self) -> float:
        return self.t1 - self.t0

    def evaluate(self, t: float) -> tuple[np.ndarray, np.ndarray]:
        return self.generator.interpolate(self, t)


class DenseGenerator:
    """
    조밀출력 생성기 기본 클래스

    DOGenerator 옵션에 인스턴스를 넘기면 build / interpolate 가 그대로 쓰인다.
    """

    name = "custom"

    def build(self, t0: float, t1: float, y0: np.ndarray, y1: np.ndarray, f0: np.ndarray,
              f1: np.ndarray, stages: Optional[Sequence[np.ndarray]] = None) -> StepRecord:
        raise NotImplementedError

    def interpolate(self, record: StepRecord, t: float) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError


class HermiteGenerator(DenseGenerator):
    name = "hermite"

    def build(self, t0, t1, y0, y1, f0, f1, stages=None) -> StepRecord:
        return StepRecord(float(t0), float(t1), (np.array(y0), np.array(y1), np.array(f0), np.array(f1)), self)

    def interpolate(self, record: StepRecord, t: float) -> tuple[np.ndarray, np.ndarray]:
        y0, y1, f0, f1 = record.data
        h = record.h
        s = (t - record.t0) / h
        h00 = 2 * s**3 - 3 * s**2 + 1
        h10 = s**3 - 2 * s**2 + s
        h01 = -2 * s**3 + 3 * s**2
        h11 = s**3 - s**2
        y = h00 * y0 + h10 * h * f0 + h01 * y1 + h11 * h * f1
        d00 = (6 * s**2 - 6 * s) / h
        d10 = 3 * s**2 - 4 * s + 1
        d01 = (-6 * s**2 + 6 * s) / h
        d11 = 3 * s**2 - 2 * s
        dy = d00 * y0 + d10 * f0 + d01 * y1 + d11 * f1
        return y, dy


_EXP4_NODES = np.array([0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0])


def exp4_correction(k4: np.ndarray, k5: np.ndarray, k6: np.ndarray, k7: np.ndarray) -> np.ndarray:
    """C = k4 - 4/3 k5 + k6 + 1/6 k7 (y_{n+1} = y_n + h k3 + h C)"""
    return k4 - (4.0 / 3.0) * k5 + k6 + k7 / 6.0


class Exp4Generator(DenseGenerator):
    """
    exp4 조밀출력

    θ = 0, 1/3, 2/3, 1 에서 y_n, y_n + θh k̂_θ + θ³ h C, y_{n+1} 을 지나는 θ 의 3차식.
    θh k̂_θ 는 선형화 흐름 (φ2 시간 보정 포함), C = k4 - 4/3 k5 + k6 + 1/6 k7.
    비선형 나머지는 θ³ 으로 자라므로 내부 절점도 O(h⁴) 정확도를 가진다.
    """

    name = "exp4"

    def build(self, t0, t1, y0, y1, f0, f1, stages=None) -> StepRecord:
        if stages is None or len(stages) != 8:
            raise DenseOutputError("exp4 dense output needs eight vectors per step")
        return StepRecord(float(t0), float(t1), tuple(np.array(s) for s in stages), self)

    @staticmethod
    def node_values(record: StepRecord) -> list[np.ndarray]:
        y_n, k1, k2, k3, k4, k5, k6, k7 = record.data
        h = record.h
        C = exp4_correction(k4, k5, k6, k7)
        values = [y_n]
        for theta, k in zip(_EXP4_NODES[1:], (k1, k2, k3)):
            values.append(y_n + theta * h * k + theta**3 * h * C)
        return values

    def interpolate(self, record: StepRecord, t: float) -> tuple[np.ndarray, np.ndarray]:
        values = self.node_values(record)
        theta = (t - record.t0) / record.h
        weights, dweights = _lagrange(_EXP4_NODES, theta)
        y = sum(w * v for w, v in zip(weights, values))
        dy = sum(w * v for w, v in zip(dweights, values)) / record.h
        return y, dy


def _lagrange(nodes: np.ndarray, x: float) -> tuple[np.ndarray, np.ndarray]:
    """라그랑주 기저값과 도함수"""
    n = nodes.size
    weights = np.ones(n)
    dweights = np.zeros(n)
    for i in range(n):
        others = [nodes[j] for j in range(n) if j != i]
        denom = np.prod([nodes[i] - o for o in others])
        weights[i] = np.prod([x - o for o in others]) / denom
        total = 0.0
        for skip in range(len(others)):
            total += np.prod([x - o for m, o in enumerate(others) if m != skip])
        dweights[i] = total / denom
    return weights, dweights


def _find_record(records: Sequence[StepRecord], t: float, t_dir: int) -> StepRecord:
    lo = min(records[0].t0, records[-1].t1)
    hi = max(records[0].t0, records[-1].t1)
    tol = 1e-12 * max(1.0, abs(lo), abs(hi))
    if t < lo - tol or t > hi + tol:
        raise DenseOutputError(f"query time {t!r} outside the integration interval [{lo}, {hi}]", t)
    ends = np.array([r.t1 for r in records]) * t_dir
    index = int(np.searchsorted(ends, t * t_dir, side="left"))
    return records[min(index, len(records) - 1)]


def dense_eval(sol: Solution, t_query) -> tuple[np.ndarray, np.ndarray]:
    """
    조밀출력 평가

    Args:
        sol: dense_payload 가 있는 해
        t_query: 스칼라 또는 시각 벡터

    Returns:
        (y, dydt), 각각 len(t_query) × n

    Raises:
        DenseOutputError: 조밀출력 데이터가 없거나 구간 밖 질의
    """
    if not sol.dense_payload:
        raise DenseOutputError("solution has no dense output (set DOGenerator or use exp4)")
    times = np.atleast_1d(np.asarray(t_query, dtype=float))
    ys, dys = [], []
    for t in times:
        record = _find_record(sol.dense_payload, float(t), sol.t_dir)
        y, dy = record.evaluate(float(t))
        ys.append(y)
        dys.append(dy)
    return np.array(ys), np.array(dys)


def refine_output(sol: Solution, refine: int) -> Solution:
    """
    수락된 스텝마다 refine-1 개의 내부 점 추가

    Raises:
        DenseOutputError: refine > 1 인데 조밀출력이 없음
    """
    if refine < 1:
        raise ValueError("refine must be at least 1")
    if refine == 1:
        return sol
    if not sol.dense_payload:
        raise DenseOutputError("Refine > 1 needs a dense output generator")

    ts = [sol.t[0]]
    ys = [sol.y[0]]
    for i, record in enumerate(sol.dense_payload):
        for j in range(1, refine):
            t = record.t0 + j * record.h / refine
            ts.append(t)
            ys.append(record.evaluate(t)[0])
        ts.append(sol.t[i + 1])
        ys.append(sol.y[i + 1])
    return replace(sol, t=np.array(ts), y=np.array(ys))


GENERATORS = {"hermite": HermiteGenerator, "exp4": Exp4Generator}
