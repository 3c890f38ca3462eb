"""
수렴 차수 실험 모듈
- (적분기, h 또는 허용오차) 셀을 병렬로 실행
- 최종 시각 오차와 작업량 기록, 최소제곱 기울기
- CSV 표와 gnuplot 용 .dat 파일 출력
"""

import csv
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Optional, Sequence, Union

import numpy as np

from .driver import integrate
from .errors import ProblemError
from .options import INTEGRATOR_FAMILIES, OptionsSet
from .problems import ProblemSetup

logger = logging.getLogger("expokit.verbose")

CSV_HEADER = ("integrator", "h_or_tol", "error", "steps", "rhs_evals", "matfun_evals")
DEFAULT_STEP_SIZES = (1 / 40, 1 / 80, 1 / 160, 1 / 320, 1 / 640)


@dataclass(frozen=True)
class Method:
    """실험 대상 하나: 표시 이름, 적분기, 추가 옵션"""
    label: str
    integrator: str
    values: dict[str, Any] = field(default_factory=dict)

    @property
    def constant_step(self) -> bool:
        return INTEGRATOR_FAMILIES[self.integrator][1] == "constant"


# 번들 방법 전체 (allMethods)
ALL_METHODS = (
    Method("krogstad", "exprk", {"Scheme": "krogstad"}),
    Method("exprb32", "exprb", {"Order": "32"}),
    Method("exprb43", "exprb", {"Order": "43"}),
    Method("expmssemi-k1", "expmssemi", {"kStep": 1}),
    Method("expmssemi-k2", "expmssemi", {"kStep": 2}),
    Method("expmssemi-k3", "expmssemi", {"kStep": 3}),
    Method("expms-k2", "expms", {"kStep": 2}),
    Method("exp4", "exp4"),
)


def find_methods(labels: Iterable[str]) -> list[Method]:
    """표시 이름 또는 적분기 이름으로 방법 선택"""
    chosen = []
    for label in labels:
        matches = [m for m in ALL_METHODS if m.label == label] or [m for m in ALL_METHODS if m.integrator == label]
        if not matches:
            raise ProblemError(f"unknown method '{label}'")
        chosen.extend(m for m in matches if m not in chosen)
    return chosen


@dataclass(frozen=True)
class ConvergenceCell:
    label: str
    h_or_tol: float
    error: float
    steps: int
    rhs_evals: int
    matfun_evals: int

    @property
    def key(self) -> tuple[str, float]:
        return self.label, -self.h_or_tol


@dataclass
class ConvergenceResult:
    """셀 결과 모음 (방법 이름, 큰 h → 작은 h 순)"""
    mode: str
    cells: list[ConvergenceCell]

    def labels(self) -> list[str]:
        seen: list[str] = []
        for cell in self.cells:
            if cell.label not in seen:
                seen.append(cell.label)
        return seen

    def for_method(self, label: str) -> list[ConvergenceCell]:
        return [c for c in self.cells if c.label == label]

    def slope(self, label: str) -> float:
        """log(error) 대 log(h_or_tol) 의 최소제곱 기울기"""
        cells = [c for c in self.for_method(label) if c.error > 0]
        if len(cells) < 2:
            return float("nan")
        x = np.log([c.h_or_tol for c in cells])
        y = np.log([c.error for c in cells])
        return float(np.polyfit(x, y, 1)[0])

    def slopes(self) -> dict[str, float]:
        return {label: self.slope(label) for label in self.labels()}

    def write_csv(self, path: Union[str, Path]) -> None:
        with open(path, "w", encoding="utf-8", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(CSV_HEADER)
            for c in self.cells:
                writer.writerow([c.label, repr(c.h_or_tol), repr(c.error), c.steps, c.rhs_evals, c.matfun_evals])

    def write_gnuplot(self, path: Union[str, Path]) -> None:
        """방법마다 블록 하나, 블록 사이 빈 줄 두 개 (gnuplot index)"""
        blocks = []
        for label in self.labels():
            lines = [f"# {label} slope={self.slope(label):.3f}", "# h_or_tol error"]
            lines += [f"{c.h_or_tol:.17g} {c.error:.17g}" for c in self.for_method(label)]
            blocks.append("\n".join(lines))
        with open(path, "w", encoding="utf-8") as f:
            f.write("\n\n\n".join(blocks) + "\n")

    def summary(self) -> str:
        return "\n".join(f"{label}: order {slope:.2f}" for label, slope in self.slopes().items())


class ConvergenceStudy:
    """하나의 문제에 대해 여러 방법의 수렴 차수 측정"""

    def __init__(self, setup: ProblemSetup, methods: Optional[Sequence[Method]] = None, max_workers: int = 4):
        """
        Args:
            setup: 정확해(exact)를 가진 문제
            methods: 실험할 방법 (기본 전체)
            max_workers: 병렬 처리 최대 워커 수
        """
        if setup.problem.exact is None:
            raise ProblemError(f"{setup.problem.name or 'problem'} has no exact solution")
        self.setup = setup
        self.methods = list(methods) if methods is not None else list(ALL_METHODS)
        self.max_workers = max_workers

    def options_for(self, method: Method, value: float, mode: str) -> OptionsSet:
        """셀 하나의 옵션: 문제 권장 옵션 + 방법 옵션 + h / 허용오차"""
        values = dict(self.setup.options.values)
        values.update(method.values)
        if mode == "tol":
            values.update(AbsTol=value, RelTol=value)
        elif method.constant_step:
            values["StepSize"] = value
        else:
            values.update(hConstant="on", InitialStep=value)
        opts = OptionsSet(method.integrator)
        for name, v in values.items():
            opts = opts.with_option(name, v)
        return opts

    def run_cell(self, method: Method, value: float, mode: str) -> ConvergenceCell:
        problem = self.setup.problem
        sol = integrate(problem, self.options_for(method, value, mode), run_id=f"{method.label}@{value:.3g}")
        t_end, y_end = sol.final
        error = float(np.max(np.abs(y_end - problem.exact(t_end))))
        stats = sol.stats
        return ConvergenceCell(method.label, float(value), error, stats.n_steps,
                               stats.n_rhs_evals, stats.matfun_evaluations())

    def run(self, values: Sequence[float] = DEFAULT_STEP_SIZES, mode: str = "h") -> ConvergenceResult:
        """
        모든 셀 실행 (병렬) 후 정렬된 키로 병합

        Args:
            values: 스텝 크기 또는 허용오차 목록
            mode: "h" 또는 "tol"
        """
        if mode not in ("h", "tol"):
            raise ValueError(f"mode must be 'h' or 'tol', got {mode!r}")
        cells = [(m, float(v)) for m in self.methods for v in values]
        with ThreadPoolExecutor(max_workers=self.max_workers) as executor:
            futures = [executor.submit(self.run_cell, m, v, mode) for m, v in cells]
            results = [future.result() for future in futures]

        order = {m.label: i for i, m in enumerate(self.methods)}
        results.sort(key=lambda c: (order[c.label], -c.h_or_tol))
        result = ConvergenceResult(mode, results)
        for line in result.summary().splitlines():
            logger.info(line)
        return result
