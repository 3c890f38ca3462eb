"""
지수 Rosenbrock 적분기 (exprb32, exprb43)

J = ∂F/∂y (t_n, u_n), v = ∂F/∂t (t_n, u_n) 로 선형화하고 나머지
    D_i = F(t + c_i h, U_i) - F(t, u) - J (U_i - u) - c_i h v
를 φ3, φ4 로 보정한다. 내장 저차 해와의 차이가 오차 추정이다.
"""

from fractions import Fraction
from typing import Optional

import numpy as np

from .errors import JacobianUnavailableError
from .integrator import Integrator, StepResult
from .matfun import JobTable
from .phi import PhiTerm

_H = Fraction(1, 2)

JOB_FUNCTIONS = (
    PhiTerm(1), PhiTerm(2), PhiTerm(3), PhiTerm(4), PhiTerm(1, _H), PhiTerm(2, _H),
)


def rosenbrock_table(order: int) -> JobTable:
    if order == 32:
        jobs = {
            "F": [{(1, 1): 1}],
            "v": [{(2, 1): 1}],
            "D2": [{(3, 1): 2}],
        }
    else:
        jobs = {
            # 행 0: U2 용 (h/2), 행 1: 전체 스텝
            "F": [{(1, _H): 1}, {(1, 1): 1}],
            "v": [{(2, _H): 1}, {(2, 1): 1}],
            # 행 0: U3, 행 1: 새 해, 행 2: 오차
            "D2": [{(1, 1): 1}, {(3, 1): 16, (4, 1): -48}, {(4, 1): -48}],
            "D3": [{(3, 1): -2, (4, 1): 12}, {(4, 1): 12}],
        }
    return JobTable.build(JOB_FUNCTIONS, jobs)


def remainder(integ: Integrator, t: float, y: np.ndarray, f_n: np.ndarray, v: Optional[np.ndarray],
              c: float, h: float, U: np.ndarray) -> np.ndarray:
    """D = F(t + c h, U) - F(t, y) - J (U - y) - c h v"""
    d = integ.functions.rhs(t + c * h, U) - f_n - integ.linear.matvec(t, y, U - y)
    if v is not None:
        d = d - c * h * v
    return d


def rosenbrock_step(integ: Integrator, order: int, t: float, y: np.ndarray, h: float,
                    f_n: np.ndarray, reuse: bool = False) -> tuple[np.ndarray, np.ndarray]:
    """
    exprb32 / exprb43 한 스텝 (해당 JobTable 이 등록되어 있어야 함)

    Returns:
        (새 해, 오차 벡터)
    """
    evaluator = integ.evaluator
    evaluator.init_step(t, y, h)
    v = integ.functions.df_dt(t, y) if integ.functions.non_autonomous else None

    phi_f = evaluator.evaluate("F", f_n, True, reuse)
    phi_v = evaluator.evaluate("v", v, True, reuse) if v is not None else np.zeros_like(phi_f)

    if order == 32:
        U2 = y + h * phi_f[:, 0] + h * h * phi_v[:, 0]
        D2 = remainder(integ, t, y, f_n, v, 1.0, h, U2)
        correction = h * evaluator.evaluate("D2", D2, True, reuse)[:, 0]
        return U2 + correction, correction

    U2 = y + 0.5 * h * phi_f[:, 0] + 0.25 * h * h * phi_v[:, 0]
    D2 = remainder(integ, t, y, f_n, v, 0.5, h, U2)
    phi_d2 = evaluator.evaluate("D2", D2, True, reuse)
    base = y + h * phi_f[:, 1] + h * h * phi_v[:, 1]
    U3 = base + h * phi_d2[:, 0]
    D3 = remainder(integ, t, y, f_n, v, 1.0, h, U3)
    phi_d3 = evaluator.evaluate("D3", D3, True, reuse)
    y_new = base + h * (phi_d2[:, 1] + phi_d3[:, 0])
    error = h * (phi_d2[:, 2] + phi_d3[:, 1])
    return y_new, error


class ExpRb(Integrator):
    """지수 Rosenbrock 적분기. 가변 스텝, 내장 오차 추정"""

    name = "exprb"
    semilinear = False

    def __init__(self, ctx):
        super().__init__(ctx)
        self.method = int(self.options.nv("Order"))
        self.order = 3 if self.method == 32 else 4
        self.error_order = self.order
        self.estimate = self.options["ErrorEstimate"] == 0
        if not self.functions.has_jacobian:
            raise JacobianUnavailableError("exprb needs Jacobian or JacobianV")

    def job_table(self) -> JobTable:
        return rosenbrock_table(self.method)

    def _step(self, t: float, y: np.ndarray, h: float, reuse: bool) -> StepResult:
        f_n, _ = self.get_old_f(0)
        y_new, error = rosenbrock_step(self, self.method, t, y, h, f_n, reuse)
        return StepResult(y_new, error if self.estimate else None)
