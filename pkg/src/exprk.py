"""
지수 Runge-Kutta 적분기 (exprk)

y' = A y + g(t, y) 에 대해
    U_i     = u_n + h Σ_j a_ij(h A) (g(t + c_j h, U_j) + A u_n)
    u_{n+1} = u_n + h Σ_i b_i(h A) (g(t + c_i h, U_i) + A u_n)
모든 φ 곱은 평가기의 a{i}{j}, b{i} 플래그로 계산한다.
"""

from typing import Optional

import numpy as np

from .errors import ProblemError
from .integrator import Integrator, StepResult
from .matfun import JobTable
from .schemes import RkScheme, resolve_scheme

SCHEME_ORDERS = {
    "krogstad": 4,
    "expeuler": 1,
    "etd2rk": 2,
    "cox-matthews": 4,
    "hochbruck-ostermann": 4,
}


def rk_step(integ: Integrator, scheme: RkScheme, t: float, y: np.ndarray, h: float,
            g_n: Optional[np.ndarray] = None, reuse: bool = False) -> np.ndarray:
    """
    계수표 하나로 한 스텝 진행 (계수표의 JobTable 이 등록되어 있어야 함)

    Args:
        integ: 평가기/함수 묶음을 가진 적분기
        scheme: 계수표
        t, y, h: 현재 시각, 값, 부호 있는 스텝
        g_n: g(t, y) (없으면 계산)
        reuse: 직전 시도가 거부된 경우 True
    """
    functions = integ.functions
    evaluator = integ.evaluator
    evaluator.init_step(t, y, h)

    a_u = integ.linear.matvec(t, y, y)
    if g_n is None:
        g_n = functions.g(t, y)
    flags = scheme.flags()

    # stage_terms[j] = g(U_j) + A u_n
    stage_terms = [g_n + a_u]
    for i in range(2, scheme.s + 1):
        U = np.array(y, dtype=np.result_type(y, a_u))
        for j in range(1, i):
            flag = f"a{i}{j}"
            if flag in flags:
                U = U + h * evaluator.evaluate(flag, stage_terms[j - 1], True, reuse)[:, 0]
        t_i = t + float(scheme.c[i - 1]) * h
        stage_terms.append(functions.g(t_i, U) + a_u)

    y_new = np.array(y, dtype=np.result_type(y, a_u))
    for i in range(1, scheme.s + 1):
        flag = f"b{i}"
        if flag in flags:
            y_new = y_new + h * evaluator.evaluate(flag, stage_terms[i - 1], True, reuse)[:, 0]
    return y_new


class ExpRk(Integrator):
    """지수 Runge-Kutta 적분기. 상수 스텝, 오차 추정 없음"""

    name = "exprk"
    semilinear = True

    def __init__(self, ctx, scheme: Optional[RkScheme] = None):
        super().__init__(ctx)
        if scheme is None:
            opts = self.options
            scheme = resolve_scheme(opts["Scheme"], opts.category("Scheme"), opts["Parameters"])
        self.scheme = scheme
        self.order = SCHEME_ORDERS.get(scheme.name, min(scheme.s, 4))
        self.error_order = self.order
        if not self.functions.has_lin_op:
            raise ProblemError("exprk needs the linear part (LinOp or LinOpV)")

    def job_table(self) -> JobTable:
        return self.scheme.job_table()

    def _step(self, t: float, y: np.ndarray, h: float, reuse: bool) -> StepResult:
        _, g_n = self.get_old_f(0)
        return StepResult(rk_step(self, self.scheme, t, y, h, g_n, reuse))
