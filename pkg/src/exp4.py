"""
exp4 적분기

φ1(j h/3 J) 곱을 facs=3 으로 한 번에 계산하는 7단계 지수 Rosenbrock 형 방법.
스텝마다 y_n, k1..k7 여덟 벡터를 조밀출력용으로 남긴다.

비자율 문제의 시간 보정 (c h)² φ2(c h J) v 는 단계마다 제 배율로 따로 계산한다
(c = 1/3, 2/3, 1 은 "v", 중간 단계 c = 1/2 은 "v_half").
"""

from fractions import Fraction

import numpy as np

from .errors import JacobianUnavailableError
from .dense_output import exp4_correction
from .exprb import remainder
from .integrator import Integrator, StepResult
from .matfun import JobTable
from .phi import PhiTerm

FACS = 3
W4 = (Fraction(-7, 300), Fraction(97, 150), Fraction(-37, 300))
W7 = (Fraction(59, 300), Fraction(-7, 75), Fraction(269, 300))
# 평가기 스텝은 h/3 이므로 φ2(h/2 J) 는 배율 3/2
HALF = Fraction(3, 2)


class Exp4(Integrator):
    """exp4: 가변 스텝, 자체 조밀출력"""

    name = "exp4"
    semilinear = False
    order = 4
    error_order = 3
    dense_output_generator = "exp4"

    def __init__(self, ctx):
        super().__init__(ctx)
        if not self.functions.has_jacobian:
            raise JacobianUnavailableError("exp4 needs Jacobian or JacobianV")

    def job_table(self) -> JobTable:
        phi1 = [{(1, 1): 1}]
        return JobTable.build(
            (PhiTerm(1), PhiTerm(2), PhiTerm(2, HALF)),
            {"F": phi1, "v": [{(2, 1): 1}], "v_half": [{(2, HALF): 1}], "d4": phi1, "d7": phi1},
        )

    def _step(self, t: float, y: np.ndarray, h: float, reuse: bool) -> StepResult:
        evaluator = self.evaluator
        functions = self.functions
        evaluator.init_step(t, y, h / FACS)
        f_n, _ = self.get_old_f(0)
        v = functions.df_dt(t, y) if functions.non_autonomous else None

        # k1..k3 = φ1(j h/3 J) F
        k = evaluator.evaluate("F", f_n, True, reuse, FACS)
        k1, k2, k3 = (k[:, j] for j in range(FACS))

        w4 = float(W4[0]) * k1 + float(W4[1]) * k2 + float(W4[2]) * k3
        u4 = y + h * w4
        if v is not None:
            u4 = u4 + (h / 2.0) ** 2 * evaluator.evaluate("v_half", v, True, reuse, 1)[:, 0]
        d4 = remainder(self, t, y, f_n, v, 0.5, h, u4)
        k456 = evaluator.evaluate("d4", d4, True, reuse, FACS)
        k4, k5, k6 = (k456[:, j] for j in range(FACS))

        # 선형화 흐름 기울기: θh k̂_θ = θh φ1(θhJ) F + (θh)² φ2(θhJ) v
        linear = k
        if v is not None:
            phi2_v = evaluator.evaluate("v", v, True, reuse, FACS)
            linear = k + phi2_v * (np.arange(1, FACS + 1) * h / FACS)
        lin1, lin2, lin3 = (linear[:, j] for j in range(FACS))

        w7 = float(W7[0]) * k1 + float(W7[1]) * k2 + float(W7[2]) * k3 + (2.0 / 3.0) * (k4 + k5 + k6)
        u7 = y + h * w7 + h * (lin3 - k3)
        d7 = remainder(self, t, y, f_n, v, 1.0, h, u7)
        k7 = evaluator.evaluate("d7", d7, True, reuse, 1)[:, 0]

        C = exp4_correction(k4, k5, k6, k7)
        y_new = y + h * lin3 + h * C
        error = (h / 6.0) * k7
        return StepResult(y_new, error, stages=[np.array(y), lin1, lin2, lin3, k4, k5, k6, k7])
