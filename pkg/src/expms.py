"""
지수 다단계 적분기 (expmssemi, expms)

expmssemi: 지수 Adams 형태
    u_{n+1} = e^{hA} u_n + h Σ_{j<k} γ_j(hA) ∇^j G_n,  G = g(t, u)
expms: J_n 으로 선형화한 나머지
    D_m = F(t_m, u_m) - J_n u_m - (t_m - t_n) v
를 t_n 에서 기울기 0 인 k 차 다항식으로 보간한다.
    u_{n+1} = u_n + h φ1 F_n + h² φ2 v + h Σ_{m=2..k} c_m m! φ_{m+1}(hJ)

둘 다 상수 스텝이며 처음 k-1 점은 같은 계열의 4차 1단계법을 StartupSteps 번 나눠 돌려 만든다.
"""

import logging
from fractions import Fraction
from math import comb, factorial
from typing import Optional

import numpy as np

from .errors import HistoryError, JacobianUnavailableError, ProblemError
from .exprb import rosenbrock_step, rosenbrock_table
from .exprk import rk_step
from .integrator import Integrator, StepResult
from .matfun import JobTable
from .phi import MAX_GAMMA_INDEX, MAX_PHI_INDEX, PhiTerm, gamma_coefficients
from .schemes import krogstad

logger = logging.getLogger("expokit.verbose")


def _solve_exact(matrix: list[list[Fraction]]) -> list[list[Fraction]]:
    """유리수 행렬의 역행렬 (Gauss-Jordan)"""
    n = len(matrix)
    aug = [row[:] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(matrix)]
    for col in range(n):
        pivot = next(r for r in range(col, n) if aug[r][col] != 0)
        aug[col], aug[pivot] = aug[pivot], aug[col]
        scale = aug[col][col]
        aug[col] = [x / scale for x in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                factor = aug[r][col]
                aug[r] = [x - factor * y for x, y in zip(aug[r], aug[col])]
    return [row[n:] for row in aug]


def remainder_weights(k: int) -> list[list[Fraction]]:
    """
    c_m = Σ_i W[m-2][i-1] (D_{n-i} - D_n), m = 2..k

    Σ_m c_m (-i)^m = D_{n-i} - D_n (i = 1..k-1) 의 역행렬
    """
    if k < 2:
        return []
    system = [[Fraction((-i) ** m) for m in range(2, k + 1)] for i in range(1, k)]
    return _solve_exact(system)


class _MultiStep(Integrator):
    """상수 스텝 다단계법 공통: 시작 단계와 작업표 교체"""

    def __init__(self, ctx):
        super().__init__(ctx)
        self.k = int(self.options["kStep"])
        self.multi_step = self.k
        self.history = type(self.history)(maxlen=self.k)
        self.startup_steps = int(self.options["StartupSteps"])
        self.main_registered = self.k == 1

    @property
    def can_reduce_step(self) -> bool:
        return False

    @property
    def in_startup(self) -> bool:
        return len(self.history) < self.k

    def accept(self, t_new: float, y_new: np.ndarray) -> None:
        super().accept(t_new, y_new)
        if not self.main_registered and not self.in_startup:
            self.evaluator.register_jobs(self.job_table())
            self.main_registered = True
            self.ctx.log.verbose.info("%s: startup finished after %d points", self.name, len(self.history))

    def _check_spacing(self, h: float) -> None:
        times = [entry.t for entry in self.history]
        steps = np.diff(times)
        if steps.size and not np.allclose(steps, h, rtol=1e-10, atol=0.0):
            raise HistoryError(f"{self.name} needs equally spaced history points (h={h})")

    def _step(self, t: float, y: np.ndarray, h: float, reuse: bool) -> StepResult:
        if self.in_startup:
            return StepResult(self._startup(t, y, h, reuse))
        self._check_spacing(h)
        return StepResult(self._multistep(t, y, h, reuse))

    def _startup(self, t: float, y: np.ndarray, h: float, reuse: bool) -> np.ndarray:
        raise NotImplementedError

    def _multistep(self, t: float, y: np.ndarray, h: float, reuse: bool) -> np.ndarray:
        raise NotImplementedError


class ExpMsSemi(_MultiStep):
    """지수 Adams 다단계법. 차수 kStep"""

    name = "expmssemi"
    semilinear = True

    def __init__(self, ctx):
        super().__init__(ctx)
        if self.k - 1 > MAX_GAMMA_INDEX:
            raise ProblemError(f"kStep must not exceed {MAX_GAMMA_INDEX + 1}")
        self.order = self.k
        self.error_order = self.k
        self.startup_scheme = krogstad()
        if not self.functions.has_lin_op:
            raise ProblemError("expmssemi needs the linear part (LinOp or LinOpV)")

    def job_table(self) -> JobTable:
        functions = [PhiTerm(m) for m in range(self.k + 1)]
        jobs = {"u": [{(0, 1): 1}]}
        for j in range(self.k):
            jobs[f"G{j}"] = [{(m + 1, 1): c for m, c in enumerate(gamma_coefficients(j))}]
        return JobTable.build(functions, jobs)

    def startup_table(self) -> Optional[JobTable]:
        return self.startup_scheme.job_table() if self.k > 1 else None

    def _startup(self, t, y, h, reuse):
        h_sub = h / self.startup_steps
        _, g_n = self.get_old_f(0)
        for i in range(self.startup_steps):
            t_sub = t + i * h_sub
            y = rk_step(self, self.startup_scheme, t_sub, y, h_sub, g_n if i == 0 else None, reuse)
        return y

    def _multistep(self, t, y, h, reuse):
        evaluator = self.evaluator
        evaluator.init_step(t, y, h)
        G = [self.get_old_f(i)[1] for i in range(self.k)]
        y_new = evaluator.evaluate("u", y, True, reuse)[:, 0]
        for j in range(self.k):
            # ∇^j G_n
            diff = sum((-1) ** i * comb(j, i) * G[i] for i in range(j + 1))
            y_new = y_new + h * evaluator.evaluate(f"G{j}", diff, True, reuse)[:, 0]
        return y_new


class ExpMs(_MultiStep):
    """선형화 지수 다단계법. 차수 kStep + 1"""

    name = "expms"
    semilinear = False

    def __init__(self, ctx):
        super().__init__(ctx)
        if self.k + 1 > MAX_PHI_INDEX:
            raise ProblemError(f"kStep must not exceed {MAX_PHI_INDEX - 1}")
        self.order = self.k + 1
        self.error_order = self.order
        self.weights = remainder_weights(self.k)
        if not self.functions.has_jacobian:
            raise JacobianUnavailableError("expms needs Jacobian or JacobianV")

    def job_table(self) -> JobTable:
        functions = [PhiTerm(m) for m in range(1, max(2, self.k + 1) + 1)]
        jobs = {"F": [{(1, 1): 1}], "v": [{(2, 1): 1}]}
        for m in range(2, self.k + 1):
            jobs[f"C{m}"] = [{(m + 1, 1): factorial(m)}]
        return JobTable.build(functions, jobs)

    def startup_table(self) -> Optional[JobTable]:
        return rosenbrock_table(43) if self.k > 1 else None

    def _startup(self, t, y, h, reuse):
        h_sub = h / self.startup_steps
        f_n, _ = self.get_old_f(0)
        for i in range(self.startup_steps):
            t_sub = t + i * h_sub
            if i > 0:
                f_n = self.functions.rhs(t_sub, y)
            y, _ = rosenbrock_step(self, 43, t_sub, y, h_sub, f_n, reuse)
        return y

    def _multistep(self, t, y, h, reuse):
        evaluator = self.evaluator
        functions = self.functions
        evaluator.init_step(t, y, h)
        f_n, _ = self.get_old_f(0)
        v = functions.df_dt(t, y) if functions.non_autonomous else None

        y_new = y + h * evaluator.evaluate("F", f_n, True, reuse)[:, 0]
        if v is not None:
            y_new = y_new + h * h * evaluator.evaluate("v", v, True, reuse)[:, 0]
        if self.k < 2:
            return y_new

        def reduced(i: int) -> np.ndarray:
            entry = self.old_entry(i)
            d = entry.f - self.linear.matvec(t, y, entry.y)
            if v is not None:
                d = d - (entry.t - t) * v
            return d

        d_n = reduced(0)
        deltas = [reduced(i) - d_n for i in range(1, self.k)]
        for m in range(2, self.k + 1):
            row = self.weights[m - 2]
            c_m = sum(float(w) * delta for w, delta in zip(row, deltas))
            y_new = y_new + h * evaluator.evaluate(f"C{m}", c_m, True, reuse)[:, 0]
        return y_new
