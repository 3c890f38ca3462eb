"""
내장 테스트 문제 모듈
- heat1d: 시간 의존 원천항이 있는 1차원 열방정식
- semi1: 이산 수준에서 정확해를 갖도록 만든 반선형 반응-확산 방정식
- minimal_example: 2차원 입문 예제
"""

from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np
import scipy.sparse

from .errors import ProblemError
from .options import OptionsSet, make_options
from .problem import OdeProblem


@dataclass(frozen=True)
class ProblemSetup:
    """문제와 권장 옵션"""
    problem: OdeProblem
    options: OptionsSet
    parameters: dict[str, Any] = field(default_factory=dict)


def grid(N: int) -> tuple[np.ndarray, float]:
    """(0, 1) 의 내부 격자점 N 개와 간격"""
    if int(N) != N or N < 3:
        raise ProblemError(f"N must be an integer >= 3, got {N}")
    N = int(N)
    dx = 1.0 / (N + 1)
    return dx * np.arange(1, N + 1), dx


def laplacian(N: int, dx: float) -> np.ndarray:
    """동차 Dirichlet 경계의 2차 중심차분 (1/dx²) tridiag(1, -2, 1)"""
    stencil = scipy.sparse.diags([1.0, -2.0, 1.0], [-1, 0, 1], shape=(N, N))
    return stencil.toarray() / dx**2


def heat1d(epsilon: float = 0.1, gamma: float = 0.1, N: int = 100) -> ProblemSetup:
    """
    u_t = ε u_xx + γ x(1-x) cos t, u(0, x) = sin(πx)

    Args:
        epsilon: 확산 계수 (> 0)
        gamma: 원천항 크기
        N: 내부 격자점 수 (>= 3)
    """
    if epsilon <= 0:
        raise ProblemError(f"epsilon must be positive, got {epsilon}")
    x, dx = grid(N)
    A = epsilon * laplacian(len(x), dx)
    profile = x * (1 - x)

    def g(t, y):
        return gamma * profile * np.cos(t)

    def rhs(t, y):
        return A @ y + g(t, y)

    problem = OdeProblem(
        rhs=rhs,
        y0=np.sin(np.pi * x),
        t0=0.0,
        t_end=1.0,
        jacobian=lambda t, y: A,
        jacobian_v=lambda t, y, v: A @ v,
        lin_op=A,
        lin_op_v=lambda v: A @ v,
        g_fcn=g,
        g_jacobian=lambda t, y: np.zeros_like(A),
        g_jacobian_v=lambda t, y, v: np.zeros_like(v),
        df_dt=lambda t, y: -gamma * profile * np.sin(t),
        name="heat1d",
    )
    options = make_options("exprb", NonAutonomous="on")
    return ProblemSetup(problem, options, {"epsilon": epsilon, "gamma": gamma, "N": int(N)})


def heat1d_mode_decay(setup: ProblemSetup, t: float) -> np.ndarray:
    """γ = 0 일 때 sin(πx) 격자 고유모드의 정확한 감쇠 e^{-ε μ t} sin(πx)"""
    params = setup.parameters
    x, dx = grid(params["N"])
    mu = (2.0 / dx**2) * (1.0 - np.cos(np.pi * dx))
    return np.exp(-params["epsilon"] * mu * t) * np.sin(np.pi * x)


def semi1(N: int = 50) -> ProblemSetup:
    """
    u_t = u_xx + u² + f(t, x), 정확해 u*(t, x) = e^{-t} x(1-x)

    f 는 이산 연산자로 만들어서 격자 ODE 가 u* 를 정확히 만족한다.
    """
    x, dx = grid(N)
    A = laplacian(len(x), dx)
    profile = x * (1 - x)
    A_profile = A @ profile

    def exact(t):
        return np.exp(-t) * profile

    def forcing(t):
        # u*' - A u* - u*²
        e = np.exp(-t)
        return -e * profile - e * A_profile - (e * profile) ** 2

    def g(t, y):
        return y**2 + forcing(t)

    def rhs(t, y):
        return A @ y + g(t, y)

    def df_dt(t, y):
        e = np.exp(-t)
        return e * profile + e * A_profile + 2 * (e * profile) ** 2

    problem = OdeProblem(
        rhs=rhs,
        y0=exact(0.0),
        t0=0.0,
        t_end=1.0,
        jacobian=lambda t, y: A + np.diag(2 * y),
        jacobian_v=lambda t, y, v: A @ v + 2 * y * v,
        lin_op=A,
        lin_op_v=lambda v: A @ v,
        g_fcn=g,
        g_jacobian=lambda t, y: np.diag(2 * y),
        g_jacobian_v=lambda t, y, v: 2 * y * v,
        df_dt=df_dt,
        exact=exact,
        name="semi1",
    )
    options = make_options("exprb", NonAutonomous="on")
    return ProblemSetup(problem, options, {"N": int(N)})


def minimal_example() -> ProblemSetup:
    """
    y' = A y + g(y), A = diag(-1, -100), g(y) = 0.1 (y2², y1 y2)

    새 문제를 정의할 때 참고할 가장 작은 예제.
    """
    # 강성 선형 부분: 고유값 -1, -100
    A = np.diag([-1.0, -100.0])

    # 약한 비선형 부분과 그 야코비안
    def g(t, y):
        return 0.1 * np.array([y[1] ** 2, y[0] * y[1]])

    def g_jac(t, y):
        return 0.1 * np.array([[0.0, 2 * y[1]], [y[1], y[0]]])

    # 선형화 적분기는 F 와 J 를, 반선형 적분기는 A 와 g 를 쓴다
    problem = OdeProblem(
        rhs=lambda t, y: A @ y + g(t, y),
        y0=np.array([1.0, 1.0]),
        t0=0.0,
        t_end=1.0,
        jacobian=lambda t, y: A + g_jac(t, y),
        lin_op=A,
        g_fcn=g,
        g_jacobian=g_jac,
        name="minimal_example",
    )
    return ProblemSetup(problem, OptionsSet("exprb"))


PROBLEMS: dict[str, Callable[..., ProblemSetup]] = {
    "heat1d": heat1d,
    "semi1": semi1,
    "minimal_example": minimal_example,
}


def make_problem(name: str, **params: Any) -> ProblemSetup:
    """이름으로 문제 생성"""
    try:
        factory = PROBLEMS[name]
    except KeyError:
        raise ProblemError(f"unknown problem '{name}' (choose from {', '.join(PROBLEMS)})") from None
    try:
        return factory(**params)
    except TypeError as e:
        raise ProblemError(f"invalid parameters for {name}: {e}") from e
