"""
공용 테스트 픽스처
"""

import numpy as np
import pytest
import scipy.linalg

from src.config_manager import ConfigManager
from src.options import make_options
from src.problem import OdeProblem
from src.problems import semi1
from src.run_log import CHANNELS, configure_routing


@pytest.fixture(autouse=True)
def quiet_logs():
    """테스트 중 로그 채널은 모두 null"""
    configure_routing({channel: "null" for channel in CHANNELS})
    yield


@pytest.fixture
def clean_env(monkeypatch):
    """teardown 때 EXPOKIT_* 가 원래대로 돌아오도록 기록 후 삭제"""
    for key in ConfigManager.SCHEMA:
        monkeypatch.setenv(key, "")
        monkeypatch.delenv(key)


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


def negative_definite(n: int, rng: np.random.Generator, spread: float = 50.0) -> np.ndarray:
    """고유값이 -spread..-0.5 인 대칭 음정치 행렬"""
    Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    lam = -np.linspace(0.5, spread, n)
    return (Q * lam) @ Q.T


def linear_problem(A: np.ndarray, y0: np.ndarray, t_end: float = 1.0, **extra) -> OdeProblem:
    """y' = A y, 모든 콜백 제공"""
    return OdeProblem(
        rhs=lambda t, y: A @ y,
        y0=y0,
        t0=0.0,
        t_end=t_end,
        jacobian=lambda t, y: A,
        jacobian_v=lambda t, y, v: A @ v,
        lin_op=A,
        lin_op_v=lambda v: A @ v,
        g_fcn=lambda t, y: np.zeros_like(y),
        g_jacobian=lambda t, y: np.zeros_like(A),
        exact=lambda t: scipy.linalg.expm(t * A) @ np.asarray(y0),
        name="linear",
        **extra,
    )


@pytest.fixture
def spd_problem(rng):
    A = negative_definite(20, rng)
    y0 = rng.standard_normal(20)
    return linear_problem(A, y0)


@pytest.fixture
def small_semi1():
    """수렴 테스트용 작은 semi1 (N=20)"""
    return semi1(N=20)


def final_error(sol, problem) -> float:
    t_end, y_end = sol.final
    return float(np.max(np.abs(y_end - problem.exact(t_end))))


def observed_order(hs, errors) -> float:
    return float(np.polyfit(np.log(hs), np.log(errors), 1)[0])


def options_for(integrator: str, **values):
    return make_options(integrator, **values)
