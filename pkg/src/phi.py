"""
φ-함수 커널 모듈
- 스칼라(벡터화) φ_k(z), k = 0..8
- 지수 Adams 가중함수 γ_j(z), j = 0..6 (φ 조합으로 전개)
- φ 선형결합 평가

φ_0(z) = e^z, φ_{k+1}(z) = (φ_k(z) - 1/k!) / z, φ_k(0) = 1/k!
0 근처에서는 점화식이 상쇄오차로 무너지므로 |z| < max(1, k) 구간은 Taylor 급수를 쓴다.
"""

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import factorial
from typing import Sequence

import numpy as np

MAX_PHI_INDEX = 8
MAX_GAMMA_INDEX = 6

# |z| < 8 에서 8^40/48! ~ 1e-25 이므로 40항이면 충분
_TAYLOR_TERMS = 40

_INV_FACTORIALS = tuple(1.0 / factorial(i) for i in range(_TAYLOR_TERMS + MAX_PHI_INDEX + 1))


@dataclass(frozen=True)
class PhiTerm:
    """
    jobFunctions 의 원소: φ_k 를 h 배율 scale 로 평가

    Args:
        k: φ 인덱스
        scale: 인자 배율 (φ_k(scale * z))
    """
    k: int
    scale: Fraction = Fraction(1)

    def __post_init__(self):
        _check_index(self.k, MAX_PHI_INDEX, "phi")
        object.__setattr__(self, "scale", Fraction(self.scale))

    def __call__(self, z):
        return phi(self.k, float(self.scale) * np.asarray(z))

    @property
    def label(self) -> str:
        if self.scale == 1:
            return f"phi{self.k}"
        return f"phi{self.k}(h*{self.scale})"


def _check_index(k: int, upper: int, name: str) -> None:
    if int(k) != k or k < 0 or k > upper:
        raise ValueError(f"{name} index out of range: {k} (0..{upper})")


def _switchover(k: int) -> float:
    return float(max(1, k))


def _taylor(k: int, z: np.ndarray) -> np.ndarray:
    # Horner: Σ_i z^i / (i+k)!
    acc = np.full(z.shape, _INV_FACTORIALS[_TAYLOR_TERMS + k], dtype=z.dtype)
    for i in range(_TAYLOR_TERMS - 1, -1, -1):
        acc = acc * z + _INV_FACTORIALS[i + k]
    return acc


def _recurrence(k: int, z: np.ndarray) -> np.ndarray:
    value = np.exp(z)
    for j in range(k):
        value = (value - _INV_FACTORIALS[j]) / z
    return value


def phi(k: int, z):
    """
    φ_k(z) 평가 (스칼라 또는 배열, 실수/복소수)

    Args:
        k: 0..8
        z: 스칼라 또는 ndarray

    Returns:
        z 와 같은 모양의 결과
    """
    _check_index(k, MAX_PHI_INDEX, "phi")
    z_arr = np.asarray(z)
    scalar = z_arr.ndim == 0
    z_arr = np.atleast_1d(z_arr).astype(np.result_type(z_arr.dtype, np.float64), copy=False)

    if k == 0:
        out = np.exp(z_arr)
    else:
        out = np.empty_like(z_arr)
        small = np.abs(z_arr) < _switchover(k)
        if small.any():
            out[small] = _taylor(k, z_arr[small])
        if (~small).any():
            out[~small] = _recurrence(k, z_arr[~small])

    return out[0] if scalar else out


@lru_cache(maxsize=None)
def gamma_coefficients(j: int) -> tuple[Fraction, ...]:
    """
    γ_j = Σ_m c_m φ_{m+1} 의 정확한 유리수 계수

    (-1)^j C(-θ, j) = θ(θ+1)…(θ+j-1)/j! 를 단항식 θ^m 으로 전개하고
    ∫_0^1 e^{(1-θ)z} θ^m dθ = m! φ_{m+1}(z) 를 이용한다.
    """
    _check_index(j, MAX_GAMMA_INDEX, "gamma")
    poly = [Fraction(1)]
    for i in range(j):
        shifted = [Fraction(0)] + poly
        for m in range(len(poly)):
            shifted[m] += i * poly[m]
        poly = shifted
    scale = Fraction(1, factorial(j))
    return tuple(c * scale * factorial(m) for m, c in enumerate(poly))


def gamma_weight(j: int, z):
    """지수 Adams 가중함수 γ_j(z)"""
    coeffs = gamma_coefficients(j)
    return phi_combo(
        [float(c) for c in coeffs],
        [PhiTerm(m + 1) for m in range(len(coeffs))],
        z,
    )


def phi_combo(coeffs: Sequence[float], funs: Sequence, z):
    """
    Σ_i coeffs[i] · φ_{k_i}(scale_i · z)

    Args:
        coeffs: 계수 목록
        funs: PhiTerm 또는 (k, scale) 쌍 목록
        z: 스칼라 또는 ndarray

    Returns:
        z 와 같은 모양의 결과 (빈 조합이면 0)
    """
    if len(coeffs) != len(funs):
        raise ValueError(f"length mismatch: {len(coeffs)} coefficients for {len(funs)} functions")

    z_arr = np.asarray(z)
    total = np.zeros(z_arr.shape, dtype=np.result_type(z_arr.dtype, np.float64))
    for c, fun in zip(coeffs, funs):
        if c == 0:
            continue
        term = fun if isinstance(fun, PhiTerm) else PhiTerm(*fun)
        total = total + float(c) * term(z_arr)

    return total[()] if total.ndim == 0 else total
