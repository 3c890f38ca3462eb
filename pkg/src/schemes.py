"""
지수 Runge-Kutta 계수표 모듈
- RkScheme: 절점 c, 단계 계수 a_ij, 가중치 b_i (φ 조합)
- rk_scheme_build: 편집 목록으로 계수표 생성 (명시적 방법만)
- 내장 계수표: krogstad, expeuler, etd2rk, cox-matthews, hochbruck-ostermann
"""

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Mapping, Optional, Sequence, Union

from .errors import SchemeError
from .matfun import JobTable
from .phi import PhiTerm

MAX_ROW_LENGTH = 4

# (φ 인덱스, 배율) → 계수
PhiCombo = dict[tuple[int, Fraction], Fraction]
RowSpec = Union[Sequence[Any], Mapping[tuple[int, Any], Any]]


def _as_combo(row: RowSpec, default_scale: Fraction) -> PhiCombo:
    """[φ1, φ2, ...] 계수 목록 또는 {(k, scale): 계수} 를 PhiCombo 로"""
    combo: PhiCombo = {}
    if isinstance(row, Mapping):
        for (k, scale), coeff in row.items():
            if not 1 <= int(k) <= MAX_ROW_LENGTH:
                raise SchemeError(f"phi index {k} out of range 1..{MAX_ROW_LENGTH}")
            key = (int(k), Fraction(scale))
            combo[key] = combo.get(key, Fraction(0)) + Fraction(coeff)
    else:
        row = list(row)
        if len(row) > MAX_ROW_LENGTH:
            raise SchemeError(f"coefficient row longer than {MAX_ROW_LENGTH}: {row}")
        for k, coeff in enumerate(row, start=1):
            if coeff:
                combo[(k, default_scale)] = Fraction(coeff)
    return {key: value for key, value in combo.items() if value != 0}


@dataclass(frozen=True)
class RkScheme:
    """
    명시적 지수 Runge-Kutta 계수표

    a[(i, j)] 와 b[i] 의 i, j 는 1 부터 센다.
    """
    s: int
    c: tuple[Fraction, ...]
    a: Mapping[tuple[int, int], PhiCombo] = field(default_factory=dict)
    b: Mapping[int, PhiCombo] = field(default_factory=dict)
    name: str = "custom"

    def __post_init__(self):
        if self.s < 1:
            raise SchemeError("a scheme needs at least one stage")
        if len(self.c) != self.s:
            raise SchemeError(f"{self.s} stages need {self.s} nodes, got {len(self.c)}")
        if self.c[0] != 0:
            raise SchemeError("the first node must be 0")
        for i, j in self.a:
            if not (1 <= j < i <= self.s):
                raise SchemeError(f"a{i}{j}: only explicit schemes are supported")

    def coefficient(self, i: int, j: int) -> PhiCombo:
        return dict(self.a.get((i, j), {}))

    def weight(self, i: int) -> PhiCombo:
        return dict(self.b.get(i, {}))

    def rows_as_lists(self, combo: PhiCombo) -> list[Fraction]:
        """단일 배율 행을 [φ1, φ2, ...] 목록으로 (Krogstad 표 비교용)"""
        if not combo:
            return []
        width = max(k for k, _ in combo)
        out = [Fraction(0)] * width
        for (k, _), coeff in combo.items():
            out[k - 1] += coeff
        return out

    def job_functions(self) -> tuple[PhiTerm, ...]:
        keys = set()
        for combo in list(self.a.values()) + list(self.b.values()):
            keys.update(combo)
        if not keys:
            keys.add((1, Fraction(1)))
        return tuple(PhiTerm(k, scale) for k, scale in sorted(keys, key=lambda ks: (ks[1], ks[0])))

    def flags(self) -> dict[str, PhiCombo]:
        """JobTable 플래그 (a{i}{j}, b{i}) → 조합"""
        flags: dict[str, PhiCombo] = {}
        for (i, j), combo in sorted(self.a.items()):
            if combo:
                flags[f"a{i}{j}"] = combo
        for i, combo in sorted(self.b.items()):
            if combo:
                flags[f"b{i}"] = combo
        return flags

    def job_table(self, extra_functions: Sequence[PhiTerm] = ()) -> JobTable:
        functions = list(self.job_functions())
        for term in extra_functions:
            if term not in functions:
                functions.append(term)
        return JobTable.build(functions, {flag: [combo] for flag, combo in self.flags().items()})


def rk_scheme_build(s: int, stage_edits: Sequence[tuple] = (), c: Optional[Sequence[Any]] = None,
                    name: str = "custom") -> RkScheme:
    """
    편집 목록으로 RkScheme 생성

    Args:
        s: 단계 수
        stage_edits: (i, j, row) 는 a_ij, ("b", i, row) 는 b_i, ("c", nodes) 는 절점.
            row 는 [φ1, φ2, ...] 계수 (배율은 a 행이면 c_i, b 행이면 1) 또는 {(k, scale): 계수}
        c: 절점 (edits 의 "c" 가 우선)
        name: 계수표 이름

    Raises:
        SchemeError: j >= i 인 a_ij, 범위 밖 단계, 4 보다 긴 행
    """
    nodes = [Fraction(x) for x in (c if c is not None else [0] * s)]
    for edit in stage_edits:
        if edit[0] == "c":
            nodes = [Fraction(x) for x in edit[1]]
    if len(nodes) != s:
        raise SchemeError(f"{s} stages need {s} nodes, got {len(nodes)}")

    a: dict[tuple[int, int], PhiCombo] = {}
    b: dict[int, PhiCombo] = {}
    for edit in stage_edits:
        if edit[0] == "c":
            continue
        if edit[0] == "b":
            _, i, row = edit
            if not 1 <= i <= s:
                raise SchemeError(f"b{i}: stage out of range 1..{s}")
            b[i] = _as_combo(row, Fraction(1))
            continue
        i, j, row = edit
        if not (1 <= i <= s and 1 <= j <= s):
            raise SchemeError(f"a{i}{j}: stage out of range 1..{s}")
        if j >= i:
            raise SchemeError(f"a{i}{j}: only explicit schemes are supported")
        a[(i, j)] = _as_combo(row, nodes[i - 1])
    return RkScheme(s, tuple(nodes), a, b, name)


_H = Fraction(1, 2)


def krogstad() -> RkScheme:
    return rk_scheme_build(4, [
        ("c", [0, _H, _H, 1]),
        (2, 1, [_H]),
        (3, 1, [_H, -1]),
        (3, 2, [0, 1]),
        (4, 1, [1, -2]),
        (4, 3, [0, 2]),
        ("b", 1, [1, -3, 4]),
        ("b", 2, [0, 2, -4]),
        ("b", 3, [0, 2, -4]),
        ("b", 4, [0, -1, 4]),
    ], name="krogstad")


def expeuler() -> RkScheme:
    return rk_scheme_build(1, [("c", [0]), ("b", 1, [1])], name="expeuler")


def etd2rk() -> RkScheme:
    return rk_scheme_build(2, [
        ("c", [0, 1]),
        (2, 1, [1]),
        ("b", 1, [1, -1]),
        ("b", 2, [0, 1]),
    ], name="etd2rk")


def cox_matthews() -> RkScheme:
    # a41 은 절점과 다른 배율의 φ1 을 섞는다
    return rk_scheme_build(4, [
        ("c", [0, _H, _H, 1]),
        (2, 1, [_H]),
        (3, 2, [_H]),
        (4, 1, {(1, 1): 1, (1, _H): -1}),
        (4, 3, {(1, _H): 1}),
        ("b", 1, [1, -3, 4]),
        ("b", 2, [0, 2, -4]),
        ("b", 3, [0, 2, -4]),
        ("b", 4, [0, -1, 4]),
    ], name="cox-matthews")


def hochbruck_ostermann() -> RkScheme:
    a52 = {(2, _H): _H, (3, 1): -1, (2, 1): Fraction(1, 4), (3, _H): -_H}
    a54 = {key: -value for key, value in a52.items()}
    a54[(2, _H)] = a54.get((2, _H), 0) + Fraction(1, 4)
    a51 = {(1, _H): _H}
    for key, value in a52.items():
        a51[key] = a51.get(key, 0) - 2 * value
    for key, value in a54.items():
        a51[key] = a51.get(key, 0) - value
    return rk_scheme_build(5, [
        ("c", [0, _H, _H, 1, _H]),
        (2, 1, [_H]),
        (3, 1, {(1, _H): _H, (2, _H): -1}),
        (3, 2, {(2, _H): 1}),
        (4, 1, [1, -2]),
        (4, 2, [0, 1]),
        (4, 3, [0, 1]),
        (5, 1, a51),
        (5, 2, a52),
        (5, 3, a52),
        (5, 4, a54),
        ("b", 1, [1, -3, 4]),
        ("b", 4, [0, -1, 4]),
        ("b", 5, [0, 4, -8]),
    ], name="hochbruck-ostermann")


SCHEME_FACTORIES: dict[str, Callable[..., RkScheme]] = {
    "krogstad": krogstad,
    "expeuler": expeuler,
    "etd2rk": etd2rk,
    "cox-matthews": cox_matthews,
    "hochbruck-ostermann": hochbruck_ostermann,
}
SCHEME_NAMES = tuple(SCHEME_FACTORIES)


def scheme_by_name(name: str, parameters: Optional[Mapping] = None) -> RkScheme:
    """이름으로 내장 계수표 생성. 내장 계수표는 parameters 를 무시한다."""
    try:
        factory = SCHEME_FACTORIES[name.lower()]
    except KeyError:
        raise SchemeError(f"unknown scheme '{name}'") from None
    return factory()


def resolve_scheme(value: Any, category: str, parameters: Optional[Mapping] = None) -> RkScheme:
    """
    exprk.Scheme 옵션 값 → RkScheme

    Args:
        value: list 인덱스, RkScheme, rk_scheme_build 인자 맵 또는 팩토리
        category: 옵션 분류 (list / struct)
        parameters: exprk.Parameters
    """
    if category == "list":
        return scheme_by_name(SCHEME_NAMES[value], parameters)
    if isinstance(value, RkScheme):
        return value
    if isinstance(value, Mapping):
        if "factory" in value:
            return value["factory"](**dict(parameters or {}))
        return rk_scheme_build(**value)
    raise SchemeError(f"can not build a scheme from {value!r}")
