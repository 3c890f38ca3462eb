"""
적분기 옵션 레지스트리 모듈
- 옵션 타입 (scalar, vector, ... function_handle) 검사
- 적분기별 옵션 카탈로그와 기본값
- 검증 / 정규화 (list → 0부터의 인덱스, boolean → 0/1)
- 도움말 (info) 생성
"""

import dataclasses
from collections.abc import Mapping
from dataclasses import dataclass, field
from typing import Any, Iterator, Optional, Union

import numpy as np

from .errors import OptionError

SHAPE_KINDS = ("scalar", "vector", "matrix")
SIGN_KINDS = ("positive", "non-negative", "negative", "non-positive")
EXCLUSIVE_KINDS = ("boolean", "list", "text", "struct", "function_handle")
ALL_KINDS = SHAPE_KINDS + SIGN_KINDS + ("integer", "index", "indices") + EXCLUSIVE_KINDS

BOOLEAN_WORDS = {"on": 1, "yes": 1, "true": 1, "off": 0, "no": 0, "false": 0}

# 적분기 이름 → (문제 부류, 스텝 방식)
INTEGRATOR_FAMILIES = {
    "exprb": ("linearized", "variable"),
    "exprk": ("semilinear", "constant"),
    "expmssemi": ("semilinear", "constant"),
    "expms": ("linearized", "constant"),
    "exp4": ("linearized", "variable"),
}
INTEGRATOR_NAMES = tuple(INTEGRATOR_FAMILIES)


@dataclass(frozen=True)
class OptionType:
    """숫자/문자/구조체/함수 타입 하나 (예: 'positive scalar')"""
    kinds: tuple[str, ...]

    @classmethod
    def parse(cls, text: str) -> "OptionType":
        kinds = tuple(text.split())
        unknown = [k for k in kinds if k not in ALL_KINDS]
        if unknown:
            raise ValueError(f"unknown option type: {' '.join(unknown)}")
        exclusive = [k for k in kinds if k in EXCLUSIVE_KINDS]
        if exclusive and len(kinds) > 1:
            raise ValueError(f"'{exclusive[0]}' can not be combined with other types")
        expanded = cls(kinds).expanded
        if sum(k in expanded for k in SHAPE_KINDS) > 1:
            raise ValueError(f"conflicting shape types in '{text}'")
        if sum(k in expanded for k in SIGN_KINDS) > 1:
            raise ValueError(f"conflicting sign types in '{text}'")
        return cls(kinds)

    @property
    def label(self) -> str:
        return " ".join(self.kinds)

    @property
    def expanded(self) -> frozenset[str]:
        kinds = set(self.kinds)
        if "index" in kinds:
            kinds |= {"positive", "integer", "scalar"}
        if "indices" in kinds:
            kinds |= {"positive", "integer", "vector"}
        return frozenset(kinds - {"index", "indices"})

    @property
    def is_numeric(self) -> bool:
        return not any(k in EXCLUSIVE_KINDS for k in self.kinds)

    def accepts(self, value: Any) -> tuple[bool, Any]:
        """값이 타입에 맞으면 (True, 정규화 값)"""
        kind = self.kinds[0]
        if kind == "text":
            return isinstance(value, str), value
        if kind == "function_handle":
            ok = callable(value) or hasattr(value, "evaluate")
            return ok and not isinstance(value, (str, bool)), value
        if kind == "struct":
            ok = isinstance(value, Mapping) or (
                dataclasses.is_dataclass(value) and not isinstance(value, type)
            )
            return ok, value
        if kind in ("boolean", "list"):
            return False, value
        return self._accepts_numeric(value)

    def _accepts_numeric(self, value: Any) -> tuple[bool, Any]:
        if isinstance(value, (bool, np.bool_, str, bytes)) or callable(value) or value is None:
            return False, value
        try:
            arr = np.asarray(value, dtype=float)
        except (TypeError, ValueError):
            return False, value
        if arr.size == 0 or np.any(np.isnan(arr)):
            return False, value

        kinds = self.expanded
        if "scalar" in kinds and arr.size != 1:
            return False, value
        if "vector" in kinds and not (arr.ndim == 1 or (arr.ndim == 0)):
            return False, value
        if "matrix" in kinds and arr.ndim != 2:
            return False, value
        if "positive" in kinds and not np.all(arr > 0):
            return False, value
        if "non-negative" in kinds and not np.all(arr >= 0):
            return False, value
        if "negative" in kinds and not np.all(arr < 0):
            return False, value
        if "non-positive" in kinds and not np.all(arr <= 0):
            return False, value
        integer = "integer" in kinds
        if integer and not np.all(arr - np.round(arr) == 0):
            return False, value

        if "scalar" in kinds:
            scalar = arr.reshape(-1)[0]
            return True, int(scalar) if integer else float(scalar)
        if "vector" in kinds:
            arr = arr.reshape(-1)
        return True, arr.astype(int) if integer else arr


@dataclass(frozen=True)
class ListValue:
    """list 타입의 값 하나. numeric 은 nv 로 노출되는 숫자 (없으면 인덱스)"""
    text: str
    numeric: Optional[float] = None

    @classmethod
    def parse(cls, token: str) -> "ListValue":
        token = token.strip()
        numeric = None
        if token.endswith(")") and "(" in token:
            token, _, number = token.rpartition("(")
            numeric = float(number.rstrip(")"))
            token = token.strip()
        return cls(token.strip("'"), numeric)

    def render(self, is_default: bool) -> str:
        text = f"'{self.text}'"
        if is_default:
            text = "{" + text + "}"
        if self.numeric is not None:
            text += f" ({self.numeric:g})"
        return text


Alternative = Union[OptionType, ListValue]


@dataclass(frozen=True)
class OptionDesc:
    """
    옵션 하나의 설명

    Args:
        name: 옵션 이름
        short: 한 줄 설명
        alternatives: 타입/리스트 값 (표시 순서 그대로)
        default: 기본값 (타입 검사를 통과해야 함)
        long: 상세 설명
        see_also: 관련 옵션
        rename_to: 정규화 시 바뀌는 이름
    """
    name: str
    short: str
    alternatives: tuple[Alternative, ...]
    default: Any
    long: str = ""
    see_also: tuple[str, ...] = ()
    rename_to: Optional[str] = None
    aliases: tuple[str, ...] = ()

    @classmethod
    def create(cls, name: str, short: str, types: str, default: Any, long: str = "",
               see_also: tuple[str, ...] = (), rename_to: Optional[str] = None) -> "OptionDesc":
        alternatives: list[Alternative] = []
        for token in types.split("|"):
            token = token.strip()
            if token.startswith("'"):
                alternatives.append(ListValue.parse(token))
            else:
                alternatives.append(OptionType.parse(token))
        return cls(name, short, tuple(alternatives), default, long, tuple(see_also), rename_to)

    @property
    def list_values(self) -> tuple[ListValue, ...]:
        return tuple(a for a in self.alternatives if isinstance(a, ListValue))

    @property
    def is_boolean(self) -> bool:
        words = {v.text.lower() for v in self.list_values}
        return bool(words) and words <= {"on", "off"}

    def check(self, value: Any) -> tuple[str, Any]:
        """
        값 검사 및 정규화

        Returns:
            (분류, 정규화 값). 분류는 numeric / list / boolean / text / struct / function_handle
        """
        list_values = self.list_values
        for alt in self.alternatives:
            if isinstance(alt, ListValue):
                continue
            if alt.kinds[0] in ("text",) and isinstance(value, str) and self._match_list(value) is not None:
                continue
            ok, norm = alt.accepts(value)
            if ok:
                category = alt.kinds[0] if not alt.is_numeric else "numeric"
                return category, norm

        if list_values:
            if self.is_boolean:
                flag = self._match_boolean(value)
                if flag is not None:
                    return "boolean", flag
            elif isinstance(value, str):
                index = self._match_list(value)
                if index is not None:
                    return "list", index
            elif isinstance(value, (int, float, np.integer, np.floating)) and not isinstance(value, bool):
                for index, item in enumerate(list_values):
                    if item.numeric is not None and item.numeric == float(value):
                        return "list", index
                if float(value).is_integer() and 0 <= int(value) < len(list_values):
                    return "list", int(value)

        raise OptionError(f"{self.name}: invalid value {value!r}, expected [ {self.type_text(show_default=False)} ]")

    def _match_list(self, value: str) -> Optional[int]:
        lowered = value.strip().strip("'").lower()
        for index, item in enumerate(self.list_values):
            if item.text.lower() == lowered:
                return index
        return None

    @staticmethod
    def _match_boolean(value: Any) -> Optional[int]:
        if isinstance(value, (bool, np.bool_)):
            return int(bool(value))
        if isinstance(value, str):
            return BOOLEAN_WORDS.get(value.strip().strip("'").lower())
        if isinstance(value, (int, np.integer)) and int(value) in (0, 1):
            return int(value)
        return None

    def numeric_value(self, index: int) -> float:
        """list 인덱스의 숫자값 (nv). 괄호 숫자가 없으면 인덱스 그대로"""
        if self.is_boolean:
            return float(index)
        item = self.list_values[index]
        return item.numeric if item.numeric is not None else float(index)

    def _default_list_index(self) -> Optional[int]:
        if isinstance(self.default, str):
            if self.is_boolean:
                flag = BOOLEAN_WORDS.get(self.default.lower())
                for i, item in enumerate(self.list_values):
                    if BOOLEAN_WORDS.get(item.text.lower()) == flag:
                        return i
            return self._match_list(self.default)
        return None

    def type_text(self, show_default: bool = True) -> str:
        default_index = self._default_list_index() if show_default else None
        numeric_default = show_default and default_index is None
        parts: list[str] = []
        list_index = 0
        last_type = max((i for i, a in enumerate(self.alternatives) if isinstance(a, OptionType)), default=-1)
        for i, alt in enumerate(self.alternatives):
            if isinstance(alt, ListValue):
                parts.append(alt.render(list_index == default_index))
                list_index += 1
                continue
            text = alt.label
            if numeric_default and i == last_type and alt.kinds[0] != "function_handle":
                text += " {" + _format_default(self.default) + "}"
            parts.append(text)
        return " | ".join(parts)

    def info_line(self) -> str:
        return f"{self.name} - {self.short} [ {self.type_text()} ]"


def _format_default(value: Any) -> str:
    if value is None or (isinstance(value, Mapping) and not value):
        return "[]"
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return f"{value:g}"
    arr = np.asarray(value)
    if arr.ndim > 0:
        return "[" + " ".join(f"{v:g}" for v in arr.ravel()) + "]"
    return str(value)


_BOOL = "'on' | 'off'"

COMMON_OPTIONS = (
    OptionDesc.create(
        "AbsTol", "Absolute error tolerance", "positive scalar | positive vector", 1e-6,
        "Absolute tolerance of the local error estimate. A vector gives one tolerance per "
        "solution component and must have the problem dimension.",
        ("RelTol", "NormControl"),
    ),
    OptionDesc.create(
        "RelTol", "Relative error tolerance", "positive scalar", 1e-3,
        "Relative tolerance of the local error estimate. It is weighted with the larger "
        "magnitude of the old and the new solution.",
        ("AbsTol", "NormControl"),
    ),
    OptionDesc.create(
        "NormControl", "Control error relative to norm of solution", _BOOL, "off",
        "When on, the error estimate is measured in the Euclidean norm of the whole "
        "vector instead of componentwise.",
        ("AbsTol", "RelTol"),
    ),
    OptionDesc.create(
        "MatrixFunctions", "Matrix function evaluator", "'direct' | 'arnoldi' | function_handle", "direct",
        "Selects how products of matrix functions with vectors are computed. 'direct' "
        "diagonalizes the matrix and is meant for small systems, 'arnoldi' uses a Krylov "
        "subspace and only needs matrix-vector products. A custom evaluator object or a "
        "factory returning one may be given instead.",
        ("KrylovTestIndex", "MatrixFunctionStats"),
    ),
    OptionDesc.create(
        "KrylovTestIndex", "Component monitored for Krylov convergence", "index", 1,
        "Index (starting at 1) of the solution component that is watched while the "
        "Krylov subspace grows.",
        ("MatrixFunctions",),
    ),
    OptionDesc.create(
        "NonAutonomous", "Right hand side depends explicitly on time", _BOOL, "off",
        "Enables the time-derivative correction. The derivative is taken from the "
        "problem's df_dt callback or approximated by finite differences.",
    ),
    OptionDesc.create(
        "Complex", "Solution may be complex", _BOOL, "off",
        "Allows complex initial values and right hand sides. Norms use the complex modulus.",
    ),
    OptionDesc.create(
        "Structure", "Jacobian structure information", "struct", {},
        "Accepted for compatibility and currently ignored.",
    ),
    OptionDesc.create(
        "GFcn", "Nonlinear part g of the right hand side", "function_handle | 'off' | 'on'", "on",
        "Function g(t, y) with F = A y + g. When on, the problem's g callback is used if "
        "it exists, otherwise g is computed as F - A y. For linearized integrators g is "
        "only used together with Semilin.",
        ("LinOp", "Semilin"),
    ),
    OptionDesc.create(
        "DOGenerator", "Dense output generator", "function_handle | 'off' | 'on'", "off",
        "Turns on dense output. 'on' selects the generic cubic Hermite formula, which is "
        "not suitable for stiff problems.",
        ("Refine",),
    ),
    OptionDesc.create(
        "Refine", "Output refinement factor", "index", 1,
        "Adds Refine-1 dense output points inside every accepted step. Needs a dense "
        "output generator when larger than 1 and only applies to the natural step grid. "
        "The step ends are kept, so n steps with Refine=r give n*r+1 points "
        "(10 steps with Refine=4 give 41).",
        ("DOGenerator",),
    ),
    OptionDesc.create(
        "OutputFcn", "Function called after every accepted step", "function_handle | 'off'", "off",
        "Called as OutputFcn(t, y_selected) after every accepted step.",
        ("OutputSel",),
    ),
    OptionDesc.create(
        "OutputSel", "Output selection indices", "indices | 'all'", "all",
        "Indices (starting at 1) of the components handed to OutputFcn and written to "
        "solution files.",
        ("OutputFcn",),
    ),
    OptionDesc.create(
        "Stats", "Display computational cost statistics", _BOOL, "off",
        "Prints step counts and evaluation counters to the statistics channel at the end.",
        ("StepStats", "MatrixFunctionStats", "JacobianStats"),
    ),
    OptionDesc.create(
        "MatrixFunctionStats", "Display matrix function statistics", _BOOL, "off",
        "Logs the evaluator's per-flag counters to the matFunLog channel.",
        ("Stats", "MatrixFunctions"),
    ),
    OptionDesc.create(
        "Waitbar", "Show progress", _BOOL, "off",
        "Shows a textual progress bar on the log stream.",
    ),
    OptionDesc.create(
        "ClearInternalData", "Drop internal run data after integration", _BOOL, "on",
        "When off, the run context is attached to the returned solution for inspection.",
    ),
)

SEMILINEAR_OPTIONS = (
    OptionDesc.create(
        "LinOp", "Linear part A of the right hand side", "matrix | function_handle | 'off' | 'on'", "on",
        "The matrix A with F = A y + g. 'on' takes it from the problem.",
        ("LinOpV", "GFcn"),
    ),
    OptionDesc.create(
        "LinOpV", "Product of the linear part with a vector", "function_handle | 'off' | 'on'", "off",
        "Function v -> A v. Sufficient for the Krylov evaluator.",
        ("LinOp",),
    ),
    OptionDesc.create(
        "LinOpStats", "Log linear operator evaluations", _BOOL, "off",
        "Logs evaluations of the linear part to the jacLog channel.",
        ("Stats",),
    ),
)

LINEARIZED_OPTIONS = (
    OptionDesc.create(
        "Jacobian", "Jacobian of the right hand side", "function_handle | 'off' | 'on'", "on",
        "Function (t, y) -> dF/dy. 'on' takes it from the problem; without any Jacobian "
        "callback a finite difference approximation is used.",
        ("JacobianV", "Semilin"),
    ),
    OptionDesc.create(
        "JacobianV", "Jacobian times vector", "function_handle | 'off' | 'on'", "off",
        "Function (t, y, v) -> dF/dy v. Sufficient for the Krylov evaluator.",
        ("Jacobian",),
    ),
    OptionDesc.create(
        "GJacobian", "Jacobian of the nonlinear part", "function_handle | 'off' | 'on'", "on",
        "Function (t, y) -> dg/dy, used with Semilin.",
        ("GJacobianV", "Semilin"),
    ),
    OptionDesc.create(
        "GJacobianV", "Jacobian of the nonlinear part times vector", "function_handle | 'off' | 'on'", "off",
        "Function (t, y, v) -> dg/dy v, used with Semilin.",
        ("GJacobian", "Semilin"),
    ),
    OptionDesc.create(
        "Semilin", "Use the semilinear structure for the Jacobian", _BOOL, "off",
        "When on, the Jacobian is assembled as A + dg/dy from LinOp and GJacobian.",
        ("LinOp", "GFcn", "GJacobian"),
    ),
    OptionDesc.create(
        "JacobianStats", "Log Jacobian evaluations", _BOOL, "off",
        "Logs Jacobian evaluations to the jacLog channel.",
        ("Stats",),
    ),
)

CONSTANT_STEP_OPTIONS = (
    OptionDesc.create(
        "StepSize", "Step size", "positive scalar | 'auto'", "auto",
        "Constant step size. 'auto' uses a hundredth of the integration interval.",
        ("InitialStep",),
        rename_to="InitialStep",
    ),
)

VARIABLE_STEP_OPTIONS = (
    OptionDesc.create(
        "hConstant", "Keep the initial step size", _BOOL, "off",
        "Disables step size control; every step uses InitialStep except a shortened last one.",
        ("InitialStep",),
    ),
    OptionDesc.create(
        "InitialStep", "Suggested initial step size", "positive scalar | 'auto'", "auto",
        "First step size. 'auto' derives it from the tolerances and the initial slope.",
        ("MaxStep", "MinStep"),
    ),
    OptionDesc.create(
        "MaxStep", "Upper bound on step size", "positive scalar | 'auto'", "auto",
        "'auto' is the length of the integration interval.",
        ("MinStep", "InitialStep"),
    ),
    OptionDesc.create(
        "MinStep", "Lower bound on step size", "positive scalar | 'auto'", "auto",
        "'auto' is 16 times machine epsilon times the interval length. Integration aborts "
        "when a smaller step would be required.",
        ("MaxStep", "InitialStep"),
    ),
    OptionDesc.create(
        "StepStats", "Log every step", _BOOL, "off",
        "Logs accepted and rejected steps to the stepLog channel.",
        ("Stats",),
    ),
)

INTEGRATOR_OPTIONS = {
    "exprk": (
        OptionDesc.create(
            "Scheme", "Exponential Runge-Kutta scheme",
            "'krogstad' | 'expeuler' | 'etd2rk' | 'cox-matthews' | 'hochbruck-ostermann' | struct",
            "krogstad",
            "One of the bundled schemes or a user built RkScheme.",
            ("Parameters",),
        ),
        OptionDesc.create(
            "Parameters", "Scheme parameters", "struct", {},
            "Passed to parametric scheme factories. The bundled schemes ignore it.",
            ("Scheme",),
        ),
    ),
    "exprb": (
        OptionDesc.create(
            "Order", "Order of the method", "'32' (32) | '43' (43)", "43",
            "'32' is the two-stage scheme of order 3 with an embedded "
            "order 2 solution, '43' the three-stage scheme of order 4 with an embedded "
            "order 3 solution.",
            ("ErrorEstimate",),
        ),
        OptionDesc.create(
            "ErrorEstimate", "Error estimator", "'embedded' | 'none'", "embedded",
            "'embedded' uses the difference to the embedded solution, 'none' disables the "
            "estimate so the step size grows up to MaxStep.",
            ("Order",),
        ),
    ),
    "expmssemi": (
        OptionDesc.create(
            "kStep", "Number of steps", "index", 2,
            "Number of previous points used; the method has order kStep.",
            ("StartupSteps",),
        ),
        OptionDesc.create(
            "StartupSteps", "Sub-steps per startup interval", "index", 4,
            "Sub-steps of the one-step method producing the first kStep-1 points.",
            ("kStep",),
        ),
    ),
    "expms": (
        OptionDesc.create(
            "kStep", "Number of steps", "index", 2,
            "Number of previous points used; the method has order kStep+1.",
            ("StartupSteps",),
        ),
        OptionDesc.create(
            "StartupSteps", "Sub-steps per startup interval", "index", 4,
            "Sub-steps of the one-step method producing the first kStep-1 points.",
            ("kStep",),
        ),
    ),
    "exp4": (
        OptionDesc.create(
            "DOGenerator", "Dense output generator", "function_handle | 'off' | 'on'", "on",
            "exp4 has its own dense output formula, used when 'on'.",
            ("Refine",),
        ),
    ),
}


def _integrator_desc(default: str) -> OptionDesc:
    types = " | ".join(f"'{name}'" for name in INTEGRATOR_NAMES)
    return OptionDesc.create(
        "Integrator", "Integrator to use", types, default,
        "Selects the integrator. Options set for one integrator stay valid for another "
        "as long as their names exist there.",
    )


def catalog(integrator: str) -> dict[str, OptionDesc]:
    """적분기의 전체 옵션 카탈로그 (이름 → 설명)"""
    if integrator not in INTEGRATOR_FAMILIES:
        raise OptionError(f"unknown integrator '{integrator}'")
    family, stepping = INTEGRATOR_FAMILIES[integrator]
    groups = [COMMON_OPTIONS, (_integrator_desc(integrator),)]
    groups.append(SEMILINEAR_OPTIONS if family == "semilinear" else LINEARIZED_OPTIONS)
    groups.append(CONSTANT_STEP_OPTIONS if stepping == "constant" else VARIABLE_STEP_OPTIONS)
    groups.append(INTEGRATOR_OPTIONS[integrator])

    result: dict[str, OptionDesc] = {}
    for group in groups:
        for desc in group:
            # 적분기 전용 설명이 공통 설명을 덮어씀 (exp4 DOGenerator)
            result[desc.name] = desc
    return result


def _canonical(cat: Mapping[str, OptionDesc], name: str) -> Optional[str]:
    if name in cat:
        return name
    lowered = name.lower()
    for key in cat:
        if key.lower() == lowered:
            return key
    return None


@dataclass(frozen=True)
class OptionsSet:
    """사용자가 설정한 옵션 (원본 값)"""
    integrator: str = "exprb"
    values: Mapping[str, Any] = field(default_factory=dict)

    def with_option(self, name: str, value: Any) -> "OptionsSet":
        return set_option(self, name, value)

    def for_integrator(self, integrator: str) -> "OptionsSet":
        """다른 적분기용으로 확장. 남은 이름이 모두 유효해야 함"""
        cat = catalog(integrator)
        invalid = [n for n in self.values if n != "Integrator" and n not in cat]
        if invalid:
            raise OptionError([f"unknown option '{n}' for {integrator}" for n in invalid])
        values = {k: v for k, v in self.values.items() if k != "Integrator"}
        return OptionsSet(integrator, values)


def make_options(integrator: str = "exprb", **values: Any) -> OptionsSet:
    """키워드 인자로 OptionsSet 생성"""
    opts = OptionsSet(integrator)
    for name, value in values.items():
        opts = set_option(opts, name, value)
    return opts


def set_option(opts: OptionsSet, name: str, value: Any) -> OptionsSet:
    """
    옵션 하나 설정 (새 OptionsSet 반환)

    Raises:
        OptionError: 알 수 없는 이름 또는 타입 위반
    """
    cat = catalog(opts.integrator)
    canonical = _canonical(cat, name)
    if canonical is None:
        raise OptionError(f"unknown option '{name}' for {opts.integrator}")
    category, norm = cat[canonical].check(value)

    values = dict(opts.values)
    values[canonical] = value
    if canonical == "Integrator":
        target = INTEGRATOR_NAMES[norm]
        return OptionsSet(opts.integrator, {k: v for k, v in values.items() if k != "Integrator"}).for_integrator(target)
    return OptionsSet(opts.integrator, values)


class NormalizedOptions(Mapping):
    """
    검증된 옵션 보기

    모든 카탈로그 옵션이 기본값으로 채워지고 list/boolean 값은 인덱스가 된다.
    """

    def __init__(
        self,
        integrator: str,
        values: dict[str, Any],
        categories: dict[str, str],
        numeric: dict[str, float],
        raw: OptionsSet,
    ):
        self.integrator = integrator
        self._values = values
        self._categories = categories
        self._numeric = numeric
        self.raw = raw

    @property
    def family(self) -> str:
        return INTEGRATOR_FAMILIES[self.integrator][0]

    @property
    def constant_step(self) -> bool:
        return INTEGRATOR_FAMILIES[self.integrator][1] == "constant" or bool(self._values.get("hConstant", 0))

    def __getitem__(self, name: str) -> Any:
        return self._values[name]

    def __iter__(self) -> Iterator[str]:
        return iter(self._values)

    def __len__(self) -> int:
        return len(self._values)

    def category(self, name: str) -> str:
        return self._categories[name]

    def nv(self, name: str) -> float:
        """list 옵션의 숫자값"""
        return self._numeric[name]

    def is_list(self, name: str) -> bool:
        return self._categories[name] in ("list", "boolean")

    def is_on(self, name: str) -> bool:
        return self._categories[name] == "boolean" and self._values[name] == 1

    def is_callable(self, name: str) -> bool:
        return self._categories[name] == "function_handle"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, NormalizedOptions):
            return NotImplemented
        if self.integrator != other.integrator or set(self._values) != set(other._values):
            return False
        for key, value in self._values.items():
            theirs = other._values[key]
            if isinstance(value, np.ndarray) or isinstance(theirs, np.ndarray):
                if not np.array_equal(value, theirs):
                    return False
            elif value is not theirs and value != theirs:
                return False
        return self._categories == other._categories

    def __hash__(self):
        return id(self)


def validate(opts: OptionsSet) -> NormalizedOptions:
    """
    OptionsSet 검증 및 정규화

    Raises:
        OptionError: 잘못된 항목 전체 목록
    """
    cat = catalog(opts.integrator)
    errors: list[str] = []
    values: dict[str, Any] = {}
    categories: dict[str, str] = {}
    numeric: dict[str, float] = {}

    for name in opts.values:
        if name not in cat:
            errors.append(f"unknown option '{name}' for {opts.integrator}")

    for name, desc in cat.items():
        raw = opts.values.get(name, desc.default)
        try:
            category, norm = desc.check(raw)
        except OptionError as e:
            errors.extend(e.messages)
            continue
        target = desc.rename_to or name
        values[target] = norm
        categories[target] = category
        if category in ("list", "boolean"):
            numeric[target] = desc.numeric_value(norm)

    if errors:
        raise OptionError(errors)
    return NormalizedOptions(opts.integrator, values, categories, numeric, opts)


def info(integrator: str, opt_name: Optional[str] = None) -> str:
    """
    옵션 도움말

    Args:
        integrator: 적분기 이름
        opt_name: None 이면 옵션 목록, '-' 이면 모든 상세 설명, 그 외 해당 옵션 설명

    Returns:
        출력할 텍스트
    """
    cat = catalog(integrator)
    if opt_name is None:
        return "\n".join(desc.info_line() for desc in cat.values())
    if opt_name == "-":
        return "\n\n".join(_long_text(desc) for desc in cat.values())

    canonical = _canonical(cat, opt_name)
    if canonical is None:
        raise OptionError(f"unknown option '{opt_name}' for {integrator}")
    return _long_text(cat[canonical])


def _long_text(desc: OptionDesc) -> str:
    lines = [desc.info_line()]
    if desc.long:
        lines.append("")
        lines.append(desc.long)
    if desc.rename_to:
        lines.append(f"Renamed to {desc.rename_to} during integration.")
    if desc.see_also:
        lines.append("")
        lines.append("See also: " + ", ".join(desc.see_also))
    return "\n".join(lines)
