import numpy as np
import pytest

from src.errors import OptionError
from src.options import (
    INTEGRATOR_NAMES,
    OptionsSet,
    OptionType,
    catalog,
    info,
    make_options,
    set_option,
    validate,
)


# --- 타입 ---
def test_index_expands_to_positive_integer_scalar():
    assert OptionType.parse("index").expanded == frozenset({"positive", "integer", "scalar"})
    assert OptionType.parse("indices").expanded == frozenset({"positive", "integer", "vector"})


@pytest.mark.parametrize("text", ["boolean scalar", "list positive", "text struct", "function_handle integer"])
def test_exclusive_kinds_do_not_combine(text):
    with pytest.raises(ValueError):
        OptionType.parse(text)


@pytest.mark.parametrize(
    "types, value, ok",
    [
        ("positive scalar", 1e-3, True),
        ("positive scalar", 0.0, False),
        ("positive scalar", -1, False),
        ("positive scalar", [1.0, 2.0], False),
        ("non-negative scalar", 0.0, True),
        ("negative scalar", -2.0, True),
        ("non-positive scalar", 0.5, False),
        ("integer scalar", 3.0, True),
        ("integer scalar", 2.5, False),
        ("index", 1, True),
        ("index", 0, False),
        ("indices", [1, 2, 5], True),
        ("indices", [1, 0], False),
        ("positive vector", np.array([1e-6, 1e-8]), True),
        ("matrix", np.eye(2), True),
        ("matrix", [1.0, 2.0], False),
        ("scalar", "1", False),
        ("scalar", True, False),
        ("text", "abc", True),
        ("struct", {"a": 1}, True),
        ("function_handle", len, True),
        ("function_handle", "len", False),
    ],
)
def test_type_rules(types, value, ok):
    alternatives = [OptionType.parse(part.strip()) for part in types.split("|")]
    assert any(alt.accepts(value)[0] for alt in alternatives) == ok


def test_integer_rule_is_componentwise(rng):
    values = rng.integers(1, 100, 10).astype(float)
    assert OptionType.parse("indices").accepts(values)[0]
    values[3] += 0.25
    assert not OptionType.parse("indices").accepts(values)[0]


# --- set_option ---
def test_list_value_normalizes_to_index():
    opts = set_option(OptionsSet("exprb"), "MatrixFunctions", "arnoldi")
    normalized = validate(opts)
    assert normalized["MatrixFunctions"] == 1
    assert normalized.category("MatrixFunctions") == "list"


def test_negative_min_step_is_rejected():
    with pytest.raises(OptionError, match="MinStep"):
        set_option(OptionsSet("exprb"), "MinStep", -1)


def test_vector_abs_tol_is_accepted():
    opts = set_option(OptionsSet("exprb"), "AbsTol", np.full(5, 1e-8))
    np.testing.assert_array_equal(validate(opts)["AbsTol"], np.full(5, 1e-8))


def test_unknown_option_name():
    with pytest.raises(OptionError):
        set_option(OptionsSet("exprb"), "NoSuchOpt", 1)
    with pytest.raises(OptionError):
        set_option(OptionsSet("exprb"), "Scheme", "krogstad")


def test_names_are_case_insensitive():
    opts = set_option(OptionsSet("exprb"), "abstol", 1e-9)
    assert validate(opts)["AbsTol"] == 1e-9


def test_later_set_overrides_earlier():
    opts = make_options("exprb", RelTol=1e-2).with_option("RelTol", 1e-5)
    assert validate(opts)["RelTol"] == 1e-5


def test_integrator_option_switches_catalog():
    opts = make_options("exprb", AbsTol=1e-8).with_option("Integrator", "exprk")
    assert opts.integrator == "exprk"
    normalized = validate(opts.with_option("Scheme", "etd2rk"))
    assert normalized["AbsTol"] == 1e-8
    assert normalized["Scheme"] == 2


def test_switching_integrator_with_foreign_option_fails():
    opts = make_options("exprb", Order="32")
    with pytest.raises(OptionError):
        opts.for_integrator("exprk")


# --- validate ---
def test_defaults_for_empty_exprb_set():
    normalized = validate(OptionsSet("exprb"))
    assert normalized["AbsTol"] == 1e-6
    assert normalized["RelTol"] == 1e-3
    assert normalized["MatrixFunctions"] == 0
    assert normalized.nv("Order") == 43
    assert normalized.family == "linearized"
    assert not normalized.constant_step


@pytest.mark.parametrize("value", ["yes", "true", True, "on", 1])
def test_boolean_spellings_normalize_to_one(value):
    assert validate(make_options("exprb", Stats=value))["Stats"] == 1


@pytest.mark.parametrize("value", ["no", "false", False, "off", 0])
def test_boolean_spellings_normalize_to_zero(value):
    assert validate(make_options("exprb", Stats=value))["Stats"] == 0


def test_step_size_is_renamed_to_initial_step():
    normalized = validate(make_options("exprk", StepSize=0.01))
    assert normalized["InitialStep"] == 0.01
    assert "StepSize" not in normalized
    assert normalized.constant_step


def test_h_constant_makes_variable_integrator_constant():
    assert validate(make_options("exprb", hConstant="on")).constant_step


def test_order_accepts_text_and_number():
    assert validate(make_options("exprb", Order="32")).nv("Order") == 32
    assert validate(make_options("exprb", Order=32)).nv("Order") == 32
    assert validate(make_options("exprb", Order=43))["Order"] == 1


def test_validation_reports_every_invalid_entry():
    opts = OptionsSet("exprb", {"AbsTol": -1, "RelTol": "x", "Bogus": 1})
    with pytest.raises(OptionError) as excinfo:
        validate(opts)
    messages = excinfo.value.messages
    assert len(messages) == 3
    assert any("AbsTol" in m for m in messages)
    assert any("Bogus" in m for m in messages)


def test_validation_is_idempotent():
    normalized = validate(make_options("exprb", AbsTol=1e-7, MatrixFunctions="arnoldi"))
    assert validate(normalized.raw) == normalized


@pytest.mark.parametrize("integrator", INTEGRATOR_NAMES)
def test_every_default_validates(integrator):
    for name, desc in catalog(integrator).items():
        desc.check(desc.default)
    validate(OptionsSet(integrator))


def test_set_option_changes_only_that_option():
    before = validate(OptionsSet("exp4"))
    after = validate(set_option(OptionsSet("exp4"), "RelTol", 1e-6))
    changed = [name for name in before if not np.array_equal(np.asarray(before[name], dtype=object),
                                                              np.asarray(after[name], dtype=object))]
    assert changed == ["RelTol"]


def test_catalog_groups():
    semilinear = catalog("exprk")
    linearized = catalog("exprb")
    assert {"LinOp", "LinOpV", "LinOpStats", "StepSize", "Scheme", "Parameters"} <= set(semilinear)
    assert "Jacobian" not in semilinear
    assert {"Jacobian", "JacobianV", "Semilin", "hConstant", "MinStep", "Order", "ErrorEstimate"} <= set(linearized)
    assert "kStep" in catalog("expms") and "StartupSteps" in catalog("expmssemi")
    assert validate(OptionsSet("exp4"))["DOGenerator"] == 1


# --- info ---
def test_info_abs_tol_line():
    first = info("exprb", "AbsTol").splitlines()[0]
    assert "[ positive scalar | positive vector {1e-06} ]" in first


def test_info_jacobian_v_line():
    assert "[ function_handle | {'off'} | 'on' ]" in info("exprb", "JacobianV")


def test_info_matrix_functions_default():
    assert "{'direct'} | 'arnoldi' | function_handle" in info("exprb", "MatrixFunctions")


def test_info_listing_and_see_also():
    listing = info("exprb").splitlines()
    assert len(listing) == len(catalog("exprb"))
    assert all(" - " in line and line.endswith("]") for line in listing)
    assert "See also: MaxStep, InitialStep" in info("exprb", "MinStep")
    assert info("exprb", "-").count("See also:") >= 10


def test_info_unknown_option():
    with pytest.raises(OptionError):
        info("exprb", "NoSuchOpt")


def test_info_refine_counts_points():
    text = " ".join(info("exprb", "Refine").split())
    assert "n steps with Refine=r give n*r+1 points" in text
    assert "10 steps with Refine=4 give 41" in text
