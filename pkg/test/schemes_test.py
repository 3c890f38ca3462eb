from fractions import Fraction

import pytest

from src.errors import SchemeError
from src.phi import PhiTerm
from src.schemes import (
    SCHEME_NAMES,
    RkScheme,
    expeuler,
    krogstad,
    resolve_scheme,
    rk_scheme_build,
    scheme_by_name,
)

F = Fraction


def test_krogstad_table_is_exact():
    sc = krogstad()
    rows = sc.rows_as_lists
    assert sc.c == (0, F(1, 2), F(1, 2), 1)
    assert rows(sc.coefficient(2, 1)) == [F(1, 2)]
    assert rows(sc.coefficient(3, 1)) == [F(1, 2), -1]
    assert rows(sc.coefficient(3, 2)) == [0, 1]
    assert rows(sc.coefficient(4, 1)) == [1, -2]
    assert sc.coefficient(4, 2) == {}
    assert rows(sc.coefficient(4, 3)) == [0, 2]
    assert [rows(sc.weight(i)) for i in range(1, 5)] == [[1, -3, 4], [0, 2, -4], [0, 2, -4], [0, -1, 4]]


def test_krogstad_scales():
    sc = krogstad()
    # a 행은 c_i 배율, b 행은 배율 1
    assert set(sc.coefficient(3, 1)) == {(1, F(1, 2)), (2, F(1, 2))}
    assert set(sc.coefficient(4, 1)) == {(1, F(1)), (2, F(1))}
    assert set(sc.weight(1)) == {(1, F(1)), (2, F(1)), (3, F(1))}


def test_krogstad_job_table():
    table = krogstad().job_table()
    assert set(table.flags()) == {"a21", "a31", "a32", "a41", "a43", "b1", "b2", "b3", "b4"}
    assert PhiTerm(1, F(1, 2)) in table.job_functions
    assert PhiTerm(3) in table.job_functions


def test_weights_sum_to_phi1():
    # Σ b_i = φ1 (1차 조건)
    for name in SCHEME_NAMES:
        sc = scheme_by_name(name)
        total: dict = {}
        for i in range(1, sc.s + 1):
            for key, coeff in sc.weight(i).items():
                total[key] = total.get(key, 0) + coeff
        assert {k: v for k, v in total.items() if v} == {(1, F(1)): 1}, name


def test_expeuler_is_one_stage():
    sc = expeuler()
    assert sc.s == 1
    assert sc.flags() == {"b1": {(1, F(1)): 1}}


def test_non_explicit_edit_is_rejected():
    with pytest.raises(SchemeError, match="explicit"):
        rk_scheme_build(4, [(2, 3, [1])])
    with pytest.raises(SchemeError, match="explicit"):
        rk_scheme_build(2, [(2, 2, [1])])


def test_row_length_and_stage_range():
    with pytest.raises(SchemeError):
        rk_scheme_build(2, [("b", 1, [1, 0, 0, 0, 1])])
    with pytest.raises(SchemeError):
        rk_scheme_build(2, [("b", 3, [1])])
    with pytest.raises(SchemeError):
        rk_scheme_build(2, [("c", [0, 1, 1])])


def test_first_node_must_be_zero():
    with pytest.raises(SchemeError):
        RkScheme(2, (F(1, 2), F(1)))


def test_resolve_scheme_variants():
    assert resolve_scheme(0, "list").name == "krogstad"
    assert resolve_scheme(2, "list").name == "etd2rk"

    custom = rk_scheme_build(1, [("b", 1, [1])], name="mine")
    assert resolve_scheme(custom, "struct") is custom
    built = resolve_scheme({"s": 1, "stage_edits": [("b", 1, [1])]}, "struct")
    assert built.flags() == custom.flags()

    def factory(theta=F(1, 2)):
        return rk_scheme_build(2, [("c", [0, theta]), (2, 1, [theta]), ("b", 2, [0, 1 / theta]),
                                   ("b", 1, [1, -1 / theta])], name="param")

    parametric = resolve_scheme({"factory": factory}, "struct", {"theta": F(1, 3)})
    assert parametric.c == (0, F(1, 3))

    with pytest.raises(SchemeError):
        scheme_by_name("nosuch")
