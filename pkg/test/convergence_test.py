import csv

import numpy as np
import pytest

from src.convergence import (
    ALL_METHODS,
    CSV_HEADER,
    ConvergenceCell,
    ConvergenceResult,
    ConvergenceStudy,
    find_methods,
)
from src.errors import ProblemError
from src.problems import minimal_example, semi1

STEPS = [1 / 20, 1 / 40, 1 / 80]


@pytest.fixture(scope="module")
def study_result():
    study = ConvergenceStudy(semi1(N=20), find_methods(["exprb43", "expmssemi-k2"]), max_workers=2)
    return study.run(STEPS)


def test_find_methods():
    assert [m.label for m in find_methods(["exprb"])] == ["exprb32", "exprb43"]
    assert [m.label for m in find_methods(["exp4", "exp4"])] == ["exp4"]
    assert len(ALL_METHODS) == 8
    with pytest.raises(ProblemError):
        find_methods(["rk4"])


def test_cells_are_ordered_by_method_then_step(study_result):
    assert study_result.labels() == ["exprb43", "expmssemi-k2"]
    assert [c.h_or_tol for c in study_result.for_method("exprb43")] == STEPS
    steps = [c.steps for c in study_result.for_method("expmssemi-k2")]
    assert steps == [20, 40, 80]


def test_measured_slopes(study_result):
    slopes = study_result.slopes()
    assert slopes["exprb43"] == pytest.approx(4.0, abs=0.5)
    assert slopes["expmssemi-k2"] == pytest.approx(2.0, abs=0.5)


def test_output_files(study_result, tmp_path):
    table = tmp_path / "conv.csv"
    study_result.write_csv(table)
    with open(table, encoding="utf-8") as f:
        rows = list(csv.reader(f))
    assert tuple(rows[0]) == CSV_HEADER
    assert len(rows) == 1 + 6
    assert float(rows[1][1]) == STEPS[0]

    plot = tmp_path / "conv.dat"
    study_result.write_gnuplot(plot)
    blocks = plot.read_text(encoding="utf-8").strip().split("\n\n\n")
    assert len(blocks) == 2
    assert blocks[0].startswith("# exprb43 slope=")
    assert len(blocks[1].splitlines()) == 2 + 3


def test_tolerance_mode_uses_adaptive_steps():
    study = ConvergenceStudy(semi1(N=20), find_methods(["exprb32"]), max_workers=1)
    opts = study.options_for(study.methods[0], 1e-5, "tol")
    assert opts.values["RelTol"] == 1e-5 and opts.values["AbsTol"] == 1e-5
    assert "hConstant" not in opts.values
    result = study.run([1e-4, 1e-6], mode="tol")
    errors = [c.error for c in result.cells]
    assert errors[1] < errors[0]


def test_slope_needs_two_points():
    result = ConvergenceResult("h", [ConvergenceCell("x", 0.1, 1e-3, 10, 20, 30)])
    assert np.isnan(result.slope("x"))


def test_problem_without_exact_solution():
    with pytest.raises(ProblemError, match="exact"):
        ConvergenceStudy(minimal_example())


def test_bad_mode():
    study = ConvergenceStudy(semi1(N=10), find_methods(["exprb43"]))
    with pytest.raises(ValueError):
        study.run([0.1], mode="steps")
