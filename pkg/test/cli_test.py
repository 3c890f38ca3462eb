import csv

import numpy as np
import pytest

from src.cli import (
    EXIT_INVALID,
    EXIT_OK,
    parse_floats,
    parse_pairs,
    parse_tspan,
    read_solution_csv,
    run_cli,
)
from src.errors import ConfigError, ProblemError
from src.problems import semi1


@pytest.fixture
def cli(tmp_path, clean_env):
    def invoke(*argv):
        return run_cli(list(argv), env_path=tmp_path / ".env")
    return invoke


# --- 인자 파싱 ---
def test_parse_pairs():
    assert parse_pairs(["N=10,epsilon=0.5"], "--param") == {"N": 10, "epsilon": 0.5}
    assert parse_pairs(["AbsTol=[1e-6, 1e-8]", "Stats=ON"], "--opt") == {"AbsTol": [1e-6, 1e-8], "Stats": "on"}
    assert parse_pairs(None, "--opt") == {}
    with pytest.raises(ConfigError, match="--param"):
        parse_pairs(["N"], "--param")


def test_parse_tspan():
    assert parse_tspan("0,1") == (0.0, 1.0, None)
    assert parse_tspan("0, 0.5, 6") == (0.0, 0.5, 6)
    for bad in ("0", "0,1,1", "a,b", "0,1,2,3"):
        with pytest.raises(ProblemError):
            parse_tspan(bad)


def test_parse_floats():
    assert parse_floats("1/40, 0.01") == [0.025, 0.01]
    with pytest.raises(ConfigError):
        parse_floats("1/x")


# --- run ---
def test_run_writes_csv(cli, tmp_path):
    out = tmp_path / "sol.csv"
    assert cli("run", "semi1", "--param", "N=10", "--out", str(out)) == EXIT_OK
    with open(out, encoding="utf-8") as f:
        header = next(csv.reader(f))
    assert header == ["t"] + [f"y{i}" for i in range(1, 11)]

    t, y = read_solution_csv(str(out))
    reference = semi1(N=10).problem
    assert t[0] == 0.0 and t[-1] == 1.0
    np.testing.assert_array_equal(y[0], reference.y0)
    np.testing.assert_allclose(y[-1], reference.exact(1.0), atol=1e-3)


def test_run_to_stdout_with_problem_flag(cli, capsys):
    assert cli("run", "--problem", "minimal_example", "--opt", "OutputSel=[2]") == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "t,y2"
    assert lines[1] == "0,1"


def test_run_with_output_times(cli, tmp_path):
    out = tmp_path / "sol.csv"
    assert cli("run", "semi1", "--param", "N=10", "--tspan", "0.5,1,6", "--out", str(out)) == EXIT_OK
    t, y = read_solution_csv(str(out))
    np.testing.assert_allclose(t, np.linspace(0.5, 1.0, 6), rtol=0, atol=1e-15)
    np.testing.assert_allclose(y[0], semi1(N=10).problem.exact(0.5), rtol=1e-15)


def test_run_with_options_file(cli, tmp_path):
    options_file = tmp_path / "run.opts"
    options_file.write_text("# 촘촘한 허용오차\nRelTol = 1e-8\nAbsTol = 1e-10\n", encoding="utf-8")
    loose, tight = tmp_path / "loose.csv", tmp_path / "tight.csv"
    assert cli("run", "semi1", "--param", "N=10", "--out", str(loose)) == EXIT_OK
    assert cli("run", "semi1", "--param", "N=10", "--options-file", str(options_file),
               "--out", str(tight)) == EXIT_OK
    assert len(read_solution_csv(str(tight))[0]) > len(read_solution_csv(str(loose))[0])


def test_opt_integrator_with_scheme_from_file(cli, tmp_path):
    options_file = tmp_path / "scheme.opts"
    options_file.write_text("Scheme = krogstad\nStepSize = 0.05\n", encoding="utf-8")
    out = tmp_path / "sol.csv"
    assert cli("run", "semi1", "--param", "N=10", "--options-file", str(options_file),
               "--opt", "Integrator=exprk", "--out", str(out)) == EXIT_OK
    t, y = read_solution_csv(str(out))
    assert len(t) == 21
    np.testing.assert_allclose(y[-1], semi1(N=10).problem.exact(1.0), atol=1e-4)


def test_saved_options_reproduce_the_run(cli, tmp_path):
    saved = tmp_path / "effective.opts"
    first, second = tmp_path / "first.csv", tmp_path / "second.csv"
    assert cli("run", "semi1", "--param", "N=10", "--opt", "Integrator=exprk,Scheme=etd2rk,StepSize=0.1",
               "--save-options", str(saved), "--out", str(first)) == EXIT_OK
    assert "Integrator = exprk" in saved.read_text(encoding="utf-8")
    assert cli("run", "semi1", "--param", "N=10", "--options-file", str(saved), "--out", str(second)) == EXIT_OK
    assert first.read_text(encoding="utf-8") == second.read_text(encoding="utf-8")


def test_check_options_file(cli, tmp_path, capsys):
    good = tmp_path / "good.opts"
    good.write_text("Integrator = exprk\nScheme = krogstad\n", encoding="utf-8")
    assert cli("check", str(good)) == EXIT_OK
    assert "ok" in capsys.readouterr().out

    bad = tmp_path / "bad.opts"
    bad.write_text("MinStep = -1\nRelTol = 0\n", encoding="utf-8")
    assert cli("check", str(bad)) == EXIT_INVALID
    assert capsys.readouterr().err.count("option error:") == 2


def test_broken_environment_exits_with_2(cli, tmp_path, capsys):
    (tmp_path / ".env").write_text("EXPOKIT_LOG=bogus=null\n", encoding="utf-8")
    assert cli("info") == EXIT_INVALID
    assert "EXPOKIT_LOG" in capsys.readouterr().err


def test_invalid_option_exits_with_2(cli, capsys):
    assert cli("run", "semi1", "--param", "N=10", "--opt", "MinStep=-1") == EXIT_INVALID
    assert "option error: MinStep" in capsys.readouterr().err


@pytest.mark.parametrize(
    "argv",
    [
        ("run", "brusselator"),
        ("run",),
        ("run", "semi1", "--param", "N=2"),
        ("run", "semi1", "--tspan", "0"),
        ("run", "semi1", "--options-file", "missing.opts"),
        ("info", "nosuch"),
    ],
)
def test_invalid_input_exits_with_2(cli, argv):
    assert cli(*argv) == EXIT_INVALID


# --- info ---
def test_info_lists_everything(cli, capsys):
    assert cli("info") == EXIT_OK
    out = capsys.readouterr().out
    assert "exprb" in out and "semi1" in out and "krogstad" in out


def test_info_for_integrator(cli, capsys):
    assert cli("info", "exprb") == EXIT_OK
    out = capsys.readouterr().out
    assert "RelTol" in out and "Order" in out
    assert cli("info", "exprb", "Order") == EXIT_OK
    assert "embedded" in capsys.readouterr().out


# --- convergence ---
def test_convergence_writes_table_and_plot_data(cli, tmp_path, capsys):
    out = tmp_path / "conv.csv"
    code = cli("convergence", "semi1", "--param", "N=10", "--methods", "exprb43,krogstad",
               "--h", "1/10,1/20", "--workers", "2", "--out", str(out))
    assert code == EXIT_OK
    with open(out, encoding="utf-8") as f:
        rows = list(csv.reader(f))
    assert rows[0] == ["integrator", "h_or_tol", "error", "steps", "rhs_evals", "matfun_evals"]
    assert [r[0] for r in rows[1:]] == ["exprb43", "exprb43", "krogstad", "krogstad"]
    assert out.with_suffix(".dat").exists()
    assert "exprb43: order" in capsys.readouterr().out
