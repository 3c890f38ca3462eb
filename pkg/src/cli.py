"""
명령줄 인터페이스
- run: 내장 문제 적분 후 CSV 출력
- info: 적분기 / 옵션 도움말
- convergence: 수렴 차수 실험
- check: 옵션 파일 검증

종료 코드: 0 성공, 1 사용자 중단, 2 옵션/문제/설정 오류, 3 적분 실패
"""

import argparse
import dataclasses
import sys
from pathlib import Path
from typing import Any, Optional, Sequence, TextIO

import numpy as np

from .config_manager import ConfigManager
from .convergence import ALL_METHODS, DEFAULT_STEP_SIZES, ConvergenceStudy, find_methods
from .driver import integrate
from .errors import ConfigError, ExpokitError, OptionError, ProblemError, SchemeError
from .options import INTEGRATOR_NAMES, OptionsSet, info
from .problem import OdeProblem, Solution
from .problems import PROBLEMS, ProblemSetup, make_problem
from .run_log import configure_routing

EXIT_OK = 0
EXIT_INTERRUPTED = 1
EXIT_INVALID = 2
EXIT_FAILED = 3


def parse_pairs(items: Optional[Sequence[str]], what: str) -> dict[str, Any]:
    """
    "k=v[,k=v]" 목록 → dict (값은 옵션 파일과 같은 규칙으로 변환)

    Raises:
        ConfigError: '=' 가 없는 항목
    """
    pairs: dict[str, Any] = {}
    for item in items or []:
        for part in _split_top_level(item):
            if "=" not in part:
                raise ConfigError(f"{what}: expected name=value, got '{part}'")
            key, value = part.split("=", 1)
            pairs[key.strip()] = ConfigManager.parse_value(value)
    return pairs


def _split_top_level(text: str) -> list[str]:
    """대괄호 안의 쉼표는 나누지 않는다 ([1e-6, 1e-8] 같은 벡터 값)"""
    parts, depth, current = [], 0, ""
    for ch in text:
        if ch == "[":
            depth += 1
        elif ch == "]":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append(current)
            current = ""
        else:
            current += ch
    parts.append(current)
    return [p.strip() for p in parts if p.strip()]


def parse_tspan(text: str) -> tuple[float, float, Optional[int]]:
    """'a,b[,n]' → (a, b, n)"""
    parts = [p.strip() for p in text.split(",")]
    try:
        if len(parts) == 2:
            return float(parts[0]), float(parts[1]), None
        if len(parts) == 3:
            n = int(parts[2])
            if n < 2:
                raise ValueError
            return float(parts[0]), float(parts[1]), n
    except ValueError:
        pass
    raise ProblemError(f"--tspan expects a,b or a,b,n (n >= 2), got '{text}'")


def parse_floats(text: str) -> list[float]:
    try:
        return [float(eval_fraction(p)) for p in text.split(",") if p.strip()]
    except ValueError as e:
        raise ConfigError(f"invalid number list '{text}'") from e


def eval_fraction(text: str) -> float:
    """'1/40' 형식도 허용"""
    text = text.strip()
    if "/" in text:
        num, den = text.split("/", 1)
        return float(num) / float(den)
    return float(text)


def with_tspan(problem: OdeProblem, tspan: tuple[float, float, Optional[int]]) -> OdeProblem:
    """적분 구간 교체. 정확해가 있으면 y0 = exact(a)"""
    a, b, n = tspan
    y0 = problem.exact(a) if problem.exact is not None else problem.y0
    output_times = np.linspace(a, b, n) if n else None
    return dataclasses.replace(problem, t0=a, t_end=b, y0=y0, output_times=output_times)


def build_options(setup: ProblemSetup, config: ConfigManager, options_file: Optional[str],
                  opt_items: Optional[Sequence[str]]) -> OptionsSet:
    """
    권장 옵션 ← 옵션 파일 (또는 EXPOKIT_OPTIONS) ← --opt 순서로 덮어쓰기

    파일과 --opt 값은 합친 뒤 한 번에 적용한다 (--opt 의 Integrator 가 파일의 전용 옵션보다 먼저 적용되도록).
    """
    path = options_file or config.get("EXPOKIT_OPTIONS")
    values = config.read_options_file(path) if path else {}
    values.update(parse_pairs(opt_items, "--opt"))
    return config.apply(setup.options, values)


def write_solution_csv(sol: Solution, out: TextIO, output_sel: Optional[np.ndarray] = None) -> None:
    """헤더 t,y1,...,yn, 유효숫자 17자리"""
    y = sol.select(output_sel)
    if np.iscomplexobj(y):
        y = np.real(y)
    columns = (output_sel + 1) if output_sel is not None else np.arange(1, y.shape[1] + 1)
    header = ",".join(["t"] + [f"y{i}" for i in columns])
    data = np.column_stack([sol.t, y])
    np.savetxt(out, data, delimiter=",", header=header, comments="", fmt="%.17g")


def read_solution_csv(path: str) -> tuple[np.ndarray, np.ndarray]:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return data[:, 0], data[:, 1:]


def _make_setup(args: argparse.Namespace) -> ProblemSetup:
    name = args.problem_flag or args.problem
    if not name:
        raise ProblemError("no problem given (use --problem NAME)")
    setup = make_problem(name, **parse_pairs(args.param, "--param"))
    if args.tspan:
        setup = dataclasses.replace(setup, problem=with_tspan(setup.problem, parse_tspan(args.tspan)))
    return setup


# --- 서브커맨드 ---
def cmd_run(args: argparse.Namespace, config: ConfigManager) -> int:
    setup = _make_setup(args)
    opts = build_options(setup, config, args.options_file, args.opt)
    if args.save_options:
        config.write_options_file(args.save_options, opts)
    sol = integrate(setup.problem, opts)

    output_sel = None
    sel = opts.values.get("OutputSel")
    if sel is not None and not isinstance(sel, str):
        output_sel = np.atleast_1d(np.asarray(sel, dtype=int)) - 1

    if args.out:
        with open(args.out, "w", encoding="utf-8") as f:
            write_solution_csv(sol, f, output_sel)
    else:
        write_solution_csv(sol, sys.stdout, output_sel)
    return EXIT_OK


def cmd_info(args: argparse.Namespace, config: ConfigManager) -> int:
    if not args.integrator:
        print("Integrators: " + ", ".join(INTEGRATOR_NAMES))
        print("Problems: " + ", ".join(PROBLEMS))
        print("Methods: " + ", ".join(m.label for m in ALL_METHODS))
        return EXIT_OK
    if args.integrator not in INTEGRATOR_NAMES:
        raise OptionError(f"unknown integrator '{args.integrator}'")
    print(info(args.integrator, args.option))
    return EXIT_OK


def cmd_convergence(args: argparse.Namespace, config: ConfigManager) -> int:
    setup = _make_setup(args)
    if args.options_file or args.opt:
        setup = dataclasses.replace(setup, options=build_options(setup, config, args.options_file, args.opt))
    if args.save_options:
        config.write_options_file(args.save_options, setup.options)
    methods = find_methods(args.methods.split(",")) if args.methods else None
    if args.tol:
        values, mode = parse_floats(args.tol), "tol"
    else:
        values, mode = (parse_floats(args.h) if args.h else list(DEFAULT_STEP_SIZES)), "h"

    study = ConvergenceStudy(setup, methods, max_workers=args.workers)
    result = study.run(values, mode)

    out = Path(args.out)
    result.write_csv(out)
    result.write_gnuplot(out.with_suffix(".dat"))
    print(result.summary())
    return EXIT_OK


def cmd_check(args: argparse.Namespace, config: ConfigManager) -> int:
    """옵션 파일 검증. 오류가 있으면 한 줄씩 출력하고 2"""
    errors = config.validate_file(args.path, args.integrator)
    for message in errors:
        print(f"option error: {message}", file=sys.stderr)
    if errors:
        return EXIT_INVALID
    print(f"{args.path}: ok")
    return EXIT_OK


COMMANDS = {"run": cmd_run, "info": cmd_info, "convergence": cmd_convergence, "check": cmd_check}


def _add_problem_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("problem", nargs="?", help="문제 이름 (" + ", ".join(PROBLEMS) + ")")
    parser.add_argument("--problem", dest="problem_flag", help="문제 이름")
    parser.add_argument("--param", action="append", metavar="K=V[,K=V]", help="문제 파라미터")
    parser.add_argument("--opt", action="append", metavar="NAME=VALUE", help="옵션 (반복 가능)")
    parser.add_argument("--options-file", help="'Name = value' 옵션 파일")
    parser.add_argument("--tspan", metavar="A,B[,N]", help="적분 구간과 출력 시각 수")
    parser.add_argument("--save-options", metavar="PATH", help="적용된 옵션을 옵션 파일로 기록")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="expokit", description="지수 적분기 실행기")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="문제 적분")
    _add_problem_args(run)
    run.add_argument("--out", help="CSV 출력 경로 (기본 표준출력)")

    info_p = sub.add_parser("info", help="옵션 도움말")
    info_p.add_argument("integrator", nargs="?", help="적분기 이름")
    info_p.add_argument("option", nargs="?", help="옵션 이름 ('-' 이면 전체 상세)")

    conv = sub.add_parser("convergence", help="수렴 차수 실험")
    _add_problem_args(conv)
    conv.add_argument("--methods", help="쉼표로 구분한 방법 또는 적분기 이름")
    group = conv.add_mutually_exclusive_group()
    group.add_argument("--h", help="스텝 크기 목록 (1/40 형식 허용)")
    group.add_argument("--tol", help="허용오차 목록 (적응 스텝)")
    conv.add_argument("--workers", type=int, default=4, help="병렬 워커 수")
    conv.add_argument("--out", default="convergence.csv", help="CSV 출력 경로 (.dat 도 함께 생성)")

    check = sub.add_parser("check", help="옵션 파일 검증")
    check.add_argument("path", help="'Name = value' 옵션 파일")
    check.add_argument("--integrator", default="exprb", help="기준 적분기 (파일의 Integrator 가 우선)")
    return parser


def run_cli(argv: Optional[Sequence[str]] = None, env_path: Optional[Path] = None) -> int:
    """
    CLI 실행

    Returns:
        종료 코드
    """
    args = build_parser().parse_args(argv)
    try:
        config = ConfigManager(env_path)
        problems = config.validate_config(config.config)
        if problems:
            raise ConfigError("; ".join(problems))
        configure_routing(config.log_routing())
        return COMMANDS[args.command](args, config)
    except OptionError as e:
        for message in e.messages:
            print(f"option error: {message}", file=sys.stderr)
        return EXIT_INVALID
    except (ProblemError, ConfigError, SchemeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID
    except ExpokitError as e:
        print(f"integration failed: {e}", file=sys.stderr)
        return EXIT_FAILED
