"""
적분 드라이버 모듈
- RunContext: 실행 하나의 상태 (옵션, 콜백 묶음, 평가기, 로그, 결과 버퍼)
- integrate: 옵션 검증 → 평가기 init/register_jobs → 스텝 루프 → Solution
"""

import math
import sys
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

import numpy as np
from tqdm import tqdm

from .dense_output import GENERATORS, DenseGenerator, dense_eval, refine_output
from .errors import OptionError, ProblemError, StepSizeUnderflowError
from .exp4 import Exp4
from .expms import ExpMs, ExpMsSemi
from .exprb import ExpRb
from .exprk import ExpRk
from .integrator import Integrator, IntegratorSetup
from .matfun import MatrixFunctionEvaluator, resolve_evaluator
from .options import NormalizedOptions, OptionsSet, validate
from .problem import LinearPart, OdeProblem, ProblemFunctions, Solution, StatsCounters
from .run_log import RunLog
from .step_control import StepController, initial_step

INTEGRATORS: dict[str, type[Integrator]] = {
    "exprb": ExpRb,
    "exprk": ExpRk,
    "expmssemi": ExpMsSemi,
    "expms": ExpMs,
    "exp4": Exp4,
}

_EPS = np.finfo(float).eps


@dataclass
class RunContext:
    """실행 하나의 내부 상태. ClearInternalData 가 off 이면 Solution.context 로 남는다."""
    integrator_name: str
    problem: OdeProblem
    options: NormalizedOptions
    stats: StatsCounters
    functions: ProblemFunctions
    linear: LinearPart
    evaluator: Any
    log: RunLog
    integrator: Optional[Integrator] = None
    setup: Optional[IntegratorSetup] = None
    controller: Optional[StepController] = None
    dense_generator: Optional[DenseGenerator] = None
    h_min: float = 0.0
    landing: bool = False
    tdata: list[float] = field(default_factory=list)
    ydata: list[np.ndarray] = field(default_factory=list)
    records: list = field(default_factory=list)

    @property
    def t0(self) -> float:
        return self.problem.t0

    @property
    def t_end(self) -> float:
        return self.problem.t_end

    @property
    def duration(self) -> float:
        return self.problem.duration

    @property
    def t_dir(self) -> int:
        return self.problem.t_dir


def _option_callable(options: NormalizedOptions, name: str, from_problem: Any) -> Any:
    """function_handle 이면 그 값, on 이면 문제의 콜백, off 이면 None"""
    if name not in options:
        return None
    category = options.category(name)
    if category in ("function_handle", "numeric"):
        return options[name]
    if category == "boolean" and options[name] == 1:
        return from_problem
    return None


def build_functions(problem: OdeProblem, options: NormalizedOptions, stats: StatsCounters,
                    log: RunLog) -> ProblemFunctions:
    """옵션으로 실제 사용할 콜백 결정"""
    g_fcn = _option_callable(options, "GFcn", problem.g_fcn)
    non_autonomous = options.is_on("NonAutonomous")

    if options.family == "semilinear":
        lin_op = _option_callable(options, "LinOp", problem.lin_op)
        lin_op_v = _option_callable(options, "LinOpV", problem.lin_op_v)
        if lin_op is None and lin_op_v is None and options.is_on("LinOp"):
            lin_op_v = problem.lin_op_v
        return ProblemFunctions(problem, stats, lin_op=lin_op, lin_op_v=lin_op_v, g_fcn=g_fcn,
                                non_autonomous=non_autonomous)

    jacobian = _option_callable(options, "Jacobian", problem.jacobian)
    jacobian_v = _option_callable(options, "JacobianV", problem.jacobian_v)
    jacobian_on = options.is_on("Jacobian")
    if jacobian is None and jacobian_v is None and jacobian_on:
        jacobian_v = problem.jacobian_v
    semilin = options.is_on("Semilin")
    fd_fallback = jacobian_on and jacobian is None and jacobian_v is None and not semilin
    if fd_fallback:
        log.warning.warning("no Jacobian available, using finite differences")
    return ProblemFunctions(
        problem, stats,
        jacobian=jacobian,
        jacobian_v=jacobian_v,
        lin_op=problem.lin_op if semilin else None,
        lin_op_v=problem.lin_op_v if semilin else None,
        g_fcn=g_fcn,
        g_jacobian=_option_callable(options, "GJacobian", problem.g_jacobian),
        g_jacobian_v=_option_callable(options, "GJacobianV", problem.g_jacobian_v),
        semilin=semilin,
        fd_fallback=fd_fallback,
        non_autonomous=non_autonomous,
    )


def _abs_tol(options: NormalizedOptions, n: int):
    abs_tol = options["AbsTol"]
    if isinstance(abs_tol, np.ndarray) and abs_tol.size != 1:
        if abs_tol.size != n:
            raise OptionError(f"AbsTol: vector of length {abs_tol.size} for a problem of dimension {n}")
        return abs_tol
    return float(np.ravel(abs_tol)[0])


def build_controller(ctx: RunContext, f0: np.ndarray) -> StepController:
    opts = ctx.options
    duration = ctx.duration
    abs_tol = _abs_tol(opts, ctx.problem.dim)

    h_min = 16 * _EPS * duration
    h_max = duration
    if "MinStep" in opts and opts.category("MinStep") == "numeric":
        h_min = opts["MinStep"]
    if "MaxStep" in opts and opts.category("MaxStep") == "numeric":
        h_max = opts["MaxStep"]
    if h_min > h_max:
        raise OptionError(f"MinStep ({h_min}) is larger than MaxStep ({h_max})")

    if opts.category("InitialStep") == "numeric":
        h0 = opts["InitialStep"]
    elif opts.constant_step and "hConstant" not in opts:
        h0 = duration / 100
    else:
        h0 = initial_step(duration, abs_tol, f0, ctx.setup.order)

    if ctx.setup.multi_step > 1:
        # 다단계법은 구간을 같은 간격으로 나눈다
        h0 = duration / math.ceil(duration / h0 - 1e-9)

    return StepController(
        rel_tol=opts["RelTol"],
        abs_tol=abs_tol,
        norm_control=opts.is_on("NormControl"),
        h_min=h_min,
        h_max=h_max,
        h_initial=h0,
        h_constant=opts.constant_step,
        error_order=ctx.setup.error_order,
    )


def _dense_generator(ctx: RunContext) -> Optional[DenseGenerator]:
    opts = ctx.options
    category = opts.category("DOGenerator")
    value = opts["DOGenerator"]
    if category == "function_handle":
        return value() if isinstance(value, type) else value
    if value == 0:
        return None
    return GENERATORS[ctx.setup.dense_output_generator or "hermite"]()


def _output_selection(options: NormalizedOptions) -> Optional[np.ndarray]:
    if options.category("OutputSel") == "list":
        return None
    return np.atleast_1d(options["OutputSel"]) - 1


def prepare(problem: OdeProblem, options: NormalizedOptions,
            evaluator: Optional[MatrixFunctionEvaluator] = None, run_id: Optional[str] = None) -> RunContext:
    """RunContext 생성: 콜백 결정, 평가기 init, 적분기 setup, 작업표 등록"""
    if np.iscomplexobj(problem.y0) and not options.is_on("Complex"):
        raise ProblemError("complex initial value needs the option Complex = on")

    stats = StatsCounters()
    log = RunLog.from_options(options, run_id)
    functions = build_functions(problem, options, stats, log)
    linear = functions.linear_part(options.family == "semilinear")
    evaluator = evaluator or resolve_evaluator(options)

    caps = evaluator.init(linear, options, stats)
    ctx = RunContext(options.integrator, problem, options, stats, functions, linear, evaluator, log)
    ctx.h_min = 16 * _EPS * problem.duration
    ctx.integrator = INTEGRATORS[options.integrator](ctx)
    ctx.setup = ctx.integrator.setup()
    evaluator.register_jobs(ctx.integrator.initial_table())

    description = getattr(caps, "description", None) or evaluator.description()
    log.status.info("Matrix functions evaluated %s.", description)
    log.verbose.info("integrator %s: order %d, error order %d, %d step(s)",
                     ctx.setup.name, ctx.setup.order, ctx.setup.error_order, ctx.setup.multi_step)
    return ctx


def _step_length(h: float, dist: float, ctrl: StepController) -> float:
    """목표까지 dist 남았을 때 이번 스텝 크기 (마지막 스텝이 MinStep 보다 짧아지지 않게)"""
    if h >= dist * (1 - 1e-9):
        return dist
    if dist - h < ctrl.h_min and not ctrl.h_constant:
        return dist if dist <= ctrl.h_max else dist / 2
    return h


def run(ctx: RunContext) -> Solution:
    """스텝 루프"""
    problem = ctx.problem
    opts = ctx.options
    integ = ctx.integrator
    log = ctx.log
    t_dir = ctx.t_dir

    t = problem.t0
    y = np.array(problem.y0)
    integ.start(t, y)
    f0, _ = integ.get_old_f(0)

    ctrl = build_controller(ctx, f0)
    ctx.controller = ctrl
    ctx.h_min = ctrl.h_min
    ctx.dense_generator = generator = _dense_generator(ctx)

    output_times = problem.output_times
    if output_times is not None and generator is None and ctx.setup.multi_step > 1:
        raise ProblemError(f"{ctx.integrator_name} needs DOGenerator for output_times")
    landing = output_times is not None and generator is None
    ctx.landing = landing
    next_out = 1

    output_fcn: Optional[Callable] = opts["OutputFcn"] if opts.category("OutputFcn") == "function_handle" else None
    selection = _output_selection(opts)

    ctx.tdata = [t]
    ctx.ydata = [y]
    ctx.records = []
    h = ctrl.h_initial
    nominal = h
    reuse = False

    with tqdm(total=ctx.duration, disable=not opts.is_on("Waitbar"), file=sys.stderr,
              unit="t", leave=False) as bar:
        while t_dir * (problem.t_end - t) > 0:
            target = output_times[next_out] if landing else problem.t_end
            dist = abs(target - t)
            h_try = _step_length(h, dist, ctrl)

            result = integ.step(t, y, t_dir * h_try, reuse)
            h_used = abs(result.h_out)
            err = 0.0 if result.error is None else ctrl.error_norm(result.error, y, result.y_new)
            accept, h_next = ctrl.propose_step(h_used, err)

            if not accept:
                ctx.stats.n_rejected += 1
                log.step.info("t=%.6e: rejected h=%.3e err=%.3e", t, h_used, err)
                if h_used <= ctrl.h_min * (1 + 1e-12):
                    raise StepSizeUnderflowError(t, h_next * ctrl.shrink, ctrl.h_min)
                h = h_next
                reuse = True
                continue

            t_new = target if h_used == dist else t + t_dir * h_used
            y_new = result.y_new
            f_old, _ = integ.get_old_f(0)
            integ.accept(t_new, y_new)
            ctx.stats.n_steps += 1
            log.step.info("t=%.6e: accepted h=%.3e err=%.3e", t, h_used, err)

            if generator is not None:
                f_new, _ = integ.get_old_f(0)
                ctx.records.append(generator.build(t, t_new, y, y_new, f_old, f_new, result.stages))

            if not landing or t_new == target:
                ctx.tdata.append(t_new)
                ctx.ydata.append(y_new)
                if landing:
                    next_out += 1
            if output_fcn is not None:
                output_fcn(t_new, y_new if selection is None else y_new[selection])

            bar.update(h_used)
            t, y = t_new, y_new
            reuse = False
            h = nominal if ctrl.h_constant else h_next

    return _assemble(ctx)


def _assemble(ctx: RunContext) -> Solution:
    opts = ctx.options
    problem = ctx.problem
    sol = Solution(
        t=np.array(ctx.tdata),
        y=np.array(ctx.ydata),
        stats=ctx.stats,
        dense_payload=ctx.records or None,
        t_dir=ctx.t_dir,
    )

    refine = int(opts["Refine"])
    if problem.output_times is not None:
        if not ctx.landing:
            y, _ = dense_eval(sol, problem.output_times)
            y[0] = problem.y0
            sol.t = np.array(problem.output_times)
            sol.y = y
        if refine > 1:
            ctx.log.warning.warning("Refine is ignored when output times are given")
    elif refine > 1:
        sol = refine_output(sol, refine)

    log = ctx.log
    if opts.is_on("Stats"):
        for line in ctx.stats.report().splitlines():
            log.statistics.info(line)
    if opts.is_on("MatrixFunctionStats"):
        for line in ctx.evaluator.statistics().splitlines():
            log.matfun.info(line)
    if opts.get("JacobianStats") or opts.get("LinOpStats"):
        log.jac.info("%d jacobian evaluations, %d linear operator evaluations",
                     ctx.stats.n_jac_evals, ctx.stats.n_linop_evals)

    if not opts.is_on("ClearInternalData"):
        sol.context = ctx
    return sol


def integrate(problem: OdeProblem, options: Optional[OptionsSet] = None,
              evaluator: Optional[MatrixFunctionEvaluator] = None, run_id: Optional[str] = None) -> Solution:
    """
    문제를 적분한다.

    Args:
        problem: 풀 문제
        options: 옵션 (기본 exprb)
        evaluator: MatrixFunctions 옵션 대신 쓸 평가기 인스턴스
        run_id: 로그 접두어 (기본 무작위)

    Returns:
        Solution

    Raises:
        OptionError: 옵션 검증 실패
        StepSizeUnderflowError: MinStep 보다 작은 스텝이 필요
        CallbackError: 사용자 콜백 실패
    """
    normalized = validate(options if options is not None else OptionsSet())
    ctx = prepare(problem, normalized, evaluator, run_id)
    try:
        return run(ctx)
    except Exception as e:
        ctx.log.error.error("integration failed: %s", e)
        raise
    finally:
        ctx.evaluator.cleanup()
