"""
expokit - 강성 ODE 를 위한 지수 적분기 src 패키지
"""

from .config_manager import ConfigManager
from .convergence import ConvergenceResult, ConvergenceStudy, Method
from .dense_output import dense_eval, refine_output
from .driver import integrate
from .errors import (
    CallbackError,
    CapabilityError,
    ConfigError,
    DenseOutputError,
    ExpokitError,
    HistoryError,
    JacobianUnavailableError,
    MatrixFunctionError,
    OptionError,
    ProblemError,
    SchemeError,
    StepReductionRequest,
    StepSizeUnderflowError,
)
from .krylov import KrylovEvaluator
from .matfun import DirectEvaluator, JobTable, MatrixFunctionEvaluator
from .options import OptionsSet, info, make_options, set_option, validate
from .phi import PhiTerm, gamma_coefficients, phi, phi_combo
from .problem import OdeProblem, Solution, StatsCounters, eval_jacobian, eval_jacobian_v, eval_rhs
from .problems import ProblemSetup, heat1d, minimal_example, semi1
from .schemes import RkScheme, rk_scheme_build
from .step_control import StepController

__all__ = [
    # 적분
    "integrate",
    "dense_eval",
    "refine_output",
    # 문제
    "OdeProblem",
    "Solution",
    "StatsCounters",
    "eval_rhs",
    "eval_jacobian",
    "eval_jacobian_v",
    # 옵션
    "OptionsSet",
    "make_options",
    "set_option",
    "validate",
    "info",
    # 행렬함수
    "PhiTerm",
    "phi",
    "phi_combo",
    "gamma_coefficients",
    "JobTable",
    "MatrixFunctionEvaluator",
    "DirectEvaluator",
    "KrylovEvaluator",
    # 스킴 / 스텝 제어
    "RkScheme",
    "rk_scheme_build",
    "StepController",
    # 내장 문제
    "ProblemSetup",
    "heat1d",
    "semi1",
    "minimal_example",
    # 수렴 실험
    "ConvergenceStudy",
    "ConvergenceResult",
    "Method",
    # 설정
    "ConfigManager",
    # 예외
    "ExpokitError",
    "OptionError",
    "ConfigError",
    "ProblemError",
    "SchemeError",
    "JacobianUnavailableError",
    "CallbackError",
    "CapabilityError",
    "MatrixFunctionError",
    "StepReductionRequest",
    "StepSizeUnderflowError",
    "HistoryError",
    "DenseOutputError",
]
