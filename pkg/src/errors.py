"""
예외 계층 모듈
- 모든 예외는 ExpokitError 에서 파생
- CLI 는 예외 종류로 종료 코드를 결정한다 (검증 오류 2, 적분 실패 3)
"""

from typing import Optional


class ExpokitError(Exception):
    """패키지 공통 기본 예외"""


class OptionError(ExpokitError, ValueError):
    """옵션 검증 실패. messages 에 모든 오류가 모인다."""

    def __init__(self, messages: list[str] | str):
        if isinstance(messages, str):
            messages = [messages]
        self.messages = list(messages)
        super().__init__("\n".join(self.messages))


class ConfigError(ExpokitError, ValueError):
    """옵션 파일 / 환경변수 형식 오류"""


class ProblemError(ExpokitError, ValueError):
    """문제 정의가 잘못된 경우 (dimension mismatch 등)"""


class JacobianUnavailableError(ExpokitError):
    """야코비안 콜백도 유한차분 대체도 없는 경우"""

    def __init__(self, detail: str = ""):
        message = "jacobian unavailable"
        if detail:
            message = f"{message}: {detail}"
        super().__init__(message)


class CallbackError(ExpokitError):
    """사용자 콜백 실패를 시각과 플래그 정보와 함께 감싼다"""

    def __init__(self, flag: str, t: float, cause: BaseException):
        self.flag = flag
        self.t = t
        super().__init__(f"callback '{flag}' 실패 (t={t!r}): {cause}")


class CapabilityError(ExpokitError):
    """행렬함수 평가기와 문제/적분기 능력이 맞지 않음"""


class MatrixFunctionError(ExpokitError):
    """행렬함수 평가기 프로토콜 위반 또는 계산 실패"""


class StepReductionRequest(ExpokitError):
    """평가기가 스텝 크기 축소를 요청 (Krylov 미수렴)"""

    def __init__(self, factor: float = 0.5, reason: str = ""):
        self.factor = factor
        super().__init__(reason or f"step reduction requested (factor {factor})")


class StepSizeUnderflowError(ExpokitError):
    """필요한 스텝이 MinStep 보다 작아짐"""

    def __init__(self, t: float, h: float, h_min: float):
        self.t = t
        self.h = h
        self.h_min = h_min
        super().__init__(
            f"step size underflow at t={t!r}: required h={h:.3e} < MinStep={h_min:.3e}"
        )


class HistoryError(ExpokitError, IndexError):
    """다단계법 이력 접근 오류"""


class DenseOutputError(ExpokitError):
    """조밀 출력 데이터가 없거나 질의 시각이 구간 밖"""

    def __init__(self, message: str, t: Optional[float] = None):
        self.t = t
        super().__init__(message)


class SchemeError(ExpokitError, ValueError):
    """지수 Runge-Kutta 계수표 편집 오류 (비명시적 항목, 너무 긴 행)"""
