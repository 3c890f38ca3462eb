"""
실행 로그 채널 모듈
- 채널: verbose, status, statistics, jacLog, stepLog, matFunLog, warning, error
- EXPOKIT_LOG 라우팅 ("채널=stream|null|file:경로", '*' 는 전체)
- RunLog: 실행 id 접두어를 붙이는 채널별 LoggerAdapter 묶음
"""

import logging
import sys
import uuid
from typing import Mapping, Optional

from .errors import ConfigError

LOGGER_ROOT = "expokit"
CHANNELS = ("verbose", "status", "statistics", "jacLog", "stepLog", "matFunLog", "warning", "error")
_CHANNEL_LEVELS = {"warning": logging.WARNING, "error": logging.ERROR}
_FORMAT = "%(message)s"


def channel_logger(channel: str) -> logging.Logger:
    if channel not in CHANNELS:
        raise ConfigError(f"unknown log channel '{channel}'")
    return logging.getLogger(f"{LOGGER_ROOT}.{channel}")


def parse_routing(text: Optional[str]) -> dict[str, str]:
    """
    EXPOKIT_LOG 문자열 파싱

    Returns:
        채널 → 대상 (stream / null / file:경로)

    Raises:
        ConfigError: 형식 오류
    """
    routing = {channel: "stream" for channel in CHANNELS}
    if not text or not text.strip():
        return routing
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        if "=" not in item:
            raise ConfigError(f"invalid log routing entry '{item}' (expected channel=target)")
        channel, target = (part.strip() for part in item.split("=", 1))
        if target not in ("stream", "null") and not (target.startswith("file:") and len(target) > 5):
            raise ConfigError(f"invalid log target '{target}' for channel '{channel}'")
        if channel == "*":
            routing = {c: target for c in CHANNELS}
        elif channel in CHANNELS:
            routing[channel] = target
        else:
            raise ConfigError(f"unknown log channel '{channel}'")
    return routing


def configure_routing(routing: Mapping[str, str], stream=None) -> None:
    """채널 로거에 핸들러를 붙인다. 다시 호출하면 이전 핸들러를 교체한다."""
    for channel in CHANNELS:
        logger = channel_logger(channel)
        for handler in list(logger.handlers):
            if getattr(handler, "_expokit", False):
                logger.removeHandler(handler)
                handler.close()

        target = routing.get(channel, "stream")
        if target == "null":
            handler: logging.Handler = logging.NullHandler()
        elif target.startswith("file:"):
            handler = logging.FileHandler(target[5:], encoding="utf-8")
        else:
            handler = logging.StreamHandler(stream or sys.stderr)
        handler.setFormatter(logging.Formatter(_FORMAT))
        handler._expokit = True
        logger.addHandler(handler)
        logger.setLevel(logging.INFO)
        logger.propagate = False


class _RunAdapter(logging.LoggerAdapter):
    """'[run id] ' 접두어, 꺼진 채널은 아무것도 내보내지 않는다"""

    def __init__(self, logger: logging.Logger, run_id: str, enabled: bool, level: int):
        super().__init__(logger, {"run_id": run_id})
        self.enabled = enabled
        self.channel_level = level

    def process(self, msg, kwargs):
        return f"[{self.extra['run_id']}] {msg}", kwargs

    def isEnabledFor(self, level: int) -> bool:
        return self.enabled and self.logger.isEnabledFor(level)

    def emit(self, msg: str, *args) -> None:
        """채널 기본 레벨로 기록"""
        self.log(self.channel_level, msg, *args)


class RunLog:
    """
    실행 하나의 채널 묶음

    Args:
        enabled: 채널 → 켜짐 여부 (없으면 status / warning / error 만 켜짐)
        run_id: 실행 id (기본 무작위 8자리)
    """

    ALWAYS_ON = ("status", "warning", "error")

    def __init__(self, enabled: Optional[Mapping[str, bool]] = None, run_id: Optional[str] = None):
        self.run_id = run_id or uuid.uuid4().hex[:8]
        flags = {channel: channel in self.ALWAYS_ON for channel in CHANNELS}
        flags.update(enabled or {})
        self.channels = {
            channel: _RunAdapter(channel_logger(channel), self.run_id, flags[channel],
                                 _CHANNEL_LEVELS.get(channel, logging.INFO))
            for channel in CHANNELS
        }

    @classmethod
    def from_options(cls, options: Mapping, run_id: Optional[str] = None) -> "RunLog":
        def on(name: str) -> bool:
            return bool(options.get(name, 0))

        stats = on("Stats")
        return cls({
            "verbose": stats,
            "statistics": stats,
            "stepLog": on("StepStats"),
            "jacLog": on("JacobianStats") or on("LinOpStats"),
            "matFunLog": on("MatrixFunctionStats"),
        }, run_id)

    def __getitem__(self, channel: str) -> _RunAdapter:
        return self.channels[channel]

    @property
    def verbose(self) -> _RunAdapter:
        return self.channels["verbose"]

    @property
    def status(self) -> _RunAdapter:
        return self.channels["status"]

    @property
    def statistics(self) -> _RunAdapter:
        return self.channels["statistics"]

    @property
    def jac(self) -> _RunAdapter:
        return self.channels["jacLog"]

    @property
    def step(self) -> _RunAdapter:
        return self.channels["stepLog"]

    @property
    def matfun(self) -> _RunAdapter:
        return self.channels["matFunLog"]

    @property
    def warning(self) -> _RunAdapter:
        return self.channels["warning"]

    @property
    def error(self) -> _RunAdapter:
        return self.channels["error"]
