"""
설정 중앙 관리 모듈
- .env 로드 (EXPOKIT_LOG, EXPOKIT_OPTIONS)
- 옵션 파일 읽기/기록 ("이름 = 값" 형식)
- 옵션 파일 검증
"""

import os
import re
from pathlib import Path
from typing import Any, Optional, Union

import numpy as np
from dotenv import load_dotenv

from .errors import ConfigError, OptionError
from .options import OptionsSet, set_option, validate
from .run_log import parse_routing

_NUMBER = re.compile(r"^[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?$")
_BOOLEANS = {"on", "off", "yes", "no", "true", "false"}


class ConfigManager:
    """환경변수와 옵션 파일 관리 클래스"""

    ENV_PATH = Path(".env")

    # 환경변수 스키마 정의
    SCHEMA = {
        "EXPOKIT_LOG": {"required": False, "type": "routing", "default": ""},
        "EXPOKIT_OPTIONS": {"required": False, "type": "path", "default": ""},
    }

    def __init__(self, env_path: Optional[Path] = None):
        self.env_path = Path(env_path) if env_path is not None else self.ENV_PATH
        self.config = self.load_config()

    def load_config(self) -> dict[str, str]:
        """
        .env 와 환경변수에서 설정 로드
        파일이 없으면 기본값 사용
        """
        if self.env_path.exists():
            load_dotenv(self.env_path)
        return {key: os.getenv(key, schema.get("default", "")) for key, schema in self.SCHEMA.items()}

    def get(self, key: str, default: Optional[str] = None) -> str:
        """설정 값 가져오기"""
        return self.config.get(key) or default or self.SCHEMA.get(key, {}).get("default", "")

    def log_routing(self) -> dict[str, str]:
        """EXPOKIT_LOG → 채널별 대상"""
        return parse_routing(self.get("EXPOKIT_LOG"))

    def validate_config(self, config: dict[str, str]) -> list[str]:
        """
        환경 설정 유효성 검사
        Returns: 오류 메시지 목록 (빈 리스트면 유효)
        """
        errors = []
        for key, value in config.items():
            if key not in self.SCHEMA or not value:
                continue
            field_type = self.SCHEMA[key].get("type", "text")
            if field_type == "routing":
                try:
                    parse_routing(value)
                except ConfigError as e:
                    errors.append(f"{key}: {e}")
            if field_type == "path" and not Path(value).exists():
                errors.append(f"{key}: 파일이 없습니다 ({value})")
        return errors

    # --- 옵션 파일 ---
    @staticmethod
    def parse_value(text: str) -> Any:
        """
        옵션 값 문자열 변환
        [a, b, c] → 숫자 리스트, 숫자 → int/float, on/off 등 → 그대로 (옵션 검증이 해석), 나머지 → 문자열
        """
        text = text.strip()
        if len(text) >= 2 and text[0] == text[-1] and text[0] in "'\"":
            return text[1:-1]
        if text.startswith("[") and text.endswith("]"):
            inner = text[1:-1].replace(";", ",")
            items = [item for item in re.split(r"[,\s]+", inner) if item]
            return [ConfigManager.parse_value(item) for item in items]
        if text.lower() in _BOOLEANS:
            return text.lower()
        if _NUMBER.match(text):
            if re.match(r"^[+-]?\d+$", text):
                return int(text)
            return float(text)
        return text

    def read_options_file(self, path: Union[str, Path]) -> dict[str, Any]:
        """
        옵션 파일 로드

        Raises:
            ConfigError: 파일이 없거나 "이름 = 값" 형식이 아닌 줄
        """
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"옵션 파일이 없습니다: {path}")

        values: dict[str, Any] = {}
        with open(path, "r", encoding="utf-8") as f:
            for lineno, line in enumerate(f, start=1):
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}:{lineno}: 'Name = value' 형식이 아닙니다")
                key, value = line.split("=", 1)
                key = key.strip()
                if not key:
                    raise ConfigError(f"{path}:{lineno}: 옵션 이름이 비어 있습니다")
                values[key] = self.parse_value(value)
        return values

    @staticmethod
    def apply(opts: OptionsSet, values: dict[str, Any]) -> OptionsSet:
        """값들을 OptionsSet 에 적용 (Integrator 를 먼저 적용). 오류는 모아서 OptionError"""
        errors = []
        ordered = sorted(values.items(), key=lambda item: item[0].lower() != "integrator")
        for name, value in ordered:
            try:
                opts = set_option(opts, name, value)
            except OptionError as e:
                errors.extend(e.messages)
        if errors:
            raise OptionError(errors)
        return opts

    def validate_file(self, path: Union[str, Path], integrator: str = "exprb") -> list[str]:
        """
        옵션 파일 검증
        Returns: 오류 메시지 목록 (빈 리스트면 유효)
        """
        try:
            values = self.read_options_file(path)
            validate(self.apply(OptionsSet(integrator), values))
        except OptionError as e:
            return e.messages
        except ConfigError as e:
            return [str(e)]
        return []

    def write_options_file(self, path: Union[str, Path], opts: OptionsSet) -> Path:
        """
        적용된 옵션을 "이름 = 값" 파일로 기록 (read_options_file 로 다시 읽을 수 있는 형식)
        함수/객체 값은 파일로 옮길 수 없어 주석으로만 남긴다
        """
        path = Path(path)
        lines = [f"# expokit options ({opts.integrator})", f"Integrator = {opts.integrator}"]
        for name, value in opts.values.items():
            text = self.format_value(value)
            lines.append(f"{name} = {text}" if text is not None else f"# {name}: not representable in a file")
        try:
            path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        except OSError as e:
            raise ConfigError(f"옵션 파일 저장 실패: {e}") from e
        return path

    @staticmethod
    def format_value(value: Any) -> Optional[str]:
        """parse_value 의 역. 표현할 수 없는 값은 None"""
        if isinstance(value, str):
            return f'"{value}"'
        if isinstance(value, (bool, np.bool_)):
            return "on" if value else "off"
        if isinstance(value, (int, float, np.integer, np.floating)):
            return repr(value.item() if isinstance(value, np.generic) else value)
        if isinstance(value, (list, tuple, np.ndarray)):
            items = [ConfigManager.format_value(x) for x in np.asarray(value).ravel().tolist()]
            if any(item is None or item.startswith('"') for item in items):
                return None
            return "[" + ", ".join(items) + "]"
        return None
