#!/usr/bin/env python3
"""
expokit - 강성 ODE 를 위한 지수 적분기
명령줄 진입점
"""

import sys

from src.cli import EXIT_INTERRUPTED, EXIT_FAILED, run_cli


def main():
    """메인 함수 - CLI 플로우"""
    try:
        sys.exit(run_cli(sys.argv[1:]))

    except KeyboardInterrupt:
        print("\n사용자에 의해 중단되었습니다.", file=sys.stderr)
        sys.exit(EXIT_INTERRUPTED)
    except Exception as e:
        print(f"오류 발생: {e}", file=sys.stderr)
        sys.exit(EXIT_FAILED)


if __name__ == "__main__":
    main()
