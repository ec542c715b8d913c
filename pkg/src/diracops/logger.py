"""
ロギング基盤モジュール

数値検証の進捗と判定結果を JSON Lines 形式で記録し、
richによる人間可読な出力をstderrに表示します。
"""

import json
import sys
from datetime import datetime
from enum import Enum
from pathlib import Path
from typing import Any, Optional

from rich.console import Console


class LogLevel(str, Enum):
    """ログレベル"""

    DEBUG = "DEBUG"
    INFO = "INFO"
    WARNING = "WARNING"
    ERROR = "ERROR"


_LEVEL_STYLES = {
    LogLevel.DEBUG: "dim",
    LogLevel.INFO: None,
    LogLevel.WARNING: "yellow",
    LogLevel.ERROR: "red",
}


class Logger:
    """ロガークラス

    コマンド（table1, beam など）単位でログファイルを分け、
    検証レポートの判定もそのまま1行として書き出します。

    Attributes:
        log_dir: ログディレクトリのパス
        command: 実行中のコマンド名
        json_mode: JSON出力モード（機械可読）

    Examples:
        >>> logger = Logger(Path(".logs"), command="table1")
        >>> logger.info("Sampling momenta", samples=50)
        >>> logger.report(report)
    """

    def __init__(
        self,
        log_dir: Path,
        command: Optional[str] = None,
        json_mode: bool = False,
    ):
        self.log_dir = log_dir
        self.command = command
        self.json_mode = json_mode

        self.log_dir.mkdir(parents=True, exist_ok=True)

        if command:
            self.log_file = log_dir / f"{command}.jsonl"
        else:
            self.log_file = log_dir / "diracops.jsonl"

        # JSON モードでは装飾なし、通常モードでは Rich で stderr に出力
        self.console = Console(stderr=True, force_terminal=False if json_mode else None)

    def _entry(self, level: LogLevel, message: str, extra: Optional[dict] = None) -> dict:
        entry: dict[str, Any] = {
            "timestamp": datetime.now().astimezone().isoformat(),
            "level": level.value,
            "message": message,
        }
        if self.command:
            entry["command"] = self.command
        if extra:
            entry.update(extra)
        return entry

    def _write_log_file(self, entry: dict) -> None:
        with open(self.log_file, "a", encoding="utf-8") as f:
            f.write(json.dumps(entry, ensure_ascii=False, default=str) + "\n")

    def _output_console(self, level: LogLevel, message: str, entry: dict) -> None:
        if self.json_mode:
            # 機械可読出力は stdout の結果と混ざらないよう stderr へ
            print(json.dumps(entry, ensure_ascii=False, default=str), file=sys.stderr)
            return

        timestamp = datetime.now().strftime("%H:%M:%S")
        line = f"[{timestamp}] {level.value:<8} {message}"
        style = _LEVEL_STYLES[level]
        if style:
            self.console.print(f"[{style}]{line}[/{style}]")
        else:
            self.console.print(line)

    def log(self, level: LogLevel, message: str, **extra) -> None:
        """指定レベルでログを出力

        Args:
            level: ログレベル
            message: ログメッセージ
            **extra: 追加情報（JSON Lines のフィールドとして記録）
        """
        entry = self._entry(level, message, extra)
        self._write_log_file(entry)
        self._output_console(level, message, entry)

    def debug(self, message: str, **extra) -> None:
        self.log(LogLevel.DEBUG, message, **extra)

    def info(self, message: str, **extra) -> None:
        self.log(LogLevel.INFO, message, **extra)

    def warning(self, message: str, **extra) -> None:
        self.log(LogLevel.WARNING, message, **extra)

    def error(self, message: str, **extra) -> None:
        self.log(LogLevel.ERROR, message, **extra)

    def report(self, report: Any) -> None:
        """検証レポート1件を判定結果つきで記録

        合格ならINFO、不合格ならWARNINGとして出力します。

        Args:
            report: model_dump(by_alias=True) を持つレポートモデル
        """
        payload = report.model_dump(by_alias=True, mode="json")
        passed = bool(payload.get("pass", False))
        level = LogLevel.INFO if passed else LogLevel.WARNING
        verdict = "pass" if passed else "FAIL"
        message = f"{payload['identity']}: {verdict} (max_deviation={payload['max_deviation']:.3e})"
        self.log(level, message, report=payload)

    def get_log_file(self) -> Path:
        """ログファイルのパスを取得"""
        return self.log_file
