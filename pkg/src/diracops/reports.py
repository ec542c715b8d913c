"""
検証レポートモジュール

恒等式の判定結果・展開次数の判定結果・ビーム観測量のまとめを
pydanticモデルとして保持し、JSON / CSV に書き出します。
"""

import csv
import io
import json
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Union

from pydantic import BaseModel, ConfigDict, Field


def format_float(value: float) -> str:
    """CSV用に17桁の有効数字で整形"""
    return format(float(value), ".17g")


# ===============================
# レポート スキーマ
# ===============================


class OperatorReport(BaseModel):
    """恒等式1件の判定結果

    JSON では passed を "pass" キーで出力します。
    """

    model_config = ConfigDict(populate_by_name=True)

    identity: str
    tolerance: float
    max_deviation: float
    samples: int
    passed: bool = Field(serialization_alias="pass")
    skipped: bool = False
    note: Optional[str] = None

    @classmethod
    def from_deviations(
        cls,
        identity: str,
        deviations: Sequence[float],
        tolerance: float,
        note: Optional[str] = None,
    ) -> "OperatorReport":
        """サンプルごとの偏差から判定を組み立てる"""
        worst = max(deviations) if deviations else 0.0
        return cls(
            identity=identity,
            tolerance=tolerance,
            max_deviation=worst,
            samples=len(deviations),
            passed=worst <= tolerance,
            note=note,
        )

    @classmethod
    def skip(cls, identity: str, reason: str) -> "OperatorReport":
        """実行しなかった恒等式（m=0 の NWFW など）"""
        return cls(
            identity=identity,
            tolerance=0.0,
            max_deviation=0.0,
            samples=0,
            passed=True,
            skipped=True,
            note=reason,
        )


class ExpansionReport(OperatorReport):
    """非相対論展開の収束次数の判定結果

    max_deviation は最小の p/m での残差、tolerance は要求する最小次数です。
    """

    ratios: List[float]
    residuals: List[float]
    observed_order: float
    min_order: float


class ObservableSummary(BaseModel):
    """ビーム上の期待値のまとめ（演算子ファミリーごと）"""

    family: str
    Sz: float
    Lz: float
    Jz: float
    Delta: float
    n_phi: int


Report = Union[OperatorReport, ExpansionReport]


# ===============================
# 書き出し
# ===============================


def reports_to_json(reports: Iterable[Report]) -> str:
    """レポート列をJSON配列に変換"""
    payload = [r.model_dump(by_alias=True, mode="json") for r in reports]
    return json.dumps(payload, indent=2, ensure_ascii=False)


def reports_to_csv(reports: Iterable[Report]) -> str:
    """レポート列をCSVに変換"""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["identity", "tolerance", "max_deviation", "samples", "pass", "skipped"])
    for r in reports:
        writer.writerow(
            [
                r.identity,
                format_float(r.tolerance),
                format_float(r.max_deviation),
                r.samples,
                str(r.passed).lower(),
                str(r.skipped).lower(),
            ]
        )
    return buffer.getvalue()


def summaries_to_csv(summaries: Iterable[ObservableSummary]) -> str:
    """観測量のまとめをCSVに変換"""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["family", "Sz", "Lz", "Jz", "Delta", "n_phi"])
    for s in summaries:
        writer.writerow(
            [
                s.family,
                format_float(s.Sz),
                format_float(s.Lz),
                format_float(s.Jz),
                format_float(s.Delta),
                s.n_phi,
            ]
        )
    return buffer.getvalue()


def summaries_to_json(summaries: Iterable[ObservableSummary]) -> str:
    payload = [s.model_dump(mode="json") for s in summaries]
    return json.dumps(payload, indent=2, ensure_ascii=False)


def rows_to_csv(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    """任意の表をCSVに変換（浮動小数点は17桁）"""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(list(header))
    for row in rows:
        writer.writerow([format_float(x) if isinstance(x, float) else x for x in row])
    return buffer.getvalue()


def rows_to_json(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    payload = [dict(zip(header, row)) for row in rows]
    return json.dumps(payload, indent=2, ensure_ascii=False)


def write_outputs(out_dir: Path, stem: str, csv_text: str, json_text: str) -> List[Path]:
    """CSV と JSON を out_dir/<stem>.{csv,json} に書き出す

    Returns:
        書き出したファイルのパス
    """
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / f"{stem}.csv"
    json_path = out_dir / f"{stem}.json"
    csv_path.write_text(csv_text, encoding="utf-8")
    json_path.write_text(json_text + "\n", encoding="utf-8")
    return [csv_path, json_path]


def all_passed(reports: Iterable[Report]) -> bool:
    return all(r.passed for r in reports)
