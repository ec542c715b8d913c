"""
検証レポートのテスト
"""

import csv
import io
import json
import pytest

from diracops.reports import (
    ExpansionReport,
    ObservableSummary,
    OperatorReport,
    all_passed,
    format_float,
    reports_to_csv,
    reports_to_json,
    rows_to_csv,
    summaries_to_csv,
    write_outputs,
)


class TestOperatorReport:
    """OperatorReportのテスト"""

    def test_from_deviations(self):
        report = OperatorReport.from_deviations("sum_rule.projected", [1e-14, 3e-13], 1e-12)

        assert report.max_deviation == 3e-13
        assert report.samples == 2
        assert report.passed is True
        assert report.skipped is False

    def test_from_deviations_failure(self):
        report = OperatorReport.from_deviations("conservation.Sp", [1e-9, 0.2], 1e-8)
        assert report.passed is False

    def test_pass_alias(self):
        """JSON では pass キーで出力される"""
        payload = OperatorReport.from_deviations("x", [0.0], 1.0).model_dump(by_alias=True)

        assert payload["pass"] is True
        assert "passed" not in payload

    def test_skip(self):
        report = OperatorReport.skip("table1.rt.standard", "rest-frame construction")

        assert report.skipped is True
        assert report.passed is True
        assert report.samples == 0
        assert report.note == "rest-frame construction"

    def test_expansion_report_is_operator_report(self):
        report = ExpansionReport(
            identity="pauli.r_squared_order",
            tolerance=1.8,
            max_deviation=1e-4,
            samples=3,
            passed=True,
            ratios=[0.1, 0.05, 0.025],
            residuals=[1.6e-3, 4e-4, 1e-4],
            observed_order=2.0,
            min_order=1.8,
        )

        payload = json.loads(reports_to_json([report]))[0]
        assert payload["observed_order"] == 2.0
        assert payload["pass"] is True


class TestSerialization:
    """JSON / CSV 出力のテスト"""

    def test_format_float_round_trip(self):
        value = 0.1 + 0.2
        assert float(format_float(value)) == value

    def test_reports_to_csv(self):
        reports = [
            OperatorReport.from_deviations("a", [1e-13], 1e-12),
            OperatorReport.skip("b", "reason"),
        ]

        rows = list(csv.reader(io.StringIO(reports_to_csv(reports))))

        assert rows[0] == ["identity", "tolerance", "max_deviation", "samples", "pass", "skipped"]
        assert rows[1][0] == "a"
        assert float(rows[1][2]) == 1e-13
        assert rows[1][4] == "true"
        assert rows[2][5] == "true"

    def test_summaries_to_csv(self):
        summary = ObservableSummary(family="canonical", Sz=0.4375, Lz=1.0625, Jz=1.5, Delta=0.125, n_phi=256)

        rows = list(csv.reader(io.StringIO(summaries_to_csv([summary]))))

        assert rows[0] == ["family", "Sz", "Lz", "Jz", "Delta", "n_phi"]
        assert rows[1] == ["canonical", "0.4375", "1.0625", "1.5", "0.125", "256"]

    def test_rows_to_csv_formats_floats(self):
        text = rows_to_csv(["state", "moment"], [["up", 1 / 3]])
        assert text.splitlines()[1] == f"up,{format(1 / 3, '.17g')}"

    def test_write_outputs(self, tmp_path):
        paths = write_outputs(tmp_path / "out", "beam", "a,b\n", "[]")

        assert [p.name for p in paths] == ["beam.csv", "beam.json"]
        assert (tmp_path / "out" / "beam.json").read_text() == "[]\n"

    def test_all_passed(self):
        ok = OperatorReport.from_deviations("a", [0.0], 1.0)
        bad = OperatorReport.from_deviations("b", [2.0], 1.0)

        assert all_passed([ok])
        assert not all_passed([ok, bad])
