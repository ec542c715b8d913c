"""
CLI コマンドのテスト
"""

import csv
import io
import json
import pytest
from pathlib import Path
import tempfile
import shutil
from typer.testing import CliRunner

from diracops.cli import app
from diracops.config import THREADS_ENV, RunConfig
from diracops.table1 import REST_FRAME_REASON

runner = CliRunner()


@pytest.fixture
def temp_dir(monkeypatch):
    """一時ディレクトリを作成"""
    monkeypatch.delenv(THREADS_ENV, raising=False)
    temp = tempfile.mkdtemp()
    yield Path(temp)
    shutil.rmtree(temp)


def invoke(temp_dir: Path, *args: str):
    return runner.invoke(
        app, [*args, "--out", str(temp_dir / "out"), "--log-dir", str(temp_dir / ".logs")]
    )


def read_log(temp_dir: Path, command: str) -> list:
    with open(temp_dir / ".logs" / f"{command}.jsonl", "r", encoding="utf-8") as f:
        return [json.loads(line) for line in f]


class TestVersion:
    """--version のテスト"""

    def test_version(self):
        result = runner.invoke(app, ["--version"])

        assert result.exit_code == 0
        assert "diracops version 0.1.0" in result.stdout


class TestTable1Command:
    """table1 コマンドのテスト"""

    def test_writes_outputs(self, temp_dir):
        result = invoke(temp_dir, "table1", "--samples", "3", "--seed", "1")

        assert result.exit_code == 0
        reports = json.loads((temp_dir / "out" / "table1.json").read_text())
        assert all(r["pass"] for r in reports)
        assert {"identity", "tolerance", "max_deviation", "samples", "pass", "skipped"} <= set(reports[0])
        assert (temp_dir / "out" / "table1.csv").read_text().startswith("identity,")

    def test_logs_reports(self, temp_dir):
        invoke(temp_dir, "table1", "--samples", "2")

        entries = read_log(temp_dir, "table1")
        assert entries[0]["message"] == "Starting identity suite"
        assert entries[-1]["message"] == "Identity suite finished"
        assert any("report" in e for e in entries)

    def test_massless_skips(self, temp_dir):
        result = invoke(temp_dir, "table1", "--samples", "2", "--mass", "0")

        assert result.exit_code == 0
        reports = {r["identity"]: r for r in json.loads((temp_dir / "out" / "table1.json").read_text())}
        assert reports["table1.St.standard"]["skipped"] is True
        assert reports["table1.St.standard"]["note"] == REST_FRAME_REASON

    def test_default_config_run(self, temp_dir):
        """既定設定（50サンプル、|p| ∈ [1e-2, 1e2]）で全恒等式が通る"""
        result = invoke(temp_dir, "table1")

        assert result.exit_code == 0
        reports = json.loads((temp_dir / "out" / "table1.json").read_text())
        assert all(r["pass"] for r in reports)
        by_identity = {r["identity"]: r for r in reports}
        assert by_identity["table1.R.projection"]["samples"] == 50
        saved = RunConfig.load(temp_dir / "out" / "table1_config.yaml")
        assert saved.sampling.samples == 50
        assert saved.sampling.p_range == (0.01, 100.0)

    def test_saves_effective_config(self, temp_dir):
        invoke(temp_dir, "table1", "--samples", "2", "--seed", "9", "--mass", "1.0")

        saved = RunConfig.load(temp_dir / "out" / "table1_config.yaml")
        assert saved.sampling.samples == 2
        assert saved.sampling.seed == 9
        assert saved.sampling.masses == [1.0]

    def test_tolerance_failure_exits_1(self, temp_dir):
        config = temp_dir / "strict.yaml"
        config.write_text("tolerances:\n  table1: 1.0e-300\n")

        result = invoke(temp_dir, "table1", "--samples", "2", "--config", str(config))

        assert result.exit_code == 1
        assert any(e["level"] == "WARNING" for e in read_log(temp_dir, "table1"))

    def test_missing_config_exits_2(self, temp_dir):
        result = invoke(temp_dir, "table1", "--config", str(temp_dir / "missing.yaml"))

        assert result.exit_code == 2
        assert read_log(temp_dir, "table1")[-1]["level"] == "ERROR"


class TestBeamCommand:
    """beam コマンドのテスト"""

    def _rows(self, temp_dir):
        return list(csv.DictReader(io.StringIO((temp_dir / "out" / "beam.csv").read_text())))

    def test_default_beam(self, temp_dir):
        result = invoke(temp_dir, "beam")

        assert result.exit_code == 0
        rows = self._rows(temp_dir)
        assert [r["family"] for r in rows] == ["canonical", "projected", "nwfw_standard", "nwfw_fw"]
        assert float(rows[0]["Sz"]) == pytest.approx(0.4375, abs=1e-9)
        assert float(rows[2]["Sz"]) == pytest.approx(0.5, abs=1e-9)
        assert all(float(r["Jz"]) == pytest.approx(1.5, abs=1e-9) for r in rows)

    def test_spin_down(self, temp_dir):
        result = invoke(temp_dir, "beam", "--spin-down")

        assert result.exit_code == 0
        assert float(self._rows(temp_dir)[0]["Sz"]) == pytest.approx(-0.4375, abs=1e-9)

    def test_beam_file(self, temp_dir):
        beam_file = temp_dir / "beam.json"
        beam_file.write_text(json.dumps({"energy": 3.0, "mass": 1.0, "theta0": 0.4, "ell": 2}))

        result = invoke(temp_dir, "beam", "--beam", str(beam_file))

        assert result.exit_code == 0
        assert float(self._rows(temp_dir)[0]["Jz"]) == pytest.approx(2.5, abs=1e-9)

    def test_beam_file_as_config_exits_2(self, temp_dir):
        """ビーム条件は --config ではなく --beam で渡す"""
        beam_file = temp_dir / "beam.json"
        beam_file.write_text(json.dumps({"energy": 3.0, "mass": 1.0, "theta0": 0.4, "ell": 2}))

        result = invoke(temp_dir, "beam", "--config", str(beam_file))

        assert result.exit_code == 2
        assert "Error loading config" in read_log(temp_dir, "beam")[-1]["message"]

    def test_invalid_theta0_exits_2(self, temp_dir):
        result = invoke(temp_dir, "beam", "--theta0", "2.0")

        assert result.exit_code == 2
        assert "theta0" in read_log(temp_dir, "beam")[-1]["message"]


class TestHallCommand:
    """hall コマンドのテスト"""

    def _rows(self, temp_dir):
        rows = json.loads((temp_dir / "out" / "hall.json").read_text())
        return {(r["centroid"], r["route"]): r for r in rows}

    def test_default(self, temp_dir):
        result = invoke(temp_dir, "hall", "--v", "0.1", "--ell", "1", "--spin-up")

        assert result.exit_code == 0
        rows = self._rows(temp_dir)
        assert set(rows) == {
            ("probability", "field"),
            ("energy", "field"),
            ("probability", "renormalized"),
            ("energy", "renormalized"),
            ("probability", "charge_density"),
        }
        assert all(r["reference_y"] == pytest.approx(0.0375) for k, r in rows.items() if k[0] == "probability")
        assert rows[("energy", "field")]["y"] == pytest.approx(0.075, rel=0.02)
        assert rows[("probability", "field")]["y"] == pytest.approx(0.05, rel=0.02)
        assert rows[("probability", "renormalized")]["y"] == pytest.approx(0.025, rel=0.02)
        assert all(r["relative_error"] <= 0.02 for r in rows.values())
        assert all(r["note"] for r in rows.values())

    def test_csv_header(self, temp_dir):
        invoke(temp_dir, "hall", "--n-grid", "128")

        header = (temp_dir / "out" / "hall.csv").read_text().splitlines()[0]
        assert header == "centroid,route,x,y,predicted_y,reference_y,relative_error,reference_error,note"

    def test_log(self, temp_dir):
        invoke(temp_dir, "hall", "--n-grid", "128")

        entry = read_log(temp_dir, "hall")[-1]
        assert entry["message"] == "Hall shift finished"
        assert entry["mass_shell_residual"] < 1e-12

    def test_superluminal_exits_2(self, temp_dir):
        result = invoke(temp_dir, "hall", "--v", "1.5")

        assert result.exit_code == 2
        assert "below 1" in read_log(temp_dir, "hall")[-1]["message"]


class TestPhysicsCommands:
    """moment / zitter / pauli コマンドのテスト"""

    def test_moment(self, temp_dir):
        result = invoke(temp_dir, "moment", "--n-grid", "256")

        assert result.exit_code == 0
        rows = json.loads((temp_dir / "out" / "moment.json").read_text())
        assert rows[0]["state"] == "polarized"
        assert rows[0]["E_times_moment"] == pytest.approx(2.0, rel=0.01)

    def test_zitter(self, temp_dir):
        result = invoke(temp_dir, "zitter", "--mix", "mixed")

        assert result.exit_code == 0
        text = (temp_dir / "out" / "zitter.csv").read_text()
        assert text.splitlines()[0] == "t,canonical,projected"
        summary = json.loads((temp_dir / "out" / "zitter.json").read_text())[0]
        assert summary["projected_oscillation"] < 1e-6

    def test_pauli(self, temp_dir):
        result = invoke(temp_dir, "pauli")

        assert result.exit_code == 0
        identities = [r["identity"] for r in json.loads((temp_dir / "out" / "pauli.json").read_text())]
        assert identities == [
            "pauli.r_squared_order",
            "pauli.fw_correspondence_order",
            "pauli.soi_potential",
            "pauli.soi_antisymmetry",
            "pauli.soi_sampled",
        ]

    def test_pauli_rejects_wide_packet(self, temp_dir):
        result = invoke(temp_dir, "pauli", "--width", "0.3")
        assert result.exit_code == 2
