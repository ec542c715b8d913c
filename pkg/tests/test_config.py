"""
設定ファイル管理のテスト
"""

import math
import pytest
from pathlib import Path
import tempfile
import shutil
import json
import yaml

from diracops.config import (
    THREADS_ENV,
    BeamParams,
    ProfileKind,
    ProfileParams,
    RunConfig,
    SamplingConfig,
    ToleranceConfig,
)


class TestToleranceConfig:
    """ToleranceConfigのテスト"""

    def test_defaults(self):
        tolerances = ToleranceConfig()

        assert tolerances.closed_form == 1e-12
        assert tolerances.eigen == 1e-10
        assert tolerances.finite_difference == 1e-6
        assert tolerances.table1 == 1e-8
        assert tolerances.quadrature == 1e-9
        assert tolerances.relative == 0.02
        assert tolerances.continuity == 1e-4

    def test_reject_non_positive(self):
        with pytest.raises(ValueError, match="must be positive"):
            ToleranceConfig(table1=0.0)


class TestSamplingConfig:
    """SamplingConfigのテスト"""

    def test_defaults(self, monkeypatch):
        monkeypatch.delenv(THREADS_ENV, raising=False)
        sampling = SamplingConfig()

        assert sampling.samples == 50
        assert sampling.seed == 12345
        assert sampling.p_range == (1e-2, 1e2)
        assert sampling.masses == [0.1, 1.0, 10.0]
        assert sampling.threads == 1

    def test_threads_from_env(self, monkeypatch):
        """DIRAC_OPS_THREADS でスレッド数を指定できる"""
        monkeypatch.setenv(THREADS_ENV, "4")
        assert SamplingConfig().threads == 4

    def test_threads_env_not_integer(self, monkeypatch):
        monkeypatch.setenv(THREADS_ENV, "many")
        with pytest.raises(ValueError, match=THREADS_ENV):
            SamplingConfig()

    def test_validate_p_range(self):
        with pytest.raises(ValueError, match="0 < min < max"):
            SamplingConfig(p_range=(1.0, 0.5))
        with pytest.raises(ValueError, match="0 < min < max"):
            SamplingConfig(p_range=(0.0, 1.0))

    def test_validate_masses(self):
        with pytest.raises(ValueError, match="non-negative"):
            SamplingConfig(masses=[1.0, -0.1])
        with pytest.raises(ValueError, match="must not be empty"):
            SamplingConfig(masses=[])

    def test_validate_samples(self):
        with pytest.raises(ValueError, match="at least 1"):
            SamplingConfig(samples=0)


class TestBeamParams:
    """BeamParamsのテスト"""

    def test_defaults(self):
        params = BeamParams()

        assert params.energy == 2.0
        assert params.mass == 1.0
        assert params.theta0 == pytest.approx(math.pi / 6)
        assert params.ell == 1
        assert params.profile.kind == ProfileKind.DELTA_RING
        assert params.momentum == pytest.approx(math.sqrt(3))
        assert params.kappa == pytest.approx(math.sqrt(3) / 2)

    def test_spinor_is_normalized(self):
        params = BeamParams(w=(1.0, 0.0, 1.0, 1.0))

        spinor = params.spinor
        assert abs(abs(spinor[0]) ** 2 + abs(spinor[1]) ** 2 - 1) < 1e-15

    def test_reject_zero_spinor(self):
        with pytest.raises(ValueError, match="non-zero"):
            BeamParams(w=(0.0, 0.0, 0.0, 0.0))

    def test_reject_energy_below_mass(self):
        with pytest.raises(ValueError, match="energy must exceed mass"):
            BeamParams(energy=0.5, mass=1.0)

    @pytest.mark.parametrize("theta0", [0.0, math.pi / 2, -0.1])
    def test_reject_theta0(self, theta0):
        with pytest.raises(ValueError, match="theta0"):
            BeamParams(theta0=theta0)

    def test_reject_negative_mass(self):
        with pytest.raises(ValueError, match="non-negative"):
            BeamParams(mass=-1.0)

    def test_n_phi_power_of_two(self):
        assert BeamParams(n_phi=128).n_phi == 128
        with pytest.raises(ValueError, match="power of two"):
            BeamParams(n_phi=100)
        with pytest.raises(ValueError, match="power of two"):
            BeamParams(n_phi=32)

    def test_reject_unknown_field(self):
        with pytest.raises(ValueError):
            BeamParams(E=2.0)

    def test_profile_validation(self):
        with pytest.raises(ValueError, match="width must be positive"):
            ProfileParams(width=-0.1)
        with pytest.raises(ValueError, match="n_radial"):
            ProfileParams(n_radial=1)


class TestRunConfig:
    """RunConfigのテスト"""

    @pytest.fixture
    def temp_dir(self):
        """一時ディレクトリを作成"""
        temp = tempfile.mkdtemp()
        yield Path(temp)
        shutil.rmtree(temp)

    def test_load_none_gives_defaults(self):
        config = RunConfig.load(None)

        assert config.sampling.samples == 50
        assert config.tolerances.table1 == 1e-8

    def test_load_yaml(self, temp_dir):
        path = temp_dir / "tolerances.yaml"
        path.write_text(
            """tolerances:
  table1: 1.0e-7
sampling:
  samples: 10
  seed: 7
  masses: [1.0]
"""
        )

        config = RunConfig.load(path)

        assert config.tolerances.table1 == 1e-7
        assert config.tolerances.closed_form == 1e-12
        assert config.sampling.samples == 10
        assert config.sampling.seed == 7
        assert config.sampling.masses == [1.0]

    def test_load_json(self, temp_dir):
        path = temp_dir / "tolerances.json"
        path.write_text(json.dumps({"sampling": {"samples": 5}}))

        assert RunConfig.load(path).sampling.samples == 5

    def test_load_invalid_yaml(self, temp_dir):
        path = temp_dir / "tolerances.yaml"
        path.write_text("invalid: yaml: content:")

        with pytest.raises(ValueError, match="Invalid YAML"):
            RunConfig.load(path)

    def test_load_rejects_beam_file(self, temp_dir):
        """ビーム条件は --beam 用のファイルで、RunConfig としては読まない"""
        path = temp_dir / "beam.json"
        path.write_text(json.dumps({"energy": 3.0, "mass": 1.0, "theta0": 0.4, "ell": 2}))

        with pytest.raises(ValueError, match="Error loading config"):
            RunConfig.load(path)

    def test_load_invalid_json(self, temp_dir):
        path = temp_dir / "tolerances.json"
        path.write_text("{invalid json}")

        with pytest.raises(ValueError, match="Invalid JSON"):
            RunConfig.load(path)

    def test_load_missing_file(self, temp_dir):
        with pytest.raises(ValueError, match="not found"):
            RunConfig.load(temp_dir / "missing.yaml")

    def test_with_overrides(self):
        config = RunConfig().with_overrides(samples=10, seed=7, mass=0.0)

        assert config.sampling.samples == 10
        assert config.sampling.seed == 7
        assert config.sampling.masses == [0.0]

    def test_with_overrides_keeps_unset(self):
        config = RunConfig()
        assert config.with_overrides() is config

    def test_default_yaml_round_trip(self, temp_dir):
        """デフォルトYAMLはそのまま読み込める"""
        text = RunConfig.default_yaml()
        data = yaml.safe_load(text)

        assert "threads" not in data["sampling"]
        path = temp_dir / "tolerances.yaml"
        path.write_text(text)
        assert RunConfig.load(path).tolerances == ToleranceConfig()

    def test_save(self, temp_dir):
        path = temp_dir / "out" / "tolerances.yaml"
        RunConfig().with_overrides(samples=3).save(path)

        assert RunConfig.load(path).sampling.samples == 3


class TestBeamFile:
    """beam.json の読み込み"""

    @pytest.fixture
    def temp_dir(self):
        temp = tempfile.mkdtemp()
        yield Path(temp)
        shutil.rmtree(temp)

    def test_load(self, temp_dir):
        path = temp_dir / "beam.json"
        path.write_text(
            json.dumps(
                {
                    "energy": 3.0,
                    "mass": 1.0,
                    "theta0": 0.3,
                    "ell": 2,
                    "w": [0, 0, 1, 0],
                    "profile": {"kind": "gaussian_annulus", "width": 0.01},
                }
            )
        )

        params = BeamParams.load(path)

        assert params.energy == 3.0
        assert params.ell == 2
        assert params.profile.kind == ProfileKind.GAUSSIAN_ANNULUS
        assert params.profile.width == 0.01
        assert abs(params.spinor[1]) == pytest.approx(1.0)

    def test_load_missing(self, temp_dir):
        with pytest.raises(ValueError, match="Beam file not found"):
            BeamParams.load(temp_dir / "missing.json")

    def test_load_invalid_json(self, temp_dir):
        path = temp_dir / "beam.json"
        path.write_text("{oops")

        with pytest.raises(ValueError, match="Invalid JSON"):
            BeamParams.load(path)
