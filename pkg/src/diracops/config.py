"""
設定ファイル管理モジュール

許容誤差・サンプリング条件（tolerances.yaml）と
ビーム条件（beam.json）の読み込み・検証・管理機能を提供します。
"""

import json
import math
import os
from enum import Enum
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np
import yaml
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

THREADS_ENV = "DIRAC_OPS_THREADS"


# ===============================
# 許容誤差・サンプリング スキーマ
# ===============================


class ToleranceConfig(BaseModel):
    """恒等式ごとの許容誤差"""

    closed_form: float = Field(default=1e-12, description="閉形式どうしの比較")
    eigen: float = Field(default=1e-10, description="固有値・期待値の比較")
    finite_difference: float = Field(default=1e-6, description="有限差分を含む比較")
    table1: float = Field(default=1e-8, description="閉形式と構成的ルートの比較")
    quadrature: float = Field(default=1e-9, description="リング求積の比較")
    relative: float = Field(default=0.02, description="ビーム観測量の相対誤差")
    continuity: float = Field(default=1e-4, description="m → 0 の連続性")
    moment: float = Field(default=0.01, description="磁気モーメントの相対誤差")
    soi: float = Field(default=0.05, description="SOI補正項の相対誤差")

    @field_validator("*")
    @classmethod
    def validate_positive(cls, v):
        if v <= 0:
            raise ValueError("tolerances must be positive")
        return v


def _threads_from_env() -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw is None or raw == "":
        return 1
    try:
        return max(1, int(raw))
    except ValueError:
        raise ValueError(f"{THREADS_ENV} must be an integer, got {raw!r}")


class SamplingConfig(BaseModel):
    """運動量サンプリング条件"""

    samples: int = Field(default=50, description="サンプル数")
    seed: int = Field(default=12345, description="乱数シード")
    p_range: Tuple[float, float] = Field(default=(1e-2, 1e2), description="|p| の対数一様範囲")
    masses: List[float] = Field(default_factory=lambda: [0.1, 1.0, 10.0], description="質量")
    fd_step: float = Field(default=1e-5, description="有限差分の相対ステップ")
    threads: int = Field(default_factory=_threads_from_env, description="並列スレッド数")

    @field_validator("samples", "threads")
    @classmethod
    def validate_count(cls, v):
        if v < 1:
            raise ValueError("samples and threads must be at least 1")
        return v

    @field_validator("p_range")
    @classmethod
    def validate_p_range(cls, v):
        if v[0] <= 0 or v[0] >= v[1]:
            raise ValueError("p_range: need 0 < min < max")
        return v

    @field_validator("masses")
    @classmethod
    def validate_masses(cls, v):
        if not v:
            raise ValueError("masses must not be empty")
        if any(m < 0 for m in v):
            raise ValueError("masses must be non-negative")
        return v

    @field_validator("fd_step")
    @classmethod
    def validate_fd_step(cls, v):
        if not 0 < v < 1e-2:
            raise ValueError("fd_step must be in (0, 1e-2)")
        return v


# ===============================
# ビーム スキーマ
# ===============================


class ProfileKind(str, Enum):
    """横方向スペクトルの形状"""

    DELTA_RING = "delta_ring"
    GAUSSIAN_ANNULUS = "gaussian_annulus"


class ProfileParams(BaseModel):
    """スペクトル形状パラメータ

    width を省略した場合はリング半径 κ の 5% を使います。
    """

    kind: ProfileKind = Field(default=ProfileKind.DELTA_RING)
    width: Optional[float] = Field(default=None, description="環状ガウス幅 σ_κ（絶対値）")
    n_radial: int = Field(default=24, description="動径方向のGauss-Legendre節点数")

    @field_validator("width")
    @classmethod
    def validate_width(cls, v):
        if v is not None and v <= 0:
            raise ValueError("profile width must be positive")
        return v

    @field_validator("n_radial")
    @classmethod
    def validate_n_radial(cls, v):
        if v < 2:
            raise ValueError("n_radial must be at least 2")
        return v


class BeamParams(BaseModel):
    """単色ディラック・ベッセルビームの条件"""

    model_config = ConfigDict(extra="forbid")

    energy: float = Field(default=2.0, description="エネルギー E")
    mass: float = Field(default=1.0, description="質量 m")
    theta0: float = Field(default=math.pi / 6, description="円錐角 θ₀")
    ell: int = Field(default=1, description="渦度 ℓ")
    w: Tuple[float, float, float, float] = Field(
        default=(1.0, 0.0, 0.0, 0.0), description="2成分スピノル (re0, im0, re1, im1)"
    )
    profile: ProfileParams = Field(default_factory=ProfileParams)
    n_phi: int = Field(default=256, description="方位角サンプル数（2の冪）")

    @field_validator("mass")
    @classmethod
    def validate_mass(cls, v):
        if v < 0:
            raise ValueError("mass must be non-negative")
        return v

    @field_validator("theta0")
    @classmethod
    def validate_theta0(cls, v):
        if not 0 < v < math.pi / 2:
            raise ValueError("theta0 must lie in (0, pi/2)")
        return v

    @field_validator("ell")
    @classmethod
    def validate_ell(cls, v):
        if abs(v) > 100:
            raise ValueError("|ell| must not exceed 100")
        return v

    @field_validator("n_phi")
    @classmethod
    def validate_n_phi(cls, v):
        if v < 64 or v & (v - 1):
            raise ValueError("n_phi must be a power of two >= 64")
        return v

    @field_validator("w")
    @classmethod
    def validate_w(cls, v):
        norm = math.sqrt(sum(x * x for x in v))
        if norm < 1e-12:
            raise ValueError("spinor w must be non-zero")
        return tuple(x / norm for x in v)

    @model_validator(mode="after")
    def validate_energy(self):
        if self.energy <= self.mass:
            raise ValueError("energy must exceed mass")
        return self

    @property
    def spinor(self) -> np.ndarray:
        """正規化済みの2成分スピノル"""
        re0, im0, re1, im1 = self.w
        return np.array([re0 + 1j * im0, re1 + 1j * im1], dtype=complex)

    @property
    def momentum(self) -> float:
        return math.sqrt(self.energy**2 - self.mass**2)

    @property
    def kappa(self) -> float:
        """リング半径 κ = p sinθ₀"""
        return self.momentum * math.sin(self.theta0)

    @classmethod
    def load(cls, path: Path) -> "BeamParams":
        """beam.json を読み込む

        Raises:
            ValueError: JSON形式または値が不正な場合
        """
        try:
            with open(path, "r", encoding="utf-8") as f:
                data = json.load(f)
            return cls(**data)
        except json.JSONDecodeError as e:
            raise ValueError(f"Invalid JSON format in {path}: {e}")
        except FileNotFoundError:
            raise ValueError(f"Beam file not found: {path}")
        except Exception as e:
            raise ValueError(f"Error loading beam parameters from {path}: {e}")


# ===============================
# 設定管理クラス
# ===============================


class RunConfig(BaseModel):
    """実行設定全体

    Examples:
        >>> config = RunConfig.load(Path("config/tolerances.yaml"))
        >>> config.sampling.samples
        50
    """

    model_config = ConfigDict(extra="forbid")

    tolerances: ToleranceConfig = Field(default_factory=ToleranceConfig)
    sampling: SamplingConfig = Field(default_factory=SamplingConfig)

    @classmethod
    def load(cls, path: Optional[Path]) -> "RunConfig":
        """YAML または JSON の設定ファイルを読み込む

        Args:
            path: 設定ファイル（None ならデフォルト値）

        Raises:
            ValueError: ファイル形式が不正な場合
        """
        if path is None:
            return cls()
        if not path.exists():
            raise ValueError(f"Config file not found: {path}")

        if path.suffix == ".json":
            try:
                with open(path, "r", encoding="utf-8") as f:
                    data = json.load(f)
            except json.JSONDecodeError as e:
                raise ValueError(f"Invalid JSON format in {path}: {e}")
        else:
            try:
                with open(path, "r", encoding="utf-8") as f:
                    data = yaml.safe_load(f)
            except yaml.YAMLError as e:
                raise ValueError(f"Invalid YAML format in {path}: {e}")

        try:
            return cls(**(data or {}))
        except Exception as e:
            raise ValueError(f"Error loading config from {path}: {e}")

    def with_overrides(
        self,
        samples: Optional[int] = None,
        seed: Optional[int] = None,
        mass: Optional[float] = None,
    ) -> "RunConfig":
        """CLIフラグで上書きした設定を返す"""
        updates = {}
        if samples is not None:
            updates["samples"] = samples
        if seed is not None:
            updates["seed"] = seed
        if mass is not None:
            updates["masses"] = [mass]
        if not updates:
            return self
        sampling = SamplingConfig(**{**self.sampling.model_dump(), **updates})
        return RunConfig(tolerances=self.tolerances, sampling=sampling)

    @classmethod
    def default_yaml(cls) -> str:
        """デフォルトの tolerances.yaml を取得"""
        config = cls()
        data = config.model_dump(mode="json")
        data["sampling"].pop("threads")
        return yaml.safe_dump(data, sort_keys=False)

    def save(self, path: Path) -> None:
        """設定をYAMLとして保存"""
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as f:
            f.write(yaml.safe_dump(self.model_dump(mode="json"), sort_keys=False))
