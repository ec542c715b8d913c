"""
非相対論極限モジュール

p ≪ m での展開を数値的に確かめます。
射影位置 𝓡_FW の二乗に現れるスピン軌道項、
中心力ポテンシャルの期待値に現れるSOIエネルギー、
FW表現の上成分とパウリ波動関数の対応を扱います。
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, List, Sequence, Union

import numpy as np
from pydantic import BaseModel, Field, field_validator, model_validator

from diracops.algebra import (
    EPSILON,
    SIGMA,
    SPIN,
    Kinematics,
    Representation,
    fw_unitary,
    gradient,
    sigma_dot,
)
from diracops.operators import projected_position_connection
from diracops.reports import ExpansionReport

PAULI_LIMIT = 0.3


# ===============================
# 𝓡_FW² の展開
# ===============================


@dataclass(frozen=True)
class SquareExpansion:
    """𝓡_FW² - r² の係数比較

    Attributes:
        exact_residual: 2 L·S / (E(E+m)) + A² との差（有限差分の誤差程度）
        pauli_residual: L·S / m² との差（O((p/m)²)）
    """

    exact_residual: float
    pauli_residual: float


def _spin_orbit_coefficients(kin: Kinematics) -> np.ndarray:
    """L·S の ∂_j 係数行列 Σ_i i ε_ijk p_k S_i を (3, 4, 4) で返す"""
    return 1j * np.einsum("ijk,k,iab->jab", EPSILON, kin.p, SPIN)


def _fw_connection(kin: Kinematics) -> np.ndarray:
    return projected_position_connection(kin, Representation.FW)


def r_squared_identity(kin: Kinematics, rel_step: float = 1e-5) -> SquareExpansion:
    """𝓡_FW² を r² + (微分係数行列)·∇ + 行列部 に展開して比較

    (i∂_i + A_i)² - r_i² = 2i A_i ∂_i + i(∂_i A_i) + A_i²。
    """
    if kin.m <= 0:
        raise ValueError("Pauli expansion requires m > 0")
    a = _fw_connection(kin)
    divergence = np.einsum("iiab->ab", gradient(_fw_connection, kin, rel_step))
    derivative_part = 2j * a
    matrix_part = 1j * divergence + np.einsum("iab,ibc->ac", a, a)

    ls = _spin_orbit_coefficients(kin)
    E, m = kin.E, kin.m
    exact = max(
        float(np.max(np.abs(derivative_part - 2 * ls / (E * (E + m))))),
        float(np.max(np.abs(matrix_part - np.einsum("iab,ibc->ac", a, a)))),
    )
    pauli = max(
        float(np.max(np.abs(derivative_part - ls / m**2))),
        float(np.max(np.abs(matrix_part))),
    )
    return SquareExpansion(exact_residual=exact, pauli_residual=pauli)


def _observed_order(ratios: Sequence[float], residuals: Sequence[float]) -> float:
    orders = [
        math.log(residuals[i] / residuals[i + 1]) / math.log(ratios[i] / ratios[i + 1])
        for i in range(len(ratios) - 1)
        if residuals[i + 1] > 0
    ]
    return min(orders) if orders else float("inf")


def r_squared_expansion(
    ratios: Sequence[float] = (0.1, 0.05, 0.025),
    m: float = 1.0,
    direction: Sequence[float] = (0.6, -0.3, 0.74),
    min_order: float = 1.8,
) -> ExpansionReport:
    """p/m を半分にしたときの L·S/m² 近似の残差の収束次数"""
    ratios = sorted(ratios, reverse=True)
    if ratios[0] > PAULI_LIMIT:
        raise ValueError(f"p/m must not exceed {PAULI_LIMIT}")
    unit = np.asarray(direction, dtype=float)
    unit = unit / np.linalg.norm(unit)
    residuals = [r_squared_identity(Kinematics(r * m * unit, m)).pauli_residual for r in ratios]
    order = _observed_order(ratios, residuals)
    return ExpansionReport(
        identity="pauli.r_squared_order",
        tolerance=min_order,
        max_deviation=residuals[-1],
        samples=len(ratios),
        passed=order >= min_order,
        ratios=list(ratios),
        residuals=residuals,
        observed_order=order,
        min_order=min_order,
    )


# ===============================
# SOI ポテンシャル項
# ===============================


class QuadraticPotential(BaseModel):
    """中心力ポテンシャル V(r) = v0 + v2 r²"""

    v0: float = 0.0
    v2: float = 0.5

    def radial_derivative_over_r(self) -> float:
        """V'(r) / r = 2 v2"""
        return 2 * self.v2


class SampledPotential(BaseModel):
    """動径グリッド上でサンプリングした中心力ポテンシャル V(r)

    格子点での値は線形補間、サンプル範囲外は端の値。
    """

    radii: List[float]
    values: List[float]

    @field_validator("radii")
    @classmethod
    def validate_radii(cls, v):
        if len(v) < 3:
            raise ValueError("at least 3 radial samples are required")
        if v[0] < 0 or any(b <= a for a, b in zip(v, v[1:])):
            raise ValueError("radii must be non-negative and strictly increasing")
        return v

    @model_validator(mode="after")
    def validate_lengths(self):
        if len(self.values) != len(self.radii):
            raise ValueError("radii and values must have the same length")
        return self

    @classmethod
    def from_function(
        cls, func: Callable[[np.ndarray], np.ndarray], r_max: float, n: int = 4096
    ) -> "SampledPotential":
        radii = np.linspace(0.0, r_max, n)
        return cls(radii=radii.tolist(), values=np.asarray(func(radii), dtype=float).tolist())

    def on_grid(self, r: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """格子点 r での (V(r), V'(r)/r)"""
        radii = np.asarray(self.radii)
        values = np.asarray(self.values)
        slope = np.gradient(values, radii, edge_order=2)
        inner = radii > 0
        return (
            np.interp(r, radii, values),
            np.interp(r, radii[inner], slope[inner] / radii[inner]),
        )


def gaussian_well(v2: float, well_range: float = 50.0, r_max: float = 1000.0) -> SampledPotential:
    """V(r) = 2 v2 a² (1 - exp(-r²/2a²))（r ≪ a で v2 r²）"""
    return SampledPotential.from_function(
        lambda r: 2 * v2 * well_range**2 * (1 - np.exp(-(r**2) / (2 * well_range**2))), r_max
    )


Potential = Union[QuadraticPotential, SampledPotential]


class PauliPacket(BaseModel):
    """FW表現の上成分に置くガウス波束 φ(p) ∝ (p_x + i p_y)^ℓ exp(-p²/4σ²) w"""

    mass: float = 1.0
    width: float = Field(default=0.05, description="運動量幅 σ")
    ell: int = Field(default=1, description="0 または 1")
    w: tuple[float, float] = (1.0, 0.0)
    n_grid: int = 64

    @field_validator("ell")
    @classmethod
    def validate_ell(cls, v):
        if v not in (0, 1):
            raise ValueError("packet ell must be 0 or 1")
        return v

    @field_validator("mass", "width")
    @classmethod
    def validate_positive(cls, v):
        if v <= 0:
            raise ValueError("mass and width must be positive")
        return v


@dataclass(frozen=True)
class SoiComparison:
    """⟨V(|𝓡_FW|)⟩ と ⟨V(r)⟩ + ⟨V'(r) L·S / (2m² r)⟩ の比較"""

    lhs: float
    rhs: float
    correction: float
    spin_orbit: float
    relative_error: float


def _packet_grid(packet: PauliPacket):
    extent = 8 * packet.width
    axis = np.linspace(-extent, extent, packet.n_grid, endpoint=False)
    dp = float(axis[1] - axis[0])
    px, py, pz = np.meshgrid(axis, axis, axis, indexing="ij")
    w = np.array(packet.w, dtype=complex)
    w = w / np.linalg.norm(w)
    radial = np.exp(-(px**2 + py**2 + pz**2) / (4 * packet.width**2))
    scalar = radial * (px + 1j * py) ** packet.ell
    phi = scalar[..., None] * w
    phi = phi / math.sqrt(float(np.sum(np.abs(phi) ** 2)))

    momentum = np.sqrt(px**2 + py**2 + pz**2)
    tail = float(np.sum(np.abs(phi[momentum > PAULI_LIMIT * packet.mass]) ** 2))
    if tail > 1e-4:
        raise ValueError(f"packet has significant support beyond p/m = {PAULI_LIMIT}")
    return np.stack([px, py, pz]), dp, phi


def _wavenumbers(n: int, dp: float) -> np.ndarray:
    return 2 * np.pi * np.fft.fftfreq(n, d=dp)


def _derivative(field: np.ndarray, dp: float, axis: int) -> np.ndarray:
    n = field.shape[axis]
    k = _wavenumbers(n, dp)
    k[n // 2] = 0.0
    shape = [1, 1, 1, 1]
    shape[axis] = n
    return np.fft.ifft(1j * k.reshape(shape) * np.fft.fft(field, axis=axis), axis=axis)


def _derivatives(phi: np.ndarray, dp: float) -> list[np.ndarray]:
    return [_derivative(phi, dp, axis) for axis in range(3)]


def _connection(p: np.ndarray, g: np.ndarray, field: np.ndarray) -> list[np.ndarray]:
    """A_i field = g (p × σ/2)_i field"""
    half_sigma = SIGMA / 2
    return [
        g[..., None]
        * sum(
            EPSILON[i, j, k] * p[j][..., None] * np.einsum("ab,xyzb->xyza", half_sigma[k], field)
            for j in range(3)
            for k in range(3)
            if EPSILON[i, j, k]
        )
        for i in range(3)
    ]


def _spin_orbit(p: np.ndarray, d_phi: list[np.ndarray]) -> np.ndarray:
    """L·S φ（L_i φ = i ε_ijk p_k ∂_j φ）"""
    half_sigma = SIGMA / 2
    out = np.zeros_like(d_phi[0])
    for i in range(3):
        l_phi = sum(
            1j * EPSILON[i, j, k] * p[k][..., None] * d_phi[j]
            for j in range(3)
            for k in range(3)
            if EPSILON[i, j, k]
        )
        out = out + np.einsum("ab,xyzb->xyza", half_sigma[i], l_phi)
    return out


def _to_position(field: np.ndarray) -> np.ndarray:
    # i∇_p は FFT 側で -k 倍なので |r| = |k|
    return np.fft.fftn(field, axes=(0, 1, 2), norm="ortho")


def _relative_gap(gap: float, correction: float) -> float:
    return abs(gap) / abs(correction) if correction != 0 else abs(gap)


def soi_potential_term(potential: Potential, packet: PauliPacket) -> SoiComparison:
    """射影位置の二乗から現れるSOIエネルギーを波束上で確かめる

    FW表現の電子部分（上2成分）だけを扱う。
    QuadraticPotential は |𝓡_FW|² = r² + r·A + A·r + A² をそのまま評価し、
    SampledPotential は実空間グリッド上の V, V'/r を使って A の1次で比べる。
    """
    p, dp, phi = _packet_grid(packet)
    m = packet.mass
    d_phi = _derivatives(phi, dp)
    r_phi = [1j * d for d in d_phi]
    energy = np.sqrt(m**2 + np.sum(p**2, axis=0))
    g = 1 / (energy * (energy + m))
    a_phi = _connection(p, g, phi)
    ls_phi = _spin_orbit(p, d_phi)
    spin_orbit = float(np.sum(np.conj(phi) * ls_phi).real)

    if isinstance(potential, QuadraticPotential):
        r_squared = sum(float(np.sum(np.abs(rp) ** 2)) for rp in r_phi)
        difference = sum(
            2 * float(np.sum(np.conj(r_phi[i]) * a_phi[i]).real) + float(np.sum(np.abs(a_phi[i]) ** 2))
            for i in range(3)
        )
        v0, v2 = potential.v0, potential.v2
        correction = potential.radial_derivative_over_r() * spin_orbit / (2 * m**2)
        gap = v2 * difference - correction
        return SoiComparison(
            lhs=v0 + v2 * (r_squared + difference),
            rhs=v0 + v2 * r_squared + correction,
            correction=correction,
            spin_orbit=spin_orbit,
            relative_error=_relative_gap(gap, correction),
        )

    # 1次: V(|𝓡|) ≈ V(r) + (V'/2r)(r·A + A·r)
    delta_phi = sum(1j * _derivative(a_phi[i], dp, i) + _connection(p, g, r_phi[i])[i] for i in range(3))
    k = _wavenumbers(phi.shape[0], dp)
    kx, ky, kz = np.meshgrid(k, k, k, indexing="ij")
    values, slope_over_r = potential.on_grid(np.sqrt(kx**2 + ky**2 + kz**2))
    phi_x = _to_position(phi)
    weight = np.sum(np.abs(phi_x) ** 2, axis=-1)
    unperturbed = float(np.sum(weight * values))
    first_order = float(np.sum(np.conj(phi_x) * (slope_over_r / 2)[..., None] * _to_position(delta_phi)).real)
    correction = float(
        np.sum(np.conj(phi_x) * slope_over_r[..., None] * _to_position(ls_phi)).real
    ) / (2 * m**2)
    return SoiComparison(
        lhs=unperturbed + first_order,
        rhs=unperturbed + correction,
        correction=correction,
        spin_orbit=spin_orbit,
        relative_error=_relative_gap(first_order - correction, correction),
    )


# ===============================
# パウリ波動関数との対応
# ===============================


def pauli_correspondence(
    momenta: np.ndarray, phi: np.ndarray, m: float, exact_lower: bool = False
) -> float:
    """FW上成分と (1 + p²/8m²) φ の相対残差

    ψ = (φ, (σ·p / 2m) φ) を U_FW で変換した上2成分と比較する。
    exact_lower=True では下成分を固有状態の (σ·p / (E+m)) φ とし、
    変換後の下2成分と上成分の √(2E/(E+m)) φ からのずれを返す。
    """
    momenta = np.asarray(momenta, dtype=float)
    phi = np.asarray(phi, dtype=complex)
    if momenta.shape[0] != phi.shape[0]:
        raise ValueError("momenta and phi must have the same number of samples")
    if m <= 0:
        raise ValueError("Pauli correspondence requires m > 0")
    if np.max(np.linalg.norm(momenta, axis=1)) > PAULI_LIMIT * m:
        raise ValueError(f"packet has support beyond p/m = {PAULI_LIMIT}")

    error = 0.0
    norm = 0.0
    for p, f in zip(momenta, phi):
        kin = Kinematics(p, m)
        if exact_lower:
            chi = sigma_dot(p) @ f / (kin.E + m)
            transformed = fw_unitary(kin) @ np.concatenate([f, chi])
            expected = math.sqrt(2 * kin.E / (kin.E + m)) * f
            error += float(np.sum(np.abs(transformed[:2] - expected) ** 2))
            error += float(np.sum(np.abs(transformed[2:]) ** 2))
        else:
            chi = sigma_dot(p) @ f / (2 * m)
            upper = (fw_unitary(kin) @ np.concatenate([f, chi]))[:2]
            approx = (1 + float(p @ p) / (8 * m**2)) * f
            error += float(np.sum(np.abs(upper - approx) ** 2))
        norm += float(np.sum(np.abs(f) ** 2))
    return math.sqrt(error / norm)


def pauli_halving_study(
    ratios: Sequence[float] = (0.2, 0.1),
    m: float = 1.0,
    samples: int = 32,
    seed: int = 12345,
    min_order: float = 3.0,
) -> ExpansionReport:
    """運動量を半分にしたときのパウリ対応の残差の収束次数"""
    ratios = sorted(ratios, reverse=True)
    rng = np.random.default_rng(seed)
    directions = rng.normal(size=(samples, 3))
    directions /= np.linalg.norm(directions, axis=1)[:, None]
    scales = rng.uniform(0.5, 1.0, size=samples)
    spinors = rng.normal(size=(samples, 2)) + 1j * rng.normal(size=(samples, 2))

    residuals: List[float] = []
    for ratio in ratios:
        momenta = directions * (ratio * m * scales)[:, None]
        residuals.append(pauli_correspondence(momenta, spinors, m))
    order = _observed_order(ratios, residuals)
    return ExpansionReport(
        identity="pauli.fw_correspondence_order",
        tolerance=min_order,
        max_deviation=residuals[-1],
        samples=len(ratios),
        passed=order >= min_order,
        ratios=list(ratios),
        residuals=residuals,
        observed_order=order,
        min_order=min_order,
    )
