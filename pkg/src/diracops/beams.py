"""
ディラック・ベッセルビームモジュール

単色の平面波重ね合わせ（δリング・ガウス環状スペクトル）を構成し、
演算子の期待値、磁気モーメント、ブースト系での重心、
実空間の渦成分、ジッターベヴェーグングを計算します。
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Sequence

import numpy as np
from scipy.special import roots_legendre

from diracops.algebra import (
    ALPHA,
    Kinematics,
    Representation,
    bispinor_field,
    fw_unitary_field,
    generic_boost,
    hamiltonian,
    negative_energy_bispinor,
    plane_wave_bispinor,
)
from diracops.config import BeamParams, ProfileKind
from diracops.operators import (
    MomentumOperator,
    canonical_oam,
    canonical_position,
    canonical_spin,
    nwfw_oam,
    nwfw_position,
    nwfw_spin,
    projected_oam,
    projected_position,
    projected_position_connection,
    projected_spin,
)
from diracops.reports import ObservableSummary

TRUNCATION_SIGMAS = 6.0
COMPONENT_THRESHOLD = 1e-6


class ProfileError(ValueError):
    """スペクトル形状が演算子に対応していないときのエラー"""


# ===============================
# スペクトル
# ===============================


@dataclass(frozen=True)
class BeamSpectrum:
    """サンプリング済みの単色スペクトル

    Attributes:
        params: ビーム条件
        phi: 方位角 (n_phi,)
        radii: 横運動量 p⊥ の節点 (n_rings,)
        momenta: (n_rings, n_phi, 3)
        amplitudes: (n_rings, n_phi, 4)、Σ|a|² = 1
        width: 環状ガウス幅（δリングでは None）
    """

    params: BeamParams
    phi: np.ndarray
    radii: np.ndarray
    momenta: np.ndarray
    amplitudes: np.ndarray
    width: Optional[float] = None

    @property
    def E(self) -> float:
        return self.params.energy

    @property
    def m(self) -> float:
        return self.params.mass

    @property
    def is_ring(self) -> bool:
        return self.params.profile.kind == ProfileKind.DELTA_RING

    @property
    def n_phi(self) -> int:
        return len(self.phi)

    @property
    def delta(self) -> float:
        """スピン→軌道変換効率 Δ = (1 - m/E) sin²θ₀"""
        return (1 - self.m / self.E) * math.sin(self.params.theta0) ** 2

    def kinematics(self, ring: int, index: int) -> Kinematics:
        return Kinematics(self.momenta[ring, index], self.m)


def _on_shell(radii: np.ndarray, phi: np.ndarray, p: float) -> np.ndarray:
    pz = np.sqrt(np.maximum(p**2 - radii**2, 0.0))
    cos, sin = np.cos(phi), np.sin(phi)
    return np.stack(
        [
            radii[:, None] * cos[None, :],
            radii[:, None] * sin[None, :],
            np.broadcast_to(pz[:, None], (len(radii), len(phi))),
        ],
        axis=-1,
    )


def annulus_width(params: BeamParams) -> float:
    return params.profile.width if params.profile.width is not None else 0.05 * params.kappa


def _annulus_support(params: BeamParams) -> tuple[float, float, float]:
    sigma = annulus_width(params)
    lo = params.kappa - TRUNCATION_SIGMAS * sigma
    hi = params.kappa + TRUNCATION_SIGMAS * sigma
    if lo <= 0 or hi >= params.momentum:
        raise ValueError(
            f"annulus [{lo:.4g}, {hi:.4g}] extends beyond the allowed p_perp range (0, {params.momentum:.4g})"
        )
    return sigma, lo, hi


def build_spectrum(params: BeamParams) -> BeamSpectrum:
    """ビーム条件からスペクトルをサンプリング

    δリングは φ_n = 2πn/N の等間隔、環状ガウスは動径方向に
    Gauss-Legendre 節点を加えます。
    """
    n_phi = params.n_phi
    phi = 2 * np.pi * np.arange(n_phi) / n_phi
    vortex = np.exp(1j * params.ell * phi)
    w = params.spinor

    if params.profile.kind == ProfileKind.DELTA_RING:
        radii = np.array([params.kappa])
        weights = np.ones(1)
        width = None
    else:
        width, lo, hi = _annulus_support(params)
        nodes, gl_weights = roots_legendre(params.profile.n_radial)
        half = (hi - lo) / 2
        radii = lo + half * (nodes + 1)
        envelope = np.exp(-((radii - params.kappa) ** 2) / (2 * width**2))
        # 面積要素 p⊥ dp⊥ dφ
        weights = envelope**2 * gl_weights * half * radii

    momenta = _on_shell(radii, phi, params.momentum)
    flat = bispinor_field(momenta.reshape(-1, 3), params.mass, w)
    amplitudes = flat.reshape(len(radii), n_phi, 4) * vortex[None, :, None]
    amplitudes = amplitudes * np.sqrt(weights)[:, None, None]
    amplitudes = amplitudes / math.sqrt(float(np.sum(np.abs(amplitudes) ** 2)))
    return BeamSpectrum(
        params=params, phi=phi, radii=radii, momenta=momenta, amplitudes=amplitudes, width=width
    )


def _to_representation(spectrum: BeamSpectrum, rep: Representation) -> np.ndarray:
    if rep == Representation.STANDARD:
        return spectrum.amplitudes
    u = fw_unitary_field(spectrum.momenta.reshape(-1, 3), spectrum.m)
    flat = np.einsum("nab,nb->na", u, spectrum.amplitudes.reshape(-1, 4))
    return flat.reshape(spectrum.amplitudes.shape)


def _azimuthal_derivative(amplitudes: np.ndarray) -> np.ndarray:
    """∂/∂φ をリングごとにFFTで評価（Nyquist 成分は落とす）"""
    n = amplitudes.shape[1]
    k = np.fft.fftfreq(n, d=1.0 / n)
    if n % 2 == 0:
        k[n // 2] = 0.0
    spectrum = np.fft.fft(amplitudes, axis=1)
    return np.fft.ifft(1j * k[None, :, None] * spectrum, axis=1)


# ===============================
# 期待値
# ===============================


def _tangential_factor(op: MomentumOperator, spectrum: BeamSpectrum) -> Optional[np.ndarray]:
    """微分係数が方位角方向 t = (-p_y, p_x, 0) に比例するなら比例係数を返す"""
    n_rings, n_phi, _ = spectrum.momenta.shape
    factors = np.zeros((n_rings, n_phi), dtype=complex)
    for j in range(n_rings):
        for n in range(n_phi):
            kin = spectrum.kinematics(j, n)
            c = op.coeffs(kin)
            t = np.array([-kin.p[1], kin.p[0], 0.0])
            lam = (c @ t) / (t @ t)
            if np.max(np.abs(c - lam * t)) > 1e-10 * max(1.0, float(np.max(np.abs(c)))):
                return None
            factors[j, n] = lam
    return factors


def expectation(op: MomentumOperator, spectrum: BeamSpectrum, n_grid: int = 256) -> float:
    """ビーム上の ⟨O⟩

    掛け算部と方位角微分はリング上の求積で評価します。
    横方向の位置微分（r_x, r_y など）は環状ガウスのみで、
    2次元スペクトルグリッドに切り替えます。

    Raises:
        ProfileError: δリングで横方向の位置微分を要求した場合
    """
    amps = _to_representation(spectrum, op.representation)
    n_rings, n_phi, _ = amps.shape

    total = 0.0 + 0.0j
    for j in range(n_rings):
        for n in range(n_phi):
            a = amps[j, n]
            total += np.vdot(a, op.matrix(spectrum.kinematics(j, n)) @ a)

    if not op.is_multiplicative:
        factors = _tangential_factor(op, spectrum)
        if factors is None:
            if spectrum.is_ring:
                raise ProfileError(
                    f"{op.label}: transverse position derivatives require annulus profile"
                )
            return grid_expectation(op, transverse_grid(spectrum, n_grid))
        d_phi = _azimuthal_derivative(amps)
        total += np.sum(np.conj(amps) * factors[:, :, None] * d_phi)

    return float(total.real)


def _summary(family: str, spin: MomentumOperator, oam: MomentumOperator, spectrum: BeamSpectrum) -> ObservableSummary:
    sz = expectation(spin, spectrum)
    lz = expectation(oam, spectrum)
    return ObservableSummary(
        family=family, Sz=sz, Lz=lz, Jz=sz + lz, Delta=spectrum.delta, n_phi=spectrum.n_phi
    )


def soi_summary(spectrum: BeamSpectrum) -> List[ObservableSummary]:
    """正準演算子と射影演算子の ⟨S_z⟩, ⟨L_z⟩, ⟨J_z⟩

    両者は同じ期待値を与え、⟨S_z⟩ = (1 - Δ)⟨s_z⟩, ⟨L_z⟩ = ℓ + Δ⟨s_z⟩ になる。
    """
    return [
        _summary("canonical", canonical_spin()[2], canonical_oam()[2], spectrum),
        _summary("projected", projected_spin()[2], projected_oam()[2], spectrum),
    ]


def nwfw_summary(spectrum: BeamSpectrum) -> List[ObservableSummary]:
    """NWFW演算子の期待値を2通りで評価

    標準表現の閉形式と、FW表現へ移したスペクトル上の正準形の両方。
    """
    return [
        _summary("nwfw_standard", nwfw_spin()[2], nwfw_oam()[2], spectrum),
        _summary(
            "nwfw_fw",
            nwfw_spin(Representation.FW)[2],
            nwfw_oam(Representation.FW)[2],
            spectrum,
        ),
    ]


def spin_closed_form(params: BeamParams) -> tuple[float, float]:
    """閉形式 (⟨S_z⟩, ⟨L_z⟩) = ((1-Δ)s_z, ℓ + Δ s_z)"""
    w = params.spinor
    s_z = (abs(w[0]) ** 2 - abs(w[1]) ** 2) / 2
    delta = (1 - params.mass / params.energy) * math.sin(params.theta0) ** 2
    return (1 - delta) * s_z, params.ell + delta * s_z


# ===============================
# 横方向グリッド（環状ガウス）
# ===============================


@dataclass(frozen=True)
class TransverseGrid:
    """環状ガウススペクトルの直交グリッド表示

    Attributes:
        axis: 各軸の p 座標 (n,)
        momenta: (n, n, 3)、第0軸が p_x
        field: (n, n, 4)、Σ|a|² = 1
    """

    axis: np.ndarray
    momenta: np.ndarray
    field: np.ndarray
    E: float
    m: float

    @property
    def dp(self) -> float:
        return float(self.axis[1] - self.axis[0])

    def derivative(self, axis: int) -> np.ndarray:
        """∂a/∂p_axis をFFTで評価"""
        return _grid_derivative(self.field, self.dp, axis)

    def mean(self, values: np.ndarray) -> complex:
        """Σ a† values（values は field と同じ形）"""
        return complex(np.sum(np.conj(self.field) * values))


def transverse_grid(spectrum: BeamSpectrum, n_grid: int = 512) -> TransverseGrid:
    """環状ガウスを n_grid² の横運動量グリッドに展開

    Raises:
        ProfileError: δリングの場合
    """
    if spectrum.is_ring or spectrum.width is None:
        raise ProfileError("transverse position observables require annulus profile")
    if n_grid < 16 or n_grid % 2:
        raise ValueError("n_grid must be an even number >= 16")
    params = spectrum.params
    kappa, sigma, p = params.kappa, spectrum.width, params.momentum
    extent = kappa + (TRUNCATION_SIGMAS + 2) * sigma
    axis = np.linspace(-extent, extent, n_grid, endpoint=False)
    px, py = np.meshgrid(axis, axis, indexing="ij")
    radius = np.hypot(px, py)
    inside = radius < p
    pz = np.sqrt(np.where(inside, p**2 - radius**2, 0.0))
    momenta = np.stack([px, py, pz], axis=-1)

    envelope = np.exp(-((radius - kappa) ** 2) / (2 * sigma**2)) * inside
    vortex = np.exp(1j * params.ell * np.arctan2(py, px))
    field = bispinor_field(momenta.reshape(-1, 3), params.mass, params.spinor)
    field = field.reshape(n_grid, n_grid, 4) * (envelope * vortex)[:, :, None]
    field = field / math.sqrt(float(np.sum(np.abs(field) ** 2)))
    return TransverseGrid(axis=axis, momenta=momenta, field=field, E=params.energy, m=params.mass)


def grid_expectation(op: MomentumOperator, grid: TransverseGrid, cutoff: float = 1e-10) -> float:
    """グリッド上の ⟨O⟩（振幅が cutoff 未満の点は省く）

    Raises:
        ProfileError: p_z 方向の微分係数を持つ演算子
    """
    field = grid.field
    if op.representation == Representation.FW:
        u = fw_unitary_field(grid.momenta.reshape(-1, 3), grid.m)
        field = np.einsum("nab,nb->na", u, field.reshape(-1, 4)).reshape(field.shape)
    d_x = _grid_derivative(field, grid.dp, 0)
    d_y = _grid_derivative(field, grid.dp, 1)
    magnitude = np.sqrt(np.sum(np.abs(field) ** 2, axis=-1))
    support = np.argwhere(magnitude > cutoff * float(magnitude.max()))

    total = 0.0 + 0.0j
    for ix, iy in support:
        kin = Kinematics(grid.momenta[ix, iy], grid.m)
        a = field[ix, iy]
        c = op.coeffs(kin)
        if abs(c[2]) > 1e-12:
            raise ProfileError(f"{op.label}: longitudinal derivatives are not defined on a monochromatic beam")
        applied = op.matrix(kin) @ a + c[0] * d_x[ix, iy] + c[1] * d_y[ix, iy]
        total += np.vdot(a, applied)
    return float(total.real)


def _grid_derivative(field: np.ndarray, dp: float, axis: int) -> np.ndarray:
    n = field.shape[axis]
    k = 2 * np.pi * np.fft.fftfreq(n, d=dp)
    if n % 2 == 0:
        k[n // 2] = 0.0
    shape = [1, 1, 1]
    shape[axis] = n
    return np.fft.ifft(1j * k.reshape(shape) * np.fft.fft(field, axis=axis), axis=axis)


def transverse_centroid(grid: TransverseGrid) -> np.ndarray:
    """確率重心 (⟨r_x⟩, ⟨r_y⟩) = Re Σ a† i∇a"""
    return np.array([grid.mean(1j * grid.derivative(k)).real for k in range(2)])


def magnetic_moment(params: BeamParams, n_grid: int = 512) -> float:
    """⟨(r × α)_z⟩（近軸極限で (ℓ + 2s_z)/E）"""
    grid = transverse_grid(build_spectrum(params), n_grid)
    d_x, d_y = grid.derivative(0), grid.derivative(1)
    alpha_x_dy = np.einsum("ab,xyb->xya", ALPHA[0], d_y)
    alpha_y_dx = np.einsum("ab,xyb->xya", ALPHA[1], d_x)
    return grid.mean(1j * (alpha_y_dx - alpha_x_dy)).real


def position_expectations(spectrum: BeamSpectrum, n_grid: int = 128) -> dict[str, np.ndarray]:
    """横方向の位置の期待値を3種類の演算子で比較

    ⟨𝓡⊥⟩ = ⟨r⊥⟩ が成り立ち、⟨r̃⊥⟩ はスピン依存のずれを持ちうる。
    """
    grid = transverse_grid(spectrum, n_grid)
    families = {
        "canonical": canonical_position(),
        "projected": projected_position(),
        "nwfw": nwfw_position(),
    }
    return {
        name: np.array([grid_expectation(ops[k], grid) for k in range(2)])
        for name, ops in families.items()
    }


# ===============================
# ブースト系での重心
# ===============================


class CentroidKind(str, Enum):
    """重心の種類"""

    PROBABILITY = "probability"
    ENERGY = "energy"


class BoostRoute(str, Enum):
    """ブースト系の運動量空間波動関数の作り方

    FIELD: 場の変換 ψ'(p') = S ψ(p) をそのまま使う
    RENORMALIZED: 平面波成分ごとに |ψ'(p')| = |ψ(p)| へ規格化し直す
    CHARGE_DENSITY: 実験室系の ρ, j から ρ' = γ(ρ - v·j) で重みを付ける（確率重心のみ）
    """

    FIELD = "field"
    RENORMALIZED = "renormalized"
    CHARGE_DENSITY = "charge_density"


HALL_NOTES = {
    (BoostRoute.FIELD, CentroidKind.PROBABILITY): (
        "psi' = S psi; first order v(l+2s_z)/2E, the spin term enters twice compared with v(l+s_z)/2E"
    ),
    (BoostRoute.FIELD, CentroidKind.ENERGY): "psi' = S psi; <N'>/<H'> follows v(l+s_z)/E",
    (BoostRoute.RENORMALIZED, CentroidKind.PROBABILITY): (
        "|psi'(p')| = |psi(p)|; the E/E' weight removes v*l/2E, leaving v*s_z/E"
    ),
    (BoostRoute.RENORMALIZED, CentroidKind.ENERGY): (
        "|psi'(p')| = |psi(p)|; <N'>/<H'> follows v(l+2s_z)/2E"
    ),
    (BoostRoute.CHARGE_DENSITY, CentroidKind.PROBABILITY): (
        "rho' = gamma(rho - v.j); identical to the field transform"
    ),
}


def _transverse_velocity(v: Sequence[float]) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape != (3,):
        raise ValueError("boost velocity must have 3 components")
    if abs(v[2]) > 0:
        raise ValueError("only boosts transverse to the beam axis are supported")
    if np.linalg.norm(v) >= 1:
        raise ValueError("boost speed must be below 1")
    return v


@dataclass(frozen=True)
class BoostedSpectrum:
    """平面波成分ごとにブーストしたスペクトル

    Attributes:
        momenta: (n_rings, n_phi, 3) の p'
        energies: (n_rings, n_phi) の E'
        amplitudes: (n_rings, n_phi, 4) の S a
    """

    momenta: np.ndarray
    energies: np.ndarray
    amplitudes: np.ndarray
    m: float

    def mass_shell_residual(self) -> float:
        """max |E'² - |p'|² - m²| / max(1, E'²)"""
        gap = self.energies**2 - np.sum(self.momenta**2, axis=-1) - self.m**2
        return float(np.max(np.abs(gap) / np.maximum(1.0, self.energies**2)))

    def mean_energy(self) -> float:
        """⟨H'⟩"""
        weights = np.sum(np.abs(self.amplitudes) ** 2, axis=-1)
        return float(np.sum(weights * self.energies) / np.sum(weights))


def boost_spectrum(spectrum: BeamSpectrum, v: Sequence[float], renormalize: bool = True) -> BoostedSpectrum:
    """各平面波成分を generic_boost で変換する

    renormalize なら成分ごとに |S a| = |a| へ戻す。

    Raises:
        ValueError: ブースト後の成分が正エネルギーのディラック方程式を満たさない場合
    """
    v = _transverse_velocity(v)
    energies = np.empty(spectrum.momenta.shape[:-1])
    momenta = np.empty_like(spectrum.momenta)
    amplitudes = np.empty_like(spectrum.amplitudes)
    for j, n in np.ndindex(energies.shape):
        boosted, spinor = generic_boost(spectrum.kinematics(j, n), v)
        a = spectrum.amplitudes[j, n]
        b = spinor @ a
        norm = float(np.linalg.norm(b))
        residual = float(np.max(np.abs(hamiltonian(boosted) @ b - boosted.E * b)))
        if residual > 1e-9 * max(1.0, boosted.E) * norm:
            raise ValueError("boosted component violates the Dirac equation")
        if renormalize and norm > 0:
            b = b * (float(np.linalg.norm(a)) / norm)
        momenta[j, n], energies[j, n], amplitudes[j, n] = boosted.p, boosted.E, b
    return BoostedSpectrum(momenta=momenta, energies=energies, amplitudes=amplitudes, m=spectrum.m)


def _boosted_gradient(field: np.ndarray, dp: float, v: np.ndarray, gamma: float) -> List[np.ndarray]:
    """∇_{p'} = ∇_p + (1/γ - 1) v̂ (v̂·∇_p)（単色ビームでは p ↦ p' が横面内で線形）"""
    gradient = [_grid_derivative(field, dp, 0), _grid_derivative(field, dp, 1)]
    speed = float(np.linalg.norm(v))
    if speed == 0:
        return gradient
    v_hat = v[:2] / speed
    along = v_hat[0] * gradient[0] + v_hat[1] * gradient[1]
    return [gradient[k] + (1 / gamma - 1) * v_hat[k] * along for k in range(2)]


def _charge_density_centroid(grid: TransverseGrid, v: np.ndarray, gamma: float) -> np.ndarray:
    derivatives = [grid.derivative(0), grid.derivative(1)]
    position = np.array([grid.mean(1j * d).real for d in derivatives])
    v_alpha = np.einsum("k,kab->ab", v, ALPHA)
    flux = np.array([grid.mean(np.einsum("ab,xyb->xya", v_alpha, 1j * d)).real for d in derivatives])
    density = 1 - grid.mean(np.einsum("ab,xyb->xya", v_alpha, grid.field)).real
    shifted = (position - flux) / density

    speed = float(np.linalg.norm(v))
    if speed == 0:
        return shifted
    # 進行方向成分は t' = 0 面で 1/γ に縮む
    v_hat = v[:2] / speed
    return shifted + (1 / gamma - 1) * float(shifted @ v_hat) * v_hat


def boosted_centroid(
    params: BeamParams,
    v: Sequence[float],
    kind: CentroidKind = CentroidKind.PROBABILITY,
    n_grid: int = 512,
    route: BoostRoute = BoostRoute.FIELD,
) -> np.ndarray:
    """速度 v で動く系の t' = 0 での横方向重心 (x', y')

    実験室系の平面波成分 (p, a) を (p', S a) へ移し、
    確率重心は Re Σ b† i∇_{p'} b / Σ|b|²、
    エネルギー重心は ⟨N'⟩/⟨H'⟩ = Re Σ E' b† i∇_{p'} b / Σ E'|b|² で求める。
    各成分は正エネルギーなので H' b = E' b。

    Raises:
        ProfileError: δリング（横位置が定義できない）の場合
        ValueError: CHARGE_DENSITY でエネルギー重心を求めた場合
    """
    v = _transverse_velocity(v)
    if route == BoostRoute.CHARGE_DENSITY and kind == CentroidKind.ENERGY:
        raise ValueError("charge_density route defines only the probability centroid")
    grid = transverse_grid(build_spectrum(params), n_grid)
    gamma = 1 / math.sqrt(1 - float(v @ v))
    if route == BoostRoute.CHARGE_DENSITY:
        return _charge_density_centroid(grid, v, gamma)

    # スピノル変換は p によらない
    _, spinor = generic_boost(Kinematics(np.array([0.0, 0.0, params.momentum]), params.mass), v)
    energies = gamma * (grid.E - grid.momenta @ v)
    field = np.einsum("ab,xyb->xya", spinor, grid.field)
    if route == BoostRoute.RENORMALIZED:
        # 正エネルギー成分では |S a|² = (E'/E)|a|²
        field = field * np.sqrt(grid.E / energies)[:, :, None]

    weights = energies if kind == CentroidKind.ENERGY else np.ones_like(energies)
    density = np.sum(np.abs(field) ** 2, axis=-1)
    conj = np.conj(field)
    numerator = [
        float(np.sum(weights[:, :, None] * conj * (1j * d)).real)
        for d in _boosted_gradient(field, grid.dp, v, gamma)
    ]
    return np.array(numerator) / float(np.sum(weights * density))


def hall_shift_reference(params: BeamParams, v: Sequence[float]) -> dict[str, float]:
    """横ずれの基準値（y 成分、v ∥ x）

    Returns:
        probability: v ⟨J_z⟩ / 2E
        energy: v ⟨J_z⟩ / E
    """
    v = _transverse_velocity(v)
    j_z = params.ell + _spin_z(params)
    E = params.energy
    return {"probability": float(v[0]) * j_z / (2 * E), "energy": float(v[0]) * j_z / E}


def hall_shift_prediction(
    params: BeamParams, v: Sequence[float], kind: CentroidKind, route: BoostRoute
) -> float:
    """近軸ビームでの各ルートの1次の横ずれ（y 成分、v ∥ x）

    ⟨(r × α)_z⟩ = (ℓ + 2s_z)/E と ⟨L_z⟩ ≈ ℓ から決まる。
    """
    v = _transverse_velocity(v)
    if route == BoostRoute.CHARGE_DENSITY and kind == CentroidKind.ENERGY:
        raise ValueError("charge_density route defines only the probability centroid")
    ell, s_z, E = params.ell, _spin_z(params), params.energy
    magnetic = (ell + 2 * s_z) / (2 * E)
    orbital = ell / (2 * E)
    if route == BoostRoute.RENORMALIZED:
        shift = magnetic - orbital if kind == CentroidKind.PROBABILITY else magnetic
    else:
        shift = magnetic if kind == CentroidKind.PROBABILITY else magnetic + orbital
    return float(v[0]) * shift


def _spin_z(params: BeamParams) -> float:
    w = params.spinor
    return float(abs(w[0]) ** 2 - abs(w[1]) ** 2) / 2


# ===============================
# 実空間の渦成分
# ===============================


@dataclass(frozen=True)
class ComponentField:
    """z = 0 面でのバイスピノル成分

    Attributes:
        radii: 動径グリッド
        theta: 方位角グリッド
        field: (4, n_r, n_theta)
        windings: 成分ごとの位相巻き数（振幅ゼロの成分は None）
    """

    radii: np.ndarray
    theta: np.ndarray
    field: np.ndarray
    windings: List[Optional[int]]


def _first_maximum(profile: np.ndarray) -> int:
    """動径プロファイルの最初の極大の添字"""
    step = np.diff(profile)
    rising = np.insert(step, 0, 1.0) >= 0
    falling = np.append(step, -1.0) < 0
    peaks = np.flatnonzero(rising & falling)
    return int(peaks[0]) if peaks.size else int(np.argmax(profile))


def synthesize_components(
    spectrum: BeamSpectrum, r_grid: Sequence[float], n_theta: int = 128
) -> ComponentField:
    """スペクトルを重ね合わせて実空間の成分と巻き数を求める

    巻き数は各成分の動径プロファイルの最初の極大（ベッセル関数の第1極大）の円周上で
    位相を追跡して数える。全体の最大値の 1e-6 未満の成分は None。
    """
    radii = np.asarray(r_grid, dtype=float)
    if radii.ndim != 1 or len(radii) == 0:
        raise ValueError("r_grid must be a non-empty 1-D grid")
    if np.any(radii <= 0):
        raise ValueError("r_grid must exclude r = 0 for phase extraction")

    theta = 2 * np.pi * np.arange(n_theta) / n_theta
    x = radii[:, None] * np.cos(theta)[None, :]
    y = radii[:, None] * np.sin(theta)[None, :]
    momenta = spectrum.momenta.reshape(-1, 3)
    amps = spectrum.amplitudes.reshape(-1, 4)
    field = np.zeros((4, len(radii), n_theta), dtype=complex)
    for i in range(len(radii)):
        phase = np.exp(1j * (np.outer(x[i], momenta[:, 0]) + np.outer(y[i], momenta[:, 1])))
        field[:, i, :] = (phase @ amps).T

    peak = float(np.max(np.abs(field)))
    windings: List[Optional[int]] = []
    for component in field:
        if float(np.max(np.abs(component))) < COMPONENT_THRESHOLD * peak:
            windings.append(None)
            continue
        ring = component[_first_maximum(np.mean(np.abs(component), axis=1))]
        unwrapped = np.unwrap(np.angle(np.append(ring, ring[0])))
        windings.append(int(round((unwrapped[-1] - unwrapped[0]) / (2 * np.pi))))
    return ComponentField(radii=radii, theta=theta, field=field, windings=windings)


# ===============================
# ジッターベヴェーグング
# ===============================


@dataclass(frozen=True)
class ZitterTrace:
    """p̂ 方向の位置重心の時間発展

    Attributes:
        times: 時刻
        canonical: ⟨r·p̂⟩(t)
        projected: ⟨𝓡·p̂⟩(t)
        slope: canonical の線形フィットの傾き
        oscillation: canonical から線形成分を引いた残差の最大振幅
        projected_oscillation: projected の同じ量
        frequency: 残差の主要角周波数（振動がなければ 0）
        expected_frequency: 2E
    """

    times: np.ndarray
    canonical: np.ndarray
    projected: np.ndarray
    slope: float
    projected_slope: float
    oscillation: float
    projected_oscillation: float
    frequency: float
    expected_frequency: float


def _detrend(times: np.ndarray, values: np.ndarray) -> tuple[float, np.ndarray]:
    slope, intercept = np.polyfit(times, values, 1)
    return float(slope), values - (slope * times + intercept)


def _dominant_frequency(times: np.ndarray, residual: np.ndarray, pad: int = 16) -> float:
    dt = float(times[1] - times[0])
    window = np.hanning(len(residual))
    n_fft = pad * len(residual)
    power = np.abs(np.fft.rfft(residual * window, n=n_fft))
    freqs = np.fft.rfftfreq(n_fft, d=dt)
    peak = int(np.argmax(power[1:])) + 1
    if 1 <= peak < len(power) - 1:
        a, b, c = power[peak - 1], power[peak], power[peak + 1]
        denom = a - 2 * b + c
        offset = 0.5 * (a - c) / denom if denom != 0 else 0.0
    else:
        offset = 0.0
    return float(2 * np.pi * (freqs[peak] + offset * (freqs[1] - freqs[0])))


def zitterbewegung_trace(
    p: Sequence[float],
    m: float,
    coefficients: tuple[complex, complex],
    times: Sequence[float],
    w=(1.0, 0.0),
    width: float = 1e-3,
    n_k: int = 256,
) -> ZitterTrace:
    """中心運動量 p の狭いガウス波束の位置重心を追跡

    電子成分 c_e W と陽電子成分 c_p V を重ね合わせ、
    正準位置 r と射影位置 𝓡 の p̂ 方向成分を比較する。
    """
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or len(times) < 8:
        raise ValueError("times must be a 1-D grid with at least 8 points")
    steps = np.diff(times)
    if np.max(np.abs(steps - steps[0])) > 1e-9 * max(1.0, abs(steps[0])) or steps[0] <= 0:
        raise ValueError("times must be uniformly spaced and increasing")
    c_e, c_p = coefficients
    norm = math.sqrt(abs(c_e) ** 2 + abs(c_p) ** 2)
    if norm == 0:
        raise ValueError("coefficients must not both vanish")
    c_e, c_p = c_e / norm, c_p / norm
    w = np.asarray(w, dtype=complex)

    center = np.asarray(p, dtype=float)
    p_norm = float(np.linalg.norm(center))
    direction = center / p_norm if p_norm > 0 else np.array([0.0, 0.0, 1.0])
    k = np.linspace(-10 * width, 10 * width, n_k, endpoint=False)
    dk = float(k[1] - k[0])
    envelope = np.exp(-(k**2) / (4 * width**2))
    envelope = envelope / math.sqrt(float(np.sum(envelope**2)))

    kins = [Kinematics(center + kj * direction, m) for kj in k]
    energies = np.array([kin.E for kin in kins])
    electron = np.array([plane_wave_bispinor(kin, w) for kin in kins]) * envelope[:, None]
    positron = np.array([negative_energy_bispinor(kin, w) for kin in kins]) * envelope[:, None]
    connection = np.array(
        [
            np.einsum("k,kab->ab", direction, projected_position_connection(kin, Representation.STANDARD))
            for kin in kins
        ]
    )

    wavenumbers = 2 * np.pi * np.fft.fftfreq(n_k, d=dk)
    wavenumbers[n_k // 2] = 0.0
    canonical = np.zeros(len(times))
    projected = np.zeros(len(times))
    for i, t in enumerate(times):
        psi = (
            c_e * electron * np.exp(-1j * energies * t)[:, None]
            + c_p * positron * np.exp(1j * energies * t)[:, None]
        )
        d_psi = np.fft.ifft(1j * wavenumbers[:, None] * np.fft.fft(psi, axis=0), axis=0)
        r_value = np.sum(np.conj(psi) * 1j * d_psi)
        canonical[i] = r_value.real
        projected[i] = (r_value + np.einsum("na,nab,nb->", np.conj(psi), connection, psi)).real

    slope, residual = _detrend(times, canonical)
    projected_slope, projected_residual = _detrend(times, projected)
    oscillation = float(np.max(np.abs(residual)))
    frequency = _dominant_frequency(times, residual) if oscillation > 1e-9 else 0.0
    return ZitterTrace(
        times=times,
        canonical=canonical,
        projected=projected,
        slope=slope,
        projected_slope=projected_slope,
        oscillation=oscillation,
        projected_oscillation=float(np.max(np.abs(projected_residual))),
        frequency=frequency,
        expected_frequency=2 * math.sqrt(m**2 + p_norm**2),
    )
