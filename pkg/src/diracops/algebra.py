"""
ディラック代数の基盤モジュール

標準表現の行列、運動量空間の運動学、平面波バイスピノル、
Foldy-Wouthuysen ユニタリ、符号射影子、ブースト行列を提供します。
自然単位系（ħ = c = 1）を前提とします。
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional

import numpy as np
from numpy.typing import NDArray
from scipy.linalg import expm

ComplexMatrix = NDArray[np.complex128]

# ===============================
# 標準表現の定数行列
# ===============================

I2 = np.eye(2, dtype=complex)
I4 = np.eye(4, dtype=complex)
ZERO4 = np.zeros((4, 4), dtype=complex)

SIGMA = np.array(
    [
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=complex,
)


def _offdiag(block: np.ndarray) -> np.ndarray:
    out = np.zeros((4, 4), dtype=complex)
    out[:2, 2:] = block
    out[2:, :2] = block
    return out


def _diag(block: np.ndarray) -> np.ndarray:
    out = np.zeros((4, 4), dtype=complex)
    out[:2, :2] = block
    out[2:, 2:] = block
    return out


ALPHA = np.array([_offdiag(s) for s in SIGMA])
BETA = np.diag([1, 1, -1, -1]).astype(complex)
SPIN = np.array([_diag(s) / 2 for s in SIGMA])

# Levi-Civita 記号
EPSILON = np.zeros((3, 3, 3))
for _i, _j, _k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
    EPSILON[_i, _j, _k] = 1.0
    EPSILON[_i, _k, _j] = -1.0


class Representation(str, Enum):
    """演算子が作用する表現"""

    STANDARD = "standard"
    FW = "fw"


class RepresentationError(ValueError):
    """異なる表現の演算子を混ぜたときのエラー"""


# ===============================
# 運動学
# ===============================


@dataclass(frozen=True)
class Kinematics:
    """運動量 p と質量 m から決まる運動学量

    Attributes:
        p: 3元運動量
        m: 質量（0 以上）
    """

    p: NDArray[np.float64]
    m: float

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float)
        if p.shape != (3,):
            raise ValueError(f"momentum must have shape (3,), got {p.shape}")
        if not np.all(np.isfinite(p)):
            raise ValueError("momentum must be finite")
        if self.m < 0:
            raise ValueError("mass must be non-negative")
        if self.m == 0 and not np.any(p):
            raise ValueError("massless kinematics at p = 0 is undefined")
        object.__setattr__(self, "p", p)

    @property
    def p_norm(self) -> float:
        return float(np.linalg.norm(self.p))

    @property
    def E(self) -> float:
        return math.sqrt(self.m**2 + self.p_norm**2)

    @property
    def direction_defined(self) -> bool:
        return self.p_norm > 0

    @property
    def p_bar(self) -> Optional[NDArray[np.float64]]:
        """単位ベクトル p/|p|（p = 0 では None）"""
        if not self.direction_defined:
            return None
        return self.p / self.p_norm

    def shifted(self, axis: int, h: float) -> "Kinematics":
        """p の axis 成分を h だけずらした運動学"""
        q = self.p.copy()
        q[axis] += h
        return Kinematics(q, self.m)


def kinematics(p, m: float) -> Kinematics:
    return Kinematics(np.asarray(p, dtype=float), float(m))


def alpha_dot(v) -> ComplexMatrix:
    """α·v"""
    return np.tensordot(np.asarray(v, dtype=complex), ALPHA, axes=1)


def sigma_dot(v) -> np.ndarray:
    return np.tensordot(np.asarray(v, dtype=complex), SIGMA, axes=1)


def hamiltonian(kin: Kinematics) -> ComplexMatrix:
    """自由ディラック・ハミルトニアン H = α·p + βm"""
    return alpha_dot(kin.p) + kin.m * BETA


def inverse_hamiltonian(kin: Kinematics) -> ComplexMatrix:
    """H⁻¹ = H / E²"""
    return hamiltonian(kin) / kin.E**2


# ===============================
# 行列値関数
# ===============================


@dataclass(frozen=True)
class MatrixFunction:
    """運動量の関数としての 4x4 行列

    hermitian / unitary を立てた場合は評価のたびに 1e-12 で検査します。
    """

    evaluator: Callable[[Kinematics], ComplexMatrix]
    label: str = ""
    hermitian: bool = False
    unitary: bool = False

    def __call__(self, kin: Kinematics) -> ComplexMatrix:
        value = np.asarray(self.evaluator(kin), dtype=complex)
        if value.shape != (4, 4):
            raise ValueError(f"{self.label or 'matrix function'} returned shape {value.shape}")
        scale = max(1.0, float(np.max(np.abs(value))))
        if self.hermitian and np.max(np.abs(value - value.conj().T)) > 1e-12 * scale:
            raise ValueError(f"{self.label} is not Hermitian at p={kin.p.tolist()}")
        if self.unitary and np.max(np.abs(value @ value.conj().T - I4)) > 1e-12:
            raise ValueError(f"{self.label} is not unitary at p={kin.p.tolist()}")
        return value


def constant(matrix: np.ndarray, label: str = "", hermitian: bool = False) -> MatrixFunction:
    m = np.array(matrix, dtype=complex)
    return MatrixFunction(lambda kin: m, label=label, hermitian=hermitian)


# ===============================
# 有限差分
# ===============================


def fd_step(kin: Kinematics, rel_step: float = 1e-5) -> float:
    """中心差分のステップ h = rel_step * max(1, |p|)"""
    return rel_step * max(1.0, kin.p_norm)


def derivative(
    func: Callable[[Kinematics], np.ndarray],
    kin: Kinematics,
    axis: int,
    rel_step: float = 1e-5,
) -> np.ndarray:
    """∂f/∂p_axis を中心差分 + Richardson 外挿で評価

    誤差は O(h⁴)。m = 0 で p を原点へずらす差分は呼び出し側で避けること。
    """
    h = fd_step(kin, rel_step)

    def central(step: float) -> np.ndarray:
        plus = np.asarray(func(kin.shifted(axis, step)))
        minus = np.asarray(func(kin.shifted(axis, -step)))
        return (plus - minus) / (2 * step)

    coarse = central(h)
    fine = central(h / 2)
    return (4 * fine - coarse) / 3


def gradient(
    func: Callable[[Kinematics], np.ndarray],
    kin: Kinematics,
    rel_step: float = 1e-5,
) -> np.ndarray:
    """3成分すべての偏微分を先頭軸に積んで返す"""
    return np.stack([derivative(func, kin, k, rel_step) for k in range(3)])


# ===============================
# バイスピノルと FW 変換
# ===============================


def _check_spinor(w) -> np.ndarray:
    w = np.asarray(w, dtype=complex)
    if w.shape != (2,):
        raise ValueError(f"two-spinor must have shape (2,), got {w.shape}")
    if abs(np.vdot(w, w).real - 1.0) > 1e-12:
        raise ValueError("two-spinor w must be normalized")
    return w


def plane_wave_bispinor(kin: Kinematics, w) -> np.ndarray:
    """正エネルギー平面波バイスピノル W(p)

    W = (√(E+m) w, √(E-m) (σ·p̄) w) / √(2E)。p = 0 では下成分は 0。
    """
    w = _check_spinor(w)
    E, m = kin.E, kin.m
    upper = math.sqrt(E + m) * w
    if kin.direction_defined:
        lower = math.sqrt(E - m) * (sigma_dot(kin.p_bar) @ w)
    else:
        lower = np.zeros(2, dtype=complex)
    return np.concatenate([upper, lower]) / math.sqrt(2 * E)


def fw_unitary(kin: Kinematics) -> ComplexMatrix:
    """FW ユニタリ U = (E + m + βα·p) / √(2E(E+m))"""
    E, m = kin.E, kin.m
    denom = 2 * E * (E + m)
    if denom <= 0:
        raise ValueError("FW unitary undefined for E + m = 0")
    return ((E + m) * I4 + BETA @ alpha_dot(kin.p)) / math.sqrt(denom)


def negative_energy_bispinor(kin: Kinematics, w) -> np.ndarray:
    """負エネルギー平面波 V(p) = U† (0, w)"""
    w = _check_spinor(w)
    return fw_unitary(kin).conj().T @ np.concatenate([np.zeros(2, dtype=complex), w])


def projectors(kin: Kinematics) -> tuple[ComplexMatrix, ComplexMatrix]:
    """符号射影子 Π± = (1 ± H/E) / 2"""
    h = hamiltonian(kin) / kin.E
    return (I4 + h) / 2, (I4 - h) / 2


def boost_matrix(kin: Kinematics) -> ComplexMatrix:
    """静止系へのブースト Λ = (E + m - α·p) / √(2m(E+m))

    Λ W(p) = √(m/E) (w, 0)。エルミートだがユニタリではない。m = 0 では未定義。
    """
    if kin.m <= 0:
        raise ValueError("rest-frame boost undefined for m = 0")
    E, m = kin.E, kin.m
    return ((E + m) * I4 - alpha_dot(kin.p)) / math.sqrt(2 * m * (E + m))


def rest_frame_spin(kin: Kinematics, w) -> np.ndarray:
    """平面波 W(p) の静止系スピン ⟨S⟩（ΛW を正規化して評価）"""
    rest = boost_matrix(kin) @ plane_wave_bispinor(kin, w)
    rest = rest / np.linalg.norm(rest)
    return np.array([np.vdot(rest, s @ rest).real for s in SPIN])


def generic_boost(kin: Kinematics, v) -> tuple[Kinematics, ComplexMatrix]:
    """速度 v で動く系への変換

    Returns:
        (変換後の運動学, スピノル変換 exp(-(η/2) α·v̂))
    """
    v = np.asarray(v, dtype=float)
    speed = float(np.linalg.norm(v))
    if speed >= 1:
        raise ValueError("boost speed must be below 1")
    if speed == 0:
        return kin, I4.copy()
    v_hat = v / speed
    gamma = 1 / math.sqrt(1 - speed**2)
    eta = math.atanh(speed)
    p_par = float(kin.p @ v_hat)
    p_new = kin.p + ((gamma - 1) * p_par - gamma * speed * kin.E) * v_hat
    spinor = expm(-(eta / 2) * alpha_dot(v_hat))
    return Kinematics(p_new, kin.m), spinor


# ===============================
# バッチ評価（グリッド用）
# ===============================


def bispinor_field(momenta: np.ndarray, m: float, w) -> np.ndarray:
    """複数運動量での W(p) をまとめて評価

    Args:
        momenta: (N, 3) の運動量
        m: 質量
        w: 2成分スピノル

    Returns:
        (N, 4) のバイスピノル
    """
    w = _check_spinor(w)
    momenta = np.asarray(momenta, dtype=float)
    p = np.linalg.norm(momenta, axis=-1)
    E = np.sqrt(m**2 + p**2)
    safe = np.where(p > 0, p, 1.0)
    p_bar = momenta / safe[:, None]
    sig_w = np.einsum("kab,b->ka", SIGMA, w)
    lower = np.einsum("nk,ka->na", p_bar, sig_w)
    lower = np.where((p > 0)[:, None], lower, 0.0)
    upper = np.broadcast_to(w, (len(p), 2))
    out = np.concatenate(
        [np.sqrt(E + m)[:, None] * upper, np.sqrt(E - m)[:, None] * lower], axis=1
    )
    return out / np.sqrt(2 * E)[:, None]


def fw_unitary_field(momenta: np.ndarray, m: float) -> np.ndarray:
    """複数運動量での U(p) を (N, 4, 4) で返す"""
    momenta = np.asarray(momenta, dtype=float)
    E = np.sqrt(m**2 + np.sum(momenta**2, axis=-1))
    ap = np.einsum("nk,kab->nab", momenta.astype(complex), ALPHA)
    mats = (E + m)[:, None, None] * I4 + np.einsum("ab,nbc->nac", BETA, ap)
    return mats / np.sqrt(2 * E * (E + m))[:, None, None]


def matrix_to_json(matrix: np.ndarray) -> dict:
    """複素行列を {"re": ..., "im": ...} に変換"""
    matrix = np.asarray(matrix, dtype=complex)
    return {"re": matrix.real.tolist(), "im": matrix.imag.tolist()}


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def anticommutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b + b @ a

