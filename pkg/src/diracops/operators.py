"""
運動量空間の演算子モジュール

O = Σ c_k(p) ∂/∂p_k + M(p) の形の一階微分演算子を扱います。
c_k は単位行列に比例するスカラー係数、M は 4x4 行列値関数です。
位置 r = i∇_p、スピン、軌道角運動量、およびそれぞれの
射影演算子・NWFW演算子を両表現で構成します。
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum
from typing import Callable, Optional, Tuple

import numpy as np

from diracops.algebra import (
    ALPHA,
    BETA,
    EPSILON,
    I4,
    SIGMA,
    SPIN,
    ZERO4,
    Kinematics,
    MatrixFunction,
    Representation,
    RepresentationError,
    alpha_dot,
    constant,
    fw_unitary,
    gradient,
    hamiltonian,
    inverse_hamiltonian,
    plane_wave_bispinor,
    projectors,
)

CoefficientFunction = Callable[[Kinematics], np.ndarray]


# ===============================
# 演算子の値
# ===============================


@dataclass(frozen=True)
class OperatorValue:
    """ある運動量での演算子の値（微分係数と行列部）"""

    coefficients: np.ndarray
    matrix: np.ndarray

    def __add__(self, other: "OperatorValue") -> "OperatorValue":
        return OperatorValue(self.coefficients + other.coefficients, self.matrix + other.matrix)

    def __sub__(self, other: "OperatorValue") -> "OperatorValue":
        return OperatorValue(self.coefficients - other.coefficients, self.matrix - other.matrix)

    def scaled(self, factor: complex) -> "OperatorValue":
        return OperatorValue(factor * self.coefficients, factor * self.matrix)

    def norm(self) -> float:
        return max(float(np.max(np.abs(self.coefficients))), float(np.max(np.abs(self.matrix))))

    def deviation(self, other: "OperatorValue") -> float:
        """係数・行列要素の最大絶対差"""
        return (self - other).norm()


def _zero_coefficients(kin: Kinematics) -> np.ndarray:
    return np.zeros(3, dtype=complex)


# ===============================
# 演算子
# ===============================


@dataclass(frozen=True)
class MomentumOperator:
    """一階微分演算子 Σ c_k(p) ∂_k + M(p)

    Attributes:
        matrix: 行列部 M(p)
        coefficients: 微分係数 c(p)（None なら純粋な掛け算演算子）
        representation: 作用する表現
        label: 表示名
    """

    matrix: MatrixFunction
    coefficients: Optional[CoefficientFunction] = None
    representation: Representation = Representation.STANDARD
    label: str = ""

    @property
    def is_multiplicative(self) -> bool:
        return self.coefficients is None

    def coeffs(self, kin: Kinematics) -> np.ndarray:
        if self.coefficients is None:
            return _zero_coefficients(kin)
        return np.asarray(self.coefficients(kin), dtype=complex)

    def value(self, kin: Kinematics) -> OperatorValue:
        return OperatorValue(self.coeffs(kin), self.matrix(kin))

    def _combine(self, other: "MomentumOperator", sign: float, label: str) -> "MomentumOperator":
        require_same_representation(self, other)
        a, b = self, other

        def matrix(kin: Kinematics) -> np.ndarray:
            return a.matrix(kin) + sign * b.matrix(kin)

        coefficients: Optional[CoefficientFunction] = None
        if not (a.is_multiplicative and b.is_multiplicative):

            def coefficients(kin: Kinematics) -> np.ndarray:
                return a.coeffs(kin) + sign * b.coeffs(kin)

        cls = type(self) if type(self) is type(other) and coefficients is None else MomentumOperator
        return cls(
            matrix=MatrixFunction(matrix, label=label),
            coefficients=coefficients,
            representation=self.representation,
            label=label,
        )

    def __add__(self, other: "MomentumOperator") -> "MomentumOperator":
        return self._combine(other, 1.0, f"({self.label} + {other.label})")

    def __sub__(self, other: "MomentumOperator") -> "MomentumOperator":
        return self._combine(other, -1.0, f"({self.label} - {other.label})")

    def scaled(self, factor: complex, label: Optional[str] = None) -> "MomentumOperator":
        op = self

        def matrix(kin: Kinematics) -> np.ndarray:
            return factor * op.matrix(kin)

        coefficients = None
        if not op.is_multiplicative:

            def coefficients(kin: Kinematics) -> np.ndarray:
                return factor * op.coeffs(kin)

        name = label or f"{factor}*{op.label}"
        return replace(op, matrix=MatrixFunction(matrix, label=name), coefficients=coefficients, label=name)


@dataclass(frozen=True)
class SpinOperator(MomentumOperator):
    """微分部を持たない掛け算演算子"""

    def __post_init__(self):
        if self.coefficients is not None:
            raise ValueError("SpinOperator must not carry derivative coefficients")


OperatorTriple = Tuple[MomentumOperator, MomentumOperator, MomentumOperator]


def require_same_representation(*ops: MomentumOperator) -> Representation:
    reps = {op.representation for op in ops}
    if len(reps) != 1:
        labels = ", ".join(f"{op.label}[{op.representation.value}]" for op in ops)
        raise RepresentationError(f"representation mismatch: {labels}")
    return reps.pop()


def _unit_coefficient(axis: int) -> CoefficientFunction:
    vec = np.zeros(3, dtype=complex)
    vec[axis] = 1j

    def coefficients(kin: Kinematics) -> np.ndarray:
        return vec

    return coefficients


def _triple(factory: Callable[[int], MomentumOperator]) -> OperatorTriple:
    return (factory(0), factory(1), factory(2))


# ===============================
# 正準演算子
# ===============================


def canonical_position(rep: Representation = Representation.STANDARD) -> OperatorTriple:
    """正準位置 r = i∇_p"""
    return _triple(
        lambda k: MomentumOperator(
            matrix=constant(ZERO4, label="0"),
            coefficients=_unit_coefficient(k),
            representation=rep,
            label=f"r_{'xyz'[k]}",
        )
    )


def canonical_spin(rep: Representation = Representation.STANDARD) -> OperatorTriple:
    """正準スピン S = diag(σ, σ)/2"""
    return _triple(
        lambda k: SpinOperator(
            matrix=constant(SPIN[k], label=f"S_{'xyz'[k]}", hermitian=True),
            representation=rep,
            label=f"S_{'xyz'[k]}",
        )
    )


def momentum_multiplication(rep: Representation = Representation.STANDARD) -> OperatorTriple:
    """運動量 p_k を掛ける演算子"""
    return _triple(
        lambda k: SpinOperator(
            matrix=MatrixFunction(lambda kin, k=k: kin.p[k] * I4, label=f"p_{'xyz'[k]}"),
            representation=rep,
            label=f"p_{'xyz'[k]}",
        )
    )


def _fw_hamiltonian(kin: Kinematics) -> np.ndarray:
    return kin.E * BETA


def hamiltonian_operator(rep: Representation = Representation.STANDARD) -> SpinOperator:
    """自由ハミルトニアン（標準表現 α·p + βm、FW表現 βE）"""
    evaluator = hamiltonian if rep == Representation.STANDARD else _fw_hamiltonian
    return SpinOperator(
        matrix=MatrixFunction(evaluator, label="H", hermitian=True),
        representation=rep,
        label="H" if rep == Representation.STANDARD else "H_FW",
    )


def cross_with_momentum(positions: OperatorTriple, label: str = "L") -> OperatorTriple:
    """軌道角運動量 (X × p)_i = ε_ijk X_j p_k を組み立てる

    X_j p_k = p_k X_j + c^(j)_k なので、係数の定数項を行列部に含める。
    """
    rep = require_same_representation(*positions)

    def build(i: int) -> MomentumOperator:
        def coefficients(kin: Kinematics) -> np.ndarray:
            out = np.zeros(3, dtype=complex)
            for j in range(3):
                for k in range(3):
                    if EPSILON[i, j, k]:
                        out += EPSILON[i, j, k] * kin.p[k] * positions[j].coeffs(kin)
            return out

        def matrix(kin: Kinematics) -> np.ndarray:
            out = np.zeros((4, 4), dtype=complex)
            for j in range(3):
                cj = positions[j].coeffs(kin)
                mj = positions[j].matrix(kin)
                for k in range(3):
                    if EPSILON[i, j, k]:
                        out += EPSILON[i, j, k] * (kin.p[k] * mj + cj[k] * I4)
            return out

        name = f"{label}_{'xyz'[i]}"
        return MomentumOperator(
            matrix=MatrixFunction(matrix, label=name),
            coefficients=coefficients,
            representation=rep,
            label=name,
        )

    return _triple(build)


def canonical_oam(rep: Representation = Representation.STANDARD) -> OperatorTriple:
    """正準軌道角運動量 L = r × p"""
    return cross_with_momentum(canonical_position(rep), label="L")


def total_angular_momentum(rep: Representation = Representation.STANDARD) -> OperatorTriple:
    """全角運動量 J = L + S（U_FW と可換なので両表現で同じ形）"""
    L = canonical_oam(rep)
    S = canonical_spin(rep)
    return tuple(replace(L[k] + S[k], label=f"J_{'xyz'[k]}") for k in range(3))  # type: ignore[return-value]


# ===============================
# 射影演算子（閉形式）
# ===============================


def _p_cross_spin(kin: Kinematics) -> np.ndarray:
    """(p × S)_i を (3, 4, 4) で返す"""
    return np.einsum("ijk,j,kab->iab", EPSILON, kin.p, SPIN)


def _alpha_cross_p(kin: Kinematics) -> np.ndarray:
    """(α × p)_i を (3, 4, 4) で返す"""
    return np.einsum("ijk,jab,k->iab", EPSILON, ALPHA, kin.p)


def _p_dot_spin(kin: Kinematics) -> np.ndarray:
    return np.einsum("k,kab->ab", kin.p, SPIN)


def _position_family(
    matrix_parts: Callable[[Kinematics], np.ndarray], rep: Representation, label: str
) -> OperatorTriple:
    return _triple(
        lambda k: MomentumOperator(
            matrix=MatrixFunction(
                lambda kin, k=k: matrix_parts(kin)[k], label=f"{label}_{'xyz'[k]}", hermitian=True
            ),
            coefficients=_unit_coefficient(k),
            representation=rep,
            label=f"{label}_{'xyz'[k]}",
        )
    )


def _spin_family(
    matrices: Callable[[Kinematics], np.ndarray], rep: Representation, label: str
) -> OperatorTriple:
    return _triple(
        lambda k: SpinOperator(
            matrix=MatrixFunction(
                lambda kin, k=k: matrices(kin)[k], label=f"{label}_{'xyz'[k]}", hermitian=True
            ),
            representation=rep,
            label=f"{label}_{'xyz'[k]}",
        )
    )


def projected_position_connection(kin: Kinematics, rep: Representation) -> np.ndarray:
    """射影位置 𝓡 の行列部（3, 4, 4）"""
    E, m = kin.E, kin.m
    if rep == Representation.FW:
        return _p_cross_spin(kin) / (E * (E + m))
    beta_alpha = np.einsum("ab,kbc->kac", BETA, ALPHA)
    return _p_cross_spin(kin) / E**2 + 1j * m * beta_alpha / (2 * E**2)


def projected_position(rep: Representation = Representation.STANDARD) -> OperatorTriple:
    """射影位置 𝓡（標準表現 r + p×S/E² + imβα/2E²、FW表現 r + p×S/E(E+m)）"""
    return _position_family(lambda kin: projected_position_connection(kin, rep), rep, "R")


def projected_spin_matrices(kin: Kinematics, rep: Representation) -> np.ndarray:
    E, m = kin.E, kin.m
    longitudinal = np.einsum("i,ab->iab", kin.p, _p_dot_spin(kin))
    if rep == Representation.FW:
        return (m / E) * SPIN + longitudinal / (E * (E + m))
    beta_cross = np.einsum("ab,ibc->iac", BETA, _alpha_cross_p(kin))
    return (m / E) ** 2 * SPIN + longitudinal / E**2 - 1j * m * beta_cross / (2 * E**2)


def projected_spin(rep: Representation = Representation.STANDARD) -> OperatorTriple:
    """射影スピン 𝓢"""
    return _spin_family(lambda kin: projected_spin_matrices(kin, rep), rep, "Sp")


def projected_oam(rep: Representation = Representation.STANDARD) -> OperatorTriple:
    """射影軌道角運動量 𝓛 = 𝓡 × p"""
    return cross_with_momentum(projected_position(rep), label="Lp")


# ===============================
# NWFW 演算子（閉形式）
# ===============================


def nwfw_position_connection(kin: Kinematics, rep: Representation) -> np.ndarray:
    """NWFW位置 r̃ の行列部（FW表現では 0）"""
    if rep == Representation.FW:
        return np.zeros((3, 4, 4), dtype=complex)
    E, m = kin.E, kin.m
    beta_alpha = np.einsum("ab,kbc->kac", BETA, ALPHA)
    beta_alpha_p = BETA @ alpha_dot(kin.p)
    return (
        _p_cross_spin(kin) / (E * (E + m))
        + 1j * beta_alpha / (2 * E)
        - 1j * np.einsum("k,ab->kab", kin.p, beta_alpha_p) / (2 * E**2 * (E + m))
    )


def nwfw_position(rep: Representation = Representation.STANDARD) -> OperatorTriple:
    """NWFW位置 r̃"""
    return _position_family(lambda kin: nwfw_position_connection(kin, rep), rep, "rt")


def nwfw_spin_matrices(kin: Kinematics, rep: Representation) -> np.ndarray:
    if rep == Representation.FW:
        return SPIN.copy()
    E, m = kin.E, kin.m
    longitudinal = np.einsum("i,ab->iab", kin.p, _p_dot_spin(kin))
    beta_cross = np.einsum("ab,ibc->iac", BETA, _alpha_cross_p(kin))
    return (m / E) * SPIN + longitudinal / (E * (E + m)) - 1j * beta_cross / (2 * E)


def nwfw_spin(rep: Representation = Representation.STANDARD) -> OperatorTriple:
    """NWFWスピン S̃（FW表現では S そのもの）"""
    return _spin_family(lambda kin: nwfw_spin_matrices(kin, rep), rep, "St")


def nwfw_oam(rep: Representation = Representation.STANDARD) -> OperatorTriple:
    """NWFW軌道角運動量 L̃ = r̃ × p"""
    return cross_with_momentum(nwfw_position(rep), label="Lt")


# ===============================
# 構成的ルート：射影と FW 共役
# ===============================


def project_operator(op: MomentumOperator, rel_step: float = 1e-5) -> MomentumOperator:
    """Π⁺ O Π⁺ + Π⁻ O Π⁻ を有限差分で構成

    微分部は Σ± Π± (c_k ∂_k Π±) の接続項を生む。係数 c は変わらない。
    """
    if op.representation != Representation.STANDARD:
        raise RepresentationError("projection is defined in the standard representation")

    def projector_plus(kin: Kinematics) -> np.ndarray:
        return projectors(kin)[0]

    def matrix(kin: Kinematics) -> np.ndarray:
        pp, pm = projectors(kin)
        m = op.matrix(kin)
        out = pp @ m @ pp + pm @ m @ pm
        if not op.is_multiplicative:
            c = op.coeffs(kin)
            d_plus = gradient(projector_plus, kin, rel_step)
            # ∂Π⁻ = -∂Π⁺
            for k in range(3):
                out += c[k] * (pp @ d_plus[k] - pm @ d_plus[k])
        return out

    label = f"P[{op.label}]"
    return replace(op, matrix=MatrixFunction(matrix, label=label), label=label)


class Conjugation(str, Enum):
    """FW 共役の向き"""

    TO_FW = "to_fw"
    FROM_FW = "from_fw"


def fw_conjugate(
    op: MomentumOperator, direction: Conjugation, rel_step: float = 1e-5
) -> MomentumOperator:
    """U O U†（to_fw）または U† O U（from_fw）

    微分部は c_k U ∂_k U†（from_fw では c_k U† ∂_k U）の接続項を生む。
    """
    if direction == Conjugation.TO_FW:
        source, target = Representation.STANDARD, Representation.FW
    else:
        source, target = Representation.FW, Representation.STANDARD
    if op.representation != source:
        raise RepresentationError(
            f"{direction.value} expects a {source.value} operator, got {op.representation.value}"
        )

    def matrix(kin: Kinematics) -> np.ndarray:
        u = fw_unitary(kin)
        left, right = (u, u.conj().T) if direction == Conjugation.TO_FW else (u.conj().T, u)
        out = left @ op.matrix(kin) @ right
        if not op.is_multiplicative:
            c = op.coeffs(kin)
            du = gradient(fw_unitary, kin, rel_step)
            for k in range(3):
                d_right = du[k].conj().T if direction == Conjugation.TO_FW else du[k]
                out += c[k] * (left @ d_right)
        return out

    label = f"{direction.value}[{op.label}]"
    return replace(
        op, matrix=MatrixFunction(matrix, label=label), representation=target, label=label
    )


# ===============================
# 交換子と時間発展
# ===============================


def commutator(
    a: MomentumOperator, b: MomentumOperator, kin: Kinematics, rel_step: float = 1e-5
) -> OperatorValue:
    """[A, B] を p で評価

    [A, B] = (a·∇b - b·∇a)·∇ + a·∇M_B - b·∇M_A + [M_A, M_B]。
    係数がスカラーなので二階微分は打ち消し合う。
    """
    require_same_representation(a, b)
    ca, cb = a.coeffs(kin), b.coeffs(kin)
    ma, mb = a.matrix(kin), b.matrix(kin)
    matrix = ma @ mb - mb @ ma
    coeffs = np.zeros(3, dtype=complex)

    if not a.is_multiplicative:
        d_mb = gradient(b.matrix, kin, rel_step)
        matrix = matrix + np.einsum("j,jab->ab", ca, d_mb)
        if not b.is_multiplicative:
            coeffs = coeffs + np.einsum("j,jk->k", ca, gradient(b.coeffs, kin, rel_step))
    if not b.is_multiplicative:
        d_ma = gradient(a.matrix, kin, rel_step)
        matrix = matrix - np.einsum("j,jab->ab", cb, d_ma)
        if not a.is_multiplicative:
            coeffs = coeffs - np.einsum("j,jk->k", cb, gradient(a.coeffs, kin, rel_step))
    return OperatorValue(coeffs, matrix)


def heisenberg_velocity(op: MomentumOperator, kin: Kinematics, rel_step: float = 1e-5) -> OperatorValue:
    """dO/dt = i[H, O]（H は op と同じ表現）"""
    h = hamiltonian_operator(op.representation)
    return commutator(h, op, kin, rel_step).scaled(1j)


# ===============================
# ベリー接続と曲率
# ===============================


def berry_connection(kin: Kinematics) -> np.ndarray:
    """A_B(p) = p × S / (E(E+m))（𝓡_FW の行列部）"""
    return projected_position_connection(kin, Representation.FW)


def berry_curvature(kin: Kinematics, rel_step: float = 1e-5) -> np.ndarray:
    """F_k = (1/2) ε_kij (∂_i A_j - ∂_j A_i - i[A_i, A_j])

    [𝓡_i, 𝓡_j] = i ε_ijk F_k を満たす規約。
    """
    a = berry_connection(kin)
    da = gradient(berry_connection, kin, rel_step)  # da[i, j] = ∂_i A_j
    out = np.zeros((3, 4, 4), dtype=complex)
    for k in range(3):
        for i in range(3):
            for j in range(3):
                if EPSILON[k, i, j]:
                    term = da[i, j] - da[j, i] - 1j * (a[i] @ a[j] - a[j] @ a[i])
                    out[k] += 0.5 * EPSILON[k, i, j] * term
    return out


def curvature_from_commutators(
    kin: Kinematics, rep: Representation = Representation.FW, rel_step: float = 1e-5
) -> np.ndarray:
    """F_k = -(i/2) ε_kij [𝓡_i, 𝓡_j] の行列部"""
    R = projected_position(rep)
    out = np.zeros((3, 4, 4), dtype=complex)
    for k in range(3):
        for i in range(3):
            for j in range(3):
                if EPSILON[k, i, j]:
                    out[k] += -0.5j * EPSILON[k, i, j] * commutator(R[i], R[j], kin, rel_step).matrix
    return out


# ===============================
# パウリ・ルバンスキー、エネルギー中心、Pryce の q
# ===============================


@dataclass(frozen=True)
class PauliLubanski:
    """パウリ・ルバンスキー4元ベクトル (W⁰, 𝓦)"""

    time: np.ndarray
    space: np.ndarray

    def invariant(self) -> np.ndarray:
        """W⁰² - 𝓦·𝓦（電子状態で -(3/4) m²）"""
        return self.time @ self.time - np.einsum("kab,kbc->ac", self.space, self.space)


def pauli_lubanski(kin: Kinematics) -> PauliLubanski:
    """W⁰ = p·S, 𝓦 = (SH + HS)/2"""
    h = hamiltonian(kin)
    space = np.array([(s @ h + h @ s) / 2 for s in SPIN])
    return PauliLubanski(time=_p_dot_spin(kin), space=space)


def spin_from_pauli_lubanski(kin: Kinematics) -> np.ndarray:
    """𝓢 = 𝓦 H⁻¹"""
    h_inv = inverse_hamiltonian(kin)
    return np.array([w @ h_inv for w in pauli_lubanski(kin).space])


@dataclass(frozen=True)
class CenterOfEnergy:
    """エネルギー中心 N_i = H i∂_i + (i/2) α_i

    微分係数が行列 H になるため MomentumOperator とは別に持つ。
    """

    coefficient_matrix: np.ndarray
    matrices: np.ndarray


def center_of_energy(kin: Kinematics) -> CenterOfEnergy:
    return CenterOfEnergy(coefficient_matrix=hamiltonian(kin), matrices=0.5j * ALPHA)


def pryce_q(rel_step: float = 1e-5) -> OperatorTriple:
    """Pryce の質量中心 q = (H⁻¹N + NH⁻¹)/2

    微分部は i∂、行列部は (H⁻¹M_N + M_N H⁻¹ + H i∂H⁻¹)/2。
    """

    def build(k: int) -> MomentumOperator:
        def matrix(kin: Kinematics) -> np.ndarray:
            h_inv = inverse_hamiltonian(kin)
            n = center_of_energy(kin)
            d_h_inv = gradient(inverse_hamiltonian, kin, rel_step)[k]
            return 0.5 * (h_inv @ n.matrices[k] + n.matrices[k] @ h_inv + 1j * n.coefficient_matrix @ d_h_inv)

        return MomentumOperator(
            matrix=MatrixFunction(matrix, label=f"q_{'xyz'[k]}"),
            coefficients=_unit_coefficient(k),
            label=f"q_{'xyz'[k]}",
        )

    return _triple(build)


# ===============================
# 平面波のスピン期待値
# ===============================


def plane_wave_spin(kin: Kinematics, w) -> np.ndarray:
    """⟨S⟩ = W† S W"""
    bispinor = plane_wave_bispinor(kin, w)
    return np.array([np.vdot(bispinor, s @ bispinor).real for s in SPIN])


def relativistic_spin(kin: Kinematics, w) -> np.ndarray:
    """閉形式 ⟨S⟩ = (m/E)⟨s⟩ + (p·⟨s⟩)p / (E(E+m))"""
    w = np.asarray(w, dtype=complex)
    s = np.array([np.vdot(w, sig @ w).real / 2 for sig in SIGMA])
    E, m = kin.E, kin.m
    return (m / E) * s + (kin.p @ s) * kin.p / (E * (E + m))


def helicity(kin: Kinematics, w) -> float:
    """p̄·⟨S⟩（p = 0 では 0）"""
    if not kin.direction_defined:
        return 0.0
    return float(kin.p_bar @ plane_wave_spin(kin, w))
