"""
恒等式スイート

閉形式と構成的ルートの一致、保存則、交換関係、和則、
固有時間発展、m → 0 の連続性などをランダムな運動量サンプルで判定し、
OperatorReport の列として返します。
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, List, Optional

import numpy as np

from diracops.algebra import (
    ALPHA,
    BETA,
    I4,
    Kinematics,
    Representation,
    fw_unitary,
    hamiltonian,
    inverse_hamiltonian,
    plane_wave_bispinor,
    projectors,
)
from diracops.beams import build_spectrum, nwfw_summary, soi_summary
from diracops.config import BeamParams, RunConfig, SamplingConfig
from diracops.logger import Logger
from diracops.operators import (
    Conjugation,
    OperatorValue,
    berry_curvature,
    canonical_oam,
    canonical_position,
    canonical_spin,
    commutator,
    curvature_from_commutators,
    fw_conjugate,
    hamiltonian_operator,
    heisenberg_velocity,
    momentum_multiplication,
    nwfw_oam,
    nwfw_position,
    nwfw_spin,
    plane_wave_spin,
    project_operator,
    projected_oam,
    projected_position,
    projected_position_connection,
    projected_spin,
    projected_spin_matrices,
    pryce_q,
    relativistic_spin,
    spin_from_pauli_lubanski,
    pauli_lubanski,
    total_angular_momentum,
)
from diracops.reports import OperatorReport

REST_FRAME_REASON = "rest-frame construction: NWFW operators need m > 0"
CYCLIC = ((0, 1, 2), (1, 2, 0), (2, 0, 1))
GENERIC_MOMENTUM = (0.3, -0.4, 1.2)
CONTINUITY_NOTE = "samples with |p| < 1 are rescaled to |p| = 1 before comparing m = 1e-6 with m = 0"


# ===============================
# サンプリング
# ===============================


@dataclass(frozen=True)
class Sample:
    """運動量サンプル1件（平面波スピン用の2成分スピノル付き）"""

    kin: Kinematics
    w: np.ndarray


def sample_kinematics(sampling: SamplingConfig) -> List[Sample]:
    """|p| は対数一様、方向は球面一様、質量は masses を巡回"""
    rng = np.random.default_rng(sampling.seed)
    lo, hi = sampling.p_range
    out = []
    for i in range(sampling.samples):
        magnitude = math.exp(rng.uniform(math.log(lo), math.log(hi)))
        direction = rng.normal(size=3)
        direction /= np.linalg.norm(direction)
        spinor = rng.normal(size=2) + 1j * rng.normal(size=2)
        spinor /= np.linalg.norm(spinor)
        mass = sampling.masses[i % len(sampling.masses)]
        out.append(Sample(kin=Kinematics(magnitude * direction, mass), w=spinor))
    return out


# ===============================
# 偏差の計算
# ===============================


def _relative(actual: OperatorValue, expected: OperatorValue) -> float:
    return actual.deviation(expected) / max(1.0, expected.norm())


def _matrix_value(matrix: np.ndarray) -> OperatorValue:
    return OperatorValue(np.zeros(3, dtype=complex), matrix)


def _worst(values) -> float:
    return max(values) if values else 0.0


def _fw_diagonalization(s: Sample, h: float) -> float:
    u = fw_unitary(s.kin)
    diagonal = u @ hamiltonian(s.kin) @ u.conj().T
    return float(np.max(np.abs(diagonal - s.kin.E * BETA))) / max(1.0, s.kin.E)


def _projector_algebra(s: Sample, h: float) -> float:
    plus, minus = projectors(s.kin)
    return max(
        float(np.max(np.abs(plus @ plus - plus))),
        float(np.max(np.abs(minus @ minus - minus))),
        float(np.max(np.abs(plus @ minus))),
        float(np.max(np.abs(plus + minus - I4))),
    )


def _families_match(
    constructive: Callable[[float], tuple], closed: Callable[[], tuple]
) -> Callable[[Sample, float], float]:
    """3成分の演算子族どうしの最大相対偏差"""

    def deviation(s: Sample, h: float) -> float:
        built, reference = constructive(h), closed()
        return _worst([_relative(built[k].value(s.kin), reference[k].value(s.kin)) for k in range(3)])

    return deviation


def _projected(factory: Callable[[], tuple]) -> Callable[[float], tuple]:
    return lambda h: tuple(project_operator(op, h) for op in factory())


def _conjugated(factory: Callable[[], tuple], direction: Conjugation) -> Callable[[float], tuple]:
    return lambda h: tuple(fw_conjugate(op, direction, h) for op in factory())


def _conserved(factory: Callable[[], tuple]) -> Callable[[Sample, float], float]:
    """‖[H, O_k]‖ / max(1, |p|)"""

    def deviation(s: Sample, h: float) -> float:
        ops = factory()
        hamilton = hamiltonian_operator(ops[0].representation)
        return _worst(
            [commutator(hamilton, op, s.kin, h).norm() / max(1.0, s.kin.p_norm) for op in ops]
        )

    return deviation


def _velocity(factory: Callable[[], tuple], expected: Callable[[Kinematics], np.ndarray]):
    def deviation(s: Sample, h: float) -> float:
        targets = expected(s.kin)
        return _worst(
            [
                _relative(heisenberg_velocity(op, s.kin, h), _matrix_value(targets[k]))
                for k, op in enumerate(factory())
            ]
        )

    return deviation


def _group_velocity(kin: Kinematics) -> np.ndarray:
    h_inv = inverse_hamiltonian(kin)
    return np.array([kin.p[k] * h_inv for k in range(3)])


def _deformed_algebra(factory: Callable[[], tuple]) -> Callable[[Sample, float], float]:
    """[X_i, X_j] = iε_ijk (X_k - (p·𝓢) p_k / E²)"""

    def deviation(s: Sample, h: float) -> float:
        ops = factory()
        spin = projected_spin_matrices(s.kin, ops[0].representation)
        p_dot = np.einsum("k,kab->ab", s.kin.p, spin)
        out = []
        for i, j, k in CYCLIC:
            shift = _matrix_value(p_dot * s.kin.p[k] / s.kin.E**2)
            expected = (ops[k].value(s.kin) - shift).scaled(1j)
            out.append(_relative(commutator(ops[i], ops[j], s.kin, h), expected))
        return _worst(out)

    return deviation


def _canonical_algebra(factory: Callable[[], tuple], abelian: bool = False):
    """[X_i, X_j] = iε_ijk X_k（abelian なら 0）"""

    def deviation(s: Sample, h: float) -> float:
        ops = factory()
        out = []
        for i, j, k in CYCLIC:
            expected = ops[k].value(s.kin).scaled(0.0 if abelian else 1j)
            out.append(_relative(commutator(ops[i], ops[j], s.kin, h), expected))
        return _worst(out)

    return deviation


def _curvature_routes(s: Sample, h: float) -> float:
    numeric = curvature_from_commutators(s.kin, Representation.FW, h)
    direct = berry_curvature(s.kin, h)
    scale = max(1.0, float(np.max(np.abs(direct))))
    return float(np.max(np.abs(numeric - direct))) / scale


def _sum_rule(spin: Callable[[], tuple], oam: Callable[[], tuple]):
    def deviation(s: Sample, h: float) -> float:
        S, L = spin(), oam()
        J = total_angular_momentum(S[0].representation)
        return _worst(
            [_relative((S[k] + L[k]).value(s.kin), J[k].value(s.kin)) for k in range(3)]
        )

    return deviation


def _projection_invariance(s: Sample, h: float) -> float:
    ops = list(momentum_multiplication()) + [total_angular_momentum()[2]]
    return _worst([_relative(project_operator(op, h).value(s.kin), op.value(s.kin)) for op in ops])


def _massless_continuity(s: Sample, h: float) -> float:
    """m = 1e-6 と m = 0 の行列部の差（|p| < 1 のサンプルは |p| = 1 に伸ばす）"""
    p = s.kin.p * max(1.0, 1.0 / s.kin.p_norm)
    light, massless = Kinematics(p, 1e-6), Kinematics(p, 0.0)
    out = []
    for rep in Representation:
        out.append(
            float(
                np.max(
                    np.abs(
                        projected_position_connection(light, rep)
                        - projected_position_connection(massless, rep)
                    )
                )
            )
        )
        out.append(
            float(np.max(np.abs(projected_spin_matrices(light, rep) - projected_spin_matrices(massless, rep))))
        )
    return _worst(out)


def _pauli_lubanski_spin(s: Sample, h: float) -> float:
    expected = projected_spin_matrices(s.kin, Representation.STANDARD)
    return float(np.max(np.abs(spin_from_pauli_lubanski(s.kin) - expected)))


def _pauli_lubanski_invariant(s: Sample, h: float) -> float:
    invariant = pauli_lubanski(s.kin).invariant()
    basis = [plane_wave_bispinor(s.kin, w) for w in ((1.0, 0.0), (0.0, 1.0))]
    block = np.array([[np.vdot(a, invariant @ b) for b in basis] for a in basis])
    target = -0.75 * s.kin.m**2 * np.eye(2)
    return float(np.max(np.abs(block - target))) / max(1.0, s.kin.E**2)


def _pryce(s: Sample, h: float) -> float:
    q, R = pryce_q(h), projected_position()
    return _worst([_relative(q[k].value(s.kin), R[k].value(s.kin)) for k in range(3)])


def _plane_wave_spin(s: Sample, h: float) -> float:
    return float(np.max(np.abs(plane_wave_spin(s.kin, s.w) - relativistic_spin(s.kin, s.w))))


@dataclass(frozen=True)
class IdentityCheck:
    """サンプルごとに評価する恒等式

    Attributes:
        identity: レポート名
        tolerance: ToleranceConfig のフィールド名
        deviation: (サンプル, 相対ステップ) → 偏差
        massive_only: m = 0 のサンプルを除外する
        note: レポートに添える補足
    """

    identity: str
    tolerance: str
    deviation: Callable[[Sample, float], float]
    massive_only: bool = False
    note: Optional[str] = None


def _fw(factory):
    return lambda: factory(Representation.FW)


IDENTITY_CHECKS: List[IdentityCheck] = [
    IdentityCheck("fw.diagonalization", "closed_form", _fw_diagonalization),
    IdentityCheck("projectors.algebra", "closed_form", _projector_algebra),
    IdentityCheck("plane_wave.spin", "closed_form", _plane_wave_spin),
    # 閉形式 vs 構成的ルート
    IdentityCheck("table1.R.projection", "table1", _families_match(_projected(canonical_position), projected_position)),
    IdentityCheck("table1.Sp.projection", "table1", _families_match(_projected(canonical_spin), projected_spin)),
    IdentityCheck("table1.Lp.projection", "table1", _families_match(_projected(canonical_oam), projected_oam)),
    IdentityCheck(
        "table1.R.fw",
        "table1",
        _families_match(_conjugated(projected_position, Conjugation.TO_FW), _fw(projected_position)),
    ),
    IdentityCheck(
        "table1.Sp.fw",
        "table1",
        _families_match(_conjugated(projected_spin, Conjugation.TO_FW), _fw(projected_spin)),
    ),
    IdentityCheck(
        "table1.Lp.fw",
        "table1",
        _families_match(_conjugated(projected_oam, Conjugation.TO_FW), _fw(projected_oam)),
    ),
    IdentityCheck(
        "table1.rt.standard",
        "table1",
        _families_match(_conjugated(_fw(canonical_position), Conjugation.FROM_FW), nwfw_position),
        massive_only=True,
    ),
    IdentityCheck(
        "table1.St.standard",
        "table1",
        _families_match(_conjugated(_fw(canonical_spin), Conjugation.FROM_FW), nwfw_spin),
        massive_only=True,
    ),
    IdentityCheck(
        "table1.Lt.standard",
        "table1",
        _families_match(_conjugated(_fw(canonical_oam), Conjugation.FROM_FW), nwfw_oam),
        massive_only=True,
    ),
    IdentityCheck(
        "table1.rt.fw",
        "table1",
        _families_match(_conjugated(nwfw_position, Conjugation.TO_FW), _fw(canonical_position)),
        massive_only=True,
    ),
    IdentityCheck(
        "table1.St.fw",
        "table1",
        _families_match(_conjugated(nwfw_spin, Conjugation.TO_FW), _fw(canonical_spin)),
        massive_only=True,
    ),
    # 保存則
    IdentityCheck("conservation.J", "table1", _conserved(total_angular_momentum)),
    IdentityCheck("conservation.Sp", "table1", _conserved(projected_spin)),
    IdentityCheck("conservation.Lp", "table1", _conserved(projected_oam)),
    IdentityCheck("conservation.St", "table1", _conserved(nwfw_spin), massive_only=True),
    IdentityCheck("conservation.Lt", "table1", _conserved(nwfw_oam), massive_only=True),
    # 固有時間発展
    IdentityCheck("velocity.r", "table1", _velocity(canonical_position, lambda kin: ALPHA)),
    IdentityCheck("velocity.R", "table1", _velocity(projected_position, _group_velocity)),
    IdentityCheck("velocity.rt", "table1", _velocity(nwfw_position, _group_velocity), massive_only=True),
    # 交換関係
    IdentityCheck("commutators.Sp", "finite_difference", _deformed_algebra(projected_spin)),
    IdentityCheck("commutators.Lp", "finite_difference", _deformed_algebra(projected_oam)),
    IdentityCheck(
        "commutators.rt", "finite_difference", _canonical_algebra(nwfw_position, abelian=True), massive_only=True
    ),
    IdentityCheck("commutators.St", "finite_difference", _canonical_algebra(nwfw_spin), massive_only=True),
    IdentityCheck("commutators.Lt", "finite_difference", _canonical_algebra(nwfw_oam), massive_only=True),
    IdentityCheck("curvature.routes", "finite_difference", _curvature_routes),
    # 和則・射影の不変量
    IdentityCheck("sum_rule.canonical", "closed_form", _sum_rule(canonical_spin, canonical_oam)),
    IdentityCheck("sum_rule.projected", "closed_form", _sum_rule(projected_spin, projected_oam)),
    IdentityCheck("sum_rule.nwfw", "closed_form", _sum_rule(nwfw_spin, nwfw_oam), massive_only=True),
    IdentityCheck("projection.p_and_J", "table1", _projection_invariance),
    IdentityCheck(
        "massless.continuity",
        "continuity",
        _massless_continuity,
        note=CONTINUITY_NOTE,
    ),
    # パウリ・ルバンスキーと Pryce の q
    IdentityCheck("pauli_lubanski.spin", "closed_form", _pauli_lubanski_spin),
    IdentityCheck("pauli_lubanski.invariant", "eigen", _pauli_lubanski_invariant),
    IdentityCheck("pryce_q", "table1", _pryce),
]


# ===============================
# 一点・ビームでの判定
# ===============================


def _non_conservation(tolerance: float) -> OperatorReport:
    """一般の p で ‖[H, S_i]‖ と ‖[H, L_i]‖ が有限であること（tolerance は下限）"""
    kin = Kinematics(np.array(GENERIC_MOMENTUM), 1.0)
    hamilton = hamiltonian_operator()
    spin = max(commutator(hamilton, op, kin).norm() for op in canonical_spin())
    oam = max(commutator(hamilton, op, kin).norm() for op in canonical_oam())
    value = min(spin, oam)
    return OperatorReport(
        identity="nonconservation.S_L",
        tolerance=tolerance,
        max_deviation=value,
        samples=1,
        passed=value > tolerance,
        note="lower bound: max_i |[H,S_i]| and max_i |[H,L_i]| must exceed tolerance",
    )


def _curvature_symbol(tolerance: float, rel_step: float) -> OperatorReport:
    """曲率が -𝓢/E² と -S/E² のどちらに一致するかを記録"""
    kin = Kinematics(np.array(GENERIC_MOMENTUM), 1.0)
    curvature = curvature_from_commutators(kin, Representation.FW, rel_step)
    projected = -projected_spin_matrices(kin, Representation.FW) / kin.E**2
    canonical = -np.array([op.matrix(kin) for op in canonical_spin()]) / kin.E**2
    full = float(np.max(np.abs(curvature - projected)))
    fw_block = float(np.max(np.abs((curvature - canonical)[:, :2, :2])))

    u = fw_unitary(kin)
    plus = projectors(kin)[0]
    standard = np.array([u.conj().T @ f @ u for f in curvature])
    electron = float(
        np.max(np.abs(np.array([plus @ (f - c) @ plus for f, c in zip(standard, canonical)])))
    )
    note = (
        f"matches -Sp/E^2 as a full operator (deviation {full:.3g}); "
        f"-S/E^2 differs on the FW electron block by {fw_block:.3g} "
        f"and agrees on the standard electron subspace within {electron:.3g}"
    )
    return OperatorReport(
        identity="curvature.spin_symbol",
        tolerance=tolerance,
        max_deviation=full,
        samples=1,
        passed=full <= tolerance,
        note=note,
    )


def _beam_reports(config: RunConfig, massless: bool) -> List[OperatorReport]:
    """ビーム上の期待値の一致（正準＝射影）と不一致（NWFW）"""
    tolerance = config.tolerances.quadrature
    params = BeamParams(mass=0.0 if massless else 1.0)
    spectrum = build_spectrum(params)
    canonical, projected = soi_summary(spectrum)
    reports = [
        OperatorReport.from_deviations(
            "beam.expectation_equality",
            [abs(canonical.Sz - projected.Sz), abs(canonical.Lz - projected.Lz)],
            tolerance,
        )
    ]
    if massless:
        reports.append(OperatorReport.skip("beam.nwfw_inequality", REST_FRAME_REASON))
        return reports

    standard, _ = nwfw_summary(spectrum)
    w = params.spinor
    s_z = (abs(w[0]) ** 2 - abs(w[1]) ** 2) / 2
    gap = abs(standard.Sz - projected.Sz)
    reports.append(
        OperatorReport(
            identity="beam.nwfw_inequality",
            tolerance=tolerance,
            max_deviation=abs(standard.Sz - s_z),
            samples=params.n_phi,
            passed=abs(standard.Sz - s_z) <= tolerance and gap > 1e-3,
            note=f"NWFW Sz keeps the paraxial value; gap to projected Sz is {gap:.6g}",
        )
    )
    return reports


# ===============================
# スイート実行
# ===============================


def _evaluate(
    check: IdentityCheck,
    samples: List[Sample],
    config: RunConfig,
    executor: ThreadPoolExecutor,
) -> OperatorReport:
    tolerance = getattr(config.tolerances, check.tolerance)
    selected = [s for s in samples if s.kin.m > 0] if check.massive_only else samples
    if not selected:
        return OperatorReport.skip(check.identity, REST_FRAME_REASON)
    rel_step = config.sampling.fd_step
    deviations = list(executor.map(lambda s: check.deviation(s, rel_step), selected))
    return OperatorReport.from_deviations(check.identity, deviations, tolerance, note=check.note)


def run_table1(config: RunConfig, logger: Optional[Logger] = None) -> List[OperatorReport]:
    """全恒等式を評価する

    サンプル順は executor.map が保つので、スレッド数に関わらず結果は同じ。
    """
    samples = sample_kinematics(config.sampling)
    massless = all(m == 0 for m in config.sampling.masses)
    reports: List[OperatorReport] = []
    with ThreadPoolExecutor(max_workers=config.sampling.threads) as executor:
        for check in IDENTITY_CHECKS:
            report = _evaluate(check, samples, config, executor)
            if logger:
                logger.report(report)
            reports.append(report)

    extra = [
        _non_conservation(0.1),
        _curvature_symbol(config.tolerances.finite_difference, config.sampling.fd_step),
        *_beam_reports(config, massless),
    ]
    for report in extra:
        if logger:
            logger.report(report)
    return reports + extra


# ===============================
# 表のレイアウト
# ===============================

TABLE1_COLUMNS = ("standard", "FW", "conserved", "velocity", "commutators")

# 行は演算子ファミリー、列は表現と性質
TABLE1_ROWS = {
    "r": {"velocity": "velocity.r"},
    "𝓡": {"standard": "table1.R.projection", "FW": "table1.R.fw", "velocity": "velocity.R"},
    "𝓢": {
        "standard": "table1.Sp.projection",
        "FW": "table1.Sp.fw",
        "conserved": "conservation.Sp",
        "commutators": "commutators.Sp",
    },
    "𝓛": {
        "standard": "table1.Lp.projection",
        "FW": "table1.Lp.fw",
        "conserved": "conservation.Lp",
        "commutators": "commutators.Lp",
    },
    "r̃": {
        "standard": "table1.rt.standard",
        "FW": "table1.rt.fw",
        "velocity": "velocity.rt",
        "commutators": "commutators.rt",
    },
    "S̃": {
        "standard": "table1.St.standard",
        "FW": "table1.St.fw",
        "conserved": "conservation.St",
        "commutators": "commutators.St",
    },
    "L̃": {
        "standard": "table1.Lt.standard",
        "conserved": "conservation.Lt",
        "commutators": "commutators.Lt",
    },
}


def table1_layout(
    reports: List[OperatorReport],
) -> tuple[List[tuple[str, dict[str, Optional[OperatorReport]]]], List[OperatorReport]]:
    """レポートをファミリー×列の表と、それ以外の性質の行に振り分ける"""
    by_identity = {r.identity: r for r in reports}
    placed = set()
    grid = []
    for label, cells in TABLE1_ROWS.items():
        row = {column: by_identity.get(cells[column]) if column in cells else None for column in TABLE1_COLUMNS}
        placed.update(cells.values())
        grid.append((label, row))
    return grid, [r for r in reports if r.identity not in placed]
