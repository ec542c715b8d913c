"""
diracops CLI エントリーポイント

Typerベースのコマンドラインインターフェース
"""

import math
from enum import Enum
from pathlib import Path
from typing import List, NoReturn, Optional

import numpy as np
import typer
from rich.console import Console
from rich.table import Table

from diracops.beams import (
    HALL_NOTES,
    boost_spectrum,
    boosted_centroid,
    build_spectrum,
    hall_shift_prediction,
    hall_shift_reference,
    magnetic_moment,
    nwfw_summary,
    soi_summary,
    spin_closed_form,
    zitterbewegung_trace,
)
from diracops.config import BeamParams, ProfileKind, ProfileParams, RunConfig
from diracops.logger import Logger
from diracops.pauli import (
    PauliPacket,
    QuadraticPotential,
    gaussian_well,
    pauli_halving_study,
    r_squared_expansion,
    soi_potential_term,
)
from diracops.reports import (
    OperatorReport,
    Report,
    all_passed,
    reports_to_csv,
    reports_to_json,
    rows_to_csv,
    rows_to_json,
    summaries_to_csv,
    summaries_to_json,
    write_outputs,
)
from diracops.table1 import TABLE1_COLUMNS, run_table1, table1_layout

app = typer.Typer(
    name="diracops",
    help="ディラック電子の射影演算子・NWFW演算子の数値検証ツール",
    no_args_is_help=True,
)

LOG_DIR = Path("./.logs")
SPIN_UP = (1.0, 0.0, 0.0, 0.0)
SPIN_DOWN = (0.0, 0.0, 1.0, 0.0)
# 近軸の環状ガウスビーム（hall / moment の既定）
PARAXIAL_DEFAULTS = {
    "theta0": 0.05,
    "profile": ProfileParams(kind=ProfileKind.GAUSSIAN_ANNULUS).model_dump(),
}

err_console = Console(stderr=True)


class Mix(str, Enum):
    """ジッターベヴェーグング波束の電子・陽電子の混合"""

    PURE = "pure"
    MIXED = "mixed"


# ===============================
# 共通処理
# ===============================


def _console(out: Optional[Path]) -> Console:
    # 結果を標準出力に流すときは表を stderr へ
    return Console(stderr=out is None)


def _abort(logger: Logger, error: Exception) -> NoReturn:
    logger.error(str(error))
    err_console.print(f"[red]❌ Error: {error}[/red]")
    raise typer.Exit(2)


def _emit(out: Optional[Path], stem: str, csv_text: str, json_text: str, stdout_csv: bool, console: Console):
    """--out があればファイルへ、なければ標準出力へ"""
    if out is None:
        typer.echo(csv_text if stdout_csv else json_text + "\n", nl=False)
        return
    console.print("\n[dim]Outputs:[/dim]")
    for path in write_outputs(out, stem, csv_text, json_text):
        console.print(f"  • {path}")


def _finish(console: Console, failed: int) -> None:
    if failed:
        console.print(f"[red]❌ {failed} check(s) outside tolerance[/red]")
        raise typer.Exit(1)
    console.print("[green]✅ All checks passed[/green]")


def _finish_reports(console: Console, reports: List[Report]) -> None:
    if all_passed(reports):
        console.print("[green]✅ All checks passed[/green]")
        return
    _finish(console, sum(not r.passed for r in reports))


def _status(report: Optional[Report]) -> str:
    if report is None:
        return ""
    if report.skipped:
        return "⏭"
    return f"{'✅' if report.passed else '❌'} {report.max_deviation:.1e}"


def _table1_grid(reports: List[Report]) -> tuple[Table, List[Report]]:
    """ファミリー×列の表と残りのレポート"""
    grid, rest = table1_layout(reports)
    table = Table(title="table1: operator families")
    table.add_column("operator")
    for column in TABLE1_COLUMNS:
        table.add_column(column, justify="center")
    for label, row in grid:
        table.add_row(label, *[_status(row[column]) for column in TABLE1_COLUMNS])
    return table, rest


def _relative_error(value: float, reference: float) -> float:
    return abs(value - reference) / abs(reference) if reference else abs(value)


def _report_table(title: str, reports: List[Report]) -> Table:
    table = Table(title=title)
    table.add_column("identity")
    table.add_column("tolerance", justify="right")
    table.add_column("max deviation", justify="right")
    table.add_column("samples", justify="right")
    table.add_column("status", justify="center")
    for r in reports:
        status = "⏭ skipped" if r.skipped else ("✅" if r.passed else "❌")
        table.add_row(r.identity, f"{r.tolerance:.1e}", f"{r.max_deviation:.3e}", str(r.samples), status)
    return table


def _beam_params(
    beam: Optional[Path],
    defaults: Optional[dict] = None,
    spin_up: Optional[bool] = None,
    profile: Optional[ProfileKind] = None,
    **flags,
) -> BeamParams:
    """beam.json（なければコマンド既定値）にフラグを上書き"""
    base = BeamParams.load(beam).model_dump() if beam else {**BeamParams().model_dump(), **(defaults or {})}
    updates = {k: v for k, v in flags.items() if v is not None}
    if spin_up is not None:
        updates["w"] = SPIN_UP if spin_up else SPIN_DOWN
    if profile is not None:
        updates["profile"] = {**base["profile"], "kind": profile}
    return BeamParams(**{**base, **updates})


def _s_z(params: BeamParams) -> float:
    w = params.spinor
    return float(abs(w[0]) ** 2 - abs(w[1]) ** 2) / 2


# ===============================
# コマンド
# ===============================


@app.command()
def table1(
    config: Optional[Path] = typer.Option(None, "--config", help="許容誤差ファイル（YAML / JSON）"),
    samples: Optional[int] = typer.Option(None, "--samples", help="運動量サンプル数"),
    seed: Optional[int] = typer.Option(None, "--seed", help="乱数シード"),
    mass: Optional[float] = typer.Option(None, "--mass", help="質量を1つに固定"),
    out: Optional[Path] = typer.Option(None, "--out", help="出力ディレクトリ（省略時は標準出力）"),
    log_dir: Path = typer.Option(LOG_DIR, "--log-dir", help="ログディレクトリ"),
    json_output: bool = typer.Option(False, "--json", help="ログをJSON Linesで出力"),
):
    """閉形式と構成的ルートの一致・保存則・交換関係を検証"""
    logger = Logger(log_dir, command="table1", json_mode=json_output)
    console = _console(out)
    try:
        run_config = RunConfig.load(config).with_overrides(samples=samples, seed=seed, mass=mass)
        logger.info(
            "Starting identity suite",
            samples=run_config.sampling.samples,
            seed=run_config.sampling.seed,
            threads=run_config.sampling.threads,
        )
        reports = run_table1(run_config, logger)
    except ValueError as e:
        _abort(logger, e)

    failed = [r for r in reports if not r.passed]
    logger.info(
        "Identity suite finished",
        samples=run_config.sampling.samples,
        failed=len(failed),
        max_deviation=max(r.max_deviation for r in reports),
    )
    grid, rest = _table1_grid(reports)
    console.print(grid)
    console.print(_report_table("table1: properties", rest))
    _emit(out, "table1", reports_to_csv(reports), reports_to_json(reports), False, console)
    if out is not None:
        # 実効設定
        run_config.save(out / "table1_config.yaml")
    _finish_reports(console, reports)


@app.command()
def beam(
    beam_file: Optional[Path] = typer.Option(None, "--beam", help="ビーム条件（beam.json）"),
    energy: Optional[float] = typer.Option(None, "--energy", help="エネルギー E"),
    mass: Optional[float] = typer.Option(None, "--mass", help="質量 m"),
    theta0: Optional[float] = typer.Option(None, "--theta0", help="円錐角 θ₀"),
    ell: Optional[int] = typer.Option(None, "--ell", help="渦度 ℓ"),
    spin_up: Optional[bool] = typer.Option(None, "--spin-up/--spin-down", help="静止系スピン"),
    profile: Optional[ProfileKind] = typer.Option(None, "--profile", help="スペクトル形状"),
    n_phi: Optional[int] = typer.Option(None, "--n-phi", help="方位角サンプル数"),
    config: Optional[Path] = typer.Option(None, "--config", help="許容誤差ファイル"),
    out: Optional[Path] = typer.Option(None, "--out", help="出力ディレクトリ（省略時は標準出力）"),
    log_dir: Path = typer.Option(LOG_DIR, "--log-dir", help="ログディレクトリ"),
    json_output: bool = typer.Option(False, "--json", help="ログをJSON Linesで出力"),
):
    """ベッセルビーム上の ⟨S_z⟩, ⟨L_z⟩, ⟨J_z⟩ を演算子ファミリーごとに比較"""
    logger = Logger(log_dir, command="beam", json_mode=json_output)
    console = _console(out)
    try:
        tolerance = RunConfig.load(config).tolerances.quadrature
        params = _beam_params(
            beam_file,
            spin_up=spin_up,
            profile=profile,
            energy=energy,
            mass=mass,
            theta0=theta0,
            ell=ell,
            n_phi=n_phi,
        )
        logger.info("Sampling beam spectrum", **params.model_dump(mode="json"))
        spectrum = build_spectrum(params)
        summaries = soi_summary(spectrum) + nwfw_summary(spectrum)
    except ValueError as e:
        _abort(logger, e)

    s_z = _s_z(params)
    j_z = params.ell + s_z
    checks = [abs(s.Jz - j_z) for s in summaries]
    checks.append(abs(summaries[0].Sz - summaries[1].Sz))
    checks += [abs(s.Sz - s_z) for s in summaries[2:]]
    if spectrum.is_ring:
        closed_sz, closed_lz = spin_closed_form(params)
        checks += [abs(summaries[0].Sz - closed_sz), abs(summaries[0].Lz - closed_lz)]
    failed = sum(c > tolerance for c in checks)
    logger.info("Beam summary finished", failed=failed, max_deviation=max(checks))

    table = Table(title=f"E={params.energy:g}, m={params.mass:g}, θ₀={params.theta0:.4g}, ℓ={params.ell}")
    for column in ("family", "Sz", "Lz", "Jz", "Delta"):
        table.add_column(column, justify="right" if column != "family" else "left")
    for s in summaries:
        table.add_row(s.family, f"{s.Sz:.10f}", f"{s.Lz:.10f}", f"{s.Jz:.10f}", f"{s.Delta:.10f}")
    console.print(table)
    _emit(out, "beam", summaries_to_csv(summaries), summaries_to_json(summaries), True, console)
    _finish(console, failed)


@app.command()
def hall(
    v: float = typer.Option(0.1, "--v", help="横方向ブースト速度（x 方向）"),
    beam_file: Optional[Path] = typer.Option(None, "--beam", help="ビーム条件（beam.json）"),
    energy: Optional[float] = typer.Option(None, "--energy", help="エネルギー E"),
    mass: Optional[float] = typer.Option(None, "--mass", help="質量 m"),
    theta0: Optional[float] = typer.Option(None, "--theta0", help="円錐角 θ₀"),
    ell: Optional[int] = typer.Option(None, "--ell", help="渦度 ℓ"),
    spin_up: Optional[bool] = typer.Option(None, "--spin-up/--spin-down", help="静止系スピン"),
    n_grid: int = typer.Option(512, "--n-grid", help="横運動量グリッド"),
    config: Optional[Path] = typer.Option(None, "--config", help="許容誤差ファイル"),
    out: Optional[Path] = typer.Option(None, "--out", help="出力ディレクトリ（省略時は標準出力）"),
    log_dir: Path = typer.Option(LOG_DIR, "--log-dir", help="ログディレクトリ"),
    json_output: bool = typer.Option(False, "--json", help="ログをJSON Linesで出力"),
):
    """ブースト系での確率重心・エネルギー重心の横ずれ

    ルートごとに1次の予測値と比べて判定し、基準値 v⟨J_z⟩/2E・v⟨J_z⟩/E との差も並べる。
    """
    logger = Logger(log_dir, command="hall", json_mode=json_output)
    console = _console(out)
    velocity = (v, 0.0, 0.0)
    try:
        tolerances = RunConfig.load(config).tolerances
        params = _beam_params(
            beam_file, PARAXIAL_DEFAULTS, spin_up=spin_up, energy=energy, mass=mass, theta0=theta0, ell=ell
        )
        reference = hall_shift_reference(params, velocity)
        boosted = boost_spectrum(build_spectrum(params), velocity)
        shifts = {
            (route, kind): boosted_centroid(params, velocity, kind, n_grid, route)
            for route, kind in HALL_NOTES
        }
    except ValueError as e:
        _abort(logger, e)

    header = [
        "centroid",
        "route",
        "x",
        "y",
        "predicted_y",
        "reference_y",
        "relative_error",
        "reference_error",
        "note",
    ]
    rows = []
    for (route, kind), shift in shifts.items():
        y = float(shift[1])
        predicted = hall_shift_prediction(params, velocity, kind, route)
        target = reference[kind.value]
        rows.append(
            [
                kind.value,
                route.value,
                float(shift[0]),
                y,
                predicted,
                target,
                _relative_error(y, predicted),
                _relative_error(y, target),
                HALL_NOTES[(route, kind)],
            ]
        )
    shell = boosted.mass_shell_residual()
    failed = sum(row[6] > tolerances.relative for row in rows) + int(shell > tolerances.closed_form)
    logger.info(
        "Hall shift finished",
        failed=failed,
        mass_shell_residual=shell,
        boosted_energy=boosted.mean_energy(),
        reference=reference,
    )

    table = Table(title=f"v = {v:g} x̂, ℓ = {params.ell}, s_z = {_s_z(params):+g}")
    for column in header[:-1]:
        table.add_column(column, justify="left" if column in ("centroid", "route") else "right")
    for row in rows:
        table.add_row(row[0], row[1], *[f"{x:.6g}" for x in row[2:8]])
    console.print(table)
    console.print(
        f"[dim]reference_y: v⟨J_z⟩/2E = {reference['probability']:.6g} (probability), "
        f"v⟨J_z⟩/E = {reference['energy']:.6g} (energy); pass/fail uses predicted_y[/dim]"
    )
    console.print(f"[dim]mass-shell residual of boosted components: {shell:.2e}[/dim]")
    _emit(out, "hall", rows_to_csv(header, rows), rows_to_json(header, rows), True, console)
    _finish(console, failed)


@app.command()
def moment(
    beam_file: Optional[Path] = typer.Option(None, "--beam", help="ビーム条件（beam.json）"),
    energy: Optional[float] = typer.Option(None, "--energy", help="エネルギー E"),
    mass: Optional[float] = typer.Option(None, "--mass", help="質量 m"),
    theta0: Optional[float] = typer.Option(None, "--theta0", help="円錐角 θ₀"),
    ell: Optional[int] = typer.Option(None, "--ell", help="渦度 ℓ"),
    spin_up: Optional[bool] = typer.Option(None, "--spin-up/--spin-down", help="静止系スピン"),
    unpolarized: bool = typer.Option(False, "--unpolarized", help="スピン平均"),
    n_grid: int = typer.Option(512, "--n-grid", help="横運動量グリッド"),
    config: Optional[Path] = typer.Option(None, "--config", help="許容誤差ファイル"),
    out: Optional[Path] = typer.Option(None, "--out", help="出力ディレクトリ（省略時は標準出力）"),
    log_dir: Path = typer.Option(LOG_DIR, "--log-dir", help="ログディレクトリ"),
    json_output: bool = typer.Option(False, "--json", help="ログをJSON Linesで出力"),
):
    """磁気モーメント ⟨(r × α)_z⟩ を (ℓ + 2s_z)/E と比較"""
    logger = Logger(log_dir, command="moment", json_mode=json_output)
    console = _console(out)
    try:
        tolerance = RunConfig.load(config).tolerances.moment
        params = _beam_params(
            beam_file, PARAXIAL_DEFAULTS, spin_up=spin_up, energy=energy, mass=mass, theta0=theta0, ell=ell
        )
        if unpolarized:
            states = {
                "up": params.model_copy(update={"w": SPIN_UP}),
                "down": params.model_copy(update={"w": SPIN_DOWN}),
            }
        else:
            states = {"polarized": params}
        values = {name: magnetic_moment(p, n_grid) for name, p in states.items()}
    except ValueError as e:
        _abort(logger, e)

    E = params.energy
    header = ["state", "moment", "E_times_moment", "reference"]
    rows = [[name, values[name], E * values[name], (p.ell + 2 * _s_z(p)) / E] for name, p in states.items()]
    if unpolarized:
        rows.append(["unpolarized", float(np.mean(list(values.values()))), E * float(np.mean(list(values.values()))), params.ell / E])
    checked = rows[-1:] if unpolarized else rows
    failed = sum(_relative_error(row[1], row[3]) > tolerance for row in checked)
    logger.info("Magnetic moment finished", failed=failed)

    table = Table(title=f"θ₀ = {params.theta0:.4g}, ℓ = {params.ell}, E = {E:g}")
    for column in header:
        table.add_column(column, justify="right" if column != "state" else "left")
    for row in rows:
        table.add_row(row[0], *[f"{x:.6g}" for x in row[1:]])
    console.print(table)
    _emit(out, "moment", rows_to_csv(header, rows), rows_to_json(header, rows), True, console)
    _finish(console, failed)


@app.command()
def zitter(
    p: float = typer.Option(1.0, "--p", help="波束中心の運動量（z 方向）"),
    mass: float = typer.Option(1.0, "--mass", help="質量 m"),
    mix: Mix = typer.Option(Mix.MIXED, "--mix", help="pure: 電子のみ / mixed: 電子+陽電子"),
    t_max: float = typer.Option(40.0, "--t-max", help="追跡時間"),
    steps: int = typer.Option(512, "--steps", help="時刻点の数"),
    width: float = typer.Option(1e-3, "--width", help="運動量幅"),
    config: Optional[Path] = typer.Option(None, "--config", help="許容誤差ファイル"),
    out: Optional[Path] = typer.Option(None, "--out", help="出力ディレクトリ（省略時は標準出力）"),
    log_dir: Path = typer.Option(LOG_DIR, "--log-dir", help="ログディレクトリ"),
    json_output: bool = typer.Option(False, "--json", help="ログをJSON Linesで出力"),
):
    """正準位置と射影位置の重心の時間発展（ジッターベヴェーグング）"""
    logger = Logger(log_dir, command="zitter", json_mode=json_output)
    console = _console(out)
    coefficients = (1.0, 0.0) if mix == Mix.PURE else (1 / math.sqrt(2), 1 / math.sqrt(2))
    try:
        tolerance = RunConfig.load(config).tolerances.relative
        times = np.linspace(0.0, t_max, steps)
        trace = zitterbewegung_trace((0.0, 0.0, p), mass, coefficients, times, width=width)
    except ValueError as e:
        _abort(logger, e)

    checks = [trace.projected_oscillation < 1e-6]
    if mix == Mix.MIXED:
        checks.append(_relative_error(trace.frequency, trace.expected_frequency) <= tolerance)
    else:
        checks.append(trace.oscillation < 1e-6)
    failed = checks.count(False)
    summary = {
        "slope": trace.slope,
        "projected_slope": trace.projected_slope,
        "oscillation": trace.oscillation,
        "projected_oscillation": trace.projected_oscillation,
        "frequency": trace.frequency,
        "expected_frequency": trace.expected_frequency,
    }
    logger.info("Zitterbewegung trace finished", failed=failed, **summary)

    table = Table(title=f"mix = {mix.value}, p = {p:g}, m = {mass:g}")
    table.add_column("quantity")
    table.add_column("value", justify="right")
    for key, value in summary.items():
        table.add_row(key, f"{value:.6g}")
    console.print(table)
    header = ["t", "canonical", "projected"]
    rows = [[float(t), float(a), float(b)] for t, a, b in zip(trace.times, trace.canonical, trace.projected)]
    _emit(out, "zitter", rows_to_csv(header, rows), rows_to_json(list(summary), [list(summary.values())]), True, console)
    _finish(console, failed)


@app.command()
def pauli(
    mass: float = typer.Option(1.0, "--mass", help="質量 m"),
    width: float = typer.Option(0.05, "--width", help="波束幅（m 単位）"),
    v2: float = typer.Option(0.5, "--v2", help="ポテンシャル V = v2 r² の係数"),
    seed: int = typer.Option(12345, "--seed", help="乱数シード"),
    config: Optional[Path] = typer.Option(None, "--config", help="許容誤差ファイル"),
    out: Optional[Path] = typer.Option(None, "--out", help="出力ディレクトリ（省略時は標準出力）"),
    log_dir: Path = typer.Option(LOG_DIR, "--log-dir", help="ログディレクトリ"),
    json_output: bool = typer.Option(False, "--json", help="ログをJSON Linesで出力"),
):
    """非相対論極限：𝓡_FW² のSOI項とパウリ波動関数の対応"""
    logger = Logger(log_dir, command="pauli", json_mode=json_output)
    console = _console(out)
    try:
        tolerances = RunConfig.load(config).tolerances
        potential = QuadraticPotential(v2=v2)
        comparisons = [
            soi_potential_term(potential, PauliPacket(mass=mass, width=width * mass, w=w))
            for w in ((1.0, 0.0), (0.0, 1.0))
        ]
        sampled = soi_potential_term(gaussian_well(v2), PauliPacket(mass=mass, width=width * mass))
        reports: List[Report] = [
            r_squared_expansion(m=mass),
            pauli_halving_study(m=mass, seed=seed),
        ]
    except ValueError as e:
        _abort(logger, e)

    up, down = comparisons
    reports.append(
        OperatorReport.from_deviations(
            "pauli.soi_potential",
            [c.relative_error for c in comparisons],
            tolerances.soi,
            note=f"correction up={up.correction:.6g}, down={down.correction:.6g}",
        )
    )
    reports.append(
        OperatorReport.from_deviations(
            "pauli.soi_antisymmetry",
            [abs(up.correction + down.correction) / max(abs(up.correction), 1e-300)],
            tolerances.quadrature,
        )
    )
    reports.append(
        OperatorReport.from_deviations(
            "pauli.soi_sampled",
            [sampled.relative_error],
            tolerances.soi,
            note=f"gaussian well, first order in A: correction={sampled.correction:.6g}",
        )
    )
    for report in reports:
        logger.report(report)

    console.print(_report_table("Pauli limit", reports))
    _emit(out, "pauli", reports_to_csv(reports), reports_to_json(reports), False, console)
    _finish_reports(console, reports)


def version_callback(value: bool):
    if value:
        from diracops import __version__

        typer.echo(f"diracops version {__version__}")
        raise typer.Exit()


@app.callback()
def main(
    version: bool = typer.Option(
        None,
        "--version",
        "-v",
        callback=version_callback,
        is_eager=True,
        help="バージョン表示",
    ),
):
    """
    diracops - 射影演算子とNWFW演算子の数値検証
    """
    pass


if __name__ == "__main__":
    app()
