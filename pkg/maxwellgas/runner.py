"""Scenario execution: dispatch a validated config and write its artifacts."""

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from rich.progress import track

from .config import ScenarioConfig, config_hash, get_thread_count
from .errors import ArtifactError, MaxwellGasError, VerificationError
from .exporters import build_provenance, get_exporter
from .fluid import run as run_fluid
from .latticesim import (RelaxationSeries, compare_decay_rates, ensemble_state, equilibrium_state,
                         fit_decay_rate, gaussian_bump, momentum_bins, relax_experiment,
                         sample_configuration, stochastic_step)
from .log_config import get_logger
from .profiles import build_initial_state
from .transport import TransportTable, fourier_positivity_certificate, lambda_moments
from .verify import VerificationReport, run_verification

logger = get_logger(__name__)

PLOT_DIR = "plot_data"


@dataclass
class RunResult:
    """Outcome of one scenario run."""
    exit_code: int
    artifacts: list[str] = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    error: dict | None = None
    report: VerificationReport | None = None


def _transport_table(config: ScenarioConfig) -> TransportTable:
    constants = config.constants.to_constants()
    table = lambda_moments(constants, config.quadrature.quad_tol, config.quadrature.kappa_max)
    if config.transport is not None:
        table = table.with_overrides(config.transport.viscosity, config.transport.conductivity,
                                     config.transport.dufour)
    return table


class _Writer:
    """Writes artifacts into one run directory with a shared provenance block."""

    def __init__(self, out_dir: Path, config: ScenarioConfig):
        self.out_dir = out_dir
        self.provenance = build_provenance(config_hash(config), config.quadrature.quad_tol,
                                           config.quadrature.kappa_max)
        self.artifacts: list[str] = []

    def write(self, format_type: str, name: str, data) -> str:
        filepath = str(self.out_dir / name)
        get_exporter(format_type).export(data, filepath, self.provenance)
        self.artifacts.append(filepath)
        logger.info("Wrote %s", filepath)
        return filepath


def _run_transport(config: ScenarioConfig, writer: _Writer, progress: bool) -> dict:
    table = _transport_table(config)
    certificate = fourier_positivity_certificate()
    summary = {
        "table": table.to_dict(),
        "fourier_positivity": certificate._asdict(),
    }
    writer.write("json", "transport.json", summary)
    return summary


def _run_fluid(config: ScenarioConfig, writer: _Writer, progress: bool) -> dict:
    constants = config.constants.to_constants()
    table = _transport_table(config)
    grid = config.grid.to_grid()
    state = build_initial_state(config.initial, grid)
    run_cfg = config.run
    record = run_fluid(state, table, constants, run_cfg.t_end, output_every=run_cfg.output_every,
                       dt=run_cfg.dt, scheme=run_cfg.scheme, cfl=run_cfg.cfl,
                       diffusion_number=run_cfg.diffusion_number)
    writer.write("fields", "fields.csv", record.snapshots)
    summary = {
        "steps": len(record.dt_history),
        "t_final": record.final.t,
        "snapshots": len(record.snapshots),
        "totals_initial": record.totals[0],
        "totals_final": record.totals[-1],
        "table": table.to_dict(),
    }
    writer.write("json", "totals.json", {"totals": record.totals, "dt_history": record.dt_history})
    writer.write("json", "summary.json", summary)
    return summary


def _stochastic_series(config: ScenarioConfig, constants, bins, seed: int, progress: bool) -> RelaxationSeries:
    lattice = config.lattice
    rng = np.random.default_rng(seed)
    profile = lattice.theta * gaussian_bump(lattice.sites, lattice.amplitude, lattice.width)
    mean_field = equilibrium_state(np.full(lattice.sites, lattice.occupation), profile, bins, constants)
    configs = [sample_configuration(mean_field, rng) for _ in range(lattice.replicas)]
    series = RelaxationSeries()
    series.record(ensemble_state(configs, bins), constants)
    steps = range(1, lattice.steps + 1)
    for i in (track(steps, description="Stochastic lattice...") if progress else steps):
        configs = [stochastic_step(c, bins, lattice.dt, constants, rng) for c in configs]
        if i % lattice.output_every == 0 or i == lattice.steps:
            series.record(ensemble_state(configs, bins, t=i * lattice.dt), constants)
    return series


def _run_lattice(config: ScenarioConfig, writer: _Writer, progress: bool) -> dict:
    constants = config.constants.to_constants()
    lattice = config.lattice
    bins = momentum_bins(lattice.bins, constants.epsilon)
    if lattice.stochastic:
        seed = config.seed if config.seed is not None else 0
        series = _stochastic_series(config, constants, bins, seed, progress)
    else:
        wrap = (lambda it: track(it, description="Lattice chain...")) if progress else None
        series = relax_experiment(lattice.occupation, lattice.theta, lattice.amplitude, lattice.width,
                                  lattice.sites, bins, constants, lattice.dt, lattice.steps,
                                  output_every=lattice.output_every, progress=wrap,
                                  tol=lattice.newton_tol, max_newton=lattice.max_newton)
    writer.write("lattice", "lattice.csv", series)
    comparison = compare_decay_rates(_transport_table(config), lattice.occupation, lattice.theta,
                                     2.0 * np.pi / (lattice.sites * constants.a), constants)
    summary = {
        "outputs": len(series.times),
        "t_final": series.times[-1],
        "totals_initial": series.totals[0],
        "totals_final": series.totals[-1],
        "entropy_initial": series.entropy[0],
        "entropy_final": series.entropy[-1],
        "predicted_decay_rate": comparison.lattice_rate,
        "fluid_decay_rate": comparison.fluid_rate,
        "lattice_fluid_ratio": comparison.ratio,
        "matched_sigma": comparison.matched_sigma,
    }
    if lattice.amplitude != 0 and len(series.times) > 3:
        summary["fitted_decay_rate"] = fit_decay_rate(series.times, series.theta)
    writer.write("json", "summary.json", summary)
    return summary


def _run_verify(config: ScenarioConfig, writer: _Writer, progress: bool) -> dict:
    constants = config.constants.to_constants()
    report = run_verification(constants, _transport_table(config), config.checks, get_thread_count())
    writer.write("json", "verification.json", report.to_dict())
    if not report.passed:
        raise VerificationError(report.failed)
    return report.to_dict()


MODE_RUNNERS = {
    "transport": _run_transport,
    "fluid": _run_fluid,
    "lattice": _run_lattice,
    "verify": _run_verify,
}


def run_scenario(config: ScenarioConfig, out_dir: str | Path, progress: bool = False) -> RunResult:
    """Run a scenario and write its artifacts into out_dir.

    Module errors are caught here: error.json records the class, message
    and exit code, and the code is returned in the result.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    writer = _Writer(out, config)
    logger.info("Running %s scenario into %s", config.mode, out)
    try:
        summary = MODE_RUNNERS[config.mode](config, writer, progress)
    except MaxwellGasError as e:
        logger.error("%s: %s", type(e).__name__, e)
        error = e.to_dict()
        writer.write("json", "error.json", error)
        result = RunResult(exit_code=e.exit_code, artifacts=writer.artifacts, error=error)
        if isinstance(e, VerificationError):
            with open(out / "verification.json") as f:
                result.summary = json.load(f)
        return result
    return RunResult(exit_code=0, artifacts=writer.artifacts, summary=summary)


def _read_csv(path: Path) -> tuple[list[str], list[list[float]]]:
    with open(path, newline="") as f:
        rows = [row for row in csv.reader(line for line in f if not line.startswith("#"))]
    if len(rows) < 2:
        raise ArtifactError(f"No data rows in {path}")
    return rows[0], [[float(v) for v in row] for row in rows[1:]]


def emit_plot_data(run_dir: str | Path, field_name: str = "theta") -> list[dict]:
    """Split a run's CSV into one column file per output time.

    Columns are the coordinates followed by the field value; a manifest
    plot_data/manifest.json lists every file with its t.

    Raises:
        ArtifactError: if the run directory or its CSV is missing or empty
    """
    run_dir = Path(run_dir)
    if not run_dir.is_dir():
        raise ArtifactError(f"Run directory not found: {run_dir}")
    sources = [run_dir / name for name in ("fields.csv", "lattice.csv") if (run_dir / name).exists()]
    if not sources:
        raise ArtifactError(f"No fields.csv or lattice.csv in {run_dir}")
    header, rows = _read_csv(sources[0])
    if field_name not in header:
        raise ArtifactError(f"Unknown field: {field_name}. Available: {', '.join(header[1:])}")
    coords = [name for name in ("x", "y", "z") if name in header]
    value_col = header.index(field_name)
    coord_cols = [header.index(name) for name in coords]

    by_time: dict[float, list[list[float]]] = {}
    for row in rows:
        by_time.setdefault(row[0], []).append(row)

    plot_dir = run_dir / PLOT_DIR
    plot_dir.mkdir(exist_ok=True)
    provenance = {"source": sources[0].name, "field": field_name}
    exporter = get_exporter("columns")
    manifest = []
    for i, (t, block) in enumerate(by_time.items()):
        block.sort(key=lambda r: [r[c] for c in coord_cols])
        columns = {name: [r[c] for r in block] for name, c in zip(coords, coord_cols)}
        columns[field_name] = [r[value_col] for r in block]
        filename = f"{field_name}_{i:04d}.dat"
        exporter.export(columns, str(plot_dir / filename), provenance)
        manifest.append({"file": filename, "t": t})
    get_exporter("json").export({"files": manifest}, str(plot_dir / "manifest.json"), provenance)
    logger.info("Wrote %d plot files to %s", len(manifest), plot_dir)
    return manifest
