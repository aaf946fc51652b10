"""Tests for the artifact exporters and the scenario runner."""

import json

import numpy as np
import pytest

from maxwellgas.config import parse_config
from maxwellgas.errors import ArtifactError
from maxwellgas.exporters import (
    FLOAT_FORMAT,
    JsonExporter,
    LatticeCsvExporter,
    build_provenance,
    get_exporter,
)
from maxwellgas.fields import FieldState, Grid
from maxwellgas.runner import PLOT_DIR, emit_plot_data, run_scenario


def scenario(document: dict):
    return parse_config(json.dumps(document))


def data_lines(path):
    """Non-provenance lines of an artifact."""
    return [line for line in path.read_text().splitlines() if not line.startswith("#")]


@pytest.fixture
def provenance():
    return build_provenance("abc123", 1e-10, 12.0)


class TestExporters:
    """Tests for the artifact writers."""

    def test_unsupported_format(self):
        with pytest.raises(ValueError, match="Unsupported format: xml"):
            get_exporter("xml")

    def test_field_csv_layout(self, tmp_path, provenance):
        """Provenance comment lines precede the header and one row per cell."""
        grid = Grid.uniform(4, 1.0, "periodic")
        snapshots = [FieldState.uniform(grid, 1.0, [0.1, 0, 0], 1.0, t=t) for t in (0.0, 0.5)]
        path = tmp_path / "fields.csv"
        get_exporter("fields").export(snapshots, str(path), provenance)
        lines = path.read_text().splitlines()
        assert lines[0] == "# config_hash: abc123"
        assert f"# quad_tol: {FLOAT_FORMAT % 1e-10}" in lines
        rows = data_lines(path)
        assert rows[0] == "t,x,rho,ux,uy,uz,theta"
        assert len(rows) == 1 + 2 * 4

    def test_full_precision_floats(self, tmp_path, provenance):
        grid = Grid.uniform(4, 1.0, "periodic")
        state = FieldState.uniform(grid, 1.0 / 3.0, [0, 0, 0], 1.0)
        path = tmp_path / "fields.csv"
        get_exporter("fields").export([state], str(path), provenance)
        row = data_lines(path)[1].split(",")
        assert float(row[2]) == 1.0 / 3.0
        assert row[2] == FLOAT_FORMAT % (1.0 / 3.0)

    def test_json_carries_provenance(self, tmp_path, provenance):
        path = tmp_path / "doc.json"
        JsonExporter().export({"value": np.float64(2.5), "array": np.arange(3)}, str(path), provenance)
        document = json.loads(path.read_text())
        assert document["provenance"]["config_hash"] == "abc123"
        assert document["value"] == 2.5
        assert document["array"] == [0, 1, 2]

    def test_columns_export(self, tmp_path, provenance):
        path = tmp_path / "theta.dat"
        get_exporter("columns").export({"x": [0.0, 1.0], "theta": [1.0, 2.0]}, str(path), provenance)
        lines = data_lines(path)
        assert lines == ["0 1", "1 2"]
        assert "# x theta" in path.read_text()


class TestRunScenario:
    """Tests for run_scenario."""

    def test_fluid_artifacts(self, tmp_path, fluid_document):
        result = run_scenario(scenario(fluid_document), tmp_path)
        assert result.exit_code == 0
        assert {p.split("/")[-1] for p in result.artifacts} == {"fields.csv", "totals.json", "summary.json"}
        summary = json.loads((tmp_path / "summary.json").read_text())
        assert summary["t_final"] == pytest.approx(0.002)
        assert summary["totals_final"]["mass"] == pytest.approx(summary["totals_initial"]["mass"], rel=1e-13)
        assert len(data_lines(tmp_path / "fields.csv")) == 1 + 32 * summary["snapshots"]

    def test_uniform_fluid_stays_uniform(self, tmp_path, fluid_document):
        fluid_document["initial"] = {"profile": "uniform", "rho": 0.9, "theta": 1.1, "u": [0.2]}
        result = run_scenario(scenario(fluid_document), tmp_path)
        assert result.exit_code == 0
        rows = np.array([[float(v) for v in line.split(",")] for line in data_lines(tmp_path / "fields.csv")[1:]])
        assert np.allclose(rows[:, 2], 0.9, rtol=0, atol=1e-14)
        assert np.allclose(rows[:, 3], 0.2, rtol=0, atol=1e-14)
        assert np.allclose(rows[:, 6], 1.1, rtol=0, atol=1e-14)

    def test_lattice_artifacts(self, tmp_path, lattice_document):
        result = run_scenario(scenario(lattice_document), tmp_path)
        assert result.exit_code == 0
        rows = data_lines(tmp_path / "lattice.csv")
        assert rows[0] == ",".join(LatticeCsvExporter.HEADER)
        summary = result.summary
        assert len(rows) == 1 + 16 * summary["outputs"]
        assert summary["entropy_final"] >= summary["entropy_initial"]
        assert summary["predicted_decay_rate"] > 0
        assert summary["fluid_decay_rate"] > 0
        assert summary["lattice_fluid_ratio"] == pytest.approx(
            summary["predicted_decay_rate"] / summary["fluid_decay_rate"], rel=1e-12)
        assert summary["matched_sigma"] == pytest.approx(1.0 / summary["lattice_fluid_ratio"], rel=1e-12)

    def test_stochastic_lattice_is_seeded(self, tmp_path, lattice_document):
        lattice_document["lattice"].update(stochastic=True, replicas=8)
        lattice_document["seed"] = 5
        first = run_scenario(scenario(lattice_document), tmp_path / "a")
        second = run_scenario(scenario(lattice_document), tmp_path / "b")
        assert first.exit_code == second.exit_code == 0
        assert (tmp_path / "a" / "lattice.csv").read_bytes() == (tmp_path / "b" / "lattice.csv").read_bytes()

    def test_runs_are_byte_identical(self, tmp_path, fluid_document):
        """Two runs of one config write identical artifacts."""
        config = scenario(fluid_document)
        run_scenario(config, tmp_path / "a")
        run_scenario(config, tmp_path / "b")
        for name in ("fields.csv", "totals.json", "summary.json"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_positivity_failure_writes_error_document(self, tmp_path, fluid_document):
        fluid_document["initial"]["amplitude"] = 1.5
        result = run_scenario(scenario(fluid_document), tmp_path)
        assert result.exit_code == 2
        error = json.loads((tmp_path / "error.json").read_text())
        assert error["error"] == "PositivityError"
        assert error["exit_code"] == 2
        assert error["field"] == "rho"

    def test_config_failure_exit_code(self, tmp_path, fluid_document):
        fluid_document["initial"] = {"profile": "sod-like", "rho_left": 1.0, "rho_right": 0.125,
                                     "theta_left": 1.0, "theta_right": 0.8}
        result = run_scenario(scenario(fluid_document), tmp_path)
        assert result.exit_code == 1
        assert result.error["error"] == "ConfigError"

    def test_verify_scenario(self, tmp_path):
        document = {"mode": "verify", "constants": {"nondimensional": True},
                    "verify": {"checks": ["special_functions", "fourier_positivity"]}}
        result = run_scenario(scenario(document), tmp_path)
        assert result.exit_code == 0
        report = json.loads((tmp_path / "verification.json").read_text())
        assert report["passed"] is True
        assert [c["name"] for c in report["checks"]] == ["special_functions", "fourier_positivity"]

    def test_transport_table_artifact(self, tmp_path):
        result = run_scenario(scenario({"mode": "transport", "constants": {"nondimensional": True}}), tmp_path)
        assert result.exit_code == 0
        document = json.loads((tmp_path / "transport.json").read_text())
        assert document["table"]["lambda_fourier"] > 0
        assert document["fourier_positivity"]["positive"] is True


class TestPlotData:
    """Tests for emit_plot_data."""

    def test_manifest_lists_snapshots(self, tmp_path, fluid_document):
        result = run_scenario(scenario(fluid_document), tmp_path)
        manifest = emit_plot_data(tmp_path, "theta")
        assert len(manifest) == result.summary["snapshots"]
        times = [entry["t"] for entry in manifest]
        assert times == sorted(times)
        stored = json.loads((tmp_path / PLOT_DIR / "manifest.json").read_text())
        assert stored["files"] == manifest

    def test_columns_are_sorted_by_coordinate(self, tmp_path, fluid_document):
        run_scenario(scenario(fluid_document), tmp_path)
        manifest = emit_plot_data(tmp_path, "rho")
        columns = np.loadtxt(tmp_path / PLOT_DIR / manifest[0]["file"])
        assert columns.shape == (32, 2)
        assert np.all(np.diff(columns[:, 0]) > 0)

    def test_lattice_run(self, tmp_path, lattice_document):
        run_scenario(scenario(lattice_document), tmp_path)
        manifest = emit_plot_data(tmp_path, "N")
        assert manifest[0]["file"] == "N_0000.dat"

    def test_missing_run_directory(self, tmp_path):
        with pytest.raises(ArtifactError, match="not found"):
            emit_plot_data(tmp_path / "absent")

    def test_directory_without_csv(self, tmp_path):
        with pytest.raises(ArtifactError, match="No fields.csv"):
            emit_plot_data(tmp_path)

    def test_unknown_field(self, tmp_path, fluid_document):
        run_scenario(scenario(fluid_document), tmp_path)
        with pytest.raises(ArtifactError, match="Unknown field: pressure"):
            emit_plot_data(tmp_path, "pressure")
