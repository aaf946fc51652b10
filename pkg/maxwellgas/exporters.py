"""Artifact writers for maxwellgas runs.

Every artifact carries a provenance block: the config hash, package
versions and quadrature settings. CSV and column files put it in leading
'#' lines; JSON documents under a "provenance" key. Floats are written with
17 significant digits so identical runs give byte-identical files.
"""

import csv
import json
from abc import ABC, abstractmethod
from typing import Any

import numpy as np
import scipy

from . import __version__
from .fields import FieldState
from .latticesim import RelaxationSeries

FLOAT_FORMAT = "%.17g"

FIELD_AXES = ("x", "y", "z")


def build_provenance(config_digest: str, quad_tol: float, kappa_max: float) -> dict:
    """Provenance block for a run."""
    return {
        "config_hash": config_digest,
        "maxwellgas": __version__,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "quad_tol": quad_tol,
        "kappa_max": kappa_max,
    }


def _fmt(value) -> str:
    return FLOAT_FORMAT % value


def _write_provenance(f, provenance: dict):
    for key, value in provenance.items():
        f.write(f"# {key}: {_fmt(value) if isinstance(value, float) else value}\n")


class ArtifactExporter(ABC):
    """Abstract base class for artifact exporters."""

    @abstractmethod
    def export(self, data: Any, filepath: str, provenance: dict):
        """Write data to filepath.

        Args:
            data: payload in the exporter's expected shape
            filepath: Path where the file should be written
            provenance: provenance block from build_provenance
        """
        pass


class FieldCsvExporter(ArtifactExporter):
    """Fluid snapshots, one row per cell per snapshot."""

    def export(self, data: list[FieldState], filepath: str, provenance: dict):
        grid = data[0].grid
        coords = [c.ravel() for c in grid.mesh()]
        header = ["t", *FIELD_AXES[:grid.dimension], "rho", "ux", "uy", "uz", "theta"]
        with open(filepath, "w", newline="") as f:
            _write_provenance(f, provenance)
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(header)
            for snapshot in data:
                columns = [np.full(coords[0].size, snapshot.t), *coords, snapshot.rho.ravel(),
                           *(snapshot.u[i].ravel() for i in range(3)), snapshot.theta.ravel()]
                for row in zip(*columns):
                    writer.writerow([_fmt(v) for v in row])


class LatticeCsvExporter(ArtifactExporter):
    """Lattice time series, one row per site per output."""

    HEADER = ["t", "x", "N", "u", "theta", "entropy_total"]

    def export(self, data: RelaxationSeries, filepath: str, provenance: dict):
        with open(filepath, "w", newline="") as f:
            _write_provenance(f, provenance)
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(self.HEADER)
            for t, N, u, theta, entropy in zip(data.times, data.occupation, data.u, data.theta, data.entropy):
                for x in range(len(N)):
                    writer.writerow([_fmt(t), str(x), _fmt(N[x]), _fmt(u[x]), _fmt(theta[x]), _fmt(entropy)])


class JsonExporter(ArtifactExporter):
    """JSON documents: transport tables, summaries, manifests."""

    def export(self, data: dict, filepath: str, provenance: dict):
        document = {"provenance": provenance, **data}
        with open(filepath, "w") as f:
            json.dump(document, f, indent=2, sort_keys=True, default=self._json_serializer)
            f.write("\n")

    @staticmethod
    def _json_serializer(obj):
        """Handle numpy scalars and arrays."""
        if isinstance(obj, np.ndarray):
            return obj.tolist()
        if isinstance(obj, np.generic):
            return obj.item()
        raise TypeError(f"Type {type(obj)} not serializable")


class ColumnExporter(ArtifactExporter):
    """Whitespace-separated columns for generic plotting tools."""

    def export(self, data: dict[str, np.ndarray], filepath: str, provenance: dict):
        names = list(data)
        with open(filepath, "w") as f:
            _write_provenance(f, provenance)
            f.write("# " + " ".join(names) + "\n")
            for row in zip(*(np.asarray(data[name]).ravel() for name in names)):
                f.write(" ".join(_fmt(v) for v in row) + "\n")


def get_exporter(format_type: str) -> ArtifactExporter:
    """Factory function to get the appropriate exporter.

    Args:
        format_type: Export format ('fields', 'lattice', 'json', 'columns')

    Returns:
        Instance of appropriate ArtifactExporter subclass

    Raises:
        ValueError: If format_type is not supported
    """
    exporters = {
        "fields": FieldCsvExporter,
        "lattice": LatticeCsvExporter,
        "json": JsonExporter,
        "columns": ColumnExporter,
    }

    if format_type not in exporters:
        raise ValueError(f"Unsupported format: {format_type}. "
                         f"Supported formats: {', '.join(exporters.keys())}")

    return exporters[format_type]()
