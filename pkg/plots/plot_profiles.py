"""Overlay the per-snapshot profiles written by `maxwellgas plot-data`.

Usage: python plot_profiles.py RUN_DIR [--every N] [--out FILE]
"""

import json
from pathlib import Path

import click
import numpy as np

from plot_style import new_figure


@click.command()
@click.argument("run_dir", type=click.Path(exists=True, file_okay=False))
@click.option("--every", default=1, show_default=True, help="Plot every N-th snapshot.")
@click.option("--out", "out_file", default=None, help="Image file (default RUN_DIR/<field>.png).")
def main(run_dir, every, out_file):
    plot_dir = Path(run_dir) / "plot_data"
    with open(plot_dir / "manifest.json") as f:
        manifest = json.load(f)
    field = manifest["provenance"]["field"]

    fig, ax = new_figure("x", field)
    for entry in manifest["files"][::every]:
        columns = np.loadtxt(plot_dir / entry["file"], ndmin=2)
        # 2-D and 3-D runs: plot the first-axis profile through the first row
        x = columns[:, 0]
        first_row = np.isclose(columns[:, 1], columns[0, 1]) if columns.shape[1] > 2 else slice(None)
        ax.plot(x[first_row], columns[first_row, -1], label=f"t = {entry['t']:.4g}")
    ax.legend(fontsize="small", ncol=2)

    out = Path(out_file) if out_file else Path(run_dir) / f"{field}.png"
    fig.savefig(out, dpi=150, bbox_inches="tight")
    click.echo(f"Saved {out}")


if __name__ == "__main__":
    main()
