"""Quick-look rendering of sweep and figure CSV data to PNG files.

The delimited files remain the authoritative output; these charts exist so
a run can be eyeballed without loading the CSV elsewhere.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

__all__ = ["render_figure", "render_csv"]


def render_figure(columns, rows, plotspec: dict, title: str, out_path: Path) -> Path:
    xcol = plotspec.get("x", columns[0])
    ycols = plotspec.get("y")
    if ycols is None:
        ycols = [c for c in columns if c != xcol]
    xi = columns.index(xcol)
    xs = [row[xi] for row in rows]

    fig, ax = plt.subplots(figsize=(6.0, 4.2), dpi=130)
    for col in ycols:
        yi = columns.index(col)
        ys = [row[yi] for row in rows]
        if all(y is None for y in ys):
            continue
        ax.plot(xs, ys, label=col, linewidth=1.4)
    ax.set_xscale(plotspec.get("xscale", "linear"))
    ax.set_yscale(plotspec.get("yscale", "linear"))
    ax.set_xlabel(plotspec.get("xlabel", xcol))
    ax.set_ylabel(plotspec.get("ylabel", "value"))
    ax.set_title(title)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=8, ncol=2)
    fig.tight_layout()
    fig.savefig(out_path)
    plt.close(fig)
    return Path(out_path)


def render_csv(csv_path: Path, out_path: Path | None = None,
               plotspec: dict | None = None) -> Path:
    """Render an existing sweep/figure CSV (header + numeric rows) to PNG."""
    csv_path = Path(csv_path)
    columns: list[str] = []
    rows: list[tuple] = []
    with open(csv_path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split(",")
            if not columns:
                columns = parts
                continue
            rows.append(tuple(float(p) if p else None for p in parts))
    if out_path is None:
        out_path = csv_path.with_suffix(".png")
    return render_figure(columns, rows, plotspec or {}, csv_path.stem, Path(out_path))
