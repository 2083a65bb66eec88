"""Render chart series to image files on the CLI report path.

The reporting module stays pure data; this module is the only place that
touches matplotlib. Each series becomes one PNG named after the series.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .experiment import ResultSet  # noqa: E402
from .reporting import ChartSeries, all_series  # noqa: E402


def _file_name(series_name: str) -> str:
    return series_name.replace(":", "_").replace("/", "_") + ".png"


def render_series(series: ChartSeries, path: Path) -> Path:
    fig, ax = plt.subplots(figsize=(8, 4.5))
    if series.kind == "bar":
        ax.bar(series.x, series.y, color="#4878a8")
    elif series.err is not None and any(e > 0 for e in series.err):
        ax.errorbar(series.x, series.y, yerr=series.err, marker="o", capsize=3)
    else:
        ax.plot(series.x, series.y, marker="o")
    ax.set_xlabel(series.x_label)
    ax.set_ylabel(series.y_label)
    ax.set_title(series.title)
    ax.grid(axis="y", linestyle="--", alpha=0.5)
    fig.tight_layout()
    fig.savefig(path, dpi=144)
    plt.close(fig)
    return path


def render_all(results: ResultSet, out_dir) -> list[Path]:
    """Render every available series for a result set into ``out_dir``."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for series in all_series(results):
        written.append(render_series(series, out_dir / _file_name(series.name)))
    return written
