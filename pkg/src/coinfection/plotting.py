"""Matplotlib figures written next to the CSV reports."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from matplotlib.colors import ListedColormap  # noqa: E402
from matplotlib.patches import Patch  # noqa: E402

from .params import config_key, field_name  # noqa: E402
from .sweep import COLOR_CODES, COLORS, LEGEND, AggregationReport, RegionGrid  # noqa: E402

# no timestamps or version strings: reruns give identical files
PNG_METADATA = {"Software": None}

RC = {
    "font.size": 9,
    "axes.labelsize": 10,
    "legend.fontsize": 7,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "figure.dpi": 100,
}


def plot_region_map(grid: RegionGrid, path, title: str | None = None) -> None:
    index = {code: i for i, code in enumerate(COLOR_CODES)}
    codes = np.vectorize(index.__getitem__)(grid.colors)
    cmap = ListedColormap([np.array(COLORS[c][1]) / 255 for c in COLOR_CODES])
    sp = grid.spec
    with plt.rc_context(RC):
        fig, ax = plt.subplots(figsize=(5.5, 4.5))
        ax.imshow(codes, origin="lower", cmap=cmap, vmin=-0.5, vmax=len(COLOR_CODES) - 0.5,
                  extent=(*sp.range_x, *sp.range_y), aspect="auto", interpolation="nearest")
        xname, yname = config_key(field_name(sp.axis_x)), config_key(field_name(sp.axis_y))
        if {xname, yname} == {"delta", "lambda"}:
            lo = max(sp.range_x[0], sp.range_y[0])
            hi = min(sp.range_x[1], sp.range_y[1])
            ax.plot([lo, hi], [lo, hi], ":", color="k", lw=1)
        ax.set_xlabel(xname)
        ax.set_ylabel(yname)
        present = [c for c in COLOR_CODES if c in grid.codes_present()]
        ax.legend(handles=[Patch(color=cmap(index[c]), label=LEGEND[c]) for c in present],
                  loc="upper left", bbox_to_anchor=(1.01, 1.0), frameon=False)
        if title:
            ax.set_title(title)
        fig.savefig(path, format="png", bbox_inches="tight", metadata=PNG_METADATA)
        plt.close(fig)


def plot_aggregation(report: AggregationReport, path) -> None:
    eps = np.array([r.epsilon for r in report.rows])
    err = np.array([r.rel_distance for r in report.rows])
    with plt.rc_context(RC):
        fig, ax = plt.subplots(figsize=(4.5, 3.5))
        ax.loglog(eps, err, "o-", color="k")
        for r in report.rows:
            if not r.converged:
                ax.plot(r.epsilon, r.rel_distance, "o", mfc="none", mec="r", ms=10)
        ax.set_xlabel("epsilon")
        ax.set_ylabel("relative distance to aggregated equilibrium")
        ax.grid(True, which="both", lw=0.3)
        fig.savefig(path, format="png", bbox_inches="tight", metadata=PNG_METADATA)
        plt.close(fig)
