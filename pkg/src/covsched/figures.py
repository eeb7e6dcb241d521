"""SVG figure rendering for benchmark reports.

All figures are written as SVG with byte-deterministic settings (fixed hash
salt, text kept as text, no creation-date metadata) so report directories can
be content-hashed and compared across runs.
"""

from __future__ import annotations

import matplotlib
from matplotlib.backends.backend_svg import FigureCanvasSVG
from matplotlib.figure import Figure

_RC = {
    "svg.fonttype": "none",
    "svg.hashsalt": "covsched",
    "font.family": "DejaVu Sans",
    "figure.dpi": 100,
}


def _new_figure():
    fig = Figure(figsize=(8.0, 5.0))  # 800x500 at 100 dpi
    FigureCanvasSVG(fig)
    return fig


def _save(fig, path):
    fig.savefig(path, format="svg", metadata={"Date": None})


def render_histogram(bin_lows, counts, bin_width, marker_cost, path, title="schedule cost distribution"):
    """Bar chart of binned schedule costs with a marked tracking cost.

    The vertical line and its label sit at marker_cost; the label prints the
    cost to 6 significant digits.
    """
    with matplotlib.rc_context(_RC):
        fig = _new_figure()
        ax = fig.add_subplot()
        ax.bar(bin_lows, counts, width=bin_width, align="edge",
               color="#4878a8", edgecolor="none")
        ax.axvline(marker_cost, color="#555555", linewidth=1.5)
        ax.annotate(
            f"tracking cost = {marker_cost:.6g}",
            xy=(marker_cost, 1.0), xycoords=("data", "axes fraction"),
            xytext=(6, -14), textcoords="offset points",
            fontsize=10, color="#333333",
        )
        ax.set_xlabel("total cost")
        ax.set_ylabel("number of schedules")
        ax.set_title(title)
        fig.tight_layout()
        _save(fig, path)


def render_metric_by_dim(series, ylabel, path, title):
    """One line per method: x = state dimension, y = mean of a metric.

    series maps method name to a list of (n, value) pairs.
    """
    with matplotlib.rc_context(_RC):
        fig = _new_figure()
        ax = fig.add_subplot()
        for method in sorted(series):
            pts = sorted(series[method])
            ax.plot([p[0] for p in pts], [p[1] for p in pts],
                    marker="o", label=method)
        ax.set_xlabel("state dimension n")
        ax.set_ylabel(ylabel)
        ax.set_title(title)
        ax.legend()
        fig.tight_layout()
        _save(fig, path)
