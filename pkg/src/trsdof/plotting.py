"""Figures for the simulation and comparison reports.

Uses the non-interactive Agg backend; every function writes one file and
returns its path.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .linksim import SimResult, estimate_slope  # noqa: E402
from .optimizer import ALL_SCHEMES, ComparisonReport  # noqa: E402
from .topology import format_rational  # noqa: E402

STYLE = {
    "figure.figsize": (6.4, 4.0),
    "axes.grid": True,
    "grid.alpha": 0.3,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "legend.fontsize": 8,
    "font.size": 10,
}


def _save(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_rate_sweep(result: SimResult, path, predicted=None) -> Path:
    """Mean rates against SNR with the fitted aggregate slope.

    ``predicted`` (a Fraction) adds a reference line of that slope through
    the last aggregate point.
    """
    report = estimate_slope(result)
    x = np.asarray(result.snr_db)
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        for m_idx, m in enumerate(result.messages):
            ax.errorbar(
                x,
                result.mean_rate[:, m_idx],
                yerr=result.stderr[:, m_idx],
                marker="o",
                ms=3,
                lw=0.8,
                label=f"tx {m.tx + 1} {m.label}",
            )
        agg = report.aggregate
        ax.errorbar(x, result.aggregate, yerr=result.aggregate_stderr, marker="s", color="k", lw=1.5,
                    label=f"sum (slope {agg.slope:.3f})")
        if predicted is not None:
            log2p = x / 10.0 * np.log2(10.0)
            ref = result.aggregate[-1] + float(predicted) * (log2p - log2p[-1])
            ax.plot(x, ref, "k--", lw=0.8, label=f"DoF {format_rational(predicted)}")
        ax.set_xlabel("SNR [dB]")
        ax.set_ylabel("rate [bit/channel use]")
        ax.legend(ncol=2)
        return _save(fig, path)


def plot_comparison(report: ComparisonReport, path) -> Path:
    """Bar chart of the best sum DoF per scheme."""
    schemes = [s for s in ALL_SCHEMES if s in report.results]
    values = [float(report.results[s].value) for s in schemes]
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        bars = ax.bar(schemes, values, color="0.6", edgecolor="k")
        for bar, s in zip(bars, schemes):
            ax.annotate(
                format_rational(report.results[s].value),
                (bar.get_x() + bar.get_width() / 2, bar.get_height()),
                ha="center",
                va="bottom",
                fontsize=8,
            )
        ax.set_ylabel("sum DoF")
        ax.set_ylim(0, max(values + [1.0]) * 1.15)
        return _save(fig, path)
