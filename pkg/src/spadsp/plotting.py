"""Figure rendering for experiment reports.

Everything here draws to files (Agg backend); the harness calls these
right after it writes the corresponding CSVs so each report directory
carries both the delimited data and a rendered view of it.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .metrics import Trajectory

plt.rcParams.update(
    {
        "figure.figsize": (7.0, 4.3),
        "figure.dpi": 120,
        "axes.grid": True,
        "grid.alpha": 0.3,
        "font.size": 10,
        "legend.fontsize": 9,
        "lines.linewidth": 1.2,
    }
)

_LABELS = {
    "rls": "RLS",
    "irls": "IRLS",
    "spadsp_rls": "SpAdSP-RLS",
    "spadsp_irls": "SpAdSP-IRLS",
}


def algorithm_label(name: str) -> str:
    return _LABELS.get(name, name)


def plot_trajectories(
    curves: dict[str, Trajectory],
    path,
    ylabel: str = "MSD (dB)",
    title: str | None = None,
) -> None:
    """Overlay per-algorithm dB trajectories and save to ``path``."""
    fig, ax = plt.subplots()
    for label, traj in curves.items():
        ax.plot(np.arange(len(traj)), traj.values_db, label=label)
    ax.set_xlabel("iteration")
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    if curves:
        ax.legend()
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def plot_steady_state(
    sweep_values,
    series: dict[str, list[float]],
    sweep_param: str,
    path,
) -> None:
    """Steady-state level versus a swept parameter, one line per algorithm."""
    fig, ax = plt.subplots()
    for label, values in series.items():
        ax.plot(sweep_values, values, marker="o", label=label)
    ax.set_xlabel(sweep_param)
    ax.set_ylabel("steady-state MSD (dB)")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
