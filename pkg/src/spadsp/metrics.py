"""Convergence metrics and complex-multiplication complexity accounting."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .support import SupportSet

# floor for linear error ratios so dB conversion never hits log10(0)
_RATIO_FLOOR = 1e-300

# fraction of the trajectory tail used for the steady-state average
STEADY_STATE_WINDOW = 0.2

CM_ALGORITHMS = ("rls", "spadsp_irls")


@dataclass(frozen=True)
class Trajectory:
    """Per-iteration error sequence in dB."""

    values_db: np.ndarray

    def __post_init__(self):
        object.__setattr__(
            self, "values_db", np.asarray(self.values_db, dtype=np.float64)
        )

    @property
    def n_iterations(self) -> int:
        return self.values_db.size

    def __len__(self) -> int:
        return self.values_db.size


@dataclass(frozen=True)
class ComplexityReport:
    algorithm: str
    n_taps: int
    s: int | None
    cm_per_iteration: int


def msd_linear(h_hat: np.ndarray, h_true: np.ndarray) -> float:
    """Normalized squared deviation ||h_hat - h||^2 / ||h||^2 (linear)."""
    h_hat = np.asarray(h_hat)
    h_true = np.asarray(h_true)
    if h_hat.shape != h_true.shape:
        raise ValueError("length mismatch between estimate and truth")
    denom = float(np.sum(np.abs(h_true) ** 2))
    if denom == 0.0:
        raise ValueError("true vector must be nonzero")
    ratio = float(np.sum(np.abs(h_hat - h_true) ** 2)) / denom
    return max(ratio, _RATIO_FLOOR)


def msd_db(h_hat: np.ndarray, h_true: np.ndarray) -> float:
    """Mean-square deviation in dB, floored at -3000 dB for exact matches."""
    return 10.0 * np.log10(msd_linear(h_hat, h_true))


def linear_to_db(values) -> np.ndarray:
    return 10.0 * np.log10(np.maximum(np.asarray(values, dtype=np.float64),
                                      _RATIO_FLOOR))


def db_to_linear(values_db) -> np.ndarray:
    return 10.0 ** (np.asarray(values_db, dtype=np.float64) / 10.0)


def average_trajectories(trials: list[Trajectory]) -> Trajectory:
    """Elementwise mean over trials in the linear domain, returned in dB."""
    if not trials:
        raise ValueError("need at least one trajectory")
    lengths = {len(t) for t in trials}
    if len(lengths) != 1:
        raise ValueError(f"ragged trajectory lengths: {sorted(lengths)}")
    stacked = np.stack([db_to_linear(t.values_db) for t in trials])
    return Trajectory(linear_to_db(stacked.mean(axis=0)))


def steady_state_db(t: Trajectory) -> float:
    """Mean dB value over the final 20% of iterations."""
    n = len(t)
    if n < 50:
        raise ValueError(f"trajectory too short for a steady-state window: {n}")
    start = int(np.ceil(n * (1.0 - STEADY_STATE_WINDOW)))
    return float(np.mean(t.values_db[start:]))


def convergence_iteration(t: Trajectory, steady_db: float | None = None) -> int:
    """First iteration whose value is within 3 dB of the steady state."""
    if steady_db is None:
        steady_db = steady_state_db(t)
    hits = np.nonzero(t.values_db <= steady_db + 3.0)[0]
    return int(hits[0]) if hits.size else len(t)


def support_recovery_rate(found: SupportSet, truth: SupportSet) -> float:
    """|found ∩ truth| / |truth|."""
    if found.capacity != truth.capacity:
        raise ValueError("support sets have different capacities")
    if len(truth) == 0:
        raise ValueError("truth support must be nonempty")
    return len(found.intersection(truth)) / len(truth)


def cm_count(algorithm: str, n_taps: int, s: int | None = None) -> ComplexityReport:
    """Complex multiplications per iteration.

    rls: 3L^2 + 4L. spadsp_irls: L^2 + 2L(s+1) + 10s (the L^2 term is
    the covariance recursion, which runs on full-length vectors).
    """
    if n_taps < 1:
        raise ValueError("n_taps must be positive")
    if algorithm == "rls":
        cm = 3 * n_taps**2 + 4 * n_taps
        return ComplexityReport("rls", n_taps, None, cm)
    if algorithm == "spadsp_irls":
        if s is None or not 1 <= s <= n_taps:
            raise ValueError(f"s must be in [1, {n_taps}], got {s}")
        cm = n_taps**2 + 2 * n_taps * (s + 1) + 10 * s
        return ComplexityReport("spadsp_irls", n_taps, s, cm)
    raise ValueError(f"unknown algorithm for complexity report: {algorithm!r}")
