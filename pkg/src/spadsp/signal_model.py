"""Synthetic sparse-channel signal generation and baseband file ingestion.

The received-sample model is

    y(n) = e^{j theta(n)} * sum_l h_l * x(n-l) + q(n)

with a length-L sparse impulse response h, white circularly symmetric
complex Gaussian input x, an optional Doppler phase trajectory theta,
and additive complex white Gaussian noise q.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .support import SupportSet

PAPER_CHANNEL_LENGTH = 64
PAPER_TAP_VALUE = 0.3536 + 0.3536j
# 0-based positions of the four active taps of the reference sparse system
PAPER_TAP_INDICES = (0, 31, 32, 63)


class BasebandFormatError(ValueError):
    """Raised when a baseband recording file cannot be parsed."""


@dataclass(frozen=True)
class SparseChannel:
    """Length-L impulse response whose nonzeros sit exactly on ``true_support``."""

    taps: np.ndarray
    true_support: SupportSet

    def __post_init__(self):
        taps = np.asarray(self.taps, dtype=np.complex128)
        object.__setattr__(self, "taps", taps)
        if taps.ndim != 1:
            raise ValueError("taps must be a 1-D vector")
        if self.true_support.capacity != taps.size:
            raise ValueError("support capacity must equal channel length")
        nonzero = SupportSet.from_iterable(np.nonzero(taps)[0], taps.size)
        if nonzero.indices != self.true_support.indices:
            raise ValueError("nonzero taps do not match the declared support")
        if not np.all(np.isfinite(taps.view(np.float64))):
            raise ValueError("channel taps must be finite")
        if self.norm_sq <= 0.0:
            raise ValueError("channel must have positive energy")

    @property
    def length(self) -> int:
        return self.taps.size

    @property
    def norm_sq(self) -> float:
        return float(np.sum(np.abs(self.taps) ** 2))


@dataclass(frozen=True)
class PhaseTrajectory:
    """Doppler phase model: theta(n) = rate * n, wrapped to (-pi, pi].

    ``rate = 0`` gives the constant-zero trajectory used in the
    synthetic experiments; a nonzero rate gives a linear ramp for
    exercising the PLL.
    """

    rate: float = 0.0

    @classmethod
    def constant(cls) -> "PhaseTrajectory":
        return cls(rate=0.0)

    @classmethod
    def ramp(cls, rate: float) -> "PhaseTrajectory":
        return cls(rate=float(rate))

    def theta(self, n) -> np.ndarray:
        return wrap_phase(self.rate * np.asarray(n, dtype=np.float64))

    def samples(self, n_samples: int) -> np.ndarray:
        return self.theta(np.arange(n_samples))


def wrap_phase(x):
    """Wrap angles to (-pi, pi]."""
    w = np.mod(np.asarray(x, dtype=np.float64), 2.0 * np.pi)
    return np.where(w > np.pi, w - 2.0 * np.pi, w)


def make_paper_channel() -> SparseChannel:
    """The reference length-64 sparse system: four equal taps 0.3536+0.3536i."""
    taps = np.zeros(PAPER_CHANNEL_LENGTH, dtype=np.complex128)
    taps[list(PAPER_TAP_INDICES)] = PAPER_TAP_VALUE
    return SparseChannel(
        taps, SupportSet(PAPER_TAP_INDICES, PAPER_CHANNEL_LENGTH)
    )


def noise_variance_from_snr(snr_db: float, signal_power: float) -> float:
    """Linear noise power giving the requested SNR against ``signal_power``."""
    if signal_power <= 0.0:
        raise ValueError(f"signal_power must be positive, got {signal_power}")
    return signal_power * 10.0 ** (-snr_db / 10.0)


def _as_rng(seed_or_rng) -> np.random.Generator:
    if isinstance(seed_or_rng, np.random.Generator):
        return seed_or_rng
    return np.random.default_rng(seed_or_rng)


def generate_input(n_samples: int, seed_or_rng=0) -> np.ndarray:
    """I.i.d. circularly symmetric complex Gaussian input, total variance 1."""
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    rng = _as_rng(seed_or_rng)
    return (
        rng.standard_normal(n_samples) + 1j * rng.standard_normal(n_samples)
    ) / np.sqrt(2.0)


def complex_awgn(n_samples: int, variance: float, seed_or_rng=0) -> np.ndarray:
    """Zero-mean circularly symmetric complex Gaussian noise of given power."""
    if variance < 0.0:
        raise ValueError("variance must be nonnegative")
    rng = _as_rng(seed_or_rng)
    scale = np.sqrt(variance / 2.0)
    return scale * (
        rng.standard_normal(n_samples) + 1j * rng.standard_normal(n_samples)
    )


def emit_received(
    h: SparseChannel, x_window: np.ndarray, theta: float, noise_sample: complex
) -> complex:
    """One received sample: e^{j theta} * sum_l h_l x(n-l) + q(n).

    ``x_window`` is newest-first, x_window[l] = x(n-l), zero padded for
    n-l < 0.
    """
    x_window = np.asarray(x_window)
    if x_window.size != h.length:
        raise ValueError(
            f"window length {x_window.size} != channel length {h.length}"
        )
    return complex(np.exp(1j * theta) * np.dot(h.taps, x_window) + noise_sample)


def received_sequence(
    h: SparseChannel,
    x: np.ndarray,
    theta: np.ndarray | None = None,
    noise: np.ndarray | None = None,
) -> np.ndarray:
    """Vectorized received samples for a whole input sequence."""
    x = np.asarray(x, dtype=np.complex128)
    y = np.convolve(x, h.taps)[: x.size]
    if theta is not None:
        y = np.exp(1j * np.asarray(theta)) * y
    if noise is not None:
        y = y + np.asarray(noise)
    return y


def input_windows(x: np.ndarray, length: int) -> np.ndarray:
    """Newest-first tap-delay windows, shape (N, length).

    Row n is [x(n), x(n-1), ..., x(n-length+1)] with zero padding for
    negative time. Returns a read-only view; copy before mutating.
    """
    x = np.asarray(x, dtype=np.complex128)
    padded = np.concatenate([np.zeros(length - 1, dtype=np.complex128), x])
    return np.lib.stride_tricks.sliding_window_view(padded, length)[:, ::-1]


def ingest_baseband(path, format: str = "csv") -> tuple[np.ndarray, np.ndarray]:
    """Read aligned (transmitted, received) complex sequences from a file.

    ``csv``: rows of four numeric columns re_x, im_x, re_y, im_y; a
    header row is skipped if present. ``interleaved-f32``: little-endian
    32-bit floats interleaved (re_x, im_x, re_y, im_y) per sample.
    """
    if format == "csv":
        return _ingest_csv(path)
    if format == "interleaved-f32":
        return _ingest_f32(path)
    raise ValueError(f"unknown baseband format: {format!r}")


def _ingest_csv(path) -> tuple[np.ndarray, np.ndarray]:
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        for lineno, row in enumerate(reader, start=1):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 4:
                raise BasebandFormatError(
                    f"{path}:{lineno}: expected 4 columns, got {len(row)}"
                )
            try:
                rows.append([float(c) for c in row])
            except ValueError:
                if lineno == 1:  # header
                    continue
                raise BasebandFormatError(
                    f"{path}:{lineno}: non-numeric record {row!r}"
                ) from None
    if not rows:
        raise BasebandFormatError(f"{path}: no baseband records")
    arr = np.asarray(rows, dtype=np.float64)
    return arr[:, 0] + 1j * arr[:, 1], arr[:, 2] + 1j * arr[:, 3]


def _ingest_f32(path) -> tuple[np.ndarray, np.ndarray]:
    raw = np.fromfile(path, dtype="<f4")
    if raw.size == 0:
        raise BasebandFormatError(f"{path}: no baseband records")
    if raw.size % 4 != 0:
        raise BasebandFormatError(
            f"{path}: float count {raw.size} is not a multiple of 4"
        )
    frames = raw.reshape(-1, 4).astype(np.float64)
    return frames[:, 0] + 1j * frames[:, 1], frames[:, 2] + 1j * frames[:, 3]


def write_baseband(path, x: np.ndarray, y: np.ndarray, format: str = "csv") -> None:
    """Write aligned complex sequences in a format ``ingest_baseband`` reads."""
    x = np.asarray(x, dtype=np.complex128)
    y = np.asarray(y, dtype=np.complex128)
    if x.size != y.size:
        raise ValueError("x and y must have equal length")
    if format == "csv":
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["re_x", "im_x", "re_y", "im_y"])
            for xi, yi in zip(x, y):
                writer.writerow(
                    [repr(float(v)) for v in (xi.real, xi.imag, yi.real, yi.imag)]
                )
    elif format == "interleaved-f32":
        frames = np.empty((x.size, 4), dtype="<f4")
        frames[:, 0] = x.real
        frames[:, 1] = x.imag
        frames[:, 2] = y.real
        frames[:, 3] = y.imag
        frames.tofile(path)
    else:
        raise ValueError(f"unknown baseband format: {format!r}")
