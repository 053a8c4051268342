"""Monte-Carlo experiment runner with reproducible seeding and CSV output.

Trials are the unit of independence: trial ``i`` always uses seed
``base_seed + i``, so the same trial sees the same input/noise draws
regardless of which algorithm consumes it, execution order, or whether
other trials ran at all. Averaged trajectories, steady-state summaries,
and complexity counts are written as CSV, with rendered figures
alongside.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _kernels
from .estimators import (
    EstimationDivergedError,
    EstimatorConfig,
    init_state,
    rls_step,
    spadsp_irls_step,
)
from .metrics import (
    Trajectory,
    cm_count,
    convergence_iteration,
    linear_to_db,
    steady_state_db,
    support_recovery_rate,
)
from .signal_model import (
    PhaseTrajectory,
    SparseChannel,
    complex_awgn,
    generate_input,
    input_windows,
    make_paper_channel,
    noise_variance_from_snr,
    received_sequence,
)
from .support import SupportSet

ALGORITHM_CHOICES = ("rls", "irls", "spadsp_rls", "spadsp_irls")
SWEEP_CHOICES = ("mu", "snr_db", "s")
SCENARIO_CHOICES = ("paper-synthetic", "custom-channel", "real-data")

SUMMARY_COLUMNS = (
    "algorithm",
    "sweep_param",
    "sweep_value",
    "steady_state_db",
    "convergence_iter",
    "cm_per_iteration",
    "support_recovery",
    "manifest",
)

# fraction of failed trials above which a run is considered broken
FAILURE_THRESHOLD = 0.01


class ConfigError(ValueError):
    """Invalid experiment configuration."""


@dataclass(frozen=True)
class ExperimentConfig:
    """Scenario plus algorithm parameters for one experiment."""

    scenario: str = "paper-synthetic"
    n_taps: int = 64
    s: int = 12
    mu: float = 1.0
    lam: float = 0.99
    delta: float = 100.0
    eta: float = 0.5
    snr_db: float = 20.0
    n_iterations: int = 1000
    n_trials: int = 200
    base_seed: int = 0
    algorithms: tuple[str, ...] = ("rls", "spadsp_irls")
    pll_enabled: bool = False
    k1: float = 0.0
    k2: float = 0.0
    phase_rate: float = 0.0
    true_sparsity: int = 4  # custom-channel only
    sweep_param: str | None = None
    sweep_values: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.scenario not in SCENARIO_CHOICES:
            raise ConfigError(f"unknown scenario {self.scenario!r}")
        for alg in self.algorithms:
            if alg not in ALGORITHM_CHOICES:
                raise ConfigError(f"unknown algorithm {alg!r}")
        if not self.algorithms:
            raise ConfigError("at least one algorithm is required")
        if self.n_trials < 1:
            raise ConfigError("n_trials must be >= 1")
        if self.n_iterations < 1:
            raise ConfigError("n_iterations must be >= 1")
        if self.sweep_param is not None:
            if self.sweep_param not in SWEEP_CHOICES:
                raise ConfigError(f"cannot sweep {self.sweep_param!r}")
            if not self.sweep_values:
                raise ConfigError("sweep_values required when sweep_param is set")
        if self.scenario == "custom-channel" and not (
            1 <= self.true_sparsity <= self.n_taps
        ):
            raise ConfigError("true_sparsity must be in [1, n_taps]")
        # surface estimator parameter problems at config time
        try:
            self.estimator_config("spadsp_irls")
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def estimator_config(self, algorithm: str) -> EstimatorConfig:
        """Per-algorithm parameter reduction (rls: mu=1 s=L, irls: s=L, ...)."""
        mu = 1.0 if algorithm in ("rls", "spadsp_rls") else self.mu
        s = self.n_taps if algorithm in ("rls", "irls") else self.s
        return EstimatorConfig(
            n_taps=self.n_taps,
            s=s,
            mu=mu,
            lam=self.lam,
            delta=self.delta,
            eta=self.eta,
            k1=self.k1,
            k2=self.k2,
            pll_enabled=self.pll_enabled,
        )


def step_function(algorithm: str):
    return rls_step if algorithm in ("rls", "irls") else spadsp_irls_step


@dataclass
class TrialResult:
    """One trial's per-iteration linear MSD plus final-support bookkeeping."""

    msd_linear: np.ndarray | None
    final_support: SupportSet | None
    support_recovery: float | None
    failed: bool = False
    error: str | None = None


def make_channel(cfg: ExperimentConfig, rng: np.random.Generator) -> SparseChannel:
    """Trial channel: the fixed reference system, or a fresh random sparse one."""
    if cfg.scenario == "paper-synthetic":
        if cfg.n_taps != 64:
            raise ConfigError("paper-synthetic scenario requires n_taps=64")
        return make_paper_channel()
    if cfg.scenario == "custom-channel":
        idx = rng.choice(cfg.n_taps, size=cfg.true_sparsity, replace=False)
        support = SupportSet.from_iterable(idx, cfg.n_taps)
        taps = np.zeros(cfg.n_taps, dtype=np.complex128)
        vals = (
            rng.standard_normal(cfg.true_sparsity)
            + 1j * rng.standard_normal(cfg.true_sparsity)
        ) / np.sqrt(2.0 * cfg.true_sparsity)
        taps[support.as_array()] = vals
        return SparseChannel(taps, support)
    raise ConfigError(f"scenario {cfg.scenario!r} has no synthetic channel")


def run_trial(
    algorithm: str, cfg: ExperimentConfig, seed: int, backend: str = "auto"
) -> TrialResult:
    """One independent synthetic trial, fully determined by ``seed``.

    ``backend`` selects the compiled numba loop ("numba"), the reference
    step-function loop ("numpy"), or whichever is available ("auto").
    """
    rng = np.random.default_rng(seed)
    channel = make_channel(cfg, rng)
    n = cfg.n_iterations
    x = generate_input(n, rng)
    theta = PhaseTrajectory(cfg.phase_rate).samples(n)
    variance = noise_variance_from_snr(cfg.snr_db, channel.norm_sq)
    noise = complex_awgn(n, variance, rng)
    y = received_sequence(channel, x, theta, noise)

    # The estimator models y = e^{j th} w^H x, so its fixed point is the
    # conjugate of the convolution taps; compare against that.
    w_true = np.conj(channel.taps)
    est_cfg = cfg.estimator_config(algorithm)
    sparse = algorithm in ("spadsp_rls", "spadsp_irls")

    if backend == "auto":
        backend = "numba" if _kernels.NUMBA_AVAILABLE else "numpy"
    if backend == "numba":
        msd, lambda_s_idx, ok = _kernels.run_trial_kernel(x, y, w_true, est_cfg, sparse)
        if not ok:
            return TrialResult(None, None, None, failed=True,
                               error="nonfinite recursion state")
        lambda_s = SupportSet.from_iterable(lambda_s_idx, cfg.n_taps)
    elif backend == "numpy":
        windows = input_windows(x, cfg.n_taps)
        step = step_function(algorithm)
        state = init_state(est_cfg)
        msd = np.empty(n, dtype=np.float64)
        denom = float(np.sum(np.abs(w_true) ** 2))
        try:
            for i in range(n):
                out = step(state, windows[i], complex(y[i]), est_cfg)
                diff = out.h_applied - w_true
                msd[i] = max(
                    float(np.sum(diff.real**2 + diff.imag**2)) / denom, 1e-300
                )
        except EstimationDivergedError as exc:
            return TrialResult(None, None, None, failed=True, error=str(exc))
        lambda_s = state.lambda_s
    else:
        raise ConfigError(f"unknown backend {backend!r}")

    recovery = None
    if sparse:
        recovery = support_recovery_rate(lambda_s, channel.true_support)
    return TrialResult(msd, lambda_s, recovery)


@dataclass
class RunResult:
    """Aggregate of n_trials for one (algorithm, sweep point)."""

    algorithm: str
    cfg: ExperimentConfig
    average: Trajectory | None
    trials: list[TrialResult]

    @property
    def n_failed(self) -> int:
        return sum(t.failed for t in self.trials)

    @property
    def mean_support_recovery(self) -> float | None:
        vals = [t.support_recovery for t in self.trials if t.support_recovery is not None]
        return float(np.mean(vals)) if vals else None


def run_many(
    algorithm: str, cfg: ExperimentConfig, backend: str = "auto"
) -> RunResult:
    """Run n_trials independent trials and average the survivors."""
    trials = [
        run_trial(algorithm, cfg, cfg.base_seed + i, backend=backend)
        for i in range(cfg.n_trials)
    ]
    ok = [t.msd_linear for t in trials if not t.failed]
    average = None
    if ok:
        average = Trajectory(linear_to_db(np.mean(np.stack(ok), axis=0)))
    return RunResult(algorithm, cfg, average, trials)


def _fmt(value: float) -> str:
    return f"{value:.9g}"


def sweep_points(cfg: ExperimentConfig) -> list[tuple[float | None, ExperimentConfig]]:
    """Expand the sweep grid into (sweep value, resolved config) pairs."""
    if cfg.sweep_param is None:
        return [(None, cfg)]
    points = []
    for value in cfg.sweep_values:
        overrides = {cfg.sweep_param: value}
        if cfg.sweep_param == "s":
            overrides["s"] = int(value)
        points.append(
            (value, dataclasses.replace(cfg, sweep_param=None, sweep_values=None,
                                        **overrides))
        )
    return points


def run_label(algorithm: str, cfg: ExperimentConfig, sweep_value) -> str:
    if sweep_value is None:
        return algorithm
    return f"{algorithm}_{cfg.sweep_param}_{sweep_value:g}"


def write_trajectory_csv(path, traj: Trajectory, value_column: str = "msd_db") -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iteration", value_column])
        for i, v in enumerate(traj.values_db):
            writer.writerow([i, _fmt(v)])


def read_trajectory_csv(path) -> Trajectory:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        next(reader)  # header
        values = [float(row[1]) for row in reader]
    return Trajectory(np.asarray(values))


def _complexity_for(algorithm: str, cfg: ExperimentConfig) -> int:
    if algorithm in ("rls", "irls"):
        return cm_count("rls", cfg.n_taps).cm_per_iteration
    return cm_count("spadsp_irls", cfg.n_taps, cfg.s).cm_per_iteration


def run_experiment(
    cfg: ExperimentConfig, outdir, make_figures: bool = True
) -> dict:
    """Run the full grid, write CSVs + manifest (+ figures), return the manifest.

    Output layout under ``outdir``: one ``<label>.csv`` trajectory per
    (algorithm, sweep point), ``summary.csv``, ``manifest.json``, and
    matching ``.png`` figures unless disabled.
    """
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    started = time.time()

    points = sweep_points(cfg)
    seeds = [cfg.base_seed + i for i in range(cfg.n_trials)]
    summary_rows: list[dict] = []
    outputs: list[str] = []
    n_failed_total = 0
    results_by_point: list[tuple[float | None, dict[str, RunResult]]] = []

    for sweep_value, point_cfg in points:
        point_results: dict[str, RunResult] = {}
        for algorithm in cfg.algorithms:
            result = run_many(algorithm, point_cfg)
            point_results[algorithm] = result
            n_failed_total += result.n_failed
            label = run_label(algorithm, cfg, sweep_value)
            if result.average is not None:
                csv_name = f"{label}.csv"
                write_trajectory_csv(outdir / csv_name, result.average)
                outputs.append(csv_name)
                steady = steady_state_db(result.average)
                conv = convergence_iteration(result.average, steady)
            else:
                steady = None
                conv = None
            recovery = result.mean_support_recovery
            summary_rows.append(
                {
                    "algorithm": algorithm,
                    "sweep_param": cfg.sweep_param or "",
                    "sweep_value": "" if sweep_value is None else _fmt(sweep_value),
                    "steady_state_db": "" if steady is None else _fmt(steady),
                    "convergence_iter": "" if conv is None else conv,
                    "cm_per_iteration": _complexity_for(algorithm, point_cfg),
                    "support_recovery": "" if recovery is None else _fmt(recovery),
                    "manifest": "manifest.json",
                }
            )
        results_by_point.append((sweep_value, point_results))

    write_summary_csv(outdir / "summary.csv", summary_rows)
    outputs.append("summary.csv")

    if make_figures:
        outputs.extend(_render_figures(outdir, cfg, results_by_point))

    n_runs = len(points) * len(cfg.algorithms)
    total_trials = n_runs * cfg.n_trials
    manifest = {
        "config": dataclasses.asdict(cfg),
        "trial_seeds": seeds,
        "outputs": outputs,
        "summary_rows": summary_rows,
        "n_trials_total": total_trials,
        "n_failed_total": n_failed_total,
        "failure_threshold_exceeded": n_failed_total > FAILURE_THRESHOLD * total_trials,
        "elapsed_seconds": time.time() - started,
    }
    with open(outdir / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2)
    return manifest


def _render_figures(outdir: Path, cfg: ExperimentConfig, results_by_point) -> list[str]:
    from . import plotting

    written = []
    steady_series: dict[str, list[float]] = {a: [] for a in cfg.algorithms}
    values = []
    for sweep_value, point_results in results_by_point:
        curves = {
            plotting.algorithm_label(alg): res.average
            for alg, res in point_results.items()
            if res.average is not None
        }
        suffix = (
            "" if sweep_value is None else f"_{cfg.sweep_param}_{sweep_value:g}"
        )
        name = f"msd{suffix}.png"
        title = None if sweep_value is None else f"{cfg.sweep_param} = {sweep_value:g}"
        plotting.plot_trajectories(curves, outdir / name, title=title)
        written.append(name)
        if sweep_value is not None:
            values.append(sweep_value)
            for alg, res in point_results.items():
                if res.average is not None:
                    steady_series[alg].append(steady_state_db(res.average))
    if values and all(len(v) == len(values) for v in steady_series.values()):
        name = f"steady_state_vs_{cfg.sweep_param}.png"
        plotting.plot_steady_state(
            values,
            {plotting.algorithm_label(a): v for a, v in steady_series.items()},
            cfg.sweep_param,
            outdir / name,
        )
        written.append(name)
    return written


def write_summary_csv(path, rows: list[dict]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=SUMMARY_COLUMNS)
        writer.writeheader()
        writer.writerows(rows)


def compare_summary(manifest_paths, out_path) -> list[dict]:
    """Merge completed manifests into one summary CSV.

    Raises FileNotFoundError listing every absent artifact.
    """
    all_rows = []
    missing = []
    for mpath in manifest_paths:
        mpath = Path(mpath)
        if not mpath.is_file():
            missing.append(str(mpath))
            continue
        with open(mpath) as fh:
            manifest = json.load(fh)
        for name in manifest.get("outputs", []):
            if not (mpath.parent / name).is_file():
                missing.append(str(mpath.parent / name))
        for row in manifest.get("summary_rows", []):
            row = dict(row)
            row["manifest"] = str(mpath)
            all_rows.append(row)
    if missing:
        raise FileNotFoundError("missing artifacts: " + ", ".join(missing))
    write_summary_csv(out_path, all_rows)
    return all_rows


def run_baseband_estimate(
    x: np.ndarray,
    y: np.ndarray,
    algorithm: str,
    est_cfg: EstimatorConfig,
) -> Trajectory:
    """Drive an estimator over recorded (x, y) pairs.

    Ground truth is unavailable for recordings, so the reported
    trajectory is the symbol-error power |v(n)|^2 in dB.
    """
    x = np.asarray(x, dtype=np.complex128)
    y = np.asarray(y, dtype=np.complex128)
    if x.size != y.size:
        raise ValueError("x and y must be aligned (equal length)")
    windows = input_windows(x, est_cfg.n_taps)
    step = step_function(algorithm)
    state = init_state(est_cfg)
    power = np.empty(x.size, dtype=np.float64)
    for i in range(x.size):
        out = step(state, windows[i], complex(y[i]), est_cfg)
        power[i] = max(abs(out.residual) ** 2, 1e-300)
    return Trajectory(linear_to_db(power))
