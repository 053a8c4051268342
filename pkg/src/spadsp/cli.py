"""Command-line experiment harness.

Subcommands:

* ``simulate``   -- synthetic Monte-Carlo experiments (CSV + figures)
* ``estimate``   -- run an estimator over a recorded baseband file
* ``compare``    -- merge run manifests into one summary CSV
* ``complexity`` -- per-iteration complex-multiplication counts

Exit codes: 0 success, 1 configuration error, 2 I/O error,
3 numerical-failure threshold exceeded.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from . import harness
from .estimators import EstimatorConfig
from .harness import ConfigError, ExperimentConfig
from .metrics import cm_count
from .signal_model import BasebandFormatError, ingest_baseband

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_IO = 2
EXIT_NUMERICAL = 3

# defaults for runs on recorded data (no ground-truth channel)
ESTIMATE_DEFAULTS = {
    "s": 15,
    "eta": 0.999,
    "mu": 1.6,
    "k1": -5e-12,
}


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems as configuration errors."""

    def error(self, message):
        raise ConfigError(message)


def _add_common_estimator_args(p, *, s_default, eta_default, mu_default):
    p.add_argument("--taps", "-L", type=int, default=64, dest="n_taps",
                   help="channel length L")
    p.add_argument("--support-size", "-s", type=int, default=s_default, dest="s",
                   help="support set size s")
    p.add_argument("--mu", type=float, default=mu_default, help="step size")
    p.add_argument("--lam", type=float, default=0.99, help="RLS forgetting factor")
    p.add_argument("--delta", type=float, default=100.0,
                   help="P(0) = I/delta initialization")
    p.add_argument("--eta", type=float, default=eta_default,
                   help="proxy forgetting factor")
    p.add_argument("--pll", action="store_true", dest="pll_enabled",
                   help="enable the second-order PLL")
    p.add_argument("--k1", type=float, default=0.0, help="PLL proportional gain")
    p.add_argument("--k2", type=float, default=None,
                   help="PLL integral gain (default k1/10)")


def build_parser() -> _Parser:
    parser = _Parser(prog="spadsp", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run synthetic Monte-Carlo experiments")
    sim.add_argument("--config", type=Path, default=None,
                     help="flat key=value config file; flags override it")
    sim.add_argument("--out", type=Path, default=Path("run"),
                     help="output directory")
    sim.add_argument("--scenario", choices=harness.SCENARIO_CHOICES[:2],
                     default="paper-synthetic")
    _add_common_estimator_args(sim, s_default=12, eta_default=0.5, mu_default=1.0)
    sim.add_argument("--snr-db", type=float, default=20.0, dest="snr_db")
    sim.add_argument("--iterations", type=int, default=1000, dest="n_iterations")
    sim.add_argument("--trials", type=int, default=200, dest="n_trials")
    sim.add_argument("--seed", type=int, default=0, dest="base_seed")
    sim.add_argument("--algorithms", default="rls,spadsp_irls",
                     help="comma-separated subset of "
                          + ",".join(harness.ALGORITHM_CHOICES))
    sim.add_argument("--phase-rate", type=float, default=0.0, dest="phase_rate",
                     help="linear Doppler phase ramp, radians/sample")
    sim.add_argument("--true-sparsity", type=int, default=4, dest="true_sparsity",
                     help="active taps for the custom-channel scenario")
    sim.add_argument("--sweep", choices=harness.SWEEP_CHOICES, default=None,
                     dest="sweep_param")
    sim.add_argument("--sweep-values", default=None, dest="sweep_values",
                     help="comma-separated values for the swept parameter")
    sim.add_argument("--no-figures", action="store_true",
                     help="write CSV only, skip figure rendering")

    est = sub.add_parser("estimate", help="run an estimator on a baseband recording")
    est.add_argument("--input", type=Path, required=True, help="baseband file")
    est.add_argument("--format", choices=("csv", "interleaved-f32"), default="csv")
    est.add_argument("--out", type=Path, default=Path("estimate"),
                     help="output directory")
    est.add_argument("--algorithm", choices=harness.ALGORITHM_CHOICES,
                     default="spadsp_irls")
    _add_common_estimator_args(
        est,
        s_default=ESTIMATE_DEFAULTS["s"],
        eta_default=ESTIMATE_DEFAULTS["eta"],
        mu_default=ESTIMATE_DEFAULTS["mu"],
    )
    est.add_argument("--no-figures", action="store_true")

    cmp_ = sub.add_parser("compare", help="merge manifests into one summary CSV")
    cmp_.add_argument("manifests", nargs="+", type=Path)
    cmp_.add_argument("--out", type=Path, default=Path("summary.csv"))

    cx = sub.add_parser("complexity", help="complex multiplications per iteration")
    cx.add_argument("--taps", "-L", type=int, default=64, dest="n_taps")
    cx.add_argument("--support-size", "-s", type=int, default=12, dest="s")

    return parser


def parse_config_file(path: Path) -> dict:
    """Flat ``key = value`` lines; '#' starts a comment."""
    values = {}
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        key, value = (part.strip() for part in line.split("=", 1))
        values[key.replace("-", "_")] = value
    return values


_CONFIG_FIELDS = {f.name: f.type for f in dataclasses.fields(ExperimentConfig)}


def _coerce(key: str, raw: str):
    if key in ("algorithms", "sweep_values"):
        return raw
    if key in ("n_taps", "s", "n_iterations", "n_trials", "base_seed",
               "true_sparsity"):
        return int(raw)
    if key == "pll_enabled":
        return raw.lower() in ("1", "true", "yes", "on")
    if key in ("scenario", "sweep_param"):
        return raw
    return float(raw)


def _experiment_config(args) -> ExperimentConfig:
    file_values = parse_config_file(args.config) if args.config else {}
    defaults = build_parser().parse_args(["simulate"])
    merged = {}
    for key in _CONFIG_FIELDS:
        if key in ("algorithms", "sweep_values"):
            continue
        cli_value = getattr(args, key, None)
        if key in file_values and getattr(defaults, key, None) == cli_value:
            try:
                merged[key] = _coerce(key, file_values[key])
            except ValueError:
                raise ConfigError(
                    f"bad value for {key!r} in config file: {file_values[key]!r}"
                ) from None
        elif cli_value is not None:
            merged[key] = cli_value

    algorithms_raw = args.algorithms
    if "algorithms" in file_values and args.algorithms == defaults.algorithms:
        algorithms_raw = file_values["algorithms"]
    merged["algorithms"] = tuple(a.strip() for a in algorithms_raw.split(",") if a.strip())

    sweep_values_raw = args.sweep_values
    if "sweep_values" in file_values and args.sweep_values is None:
        sweep_values_raw = file_values["sweep_values"]
    if sweep_values_raw is not None:
        try:
            merged["sweep_values"] = tuple(
                float(v) for v in str(sweep_values_raw).split(",") if v.strip()
            )
        except ValueError as exc:
            raise ConfigError(f"bad sweep values: {exc}") from None

    if merged.get("k2") is None:
        merged["k2"] = merged.get("k1", 0.0) / 10.0
    return ExperimentConfig(**merged)


def _cmd_simulate(args) -> int:
    cfg = _experiment_config(args)
    manifest = harness.run_experiment(cfg, args.out, make_figures=not args.no_figures)
    print(f"wrote {len(manifest['outputs'])} artifacts to {args.out}")
    if manifest["n_failed_total"]:
        print(
            f"warning: {manifest['n_failed_total']}/{manifest['n_trials_total']} "
            "trials diverged",
            file=sys.stderr,
        )
    if manifest["failure_threshold_exceeded"]:
        return EXIT_NUMERICAL
    return EXIT_OK


def _cmd_estimate(args) -> int:
    x, y = ingest_baseband(args.input, args.format)
    k2 = args.k2 if args.k2 is not None else args.k1 / 10.0
    est_cfg = EstimatorConfig(
        n_taps=args.n_taps,
        s=args.s,
        mu=args.mu,
        lam=args.lam,
        delta=args.delta,
        eta=args.eta,
        k1=args.k1,
        k2=k2,
        pll_enabled=args.pll_enabled,
    )
    traj = harness.run_baseband_estimate(x, y, args.algorithm, est_cfg)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    csv_name = f"{args.algorithm}_residual.csv"
    harness.write_trajectory_csv(
        outdir / csv_name, traj, value_column="residual_power_db"
    )
    outputs = [csv_name]
    if not args.no_figures:
        from . import plotting

        fig_name = f"{args.algorithm}_residual.png"
        plotting.plot_trajectories(
            {plotting.algorithm_label(args.algorithm): traj},
            outdir / fig_name,
            ylabel="|v(n)|^2 (dB)",
        )
        outputs.append(fig_name)
    with open(outdir / "manifest.json", "w") as fh:
        json.dump(
            {
                "input": str(args.input),
                "format": args.format,
                "algorithm": args.algorithm,
                "estimator": dataclasses.asdict(est_cfg),
                "n_samples": int(x.size),
                "outputs": outputs,
                "summary_rows": [],
            },
            fh,
            indent=2,
        )
    print(f"wrote {csv_name} ({x.size} samples) to {outdir}")
    return EXIT_OK


def _cmd_compare(args) -> int:
    rows = harness.compare_summary(args.manifests, args.out)
    print(f"wrote {len(rows)} summary rows to {args.out}")
    return EXIT_OK


def _cmd_complexity(args) -> int:
    try:
        rls = cm_count("rls", args.n_taps)
        sp = cm_count("spadsp_irls", args.n_taps, args.s)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    print("algorithm,L,s,cm_per_iteration")
    print(f"rls,{args.n_taps},,{rls.cm_per_iteration}")
    print(f"spadsp_irls,{args.n_taps},{args.s},{sp.cm_per_iteration}")
    return EXIT_OK


_COMMANDS = {
    "simulate": _cmd_simulate,
    "estimate": _cmd_estimate,
    "compare": _cmd_compare,
    "complexity": _cmd_complexity,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (FileNotFoundError, BasebandFormatError, OSError) as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
