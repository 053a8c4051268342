"""Sparse adaptive subspace-pursuit RLS channel estimation.

Library + CLI for estimating sparse (e.g. underwater acoustic) channels
with a support-tracking RLS family:

* ``rls`` -- standard exponentially weighted RLS over all taps,
* ``irls`` -- RLS with an explicit step size in the coefficient update,
* ``spadsp_rls`` / ``spadsp_irls`` -- subspace-pursuit variants that
  track a size-``s`` support set and update only inside it,

plus a second-order PLL for carrier-phase (Doppler) compensation, a
synthetic sparse-channel simulator, MSD/complexity metrics, and a
Monte-Carlo experiment harness with CSV and figure output.
"""

from .support import SupportSet, apply_mask, sparsify, support_union, top_s_support
from .signal_model import (
    PhaseTrajectory,
    SparseChannel,
    generate_input,
    ingest_baseband,
    make_paper_channel,
    noise_variance_from_snr,
)
from .estimators import (
    EstimationDivergedError,
    EstimatorConfig,
    EstimatorState,
    StepOutput,
    init_state,
    rls_step,
    spadsp_irls_step,
)
from .metrics import (
    ComplexityReport,
    Trajectory,
    average_trajectories,
    cm_count,
    msd_db,
    steady_state_db,
    support_recovery_rate,
)
from .harness import ExperimentConfig, run_experiment

__all__ = [
    "SupportSet",
    "top_s_support",
    "support_union",
    "apply_mask",
    "sparsify",
    "SparseChannel",
    "PhaseTrajectory",
    "make_paper_channel",
    "noise_variance_from_snr",
    "generate_input",
    "ingest_baseband",
    "EstimatorConfig",
    "EstimatorState",
    "StepOutput",
    "EstimationDivergedError",
    "init_state",
    "spadsp_irls_step",
    "rls_step",
    "Trajectory",
    "ComplexityReport",
    "msd_db",
    "average_trajectories",
    "steady_state_db",
    "support_recovery_rate",
    "cm_count",
    "ExperimentConfig",
    "run_experiment",
]

__version__ = "0.1.0"
