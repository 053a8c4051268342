"""Support-tracking RLS estimator family with second-order PLL.

One iteration of the sparse subspace-pursuit estimator:

1. proxy   p(n) = eta*p(n-1) + e^{-j th} x*(n) v(n-1)
2. nominate Omega = top-s of p(n); merge Lambda = Omega U supp(h_tilde)
3. masked gain k(n) = e^{j th} P x_L / (lam + x_L^H P x_L)
4. apriori error, step-size coefficient update on Lambda
5. inverse-covariance recursion + Hermitian symmetrization
6. prune back to the s largest coefficients -> h_tilde
7. residual v(n); optional PLL phase update

Setting s = L removes the sparse machinery (step-size RLS); mu = 1
removes the step size; both together give textbook exponentially
weighted RLS. ``rls_step`` runs the same arithmetic without the
proxy/prune stages so the reductions agree trajectory-for-trajectory.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .support import SupportSet, apply_mask, sparsify, top_s_support


class EstimationDivergedError(RuntimeError):
    """Nonfinite gain or covariance: the recursion has blown up."""


@dataclass(frozen=True)
class EstimatorConfig:
    """Algorithm parameters. ``s = n_taps`` disables sparsification."""

    n_taps: int
    s: int
    mu: float = 1.0
    lam: float = 0.99  # RLS forgetting factor
    delta: float = 100.0  # P(0) = I / delta
    eta: float = 0.5  # proxy forgetting factor
    k1: float = 0.0  # PLL proportional gain
    k2: float = 0.0  # PLL integral gain
    pll_enabled: bool = False

    def __post_init__(self):
        if self.n_taps < 1:
            raise ValueError("n_taps must be positive")
        if not 1 <= self.s <= self.n_taps:
            raise ValueError(f"s must be in [1, {self.n_taps}], got {self.s}")
        if not 0.0 < self.lam <= 1.0:
            raise ValueError("lam must be in (0, 1]")
        if not 0.0 < self.eta <= 1.0:
            raise ValueError("eta must be in (0, 1]")
        if self.delta <= 0.0:
            raise ValueError("delta must be positive")
        if self.mu <= 0.0:
            raise ValueError("mu must be positive")


@dataclass
class EstimatorState:
    """Mutable per-run state; one step call at a time per instance."""

    h_hat: np.ndarray  # intermediate estimator
    h_tilde: np.ndarray  # applied (pruned) estimator
    p_proxy: np.ndarray
    P: np.ndarray  # inverse input covariance, Hermitian
    theta_hat: float
    phi_sum: float
    v_prev: complex | None  # symbol estimation error, None before first sample
    lambda_set: SupportSet
    lambda_s: SupportSet
    # one-step retention for the PLL phase detector
    x_prev: np.ndarray = field(default=None)  # type: ignore[assignment]
    y_prev: complex = 0.0
    h_hat_prev: np.ndarray = field(default=None)  # type: ignore[assignment]


@dataclass(frozen=True)
class StepOutput:
    apriori_error: complex
    residual: complex
    h_applied: np.ndarray
    support: SupportSet


def init_state(cfg: EstimatorConfig) -> EstimatorState:
    """Zero coefficients, P = I/delta, initial support {0, ..., s-1}."""
    L = cfg.n_taps
    return EstimatorState(
        h_hat=np.zeros(L, dtype=np.complex128),
        h_tilde=np.zeros(L, dtype=np.complex128),
        p_proxy=np.zeros(L, dtype=np.complex128),
        P=np.eye(L, dtype=np.complex128) / cfg.delta,
        theta_hat=0.0,
        phi_sum=0.0,
        v_prev=None,
        lambda_set=SupportSet(tuple(range(cfg.s)), L),
        lambda_s=SupportSet(tuple(range(cfg.s)), L),
        x_prev=np.zeros(L, dtype=np.complex128),
        y_prev=0.0,
        h_hat_prev=np.zeros(L, dtype=np.complex128),
    )


def proxy_update(
    state: EstimatorState, x_window: np.ndarray, cfg: EstimatorConfig
) -> np.ndarray:
    """p(n) = eta*p(n-1) + e^{-j theta_hat} x*(n) v(n-1)."""
    if state.v_prev is None:
        raise RuntimeError("proxy_update needs v_prev; feed the first sample first")
    state.p_proxy = cfg.eta * state.p_proxy + (
        np.exp(-1j * state.theta_hat) * state.v_prev
    ) * np.conj(x_window)
    return state.p_proxy


def merge_support(state: EstimatorState, cfg: EstimatorConfig) -> SupportSet:
    """Lambda = top-s of the proxy, merged with the retained support.

    The intermediate estimator lives on the merged support: coefficients
    of taps that dropped out of Lambda are discarded, so a re-nominated
    tap restarts from zero instead of resuming a stale noisy value
    (which would inflate the steady-state error well above the
    sparse-update advantage).
    """
    omega = top_s_support(state.p_proxy, cfg.s)
    state.lambda_set = omega.union(state.lambda_s)
    state.h_hat = apply_mask(state.h_hat, state.lambda_set)
    return state.lambda_set


def compute_gain(
    state: EstimatorState, x_masked: np.ndarray, cfg: EstimatorConfig
) -> np.ndarray:
    """Kalman gain for the masked regressor against P(n-1)."""
    Px = state.P @ x_masked
    denom = cfg.lam + float(np.real(np.vdot(x_masked, Px)))
    k = (np.exp(1j * state.theta_hat) / denom) * Px
    if not np.isfinite(denom) or not np.all(np.isfinite(k.view(np.float64))):
        raise EstimationDivergedError("nonfinite Kalman gain")
    return k


def apriori_error(
    state: EstimatorState, x_window: np.ndarray, y: complex
) -> complex:
    """e(n|n-1) = y(n) - e^{j theta_hat} h_hat_Lambda^H x_Lambda(n)."""
    idx = state.lambda_set.as_array()
    pred = np.exp(1j * state.theta_hat) * np.vdot(state.h_hat[idx], x_window[idx])
    return complex(y - pred)


def coeff_update(
    state: EstimatorState, k: np.ndarray, e: complex, cfg: EstimatorConfig
) -> None:
    """h_hat on Lambda += mu * k * e^{*}; entries outside Lambda untouched."""
    idx = state.lambda_set.as_array()
    state.h_hat[idx] += cfg.mu * np.conj(e) * k[idx]


def covariance_update(
    state: EstimatorState, k: np.ndarray, x_masked: np.ndarray, cfg: EstimatorConfig
) -> None:
    """P(n) = [P - e^{-j th} k (x_L^H P)] / lam, then symmetrized."""
    xhP = np.conj(x_masked) @ state.P
    # broadcasting beats np.outer here (hot path)
    P = (state.P - (np.exp(-1j * state.theta_hat) * k)[:, None] * xhP) / cfg.lam
    P = 0.5 * (P + P.conj().T)
    if not np.all(np.isfinite(P.view(np.float64))):
        raise EstimationDivergedError("nonfinite inverse covariance")
    state.P = P


def prune(state: EstimatorState, cfg: EstimatorConfig) -> SupportSet:
    """Keep the s largest coefficients inside Lambda; sparsify h_tilde."""
    idx = state.lambda_set.as_array()
    sub = state.h_hat[idx]
    order = np.argsort(-(sub.real**2 + sub.imag**2), kind="stable")
    state.lambda_s = SupportSet.from_iterable(idx[order[: cfg.s]], cfg.n_taps)
    state.h_tilde = sparsify(state.h_hat, state.lambda_s)
    return state.lambda_s


def residual(state: EstimatorState, x_window: np.ndarray, y: complex) -> complex:
    """v(n) = y(n) - e^{j theta_hat} h_tilde^H x(n); retained for the proxy."""
    v = complex(
        y - np.exp(1j * state.theta_hat) * np.vdot(state.h_tilde, x_window)
    )
    state.v_prev = v
    return v


def pll_update(
    state: EstimatorState, x_window: np.ndarray, y: complex, cfg: EstimatorConfig
) -> float:
    """Second-order phase update from the previous step's detector output.

    phi = Im(y_prev^* e^{j theta_hat} h_hat_prev^H x_prev), then
    theta_hat += k1*phi + k2*sum(phi).
    """
    phi = float(
        np.imag(
            np.conj(state.y_prev)
            * np.exp(1j * state.theta_hat)
            * np.vdot(state.h_hat_prev, state.x_prev)
        )
    )
    state.phi_sum += phi
    state.theta_hat += cfg.k1 * phi + cfg.k2 * state.phi_sum
    return state.theta_hat


def _retain(state: EstimatorState, x_window: np.ndarray, y: complex) -> None:
    state.x_prev = np.array(x_window, dtype=np.complex128)
    state.y_prev = complex(y)
    state.h_hat_prev = state.h_hat.copy()


def spadsp_irls_step(
    state: EstimatorState, x_window: np.ndarray, y: complex, cfg: EstimatorConfig
) -> StepOutput:
    """One full sparse subspace-pursuit iteration."""
    x_window = np.asarray(x_window, dtype=np.complex128)
    if x_window.size != cfg.n_taps:
        raise ValueError("x_window length must equal n_taps")
    if state.v_prev is None:
        state.v_prev = complex(y)  # v(0) = y(1)
    proxy_update(state, x_window, cfg)
    merge_support(state, cfg)
    x_masked = apply_mask(x_window, state.lambda_set)
    k = compute_gain(state, x_masked, cfg)
    e = apriori_error(state, x_window, y)
    coeff_update(state, k, e, cfg)
    covariance_update(state, k, x_masked, cfg)
    support = prune(state, cfg)
    v = residual(state, x_window, y)
    if cfg.pll_enabled:
        pll_update(state, x_window, y, cfg)
    _retain(state, x_window, y)
    return StepOutput(e, v, state.h_tilde.copy(), support)


def rls_step(
    state: EstimatorState, x_window: np.ndarray, y: complex, cfg: EstimatorConfig
) -> StepOutput:
    """Exponentially weighted RLS over all taps (mu = 1 gives the textbook form)."""
    x_window = np.asarray(x_window, dtype=np.complex128)
    if x_window.size != cfg.n_taps:
        raise ValueError("x_window length must equal n_taps")
    if state.v_prev is None:
        state.v_prev = complex(y)
    full = SupportSet.full(cfg.n_taps)
    state.lambda_set = full
    x_masked = x_window.copy()
    k = compute_gain(state, x_masked, cfg)
    e = apriori_error(state, x_window, y)
    coeff_update(state, k, e, cfg)
    covariance_update(state, k, x_masked, cfg)
    state.lambda_s = full
    state.h_tilde = state.h_hat.copy()
    v = residual(state, x_window, y)
    if cfg.pll_enabled:
        pll_update(state, x_window, y, cfg)
    _retain(state, x_window, y)
    return StepOutput(e, v, state.h_tilde.copy(), full)
