"""Numba-compiled trial loops.

The estimator ops in :mod:`spadsp.estimators` are the reference
implementation; these kernels run the same recursions as compiled
loops so Monte-Carlo sweeps finish in seconds on one core. The
harness falls back to the reference path when numba is unavailable,
and the test suite asserts the two paths agree.
"""

from __future__ import annotations

import numpy as np

try:
    from numba import njit

    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover
    NUMBA_AVAILABLE = False

    def njit(*args, **kwargs):  # pragma: no cover
        def wrap(fn):
            return fn

        return wrap if not (args and callable(args[0])) else args[0]


@njit(cache=True)
def _top_s(weights: np.ndarray, s: int) -> np.ndarray:
    """Ascending indices of the s largest weights; ties to smaller index."""
    order = np.argsort(-weights, kind="mergesort")
    return np.sort(order[:s])


@njit(cache=True)
def _run_loop(
    x,
    y,
    w_true,
    L,
    s,
    mu,
    lam,
    delta,
    eta,
    k1,
    k2,
    pll_on,
    sparse,
):
    """Full estimator run; returns (msd_linear, final support, ok flag).

    ``sparse`` off runs the same arithmetic with the support pinned to
    all L taps and the proxy/selection stages skipped, which is exactly
    the (I)RLS reduction.
    """
    n = x.size
    h_hat = np.zeros(L, dtype=np.complex128)
    h_tilde = np.zeros(L, dtype=np.complex128)
    p = np.zeros(L, dtype=np.complex128)
    P = np.zeros((L, L), dtype=np.complex128)
    for i in range(L):
        P[i, i] = 1.0 / delta
    theta = 0.0
    phi_sum = 0.0
    v_prev = 0.0 + 0.0j
    have_v = False
    lambda_s = np.arange(s)
    full_idx = np.arange(L)
    msd = np.empty(n, dtype=np.float64)
    mags = np.empty(L, dtype=np.float64)
    xw = np.zeros(L, dtype=np.complex128)
    xm = np.zeros(L, dtype=np.complex128)
    x_prev = np.zeros(L, dtype=np.complex128)
    y_prev = 0.0 + 0.0j
    h_prev = np.zeros(L, dtype=np.complex128)
    in_set = np.zeros(L, dtype=np.bool_)
    denom_true = 0.0
    for i in range(L):
        denom_true += w_true[i].real ** 2 + w_true[i].imag ** 2

    for step in range(n):
        for l in range(L):
            xw[l] = x[step - l] if step - l >= 0 else 0.0 + 0.0j
        yi = y[step]
        if not have_v:
            v_prev = yi
            have_v = True
        rot = np.exp(1j * theta)

        if sparse:
            # proxy + subspace-pursuit support merge
            ph = np.conj(rot) * v_prev
            for l in range(L):
                p[l] = eta * p[l] + ph * np.conj(xw[l])
                mags[l] = p[l].real ** 2 + p[l].imag ** 2
            omega = _top_s(mags, s)
            in_set[:] = False
            for j in omega:
                in_set[j] = True
            for j in lambda_s:
                in_set[j] = True
            lam_idx = np.where(in_set)[0]
            # intermediate estimator lives on the merged support
            for l in range(L):
                if not in_set[l]:
                    h_hat[l] = 0.0 + 0.0j
                    xm[l] = 0.0 + 0.0j
                else:
                    xm[l] = xw[l]
        else:
            lam_idx = full_idx
            xm[:] = xw

        # Kalman gain from P(n-1)
        Px = np.dot(P, xm)
        denom = lam
        for l in range(L):
            denom += (np.conj(xm[l]) * Px[l]).real
        k = (rot / denom) * Px
        if not np.isfinite(denom):
            return msd, lambda_s, False

        # apriori error and masked coefficient update
        pred = 0.0 + 0.0j
        for j in lam_idx:
            pred += np.conj(h_hat[j]) * xw[j]
        e = yi - rot * pred
        ce = mu * np.conj(e)
        for j in lam_idx:
            h_hat[j] += ce * k[j]

        # inverse-covariance recursion + symmetrization
        xhP = np.dot(np.conj(xm), P)
        crot = np.conj(rot)
        for a in range(L):
            cka = crot * k[a]
            for b in range(L):
                P[a, b] = (P[a, b] - cka * xhP[b]) / lam
        for a in range(L):
            for b in range(a + 1, L):
                m = 0.5 * (P[a, b] + np.conj(P[b, a]))
                P[a, b] = m
                P[b, a] = np.conj(m)
            P[a, a] = P[a, a].real + 0.0j
        if not np.isfinite(P[0, 0].real):
            return msd, lambda_s, False

        # prune back to the s largest coefficients inside Lambda
        if sparse:
            sub = np.empty(lam_idx.size, dtype=np.float64)
            for t in range(lam_idx.size):
                hv = h_hat[lam_idx[t]]
                sub[t] = hv.real**2 + hv.imag**2
            lambda_s = lam_idx[_top_s(sub, s)]
        h_tilde[:] = 0.0 + 0.0j
        for j in lambda_s:
            h_tilde[j] = h_hat[j]

        # residual and PLL
        v = 0.0 + 0.0j
        for l in range(L):
            v += np.conj(h_tilde[l]) * xw[l]
        v = yi - rot * v
        v_prev = v
        if pll_on:
            acc = 0.0 + 0.0j
            for l in range(L):
                acc += np.conj(h_prev[l]) * x_prev[l]
            phi = (np.conj(y_prev) * rot * acc).imag
            phi_sum += phi
            theta = theta + k1 * phi + k2 * phi_sum
        for l in range(L):
            x_prev[l] = xw[l]
            h_prev[l] = h_hat[l]
        y_prev = yi

        err = 0.0
        for l in range(L):
            d = h_tilde[l] - w_true[l]
            err += d.real**2 + d.imag**2
        m_lin = err / denom_true
        msd[step] = m_lin if m_lin > 1e-300 else 1e-300
        if not np.isfinite(m_lin):
            return msd, lambda_s, False

    return msd, lambda_s, True


def run_trial_kernel(x, y, w_true, cfg, sparse: bool):
    """Wrapper: run a whole trial compiled; cfg is an EstimatorConfig."""
    msd, lambda_s, ok = _run_loop(
        np.ascontiguousarray(x, dtype=np.complex128),
        np.ascontiguousarray(y, dtype=np.complex128),
        np.ascontiguousarray(w_true, dtype=np.complex128),
        cfg.n_taps,
        cfg.s,
        cfg.mu,
        cfg.lam,
        cfg.delta,
        cfg.eta,
        cfg.k1,
        cfg.k2,
        cfg.pll_enabled,
        sparse,
    )
    return msd, np.asarray(lambda_s), ok
