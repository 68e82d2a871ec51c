"""Exact filtering, fixed-interval smoothing and block statistics for the
scalar linear-Gaussian model.

The block covers states X_0..X_tau with X_0 ~ chi and observations
y_1..y_tau (y_t measures X_t). All recursions are scalar; loops run on
Python floats on purpose — at these sizes that is faster than vectorized
numpy and keeps the code close to the textbook recursions.
"""

from __future__ import annotations

import math

import numpy as np

from .models.base import GaussianLaw, SuffStat

_LOG_2PI = math.log(2.0 * math.pi)


def kalman_filter(theta, chi: GaussianLaw, ys):
    """Forward filtering pass.

    Returns (filtered_mean, filtered_var, pred_mean, pred_var, loglik):
    arrays indexed 0..tau for the filtered moments (entry 0 is chi) and
    1..tau (length tau) for the predictive ones; loglik is the exact
    log-likelihood of the window, accumulated from the Gaussian
    predictive densities of each observation.
    """
    phi, su2, sv2 = (float(v) for v in theta)
    ys = np.asarray(ys, dtype=float)
    tau = ys.shape[0]
    fm = np.empty(tau + 1)
    fv = np.empty(tau + 1)
    pm = np.empty(tau)
    pv = np.empty(tau)
    m, p = chi.mean, chi.var
    fm[0], fv[0] = m, p
    ll = 0.0
    for t in range(tau):
        mp = phi * m
        vp = phi * phi * p + su2
        s = vp + sv2
        resid = ys[t] - mp
        gain = vp / s
        m = mp + gain * resid
        p = vp - gain * vp
        fm[t + 1], fv[t + 1] = m, p
        pm[t], pv[t] = mp, vp
        ll -= 0.5 * (_LOG_2PI + math.log(s) + resid * resid / s)
    return fm, fv, pm, pv, ll


def rts_smoother(theta, chi: GaussianLaw, ys):
    """Fixed-interval smoothed moments of the window.

    Returns (smoothed_mean, smoothed_var, lag_one_cov): the first two
    indexed 0..tau, the last of length tau with entry t the smoothed
    Cov(X_t, X_{t+1}).
    """
    phi = float(theta[0])
    fm, fv, pm, pv, _ = kalman_filter(theta, chi, ys)
    tau = len(ys)
    sm = np.empty(tau + 1)
    sv = np.empty(tau + 1)
    lag = np.empty(tau)
    sm[tau], sv[tau] = fm[tau], fv[tau]
    for t in range(tau - 1, -1, -1):
        gain = phi * fv[t] / pv[t]
        sm[t] = fm[t] + gain * (sm[t + 1] - pm[t])
        sv[t] = fv[t] + gain * gain * (sv[t + 1] - pv[t])
        lag[t] = gain * sv[t + 1]
    return sm, sv, lag


def block_statistic(theta, chi: GaussianLaw, ys):
    """Block-averaged smoothed sufficient statistic and terminal filter.

    Statistic coordinates are the per-observation averages of the
    smoothed E[X_{t-1}^2], E[X_{t-1} X_t], E[X_t^2], y_t E[X_t] and
    y_t^2.
    """
    ys = np.asarray(ys, dtype=float)
    fm, fv, _, _, _ = kalman_filter(theta, chi, ys)
    sm, sv, lag = rts_smoother(theta, chi, ys)
    ex2 = sv + sm**2
    values = np.array(
        [
            ex2[:-1].mean(),
            (lag + sm[:-1] * sm[1:]).mean(),
            ex2[1:].mean(),
            (ys * sm[1:]).mean(),
            (ys**2).mean(),
        ]
    )
    return SuffStat(values, len(ys)), GaussianLaw(fm[-1], fv[-1])
