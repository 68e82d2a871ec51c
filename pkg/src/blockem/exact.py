"""Exact forward-backward smoothing for finite state spaces.

The core routines work on dense arrays (a transition matrix, a matrix of
per-step emission likelihoods and an initial probability vector) so they
can also serve grid discretizations of continuous models; thin wrappers
accept a FiniteStateModel and a parameter vector.

Window convention: an initial law ``chi`` sits at some time index r and
the observations cover times r+1..t. Functions taking a plain block of
observations treat it as such a window with r = 0; functions that need
absolute indices (the forgetting gap) take the full observation array
``ys`` with ``ys[i]`` the observation at time i.

Per-state additive accumulators give every block statistic in a single
forward pass: with B_t the backward kernel built from the filtering law,

    T_{t+1}(x') = sum_x B_t(x', x) [T_t(x) + S(x, x', y_{t+1})],

and the smoothed sum of increments up to t is sum_x filter_t(x) T_t(x).
Each step renormalizes by the one-step likelihood, which also yields the
log-likelihood of the window.
"""

from __future__ import annotations

import numpy as np

from .models.base import SuffStat


class SmoothingUnderflowError(FloatingPointError):
    """A one-step normalization constant vanished (observation impossible
    under the model's support)."""


def _as_law(chi, d):
    chi = np.asarray(chi, dtype=float)
    if chi.shape != (d,):
        raise ValueError(f"initial law must have shape ({d},)")
    if np.any(chi < 0.0) or abs(chi.sum() - 1.0) > 1e-12:
        raise ValueError("initial law must be a probability vector")
    return chi


def forward_filter(trans, liks, chi):
    """Normalized forward pass.

    Returns (filters, predicted, step_norms): filters has shape
    (T+1, d) with row 0 equal to chi; predicted[t] is the one-step
    prediction of X_{t+1} before seeing y_{t+1}; step_norms[t] is the
    conditional likelihood of y_{t+1} given the past.
    """
    trans = np.asarray(trans, dtype=float)
    liks = np.atleast_2d(np.asarray(liks, dtype=float))
    d = trans.shape[0]
    chi = _as_law(chi, d)
    n = liks.shape[0]
    filters = np.empty((n + 1, d))
    predicted = np.empty((n, d))
    norms = np.empty(n)
    filters[0] = chi
    for t in range(n):
        pred = filters[t] @ trans
        unnorm = pred * liks[t]
        c = unnorm.sum()
        if c <= 0.0 or not np.isfinite(c):
            raise SmoothingUnderflowError(f"zero normalization at step {t}")
        predicted[t] = pred
        filters[t + 1] = unnorm / c
        norms[t] = c
    return filters, predicted, norms


def forward_backward(trans, liks, chi):
    """Smoothed marginals and pair marginals of the window.

    Returns (smoothed, pairs): smoothed[k] is the law of X_{r+k} given
    the window, k = 0..T; pairs[k] is the joint law of (X_{r+k},
    X_{r+k+1}), k = 0..T-1. Each pairs[k] marginalizes to the adjacent
    smoothed laws.
    """
    trans = np.asarray(trans, dtype=float)
    liks = np.atleast_2d(np.asarray(liks, dtype=float))
    filters, predicted, _ = forward_filter(trans, liks, chi)
    n = liks.shape[0]
    d = trans.shape[0]
    smoothed = np.empty((n + 1, d))
    pairs = np.empty((n, d, d))
    smoothed[n] = filters[n]
    for t in range(n - 1, -1, -1):
        with np.errstate(invalid="ignore", divide="ignore"):
            ratio = np.where(predicted[t] > 0.0, smoothed[t + 1] / predicted[t], 0.0)
        pairs[t] = (filters[t][:, None] * trans) * ratio[None, :]
        smoothed[t] = pairs[t].sum(axis=1)
    return smoothed, pairs


def window_loglik(trans, liks, chi) -> float:
    """Log-likelihood of the window via the per-step normalizers."""
    _, _, norms = forward_filter(trans, liks, chi)
    return float(np.log(norms).sum())


def _h_matrix(h, d, y):
    """Evaluate a pair functional on the state grid at one observation."""
    if callable(h):
        probe = np.asarray(h(0, 0, y), dtype=float)
        out = np.empty((d, d) + probe.shape)
        for x in range(d):
            for xp in range(d):
                out[x, xp] = h(x, xp, y)
        return out
    h = np.asarray(h, dtype=float)
    if h.shape[:2] != (d, d):
        raise ValueError("array-valued h must have leading shape (d, d)")
    return h


def oscillation(hmat) -> float:
    """max - min of a pair functional over the state grid; for
    vector-valued h, the largest componentwise oscillation."""
    hmat = np.asarray(hmat, dtype=float)
    if hmat.ndim == 2:
        return float(hmat.max() - hmat.min())
    flat = hmat.reshape(-1, hmat.shape[-1])
    return float((flat.max(axis=0) - flat.min(axis=0)).max())


def smoothed_functional(model, theta, chi, r, s, t, h, ys):
    """Conditional expectation of h(X_{s-1}, X_s, y_s) given the window
    y_{r+1}..y_t with X_r ~ chi.

    ``ys`` is indexed by absolute time; requires r < s <= t < len(ys).
    ``h`` is a callable (x, x', y) -> scalar or vector, or an array of
    leading shape (d, d).
    """
    if not (r < s <= t):
        raise ValueError("need r < s <= t")
    trans = model.transition_matrix(theta)
    liks = model.emission_likelihoods(theta, ys[r + 1 : t + 1])
    _, pairs = forward_backward(trans, liks, chi)
    hmat = _h_matrix(h, model.d, ys[s])
    pair = pairs[s - r - 1]
    if hmat.ndim == 2:
        return float((pair * hmat).sum())
    return np.tensordot(pair, hmat, axes=([0, 1], [0, 1]))


def additive_smoothed_sum(trans, liks, chi, inc_fn, k):
    """Single-pass smoothed sum of per-step increments.

    ``inc_fn(t)`` returns the (d, d, k) increment tensor for step t
    (observation liks[t]). Returns (total, terminal_filter) where total
    = E[sum_t inc(X_{t-1}, X_t, t) | window], shape (k,).
    """
    trans = np.asarray(trans, dtype=float)
    liks = np.atleast_2d(np.asarray(liks, dtype=float))
    d = trans.shape[0]
    chi = _as_law(chi, d)
    filt = chi
    acc = np.zeros((d, k))
    for t in range(liks.shape[0]):
        pred = filt @ trans
        unnorm = pred * liks[t]
        c = unnorm.sum()
        if c <= 0.0 or not np.isfinite(c):
            raise SmoothingUnderflowError(f"zero normalization at step {t}")
        new_filt = unnorm / c
        # backward kernel B[x', x] = filt[x] trans[x, x'] / pred[x']
        with np.errstate(invalid="ignore", divide="ignore"):
            w = np.where(pred[None, :] > 0.0, filt[:, None] * trans / pred[None, :], 0.0)
        acc = w.T @ acc + np.einsum("xp,xpk->pk", w, inc_fn(t))
        filt = new_filt
    return filt @ acc, filt


def block_statistic(model, theta, chi, ys):
    """Block-averaged smoothed sufficient statistic and terminal filter.

    ``ys`` is the block of observations, treated as y_{r+1}..y_{r+tau}
    with X_r ~ chi. The result averages the smoothed statistic increments
    over the tau observations.
    """
    ys = np.atleast_1d(np.asarray(ys, dtype=float))
    tau = ys.shape[0]
    trans = model.transition_matrix(theta)
    liks = model.emission_likelihoods(theta, ys)
    c0, c1, c2 = model.stat_increment_tensors()
    inc = lambda t: c0 + ys[t] * c1 + ys[t] * ys[t] * c2
    total, filt = additive_smoothed_sum(trans, liks, chi, inc, model.dim_stat)
    return SuffStat(total / tau, tau), filt


def prefix_block_statistics(model, theta, chi, ys, times):
    """Block statistics of every prefix window y_1..y_t for t in ``times``,
    all from one forward pass. Returns {t: SuffStat}."""
    ys = np.asarray(ys, dtype=float)
    times = sorted(set(int(t) for t in times))
    if times and times[-1] > ys.shape[0]:
        raise ValueError("prefix time beyond the observation window")
    trans = model.transition_matrix(theta)
    liks = model.emission_likelihoods(theta, ys)
    c0, c1, c2 = model.stat_increment_tensors()
    d = model.d
    chi = _as_law(chi, d)
    filt = chi
    acc = np.zeros((d, model.dim_stat))
    out = {}
    want = set(times)
    for t in range(ys.shape[0]):
        pred = filt @ trans
        unnorm = pred * liks[t]
        c = unnorm.sum()
        if c <= 0.0 or not np.isfinite(c):
            raise SmoothingUnderflowError(f"zero normalization at step {t}")
        with np.errstate(invalid="ignore", divide="ignore"):
            w = np.where(pred[None, :] > 0.0, filt[:, None] * trans / pred[None, :], 0.0)
        acc = w.T @ acc + np.einsum("xp,xpk->pk", w, c0 + ys[t] * c1 + ys[t] * ys[t] * c2)
        filt = unnorm / c
        if t + 1 in want:
            out[t + 1] = SuffStat(filt @ acc / (t + 1), t + 1)
    return out


def forgetting_gap(model, theta, chi, chi_tilde, ys, r, l1, l2, s, t, h):
    """Measured initial-law/window-edge sensitivity of the smoothed
    functional at time s, against its geometric bound.

    Compares the window (chi_tilde at r, observations r+1..t) with the
    window (chi at r-l1, observations r-l1+1..t+l2), both evaluating the
    smoothed expectation of h(X_{s-1}, X_s, y_s). The bound is

        l1, l2 >= 1:        (rho^{s-1-r} + rho^{t-s}) * osc(h_s)
        l1 = 0 (chi equal): rho^{t-s} * osc(h_s)
        l2 = 0:             rho^{s-1-r} * osc(h_s)

    with rho from the model's transition bounds at theta. Returns
    (measured, bound); for vector h, measured is the largest
    componentwise gap and osc the largest componentwise oscillation.
    """
    if l1 < 0 or l2 < 0:
        raise ValueError("l1 and l2 must be >= 0")
    if not (0 <= r - l1 and r < s <= t and t + l2 < len(ys)):
        raise ValueError("window indices out of range")
    if l1 == 0 and not np.allclose(chi, chi_tilde, atol=0.0):
        raise ValueError("l1 = 0 requires identical initial laws")
    a = smoothed_functional(model, theta, chi_tilde, r, s, t, h, ys)
    b = smoothed_functional(model, theta, chi, r - l1, s, t + l2, h, ys)
    measured = float(np.max(np.abs(np.asarray(a) - np.asarray(b))))
    rho = model.transition_bounds(theta).rho
    osc = oscillation(_h_matrix(h, model.d, ys[s]))
    if l1 == 0 and l2 == 0:
        bound = 0.0
    elif l1 == 0:
        bound = rho ** (t - s) * osc
    elif l2 == 0:
        bound = rho ** (s - 1 - r) * osc
    else:
        bound = (rho ** (s - 1 - r) + rho ** (t - s)) * osc
    return measured, bound
