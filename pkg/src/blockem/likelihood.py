"""Log-likelihood, its one-step increments and the score.

Everything routes through exact computations: the finite-state model via
the normalized forward pass, the linear-Gaussian model via the Kalman
predictive decomposition. Increments come with the two-sided envelope

    |delta| <= |log(sigma_+ b_+(y))| + |log(sigma_- b_-(y))|,

where b(y) is the state-integrated emission density; by default b_- and
b_+ are evaluated at the current parameter, optionally extremized over
the corners of the parameter box (a documented approximation of the
sup/inf over the whole box).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from . import exact, kalman
from .models.base import GaussianLaw, UnsupportedModelError
from .models.finite import FiniteStateModel
from .models.lgssm import LinearGaussianModel


@dataclass(frozen=True)
class IncrementRecord:
    s: int
    delta: float
    bound: float


def loglik(model, theta, chi, ys) -> float:
    """Log-likelihood of y_1..y_T with the initial state distributed as
    ``chi`` one step before the first observation."""
    model.validate_theta(theta)
    ys = np.atleast_1d(np.asarray(ys, dtype=float))
    if isinstance(model, FiniteStateModel):
        return exact.window_loglik(
            model.transition_matrix(theta), model.emission_likelihoods(theta, ys), chi
        )
    if isinstance(model, LinearGaussianModel):
        return kalman.kalman_filter(theta, chi, ys)[4]
    raise UnsupportedModelError("exact log-likelihood needs a finite or linear-Gaussian model")


def emission_mass_bounds(model, theta, y, certify=False):
    """(b_minus, b_plus): inf/sup of sum_x g(x, y) over the parameter set.

    With ``certify=False`` both equal the state sum at the current theta;
    with ``certify=True`` the extremes additionally scan the corners of
    the (means, variance) box.
    """
    if not isinstance(model, FiniteStateModel):
        raise UnsupportedModelError("emission mass bounds implemented for finite models")
    here = float(model.emission_likelihoods(theta, [y])[0].sum())
    if not certify:
        return here, here
    lo, hi = here, here
    trans, _, _ = model.unpack(theta)
    corners = itertools.product(
        *([[-model.mean_bound, model.mean_bound]] * model.d + [[model.var_min, model.var_max]])
    )
    for *means, v in corners:
        th = model.pack(trans, np.array(means), v)
        b = float(model.emission_likelihoods(th, [y])[0].sum())
        lo, hi = min(lo, b), max(hi, b)
    return lo, hi


def loglik_increment(model, theta, chi, r, s, ys, certify=False) -> IncrementRecord:
    """One-step log-likelihood increment delta = l_{s+1} - l_s for the
    window started at r with law chi, and its envelope bound.

    Requires a finite-state model; ``ys`` is indexed by absolute time and
    must hold y_{r+1}..y_{s+1}.
    """
    if not (0 <= r <= s and s + 1 < len(ys)):
        raise ValueError("need 0 <= r <= s and y_{s+1} available")
    trans = model.transition_matrix(theta)
    liks = model.emission_likelihoods(theta, ys[r + 1 : s + 2])
    _, _, norms = exact.forward_filter(trans, liks, chi)
    delta = float(np.log(norms[-1]))
    bounds = model.transition_bounds(theta)
    b_lo, b_hi = emission_mass_bounds(model, theta, ys[s + 1], certify=certify)
    bound = abs(np.log(bounds.sigma_plus * b_hi)) + abs(np.log(bounds.sigma_minus * b_lo))
    return IncrementRecord(s, delta, float(bound))


def normalized_loglik_trace(model, theta, chi, ys, checkpoints):
    """Rows (T, l_T / T) at each requested checkpoint, single pass."""
    ys = np.asarray(ys, dtype=float)
    checkpoints = sorted(set(int(c) for c in checkpoints))
    if checkpoints and checkpoints[-1] > len(ys):
        raise ValueError("checkpoint beyond the observation window")
    if isinstance(model, FiniteStateModel):
        _, _, norms = exact.forward_filter(
            model.transition_matrix(theta), model.emission_likelihoods(theta, ys), chi
        )
        cum = np.cumsum(np.log(norms))
    elif isinstance(model, LinearGaussianModel):
        phi, su2, sv2 = (float(v) for v in theta)
        m, p = chi.mean, chi.var
        cum = np.empty(len(ys))
        total = 0.0
        log2pi = np.log(2.0 * np.pi)
        for t, y in enumerate(ys):
            mp, vp = phi * m, phi * phi * p + su2
            sobs = vp + sv2
            resid = y - mp
            total -= 0.5 * (log2pi + np.log(sobs) + resid * resid / sobs)
            gain = vp / sobs
            m, p = mp + gain * resid, vp - gain * vp
            cum[t] = total
    else:
        raise UnsupportedModelError("trace needs a finite or linear-Gaussian model")
    return np.array([(c, cum[c - 1] / c) for c in checkpoints])


def _require_interior(model, theta):
    eps = 1e-12
    if isinstance(model, FiniteStateModel):
        trans, means, v = model.unpack(theta)
        on_edge = (
            np.any(trans <= model.min_trans + eps)
            or np.any(np.abs(means) >= model.mean_bound - eps)
            or v <= model.var_min + eps
            or v >= model.var_max - eps
        )
    else:
        phi, a, b = theta
        on_edge = (
            abs(phi) >= model.phi_max - eps
            or min(a, b) <= model.var_min + eps
            or max(a, b) >= model.var_max - eps
        )
    if on_edge:
        raise ValueError("score requires theta in the interior of the parameter box")


def score(model, theta, chi, ys) -> np.ndarray:
    """Gradient of the window log-likelihood in theta.

    Computed as the smoothed sum of the complete-data log-density
    gradients (Fisher identity): one additive-functional pass for the
    finite model, smoothed second moments for the linear-Gaussian one.
    For the finite model the transition block is the gradient in the free
    matrix entries, without row renormalization.
    """
    model.validate_theta(theta)
    _require_interior(model, theta)
    ys = np.atleast_1d(np.asarray(ys, dtype=float))
    if isinstance(model, FiniteStateModel):
        trans = model.transition_matrix(theta)
        liks = model.emission_likelihoods(theta, ys)
        c0, c1, c2 = model.score_increment_tensors(theta)
        inc = lambda t: c0 + ys[t] * c1 + ys[t] * ys[t] * c2
        total, _ = exact.additive_smoothed_sum(trans, liks, chi, inc, model.dim_theta)
        return total
    if isinstance(model, LinearGaussianModel):
        phi, su2, sv2 = (float(v) for v in theta)
        sm, sv, lag = kalman.rts_smoother(theta, chi, ys)
        ex2 = sv + sm**2
        exx = lag + sm[:-1] * sm[1:]
        d_phi = float(np.sum(exx - phi * ex2[:-1]) / su2)
        d_su2 = float(
            np.sum(-0.5 / su2 + (ex2[1:] - 2.0 * phi * exx + phi**2 * ex2[:-1]) / (2.0 * su2**2))
        )
        d_sv2 = float(
            np.sum(-0.5 / sv2 + (ys**2 - 2.0 * ys * sm[1:] + ex2[1:]) / (2.0 * sv2**2))
        )
        return np.array([d_phi, d_su2, d_sv2])
    raise UnsupportedModelError("score needs a finite or linear-Gaussian model")


def row_centered_transition_score(model, grad):
    """Projection of the finite-model score onto directions preserving
    the transition rows' sums; zero at an EM fixed point."""
    d = model.d
    out = grad.copy()
    block = out[: d * d].reshape(d, d)
    block -= block.mean(axis=1, keepdims=True)
    return out


def gradient_envelope(model, theta, y) -> float:
    """Largest Euclidean norm of the complete-data gradient over the state
    grid at observation y; dominates each per-term smoothed gradient."""
    if not isinstance(model, FiniteStateModel):
        raise UnsupportedModelError("gradient envelope implemented for finite models")
    c0, c1, c2 = model.score_increment_tensors(theta)
    ups = c0 + y * c1 + y * y * c2
    return float(np.sqrt((ups**2).sum(axis=2)).max())


def per_term_smoothed_gradients(model, theta, chi, ys) -> np.ndarray:
    """Smoothed expectation of the complete-data gradient at each time,
    shape (T, dim_theta); their sum is the score."""
    trans = model.transition_matrix(theta)
    liks = model.emission_likelihoods(theta, ys)
    _, pairs = exact.forward_backward(trans, liks, chi)
    c0, c1, c2 = model.score_increment_tensors(theta)
    out = np.empty((len(ys), model.dim_theta))
    for t, y in enumerate(np.atleast_1d(ys)):
        out[t] = np.tensordot(pairs[t], c0 + y * c1 + y * y * c2, axes=([0, 1], [0, 1]))
    return out


def decaying_envelope_sum(model, theta, ys, center, rho) -> tuple[float, float]:
    """Truncated sum over the window of gradient envelopes weighted by
    rho^{|u - center| / 4}, plus a geometric tail bound for the part of
    the doubly infinite sum outside the window."""
    ys = np.asarray(ys, dtype=float)
    phis = np.array([gradient_envelope(model, theta, y) for y in ys])
    lags = np.abs(np.arange(len(ys)) - center)
    value = float(np.sum(phis * rho ** (lags / 4.0)))
    reach = max(center, len(ys) - 1 - center)
    q = rho**0.25
    tail = float(phis.max() * 2.0 * q ** (reach + 1) / (1.0 - q))
    return value, tail
