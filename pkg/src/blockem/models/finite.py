"""Finite state-space HMM with Gaussian emissions.

States are the integers 0..d-1. The hidden chain moves by a d x d
row-stochastic matrix m; state j emits y ~ N(mean_j, v) with a variance v
shared across states. Parameter vector layout (length d^2 + d + 1):

    [m row-major, mean_1..mean_d, v]

Sufficient statistic layout (length d^2 + 3d):

    [transition-pair indicators row-major,
     occupation indicators,
     y * occupation indicators,
     y^2 * occupation indicators]

Averaged over a block, the pair block holds smoothed transition-pair
probabilities (sums to 1) and the occupation block smoothed state
probabilities (sums to 1).
"""

from __future__ import annotations

import numpy as np

from .base import (
    LOG_2PI,
    DegenerateStatisticError,
    HiddenMarkovModel,
    InvalidParameterError,
    ModelBounds,
    SuffStat,
)


class FiniteStateModel(HiddenMarkovModel):
    def __init__(self, n_states, min_trans=1e-6, mean_bound=50.0, var_min=1e-8, var_max=1e6):
        if n_states < 2:
            raise ValueError("need at least 2 states")
        self.d = int(n_states)
        self.min_trans = float(min_trans)
        self.mean_bound = float(mean_bound)
        self.var_min = float(var_min)
        self.var_max = float(var_max)
        d = self.d
        self.param_names = tuple(
            [f"m_{i + 1}_{j + 1}" for i in range(d) for j in range(d)]
            + [f"x_{i + 1}" for i in range(d)]
            + ["v"]
        )

    @property
    def dim_stat(self) -> int:
        return self.d * self.d + 3 * self.d

    # -- parameter vector accessors ----------------------------------------

    def pack(self, trans: np.ndarray, means: np.ndarray, v: float) -> np.ndarray:
        return np.concatenate([np.asarray(trans, float).ravel(), np.asarray(means, float), [v]])

    def unpack(self, theta):
        d = self.d
        theta = np.asarray(theta, dtype=float)
        return theta[: d * d].reshape(d, d), theta[d * d : d * d + d], theta[-1]

    # -- densities ------------------------------------------------------

    def log_transition(self, theta, x, xp):
        trans, _, _ = self.unpack(theta)
        return np.log(trans[x, xp])

    def log_emission(self, theta, xp, y):
        _, means, v = self.unpack(theta)
        return -0.5 * (LOG_2PI + np.log(v)) - (y - means[xp]) ** 2 / (2.0 * v)

    def suff_stat(self, x, xp, y):
        d = self.d
        s = np.zeros(self.dim_stat)
        s[x * d + xp] = 1.0
        s[d * d + xp] = 1.0
        s[d * d + d + xp] = y
        s[d * d + 2 * d + xp] = y * y
        return s

    def base_coeff(self, theta):
        return 0.0

    def stat_coeff(self, theta):
        trans, means, v = self.unpack(theta)
        occ_coef = -0.5 * (LOG_2PI + np.log(v)) - means**2 / (2.0 * v)
        return np.concatenate(
            [
                np.log(trans).ravel(),
                occ_coef,
                means / v,
                np.full(self.d, -0.5 / v),
            ]
        )

    # -- parameters ------------------------------------------------------

    def validate_theta(self, theta):
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (self.dim_theta,) or not np.all(np.isfinite(theta)):
            raise InvalidParameterError(
                f"theta must be {self.dim_theta} finite reals"
            )
        trans, _, v = self.unpack(theta)
        if np.any(trans <= 0.0) or np.any(trans > 1.0):
            raise InvalidParameterError("transition entries must lie in (0, 1]")
        row_err = np.max(np.abs(trans.sum(axis=1) - 1.0))
        if row_err > 1e-12:
            raise InvalidParameterError(f"rows must sum to 1, max error {row_err:.2e}")
        if v <= 0.0:
            raise InvalidParameterError("emission variance must be positive")

    def theta_in_box(self, theta):
        trans, means, v = self.unpack(theta)
        return (
            np.all(trans >= self.min_trans)
            and np.all(trans <= 1.0)
            and np.max(np.abs(trans.sum(axis=1) - 1.0)) <= 1e-12
            and np.all(np.abs(means) <= self.mean_bound)
            and self.var_min <= v <= self.var_max
        )

    def project_theta(self, theta):
        trans, means, v = self.unpack(theta)
        # renormalize the mass above the floor so entries stay >= min_trans
        eps = self.min_trans
        slack = np.clip(trans - eps, 0.0, None)
        row = slack.sum(axis=1, keepdims=True)
        uniform = np.full((self.d, self.d), 1.0 / self.d)
        with np.errstate(invalid="ignore", divide="ignore"):
            scaled = eps + (1.0 - self.d * eps) * slack / row
        trans = np.where(row > 0.0, scaled, uniform)
        means = np.clip(means, -self.mean_bound, self.mean_bound)
        return self.pack(trans, means, np.clip(v, self.var_min, self.var_max))

    def m_step(self, stat: SuffStat) -> np.ndarray:
        d = self.d
        s = stat.values
        pair = s[: d * d].reshape(d, d)
        occ = s[d * d : d * d + d]
        ymom = s[d * d + d : d * d + 2 * d]
        y2mom = s[d * d + 2 * d :]
        row_sums = pair.sum(axis=1)
        if np.any(row_sums <= 0.0):
            raise DegenerateStatisticError("empty transition row in pair statistic")
        if np.any(occ <= 0.0):
            raise DegenerateStatisticError("state with zero occupation statistic")
        trans = pair / row_sums[:, None]
        means = ymom / occ
        v = float(np.sum(y2mom - occ * means**2))
        if v <= 0.0:
            raise DegenerateStatisticError(f"implied emission variance {v} <= 0")
        return self.project_theta(self.pack(trans, means, v))

    def transition_bounds(self, theta) -> ModelBounds:
        trans, _, _ = self.unpack(theta)
        return ModelBounds(float(trans.min()), float(trans.max()))

    # -- state laws and simulation ----------------------------------------

    def stationary_law(self, theta) -> np.ndarray:
        """Stationary distribution of the transition matrix."""
        trans, _, _ = self.unpack(theta)
        a = np.vstack([trans.T - np.eye(self.d), np.ones(self.d)])
        b = np.zeros(self.d + 1)
        b[-1] = 1.0
        pi, *_ = np.linalg.lstsq(a, b, rcond=None)
        pi = np.clip(pi, 0.0, None)
        return pi / pi.sum()

    def simulate(self, theta, n_obs, rng):
        trans, means, v = self.unpack(theta)
        cum = np.cumsum(trans, axis=1)
        x = np.empty(n_obs + 1, dtype=np.int64)
        x[0] = rng.choice(self.d, p=self.stationary_law(theta))
        u = rng.random(n_obs)
        for t in range(n_obs):
            x[t + 1] = np.searchsorted(cum[x[t]], u[t])
        y = means[x[1:]] + np.sqrt(v) * rng.standard_normal(n_obs)
        return x, y

    # -- dense helpers used by the exact-smoothing backend ------------------

    def transition_matrix(self, theta) -> np.ndarray:
        return self.unpack(theta)[0]

    def emission_likelihoods(self, theta, ys) -> np.ndarray:
        """g(j, y_t) for every state j and observation, shape (T, d)."""
        _, means, v = self.unpack(theta)
        ys = np.atleast_1d(np.asarray(ys, dtype=float))
        z = ys[:, None] - means[None, :]
        return np.exp(-(z**2) / (2.0 * v)) / np.sqrt(2.0 * np.pi * v)

    def stat_increment_tensors(self):
        """Decomposition of the statistic increment tensor in powers of y:
        S(x, x', y) = C0[x, x'] + y C1[x, x'] + y^2 C2[x, x'], each
        (d, d, dim_stat). Observation-free, cached per instance."""
        if not hasattr(self, "_stat_tensors"):
            d = self.d
            c0 = np.zeros((d, d, self.dim_stat))
            c1 = np.zeros_like(c0)
            c2 = np.zeros_like(c0)
            xs = np.repeat(np.arange(d), d)
            xps = np.tile(np.arange(d), d)
            c0[xs, xps, xs * d + xps] = 1.0
            c0[xs, xps, d * d + xps] = 1.0
            c1[xs, xps, d * d + d + xps] = 1.0
            c2[xs, xps, d * d + 2 * d + xps] = 1.0
            self._stat_tensors = (c0, c1, c2)
        return self._stat_tensors

    def score_increment_tensors(self, theta):
        """Same y-power decomposition for the gradient increment
        grad_theta log[m(x, x') g(x', y)], each tensor (d, d, dim_theta).

        The transition block is the gradient in the free matrix entries
        (no row renormalization), matching finite differences of the
        log-likelihood in each entry."""
        d = self.d
        trans, means, v = self.unpack(theta)
        k = self.dim_theta
        c0 = np.zeros((d, d, k))
        c1 = np.zeros_like(c0)
        c2 = np.zeros_like(c0)
        xs = np.repeat(np.arange(d), d)
        xps = np.tile(np.arange(d), d)
        c0[xs, xps, xs * d + xps] = 1.0 / trans[xs, xps]
        for j in range(d):
            c0[:, j, d * d + j] = -means[j] / v
            c1[:, j, d * d + j] = 1.0 / v
            c0[:, j, -1] = -0.5 / v + means[j] ** 2 / (2.0 * v**2)
            c1[:, j, -1] = -means[j] / v**2
            c2[:, j, -1] = 0.5 / v**2
        return c0, c1, c2

    # -- vectorized hooks for the particle backend -------------------------

    def sample_transition_vec(self, theta, x, rng):
        cum = np.cumsum(self.unpack(theta)[0], axis=1)
        u = rng.random(x.shape[0])
        return (cum[x] < u[:, None]).sum(axis=1)

    def log_emission_vec(self, theta, xp, y):
        _, means, v = self.unpack(theta)
        return -0.5 * (LOG_2PI + np.log(v)) - (y - means[xp]) ** 2 / (2.0 * v)

    def suff_stat_vec(self, x, xp, y):
        d = self.d
        n = x.shape[0]
        s = np.zeros((n, self.dim_stat))
        rows = np.arange(n)
        s[rows, x * d + xp] = 1.0
        s[rows, d * d + xp] = 1.0
        s[rows, d * d + d + xp] = y
        s[rows, d * d + 2 * d + xp] = y * y
        return s
