"""Stochastic volatility model.

    X_{t+1} = phi X_t + sigma U_t,   Y_t = beta exp(X_t / 2) V_t,

so Y_t | X_t = x is N(0, beta^2 e^x). Parameter vector: (phi, sigma2,
beta2). Sufficient statistic: (x^2, x*x', x'^2, y^2 e^{-x'}, x'); the
last component carries the theta-free -x'/2 term of the emission
log-density so the complete-data decomposition is exact, and the M-step
ignores it.
"""

from __future__ import annotations

import numpy as np

from .base import (
    LOG_2PI,
    DegenerateStatisticError,
    GaussianLaw,
    HiddenMarkovModel,
    InvalidParameterError,
    ModelBounds,
    SuffStat,
    UnsupportedModelError,
)


class StochasticVolatilityModel(HiddenMarkovModel):
    """Stochastic volatility model on a compact parameter box."""

    param_names = ("phi", "sigma2", "beta2")

    def __init__(self, phi_max=0.999, var_min=1e-8, var_max=1e6, bound_box_stds=6.0):
        self.phi_max = float(phi_max)
        self.var_min = float(var_min)
        self.var_max = float(var_max)
        self.bound_box_stds = bound_box_stds

    @property
    def dim_stat(self) -> int:
        return 5

    # -- densities ------------------------------------------------------

    def log_transition(self, theta, x, xp):
        phi, s2, _ = theta
        return -0.5 * (LOG_2PI + np.log(s2)) - (xp - phi * x) ** 2 / (2.0 * s2)

    def log_emission(self, theta, xp, y):
        b2 = theta[2]
        return -0.5 * (LOG_2PI + np.log(b2)) - 0.5 * xp - y**2 * np.exp(-xp) / (2.0 * b2)

    def suff_stat(self, x, xp, y):
        return np.array([x * x, x * xp, xp * xp, y * y * np.exp(-xp), xp])

    def base_coeff(self, theta):
        return -0.5 * (2.0 * LOG_2PI + np.log(theta[1]) + np.log(theta[2]))

    def stat_coeff(self, theta):
        phi, s2, b2 = theta
        return np.array(
            [-(phi**2) / (2.0 * s2), phi / s2, -0.5 / s2, -0.5 / b2, -0.5]
        )

    # -- parameters ------------------------------------------------------

    def validate_theta(self, theta):
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (3,) or not np.all(np.isfinite(theta)):
            raise InvalidParameterError("theta must be 3 finite reals")
        phi, s2, b2 = theta
        if not abs(phi) < 1.0:
            raise InvalidParameterError(f"|phi| must be < 1, got {phi}")
        if s2 <= 0.0 or b2 <= 0.0:
            raise InvalidParameterError("variances must be positive")

    def theta_in_box(self, theta):
        phi, s2, b2 = theta
        return (
            abs(phi) <= self.phi_max
            and self.var_min <= s2 <= self.var_max
            and self.var_min <= b2 <= self.var_max
        )

    def project_theta(self, theta):
        phi, s2, b2 = theta
        return np.array(
            [
                np.clip(phi, -self.phi_max, self.phi_max),
                np.clip(s2, self.var_min, self.var_max),
                np.clip(b2, self.var_min, self.var_max),
            ]
        )

    def m_step(self, stat: SuffStat) -> np.ndarray:
        s = stat.values
        if s[0] <= 0.0:
            raise DegenerateStatisticError("E[x^2] statistic is not positive")
        phi = s[1] / s[0]
        s2 = s[2] - phi * s[1]
        b2 = s[3]
        if s2 <= 0.0 or b2 <= 0.0:
            raise DegenerateStatisticError(
                f"implied variances not positive: sigma2={s2}, beta2={b2}"
            )
        return self.project_theta(np.array([phi, s2, b2]))

    def transition_bounds(self, theta) -> ModelBounds:
        if self.bound_box_stds is None:
            raise UnsupportedModelError(
                "transition bounds need a truncation box for continuous models"
            )
        phi, s2, _ = theta
        half_width = self.bound_box_stds * np.sqrt(self.stationary_law(theta).var)
        peak = 1.0 / np.sqrt(2.0 * np.pi * s2)
        worst = half_width * (1.0 + abs(phi))
        return ModelBounds(peak * np.exp(-(worst**2) / (2.0 * s2)), peak)

    # -- state laws and simulation ----------------------------------------

    def stationary_law(self, theta) -> GaussianLaw:
        phi, s2, _ = theta
        return GaussianLaw(0.0, s2 / (1.0 - phi**2))

    def simulate(self, theta, n_obs, rng):
        phi, s2, b2 = theta
        x = np.empty(n_obs + 1)
        x[0] = rng.normal(0.0, np.sqrt(self.stationary_law(theta).var))
        shocks = np.sqrt(s2) * rng.standard_normal(n_obs)
        for t in range(n_obs):
            x[t + 1] = phi * x[t] + shocks[t]
        y = np.sqrt(b2) * np.exp(x[1:] / 2.0) * rng.standard_normal(n_obs)
        return x, y

    # -- vectorized hooks for the particle backend -------------------------

    def sample_transition_vec(self, theta, x, rng):
        phi, s2, _ = theta
        return phi * x + np.sqrt(s2) * rng.standard_normal(x.shape[0])

    def log_emission_vec(self, theta, xp, y):
        b2 = theta[2]
        return -0.5 * (LOG_2PI + np.log(b2)) - 0.5 * xp - y**2 * np.exp(-xp) / (2.0 * b2)

    def suff_stat_vec(self, x, xp, y):
        return np.column_stack([x * x, x * xp, xp * xp, y * y * np.exp(-xp), xp])
