"""Scalar linear-Gaussian state-space model.

    X_{t+1} = phi X_t + sigma_u U_t,   Y_t = X_t + sigma_v V_t,

with U, V i.i.d. standard Gaussian and X_0 drawn from the stationary law
N(0, sigma_u^2 / (1 - phi^2)). Parameter vector: (phi, sigma_u2, sigma_v2).
Sufficient statistic: (x^2, x*x', x'^2, y*x', y^2).
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


class LinearGaussianModel(HiddenMarkovModel):
    """Linear-Gaussian model with a configurable compact parameter box.

    ``bound_box_stds`` truncates the state space to that many stationary
    standard deviations when computing two-sided transition-density
    bounds (a Gaussian kernel on the full real line has no positive lower
    bound); pass None to disable, in which case ``transition_bounds``
    raises UnsupportedModelError.
    """

    param_names = ("phi", "sigma_u2", "sigma_v2")

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
        phi, su2, _ = theta
        return -0.5 * (LOG_2PI + np.log(su2)) - (xp - phi * x) ** 2 / (2.0 * su2)

    def log_emission(self, theta, xp, y):
        sv2 = theta[2]
        return -0.5 * (LOG_2PI + np.log(sv2)) - (y - xp) ** 2 / (2.0 * sv2)

    def suff_stat(self, x, xp, y):
        return np.array([x * x, x * xp, xp * xp, y * xp, y * y])

    def base_coeff(self, theta):
        return -0.5 * (2.0 * LOG_2PI + np.log(theta[1]) + np.log(theta[2]))

    def stat_coeff(self, theta):
        phi, su2, sv2 = theta
        return np.array(
            [
                -(phi**2) / (2.0 * su2),
                phi / su2,
                -0.5 / su2 - 0.5 / sv2,
                1.0 / sv2,
                -0.5 / sv2,
            ]
        )

    # -- parameters ------------------------------------------------------

    def validate_theta(self, theta):
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (3,) or not np.all(np.isfinite(theta)):
            raise InvalidParameterError("theta must be 3 finite reals")
        phi, su2, sv2 = theta
        if not abs(phi) < 1.0:
            raise InvalidParameterError(f"|phi| must be < 1, got {phi}")
        if su2 <= 0.0 or sv2 <= 0.0:
            raise InvalidParameterError("variances must be positive")

    def theta_in_box(self, theta):
        phi, su2, sv2 = theta
        return (
            abs(phi) <= self.phi_max
            and self.var_min <= su2 <= self.var_max
            and self.var_min <= sv2 <= self.var_max
        )

    def project_theta(self, theta):
        phi, su2, sv2 = theta
        return np.array(
            [
                np.clip(phi, -self.phi_max, self.phi_max),
                np.clip(su2, self.var_min, self.var_max),
                np.clip(sv2, self.var_min, self.var_max),
            ]
        )

    def m_step(self, stat: SuffStat) -> np.ndarray:
        s = stat.values
        if s[0] <= 0.0:
            raise DegenerateStatisticError("E[x^2] statistic is not positive")
        phi = s[1] / s[0]
        su2 = s[2] - phi * s[1]
        sv2 = s[4] - 2.0 * s[3] + s[2]
        if su2 <= 0.0 or sv2 <= 0.0:
            raise DegenerateStatisticError(
                f"implied variances not positive: sigma_u2={su2}, sigma_v2={sv2}"
            )
        return self.project_theta(np.array([phi, su2, sv2]))

    def transition_bounds(self, theta) -> ModelBounds:
        if self.bound_box_stds is None:
            raise UnsupportedModelError(
                "transition bounds need a truncation box for continuous models"
            )
        phi, su2, _ = theta
        half_width = self.bound_box_stds * np.sqrt(self.stationary_law(theta).var)
        peak = 1.0 / np.sqrt(2.0 * np.pi * su2)
        worst = half_width * (1.0 + abs(phi))
        return ModelBounds(peak * np.exp(-(worst**2) / (2.0 * su2)), peak)

    # -- state laws and simulation ----------------------------------------

    def stationary_law(self, theta) -> GaussianLaw:
        phi, su2, _ = theta
        return GaussianLaw(0.0, su2 / (1.0 - phi**2))

    def simulate(self, theta, n_obs, rng):
        phi, su2, sv2 = theta
        x = np.empty(n_obs + 1)
        x[0] = rng.normal(0.0, np.sqrt(self.stationary_law(theta).var))
        shocks = np.sqrt(su2) * rng.standard_normal(n_obs)
        for t in range(n_obs):
            x[t + 1] = phi * x[t] + shocks[t]
        y = x[1:] + np.sqrt(sv2) * rng.standard_normal(n_obs)
        return x, y

    # -- vectorized hooks for the particle backend -------------------------

    def sample_transition_vec(self, theta, x, rng):
        phi, su2, _ = theta
        return phi * x + np.sqrt(su2) * rng.standard_normal(x.shape[0])

    def log_emission_vec(self, theta, xp, y):
        sv2 = theta[2]
        return -0.5 * (LOG_2PI + np.log(sv2)) - (y - xp) ** 2 / (2.0 * sv2)

    def suff_stat_vec(self, x, xp, y):
        return np.column_stack([x * x, x * xp, xp * xp, y * xp, np.full_like(x, y * y)])
