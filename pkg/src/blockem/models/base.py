"""Model abstraction shared by the three state-space families.

A model bundles together the transition density m(x, x'), the emission
density g(x', y), the sufficient-statistic map S(x, x', y) of the
complete-data log-density decomposition

    log m_theta(x, x') + log g_theta(x', y)
        = base_coeff(theta) + <S(x, x', y), stat_coeff(theta)>,

and the closed-form M-step that maximizes the right-hand side in theta
for a fixed statistic vector. Parameters are flat numpy vectors whose
layout is owned by each concrete model; the compact parameter box is part
of the model configuration, and every M-step result is projected back
into it.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np


class InvalidParameterError(ValueError):
    """Raised when a parameter vector violates the model invariants."""


class DegenerateStatisticError(ValueError):
    """Raised by the M-step when a statistic implies a non-positive
    variance or an empty transition row."""


class UnsupportedModelError(RuntimeError):
    """Raised when an operation needs model structure that is not
    configured (e.g. transition bounds on an untruncated continuous
    state space)."""


@dataclass(frozen=True)
class GaussianLaw:
    """Scalar Gaussian state law (filtering / initial distribution)."""

    mean: float
    var: float

    def __post_init__(self):
        if not self.var > 0.0:
            raise ValueError("variance must be positive")


@dataclass(frozen=True)
class SuffStat:
    """Per-observation-averaged smoothed sufficient statistic.

    ``values`` is the statistic vector; ``count`` is the number of
    observations the average runs over, kept so statistics from several
    blocks can be merged by exact weighted averaging.
    """

    values: np.ndarray
    count: int

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", v)
        if not np.all(np.isfinite(v)):
            raise ValueError("sufficient statistic contains non-finite entries")
        if self.count < 1:
            raise ValueError("count must be >= 1")

    def combine(self, other: "SuffStat") -> "SuffStat":
        """Weighted average of two statistics, weights = observation counts."""
        n = self.count + other.count
        v = (self.count * self.values + other.count * other.values) / n
        return SuffStat(v, n)


@dataclass(frozen=True)
class ModelBounds:
    """Two-sided transition-density bounds and the induced contraction rate.

    ``rho = 1 - sigma_minus / sigma_plus`` is the geometric rate in the
    smoothing forgetting bounds; it lies in [0, 1) whenever the lower
    bound is positive.
    """

    sigma_minus: float
    sigma_plus: float

    def __post_init__(self):
        if not (0.0 < self.sigma_minus <= self.sigma_plus):
            raise ValueError("need 0 < sigma_minus <= sigma_plus")

    @property
    def rho(self) -> float:
        return 1.0 - self.sigma_minus / self.sigma_plus


LOG_2PI = float(np.log(2.0 * np.pi))


class HiddenMarkovModel(ABC):
    """Common interface of the concrete model families.

    Subclasses fix the parameter layout (``param_names``), the statistic
    dimension (``dim_stat``) and provide densities, statistics, the
    M-step and simulation. All methods are pure functions of their
    arguments; model instances only hold the parameter-box configuration
    and are safe to share between workers.
    """

    #: ordered coordinate names of the flat parameter vector
    param_names: tuple[str, ...]

    @property
    def dim_theta(self) -> int:
        return len(self.param_names)

    @property
    @abstractmethod
    def dim_stat(self) -> int:
        """Dimension of the sufficient-statistic vector."""

    # -- densities and statistics ------------------------------------

    @abstractmethod
    def log_transition(self, theta: np.ndarray, x, xp) -> float:
        """log m_theta(x, x')."""

    @abstractmethod
    def log_emission(self, theta: np.ndarray, xp, y: float) -> float:
        """log g_theta(x', y)."""

    @abstractmethod
    def suff_stat(self, x, xp, y: float) -> np.ndarray:
        """Statistic increment S(x, x', y), shape (dim_stat,)."""

    @abstractmethod
    def base_coeff(self, theta: np.ndarray) -> float:
        """Parameter-only term of the complete-data log-density."""

    @abstractmethod
    def stat_coeff(self, theta: np.ndarray) -> np.ndarray:
        """Coefficient vector multiplying S, shape (dim_stat,)."""

    def complete_data_logdensity(self, theta: np.ndarray, x, xp, y: float) -> float:
        """log m_theta(x, x') + log g_theta(x', y).

        Raises InvalidParameterError when theta violates the model
        invariants. Equals base_coeff + <suff_stat, stat_coeff> by
        construction; the test suite checks the identity to 1e-10.
        """
        self.validate_theta(theta)
        return self.log_transition(theta, x, xp) + self.log_emission(theta, xp, y)

    # -- parameter handling ------------------------------------------

    @abstractmethod
    def validate_theta(self, theta: np.ndarray) -> None:
        """Raise InvalidParameterError on invariant violations."""

    @abstractmethod
    def theta_in_box(self, theta: np.ndarray) -> bool:
        """Membership in the configured compact parameter box."""

    @abstractmethod
    def project_theta(self, theta: np.ndarray) -> np.ndarray:
        """Componentwise projection into the parameter box."""

    @abstractmethod
    def m_step(self, stat: SuffStat) -> np.ndarray:
        """Maximizer of base_coeff(theta) + <stat, stat_coeff(theta)>,
        projected into the parameter box.

        Raises DegenerateStatisticError when the statistic implies a
        non-positive variance or an empty transition row.
        """

    @abstractmethod
    def transition_bounds(self, theta: np.ndarray) -> ModelBounds:
        """Lower/upper transition-density bounds (H2-style) at theta."""

    # -- simulation ----------------------------------------------------

    @abstractmethod
    def simulate(self, theta: np.ndarray, n_obs: int, rng: np.random.Generator):
        """Sample (hidden_path, observations); the initial state is drawn
        from the stationary law of the hidden chain."""
