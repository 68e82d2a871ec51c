"""Block-wise online EM for hidden Markov models.

Submodules: ``models`` (the three model families), ``exact``
(finite-state forward-backward smoothing), ``kalman`` (linear-Gaussian
filtering/smoothing), ``particle`` (bootstrap particle filtering),
``engine`` (block online EM, averaging, online EM baseline), ``likelihood``
(log-likelihood, increments, score diagnostics), ``experiments`` and
``cli`` (config-driven Monte Carlo harness).
"""

from .models import (
    DegenerateStatisticError,
    FiniteStateModel,
    GaussianLaw,
    HiddenMarkovModel,
    InvalidParameterError,
    LinearGaussianModel,
    ModelBounds,
    StochasticVolatilityModel,
    SuffStat,
    UnsupportedModelError,
)

__all__ = [
    "DegenerateStatisticError",
    "FiniteStateModel",
    "GaussianLaw",
    "HiddenMarkovModel",
    "InvalidParameterError",
    "LinearGaussianModel",
    "ModelBounds",
    "StochasticVolatilityModel",
    "SuffStat",
    "UnsupportedModelError",
]

__version__ = "0.1.0"
