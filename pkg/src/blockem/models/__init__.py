from .base import (
    DegenerateStatisticError,
    GaussianLaw,
    HiddenMarkovModel,
    InvalidParameterError,
    ModelBounds,
    SuffStat,
    UnsupportedModelError,
)
from .finite import FiniteStateModel
from .lgssm import LinearGaussianModel
from .stochvol import StochasticVolatilityModel

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
