import numpy as np
import pytest

from blockem import FiniteStateModel, LinearGaussianModel, StochasticVolatilityModel

# 6-state transition matrix of the finite-state experiment
SIX_STATE_MATRIX = np.array(
    [
        [0.5, 0.05, 0.1, 0.15, 0.15, 0.05],
        [0.2, 0.35, 0.1, 0.15, 0.05, 0.15],
        [0.1, 0.1, 0.6, 0.05, 0.05, 0.1],
        [0.02, 0.03, 0.1, 0.7, 0.1, 0.05],
        [0.1, 0.05, 0.13, 0.02, 0.6, 0.1],
        [0.1, 0.1, 0.13, 0.12, 0.1, 0.45],
    ]
)


@pytest.fixture
def six_state_model():
    return FiniteStateModel(6)


@pytest.fixture
def six_state_theta(six_state_model):
    return six_state_model.pack(SIX_STATE_MATRIX, np.arange(1.0, 7.0), 0.5)


@pytest.fixture
def lgssm():
    return LinearGaussianModel()


@pytest.fixture
def sv_model():
    return StochasticVolatilityModel()


def random_finite_theta(model, rng, mean_scale=3.0, v_lo=0.2, v_hi=2.0):
    """Random parameter vector inside the model box."""
    trans = rng.dirichlet(np.ones(model.d) * 2.0, size=model.d)
    trans = np.clip(trans, model.min_trans, 1.0)
    trans /= trans.sum(axis=1, keepdims=True)
    means = rng.uniform(-mean_scale, mean_scale, size=model.d)
    v = rng.uniform(v_lo, v_hi)
    return model.pack(trans, means, v)
