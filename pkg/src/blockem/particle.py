"""Bootstrap particle filter with path-space statistic accumulators.

Each particle carries, besides its position and weight, the running sum
of statistic increments along its ancestral path; the weighted average of
those accumulators at the end of a block is the Monte Carlo block
statistic. Resampling is systematic, triggered when the effective sample
size drops below half the cloud size, and gathers the accumulators along
with the positions so genealogies stay consistent.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .models.base import GaussianLaw, SuffStat


class ParticleDegeneracyError(RuntimeError):
    """All particle weights vanished (observation impossible under the
    model's numerical support)."""


@dataclass
class ParticleCloud:
    positions: np.ndarray
    weights: np.ndarray
    stats: np.ndarray
    ancestors: np.ndarray

    @property
    def size(self) -> int:
        return self.positions.shape[0]


def ess(weights) -> float:
    """Effective sample size 1 / sum(w_i^2) of normalized weights."""
    weights = np.asarray(weights, dtype=float)
    return 1.0 / float(weights @ weights)


def systematic_resample(weights, rng) -> np.ndarray:
    """Systematic resampling; expected offspring count of particle i is
    exactly n * w_i."""
    weights = np.asarray(weights, dtype=float)
    n = weights.shape[0]
    points = (rng.random() + np.arange(n)) / n
    idx = np.searchsorted(np.cumsum(weights), points)
    return np.clip(idx, 0, n - 1)


def init_cloud(model, theta, law, n, rng, stat_dim=None) -> ParticleCloud:
    """Fresh cloud drawn from ``law``.

    ``law`` may be a GaussianLaw, a categorical probability vector
    (finite state space) or a previous block's terminal ParticleCloud
    (handoff: positions and weights are kept, accumulators reset).
    """
    if n < 2:
        raise ValueError("need at least 2 particles")
    k = model.dim_stat if stat_dim is None else stat_dim
    if isinstance(law, ParticleCloud):
        if law.size != n:
            raise ValueError("handoff cloud has a different particle count")
        return ParticleCloud(
            law.positions.copy(), law.weights.copy(), np.zeros((n, k)), np.arange(n)
        )
    if isinstance(law, GaussianLaw):
        positions = law.mean + np.sqrt(law.var) * rng.standard_normal(n)
    else:
        law = np.asarray(law, dtype=float)
        positions = rng.choice(law.shape[0], size=n, p=law)
    return ParticleCloud(positions, np.full(n, 1.0 / n), np.zeros((n, k)), np.arange(n))


def pf_step(model, theta, cloud: ParticleCloud, y, rng, resample_frac=0.5) -> ParticleCloud:
    """One propagate / weight / (maybe) resample step.

    Accumulators are advanced by the statistic increment of the move that
    produced each particle; when resampling fires they are gathered with
    the surviving ancestors and weights reset to uniform.
    """
    n = cloud.size
    xp = model.sample_transition_vec(theta, cloud.positions, rng)
    stats = cloud.stats + model.suff_stat_vec(cloud.positions, xp, y)
    logw = np.log(cloud.weights) + model.log_emission_vec(theta, xp, y)
    peak = logw.max()
    if not np.isfinite(peak):
        raise ParticleDegeneracyError("all particle weights vanished")
    w = np.exp(logw - peak)
    total = w.sum()
    if total <= 0.0:
        raise ParticleDegeneracyError("all particle weights vanished")
    w /= total
    if ess(w) < resample_frac * n:
        idx = systematic_resample(w, rng)
        return ParticleCloud(xp[idx], np.full(n, 1.0 / n), stats[idx], idx)
    return ParticleCloud(xp, w, stats, np.arange(n))


def block_statistic(model, theta, chi, ys, n, rng):
    """Monte Carlo block statistic over a cloud of ``n`` particles.

    ``chi`` follows the conventions of init_cloud. Returns (SuffStat,
    terminal cloud); the statistic is the weighted average of the path
    accumulators divided by the block length.
    """
    ys = np.atleast_1d(np.asarray(ys, dtype=float))
    cloud = init_cloud(model, theta, chi, n, rng)
    for y in ys:
        cloud = pf_step(model, theta, cloud, y, rng)
    values = cloud.weights @ cloud.stats / ys.shape[0]
    return SuffStat(values, ys.shape[0]), cloud


def filter_marginals(cloud: ParticleCloud, n_states: int) -> np.ndarray:
    """Weighted occupancy of a finite-state cloud (particle filtering law)."""
    return np.bincount(
        cloud.positions.astype(int), weights=cloud.weights, minlength=n_states
    )
