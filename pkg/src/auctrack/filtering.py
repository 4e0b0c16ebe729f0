"""Sequential importance resampling (SIR) particle filter.

One tracking step is: propagate every particle through the motion model,
reweight by the likelihood of the quantized sensor readings, take the
weighted mean as the estimate, then resample back to uniform weights.
Resampling runs every step (systematic scheme).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import ndtr

from .dynamics import MotionModel, sample_initial, step_many
from .sensing import LIKELIHOOD_FLOOR, Quantizer, SignalModel

_LOG_FLOOR = math.log(LIKELIHOOD_FLOOR)


@dataclass
class ParticleCloud:
    """Weighted particle representation of the target-state posterior."""

    states: np.ndarray = field(repr=False)  # (n, 4)
    weights: np.ndarray = field(repr=False)  # (n,), sums to one

    def __post_init__(self):
        self.states = np.asarray(self.states, dtype=float)
        self.weights = np.asarray(self.weights, dtype=float)
        if self.states.ndim != 2 or self.states.shape[1] != 4:
            raise ValueError("states must be an (n, 4) array")
        if self.weights.shape != (self.states.shape[0],):
            raise ValueError("weights must match the number of particles")
        if self.size < 1:
            raise ValueError("a cloud needs at least one particle")
        if abs(self.weights.sum() - 1.0) > 1e-9:
            raise ValueError("weights must sum to one")

    @property
    def size(self) -> int:
        return self.states.shape[0]


def initial_cloud(
    mean: np.ndarray, cov: np.ndarray, n_particles: int, rng: np.random.Generator
) -> ParticleCloud:
    """Draw a uniform-weight cloud from the Gaussian prior."""
    states = sample_initial(mean, cov, rng, size=n_particles)
    return ParticleCloud(states, np.full(n_particles, 1.0 / n_particles))


def predict(model: MotionModel, cloud: ParticleCloud, rng: np.random.Generator) -> ParticleCloud:
    """Propagate every particle one step; weights are unchanged."""
    return ParticleCloud(step_many(model, cloud.states, rng), cloud.weights.copy())


def reverse_cloud_velocity(cloud: ParticleCloud) -> ParticleCloud:
    """Flip particle velocities (known direction reversal of the target)."""
    states = cloud.states.copy()
    states[:, 2:] = -states[:, 2:]
    return ParticleCloud(states, cloud.weights.copy())


def update_weights(
    cloud: ParticleCloud,
    signal: SignalModel,
    readings: Sequence[tuple[Quantizer, tuple[float, float], int]],
) -> tuple[ParticleCloud, bool]:
    """Reweight the cloud by the joint likelihood of the quantized readings.

    ``readings`` holds one ``(quantizer, sensor_position, level)`` triple per
    transmitting sensor; sensors with zero allocated bits contribute nothing.
    Per-sensor likelihood factors are floored at ``LIKELIHOOD_FLOOR`` and
    accumulated in log space.  If even the best particle sits at the floor for
    every factor, the observation carries no usable information: weights reset
    to uniform and the step is flagged as degenerate.
    """
    if not readings:
        return ParticleCloud(cloud.states.copy(), cloud.weights.copy()), False

    states = cloud.states
    inv_sigma = 1.0 / signal.sigma
    log_lik = np.zeros(cloud.size)
    for quantizer, pos, level in readings:
        dx = float(pos[0]) - states[:, 0]
        dy = float(pos[1]) - states[:, 1]
        a = np.sqrt(signal.p0 / (1.0 + dx * dx + dy * dy))
        t = quantizer.thresholds
        hi = ndtr((t[level] - a) * inv_sigma) if level < t.size else np.ones_like(a)
        lo = ndtr((t[level - 1] - a) * inv_sigma) if level > 0 else np.zeros_like(a)
        p = np.clip(hi - lo, LIKELIHOOD_FLOOR, 1.0)
        log_lik += np.log(p)

    best = log_lik.max()
    uniform = np.full(cloud.size, 1.0 / cloud.size)
    if best <= len(readings) * _LOG_FLOOR + 1e-6:
        return ParticleCloud(cloud.states.copy(), uniform), True
    weights = cloud.weights * np.exp(log_lik - best)
    total = weights.sum()
    if total <= 0.0:
        return ParticleCloud(cloud.states.copy(), uniform), True
    return ParticleCloud(cloud.states.copy(), weights / total), False


def estimate(cloud: ParticleCloud) -> np.ndarray:
    """Posterior mean state: the weighted average of the particles."""
    return cloud.weights @ cloud.states


def resample(cloud: ParticleCloud, rng: np.random.Generator) -> ParticleCloud:
    """Systematic resampling; returns a cloud with uniform weights."""
    n = cloud.size
    positions = (rng.random() + np.arange(n)) / n
    cumulative = np.cumsum(cloud.weights)
    cumulative[-1] = 1.0  # guard against rounding just below one
    idx = np.searchsorted(cumulative, positions, side="left")
    return ParticleCloud(cloud.states[idx], np.full(n, 1.0 / n))
