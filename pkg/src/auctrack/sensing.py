"""Signal attenuation, noisy amplitude measurements and m-bit quantization.

A target at distance ``d`` from a sensor produces amplitude
``sqrt(p0 / (1 + d^2))``; the sensor observes that amplitude in Gaussian noise
and reports a quantization level.  Level probabilities are Gaussian-band
masses between consecutive thresholds, which is what both the filter
likelihood and the Fisher-information machinery consume.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.special import ndtr, ndtri

# Floor applied to a level probability when it enters a likelihood product,
# so that one impossible-looking sensor reading cannot zero out every weight.
LIKELIHOOD_FLOOR = 1e-300


@dataclass(frozen=True)
class SignalModel:
    """Isotropic attenuation: emitted power ``p0``, measurement noise ``sigma``."""

    p0: float = 1000.0
    sigma: float = 1.0

    def __post_init__(self):
        if self.p0 <= 0.0:
            raise ValueError("p0 must be positive")
        if self.sigma <= 0.0:
            raise ValueError("sigma must be positive")


@dataclass
class SensorNode:
    """A selfish sensor: geometry, energy bookkeeping and its private valuation.

    ``fc_distance`` is the transmit distance to the fusion center,
    ``true_valuation`` the sensor's private value per joule, constrained to
    ``[lower, upper]`` which is also publicly known.
    """

    id: int
    x: float
    y: float
    fc_distance: float
    initial_energy: float
    residual_energy: float
    true_valuation: float
    lower: float
    upper: float

    def __post_init__(self):
        if self.fc_distance < 0:
            raise ValueError("fc_distance must be non-negative")
        if not (self.lower <= self.true_valuation <= self.upper):
            raise ValueError(
                f"valuation {self.true_valuation} outside [{self.lower}, {self.upper}]"
            )
        if not (0.0 <= self.residual_energy <= self.initial_energy):
            raise ValueError("residual energy must lie in [0, initial_energy]")


@dataclass(frozen=True)
class Quantizer:
    """An m-bit quantizer defined by its 2^m - 1 finite thresholds (ascending).

    The implicit outermost thresholds are -inf and +inf, so level ``l`` covers
    the band ``(thresholds[l-1], thresholds[l]]``.
    """

    bits: int
    thresholds: np.ndarray = field(repr=False)

    def __post_init__(self):
        t = np.asarray(self.thresholds, dtype=float)
        if self.bits < 1:
            raise ValueError("quantizer needs at least one bit")
        if t.shape != (2**self.bits - 1,):
            raise ValueError("need 2^bits - 1 finite thresholds")
        if t.size > 1 and not np.all(np.diff(t) > 0):
            raise ValueError("thresholds must be strictly increasing")

    @property
    def levels(self) -> int:
        return 2**self.bits


def amplitude(signal: SignalModel, sensor_xy, target_state) -> float:
    """Received amplitude at a sensor position for a given target state."""
    sx, sy = float(sensor_xy[0]), float(sensor_xy[1])
    d2 = (sx - target_state[0]) ** 2 + (sy - target_state[1]) ** 2
    return float(np.sqrt(signal.p0 / (1.0 + d2)))


def amplitude_many(signal: SignalModel, sensor_xy, states: np.ndarray) -> np.ndarray:
    """Amplitudes at one sensor for an ``(n, 4)`` batch of target states."""
    dx = float(sensor_xy[0]) - states[:, 0]
    dy = float(sensor_xy[1]) - states[:, 1]
    return np.sqrt(signal.p0 / (1.0 + dx * dx + dy * dy))


def measure(signal: SignalModel, sensor_xy, target_state, rng: np.random.Generator) -> float:
    """One noisy amplitude reading: amplitude plus N(0, sigma^2) noise."""
    return amplitude(signal, sensor_xy, target_state) + signal.sigma * rng.standard_normal()


def uniform_thresholds(
    bits: int, signal: SignalModel, min_spacing_sigmas: float = 0.5
) -> np.ndarray:
    """Evenly spaced thresholds covering the amplitude range [0, sqrt(p0)].

    Spacing is the range divided by the level count, but never below
    ``min_spacing_sigmas`` noise standard deviations: bins finer than the
    measurement noise add almost no information (the per-reading information
    coefficient is already saturated) while making level likelihoods sharper
    than a finite particle cloud can follow.  Pass 0 for the unfloored
    design.
    """
    levels = 2**bits
    spacing = max(np.sqrt(signal.p0) / levels, min_spacing_sigmas * signal.sigma)
    return spacing * np.arange(1, levels, dtype=float)


def equal_mass_thresholds(
    bits: int, signal: SignalModel, reference_amplitude: float | None = None
) -> np.ndarray:
    """Thresholds equalizing level probabilities under a reference amplitude.

    The reference defaults to the midpoint of the amplitude range.
    """
    levels = 2**bits
    ref = np.sqrt(signal.p0) / 2.0 if reference_amplitude is None else float(reference_amplitude)
    quantiles = np.arange(1, levels) / levels
    return ref + signal.sigma * ndtri(quantiles)


def distance_matched_thresholds(
    bits: int,
    signal: SignalModel,
    max_distance: float = 25.0,
    min_spacing_sigmas: float = 0.5,
) -> np.ndarray:
    """Thresholds at the amplitudes of evenly spaced target distances.

    Placing thresholds at the amplitude quantiles of a uniform distance up to
    ``max_distance`` concentrates resolution where readings actually land, so
    even a one-bit quantizer discriminates at ordinary ranges (a range-uniform
    design parks its single threshold at half the peak amplitude, which only a
    nearly co-located target ever reaches).  Spacing is clamped from below at
    ``min_spacing_sigmas`` noise standard deviations, pushing surplus
    thresholds above the nominal amplitude range where they are inert: bins
    finer than the noise add almost no information but make level likelihoods
    sharper than a finite particle cloud can follow.
    """
    if max_distance <= 0.0:
        raise ValueError("max_distance must be positive")
    levels = 2**bits
    d = max_distance * (levels - np.arange(1, levels, dtype=float)) / levels
    raw = np.sqrt(signal.p0 / (1.0 + d * d))
    floor = min_spacing_sigmas * signal.sigma
    out = np.empty(levels - 1)
    prev = -np.inf
    for j, r in enumerate(raw):
        prev = max(r, prev + floor)
        out[j] = prev
    return out


_STRATEGIES: dict[str, Callable[..., np.ndarray]] = {
    "distance_matched": distance_matched_thresholds,
    "uniform": uniform_thresholds,
    "equal_mass": equal_mass_thresholds,
}


def build_quantizer(
    bits: int,
    signal: SignalModel,
    strategy: str | Callable[[int, SignalModel], np.ndarray] = "distance_matched",
    **strategy_kwargs,
) -> Quantizer:
    """Build the shared m-bit quantizer used by every sensor.

    ``strategy`` selects the threshold design: ``"distance_matched"``
    (default), ``"uniform"``, ``"equal_mass"``, or any callable
    ``(bits, signal, **kwargs) -> thresholds``.  ``bits == 0`` is the
    no-transmission case and has no quantizer; callers handle it upstream.
    """
    if bits < 1:
        raise ValueError("bits must be >= 1; zero bits means no transmission")
    if callable(strategy):
        thresholds = strategy(bits, signal, **strategy_kwargs)
    else:
        try:
            fn = _STRATEGIES[strategy]
        except KeyError:
            raise ValueError(f"unknown quantizer strategy {strategy!r}") from None
        thresholds = fn(bits, signal, **strategy_kwargs)
    return Quantizer(bits, np.asarray(thresholds, dtype=float))


def build_quantizer_bank(
    max_bits: int, signal: SignalModel, strategy="distance_matched", **kwargs
) -> dict[int, Quantizer]:
    """Quantizers for every bit count 1..max_bits under one design strategy."""
    return {m: build_quantizer(m, signal, strategy, **kwargs) for m in range(1, max_bits + 1)}


def quantize(quantizer: Quantizer, z: float) -> int:
    """Map a reading to its level; values on a threshold fall in the lower cell."""
    return int(np.searchsorted(quantizer.thresholds, z, side="left"))


def level_probability(quantizer: Quantizer, signal: SignalModel, a: float, level: int) -> float:
    """Probability that an amplitude-``a`` reading quantizes to ``level``.

    Gaussian band mass between the level's thresholds, clamped to [0, 1]
    against floating rounding.
    """
    if not 0 <= level < quantizer.levels:
        raise ValueError(f"level {level} out of range for {quantizer.bits} bits")
    t = quantizer.thresholds
    inv = 1.0 / signal.sigma
    hi = ndtr((t[level] - a) * inv) if level < t.size else 1.0
    lo = ndtr((t[level - 1] - a) * inv) if level > 0 else 0.0
    return float(min(max(hi - lo, 0.0), 1.0))


def level_probability_many(
    quantizer: Quantizer, signal: SignalModel, amplitudes: np.ndarray, level: int
) -> np.ndarray:
    """Vectorized ``level_probability`` over an array of amplitudes."""
    if not 0 <= level < quantizer.levels:
        raise ValueError(f"level {level} out of range for {quantizer.bits} bits")
    t = quantizer.thresholds
    a = np.asarray(amplitudes, dtype=float)
    inv = 1.0 / signal.sigma
    hi = ndtr((t[level] - a) * inv) if level < t.size else np.ones_like(a)
    lo = ndtr((t[level - 1] - a) * inv) if level > 0 else np.zeros_like(a)
    return np.clip(hi - lo, 0.0, 1.0)


def joint_likelihood(
    quantizers: Sequence[Quantizer],
    signal: SignalModel,
    sensor_positions: Sequence,
    target_state,
    levels: Sequence[int],
) -> float:
    """Joint probability of per-sensor levels given one target state.

    Readings are conditionally independent given the state, so this is the
    product of per-sensor level probabilities; sensors that did not transmit
    are simply not passed in (they contribute a factor of one).  Each factor
    is floored at ``LIKELIHOOD_FLOOR``.
    """
    out = 1.0
    for quantizer, pos, level in zip(quantizers, sensor_positions, levels):
        a = amplitude(signal, pos, target_state)
        out *= max(level_probability(quantizer, signal, a, level), LIKELIHOOD_FLOOR)
    return out
