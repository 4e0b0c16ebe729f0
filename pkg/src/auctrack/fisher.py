"""Fisher information of quantized amplitude measurements.

Everything here reduces to a scalar information coefficient per (quantizer,
amplitude) pair: one quarter of the Fisher information that the discrete
level distribution carries about the amplitude.  The position-space FIM of a
single reading is that coefficient times a rank-one outer product of the
sensor-to-target offset; expectations over a particle cloud and the
prior-information FIM complete the picture.

The per-particle coefficient sum is the simulation hot spot, so it lives in a
compiled kernel; all call paths share it.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

from .filtering import ParticleCloud
from .sensing import Quantizer, SignalModel

# Band-probability guard: coefficient terms whose level probability falls
# below this are skipped (0/0 protection in the tail).
KAPPA_GUARD = 1e-12

# Thresholds farther than this many sigmas from every cloud amplitude are
# dropped before the kernel runs; the discarded Gaussian mass is ~1e-18,
# far below KAPPA_GUARD.
TAIL_CUT_SIGMAS = 9.0

_SQRT1_2 = 0.7071067811865476


@njit(cache=True)
def _kappa_kernel(thresholds, amplitudes, sigma, guard):  # pragma: no cover - compiled
    """Information coefficient per amplitude for one set of finite thresholds.

    The outermost band edges are implicitly at -inf/+inf, so callers may pass
    a contiguous slice of the real thresholds when the rest are unreachable.
    """
    n = amplitudes.size
    out = np.empty(n)
    inv_sigma = 1.0 / sigma
    scale = 1.0 / (8.0 * np.pi * sigma * sigma)
    for s in range(n):
        a = amplitudes[s]
        prev_expo = 0.0  # Gaussian kernel value at the lower band edge
        prev_cdf = 0.0  # standard normal CDF at the lower band edge
        acc = 0.0
        for j in range(thresholds.size):
            z = (thresholds[j] - a) * inv_sigma
            expo = math.exp(-0.5 * z * z)
            cdf = 0.5 * math.erfc(-z * _SQRT1_2)
            p = cdf - prev_cdf
            if p >= guard:
                diff = prev_expo - expo
                acc += diff * diff / p
            prev_expo = expo
            prev_cdf = cdf
        p = 1.0 - prev_cdf  # topmost band, upper edge at +inf
        if p >= guard:
            acc += prev_expo * prev_expo / p
        out[s] = scale * acc
    return out


def info_coefficient(quantizer: Quantizer, signal: SignalModel, a) -> float | np.ndarray:
    """Scalar information coefficient of an m-bit quantized amplitude reading.

    For each level the term is the squared difference of the Gaussian kernel
    ``exp(-(eta - a)^2 / (2 sigma^2))`` at the level's two edges, divided by
    the level probability; the sum is scaled by ``1 / (8 pi sigma^2)``.
    Equals one quarter of the Fisher information of the level distribution
    with respect to the amplitude.  Accepts a scalar or an array of
    amplitudes.
    """
    arr = np.atleast_1d(np.asarray(a, dtype=float))
    out = _kappa_kernel(quantizer.thresholds, arr, signal.sigma, KAPPA_GUARD)
    if np.isscalar(a) or np.asarray(a).ndim == 0:
        return float(out[0])
    return out


def _windowed_thresholds(
    thresholds: np.ndarray, a_lo: float, a_hi: float, sigma: float
) -> np.ndarray:
    margin = TAIL_CUT_SIGMAS * sigma
    lo = np.searchsorted(thresholds, a_lo - margin, side="left")
    hi = np.searchsorted(thresholds, a_hi + margin, side="right")
    return thresholds[lo:hi]


def pointwise_fim(
    quantizer: Quantizer, signal: SignalModel, sensor_xy, state: np.ndarray
) -> np.ndarray:
    """Position-space FIM of one quantized reading at a known target state.

    Rank <= 1: coefficient ``4 kappa a^2 / (1 + d^2)^2`` times the outer
    product of the planar sensor-to-target offset; velocity rows and columns
    are zero.
    """
    dx = float(sensor_xy[0]) - float(state[0])
    dy = float(sensor_xy[1]) - float(state[1])
    d2 = dx * dx + dy * dy
    a2 = signal.p0 / (1.0 + d2)
    kappa = info_coefficient(quantizer, signal, math.sqrt(a2))
    pref = 4.0 * kappa * a2 / (1.0 + d2) ** 2
    fim = np.zeros((4, 4))
    fim[0, 0] = pref * dx * dx
    fim[0, 1] = fim[1, 0] = pref * dx * dy
    fim[1, 1] = pref * dy * dy
    return fim


def expected_fim(
    quantizer: Quantizer | None,
    signal: SignalModel,
    sensor_xy,
    cloud: ParticleCloud,
    tail_cut: float | None = TAIL_CUT_SIGMAS,
) -> np.ndarray:
    """Expected measurement FIM of one sensor over a predicted particle cloud.

    Weighted average of the pointwise FIM across particles.  ``quantizer``
    ``None`` means zero allocated bits: no data, zero information.
    """
    if cloud.size == 0:
        raise ValueError("cannot take an expectation over an empty cloud")
    fim = np.zeros((4, 4))
    if quantizer is None:
        return fim
    states = cloud.states
    w = cloud.weights
    dx = float(sensor_xy[0]) - states[:, 0]
    dy = float(sensor_xy[1]) - states[:, 1]
    d2 = dx * dx + dy * dy
    a2 = signal.p0 / (1.0 + d2)
    a = np.sqrt(a2)
    thresholds = quantizer.thresholds
    if tail_cut is not None:
        thresholds = _windowed_thresholds(thresholds, a.min(), a.max(), signal.sigma)
    kappa = _kappa_kernel(thresholds, a, signal.sigma, KAPPA_GUARD)
    pref = w * 4.0 * kappa * a2 / (1.0 + d2) ** 2
    fim[0, 0] = np.dot(pref, dx * dx)
    fim[0, 1] = fim[1, 0] = np.dot(pref, dx * dy)
    fim[1, 1] = np.dot(pref, dy * dy)
    return fim


def expected_trace_table(
    bank: dict[int, Quantizer],
    signal: SignalModel,
    sensor_positions: np.ndarray,
    cloud: ParticleCloud,
    max_bits: int,
    subsample: int | None = None,
) -> np.ndarray:
    """Traces of the expected per-sensor FIM for every bit count 0..max_bits.

    Returns an ``(n_sensors, max_bits + 1)`` array; column 0 is zero.  This is
    the table the per-step auction consumes, computed once per step.
    ``subsample`` caps the number of particles used (evenly strided,
    renormalized) to trade accuracy for speed.
    """
    states = cloud.states
    w = cloud.weights
    n_s = states.shape[0]
    if subsample is not None and 0 < subsample < n_s:
        idx = np.arange(subsample) * n_s // subsample
        states = states[idx]
        w = w[idx]
        w = w / w.sum()
    positions = np.atleast_2d(np.asarray(sensor_positions, dtype=float))
    table = np.zeros((positions.shape[0], max_bits + 1))
    sigma = signal.sigma
    for i, (sx, sy) in enumerate(positions):
        dx = sx - states[:, 0]
        dy = sy - states[:, 1]
        d2 = dx * dx + dy * dy
        a2 = signal.p0 / (1.0 + d2)
        a = np.sqrt(a2)
        a_lo, a_hi = a.min(), a.max()
        geom = w * 4.0 * a2 * d2 / (1.0 + d2) ** 2
        for m in range(1, max_bits + 1):
            thr = _windowed_thresholds(bank[m].thresholds, a_lo, a_hi, sigma)
            kappa = _kappa_kernel(thr, a, sigma, KAPPA_GUARD)
            table[i, m] = np.dot(geom, kappa)
    return table


def prior_fim(cloud: ParticleCloud, eigenvalue_floor: float = 1e-8) -> np.ndarray:
    """Prior-information FIM: inverse of the cloud's weighted covariance.

    Gaussian approximation of the predicted prior.  Covariance eigenvalues are
    clamped to ``eigenvalue_floor`` before inversion so a degenerate cloud
    yields a large-but-finite matrix instead of a crash.
    """
    if cloud.size == 0:
        raise ValueError("cannot compute a prior FIM from an empty cloud")
    mean = cloud.weights @ cloud.states
    centered = cloud.states - mean
    cov = (centered * cloud.weights[:, None]).T @ centered
    cov = 0.5 * (cov + cov.T)
    eigvals, eigvecs = np.linalg.eigh(cov)
    eigvals = np.maximum(eigvals, eigenvalue_floor)
    return (eigvecs / eigvals) @ eigvecs.T
