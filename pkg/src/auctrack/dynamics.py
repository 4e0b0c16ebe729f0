"""Target state representation and the linear constant-velocity motion model.

A target state is a plain length-4 float array ``[x, y, vx, vy]`` (positions in
meters, velocities in m/s).  The motion model advances the state by a fixed
sampling interval and adds white-acceleration process noise.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

STATE_DIM = 4


@dataclass(frozen=True)
class MotionModel:
    """Constant-velocity transition with white-acceleration noise.

    ``F`` is the state transition matrix, ``Q`` the process-noise covariance
    and ``noise_chol`` a (possibly rank-deficient) factor with
    ``noise_chol @ noise_chol.T == Q``.
    """

    sampling_interval: float
    noise_intensity: float
    F: np.ndarray = field(repr=False)
    Q: np.ndarray = field(repr=False)
    noise_chol: np.ndarray = field(repr=False)


def build_motion_model(sampling_interval: float, noise_intensity: float) -> MotionModel:
    """Assemble the transition matrix and noise covariance for one time step.

    Raises ``ValueError`` for a non-positive sampling interval or a negative
    noise intensity.
    """
    d = float(sampling_interval)
    tau = float(noise_intensity)
    if d <= 0.0:
        raise ValueError(f"sampling interval must be positive, got {d}")
    if tau < 0.0:
        raise ValueError(f"noise intensity must be non-negative, got {tau}")

    F = np.eye(STATE_DIM)
    F[0, 2] = d
    F[1, 3] = d

    d2 = d * d
    d3 = d2 * d
    Q = tau * np.array(
        [
            [d3 / 3.0, 0.0, d2 / 2.0, 0.0],
            [0.0, d3 / 3.0, 0.0, d2 / 2.0],
            [d2 / 2.0, 0.0, d, 0.0],
            [0.0, d2 / 2.0, 0.0, d],
        ]
    )

    if tau == 0.0:
        chol = np.zeros((STATE_DIM, STATE_DIM))
    else:
        # Q is positive definite for tau > 0 (2x2 blocks have det tau^2 d^4/12).
        chol = np.linalg.cholesky(Q)
    return MotionModel(d, tau, F, Q, chol)


def step(model: MotionModel, state: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Advance one state by one sampling interval with process noise."""
    noise = model.noise_chol @ rng.standard_normal(STATE_DIM)
    return model.F @ np.asarray(state, dtype=float) + noise


def step_many(model: MotionModel, states: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Advance an ``(n, 4)`` batch of states, with independent noise per row."""
    states = np.asarray(states, dtype=float)
    noise = rng.standard_normal(states.shape) @ model.noise_chol.T
    return states @ model.F.T + noise


def reverse_velocity(state: np.ndarray) -> np.ndarray:
    """Flip the velocity components (direction reversal of the target)."""
    out = np.array(state, dtype=float)
    out[2:] = -out[2:]
    return out


def sample_initial(
    mean: np.ndarray, cov: np.ndarray, rng: np.random.Generator, size: int | None = None
) -> np.ndarray:
    """Draw Gaussian initial state(s) with the given mean and covariance.

    ``cov`` must be symmetric positive semidefinite; a zero covariance returns
    the mean exactly.  With ``size`` set, returns an ``(size, 4)`` array.
    """
    mean = np.asarray(mean, dtype=float)
    cov = np.asarray(cov, dtype=float)
    if mean.shape != (STATE_DIM,) or cov.shape != (STATE_DIM, STATE_DIM):
        raise ValueError("mean must be length 4 and cov 4x4")
    if not np.allclose(cov, cov.T, atol=1e-12):
        raise ValueError("covariance must be symmetric")
    eigvals, eigvecs = np.linalg.eigh(cov)
    if eigvals.min() < -1e-9 * max(1.0, abs(eigvals).max()):
        raise ValueError("covariance must be positive semidefinite")
    factor = eigvecs * np.sqrt(np.clip(eigvals, 0.0, None))
    if size is None:
        return mean + factor @ rng.standard_normal(STATE_DIM)
    return mean + rng.standard_normal((size, STATE_DIM)) @ factor.T
