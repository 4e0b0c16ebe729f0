"""Shared builders for auction/payment/acceptance tests."""

import numpy as np
import pytest

from auctrack.auction import ValuationModel, build_step_context, transmit_energy
from auctrack.filtering import ParticleCloud
from auctrack.sensing import SensorNode, SignalModel, build_quantizer_bank


def make_sensor(
    i=0,
    x=0.0,
    y=0.0,
    fc_distance=30.0,
    valuation=0.5,
    lower=0.1,
    upper=1.0,
    energy_bits=None,
    initial_energy=None,
):
    """Sensor with a battery expressed in single-bit transmissions by default."""
    if initial_energy is None:
        bits = 1e9 if energy_bits is None else energy_bits
        initial_energy = bits * transmit_energy(1, fc_distance)
    return SensorNode(
        id=i,
        x=x,
        y=y,
        fc_distance=fc_distance,
        initial_energy=initial_energy,
        residual_energy=initial_energy,
        true_valuation=valuation,
        lower=lower,
        upper=upper,
    )


def gaussian_cloud(rng, center=(0.0, 0.0), spread=3.0, n=400):
    states = np.column_stack(
        [
            rng.normal(center[0], spread, n),
            rng.normal(center[1], spread, n),
            rng.normal(0.0, 0.1, n),
            rng.normal(0.0, 0.1, n),
        ]
    )
    return ParticleCloud(states, np.full(n, 1.0 / n))


def random_context(
    rng,
    n_sensors=5,
    capacity=5,
    energy_exponent=0.0,
    energy_bits=None,
    drain=None,
    signal=None,
    spread=3.0,
):
    """A single-step auction context built through the real pipeline."""
    signal = signal or SignalModel(p0=1000.0, sigma=1.0)
    center = rng.uniform(-10, 10, 2)
    sensors = []
    for i in range(n_sensors):
        pos = center + rng.uniform(-12, 12, 2)
        h = float(rng.uniform(10.0, 60.0))
        v = float(rng.uniform(0.1, 1.0))
        sensors.append(
            make_sensor(i, pos[0], pos[1], fc_distance=h, valuation=v, energy_bits=energy_bits)
        )
    if drain:  # fraction of battery already spent, to exercise energy factors
        for s in sensors:
            s.residual_energy = s.initial_energy * (1.0 - drain)
    reports = np.array([s.true_valuation for s in sensors])
    model = ValuationModel(fc_value=1.0, energy_exponent=energy_exponent)
    bank = build_quantizer_bank(capacity, signal)
    cloud = gaussian_cloud(rng, center, spread=spread)
    return build_step_context(cloud, sensors, reports, model, signal, bank, capacity)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
