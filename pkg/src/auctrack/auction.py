"""Reverse-auction economics: valuations, item values and per-step instances.

Each tracking step the fusion center scores every (sensor, bit-count) pair:
the information term is its value-per-trace times the expected FIM trace; the
cost term is the transmit energy weighted by the sensor's *virtual* valuation
(report plus the hazard-rate correction), optionally inflated by a
residual-energy factor.  Those scores form one multiple-choice knapsack
instance per step, with total bandwidth as the capacity.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .fisher import expected_trace_table
from .filtering import ParticleCloud
from .mckp import MckpInstance, MckpSolution, solve_dp
from .sensing import Quantizer, SensorNode, SignalModel

# Transmit amplifier energy, joules per bit per square meter.
EPSILON_AMP = 1e-8


def transmit_energy(bits: int, distance: float) -> float:
    """Energy to push ``bits`` over ``distance`` meters to the fusion center."""
    return EPSILON_AMP * bits * distance * distance


@dataclass(frozen=True)
class UniformValuation:
    """Uniform valuation distribution on [lower, upper]."""

    lower: float
    upper: float

    def __post_init__(self):
        if not self.lower < self.upper:
            raise ValueError("need lower < upper")

    def pdf(self, v: float) -> float:
        return 1.0 / (self.upper - self.lower)

    def cdf(self, v: float) -> float:
        return (v - self.lower) / (self.upper - self.lower)


@dataclass(frozen=True)
class ValuationModel:
    """Market-side parameters of the mechanism.

    ``fc_value`` is the fusion center's value per unit of FIM trace;
    ``energy_exponent`` k makes sensors value energy more as their battery
    drains (k = 0 disables this).  ``distribution_for`` maps a sensor to its
    publicly known valuation distribution; anything exposing
    ``lower/upper/pdf/cdf`` plugs in.
    """

    fc_value: float = 1.0
    energy_exponent: float = 0.0
    distribution_for: Callable[[SensorNode], UniformValuation] = field(
        default=lambda s: UniformValuation(s.lower, s.upper)
    )

    def __post_init__(self):
        if self.fc_value <= 0.0:
            raise ValueError("fc_value must be positive")
        if self.energy_exponent < 0.0:
            raise ValueError("energy_exponent must be non-negative")


def virtual_valuation(model: ValuationModel, sensor: SensorNode, v: float) -> float:
    """Myerson virtual cost of a reported valuation: ``v + F(v) / f(v)``."""
    dist = model.distribution_for(sensor)
    if not dist.lower <= v <= dist.upper:
        raise ValueError(f"report {v} outside [{dist.lower}, {dist.upper}]")
    return v + dist.cdf(v) / dist.pdf(v)


def energy_factor(model: ValuationModel, sensor: SensorNode) -> float:
    """Residual-energy cost multiplier ``(e / e0) ** -k``; 1 when k = 0."""
    if model.energy_exponent == 0.0:
        return 1.0
    if sensor.residual_energy <= 0.0:
        raise ValueError("energy factor is undefined for a drained sensor")
    return (sensor.residual_energy / sensor.initial_energy) ** (-model.energy_exponent)


def item_value(
    model: ValuationModel,
    sensor: SensorNode,
    bits: int,
    reported_v: float,
    fim_trace: float,
) -> float:
    """Auction value of assigning ``bits`` to a sensor that reported ``reported_v``.

    Information worth minus virtual-valuation-weighted (and energy-factor
    adjusted) transmit cost.  Zero bits carry zero information and zero cost.
    """
    if bits == 0:
        return 0.0
    cost = (
        energy_factor(model, sensor)
        * transmit_energy(bits, sensor.fc_distance)
        * virtual_valuation(model, sensor, reported_v)
    )
    return model.fc_value * fim_trace - cost


@dataclass
class StepContext:
    """Everything the per-step auction needs, with FIM traces computed once.

    ``live`` indexes the sensors admitted to this step's auction (enough
    energy for at least one bit); ``traces[j, m]`` is the expected FIM trace
    of live sensor ``j`` at ``m`` bits; ``max_bits[j]`` caps its menu at what
    its residual energy can actually pay for.
    """

    signal: SignalModel
    bank: dict[int, Quantizer]
    model: ValuationModel
    capacity: int
    sensors: Sequence[SensorNode]
    reports: np.ndarray
    live: list[int]
    traces: np.ndarray
    max_bits: np.ndarray

    @property
    def n_sensors(self) -> int:
        return len(self.sensors)

    def class_items(self, j: int, report: float | None = None) -> list[tuple[int, float]]:
        """(bits, value) menu of live sensor ``j``, optionally re-priced."""
        i = self.live[j]
        sensor = self.sensors[i]
        r = self.reports[i] if report is None else report
        return [
            (m, item_value(self.model, sensor, m, r, self.traces[j, m]))
            for m in range(self.max_bits[j] + 1)
        ]


def build_step_context(
    cloud: ParticleCloud,
    sensors: Sequence[SensorNode],
    reports: Sequence[float],
    model: ValuationModel,
    signal: SignalModel,
    bank: dict[int, Quantizer],
    capacity: int,
    fim_subsample: int | None = None,
) -> StepContext:
    """Assemble the step context: live-sensor admission plus the trace table.

    A sensor is dead for this step when its residual energy cannot cover a
    single bit; its menu is otherwise capped at the bits it can afford so
    energy never goes negative.
    """
    reports = np.asarray(reports, dtype=float)
    live: list[int] = []
    max_bits: list[int] = []
    for i, sensor in enumerate(sensors):
        one_bit = transmit_energy(1, sensor.fc_distance)
        if sensor.residual_energy < one_bit:
            continue
        live.append(i)
        max_bits.append(_affordable_bits(sensor, capacity, one_bit))
    if live:
        positions = np.array([[sensors[i].x, sensors[i].y] for i in live])
        traces = expected_trace_table(bank, signal, positions, cloud, capacity, fim_subsample)
    else:
        traces = np.zeros((0, capacity + 1))
    return StepContext(
        signal=signal,
        bank=bank,
        model=model,
        capacity=capacity,
        sensors=sensors,
        reports=reports,
        live=live,
        traces=traces,
        max_bits=np.asarray(max_bits, dtype=int),
    )


def _affordable_bits(sensor: SensorNode, capacity: int, one_bit: float) -> int:
    """Largest bit count whose exact transmit cost fits the residual energy.

    Defined directly against transmit_energy rather than by float division so
    a battery holding an exact whole number of bits is never rounded down.
    """
    if one_bit == 0.0:
        return capacity
    m = min(capacity, int(sensor.residual_energy / one_bit))
    while m < capacity and transmit_energy(m + 1, sensor.fc_distance) <= sensor.residual_energy:
        m += 1
    while m > 0 and transmit_energy(m, sensor.fc_distance) > sensor.residual_energy:
        m -= 1
    return m


def build_instance(
    ctx: StepContext, replace: tuple[int, float] | None = None
) -> MckpInstance:
    """The step's MCKP instance: one class per live sensor, capacity = bandwidth.

    ``replace=(j, r)`` re-prices live sensor ``j`` as if it had reported ``r``
    (used by the payment rule); everything else stays fixed.
    """
    classes = []
    for j in range(len(ctx.live)):
        report = replace[1] if replace is not None and replace[0] == j else None
        classes.append(tuple(ctx.class_items(j, report)))
    return MckpInstance(tuple(classes), ctx.capacity)


def solve_allocation(
    ctx: StepContext, replace: tuple[int, float] | None = None
) -> tuple[np.ndarray, MckpSolution]:
    """Solve the step's instance; returns per-sensor bits (dense) + raw solution."""
    solution = solve_dp(build_instance(ctx, replace))
    bits = np.zeros(ctx.n_sensors, dtype=int)
    for j, i in enumerate(ctx.live):
        bits[i] = solution.choice[j]
    return bits, solution


def fim_only_instance(ctx: StepContext) -> MckpInstance:
    """Cost-blind variant: item values are information terms only.

    This is the non-market baseline allocation rule; it shares the solver and
    the affordability caps with the auction.
    """
    classes = []
    for j in range(len(ctx.live)):
        items = tuple(
            (m, 0.0 if m == 0 else ctx.model.fc_value * ctx.traces[j, m])
            for m in range(ctx.max_bits[j] + 1)
        )
        classes.append(items)
    return MckpInstance(tuple(classes), ctx.capacity)
