"""Monte Carlo tracking campaigns: scenario config, trial loop, metrics, CSV.

One trial is a full tracking run: per step the filter predicts, the fusion
center auctions the step's bandwidth off the predicted cloud, winning sensors
quantize and transmit their readings, payments are settled, the filter
updates and resamples, and sensor batteries are debited.  A campaign repeats
this over independent trials (per-trial RNG streams derived from one master
seed, so trials are order-independent) and aggregates per-step metrics.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from .auction import (
    EPSILON_AMP,
    StepContext,
    ValuationModel,
    build_step_context,
    fim_only_instance,
    solve_allocation,
    transmit_energy,
)
from .dynamics import build_motion_model, reverse_velocity, sample_initial, step
from .filtering import (
    estimate,
    initial_cloud,
    predict,
    resample,
    reverse_cloud_velocity,
    update_weights,
)
from .fisher import prior_fim
from .mckp import solve_dp
from .payment import compute_all_payments
from .sensing import SensorNode, SignalModel, build_quantizer_bank, measure, quantize

log = logging.getLogger(__name__)

# Sub-stream tags for per-trial RNG derivation.
_STREAM_TRUTH = 0
_STREAM_MEASURE = 1
_STREAM_FILTER = 2
_STREAM_VALUATION = 3
_LAYOUT_STREAM = (0x5EED, 0)


class ConfigError(ValueError):
    """A scenario configuration that cannot be run."""


@dataclass
class Scenario:
    """Everything needed to reproduce a campaign.  See README for the JSON keys.

    Defaults follow the standard experiment: 25 sensors on a grid in a
    50 m x 50 m region centered on the origin, fusion center at (-22, 20),
    unit-valuation fusion center, uniform sensor valuations on [0.1, 1].
    """

    roi_size: float = 50.0
    n_sensors: int = 25
    layout: str = "grid"  # "grid" | "random"
    sensor_positions: list | None = None  # explicit [[x, y], ...] override
    fc_position: tuple = (-22.0, 20.0)
    p0: float = 1000.0
    sigma: float = 1.0
    sampling_interval: float = 1.25
    noise_intensity: float = 2.5e-3
    prior_mean: tuple = (-23.0, -23.0, 2.0, 2.0)
    prior_position_sigma: float = 2.0 / 3.0  # three sigma = 2 m
    prior_velocity_var: float = 0.01
    prior_cov: list | None = None  # explicit 4x4 override
    total_bits: int = 8
    steps: int = 20
    trials: int = 100
    particles: int = 5000
    valuation_lower: float = 0.1
    valuation_upper: float = 1.0
    fc_value: float = 1.0
    energy_exponent: float = 0.0
    initial_energy_transmissions: float = 40.0  # battery in max-bit transmissions
    initial_energy: float | list | None = None  # explicit joules override
    lifetime_alpha: float = 0.6
    reverse_every: int | None = None  # flip target direction every this many steps
    quantizer_strategy: str = "distance_matched"
    quantizer_min_spacing_sigmas: float = 0.5  # 0 disables the spacing floor
    quantizer_max_distance: float | None = None  # default: half the region size
    quantizer_reference_amplitude: float | None = None
    fim_subsample: int | None = None
    allocation_policy: str = "auction"  # "auction" | "fim"
    seed: int = 0

    def __post_init__(self):
        if self.roi_size <= 0:
            raise ConfigError("roi_size must be positive")
        if self.sensor_positions is None and self.n_sensors < 1:
            raise ConfigError("need at least one sensor")
        if self.layout not in ("grid", "random"):
            raise ConfigError(f"unknown layout {self.layout!r}")
        if self.total_bits < 0:
            raise ConfigError("total_bits must be non-negative")
        if self.steps < 1 or self.trials < 1 or self.particles < 1:
            raise ConfigError("steps, trials and particles must all be >= 1")
        if not self.valuation_lower < self.valuation_upper:
            raise ConfigError("need valuation_lower < valuation_upper")
        if not 0.0 < self.lifetime_alpha <= 1.0:
            raise ConfigError("lifetime_alpha must lie in (0, 1]")
        if self.reverse_every is not None and self.reverse_every < 1:
            raise ConfigError("reverse_every must be >= 1 when set")
        if self.allocation_policy not in ("auction", "fim"):
            raise ConfigError(f"unknown allocation_policy {self.allocation_policy!r}")
        if self.energy_exponent < 0:
            raise ConfigError("energy_exponent must be non-negative")

    @classmethod
    def from_dict(cls, data: dict) -> "Scenario":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def from_json(cls, path: str | Path) -> "Scenario":
        try:
            with open(path) as fh:
                data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: config must be a JSON object")
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["fc_position"] = list(self.fc_position)
        out["prior_mean"] = list(self.prior_mean)
        return out

    def signal(self) -> SignalModel:
        return SignalModel(self.p0, self.sigma)

    def valuation_model(self) -> ValuationModel:
        return ValuationModel(self.fc_value, self.energy_exponent)

    def prior_covariance(self) -> np.ndarray:
        if self.prior_cov is not None:
            cov = np.asarray(self.prior_cov, dtype=float)
            if cov.shape != (4, 4):
                raise ConfigError("prior_cov must be a 4x4 matrix")
            return cov
        s2 = self.prior_position_sigma**2
        return np.diag([s2, s2, self.prior_velocity_var, self.prior_velocity_var])


def sensor_layout(sc: Scenario) -> np.ndarray:
    """Deterministic sensor positions for a scenario.

    The grid layout places sensors at the cell centers of the smallest square
    lattice covering the region, row-major from the southwest corner; the
    random layout draws uniform positions from a layout-only RNG stream.
    """
    if sc.sensor_positions is not None:
        pos = np.asarray(sc.sensor_positions, dtype=float)
        if pos.ndim != 2 or pos.shape[1] != 2:
            raise ConfigError("sensor_positions must be a list of [x, y] pairs")
        return pos
    half = sc.roi_size / 2.0
    if sc.layout == "random":
        rng = np.random.default_rng(
            np.random.SeedSequence(sc.seed, spawn_key=_LAYOUT_STREAM)
        )
        return rng.uniform(-half, half, size=(sc.n_sensors, 2))
    k = math.ceil(math.sqrt(sc.n_sensors))
    cell = sc.roi_size / k
    centers = -half + cell * (np.arange(k) + 0.5)
    grid = [(centers[ix], centers[iy]) for iy in range(k) for ix in range(k)]
    return np.asarray(grid[: sc.n_sensors])


def initial_energies(sc: Scenario, fc_distances: np.ndarray) -> np.ndarray:
    """Per-sensor starting battery in joules.

    Defaults to ``initial_energy_transmissions`` full-bandwidth transmissions
    at the sensor's own transmit distance; an explicit ``initial_energy``
    (scalar or per-sensor list) overrides that.
    """
    n = fc_distances.size
    if sc.initial_energy is not None:
        e0 = np.asarray(sc.initial_energy, dtype=float)
        if e0.ndim == 0:
            e0 = np.full(n, float(e0))
        if e0.shape != (n,):
            raise ConfigError("initial_energy list must have one entry per sensor")
        if np.any(e0 < 0):
            raise ConfigError("initial_energy must be non-negative")
        return e0
    # composed exactly like transmit_energy so whole-bit budgets stay exact
    full = EPSILON_AMP * max(sc.total_bits, 1) * fc_distances * fc_distances
    return sc.initial_energy_transmissions * full


def _trial_rng(seed: int, trial: int, stream: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(trial, stream)))


def make_sensors(sc: Scenario, trial: int) -> list[SensorNode]:
    """Sensor nodes for one trial; only the private valuations are random."""
    positions = sensor_layout(sc)
    fc = np.asarray(sc.fc_position, dtype=float)
    dists = np.hypot(positions[:, 0] - fc[0], positions[:, 1] - fc[1])
    energies = initial_energies(sc, dists)
    rng = _trial_rng(sc.seed, trial, _STREAM_VALUATION)
    valuations = rng.uniform(sc.valuation_lower, sc.valuation_upper, size=len(positions))
    return [
        SensorNode(
            id=i,
            x=positions[i, 0],
            y=positions[i, 1],
            fc_distance=dists[i],
            initial_energy=energies[i],
            residual_energy=energies[i],
            true_valuation=valuations[i],
            lower=sc.valuation_lower,
            upper=sc.valuation_upper,
        )
        for i in range(len(positions))
    ]


@dataclass
class StepRecord:
    """Everything emitted about one step of one trial."""

    step: int
    allocation: np.ndarray = field(repr=False)  # bits per sensor
    payments: np.ndarray = field(repr=False)
    fc_utility: float
    fc_utility_no_prior: float
    sq_error: float
    residual_energy: np.ndarray = field(repr=False)  # after this step's debit
    n_transmitting: int
    frac_dead: float
    degenerate: bool


@dataclass
class TrialResult:
    trial: int
    records: list[StepRecord]
    lifetime: float  # first step with frac_dead >= alpha; inf if never
    degeneracy_events: int


def _is_dead(sensor: SensorNode) -> bool:
    return sensor.residual_energy < transmit_energy(1, sensor.fc_distance)


def _quantizer_kwargs(sc: Scenario) -> dict:
    if sc.quantizer_strategy == "distance_matched":
        max_d = sc.quantizer_max_distance
        return {
            "max_distance": sc.roi_size / 2.0 if max_d is None else max_d,
            "min_spacing_sigmas": sc.quantizer_min_spacing_sigmas,
        }
    if sc.quantizer_strategy == "uniform":
        return {"min_spacing_sigmas": sc.quantizer_min_spacing_sigmas}
    if sc.quantizer_strategy == "equal_mass" and sc.quantizer_reference_amplitude is not None:
        return {"reference_amplitude": sc.quantizer_reference_amplitude}
    return {}


def baseline_fim_allocation(ctx: StepContext) -> np.ndarray:
    """Cost-blind allocation: maximize summed FIM traces under the bandwidth cap."""
    solution = solve_dp(fim_only_instance(ctx))
    bits = np.zeros(ctx.n_sensors, dtype=int)
    for j, i in enumerate(ctx.live):
        bits[i] = solution.choice[j]
    return bits


def run_trial(sc: Scenario, trial: int = 0) -> TrialResult:
    """One full tracking run; deterministic given (scenario, trial index)."""
    signal = sc.signal()
    vmodel = sc.valuation_model()
    motion = build_motion_model(sc.sampling_interval, sc.noise_intensity)
    bank = build_quantizer_bank(max(sc.total_bits, 1), signal, sc.quantizer_strategy,
                                **_quantizer_kwargs(sc))
    sensors = make_sensors(sc, trial)
    reports = np.array([s.true_valuation for s in sensors])
    prior_cov = sc.prior_covariance()

    rng_truth = _trial_rng(sc.seed, trial, _STREAM_TRUTH)
    rng_meas = _trial_rng(sc.seed, trial, _STREAM_MEASURE)
    rng_filter = _trial_rng(sc.seed, trial, _STREAM_FILTER)

    truth = sample_initial(np.asarray(sc.prior_mean), prior_cov, rng_truth)
    cloud = initial_cloud(np.asarray(sc.prior_mean), prior_cov, sc.particles, rng_filter)

    records: list[StepRecord] = []
    degeneracies = 0
    lifetime = math.inf

    for t in range(1, sc.steps + 1):
        # The reversal schedule is part of the known process model, so both
        # the true target and the filter prediction apply it.
        if sc.reverse_every is not None and t > 1 and (t - 1) % sc.reverse_every == 0:
            truth = reverse_velocity(truth)
            cloud = reverse_cloud_velocity(cloud)
        truth = step(motion, truth, rng_truth)
        cloud = predict(motion, cloud, rng_filter)

        ctx = build_step_context(
            cloud, sensors, reports, vmodel, signal, bank, sc.total_bits, sc.fim_subsample
        )
        if sc.allocation_policy == "fim":
            allocation = baseline_fim_allocation(ctx)
            payments = np.zeros(len(sensors))
        else:
            allocation, _ = solve_allocation(ctx)
            payments = compute_all_payments(ctx, allocation)

        prior_trace = float(np.trace(prior_fim(cloud)))
        info_trace = float(
            sum(ctx.traces[j, allocation[i]] for j, i in enumerate(ctx.live))
        )

        readings = []
        for i in np.flatnonzero(allocation):
            sensor = sensors[i]
            z = measure(signal, (sensor.x, sensor.y), truth, rng_meas)
            quantizer = bank[allocation[i]]
            readings.append((quantizer, (sensor.x, sensor.y), quantize(quantizer, z)))

        cloud, degenerate = update_weights(cloud, signal, readings)
        if degenerate:
            degeneracies += 1
            log.warning("trial %d step %d: degenerate weight update", trial, t)
        est = estimate(cloud)
        sq_error = float((est[0] - truth[0]) ** 2 + (est[1] - truth[1]) ** 2)
        cloud = resample(cloud, rng_filter)

        for i in np.flatnonzero(allocation):
            sensors[i].residual_energy -= transmit_energy(
                int(allocation[i]), sensors[i].fc_distance
            )

        total_pay = float(payments.sum())
        frac_dead = sum(_is_dead(s) for s in sensors) / len(sensors)
        if math.isinf(lifetime) and frac_dead >= sc.lifetime_alpha:
            lifetime = t
        records.append(
            StepRecord(
                step=t,
                allocation=allocation.copy(),
                payments=payments,
                fc_utility=sc.fc_value * (info_trace + prior_trace) - total_pay,
                fc_utility_no_prior=sc.fc_value * info_trace - total_pay,
                sq_error=sq_error,
                residual_energy=np.array([s.residual_energy for s in sensors]),
                n_transmitting=int(np.count_nonzero(allocation)),
                frac_dead=frac_dead,
                degenerate=degenerate,
            )
        )

    return TrialResult(trial, records, lifetime, degeneracies)


@dataclass
class CampaignResult:
    scenario: Scenario
    trials: list[TrialResult]

    @property
    def n_steps(self) -> int:
        return self.scenario.steps

    def _stack(self, attr: str) -> np.ndarray:
        return np.array([[getattr(r, attr) for r in t.records] for t in self.trials])

    def mse(self) -> np.ndarray:
        """Per-step mean squared position error across trials."""
        return self._stack("sq_error").mean(axis=0)

    def mean_fc_utility(self, include_prior: bool = True) -> np.ndarray:
        attr = "fc_utility" if include_prior else "fc_utility_no_prior"
        return self._stack(attr).mean(axis=0)

    def mean_transmitting(self) -> np.ndarray:
        return self._stack("n_transmitting").mean(axis=0)

    def mean_total_payment(self) -> np.ndarray:
        return np.array(
            [[r.payments.sum() for r in t.records] for t in self.trials]
        ).mean(axis=0)

    def mean_frac_dead(self) -> np.ndarray:
        return self._stack("frac_dead").mean(axis=0)

    def lifetimes(self) -> list[float]:
        return [t.lifetime for t in self.trials]

    def lifetime(self) -> float:
        """Campaign lifetime: median of the per-trial lifetimes."""
        return float(np.median(self.lifetimes()))


def run_campaign(sc: Scenario, trials: int | None = None) -> CampaignResult:
    """Run ``trials`` independent trials (defaults to the scenario's count)."""
    n = sc.trials if trials is None else trials
    results = []
    for trial in range(n):
        results.append(run_trial(sc, trial))
        log.info("trial %d/%d done", trial + 1, n)
    return CampaignResult(sc, results)


# ---------------------------------------------------------------------------
# Output files

STEP_CSV_PREFIX = ["trial", "step", "sq_error", "fc_utility", "fc_utility_no_prior",
                   "n_transmitting", "total_payment", "frac_dead", "degenerate"]
AGGREGATE_CSV_COLUMNS = ["step", "mse", "mean_fc_utility", "mean_fc_utility_no_prior",
                         "mean_n_transmitting", "mean_total_payment", "mean_frac_dead"]


def step_csv_columns(n_sensors: int) -> list[str]:
    """Stable column names of the per-(trial, step) CSV."""
    cols = list(STEP_CSV_PREFIX)
    cols += [f"alloc_{i}" for i in range(n_sensors)]
    cols += [f"payment_{i}" for i in range(n_sensors)]
    cols += [f"energy_{i}" for i in range(n_sensors)]
    return cols


def write_step_csv(result: CampaignResult, path: str | Path) -> None:
    """One row per (trial, step); floats keep full round-trip precision."""
    n_sensors = len(result.trials[0].records[0].allocation)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(step_csv_columns(n_sensors))
        for trial in result.trials:
            for rec in trial.records:
                row = [
                    trial.trial,
                    rec.step,
                    repr(rec.sq_error),
                    repr(rec.fc_utility),
                    repr(rec.fc_utility_no_prior),
                    rec.n_transmitting,
                    repr(float(rec.payments.sum())),
                    repr(rec.frac_dead),
                    int(rec.degenerate),
                ]
                row += [int(b) for b in rec.allocation]
                row += [repr(float(p)) for p in rec.payments]
                row += [repr(float(e)) for e in rec.residual_energy]
                writer.writerow(row)


def write_aggregate_csv(result: CampaignResult, path: str | Path) -> None:
    """One row per step with metrics averaged over trials."""
    mse = result.mse()
    u = result.mean_fc_utility(True)
    u_np = result.mean_fc_utility(False)
    tx = result.mean_transmitting()
    pay = result.mean_total_payment()
    dead = result.mean_frac_dead()
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(AGGREGATE_CSV_COLUMNS)
        for t in range(result.n_steps):
            writer.writerow(
                [t + 1, repr(mse[t]), repr(u[t]), repr(u_np[t]),
                 repr(tx[t]), repr(pay[t]), repr(dead[t])]
            )


def write_summary_json(result: CampaignResult, path: str | Path) -> None:
    lifetimes = [None if math.isinf(x) else x for x in result.lifetimes()]
    campaign_lifetime = result.lifetime()
    summary = {
        "scenario": result.scenario.to_dict(),
        "n_trials": len(result.trials),
        "lifetime": None if math.isinf(campaign_lifetime) else campaign_lifetime,
        "per_trial_lifetime": lifetimes,
        "degeneracy_events": sum(t.degeneracy_events for t in result.trials),
        "mean_mse": float(result.mse().mean()),
    }
    with open(path, "w") as fh:
        json.dump(summary, fh, indent=2)
        fh.write("\n")


def write_outputs(result: CampaignResult, out_dir: str | Path) -> dict[str, Path]:
    """Write steps.csv, aggregate.csv and summary.json into ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "steps": out / "steps.csv",
        "aggregate": out / "aggregate.csv",
        "summary": out / "summary.json",
    }
    write_step_csv(result, paths["steps"])
    write_aggregate_csv(result, paths["aggregate"])
    write_summary_json(result, paths["summary"])
    return paths


def lifetime_sweep(
    sc: Scenario, exponents: list[float], alpha: float | None = None, trials: int | None = None
) -> dict[float, dict]:
    """Campaign lifetime for each energy-awareness exponent, matched seeds."""
    out = {}
    for k in exponents:
        sck = replace(sc, energy_exponent=k)
        if alpha is not None:
            sck = replace(sck, lifetime_alpha=alpha)
        result = run_campaign(sck, trials)
        lifetimes = [None if math.isinf(x) else x for x in result.lifetimes()]
        lt = result.lifetime()
        out[k] = {
            "lifetime": None if math.isinf(lt) else lt,
            "per_trial": lifetimes,
            "mean_mse": float(result.mse().mean()),
        }
    return out
