"""Command line entry points: simulate, lifetime, auction, mckp.

Every subcommand reads JSON, writes CSV/JSON, and exits non-zero with a
diagnostic on malformed input.  See the README for the file schemas.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .auction import ValuationModel, build_step_context, solve_allocation, transmit_energy
from .filtering import initial_cloud
from .mckp import instance_from_dict, solution_to_dict, solve_dp
from .payment import compute_all_payments
from .sensing import SensorNode, SignalModel, build_quantizer_bank
from .sim import ConfigError, Scenario, lifetime_sweep, run_campaign, write_outputs


def _load_json(path: str) -> dict:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: expected a JSON object")
    return data


def _apply_overrides(sc: Scenario, args) -> Scenario:
    if args.seed is not None:
        sc = replace(sc, seed=args.seed)
    if args.trials is not None:
        sc = replace(sc, trials=args.trials)
    if args.particles is not None:
        sc = replace(sc, particles=args.particles)
    return sc


def _cmd_simulate(args) -> int:
    sc = _apply_overrides(Scenario.from_json(args.config), args)
    result = run_campaign(sc)
    paths = write_outputs(result, args.out)
    mse = result.mse()
    print(f"ran {len(result.trials)} trials x {sc.steps} steps")
    print(f"mean MSE over steps: {mse.mean():.4f} (final step {mse[-1]:.4f})")
    lifetime = result.lifetime()
    print(f"lifetime (alpha={sc.lifetime_alpha}): {lifetime if lifetime != float('inf') else 'never'}")
    for name, p in paths.items():
        print(f"wrote {name}: {p}")
    return 0


def _cmd_lifetime(args) -> int:
    sc = _apply_overrides(Scenario.from_json(args.config), args)
    try:
        exponents = [float(x) for x in args.k.split(",") if x != ""]
    except ValueError as exc:
        raise ConfigError(f"--k must be a comma-separated list of numbers: {exc}") from exc
    if not exponents:
        raise ConfigError("--k must name at least one exponent")
    sweep = lifetime_sweep(sc, exponents, alpha=args.alpha)
    payload = {str(k): v for k, v in sweep.items()}
    text = json.dumps(payload, indent=2) + "\n"
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "lifetime.json").write_text(text)
        print(f"wrote {out / 'lifetime.json'}")
    else:
        sys.stdout.write(text)
    return 0


def _auction_sensors(data: dict) -> list[SensorNode]:
    fc = data.get("fc_position")
    sensors = []
    for i, raw in enumerate(data["sensors"]):
        try:
            x, y = float(raw["x"]), float(raw["y"])
            report = float(raw["report"])
            lower = float(raw.get("lower", 0.1))
            upper = float(raw.get("upper", 1.0))
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"sensor {i}: {exc}") from exc
        if "fc_distance" in raw:
            h = float(raw["fc_distance"])
        elif fc is not None:
            h = float(np.hypot(x - fc[0], y - fc[1]))
        else:
            raise ConfigError(f"sensor {i}: needs fc_distance or a scenario fc_position")
        # Unconstrained battery unless the scenario says otherwise.
        default_e0 = max(transmit_energy(int(data.get("total_bits", 8)), h), 1e-12) * 1e6
        e0 = float(raw.get("initial_energy", default_e0))
        residual = float(raw.get("residual_energy", e0))
        if not lower <= report <= upper:
            raise ConfigError(f"sensor {i}: report outside [{lower}, {upper}]")
        sensors.append(
            SensorNode(
                id=i, x=x, y=y, fc_distance=h,
                initial_energy=e0, residual_energy=residual,
                true_valuation=report, lower=lower, upper=upper,
            )
        )
    return sensors


def _cmd_auction(args) -> int:
    data = _load_json(args.scenario)
    for key in ("sensors", "total_bits", "prior"):
        if key not in data:
            raise ConfigError(f"auction scenario is missing {key!r}")
    signal_cfg = data.get("signal", {})
    try:
        signal = SignalModel(
            float(signal_cfg.get("p0", 1000.0)), float(signal_cfg.get("sigma", 1.0))
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    capacity = int(data["total_bits"])
    if capacity < 1:
        raise ConfigError("total_bits must be >= 1")
    sensors = _auction_sensors(data)
    reports = np.array([s.true_valuation for s in sensors])
    model = ValuationModel(
        float(data.get("fc_value", 1.0)), float(data.get("energy_exponent", 0.0))
    )
    prior = data["prior"]
    try:
        mean = np.asarray(prior["mean"], dtype=float)
        if "cov" in prior:
            cov = np.asarray(prior["cov"], dtype=float)
        else:
            s2 = float(prior.get("position_sigma", 2.0 / 3.0)) ** 2
            vv = float(prior.get("velocity_var", 0.01))
            cov = np.diag([s2, s2, vv, vv])
        n_particles = int(prior.get("particles", 2000))
        seed = int(prior.get("seed", 0))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad prior: {exc}") from exc
    rng = np.random.default_rng(seed)
    cloud = initial_cloud(mean, cov, n_particles, rng)
    bank = build_quantizer_bank(
        capacity, signal, data.get("quantizer_strategy", "distance_matched")
    )
    ctx = build_step_context(cloud, sensors, reports, model, signal, bank, capacity)
    allocation, solution = solve_allocation(ctx)
    payments = compute_all_payments(ctx, allocation)
    payload = {
        "allocation": [int(b) for b in allocation],
        "payments": [float(p) for p in payments],
        "objective": solution.objective,
        "total_bits_used": int(allocation.sum()),
        "live_sensors": [int(i) for i in ctx.live],
    }
    text = json.dumps(payload, indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text)
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def _cmd_mckp(args) -> int:
    data = _load_json(args.instance)
    try:
        instance = instance_from_dict(data)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    solution = solve_dp(instance)
    text = json.dumps(solution_to_dict(solution), indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text)
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="auctrack",
        description="Auction-based bandwidth allocation for sensor-network target tracking",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a Monte Carlo tracking campaign")
    sim.add_argument("--config", required=True, help="scenario JSON file")
    sim.add_argument("--out", required=True, help="output directory")
    life = sub.add_parser("lifetime", help="network lifetime vs energy-awareness exponent")
    life.add_argument("--config", required=True, help="scenario JSON file")
    life.add_argument("--k", required=True, help="comma-separated exponents, e.g. 0,3,15")
    life.add_argument("--alpha", type=float, default=None, help="dead fraction defining lifetime")
    life.add_argument("--out", default=None, help="optional output directory")
    for p in (sim, life):
        p.add_argument("--seed", type=int, default=None, help="override config seed")
        p.add_argument("--trials", type=int, default=None, help="override config trials")
        p.add_argument("--particles", type=int, default=None, help="override config particles")

    auc = sub.add_parser("auction", help="run one bandwidth auction from a scenario JSON")
    auc.add_argument("--scenario", required=True, help="auction scenario JSON file")
    auc.add_argument("--out", default=None, help="optional output JSON path")

    knap = sub.add_parser("mckp", help="solve a multiple-choice knapsack instance")
    knap.add_argument("--instance", required=True, help="instance JSON file")
    knap.add_argument("--out", default=None, help="optional output JSON path")

    return parser


_COMMANDS = {
    "simulate": _cmd_simulate,
    "lifetime": _cmd_lifetime,
    "auction": _cmd_auction,
    "mckp": _cmd_mckp,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ConfigError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
