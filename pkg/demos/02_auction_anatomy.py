"""Anatomy of one bandwidth auction.

Builds a single-step auction by hand: a handful of sensors, a predicted
particle cloud, and the full table of (sensor, bits) item values.  Solves
the knapsack, then walks one winner's report axis to show the thresholds
behind its payment, and finally verifies that truth-telling maximizes that
sensor's realized utility on a misreport grid.

Run:  python demos/02_auction_anatomy.py
"""

import numpy as np

from auctrack.auction import (
    ValuationModel,
    build_instance,
    build_step_context,
    energy_factor,
    solve_allocation,
    transmit_energy,
)
from auctrack.filtering import ParticleCloud
from auctrack.payment import RestTables, allocation_for_report, compute_payment, find_thresholds
from auctrack.sensing import SensorNode, SignalModel, build_quantizer_bank


def make_cloud(rng, center, n=1500):
    states = np.column_stack(
        [
            rng.normal(center[0], 1.5, n),
            rng.normal(center[1], 1.5, n),
            rng.normal(2.0, 0.1, n),
            rng.normal(2.0, 0.1, n),
        ]
    )
    return ParticleCloud(states, np.full(n, 1.0 / n))


def main():
    rng = np.random.default_rng(5)
    signal = SignalModel()
    capacity = 5
    bank = build_quantizer_bank(capacity, signal)
    model = ValuationModel(fc_value=1.0)

    # four sensors at staggered ranges from the believed target position
    specs = [(2.0, 1.0, 0.35), (7.0, -3.0, 0.2), (-6.0, 5.0, 0.55), (12.0, 9.0, 0.8)]
    sensors = []
    for i, (x, y, v) in enumerate(specs):
        h = float(np.hypot(x + 22.0, y - 20.0))
        e0 = 1000 * transmit_energy(capacity, h)
        sensors.append(SensorNode(i, x, y, h, e0, e0, v, 0.1, 1.0))
    reports = np.array([s.true_valuation for s in sensors])

    cloud = make_cloud(rng, center=(1.0, 0.5))
    ctx = build_step_context(cloud, sensors, reports, model, signal, bank, capacity)

    print("item value table: rows = sensors, columns = bits 0..5")
    inst = build_instance(ctx)
    for j, i in enumerate(ctx.live):
        _, values = inst.classes[j]
        cells = "  ".join(f"{v:9.5f}" for v in values)
        print(f"  sensor {i} (report {reports[i]:.2f}): {cells}")

    allocation, solution = solve_allocation(ctx)
    print(f"\nwinners: {dict((int(i), int(b)) for i, b in enumerate(allocation) if b)}")
    print(f"objective: {solution.objective:.5f}")

    j = max(range(len(ctx.live)), key=lambda j: allocation[ctx.live[j]])
    i = ctx.live[j]
    print(f"\npayment anatomy for sensor {i} (won {allocation[i]} bits):")
    thresholds = find_thresholds(ctx, j)
    print(f"  drop thresholds above its report: {np.round(thresholds, 4).tolist()}")
    for r in [reports[i]] + thresholds + [1.0]:
        r = min(max(r, 0.1), 1.0)
        print(f"  at report {r:.4f} it would win {allocation_for_report(ctx, j, r)} bits")
    pay = compute_payment(ctx, j)
    cost = reports[i] * energy_factor(model, sensors[i]) * transmit_energy(
        int(allocation[i]), sensors[i].fc_distance
    )
    print(f"  payment {pay:.3e} vs stated energy cost {cost:.3e} (surplus {pay - cost:.3e})")

    print("\ntruthfulness check on a misreport grid:")
    tables = RestTables(ctx)
    truth = float(reports[i])
    g = energy_factor(model, sensors[i])

    def utility(report):
        bits = allocation_for_report(ctx, j, report)
        p = compute_payment(ctx, j, report=report, tables=tables)
        return p - truth * g * transmit_energy(bits, sensors[i].fc_distance)

    grid = np.linspace(0.1, 1.0, 19)
    best = max(grid, key=lambda r: utility(float(r)))
    print(f"  utility at truth {truth:.2f}: {utility(truth):.4e}")
    print(f"  best grid misreport {best:.2f}: {utility(float(best)):.4e}")
    print("  truth-telling is (weakly) optimal:", utility(truth) >= utility(float(best)) - 1e-12)


if __name__ == "__main__":
    main()
