"""The knapsack core on its own.

The per-step winner determination is a multiple-choice knapsack: one item per
sensor (its bit count), weights are bits, the capacity is the bandwidth.
This script solves a small instance by dynamic programming, confirms the
answer against exhaustive enumeration, and times the solver across sizes.

Run:  python demos/05_mckp_solver.py
"""

import time

import numpy as np

from auctrack.mckp import MckpInstance, brute_force, solve_dp


def random_instance(rng, n_classes, capacity):
    classes = []
    for _ in range(n_classes):
        values = rng.uniform(-1.0, 1.0, capacity + 1)
        values[0] = 0.0
        classes.append(tuple((w, float(v)) for w, v in enumerate(values)))
    return MckpInstance(tuple(classes), capacity)


def main():
    rng = np.random.default_rng(0)

    inst = random_instance(rng, n_classes=4, capacity=6)
    sol = solve_dp(inst)
    ref = brute_force(inst)
    print("small instance, 4 classes, capacity 6")
    print(f"  dynamic program : choice={sol.choice} objective={sol.objective:.6f}")
    print(f"  brute force     : choice={ref.choice} objective={ref.objective:.6f}")
    print(f"  identical: {sol == ref}")

    print("\nagreement over 300 random instances:", end=" ")
    ok = 0
    for _ in range(300):
        inst = random_instance(rng, int(rng.integers(1, 7)), int(rng.integers(1, 9)))
        if solve_dp(inst) == brute_force(inst):
            ok += 1
    print(f"{ok}/300 exact matches (objective, weight and choice)")

    print("\nsolver scaling (pure DP, no enumeration):")
    for n, cap in ((25, 8), (100, 16), (400, 32)):
        inst = random_instance(rng, n, cap)
        t0 = time.perf_counter()
        for _ in range(20):
            solve_dp(inst)
        dt = (time.perf_counter() - t0) / 20
        print(f"  {n:4d} classes, capacity {cap:3d}: {dt * 1e3:7.2f} ms per solve")


if __name__ == "__main__":
    main()
