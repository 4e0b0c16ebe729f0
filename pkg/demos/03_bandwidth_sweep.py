"""Tracking quality as a function of the per-step bandwidth budget.

Small Monte Carlo campaigns at several total-bit budgets, plotting the
per-step MSE curves.  More bandwidth buys finer quantization and more
sensors per step, so the curves should stack in budget order.

Run:  python demos/03_bandwidth_sweep.py   (about a minute)
"""

import os

import numpy as np

from auctrack.sim import Scenario, run_campaign

OUT = "demos/output"
BUDGETS = (2, 5, 8)
TRIALS = 10


def main():
    curves = {}
    for m in BUDGETS:
        sc = Scenario(total_bits=m, steps=20, particles=1000, seed=2)
        campaign = run_campaign(sc, trials=TRIALS)
        curves[m] = campaign.mse()
        print(
            f"M={m}: mean MSE {curves[m].mean():.3f}, "
            f"mean sensors/step {campaign.mean_transmitting().mean():.2f}, "
            f"mean payment/step {campaign.mean_total_payment().mean():.2e}"
        )

    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        print("matplotlib not installed; skipping the plot")
        return

    fig, ax = plt.subplots(figsize=(7, 4.5))
    steps = np.arange(1, 21)
    for m in BUDGETS:
        ax.plot(steps, curves[m], marker="o", ms=3, label=f"M = {m} bits/step")
    ax.set_yscale("log")
    ax.set_xlabel("time step")
    ax.set_ylabel("MSE (m$^2$), mean of squared position error")
    ax.set_title(f"Tracking error vs bandwidth budget ({TRIALS} trials)")
    ax.legend()
    ax.grid(alpha=0.3)

    os.makedirs(OUT, exist_ok=True)
    path = f"{OUT}/bandwidth_sweep.png"
    fig.savefig(path, dpi=120, bbox_inches="tight")
    print(f"wrote {path}")


if __name__ == "__main__":
    main()
