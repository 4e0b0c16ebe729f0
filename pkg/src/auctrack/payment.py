"""Threshold payments that make truthful reporting optimal.

A sensor's allocated bits are weakly decreasing in its own report, so the
report axis splits into segments of constant allocation.  The payment is the
cost of the realized allocation priced at the first drop point, plus the
integral of the (energy cost of the) allocation curve up to the top of the
valuation support.  Drop points are located by re-pricing one class and
re-solving; monotonicity lets a divide-and-conquer bisection find every drop
to tolerance.
"""

from __future__ import annotations

import math

import numpy as np

from .auction import StepContext, energy_factor, solve_allocation, transmit_energy

# Thresholds are located to this fraction of the valuation support width.
RELATIVE_TOLERANCE = 1e-9


def allocation_for_report(ctx: StepContext, j: int, report: float) -> int:
    """Bits live sensor ``j`` would get had it reported ``report``.

    Full re-solve of the step's instance with only that class re-priced; the
    reference implementation the fast probe path must agree with.
    """
    bits, _ = solve_allocation(ctx, replace=(j, report))
    return int(bits[ctx.live[j]])


class RestTables:
    """Best-value tables over all classes except one, at the standing reports.

    Built once per step context in O(n * capacity^2); afterwards the bits a
    single sensor wins at any hypothetical report costs O(capacity^2) instead
    of a full re-solve.  Values decompose exactly (a selection splits into a
    prefix and a suffix around the probed class), so probe results match a
    full re-solve everywhere except at exact value ties, which are isolated
    report points and cannot move a bisection limit.
    """

    def __init__(self, ctx: StepContext):
        self.ctx = ctx
        cap = ctx.capacity
        n = len(ctx.live)
        neg = -math.inf

        def fold(table_prev, items):
            row = [neg] * (cap + 1)
            for y in range(cap + 1):
                best = neg
                for m, v in items:
                    if m > y:
                        break
                    cand = v + table_prev[y - m]
                    if cand > best:
                        best = cand
                row[y] = best
            return row

        zeros = [0.0] * (cap + 1)
        self._prefix = [zeros]  # prefix[i]: best over classes 0..i-1
        for j in range(n):
            self._prefix.append(fold(self._prefix[-1], ctx.class_items(j)))
        self._suffix = [zeros]  # suffix (reversed): best over classes i..n-1
        for j in range(n - 1, -1, -1):
            self._suffix.append(fold(self._suffix[-1], ctx.class_items(j)))
        self._suffix.reverse()

    def rest_table(self, j: int) -> list[float]:
        """``table[y]``: best value every class except ``j`` achieves within ``y``."""
        cap = self.ctx.capacity
        pre = self._prefix[j]
        suf = self._suffix[j + 1]
        return [
            max(pre[t] + suf[y - t] for t in range(y + 1)) for y in range(cap + 1)
        ]

    def bits_for_report(self, j: int, rest: list[float], report: float) -> int:
        """Bits class ``j`` wins against the fixed rest of the market."""
        cap = self.ctx.capacity
        best = -math.inf
        best_bits = 0
        for m, v in self.ctx.class_items(j, report):
            cand = v + rest[cap - m]
            if cand > best:
                best = cand
                best_bits = m
        return best_bits


def _collect_drops(probe, lo, hi, bits_lo, bits_hi, tol, out):
    """All drop points of a weakly decreasing integer step function on [lo, hi]."""
    if bits_lo == bits_hi:
        return
    if hi - lo <= tol:
        out.append(0.5 * (lo + hi))
        return
    mid = 0.5 * (lo + hi)
    bits_mid = probe(mid)
    _collect_drops(probe, lo, mid, bits_lo, bits_mid, tol, out)
    _collect_drops(probe, mid, hi, bits_mid, bits_hi, tol, out)


def find_thresholds(
    ctx: StepContext,
    j: int,
    report: float | None = None,
    tables: RestTables | None = None,
) -> list[float]:
    """Reports in (report, upper] at which sensor ``j``'s allocation drops.

    Sorted ascending; empty when the allocation is constant all the way up.
    At most as many thresholds as the sensor's realized bits.
    """
    thresholds, _ = _threshold_segments(ctx, j, report, tables)
    return thresholds


def _threshold_segments(
    ctx: StepContext,
    j: int,
    report: float | None,
    tables: RestTables | None,
) -> tuple[list[float], list[int]]:
    """Drop points plus the allocation on every segment they delimit.

    ``segments[k]`` is the allocation between threshold ``k-1`` and ``k``
    (``segments[0]`` starts at the report, the last segment ends at the upper
    valuation bound).
    """
    i = ctx.live[j]
    sensor = ctx.sensors[i]
    r = float(ctx.reports[i]) if report is None else float(report)
    dist = ctx.model.distribution_for(sensor)
    if tables is None:
        tables = RestTables(ctx)
    rest = tables.rest_table(j)

    def probe(v: float) -> int:
        return tables.bits_for_report(j, rest, v)

    bits_at_r = probe(r)
    bits_at_top = probe(dist.upper)
    tol = RELATIVE_TOLERANCE * (dist.upper - dist.lower)
    drops: list[float] = []
    _collect_drops(probe, r, dist.upper, bits_at_r, bits_at_top, tol, drops)

    segments = [bits_at_r]
    edges = drops + [dist.upper]
    for k in range(len(drops)):
        segments.append(probe(0.5 * (edges[k] + edges[k + 1])))
    return drops, segments


def compute_payment(
    ctx: StepContext,
    j: int,
    report: float | None = None,
    tables: RestTables | None = None,
) -> float:
    """Payment owed to live sensor ``j`` under the threshold rule.

    Zero bits pay zero.  Otherwise the payment is the report-axis integral of
    the (energy-factor adjusted) transmit cost of the allocation curve from
    the report to the top of the support, plus the report times the realized
    cost; with a piecewise-constant curve this telescopes to
    ``w1 * E(q0) + sum (w_{k+1} - w_k) * E(q_k) + (upper - w_n) * E(q_n)``,
    the last term vanishing when the allocation has dropped to zero.  Covers
    the sensor's stated cost at any report, which is what makes participation
    individually rational.
    """
    i = ctx.live[j]
    sensor = ctx.sensors[i]
    dist = ctx.model.distribution_for(sensor)
    drops, segments = _threshold_segments(ctx, j, report, tables)
    if segments[0] == 0:
        return 0.0
    g = energy_factor(ctx.model, sensor)

    def cost(bits: int) -> float:
        return g * transmit_energy(bits, sensor.fc_distance)

    if not drops:
        return dist.upper * cost(segments[0])
    pay = drops[0] * cost(segments[0])
    for k in range(1, len(drops)):
        pay += (drops[k] - drops[k - 1]) * cost(segments[k])
    pay += (dist.upper - drops[-1]) * cost(segments[-1])
    return pay


def compute_all_payments(ctx: StepContext, allocation: np.ndarray) -> np.ndarray:
    """Per-sensor payments for one realized step allocation (dense array)."""
    payments = np.zeros(ctx.n_sensors)
    eligible = [j for j, i in enumerate(ctx.live) if allocation[i] >= 1]
    if not eligible:
        return payments
    tables = RestTables(ctx)
    for j in eligible:
        payments[ctx.live[j]] = compute_payment(ctx, j, tables=tables)
    return payments
