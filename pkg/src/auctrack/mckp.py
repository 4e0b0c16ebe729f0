"""Exact multiple-choice knapsack solving.

Pick exactly one item from each class, maximizing total value subject to a
weight capacity.  ``solve_dp`` is the production solver (dynamic program over
a stages-by-capacity table with backtracking); ``brute_force`` is the
exhaustive oracle used by the tests.

Ties are resolved by one canonical rule shared by both solvers: among
value-optimal selections, prefer the smallest total weight, then the
selection whose per-class weight vector is lexicographically smallest in
class order.  Objectives of identical selections are accumulated in the same
(last-class-first) order by both solvers, so the two agree bit-for-bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

_BRUTE_FORCE_LIMIT = 10_000_000


@dataclass(frozen=True)
class MckpInstance:
    """Classes of (weight, value) items plus a total weight capacity.

    Weights are non-negative integers, unique within a class, and every class
    must offer a weight-0 item so the instance is always feasible.
    """

    classes: tuple = field(repr=False)  # tuple of (weights tuple, values tuple)
    capacity: int

    def __post_init__(self):
        if self.capacity < 0:
            raise ValueError("capacity must be non-negative")
        norm = []
        for idx, cls in enumerate(self.classes):
            items = sorted((int(w), float(v)) for w, v in cls)
            weights = tuple(w for w, _ in items)
            values = tuple(v for _, v in items)
            if len(set(weights)) != len(weights):
                raise ValueError(f"class {idx} has duplicate weights")
            if not weights or weights[0] != 0:
                raise ValueError(f"class {idx} is missing the weight-0 item")
            if weights[0] < 0:
                raise ValueError(f"class {idx} has a negative weight")
            norm.append((weights, values))
        object.__setattr__(self, "classes", tuple(norm))

    @property
    def n_classes(self) -> int:
        return len(self.classes)


@dataclass(frozen=True)
class MckpSolution:
    choice: tuple  # selected weight per class
    objective: float
    total_weight: int


def solve_dp(instance: MckpInstance) -> MckpSolution:
    """Exact solution by dynamic programming with recorded decisions.

    Stage ``l`` holds, for every residual capacity, the best achievable value
    over classes ``l..N`` (plus the minimum total weight among optima), filled
    in O(N * M * class_size) table operations.  The selection is recovered by
    a front-to-back readout that keeps the canonical tie-break exact.
    """
    cap = instance.capacity
    n = instance.n_classes
    neg = -math.inf

    # values[l][y]: best suffix value from class l with capacity y;
    # bits[l][y]: minimum total weight among selections achieving it.
    values = [[0.0] * (cap + 1) for _ in range(n + 1)]
    bits = [[0] * (cap + 1) for _ in range(n + 1)]
    for l in range(n - 1, -1, -1):
        weights_l, values_l = instance.classes[l]
        val_next = values[l + 1]
        bit_next = bits[l + 1]
        val_row = values[l]
        bit_row = bits[l]
        for y in range(cap + 1):
            best = neg
            best_bits = 0
            for w, v in zip(weights_l, values_l):
                if w > y:
                    break
                cand = v + val_next[y - w]
                if cand > best:
                    best = cand
                    best_bits = w + bit_next[y - w]
                elif cand == best:
                    b = w + bit_next[y - w]
                    if b < best_bits:
                        best_bits = b
            val_row[y] = best
            bit_row[y] = best_bits

    objective = values[0][cap]
    choice = []
    y = cap
    want_val = objective
    want_bits = bits[0][cap]
    for l in range(n):
        weights_l, values_l = instance.classes[l]
        val_next = values[l + 1]
        bit_next = bits[l + 1]
        for w, v in zip(weights_l, values_l):
            if w > y:
                break
            if v + val_next[y - w] == want_val and w + bit_next[y - w] == want_bits:
                choice.append(w)
                y -= w
                want_val = val_next[y]
                want_bits = bit_next[y]
                break
        else:  # pragma: no cover - every class has a weight-0 item
            raise RuntimeError("backtracking failed on a feasible instance")

    return MckpSolution(tuple(choice), objective, bits[0][cap])


def brute_force(instance: MckpInstance) -> MckpSolution:
    """Exhaustive oracle with the identical tie-break and summation order.

    Rejects instances whose choice space exceeds 10^7 combinations.  Branches
    are pruned only on capacity, never on value.
    """
    space = math.prod(len(w) for w, _ in instance.classes)
    if space > _BRUTE_FORCE_LIMIT:
        raise ValueError(f"instance too large for brute force ({space} combinations)")

    n = instance.n_classes
    cap = instance.capacity
    current = [0] * n
    best_key: tuple | None = None
    best: tuple | None = None

    def visit(level: int, budget: int):
        nonlocal best_key, best
        if level == n:
            value = 0.0
            for l in range(n - 1, -1, -1):
                weights_l, values_l = instance.classes[l]
                value = values_l[weights_l.index(current[l])] + value
            key = (-value, cap - budget, tuple(current))
            if best_key is None or key < best_key:
                best_key = key
                best = (tuple(current), value, cap - budget)
            return
        weights_l, _ = instance.classes[level]
        for w in weights_l:
            if w > budget:
                break
            current[level] = w
            visit(level + 1, budget - w)
        current[level] = 0

    visit(0, cap)
    assert best is not None
    return MckpSolution(best[0], best[1], best[2])


def instance_from_dict(data: dict) -> MckpInstance:
    """Parse the JSON wire format: ``{"classes": [[{"weight", "value"}...]...], "capacity"}``."""
    try:
        classes = [
            [(item["weight"], item["value"]) for item in cls] for cls in data["classes"]
        ]
        capacity = int(data["capacity"])
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed MCKP instance: {exc}") from exc
    return MckpInstance(tuple(map(tuple, classes)), capacity)


def solution_to_dict(solution: MckpSolution) -> dict:
    return {
        "choice": list(solution.choice),
        "objective": solution.objective,
        "total_weight": solution.total_weight,
    }


def verify_solution(instance: MckpInstance, solution: MckpSolution) -> bool:
    """Cheap feasibility check used by tests and the CLI."""
    if len(solution.choice) != instance.n_classes:
        return False
    total = 0
    for (weights_l, _), w in zip(instance.classes, solution.choice):
        if w not in weights_l:
            return False
        total += w
    return total <= instance.capacity and total == solution.total_weight


def _as_value_array(instance: MckpInstance, dense_bits: int) -> np.ndarray:
    """Dense (n_classes, dense_bits + 1) value matrix; missing weights -> -inf."""
    out = np.full((instance.n_classes, dense_bits + 1), -np.inf)
    for i, (weights_l, values_l) in enumerate(instance.classes):
        for w, v in zip(weights_l, values_l):
            if w <= dense_bits:
                out[i, w] = v
    return out
