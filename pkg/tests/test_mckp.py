import numpy as np
import pytest

from auctrack.mckp import (
    MckpInstance,
    brute_force,
    instance_from_dict,
    solution_to_dict,
    solve_dp,
    verify_solution,
)


def dense_instance(value_rows, capacity):
    """Classes with weights 0..len(row)-1 and the given values."""
    classes = tuple(tuple((w, v) for w, v in enumerate(row)) for row in value_rows)
    return MckpInstance(classes, capacity)


def random_instance(rng, max_classes=6, max_capacity=8):
    n = rng.integers(1, max_classes + 1)
    cap = int(rng.integers(1, max_capacity + 1))
    classes = []
    for _ in range(n):
        values = rng.uniform(-1.0, 1.0, cap + 1)
        values[0] = 0.0  # forced zero item
        classes.append(tuple((w, float(v)) for w, v in enumerate(values)))
    return MckpInstance(tuple(classes), cap)


class TestInstanceValidation:
    def test_missing_zero_item(self):
        with pytest.raises(ValueError):
            MckpInstance((((1, 2.0),),), 3)

    def test_duplicate_weights(self):
        with pytest.raises(ValueError):
            MckpInstance((((0, 1.0), (1, 2.0), (1, 3.0)),), 3)

    def test_negative_capacity(self):
        with pytest.raises(ValueError):
            MckpInstance((((0, 0.0),),), -1)


class TestSolveDp:
    def test_worked_two_class_example(self):
        inst = dense_instance([[0.0, 5.0, 7.0], [0.0, 4.0, 10.0]], 2)
        sol = solve_dp(inst)
        assert sol.choice == (0, 2)
        assert sol.objective == pytest.approx(10.0)
        # cross-checked by full enumeration
        assert brute_force(inst).choice == (0, 2)

    def test_all_zero_values_pick_fewest_bits(self):
        inst = dense_instance([[0.0] * 4, [0.0] * 4, [0.0] * 4], 3)
        sol = solve_dp(inst)
        assert sol.choice == (0, 0, 0)
        assert sol.objective == 0.0
        assert sol.total_weight == 0

    def test_single_class_argmax(self):
        inst = dense_instance([[0.0, 3.0, 9.0, 6.0]], 3)
        assert solve_dp(inst).choice == (2,)
        capped = dense_instance([[0.0, 3.0, 9.0, 6.0]], 1)
        assert solve_dp(capped).choice == (1,)

    def test_zero_capacity(self):
        inst = dense_instance([[0.0, 100.0], [0.0, 100.0]], 0)
        sol = solve_dp(inst)
        assert sol.choice == (0, 0)
        assert sol.objective == 0.0

    def test_sparse_class_weights(self):
        inst = MckpInstance((((0, 0.0), (3, 5.0)), ((0, 0.0), (2, 4.0))), 4)
        sol = solve_dp(inst)
        assert sol.choice == (3, 0)  # 5 > 4, and 3+2 exceeds capacity
        assert brute_force(inst).choice == sol.choice

    def test_tie_prefers_lexicographically_smaller_choice(self):
        # two optimal selections with equal value and equal total weight:
        # (1, 0) and (0, 1) both score 3; the canonical rule picks (0, 1)
        inst = dense_instance([[0.0, 3.0], [0.0, 3.0]], 1)
        assert solve_dp(inst).choice == (0, 1)
        assert brute_force(inst).choice == (0, 1)

    def test_tie_prefers_fewer_total_bits_first(self):
        # value 3 reachable with one bit on class 1 or two bits on class 0
        inst = dense_instance([[0.0, 0.0, 3.0], [0.0, 3.0, 0.0]], 2)
        sol = solve_dp(inst)
        assert sol.choice == (0, 1)
        assert sol.total_weight == 1
        assert brute_force(inst).choice == (0, 1)


class TestBruteForceOracle:
    def test_agrees_with_dp_on_random_instances(self):
        rng = np.random.default_rng(0)
        for _ in range(60):
            inst = random_instance(rng)
            a = solve_dp(inst)
            b = brute_force(inst)
            assert a.objective == b.objective  # identical fold order -> bit-equal
            assert a.choice == b.choice
            assert a.total_weight == b.total_weight
            assert verify_solution(inst, a)

    def test_crafted_ties_agree(self):
        rng = np.random.default_rng(1)
        for _ in range(40):
            n = rng.integers(2, 5)
            cap = int(rng.integers(1, 5))
            pool = [0.0, 1.0, 2.0]  # tiny value pool forces many exact ties
            classes = []
            for _ in range(n):
                row = [0.0] + [float(rng.choice(pool)) for _ in range(cap)]
                classes.append(tuple((w, v) for w, v in enumerate(row)))
            inst = MckpInstance(tuple(classes), cap)
            a = solve_dp(inst)
            b = brute_force(inst)
            assert (a.objective, a.total_weight, a.choice) == (
                b.objective,
                b.total_weight,
                b.choice,
            )

    def test_too_large_rejected(self):
        row = tuple((w, 0.0) for w in range(11))
        inst = MckpInstance((row,) * 8, 10)
        with pytest.raises(ValueError):
            brute_force(inst)


class TestStructuralProperties:
    def test_monotone_in_capacity(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            values = rng.uniform(-1, 1, (4, 7))
            values[:, 0] = 0.0
            prev = -np.inf
            for cap in range(7):
                obj = solve_dp(dense_instance(values.tolist(), cap)).objective
                assert obj >= prev - 1e-15
                prev = obj

    def test_raising_item_value_never_hurts(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            values = rng.uniform(-1, 1, (3, 6)).tolist()
            for row in values:
                row[0] = 0.0
            base = solve_dp(dense_instance(values, 5)).objective
            i, w = rng.integers(0, 3), int(rng.integers(1, 6))
            values[i][w] += float(rng.uniform(0, 2))
            assert solve_dp(dense_instance(values, 5)).objective >= base - 1e-15

    def test_weight_decreasing_in_per_bit_cost(self):
        # class values of the form gain(w) - w * c: the selected weight for
        # that class must fall weakly as c rises
        rng = np.random.default_rng(4)
        for _ in range(50):
            n, cap = 4, 6
            gains = rng.uniform(0, 2, (n, cap + 1)).cumsum(axis=1)
            gains[:, 0] = 0.0
            probe = int(rng.integers(0, n))
            chosen = []
            for c in np.linspace(0.0, 3.0, 40):
                rows = gains.copy()
                rows[probe] = gains[probe] - np.arange(cap + 1) * c
                rows[probe, 0] = 0.0
                sol = solve_dp(dense_instance(rows.tolist(), cap))
                chosen.append(sol.choice[probe])
            assert all(a >= b for a, b in zip(chosen, chosen[1:]))


class TestWireFormat:
    def test_round_trip(self):
        data = {
            "classes": [
                [{"weight": 0, "value": 0.0}, {"weight": 1, "value": 5.0}],
                [{"weight": 0, "value": 0.0}, {"weight": 2, "value": 4.5}],
            ],
            "capacity": 2,
        }
        inst = instance_from_dict(data)
        sol = solve_dp(inst)
        out = solution_to_dict(sol)
        assert out["choice"] == [1, 0]
        assert out["objective"] == pytest.approx(5.0)
        assert out["total_weight"] == 1

    def test_malformed_rejected(self):
        with pytest.raises(ValueError):
            instance_from_dict({"classes": [[{"weight": 0}]], "capacity": 1})
        with pytest.raises(ValueError):
            instance_from_dict({"capacity": 1})
