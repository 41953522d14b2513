import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cliquepart.errors import DimensionError, FeasibilityError, UndefinedGapError
from cliquepart.instance import CitiesConfig, generate_cities
from cliquepart.objective import (
    Partition,
    evaluate,
    is_feasible,
    load_partition,
    near_pairs,
    optimality_gap,
    save_partition,
    savings,
)

from conftest import random_feasible_partition, random_instance


def test_fig1_optimal_partition_costs_74(golden):
    p = Partition.from_clusters([[0, 1, 2], [3]], 4)
    assert evaluate(golden, p) == 74.0


def test_singletons_pay_penalty_on_every_near_pair(golden):
    assert near_pairs(golden) == [(0, 1), (0, 2), (1, 2), (2, 3)]
    assert evaluate(golden, Partition.singletons(4)) == 240.0


def test_threshold_distance_counts_as_far(golden):
    inst = type(golden)(2, 60.0, np.array([[0.0, 60.0], [60.0, 0.0]]))
    assert near_pairs(inst) == []
    assert evaluate(inst, Partition.singletons(2)) == 0.0
    with pytest.raises(FeasibilityError) as err:
        evaluate(inst, Partition(np.array([0, 0])))
    assert err.value.pair == (0, 1)


def test_infeasible_names_offending_pair(golden):
    p = Partition.from_clusters([[0, 1, 2, 3]], 4)
    assert not is_feasible(golden, p)
    with pytest.raises(FeasibilityError) as err:
        evaluate(golden, p)
    assert err.value.pair == (0, 3)


def test_wrong_length_rejected(golden):
    with pytest.raises(DimensionError):
        evaluate(golden, Partition.singletons(3))


def test_savings_identity_on_random_partitions():
    rng = np.random.default_rng(4)
    for _ in range(200):
        n = int(rng.integers(2, 15))
        inst = random_instance(rng, n, threshold=float(rng.choice([30, 60, 120])))
        p = Partition(random_feasible_partition(rng, inst))
        near = len(near_pairs(inst))
        lhs = evaluate(inst, p)
        rhs = inst.threshold * near - sum(savings(inst, c) for c in p.clusters())
        assert abs(lhs - rhs) <= 1e-9 * max(1.0, abs(lhs))


def test_label_permutation_does_not_change_value():
    inst = generate_cities(CitiesConfig(n=18, seed=2))
    rng = np.random.default_rng(0)
    labels = random_feasible_partition(rng, inst)
    relabel = rng.permutation(labels.max() + 1) + 5
    assert evaluate(inst, Partition(labels)) == evaluate(inst, Partition(relabel[labels]))
    assert Partition(labels) == Partition(relabel[labels])


def test_savings_rejects_wide_cluster(golden):
    with pytest.raises(FeasibilityError):
        savings(golden, [0, 3])
    assert savings(golden, [2]) == 0.0
    assert savings(golden, [0, 1, 2]) == 57 + 55 + 54


def test_partition_round_trip(tmp_path):
    p = Partition(np.array([3, 3, 7, 1]))
    save_partition(p, tmp_path / "p.json")
    assert load_partition(tmp_path / "p.json") == p
    assert p.canonical().assignment.tolist() == [0, 0, 1, 2]


def test_from_clusters_validation():
    with pytest.raises(ValueError):
        Partition.from_clusters([[0, 1], [1]], 2)
    with pytest.raises(ValueError):
        Partition.from_clusters([[0]], 2)


@pytest.mark.parametrize("cand,ref,expected", [(110.0, 100.0, 0.1), (100.0, 100.0, 0.0), (0.0, 0.0, 0.0),
                                               (100.0 + 1e-8, 100.0, 0.0)])
def test_gap_values(cand, ref, expected):
    assert optimality_gap(cand, ref) == pytest.approx(expected, abs=1e-15)


def test_gap_undefined_cases():
    with pytest.raises(UndefinedGapError):
        optimality_gap(5.0, 0.0)
    with pytest.raises(UndefinedGapError):
        optimality_gap(90.0, 100.0)


@settings(max_examples=50, deadline=None)
@given(ref=st.floats(1.0, 1e6), extra=st.floats(0.0, 1e6))
def test_gap_non_negative(ref, extra):
    assert optimality_gap(ref + extra, ref) >= 0.0


def test_same_cluster_matrix_is_equivalence_relation():
    rng = np.random.default_rng(12)
    for _ in range(50):
        labels = rng.integers(0, 5, size=int(rng.integers(1, 12)))
        x = Partition(labels).same_cluster()
        assert np.all(np.diag(x))
        assert np.array_equal(x, x.T)
        # transitivity: x_il and x_lj imply x_ij
        xi = x.astype(int)
        assert np.all((xi @ xi > 0) <= x)


def test_feasible_merge_never_increases_objective():
    rng = np.random.default_rng(21)
    checked = 0
    for _ in range(300):
        n = int(rng.integers(3, 13))
        inst = random_instance(rng, n, threshold=120.0)
        p = Partition(random_feasible_partition(rng, inst))
        cl = p.clusters()
        if len(cl) < 2:
            continue
        a, b = rng.choice(len(cl), size=2, replace=False)
        union = cl[a] + cl[b]
        if inst.distances[np.ix_(union, union)].max() >= inst.threshold:
            continue
        merged = [c for k, c in enumerate(cl) if k not in (a, b)] + [union]
        assert evaluate(inst, Partition.from_clusters(merged, n)) <= evaluate(inst, p)
        checked += 1
    assert checked > 50
