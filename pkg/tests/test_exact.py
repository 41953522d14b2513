import itertools
import time

import numpy as np
import pytest

from cliquepart.errors import SizeError
from cliquepart.exact import (
    build_clique_table,
    brute_force_reference,
    set_partitions,
    solve_exact_dp,
)
from cliquepart.instance import CitiesConfig, GeneralConfig, Instance, generate_cities, generate_general
from cliquepart.objective import evaluate, is_feasible, savings

from conftest import random_instance

BELL = [1, 1, 2, 5, 15, 52, 203, 877, 4140]


@pytest.mark.parametrize("n", range(9))
def test_set_partition_count_is_bell(n):
    parts = list(set_partitions(n))
    assert len(parts) == BELL[n]
    assert len({tuple(p) for p in parts}) == BELL[n]


def test_fig1_optimum(golden):
    p, obj = solve_exact_dp(golden)
    assert obj == 74.0
    assert p.clusters() == [[0, 1, 2], [3]]
    assert brute_force_reference(golden) == 74.0


def test_dp_matches_brute_force_small():
    rng = np.random.default_rng(9)
    for _ in range(40):
        n = int(rng.integers(2, 8))
        inst = random_instance(rng, n, threshold=float(rng.choice([30, 60, 120])))
        p, obj = solve_exact_dp(inst)
        assert is_feasible(inst, p)
        assert evaluate(inst, p) == pytest.approx(obj, rel=1e-12, abs=1e-12)
        assert obj == pytest.approx(brute_force_reference(inst), rel=1e-9, abs=1e-9)


def test_dp_matches_brute_force_with_jit():
    # brute force is out of reach at this size, so compare compiled and interpreted kernels
    from cliquepart import exact

    inst = generate_general(GeneralConfig(n=12, seed=5))
    p, obj = solve_exact_dp(inst)
    old = exact.JIT_MIN_N
    exact.JIT_MIN_N = 99
    try:
        p2, obj2 = solve_exact_dp(inst)
    finally:
        exact.JIT_MIN_N = old
    assert obj == obj2
    assert p == p2


def test_clique_table_against_direct_savings():
    inst = generate_cities(CitiesConfig(n=8, seed=1))
    table = build_clique_table(inst)
    for r in range(1, 5):
        for nodes in itertools.combinations(range(8), r):
            m = table.mask(nodes)
            sub = inst.distances[np.ix_(nodes, nodes)]
            ok = r == 1 or sub[np.triu_indices(r, 1)].max() < inst.threshold
            assert table.valid[m] == ok
            if ok:
                assert table.cluster_savings[m] == pytest.approx(savings(inst, nodes), rel=1e-12)


def test_caps():
    inst = generate_general(GeneralConfig(n=11, seed=0))
    with pytest.raises(SizeError):
        brute_force_reference(inst)
    with pytest.raises(SizeError):
        solve_exact_dp(inst, cap=10)


def test_objective_never_above_greedy_or_singletons():
    from cliquepart.baselines import greedy_policy, rollout

    for seed in range(10):
        inst = generate_cities(CitiesConfig(n=14, seed=seed))
        _, obj = solve_exact_dp(inst)
        _, g = rollout(inst, greedy_policy, 0)
        assert obj <= g + 1e-9


def test_n16_fast():
    inst = generate_cities(CitiesConfig(n=16, seed=100000))
    solve_exact_dp(inst)  # compile outside the timing
    t0 = time.perf_counter()
    solve_exact_dp(inst)
    assert time.perf_counter() - t0 < 60


def test_empty_set_and_far_only_node():
    rng = np.random.default_rng(3)
    for _ in range(20):
        n = int(rng.integers(2, 9))
        inst = random_instance(rng, n)
        table = build_clique_table(inst)
        assert table.valid[0] and table.cluster_savings[0] == 0.0
        d = np.full((n + 1, n + 1), 500.0)
        d[:n, :n] = inst.distances
        d[n, n] = 0.0
        bigger = Instance(n + 1, inst.threshold, d)
        assert solve_exact_dp(bigger)[1] == solve_exact_dp(inst)[1]


def test_optimum_below_every_random_episode():
    from cliquepart.baselines import random_policy, rollout

    rng = np.random.default_rng(8)
    for k in range(100):
        n = int(rng.integers(2, 13))
        inst = random_instance(rng, n, threshold=float(rng.choice([30, 60, 120])))
        _, best = solve_exact_dp(inst)
        for s in range(10):
            assert best <= rollout(inst, random_policy, 1000 * k + s)[1] + 1e-9
