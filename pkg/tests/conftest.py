import numpy as np
import pytest

from cliquepart.bench import golden_instance
from cliquepart.instance import Instance

ACCEPTANCE_RESULTS = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(line)


@pytest.fixture
def golden():
    return golden_instance()


def one_based(edges):
    return sorted((i + 1, j + 1) for i, j in edges)


def zero_based(edge):
    return (edge[0] - 1, edge[1] - 1)


def random_instance(rng, n, threshold=60.0, high=240.0):
    iu = np.triu_indices(n, k=1)
    d = np.zeros((n, n))
    d[iu] = rng.uniform(0, high, size=len(iu[0]))
    return Instance(n, threshold, d + d.T)


def random_feasible_partition(rng, inst):
    """Sites in random order join a random compatible cluster or open a new one."""
    clusters = []
    for v in rng.permutation(inst.n).tolist():
        options = [c for c in clusters if all(inst.distances[v, u] < inst.threshold for u in c)]
        pick = int(rng.integers(len(options) + 1))
        if pick == len(options):
            clusters.append([v])
        else:
            options[pick].append(v)
    labels = np.empty(inst.n, dtype=np.int64)
    for k, c in enumerate(clusters):
        labels[c] = k
    return labels


def sample_transition_batch(rng, trial, max_graphs=3, n_range=(2, 11)):
    """A few states from one random episode on a small instance, with random targets.

    Returns ``(tb, n)`` or ``None`` when the instance has no near pair.
    """
    from cliquepart.baselines import random_policy
    from cliquepart.environment import reset
    from cliquepart.instance import generate
    from cliquepart.neural import TransitionBatch, critic_input, encode_observation

    n = int(rng.integers(*n_range))
    inst = generate(["cities", "general"][trial % 2], n, trial, threshold=float(rng.choice([60, 120, 240])))
    state = reset(inst)
    obs, xs = [], []
    while not state.terminal and len(obs) < max_graphs:
        obs.append(encode_observation(state))
        xs.append(critic_input(state))
        state.step(random_policy(state, rng).action)
    if not obs:
        return None
    b = len(obs)
    acts = [int(rng.integers(int(o.pair_available.sum()))) for o in obs]
    tb = TransitionBatch.build(obs, xs, acts, rng.normal(size=b) - 1, rng.normal(size=b), rng.normal(size=b))
    return tb, n


def permuted(inst, perm):
    """Instance with site v renamed to perm[v]."""
    inv = np.argsort(perm)
    return Instance(inst.n, inst.threshold, inst.distances[np.ix_(inv, inv)])
