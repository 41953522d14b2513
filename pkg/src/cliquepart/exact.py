"""Exact solvers for small instances.

``solve_exact_dp`` maximizes total cluster savings with a dynamic program
over site subsets.  ``brute_force_reference`` enumerates every set partition
and is kept deliberately naive: it is the oracle the DP is checked against.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SizeError
from .instance import Instance
from .objective import Partition, evaluate, is_feasible

DEFAULT_CAP = 18
BRUTE_FORCE_CAP = 10
# below this size the kernels run interpreted; JIT start-up would dominate
JIT_MIN_N = 11


@dataclass
class CliqueTable:
    """Per-subset clique validity and savings, indexed by bitmask."""

    valid: np.ndarray
    cluster_savings: np.ndarray

    def mask(self, nodes) -> int:
        m = 0
        for v in nodes:
            m |= 1 << int(v)
        return m


def _neighbor_masks(inst: Instance) -> np.ndarray:
    near = inst.near_mask()
    weights = np.left_shift(np.int64(1), np.arange(inst.n, dtype=np.int64))
    return (near.astype(np.int64) * weights[None, :]).sum(axis=1)


def _fill_table(n, nbr, dist, threshold):
    size = 1 << n
    valid = np.zeros(size, dtype=np.bool_)
    sav = np.zeros(size, dtype=np.float64)
    valid[0] = True
    for s in range(1, size):
        v = n - 1
        while not (s >> v) & 1:
            v -= 1
        rest = s ^ (1 << v)
        if valid[rest] and (rest & ~nbr[v]) == 0:
            valid[s] = True
            acc = sav[rest]
            for u in range(v):
                if (rest >> u) & 1:
                    acc += threshold - dist[v, u]
            sav[s] = acc
    return valid, sav


def _subset_dp(n, nbr, valid, sav):
    size = 1 << n
    best = np.zeros(size, dtype=np.float64)
    choice = np.zeros(size, dtype=np.int64)
    for s in range(1, size):
        low = s & -s
        lv = 0
        while (low >> lv) != 1:
            lv += 1
        cand = s & nbr[lv]
        top = -1.0
        pick = low
        r = cand
        while True:
            t = r | low
            if valid[t]:
                val = sav[t] + best[s ^ t]
                if val > top:
                    top = val
                    pick = t
            if r == 0:
                break
            r = (r - 1) & cand
        best[s] = top
        choice[s] = pick
    return best, choice


_compiled = {}


def _kernel(fn, n: int):
    if n < JIT_MIN_N:
        return fn
    if fn.__name__ not in _compiled:
        import numba

        _compiled[fn.__name__] = numba.njit(cache=True)(fn)
    return _compiled[fn.__name__]


def _check_cap(n: int, cap: int):
    if n > cap:
        raise SizeError(f"exact solver capped at n={cap}, instance has n={n}")


def build_clique_table(inst: Instance, cap: int = DEFAULT_CAP) -> CliqueTable:
    _check_cap(inst.n, cap)
    valid, sav = _kernel(_fill_table, inst.n)(inst.n, _neighbor_masks(inst), inst.distances, inst.threshold)
    return CliqueTable(valid=valid, cluster_savings=sav)


def solve_exact_dp(inst: Instance, cap: int = DEFAULT_CAP) -> tuple:
    """Return ``(partition, objective)`` of an optimal clustering."""
    _check_cap(inst.n, cap)
    nbr = _neighbor_masks(inst)
    table = build_clique_table(inst, cap)
    best, choice = _kernel(_subset_dp, inst.n)(inst.n, nbr, table.valid, table.cluster_savings)

    full = (1 << inst.n) - 1
    clusters = []
    s = full
    while s:
        t = int(choice[s])
        clusters.append([v for v in range(inst.n) if (t >> v) & 1])
        s ^= t
    partition = Partition.from_clusters(clusters, inst.n)
    near = int(np.triu(inst.near_mask(), k=1).sum())
    objective = inst.threshold * near - float(best[full])
    return partition, objective


def set_partitions(n: int):
    """Yield every set partition of ``range(n)`` as a restricted-growth string."""
    if n == 0:
        yield []
        return
    labels = [0] * n
    maxes = [0] * n  # maxes[k] = max(labels[:k+1])

    def rec(k):
        if k == n:
            yield list(labels)
            return
        for lab in range(maxes[k - 1] + 2):
            labels[k] = lab
            maxes[k] = max(maxes[k - 1], lab)
            yield from rec(k + 1)

    labels[0] = 0
    yield from rec(1)


def brute_force_reference(inst: Instance) -> float:
    if inst.n > BRUTE_FORCE_CAP:
        raise SizeError(f"brute force limited to n<={BRUTE_FORCE_CAP}, got n={inst.n}")
    best = None
    for rgs in set_partitions(inst.n):
        p = Partition(np.array(rgs))
        if not is_feasible(inst, p):
            continue
        value = evaluate(inst, p)
        if best is None or value < best:
            best = value
    return best
