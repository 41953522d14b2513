"""Episodic edge-selection environment.

The agent builds a partition by picking available edges.  Picking an edge
merges the two clusters at its ends, pulls every cross pair into the solution
so the merged cluster stays a clique, and prunes available edges to clusters
that the merged one can no longer absorb without a pair reaching D.

Sites are 0-based.  Edges are ``(i, j)`` tuples with ``i < j``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import IllegalActionError, ReplayError
from .instance import Instance
from .objective import Partition


class DisjointSet:
    """Union-find over ``range(n)`` that also tracks member lists per root."""

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.members = {v: [v] for v in range(n)}

    def find(self, v: int) -> int:
        root = v
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[v] != root:
            self.parent[v], v = root, self.parent[v]
        return root

    def union(self, a: int, b: int) -> int:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return ra
        # union by size, ties to the smaller root for determinism
        if (len(self.members[ra]), -ra) < (len(self.members[rb]), -rb):
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.members[ra] = sorted(self.members[ra] + self.members.pop(rb))
        return ra

    def copy(self) -> "DisjointSet":
        other = DisjointSet.__new__(DisjointSet)
        other.parent = list(self.parent)
        other.members = {k: list(v) for k, v in self.members.items()}
        return other


@dataclass(frozen=True)
class StepOutcome:
    action: tuple
    reward: float
    added_edges: tuple
    removed_edges: tuple
    terminal: bool
    objective_after: float

    def to_record(self, step: int) -> dict:
        return {
            "step": step,
            "action": list(self.action),
            "reward": self.reward,
            "added": [list(e) for e in self.added_edges],
            "removed": [list(e) for e in self.removed_edges],
            "objective_after": self.objective_after,
        }


def _upper_pairs(mask: np.ndarray) -> tuple:
    iu, ju = np.nonzero(np.triu(mask, k=1))
    return tuple(zip(iu.tolist(), ju.tolist()))


class EnvState:
    """Cluster structure, solution edges and available edges of one episode.

    ``solution`` and ``available`` are symmetric boolean matrices; the edge
    sets are their strict upper triangles.
    """

    def __init__(self, inst: Instance):
        self.instance = inst
        n = inst.n
        self.clusters = DisjointSet(n)
        self.labels = np.arange(n)
        self.solution = np.zeros((n, n), dtype=bool)
        self.available = inst.near_mask()
        self.step_count = 0
        self.near_count = int(np.triu(self.available, k=1).sum())
        self.objective = inst.threshold * self.near_count

    @property
    def n(self) -> int:
        return self.instance.n

    @property
    def threshold(self) -> float:
        return self.instance.threshold

    @property
    def solution_edges(self) -> set:
        return set(_upper_pairs(self.solution))

    @property
    def available_edges(self) -> set:
        return set(_upper_pairs(self.available))

    @property
    def terminal(self) -> bool:
        return not self.available.any()

    def legal_actions(self) -> list:
        return list(_upper_pairs(self.available))

    def copy(self) -> "EnvState":
        other = EnvState.__new__(EnvState)
        other.instance = self.instance
        other.clusters = self.clusters.copy()
        other.labels = self.labels.copy()
        other.solution = self.solution.copy()
        other.available = self.available.copy()
        other.step_count = self.step_count
        other.near_count = self.near_count
        other.objective = self.objective
        return other

    def merge_gain(self, edge) -> float:
        """Reward that ``step(edge)`` would yield, without mutating."""
        i, j = edge
        a = self.clusters.members[self.clusters.find(i)]
        b = self.clusters.members[self.clusters.find(j)]
        cross = self.instance.distances[np.ix_(a, b)]
        return float(np.sum(self.threshold - cross))

    def step(self, edge) -> StepOutcome:
        i, j = int(min(edge)), int(max(edge))
        if i == j or not (0 <= i and j < self.n) or not self.available[i, j]:
            raise IllegalActionError(f"edge ({i},{j}) is not available")
        d, big_d = self.instance.distances, self.threshold
        ra, rb = self.clusters.find(i), self.clusters.find(j)
        a, b = self.clusters.members[ra], self.clusters.members[rb]

        added = sorted((min(u, v), max(u, v)) for u in a for v in b)
        reward = float(np.sum([big_d - d[u, v] for u, v in added]))

        root = self.clusters.union(i, j)
        merged = self.clusters.members[root]
        self.labels[merged] = root
        self.solution[np.ix_(a, b)] = True
        self.solution[np.ix_(b, a)] = True
        self.available[np.ix_(a, b)] = False
        self.available[np.ix_(b, a)] = False

        outside = np.ones(self.n, dtype=bool)
        outside[merged] = False
        out_idx = np.flatnonzero(outside)
        removed = ()
        if out_idx.size:
            far_to_merged = d[np.ix_(merged, out_idx)].max(axis=0)
            cluster_far = np.zeros(self.n)
            np.maximum.at(cluster_far, self.labels[out_idx], far_to_merged)
            ok = cluster_far[self.labels[out_idx]] < big_d
            before = self.available[np.ix_(merged, out_idx)]
            after = before & ok[None, :]
            lost = before & ~after
            if lost.any():
                rows, cols = np.nonzero(lost)
                removed = tuple(
                    sorted(
                        (min(merged[r], int(out_idx[c])), max(merged[r], int(out_idx[c])))
                        for r, c in zip(rows.tolist(), cols.tolist())
                    )
                )
            self.available[np.ix_(merged, out_idx)] = after
            self.available[np.ix_(out_idx, merged)] = after.T

        self.step_count += 1
        self.objective -= reward
        return StepOutcome(
            action=(i, j),
            reward=reward,
            added_edges=tuple(added),
            removed_edges=removed,
            terminal=self.terminal,
            objective_after=self.objective,
        )

    def partition(self) -> Partition:
        return Partition(np.array([self.clusters.find(v) for v in range(self.n)]))


def reset(inst: Instance) -> EnvState:
    return EnvState(inst)


def legal_actions(state: EnvState) -> list:
    return state.legal_actions()


def step(state: EnvState, edge) -> tuple:
    """Apply ``edge`` in place; returns ``(state, outcome)``."""
    outcome = state.step(edge)
    return state, outcome


def current_partition(state: EnvState) -> Partition:
    return state.partition()


def replay(inst: Instance, actions) -> tuple:
    state = reset(inst)
    outcomes = []
    for k, edge in enumerate(actions):
        try:
            outcomes.append(state.step(tuple(edge)))
        except IllegalActionError as exc:
            raise ReplayError(f"illegal action {tuple(edge)} at position {k}: {exc}", k) from exc
    return state, outcomes


def audit(state: EnvState) -> None:
    """O(n^2) consistency check of every state invariant; raises AssertionError."""
    n, d, big_d = state.n, state.instance.distances, state.threshold
    roots = np.array([state.clusters.find(v) for v in range(n)])
    assert np.array_equal(roots, state.labels), "label cache out of sync"
    same = roots[:, None] == roots[None, :]
    np.fill_diagonal(same, False)
    assert np.array_equal(same, state.solution), "solution edges != same-cluster pairs"
    assert not (state.solution & (d >= big_d)).any(), "far pair inside a cluster"
    assert not (state.solution & state.available).any(), "edge both available and joined"
    members = {}
    for v, r in enumerate(roots.tolist()):
        members.setdefault(r, []).append(v)
    expect = np.zeros((n, n), dtype=bool)
    for ra, a in members.items():
        for rb, b in members.items():
            if ra != rb and d[np.ix_(a, b)].max() < big_d:
                expect[np.ix_(a, b)] = True
    assert np.array_equal(expect, state.available), "available edges mischaracterized"
    assert state.step_count == n - len(members), "step count != number of merges"


def write_episode_log(outcomes, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for k, out in enumerate(outcomes):
            fh.write(json.dumps(out.to_record(k)) + "\n")


def read_episode_log(path) -> list:
    with open(path, encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]
