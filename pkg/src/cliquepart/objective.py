"""Clustering objective, feasibility and optimality-gap arithmetic.

Only near pairs (d_ij < D) enter the objective: a joined near pair costs its
travel time, a separated one costs the penalty D.  Equivalently the objective
is ``D * |near pairs|`` minus the savings of every cluster.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DimensionError, FeasibilityError, UndefinedGapError
from .instance import Instance


@dataclass(frozen=True, eq=False)
class Partition:
    """Cluster label per site; labels are arbitrary non-negative integers."""

    assignment: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.assignment, dtype=np.int64).copy()
        if a.ndim != 1:
            raise DimensionError("assignment must be one-dimensional")
        if a.size and a.min() < 0:
            raise ValueError("cluster labels must be non-negative")
        a.setflags(write=False)
        object.__setattr__(self, "assignment", a)

    def __len__(self):
        return len(self.assignment)

    def __eq__(self, other):
        if not isinstance(other, Partition):
            return NotImplemented
        return self.clusters() == other.clusters()

    __hash__ = None

    @classmethod
    def singletons(cls, n: int) -> "Partition":
        return cls(np.arange(n))

    @classmethod
    def from_clusters(cls, clusters, n: int) -> "Partition":
        a = np.full(n, -1, dtype=np.int64)
        for label, members in enumerate(clusters):
            for v in members:
                if a[v] != -1:
                    raise ValueError(f"site {v} appears in two clusters")
                a[v] = label
        if (a < 0).any():
            raise ValueError(f"sites {np.flatnonzero(a < 0).tolist()} not covered")
        return cls(a)

    def clusters(self) -> list:
        """Clusters as sorted lists, ordered by smallest member."""
        groups = {}
        for v, lab in enumerate(self.assignment.tolist()):
            groups.setdefault(lab, []).append(v)
        return sorted(groups.values())

    def canonical(self) -> "Partition":
        return Partition.from_clusters(self.clusters(), len(self))

    def same_cluster(self) -> np.ndarray:
        """Complement of the x matrix: True where sites share a cluster."""
        a = self.assignment
        return a[:, None] == a[None, :]

    def to_dict(self) -> dict:
        return {"assignment": self.assignment.tolist()}

    @classmethod
    def from_dict(cls, data: dict) -> "Partition":
        return cls(np.asarray(data["assignment"], dtype=np.int64))


def save_partition(p: Partition, path) -> None:
    Path(path).write_text(json.dumps(p.to_dict()), encoding="utf-8")


def load_partition(path) -> Partition:
    with open(path, encoding="utf-8") as fh:
        return Partition.from_dict(json.load(fh))


def near_pairs(inst: Instance) -> list:
    """All (i, j), i < j, with d_ij strictly below the threshold, row-major."""
    iu, ju = np.nonzero(np.triu(inst.near_mask(), k=1))
    return list(zip(iu.tolist(), ju.tolist()))


def _check_length(inst: Instance, p: Partition):
    if len(p) != inst.n:
        raise DimensionError(f"partition has {len(p)} labels, instance has {inst.n} sites")


def _violations(inst: Instance, p: Partition) -> np.ndarray:
    together = np.triu(p.same_cluster(), k=1)
    return np.argwhere(together & (inst.distances >= inst.threshold))


def is_feasible(inst: Instance, p: Partition) -> bool:
    _check_length(inst, p)
    return len(_violations(inst, p)) == 0


def evaluate(inst: Instance, p: Partition) -> float:
    _check_length(inst, p)
    bad = _violations(inst, p)
    if len(bad):
        i, j = map(int, bad[0])
        raise FeasibilityError(
            f"sites {i} and {j} share a cluster but d={inst.distances[i, j]} >= D={inst.threshold}",
            pair=(i, j),
        )
    iu = np.triu_indices(inst.n, k=1)
    d = inst.distances[iu]
    near = d < inst.threshold
    joined = p.same_cluster()[iu]
    terms = np.where(joined, d, inst.threshold)[near]
    return float(np.sum(terms))


def savings(inst: Instance, cluster) -> float:
    """Objective reduction from forming ``cluster`` instead of singletons."""
    members = sorted(int(v) for v in cluster)
    if len(members) < 2:
        return 0.0
    sub = inst.distances[np.ix_(members, members)]
    iu = np.triu_indices(len(members), k=1)
    pair_d = sub[iu]
    if pair_d.max() >= inst.threshold:
        k = int(np.argmax(pair_d))
        i, j = members[iu[0][k]], members[iu[1][k]]
        raise FeasibilityError(f"cluster diameter reaches D at ({i},{j})", pair=(i, j))
    return float(np.sum(inst.threshold - pair_d))


def optimality_gap(candidate: float, reference: float, tol: float = 1e-9) -> float:
    """Relative excess of ``candidate`` over ``reference``.

    Differences within ``tol * reference`` are reported as exactly zero.
    """
    if reference == 0:
        if candidate == 0:
            return 0.0
        raise UndefinedGapError(f"gap undefined for reference 0 and candidate {candidate}")
    if reference < 0:
        raise UndefinedGapError(f"reference must be positive, got {reference}")
    diff = candidate - reference
    if abs(diff) <= tol * reference:
        return 0.0
    if diff < 0:
        raise UndefinedGapError(
            f"candidate {candidate} beats the reference {reference}; reference is not optimal"
        )
    return diff / reference
