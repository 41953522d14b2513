"""Policy interface, random and greedy baselines, and the rollout loop.

A policy is any callable ``policy(state, rng) -> PolicyDecision``.  It reads
the state and must not mutate it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .environment import EnvState, StepOutcome, reset
from .errors import ContractViolationError, NoActionError
from .instance import Instance
from .objective import Partition, evaluate


@dataclass(frozen=True)
class PolicyDecision:
    action: tuple
    action_log_prob: float
    action_distribution: np.ndarray
    action_index: int = 0
    value: Optional[float] = None


@dataclass(frozen=True)
class StateSnapshot:
    """Frozen copy of the parts of a state that observations are built from."""

    instance: Instance
    solution: np.ndarray
    available: np.ndarray

    @classmethod
    def of(cls, state: EnvState) -> "StateSnapshot":
        return cls(state.instance, state.solution.copy(), state.available.copy())

    @property
    def n(self) -> int:
        return self.instance.n

    @property
    def threshold(self) -> float:
        return self.instance.threshold

    def legal_actions(self) -> list:
        iu, ju = np.nonzero(np.triu(self.available, k=1))
        return list(zip(iu.tolist(), ju.tolist()))


@dataclass
class TrajectoryStep:
    observation: StateSnapshot
    action: tuple
    action_index: int
    log_prob: float
    reward: float  # scaled by 1/D
    value: Optional[float]
    outcome: StepOutcome


@dataclass
class Trajectory:
    instance: Instance
    steps: list = field(default_factory=list)
    terminal: bool = False
    partition: Optional[Partition] = None

    def __len__(self):
        return len(self.steps)

    @property
    def total_reward(self) -> float:
        return float(sum(s.reward for s in self.steps))

    @property
    def actions(self) -> list:
        return [s.action for s in self.steps]

    @property
    def outcomes(self) -> list:
        return [s.outcome for s in self.steps]


Policy = Callable[[EnvState, np.random.Generator], PolicyDecision]


def _legal_or_raise(state) -> list:
    actions = state.legal_actions()
    if not actions:
        raise NoActionError("terminal state has no legal actions")
    return actions


def random_policy(state, rng_seed=None) -> PolicyDecision:
    """Uniform choice among legal edges; ``rng_seed`` may be a seed or Generator."""
    actions = _legal_or_raise(state)
    rng = np.random.default_rng(rng_seed)
    k = len(actions)
    idx = int(rng.integers(k))
    return PolicyDecision(
        action=actions[idx],
        action_log_prob=-math.log(k),
        action_distribution=np.full(k, 1.0 / k),
        action_index=idx,
    )


def greedy_policy(state, rng_seed=None) -> PolicyDecision:
    """Edge whose merge saves the most; first in lexicographic order on ties."""
    actions = _legal_or_raise(state)
    # savings depend only on the cluster pair, so score each pair once
    cache = {}
    best_idx, best_gain = 0, -math.inf
    for idx, (i, j) in enumerate(actions):
        key = (state.clusters.find(i), state.clusters.find(j))
        if key not in cache:
            cache[key] = state.merge_gain((i, j))
        if cache[key] > best_gain:
            best_idx, best_gain = idx, cache[key]
    dist = np.zeros(len(actions))
    dist[best_idx] = 1.0
    return PolicyDecision(
        action=actions[best_idx],
        action_log_prob=0.0,
        action_distribution=dist,
        action_index=best_idx,
    )


def rollout(inst: Instance, policy: Policy, rng_seed=None) -> tuple:
    """Run one episode; returns ``(trajectory, final objective)``."""
    rng = np.random.default_rng(rng_seed)
    state = reset(inst)
    traj = Trajectory(instance=inst)
    while not state.terminal:
        legal = state.legal_actions()
        snapshot = StateSnapshot.of(state)
        decision = policy(state, rng)
        action = tuple(int(v) for v in decision.action)
        if action not in legal:
            raise ContractViolationError(f"policy chose illegal action {action}")
        outcome = state.step(action)
        traj.steps.append(
            TrajectoryStep(
                observation=snapshot,
                action=action,
                action_index=legal.index(action),
                log_prob=decision.action_log_prob,
                reward=outcome.reward / inst.threshold,
                value=decision.value,
                outcome=outcome,
            )
        )
    traj.terminal = True
    traj.partition = state.partition()
    return traj, evaluate(inst, traj.partition)


POLICIES = {"random": random_policy, "greedy": greedy_policy}
