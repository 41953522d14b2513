"""Proximal Policy Optimization for the edge-selection agent.

Episodes for a batch run in lockstep so that every environment step is a
single batched forward pass of the actor and critic.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Optional

import numpy as np

from .environment import reset
from .errors import InvalidConfigError, NumericError
from .exact import DEFAULT_CAP, solve_exact_dp
from .instance import generate
from .neural import (
    CriticParams,
    GraphBatch,
    PolicyParams,
    TransitionBatch,
    actor_forward,
    critic_forward,
    critic_input,
    encode_observation,
    load_checkpoint,
    ppo_loss,
    save_checkpoint,
)
from .objective import evaluate, optimality_gap

log = logging.getLogger(__name__)

METRIC_FIELDS = ["batch", "mean_return", "mean_objective", "mean_gap", "policy_loss", "value_loss", "entropy"]


@dataclass
class TrainConfig:
    learning_rate: float = 1e-5
    gamma: float = 1.0
    gae_lambda: float = 0.95
    clip_epsilon: float = 0.2
    epochs_per_batch: int = 4
    episodes_per_batch: int = 32
    minibatch_size: int = 256
    entropy_coef: float = 0.01
    value_coef: float = 0.5
    grad_clip_norm: float = 0.5
    total_batches: int = 3000
    seed: int = 0
    env: str = "cities"
    n: int = 18
    threshold: float = 60.0
    embedding_size: int = 8
    pool_size: int = 128  # 0 draws fresh instances every batch
    pool_seed: int = 0
    checkpoint_every: int = 100

    def validate(self):
        positive = ["learning_rate", "gamma", "epochs_per_batch", "episodes_per_batch", "minibatch_size",
                    "value_coef", "grad_clip_norm", "total_batches", "n", "threshold", "embedding_size",
                    "checkpoint_every"]
        for name in positive:
            if not getattr(self, name) > 0:
                raise InvalidConfigError(f"{name} must be positive, got {getattr(self, name)}")
        if not 0 < self.clip_epsilon < 1:
            raise InvalidConfigError(f"clip_epsilon must lie in (0, 1), got {self.clip_epsilon}")
        if not 0 < self.gamma <= 1:
            raise InvalidConfigError(f"gamma must lie in (0, 1], got {self.gamma}")
        if not 0 <= self.gae_lambda <= 1:
            raise InvalidConfigError(f"gae_lambda must lie in [0, 1], got {self.gae_lambda}")
        if self.entropy_coef < 0 or self.pool_size < 0:
            raise InvalidConfigError("entropy_coef and pool_size must be non-negative")
        if self.env not in ("cities", "general"):
            raise InvalidConfigError(f"unknown env {self.env!r}")
        return self

    @classmethod
    def from_dict(cls, data: dict) -> "TrainConfig":
        known = {f.name: f.type for f in fields(cls)}
        unknown = set(data) - set(known)
        if unknown:
            raise InvalidConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data).validate()

    @classmethod
    def load(cls, path) -> "TrainConfig":
        import tomli

        with open(path, "rb") as fh:
            return cls.from_dict(tomli.load(fh))

    def dump(self, path):
        lines = []
        for key, value in asdict(self).items():
            lines.append(f"{key} = {json.dumps(value)}")
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


# ------------------------------------------------------------------ rollouts


@dataclass
class Episode:
    """One episode as PPO consumes it; rewards are scaled by 1/D."""

    instance_index: int
    observations: list = field(default_factory=list)
    critic_inputs: list = field(default_factory=list)
    actions: list = field(default_factory=list)
    action_index: list = field(default_factory=list)
    log_probs: list = field(default_factory=list)
    rewards: list = field(default_factory=list)
    values: list = field(default_factory=list)
    assignment: Optional[list] = None
    objective: float = 0.0
    terminal: bool = False

    def __len__(self):
        return len(self.actions)

    @property
    def total_return(self) -> float:
        return float(sum(self.rewards))


def run_episodes(instances, actor: PolicyParams, critic: Optional[CriticParams], rng=None,
                 greedy: bool = False, keep_observations: bool = True) -> list:
    """Play one episode per instance in lockstep.

    With ``greedy`` the most probable edge is taken (first on ties);
    otherwise edges are sampled from the policy using ``rng``.
    """
    rng = np.random.default_rng(rng)
    states = [reset(inst) for inst in instances]
    episodes = [Episode(instance_index=k) for k in range(len(instances))]
    while True:
        active = [k for k, s in enumerate(states) if not s.terminal]
        if not active:
            break
        obs = [encode_observation(states[k]) for k in active]
        out = actor_forward(GraphBatch.from_observations(obs), actor)
        xs = None
        values = [None] * len(active)
        if critic is not None:
            xs = np.stack([critic_input(states[k]) for k in active])
            values = critic_forward(xs, critic).tolist()
        offset = 0
        for row, k in enumerate(active):
            o = obs[row]
            m = len(o.pairs)
            probs = out.probs[offset : offset + m][o.pair_available]
            logp = out.log_probs[offset : offset + m][o.pair_available]
            offset += m
            if greedy:
                idx = int(np.argmax(probs))
            else:
                idx = int(min(np.searchsorted(np.cumsum(probs), rng.random() * probs.sum(), side="right"),
                              len(probs) - 1))
            action = o.actions[idx]
            outcome = states[k].step(action)
            ep = episodes[k]
            if keep_observations:
                ep.observations.append(o)
                if xs is not None:
                    ep.critic_inputs.append(xs[row])
            ep.actions.append(action)
            ep.action_index.append(idx)
            ep.log_probs.append(float(logp[idx]))
            ep.rewards.append(outcome.reward / instances[k].threshold)
            ep.values.append(values[row])
    for k, (st, ep) in enumerate(zip(states, episodes)):
        part = st.partition()
        ep.assignment = part.assignment.tolist()
        ep.objective = evaluate(instances[k], part)
        ep.terminal = True
    return episodes


# ------------------------------------------------------------------ advantages


def compute_gae(rewards, values, gamma: float = 1.0, lam: float = 0.95):
    """Generalized advantage estimates and returns for one finished episode.

    The value after the last step is taken as 0 (terminal).
    """
    rewards = np.asarray(rewards, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    if rewards.shape != values.shape:
        raise ValueError(f"{len(rewards)} rewards but {len(values)} values")
    adv = np.zeros_like(rewards)
    running = 0.0
    for t in reversed(range(len(rewards))):
        next_value = values[t + 1] if t + 1 < len(rewards) else 0.0
        delta = rewards[t] + gamma * next_value - values[t]
        running = delta + gamma * lam * running
        adv[t] = running
    return adv, adv + values


# ------------------------------------------------------------------ optimizer


class Adam:
    def __init__(self, lr, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.t = 0
        self.m = {}
        self.v = {}

    def step(self, params: dict, grads: dict):
        self.t += 1
        c1 = 1.0 - self.beta1**self.t
        c2 = 1.0 - self.beta2**self.t
        for name, g in grads.items():
            m = self.m.setdefault(name, np.zeros_like(g))
            v = self.v.setdefault(name, np.zeros_like(g))
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            params[name] -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)

    def state_dict(self) -> dict:
        pack = lambda d: {k: {"shape": list(a.shape), "data": a.ravel().tolist()} for k, a in d.items()}
        return {"t": self.t, "m": pack(self.m), "v": pack(self.v)}

    def load_state_dict(self, state: dict):
        unpack = lambda d: {k: np.array(a["data"], dtype=np.float64).reshape(a["shape"]) for k, a in d.items()}
        self.t = state["t"]
        self.m = unpack(state["m"])
        self.v = unpack(state["v"])


def clip_global_norm(grads: dict, max_norm: float) -> float:
    norm = math.sqrt(sum(float(np.sum(g * g)) for g in grads.values()))
    if norm > max_norm:
        scale = max_norm / (norm + 1e-12)
        for g in grads.values():
            g *= scale
    return norm


# ------------------------------------------------------------------ update


@dataclass
class UpdateStats:
    policy_loss: float
    value_loss: float
    entropy: float
    clip_fraction: float
    grad_norm: float


def ppo_update(episodes, actor: PolicyParams, critic: CriticParams, optimizer: Adam, cfg: TrainConfig,
               rng, batch_id: int = 0) -> UpdateStats:
    """Several epochs of clipped-surrogate updates on one batch of episodes, in place."""
    episodes = [ep for ep in episodes if len(ep)]
    if not episodes:
        raise ValueError("ppo_update needs at least one non-empty episode")
    obs, xs, act, old_lp, advs, rets = [], [], [], [], [], []
    for ep in episodes:
        adv, ret = compute_gae(ep.rewards, ep.values, cfg.gamma, cfg.gae_lambda)
        obs += ep.observations
        xs += ep.critic_inputs
        act += ep.action_index
        old_lp += ep.log_probs
        advs.append(adv)
        rets.append(ret)
    advs = np.concatenate(advs)
    rets = np.concatenate(rets)
    advs = (advs - advs.mean()) / (advs.std() + 1e-8)
    xs = np.stack(xs)
    act = np.asarray(act)
    old_lp = np.asarray(old_lp)

    total = len(obs)
    sums = np.zeros(5)
    count = 0
    params = {**actor.arrays, **critic.arrays}
    for epoch in range(cfg.epochs_per_batch):
        order = rng.permutation(total)
        for mb_id, lo in enumerate(range(0, total, cfg.minibatch_size)):
            idx = order[lo : lo + cfg.minibatch_size]
            tb = TransitionBatch.build(
                [obs[i] for i in idx], xs[idx], act[idx], old_lp[idx], advs[idx], rets[idx]
            )
            where = f"batch {batch_id}, epoch {epoch}, minibatch {mb_id}"
            try:
                stats, grads = ppo_loss(actor, critic, tb, cfg.clip_epsilon, cfg.value_coef, cfg.entropy_coef)
            except NumericError as exc:
                raise NumericError(f"{exc} ({where})") from exc
            if not math.isfinite(stats.total):
                raise NumericError(f"non-finite loss ({where})")
            norm = clip_global_norm(grads, cfg.grad_clip_norm)
            optimizer.step(params, grads)
            sums += [stats.policy, stats.value, stats.entropy, stats.clip_fraction, norm]
            count += 1
    return UpdateStats(*(sums / count))


# ------------------------------------------------------------------ training loop


def instance_pool(env: str, n: int, count: int, seed_base: int, threshold: float) -> list:
    return [generate(env, n, seed_base + i, threshold) for i in range(count)]


def exact_references(instances, cap: int = DEFAULT_CAP) -> list:
    if not instances or instances[0].n > cap:
        return [None] * len(instances)
    return [solve_exact_dp(inst, cap)[1] for inst in instances]


def _mean_gap(episodes, refs) -> float:
    gaps = [optimality_gap(ep.objective, refs[ep.instance_index]) for ep in episodes
            if refs[ep.instance_index] is not None]
    return float(np.mean(gaps)) if gaps else float("nan")


class Trainer:
    """Holds the mutable training state; ``run`` advances it to ``total_batches``."""

    def __init__(self, cfg: TrainConfig, out_dir):
        self.cfg = cfg.validate()
        self.out_dir = Path(out_dir)
        self.out_dir.mkdir(parents=True, exist_ok=True)
        root = np.random.default_rng(cfg.seed)
        self.actor = PolicyParams.init(cfg.embedding_size, root.integers(2**63))
        self.critic = CriticParams.init(cfg.n, rng=root.integers(2**63))
        self.rng = np.random.default_rng(root.integers(2**63))
        self.optimizer = Adam(cfg.learning_rate)
        self.batch = 0
        self.pool = instance_pool(cfg.env, cfg.n, cfg.pool_size, cfg.pool_seed, cfg.threshold)
        self.pool_refs = exact_references(self.pool)

    # -- persistence

    def checkpoint_path(self, batch: int) -> Path:
        return self.out_dir / f"checkpoint_{batch:06d}.json"

    def save(self) -> Path:
        path = self.checkpoint_path(self.batch)
        extra = {
            "batch": self.batch,
            "config": asdict(self.cfg),
            "optimizer": self.optimizer.state_dict(),
            "rng": self.rng.bit_generator.state,
        }
        save_checkpoint(path, self.actor, self.critic, extra)
        save_checkpoint(self.out_dir / "final.json", self.actor, self.critic, {"batch": self.batch,
                                                                           "config": asdict(self.cfg)})
        return path

    @classmethod
    def resume(cls, checkpoint, out_dir, total_batches: Optional[int] = None) -> "Trainer":
        actor, critic, extra = load_checkpoint(checkpoint)
        cfg_dict = dict(extra["config"])
        if total_batches is not None:
            cfg_dict["total_batches"] = total_batches
        tr = cls(TrainConfig.from_dict(cfg_dict), out_dir)
        tr.actor, tr.critic = actor, critic
        tr.optimizer.load_state_dict(extra["optimizer"])
        tr.rng.bit_generator.state = extra["rng"]
        tr.batch = extra["batch"]
        tr._truncate_logs(tr.batch)
        return tr

    def _truncate_logs(self, upto: int):
        metrics = self.out_dir / "metrics.csv"
        if metrics.exists():
            with open(metrics, newline="") as fh:
                rows = [r for r in csv.DictReader(fh) if int(r["batch"]) < upto]
            with open(metrics, "w", newline="") as fh:
                w = csv.DictWriter(fh, fieldnames=METRIC_FIELDS)
                w.writeheader()
                w.writerows(rows)
        episodes = self.out_dir / "episodes.jsonl"
        if episodes.exists():
            kept = [line for line in episodes.read_text().splitlines() if json.loads(line)["batch"] < upto]
            episodes.write_text("".join(line + "\n" for line in kept))

    # -- loop

    def _batch_instances(self):
        cfg = self.cfg
        if cfg.pool_size:
            idx = self.rng.integers(cfg.pool_size, size=cfg.episodes_per_batch)
            return [self.pool[i] for i in idx], [self.pool_refs[i] for i in idx], idx.tolist()
        seeds = [cfg.pool_seed + self.batch * cfg.episodes_per_batch + k for k in range(cfg.episodes_per_batch)]
        insts = [generate(cfg.env, cfg.n, s, cfg.threshold) for s in seeds]
        return insts, exact_references(insts), seeds

    def run_batch(self) -> dict:
        insts, refs, ids = self._batch_instances()
        episodes = run_episodes(insts, self.actor, self.critic, self.rng)
        stats = ppo_update(episodes, self.actor, self.critic, self.optimizer, self.cfg, self.rng, self.batch)
        row = {
            "batch": self.batch,
            "mean_return": float(np.mean([ep.total_return for ep in episodes])),
            "mean_objective": float(np.mean([ep.objective for ep in episodes])),
            "mean_gap": _mean_gap(episodes, refs),
            "policy_loss": float(stats.policy_loss),
            "value_loss": float(stats.value_loss),
            "entropy": float(stats.entropy),
        }
        with open(self.out_dir / "episodes.jsonl", "a", encoding="utf-8") as fh:
            for ep in episodes:
                fh.write(json.dumps({
                    "batch": self.batch,
                    "instance": ids[ep.instance_index],
                    "assignment": ep.assignment,
                    "objective": ep.objective,
                    "reference": refs[ep.instance_index],
                }) + "\n")
        metrics = self.out_dir / "metrics.csv"
        new = not metrics.exists()
        with open(metrics, "a", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=METRIC_FIELDS)
            if new:
                w.writeheader()
            w.writerow({k: repr(float(v)) if isinstance(v, float) else v for k, v in row.items()})
        self.batch += 1
        return row

    def run(self, progress_every: int = 10) -> Path:
        path = None
        while self.batch < self.cfg.total_batches:
            row = self.run_batch()
            if self.batch % progress_every == 0:
                log.info("batch %d return %.4f objective %.2f gap %.4f entropy %.3f", row["batch"],
                         row["mean_return"], row["mean_objective"], row["mean_gap"], row["entropy"])
            if self.batch % self.cfg.checkpoint_every == 0:
                path = self.save()
        if path is None or self.batch % self.cfg.checkpoint_every:
            path = self.save()
        return path


def train(cfg: TrainConfig, out_dir) -> Path:
    """Train from scratch; returns the path of the last checkpoint."""
    return Trainer(cfg, out_dir).run()


def read_metrics(path) -> list:
    with open(path, newline="") as fh:
        return [{k: (int(v) if k == "batch" else float(v)) for k, v in r.items()} for r in csv.DictReader(fh)]


def evaluate_policy(instances, actor: PolicyParams, greedy: bool = True, rng=None) -> list:
    """Final objectives of one episode per instance."""
    eps = run_episodes(instances, actor, None, rng, greedy=greedy, keep_observations=False)
    return [ep.objective for ep in eps]
