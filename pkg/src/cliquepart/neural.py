"""Edge-featured graph attention actor and dense critic, in plain numpy.

Every forward pass keeps the intermediates it needs so that ``backward``
can produce exact reverse-mode gradients.  Graphs are processed in batches
as one disjoint union; directed edges are stored grouped by destination so
per-node reductions are ``np.add.reduceat`` calls.

Per attention layer, for a directed edge j -> i::

    g_ij  = leaky_relu(W_cat [h_i | e_ij | h_j] + b_cat, 0.2)
    a_ij  = softmax over in-edges of i of (attn . g_ij)
    h'_i  = elu(sum_j a_ij (W_node h_j + b_node))
    e'_ij = g_ij
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import DimensionError, NoActionError, NumericError

LAYER_COUNT = 3
CRITIC_HIDDEN = 128
LEAK = 0.2
FORMAT_VERSION = 1


# ------------------------------------------------------------------ observations


@dataclass(frozen=True)
class GraphObservation:
    """Graph view of one state.

    Directed edges are sorted by (dst, src) and include one self-loop per
    node.  ``pairs`` lists every undirected edge present (joined or
    available) in lexicographic order with the positions of its two
    directed copies; ``pair_available`` marks the selectable ones.
    """

    n: int
    node_features: np.ndarray
    src: np.ndarray
    dst: np.ndarray
    edge_features: np.ndarray
    pairs: np.ndarray
    pair_positions: np.ndarray
    pair_available: np.ndarray

    @property
    def actions(self) -> list:
        sel = self.pairs[self.pair_available]
        return [tuple(p) for p in sel.tolist()]

    @property
    def action_index_map(self) -> dict:
        sel = self.pair_available
        return {tuple(p): tuple(q) for p, q in zip(self.pairs[sel].tolist(), self.pair_positions[sel].tolist())}


def encode_observation(state) -> GraphObservation:
    """Works on an ``EnvState`` or a ``StateSnapshot``."""
    n, big_d = state.instance.n, state.instance.threshold
    sol, avail = state.solution, state.available
    present = sol | avail
    np.fill_diagonal(present, True)
    dst, src = np.nonzero(present)
    feats = np.stack(
        [
            state.instance.distances[dst, src] / big_d,
            sol[dst, src].astype(np.float64),
            avail[dst, src].astype(np.float64),
        ],
        axis=1,
    )
    pos = np.full((n, n), -1, dtype=np.int64)
    pos[dst, src] = np.arange(len(dst))
    pi, pj = np.nonzero(np.triu(present, k=1))
    pairs = np.stack([pi, pj], axis=1)
    positions = np.stack([pos[pi, pj], pos[pj, pi]], axis=1)
    return GraphObservation(
        n=n,
        node_features=np.ones((n, 1)),
        src=src,
        dst=dst,
        edge_features=feats,
        pairs=pairs,
        pair_positions=positions,
        pair_available=avail[pi, pj],
    )


def critic_input(state) -> np.ndarray:
    """Flattened distance/D matrix followed by the flattened availability matrix."""
    d = state.instance.distances / state.instance.threshold
    return np.concatenate([d.ravel(), state.available.astype(np.float64).ravel()])


@dataclass
class GraphBatch:
    """Disjoint union of observations with the index arrays the layers need."""

    num_graphs: int
    num_nodes: int
    node_features: np.ndarray
    src: np.ndarray
    dst: np.ndarray
    edge_features: np.ndarray
    dst_starts: np.ndarray
    src_order: np.ndarray
    src_starts: np.ndarray
    pair_positions: np.ndarray
    pair_available: np.ndarray
    pair_starts: np.ndarray
    pair_counts: np.ndarray
    avail_offsets: np.ndarray

    @classmethod
    def from_observations(cls, observations) -> "GraphBatch":
        if not observations:
            raise ValueError("empty batch")
        node_off = np.cumsum([0] + [o.n for o in observations])
        edge_off = np.cumsum([0] + [len(o.src) for o in observations])
        src = np.concatenate([o.src + off for o, off in zip(observations, node_off)])
        dst = np.concatenate([o.dst + off for o, off in zip(observations, node_off)])
        num_nodes = int(node_off[-1])
        pair_counts = np.array([len(o.pairs) for o in observations])
        avail_counts = np.array([int(o.pair_available.sum()) for o in observations])
        if (avail_counts == 0).any():
            raise NoActionError("every graph in a batch needs at least one available edge")
        src_order = np.argsort(src, kind="stable")
        return cls(
            num_graphs=len(observations),
            num_nodes=num_nodes,
            node_features=np.concatenate([o.node_features for o in observations]),
            src=src,
            dst=dst,
            edge_features=np.concatenate([o.edge_features for o in observations]),
            dst_starts=np.searchsorted(dst, np.arange(num_nodes)),
            src_order=src_order,
            src_starts=np.searchsorted(src[src_order], np.arange(num_nodes)),
            pair_positions=np.concatenate(
                [o.pair_positions + off for o, off in zip(observations, edge_off)]
            ),
            pair_available=np.concatenate([o.pair_available for o in observations]),
            pair_starts=np.concatenate([[0], np.cumsum(pair_counts)[:-1]]),
            pair_counts=pair_counts,
            avail_offsets=np.concatenate([[0], np.cumsum(avail_counts)[:-1]]),
        )

    def action_to_pair_index(self, action_idx) -> np.ndarray:
        """Map per-graph action indices (among available edges) to global pair rows."""
        avail_rows = np.flatnonzero(self.pair_available)
        return avail_rows[self.avail_offsets + np.asarray(action_idx)]

    def segment_sum_dst(self, x):
        return np.add.reduceat(x, self.dst_starts, axis=0)

    def segment_sum_src(self, x):
        return np.add.reduceat(x[self.src_order], self.src_starts, axis=0)


# ------------------------------------------------------------------ parameters


def _uniform(rng, fan_in, shape):
    bound = 1.0 / math.sqrt(fan_in)
    return rng.uniform(-bound, bound, size=shape)


@dataclass
class PolicyParams:
    embedding_size: int
    arrays: dict

    @classmethod
    def init(cls, embedding_size: int = 8, rng=None) -> "PolicyParams":
        rng = np.random.default_rng(rng)
        f = embedding_size
        a = {
            "node_embed.weight": _uniform(rng, 1, (1, f)),
            "node_embed.bias": _uniform(rng, 1, (f,)),
            "edge_embed.weight": _uniform(rng, 3, (3, f)),
            "edge_embed.bias": _uniform(rng, 3, (f,)),
        }
        for k in range(LAYER_COUNT):
            a[f"layers.{k}.cat.weight"] = _uniform(rng, 3 * f, (3 * f, f))
            a[f"layers.{k}.cat.bias"] = _uniform(rng, 3 * f, (f,))
            a[f"layers.{k}.attn"] = _uniform(rng, f, (f,))
            a[f"layers.{k}.node.weight"] = _uniform(rng, f, (f, f))
            a[f"layers.{k}.node.bias"] = _uniform(rng, f, (f,))
        a["readout.weight"] = _uniform(rng, f, (f,))
        a["readout.bias"] = _uniform(rng, f, (1,))
        return cls(embedding_size, a)

    def copy(self) -> "PolicyParams":
        return PolicyParams(self.embedding_size, {k: v.copy() for k, v in self.arrays.items()})


@dataclass
class CriticParams:
    n: int
    arrays: dict
    hidden: int = CRITIC_HIDDEN

    @classmethod
    def init(cls, n: int, hidden: int = CRITIC_HIDDEN, rng=None) -> "CriticParams":
        rng = np.random.default_rng(rng)
        m = 2 * n * n
        a = {
            "critic.0.weight": _uniform(rng, m, (m, hidden)),
            "critic.0.bias": _uniform(rng, m, (hidden,)),
            "critic.1.weight": _uniform(rng, hidden, (hidden, hidden)),
            "critic.1.bias": _uniform(rng, hidden, (hidden,)),
            "critic.2.weight": _uniform(rng, hidden, (hidden,)),
            "critic.2.bias": _uniform(rng, hidden, (1,)),
        }
        return cls(n, a, hidden)

    def copy(self) -> "CriticParams":
        return CriticParams(self.n, {k: v.copy() for k, v in self.arrays.items()}, self.hidden)


# ------------------------------------------------------------------ actor


def _leaky(x):
    return np.where(x > 0, x, LEAK * x)


def _elu(x):
    return np.where(x > 0, x, np.expm1(np.minimum(x, 0.0)))


def attention_layer(batch: GraphBatch, h, e, params: dict, prefix: str):
    """One attention layer; returns ``(h_new, e_new, cache)``."""
    w_cat, b_cat = params[prefix + "cat.weight"], params[prefix + "cat.bias"]
    attn = params[prefix + "attn"]
    w_node, b_node = params[prefix + "node.weight"], params[prefix + "node.bias"]

    z = np.concatenate([h[batch.dst], e, h[batch.src]], axis=1)
    u = z @ w_cat + b_cat
    g = _leaky(u)
    s = g @ attn
    seg_max = np.maximum.reduceat(s, batch.dst_starts)
    w = np.exp(s - seg_max[batch.dst])
    alpha = w / batch.segment_sum_dst(w)[batch.dst]
    msg_node = h @ w_node + b_node
    msg = msg_node[batch.src]
    agg = batch.segment_sum_dst(alpha[:, None] * msg)
    h_new = _elu(agg)
    cache = dict(h=h, z=z, u=u, g=g, alpha=alpha, msg=msg, agg=agg, h_new=h_new)
    return h_new, g, cache


def attention_layer_backward(batch: GraphBatch, cache, dh_new, de_new, params, prefix, grads):
    w_cat = params[prefix + "cat.weight"]
    attn = params[prefix + "attn"]
    w_node = params[prefix + "node.weight"]
    f = attn.shape[0]
    alpha, msg, g, u, z, h = (cache[k] for k in ("alpha", "msg", "g", "u", "z", "h"))

    dagg = dh_new * np.where(cache["agg"] > 0, 1.0, cache["h_new"] + 1.0)
    dagg_e = dagg[batch.dst]
    dalpha = np.sum(dagg_e * msg, axis=1)
    dmsg = alpha[:, None] * dagg_e
    dmsg_node = batch.segment_sum_src(dmsg)
    grads[prefix + "node.weight"] = h.T @ dmsg_node
    grads[prefix + "node.bias"] = dmsg_node.sum(axis=0)
    dh = dmsg_node @ w_node.T

    ds = alpha * (dalpha - batch.segment_sum_dst(alpha * dalpha)[batch.dst])
    grads[prefix + "attn"] = g.T @ ds
    dg = de_new + ds[:, None] * attn[None, :]
    du = dg * np.where(u > 0, 1.0, LEAK)
    grads[prefix + "cat.weight"] = z.T @ du
    grads[prefix + "cat.bias"] = du.sum(axis=0)
    dz = du @ w_cat.T
    dh = dh + batch.segment_sum_dst(dz[:, :f]) + batch.segment_sum_src(dz[:, 2 * f :])
    de = dz[:, f : 2 * f]
    return dh, de


@dataclass
class ActorOutput:
    scores: np.ndarray  # one per present undirected pair; masked pairs included
    log_probs: np.ndarray  # -inf on masked pairs
    probs: np.ndarray
    cache: Optional[dict] = field(default=None, repr=False)


def _masked_log_softmax(batch: GraphBatch, scores):
    masked = np.where(batch.pair_available, scores, -np.inf)
    seg_max = np.maximum.reduceat(masked, batch.pair_starts)
    graph_of_pair = np.repeat(np.arange(batch.num_graphs), batch.pair_counts)
    shifted = masked - seg_max[graph_of_pair]
    expd = np.exp(shifted)
    lse = np.log(np.add.reduceat(expd, batch.pair_starts))
    log_probs = shifted - lse[graph_of_pair]
    return log_probs, np.exp(log_probs), graph_of_pair


def actor_forward(batch: GraphBatch, params: PolicyParams, keep_cache: bool = False) -> ActorOutput:
    p = params.arrays
    h = batch.node_features @ p["node_embed.weight"] + p["node_embed.bias"]
    e = batch.edge_features @ p["edge_embed.weight"] + p["edge_embed.bias"]
    layer_caches = []
    for k in range(LAYER_COUNT):
        h, e, c = attention_layer(batch, h, e, p, f"layers.{k}.")
        layer_caches.append(c)
    p1, p2 = batch.pair_positions[:, 0], batch.pair_positions[:, 1]
    pair_emb = 0.5 * (e[p1] + e[p2])
    scores = pair_emb @ p["readout.weight"] + p["readout.bias"][0]
    log_probs, probs, graph_of_pair = _masked_log_softmax(batch, scores)
    cache = None
    if keep_cache:
        cache = dict(layers=layer_caches, pair_emb=pair_emb, e_final=e, graph_of_pair=graph_of_pair)
    return ActorOutput(scores=scores, log_probs=log_probs, probs=probs, cache=cache)


def actor_backward(batch: GraphBatch, params: PolicyParams, out: ActorOutput, dscores) -> dict:
    """Gradients of all actor parameters given d(loss)/d(scores)."""
    p = params.arrays
    c = out.cache
    if c is None:
        raise ValueError("actor_forward must be called with keep_cache=True before backward")
    grads = {}
    grads["readout.weight"] = c["pair_emb"].T @ dscores
    grads["readout.bias"] = np.array([dscores.sum()])
    dpair = np.outer(dscores, p["readout.weight"])
    de = np.zeros_like(c["e_final"])
    de[batch.pair_positions[:, 0]] += 0.5 * dpair
    de[batch.pair_positions[:, 1]] += 0.5 * dpair
    dh = np.zeros((batch.num_nodes, params.embedding_size))
    for k in reversed(range(LAYER_COUNT)):
        dh, de = attention_layer_backward(batch, c["layers"][k], dh, de, p, f"layers.{k}.", grads)
    grads["node_embed.weight"] = batch.node_features.T @ dh
    grads["node_embed.bias"] = dh.sum(axis=0)
    grads["edge_embed.weight"] = batch.edge_features.T @ de
    grads["edge_embed.bias"] = de.sum(axis=0)
    return grads


def action_distribution(obs: GraphObservation, params: PolicyParams) -> np.ndarray:
    """Probabilities over ``obs.actions`` (available edges, lexicographic)."""
    if not obs.pair_available.any():
        raise NoActionError("no available edges")
    out = actor_forward(GraphBatch.from_observations([obs]), params)
    return out.probs[obs.pair_available]


# ------------------------------------------------------------------ critic


def critic_forward(x, params: CriticParams, keep_cache: bool = False):
    """Value estimates for rows of ``x`` (or a single flattened state)."""
    x = np.atleast_2d(x)
    if x.shape[1] != 2 * params.n * params.n:
        raise DimensionError(
            f"critic expects input length {2 * params.n * params.n} (n={params.n}), got {x.shape[1]}"
        )
    a = params.arrays
    u1 = x @ a["critic.0.weight"] + a["critic.0.bias"]
    h1 = np.maximum(u1, 0.0)
    u2 = h1 @ a["critic.1.weight"] + a["critic.1.bias"]
    h2 = np.maximum(u2, 0.0)
    v = h2 @ a["critic.2.weight"] + a["critic.2.bias"][0]
    if keep_cache:
        return v, dict(x=x, u1=u1, h1=h1, u2=u2, h2=h2)
    return v


def critic_value(state, params: CriticParams) -> float:
    if state.instance.n != params.n:
        raise DimensionError(f"critic built for n={params.n}, state has n={state.instance.n}")
    return float(critic_forward(critic_input(state), params)[0])


def critic_backward(cache, params: CriticParams, dv) -> dict:
    a = params.arrays
    grads = {
        "critic.2.weight": cache["h2"].T @ dv,
        "critic.2.bias": np.array([dv.sum()]),
    }
    du2 = np.outer(dv, a["critic.2.weight"]) * (cache["u2"] > 0)
    grads["critic.1.weight"] = cache["h1"].T @ du2
    grads["critic.1.bias"] = du2.sum(axis=0)
    du1 = (du2 @ a["critic.1.weight"].T) * (cache["u1"] > 0)
    grads["critic.0.weight"] = cache["x"].T @ du1
    grads["critic.0.bias"] = du1.sum(axis=0)
    return grads


# ------------------------------------------------------------------ loss


@dataclass
class TransitionBatch:
    graphs: GraphBatch
    critic_inputs: np.ndarray
    action_index: np.ndarray  # per graph, index among its available edges
    old_log_probs: np.ndarray
    advantages: np.ndarray
    returns: np.ndarray

    @classmethod
    def build(cls, observations, critic_inputs, action_index, old_log_probs, advantages, returns):
        return cls(
            graphs=GraphBatch.from_observations(observations),
            critic_inputs=np.asarray(critic_inputs, dtype=np.float64),
            action_index=np.asarray(action_index, dtype=np.int64),
            old_log_probs=np.asarray(old_log_probs, dtype=np.float64),
            advantages=np.asarray(advantages, dtype=np.float64),
            returns=np.asarray(returns, dtype=np.float64),
        )


@dataclass
class LossStats:
    total: float
    policy: float
    value: float
    entropy: float
    clip_fraction: float


@dataclass
class _ActorTerms:
    policy: float
    entropy: float
    clip_fraction: float
    out: ActorOutput
    chosen: np.ndarray
    ratio: np.ndarray
    ent_graph: np.ndarray
    use_unclipped: np.ndarray


def _actor_terms(actor, tb: TransitionBatch, clip_epsilon, keep_cache):
    gb = tb.graphs
    out = actor_forward(gb, actor, keep_cache=keep_cache)
    chosen = gb.action_to_pair_index(tb.action_index)
    ratio = np.exp(out.log_probs[chosen] - tb.old_log_probs)
    adv = tb.advantages
    inside = (ratio >= 1.0 - clip_epsilon) & (ratio <= 1.0 + clip_epsilon)
    surr1 = ratio * adv
    surr2 = np.clip(ratio, 1.0 - clip_epsilon, 1.0 + clip_epsilon) * adv
    logp_safe = np.where(gb.pair_available, out.log_probs, 0.0)
    ent_graph = -np.add.reduceat(out.probs * logp_safe, gb.pair_starts)
    return _ActorTerms(
        policy=float(-np.mean(np.minimum(surr1, surr2))),
        entropy=float(np.mean(ent_graph)),
        clip_fraction=float(np.mean(~inside)),
        out=out,
        chosen=chosen,
        ratio=ratio,
        ent_graph=ent_graph,
        use_unclipped=(surr1 <= surr2) | inside,
    )


def actor_objective(actor, tb: TransitionBatch, clip_epsilon=0.2, entropy_coef=0.01):
    """Policy part of the loss, ``policy - entropy_coef * entropy``, plus a branch
    signature: the on/off pattern of every piecewise-linear unit and clip switch."""
    t = _actor_terms(actor, tb, clip_epsilon, keep_cache=True)
    masks = [c["u"] > 0 for c in t.out.cache["layers"]]
    masks += [t.use_unclipped, t.ratio > 1.0 + clip_epsilon, t.ratio < 1.0 - clip_epsilon]
    return t.policy - entropy_coef * t.entropy, _signature(masks)


def value_objective(critic, tb: TransitionBatch):
    """Mean squared value error plus the critic's rectifier signature."""
    v, c = critic_forward(tb.critic_inputs, critic, keep_cache=True)
    return float(np.mean((v - tb.returns) ** 2)), _signature([c["u1"] > 0, c["u2"] > 0])


def _signature(masks) -> bytes:
    return b"".join(np.packbits(np.ravel(m)).tobytes() for m in masks)


def _score_gradient(tb: TransitionBatch, t: _ActorTerms, entropy_coef: float) -> np.ndarray:
    """d(policy - entropy_coef * entropy)/d(score) for every present pair."""
    gb, out = tb.graphs, t.out
    b = gb.num_graphs
    dlogp = np.where(t.use_unclipped, -tb.advantages * t.ratio / b, 0.0)
    dscores = -out.probs * np.repeat(dlogp, gb.pair_counts)
    dscores[t.chosen] += dlogp
    # d(-c * mean H)/ds_k = (c / b) * p_k (log p_k + H)
    logp_safe = np.where(gb.pair_available, out.log_probs, 0.0)
    graph_of_pair = np.repeat(np.arange(b), gb.pair_counts)
    dscores += (entropy_coef / b) * out.probs * (logp_safe + t.ent_graph[graph_of_pair])
    # masked pairs carry zero probability, hence zero gradient
    return np.where(gb.pair_available, dscores, 0.0)


def score_gradient(actor, tb: TransitionBatch, clip_epsilon=0.2, entropy_coef=0.01) -> np.ndarray:
    """Gradient of the policy part of the loss w.r.t. the raw pair scores."""
    return _score_gradient(tb, _actor_terms(actor, tb, clip_epsilon, keep_cache=False), entropy_coef)


def ppo_loss(
    actor: PolicyParams,
    critic: CriticParams,
    tb: TransitionBatch,
    clip_epsilon: float = 0.2,
    value_coef: float = 0.5,
    entropy_coef: float = 0.01,
    need_grad: bool = True,
):
    """Clipped-surrogate actor-critic loss; returns ``(stats, grads or None)``.

    total = policy + value_coef * value - entropy_coef * entropy
    """
    gb = tb.graphs
    b = gb.num_graphs
    t = _actor_terms(actor, tb, clip_epsilon, keep_cache=need_grad)
    v, ccache = critic_forward(tb.critic_inputs, critic, keep_cache=True)
    value_loss = float(np.mean((v - tb.returns) ** 2))
    stats = LossStats(
        total=t.policy + value_coef * value_loss - entropy_coef * t.entropy,
        policy=t.policy,
        value=value_loss,
        entropy=t.entropy,
        clip_fraction=t.clip_fraction,
    )
    if not need_grad:
        return stats, None

    dscores = _score_gradient(tb, t, entropy_coef)
    grads = actor_backward(gb, actor, t.out, dscores)
    dv = value_coef * 2.0 * (v - tb.returns) / b
    grads.update(critic_backward(ccache, critic, dv))
    check_finite(grads)
    return stats, grads


def check_finite(grads: dict):
    for name, g in grads.items():
        if not np.all(np.isfinite(g)):
            raise NumericError(f"non-finite gradient in {name}")


# ------------------------------------------------------------------ checkpoints


def _pack(arrays: dict) -> dict:
    return {k: {"shape": list(v.shape), "data": v.ravel().tolist()} for k, v in arrays.items()}


def _unpack(packed: dict) -> dict:
    return {k: np.array(v["data"], dtype=np.float64).reshape(v["shape"]) for k, v in packed.items()}


def save_checkpoint(path, actor: PolicyParams, critic: CriticParams, extra: Optional[dict] = None):
    """JSON checkpoint; floats are written with ``repr`` so round-trips are exact."""
    doc = {
        "header": {
            "embedding_size": actor.embedding_size,
            "n_critic": critic.n,
            "critic_hidden": critic.hidden,
            "layer_count": LAYER_COUNT,
            "format_version": FORMAT_VERSION,
        },
        "params": _pack({**actor.arrays, **critic.arrays}),
    }
    if extra:
        doc["extra"] = extra
    Path(path).write_text(json.dumps(doc), encoding="utf-8")


def load_checkpoint(path):
    """Return ``(actor, critic, extra)``."""
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    head = doc["header"]
    if head.get("format_version") != FORMAT_VERSION:
        raise ValueError(f"unsupported checkpoint version {head.get('format_version')}")
    if head.get("layer_count") != LAYER_COUNT:
        raise ValueError(f"checkpoint has {head.get('layer_count')} layers, expected {LAYER_COUNT}")
    arrays = _unpack(doc["params"])
    actor = PolicyParams(head["embedding_size"], {k: v for k, v in arrays.items() if not k.startswith("critic.")})
    critic = CriticParams(head["n_critic"], {k: v for k, v in arrays.items() if k.startswith("critic.")},
                          head.get("critic_hidden", CRITIC_HIDDEN))
    return actor, critic, doc.get("extra", {})


class NeuralPolicy:
    """Adapter so a trained actor can drive ``baselines.rollout``."""

    def __init__(self, actor: PolicyParams, critic: Optional[CriticParams] = None, greedy: bool = False):
        self.actor, self.critic, self.greedy = actor, critic, greedy

    def __call__(self, state, rng=None):
        from .baselines import PolicyDecision

        obs = encode_observation(state)
        probs = action_distribution(obs, self.actor)
        if self.greedy:
            idx = int(np.argmax(probs))
        else:
            idx = int(np.random.default_rng(rng).choice(len(probs), p=probs))
        value = critic_value(state, self.critic) if self.critic is not None else None
        return PolicyDecision(
            action=obs.actions[idx],
            action_log_prob=float(np.log(probs[idx])),
            action_distribution=probs,
            action_index=idx,
            value=value,
        )
