"""Central finite differences for verifying analytic gradients.

Rectifiers and the PPO clip make the loss piecewise smooth.  A central
difference whose stencil crosses a kink measures an average slope rather
than a derivative, so loss functions may return ``(value, signature)`` where
the signature identifies the active branch of every piecewise unit.
Coordinates whose stencil changes the signature are skipped and counted.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class FDResult:
    grads: dict
    valid: dict  # name -> bool mask of coordinates with a smooth stencil
    skipped: int = 0
    total: int = 0


def _split(result):
    if isinstance(result, tuple):
        return result
    return result, None


def central_difference(loss_fn, arrays: dict, h: float = 1e-4, names=None) -> FDResult:
    """Numerical gradient of ``loss_fn()`` w.r.t. every entry of ``arrays``.

    ``arrays`` is perturbed in place and restored; ``loss_fn`` must read it.
    """
    _, base_sig = _split(loss_fn())
    res = FDResult(grads={}, valid={})
    for name in names or list(arrays):
        a = arrays[name]
        g = np.zeros_like(a)
        ok = np.ones(a.shape, dtype=bool)
        flat, gflat, okflat = a.reshape(-1), g.reshape(-1), ok.reshape(-1)
        for k in range(flat.size):
            orig = flat[k]
            flat[k] = orig + h
            plus, sig_p = _split(loss_fn())
            flat[k] = orig - h
            minus, sig_m = _split(loss_fn())
            flat[k] = orig
            gflat[k] = (plus - minus) / (2 * h)
            if base_sig is not None and (sig_p != base_sig or sig_m != base_sig):
                okflat[k] = False
        res.grads[name] = g
        res.valid[name] = ok
        res.skipped += int((~ok).sum())
        res.total += ok.size
    return res


def critic_central_difference(critic, tb, h: float = 1e-4, chunk: int = 512) -> FDResult:
    """Central differences of the critic's mean squared error, all coordinates.

    Moving one weight of a dense layer by ``dh`` shifts exactly one column of
    that layer's pre-activation by ``dh * input``; the shifted pre-activation
    is then pushed through the remaining layers in full, for ``chunk``
    coordinates at a time.  Branch validity is tracked as in
    ``central_difference``.
    """
    a = critic.arrays
    x, ret = tb.critic_inputs, tb.returns
    w0, b0, w1, b1, w2, b2 = (a[f"critic.{i}.{k}"] for i in range(3) for k in ("weight", "bias"))
    u1 = x @ w0 + b0
    h1 = np.maximum(u1, 0.0)
    u2 = h1 @ w1 + b1
    h2 = np.maximum(u2, 0.0)
    v = h2 @ w2 + b2[0]

    def loss_of_v(vv):
        return np.mean((vv - ret) ** 2, axis=-1)

    def from_u2(u2v):
        return loss_of_v(np.maximum(u2v, 0.0) @ w2 + b2[0]), (u2v > 0) == (u2 > 0)

    def from_u1(u1v):
        loss, ok2 = from_u2(np.maximum(u1v, 0.0) @ w1 + b1)
        return loss, ok2 & ((u1v > 0) == (u1 > 0))

    def column_shift(base, cols, shift, tail):
        k = len(cols)
        pre = np.repeat(base[None], k, axis=0)
        pre[np.arange(k), :, cols] += shift
        loss, same = tail(pre)
        return loss, same.reshape(k, -1).all(axis=1)

    hidden = w1.shape[0]
    plan = {
        # name -> (base pre-activation, tail, shift(coords) -> (cols, (k, rows) shift))
        "critic.0.weight": (u1, from_u1, lambda c: (c % hidden, x[:, c // hidden].T)),
        "critic.0.bias": (u1, from_u1, lambda c: (c, np.ones((len(c), len(ret))))),
        "critic.1.weight": (u2, from_u2, lambda c: (c % hidden, h1[:, c // hidden].T)),
        "critic.1.bias": (u2, from_u2, lambda c: (c, np.ones((len(c), len(ret))))),
    }
    res = FDResult(grads={}, valid={})
    for name, arr in a.items():
        size = arr.size
        g = np.zeros(size)
        ok = np.ones(size, dtype=bool)
        for lo in range(0, size, chunk):
            coords = np.arange(lo, min(lo + chunk, size))
            vals = []
            for sign in (1.0, -1.0):
                if name in plan:
                    base, tail, shift = plan[name]
                    cols, delta = shift(coords)
                    loss, same = column_shift(base, cols, sign * h * delta, tail)
                    ok[coords] &= same
                elif name == "critic.2.weight":
                    loss = loss_of_v(v[None] + sign * h * h2[:, coords].T)
                else:
                    loss = loss_of_v(v[None] + sign * h * np.ones((len(coords), 1)))
                vals.append(loss)
            g[coords] = (vals[0] - vals[1]) / (2 * h)
        res.grads[name] = g.reshape(arr.shape)
        res.valid[name] = ok.reshape(arr.shape)
        res.skipped += int((~ok).sum())
        res.total += size
    return res


def relative_error(analytic: np.ndarray, numeric: np.ndarray, floor: float = 1e-6) -> float:
    """Norm-wise relative error ``|a - f| / max(|a|, |f|, floor)``.

    The floor sits well above finite-difference round-off (about 1e-12 per
    entry for O(1) losses), so arrays whose true gradient is numerically zero
    are compared absolutely.
    """
    diff = np.linalg.norm(analytic - numeric)
    scale = max(np.linalg.norm(analytic), np.linalg.norm(numeric), floor)
    return float(diff / scale)


def compare(analytic: dict, fd: FDResult, floor: float = 1e-6) -> dict:
    """Per-array relative error restricted to smooth coordinates."""
    out = {}
    for name, num in fd.grads.items():
        mask = fd.valid[name]
        out[name] = relative_error(analytic[name][mask], num[mask], floor)
    return out


@dataclass
class GradCheckReport:
    errors: dict
    skipped: int
    total: int
    worst: float = field(init=False)

    def __post_init__(self):
        self.worst = max(self.errors.values()) if self.errors else 0.0


def check_ppo_gradients(actor, critic, tb, h=1e-4, clip_epsilon=0.2, value_coef=0.5, entropy_coef=0.01):
    """Compare ``ppo_loss`` gradients with central differences of the full loss.

    The loss is additive over the actor and critic parameter sets, so while
    one set is perturbed the other half is held at its (unchanged) value.
    """
    from .neural import actor_objective, ppo_loss, value_objective

    _, analytic = ppo_loss(actor, critic, tb, clip_epsilon, value_coef, entropy_coef)
    actor_part, _ = actor_objective(actor, tb, clip_epsilon, entropy_coef)
    value_part, _ = value_objective(critic, tb)

    def actor_loss():
        val, sig = actor_objective(actor, tb, clip_epsilon, entropy_coef)
        return val + value_coef * value_part, sig

    fd_a = central_difference(actor_loss, actor.arrays, h)
    # the actor half is constant here; full loss = actor_part + value_coef * mse
    fd_c = critic_central_difference(critic, tb, h)
    for name in fd_c.grads:
        fd_c.grads[name] *= value_coef
    errors = {**compare(analytic, fd_a), **compare(analytic, fd_c)}
    return GradCheckReport(errors, fd_a.skipped + fd_c.skipped, fd_a.total + fd_c.total)
