"""Gradient training of the surrogate on frame pairs.

Each training pair (x_t, x_{t+1}) runs the full predictor-error-corrector
step (both tendency evaluations plus the direction renormalization) so the
gradient matches exactly what rollouts execute.  Gradients are accumulated
over seeded shuffled mini-batches and applied either as plain fixed-step
descent or through hand-rolled Adam moment estimates (the default; the
parameter groups are badly enough scaled that fixed-step descent crawls).
Channel normalization statistics are frozen from the training stack before
the first step.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace

import numpy as np

from .errors import TrainingDiverged
from .grids import VMDRX, VMDRY
from .losses import loss, loss_grad
from .surrogate import init_weights, tendency, tendency_backward

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainConfig:
    """Training knobs.

    optimizer "adam" rescales each parameter by running gradient moment
    estimates (step_size is the learning rate); "gd" applies the raw
    averaged gradient times step_size.
    """

    kmax: int = 12
    width: int = 16
    epochs: int = 12
    batch_size: int = 8
    step_size: float = 3e-3
    lambda_spec: float = 0.5
    seed: int = 0
    dt: float = 1.0
    heun_inner_dt: bool = False
    linear_mode: bool = False
    weight_decay: float = 0.0
    optimizer: str = "adam"
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    lr_schedule: str = "linear"

    def __post_init__(self):
        if self.optimizer not in ("adam", "gd"):
            raise ValueError(f"unknown optimizer {self.optimizer!r}")
        if self.lr_schedule not in ("linear", "constant"):
            raise ValueError(f"unknown lr_schedule {self.lr_schedule!r}")


def _renorm_forward(y, mask, eps=1e-12):
    """Unit-normalize direction channels; cache what the adjoint needs."""
    out = y.copy()
    vx, vy = y[VMDRX], y[VMDRY]
    norm = np.sqrt(vx * vx + vy * vy)
    ok = mask & (norm > eps)
    safe = np.where(ok, norm, 1.0)
    out[VMDRX] = np.where(ok, vx / safe, vx)
    out[VMDRY] = np.where(ok, vy / safe, vy)
    return out, (out[VMDRX], out[VMDRY], safe, ok)


def _renorm_backward(g, cache):
    """Adjoint of `_renorm_forward`: J = (I - u u^T) / |v| on normalized cells."""
    ux, uy, norm, ok = cache
    g = g.copy()
    g1, g2 = g[VMDRX], g[VMDRY]
    dot = ux * g1 + uy * g2
    g[VMDRX] = np.where(ok, (g1 - ux * dot) / norm, g1)
    g[VMDRY] = np.where(ok, (g2 - uy * dot) / norm, g2)
    return g


def pair_loss_and_grads(w, x_vals, target_vals, mask, cfg):
    """Loss and parameter gradients for one (state, next-state) pair."""
    x = np.asarray(x_vals, np.float64)
    target = np.asarray(target_vals, np.float64)

    k1, c1 = tendency(x, mask, w, linear_mode=cfg.linear_mode, want_cache=True)
    inner = x + (cfg.dt * k1 if cfg.heun_inner_dt else k1)
    k2, c2 = tendency(inner, mask, w, linear_mode=cfg.linear_mode,
                      want_cache=True)
    y_raw = x + 0.5 * cfg.dt * (k1 + k2)
    y_pred, rcache = _renorm_forward(y_raw, mask)

    rep = loss(y_pred, target, mask, cfg.lambda_spec, cfg.kmax)
    g_y = loss_grad(y_pred, target, mask, cfg.lambda_spec, cfg.kmax)
    g_yraw = _renorm_backward(g_y, rcache)

    half = 0.5 * cfg.dt
    grads2, g_inner = tendency_backward(half * g_yraw, w, c2)
    g_k1 = half * g_yraw + (cfg.dt * g_inner if cfg.heun_inner_dt else g_inner)
    grads1, _ = tendency_backward(g_k1, w, c1)

    grads = {k: grads1[k] + grads2[k] for k in grads1}
    return rep, grads


class _AdamState:
    """First/second gradient moments per parameter group.

    Complex groups keep complex first moments; the second moment tracks
    |g|^2 so the effective step stays real and positive.
    """

    def __init__(self, weights):
        self.m = {k: np.zeros_like(getattr(weights, k)) for k in weights.GROUPS}
        self.v = {k: np.zeros(getattr(weights, k).shape) for k in weights.GROUPS}
        self.t = 0

    def step(self, w, grads, cfg, lr):
        self.t += 1
        c1 = 1.0 - cfg.beta1 ** self.t
        c2 = 1.0 - cfg.beta2 ** self.t
        new = {}
        for name in w.GROUPS:
            g = grads[name]
            if cfg.weight_decay and name in w.DECAY_GROUPS:
                g = g + cfg.weight_decay * getattr(w, name)
            self.m[name] = cfg.beta1 * self.m[name] + (1.0 - cfg.beta1) * g
            self.v[name] = (cfg.beta2 * self.v[name]
                            + (1.0 - cfg.beta2) * (g * np.conj(g)).real)
            denom = np.sqrt(self.v[name] / c2) + cfg.adam_eps
            new[name] = getattr(w, name) - lr * (self.m[name] / c1) / denom
        return replace(w, **new)


def channel_stats(stack):
    """Per-channel mean/std over ocean cells and frames.

    The scale is floored both absolutely and relative to the channel mean
    so a near-constant channel cannot produce an extreme normalization
    gain that would amplify sensor or storage quantization noise.
    """
    vals = stack.values4d().astype(np.float64)
    ocean = vals[:, :, stack.grid.mask]               # (T, 4, n_ocean)
    mean = ocean.mean(axis=(0, 2))
    scale = np.maximum.reduce([ocean.std(axis=(0, 2)),
                               1e-3 * np.abs(mean),
                               np.full(mean.shape, 1e-6)])
    return mean, scale


def train(stack, cfg):
    """Fit the surrogate to a training stack; returns SurrogateWeights.

    Raises TrainingDiverged (carrying the last finite weights) if the loss
    goes non-finite.
    """
    if stack.ntime < 2:
        raise ValueError("training needs at least two frames")
    mask = stack.grid.mask
    vals = stack.values4d().astype(np.float64)
    mean, scale = channel_stats(stack)
    w = init_weights(cfg.kmax, cfg.width, cfg.seed,
                     norm_mean=mean, norm_scale=scale)

    rng = np.random.default_rng(cfg.seed)
    adam = _AdamState(w) if cfg.optimizer == "adam" else None
    n_pairs = stack.ntime - 1
    for epoch in range(cfg.epochs):
        # annealing the step to zero lets weakly-constrained parameters
        # settle instead of wandering at a fixed step size
        lr = cfg.step_size
        if cfg.lr_schedule == "linear":
            lr = cfg.step_size * (1.0 - epoch / cfg.epochs)
        order = rng.permutation(n_pairs)
        epoch_loss = 0.0
        for start in range(0, n_pairs, cfg.batch_size):
            batch = order[start:start + cfg.batch_size]
            acc = None
            batch_loss = 0.0
            for t in batch:
                rep, grads = pair_loss_and_grads(w, vals[t], vals[t + 1],
                                                 mask, cfg)
                batch_loss += rep.total
                acc = grads if acc is None else {k: acc[k] + grads[k]
                                                 for k in acc}
            batch_loss /= len(batch)
            if not np.isfinite(batch_loss):
                raise TrainingDiverged(
                    f"non-finite loss in epoch {epoch}", weights=w, step=epoch)
            avg = {k: v / len(batch) for k, v in acc.items()}
            prev = w
            if adam is not None:
                w = adam.step(w, avg, cfg, lr)
            else:
                w = w.updated(avg, lr, cfg.weight_decay)
            if not all(np.all(np.isfinite(getattr(w, k).view(float)))
                       for k in w.GROUPS):
                raise TrainingDiverged(
                    f"non-finite weights in epoch {epoch}",
                    weights=prev, step=epoch)
            epoch_loss += batch_loss * len(batch)
        log.info("epoch %d mean loss %.6g", epoch, epoch_loss / n_pairs)
    return w
