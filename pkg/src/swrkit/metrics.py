"""Forecast skill metrics, spectral diagnostics, and skill experiments.

Skill is measured against a climatology (per-cell mean of a reference
stack) for the anomaly correlation, against truth directly for the
normalized RMSE and the directional cosine, and persistence (the frozen
initial frame) provides the baseline every forecast must beat.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .assimilate import sample_observations
from .errors import DegenerateAnomalyError, GridError
from .grids import VHM0, VMDRX, VMDRY, WaveFrame
from .stepping import RolloutConfig, persistence_forecast, rollout


def acc(forecast, truth, climatology, mask):
    """Anomaly correlation of wave height over ocean cells.

    Pearson correlation between (forecast - climatology) and
    (truth - climatology). Raises DegenerateAnomalyError when either
    anomaly has zero variance (e.g. the forecast equals climatology).
    """
    if not mask.any():
        raise GridError("empty ocean mask")
    f = forecast.values[VHM0][mask].astype(np.float64)
    t = truth.values[VHM0][mask].astype(np.float64)
    c = climatology.values[VHM0][mask].astype(np.float64)
    fa = f - c
    ta = t - c
    fa = fa - fa.mean()
    ta = ta - ta.mean()
    sf = float(np.sqrt(np.sum(fa * fa)))
    st = float(np.sqrt(np.sum(ta * ta)))
    if sf == 0.0 or st == 0.0:
        raise DegenerateAnomalyError("degenerate anomaly: zero variance over ocean")
    return float(np.sum(fa * ta) / (sf * st))


def cosine_direction(pred, truth, mask):
    """Mean cosine between the two direction fields over ocean cells."""
    if not mask.any():
        raise GridError("empty ocean mask")
    px = pred.values[VMDRX][mask].astype(np.float64)
    py = pred.values[VMDRY][mask].astype(np.float64)
    tx = truth.values[VMDRX][mask].astype(np.float64)
    ty = truth.values[VMDRY][mask].astype(np.float64)
    return float(np.mean(px * tx + py * ty))


def nrmse(pred, truth, mask):
    """Wave-height RMSE over ocean cells, normalized by the truth's std."""
    if not mask.any():
        raise GridError("empty ocean mask")
    p = pred.values[VHM0][mask].astype(np.float64)
    t = truth.values[VHM0][mask].astype(np.float64)
    sigma = float(np.std(t))
    if sigma == 0.0:
        raise ValueError("zero truth variance over ocean cells")
    err = p - t
    return float(np.sqrt(np.mean(err * err)) / sigma)


def spectral_energy(frame, kmax=100, channel=VHM0):
    """Energy per integer-wavenumber annulus of one channel.

    Returns (k0_energy, bins) where bins[k - 1] collects the power with
    radius in [k - 0.5, k + 0.5). Power is |fft|^2 / (nlat * nlon), so the
    k=0 term plus all annuli sum to the grid sum of squares (bins past the
    grid's highest radius are zero).
    """
    x = frame.values[channel].astype(np.float64)
    n1, n2 = x.shape
    spec = np.fft.fft2(x)
    power = (spec.real * spec.real + spec.imag * spec.imag) / (n1 * n2)
    kx = np.fft.fftfreq(n1) * n1
    ky = np.fft.fftfreq(n2) * n2
    radius = np.sqrt(kx[:, None] ** 2 + ky[None, :] ** 2)
    which = np.floor(radius + 0.5).astype(np.int64)
    sums = np.bincount(which.ravel(), weights=power.ravel(),
                       minlength=kmax + 1)
    bins = np.zeros(kmax, dtype=np.float64)
    avail = min(kmax, sums.size - 1)
    bins[:avail] = sums[1:avail + 1]
    return float(sums[0]), bins


def climatology_frame(stack):
    """Per-cell, per-channel time mean of a stack, as a frame at its t0.

    Only the wave-height channel feeds the anomaly correlation; the
    direction channels are plain means and not re-normalized.
    """
    mean = np.mean([fr.values for fr in stack.frames], axis=0)
    return WaveFrame(stack.t0, mean.astype(np.float32))


@dataclass(frozen=True)
class SkillCurve:
    """One metric as a function of lead steps, with an optional spread."""

    metric: str
    lead_steps: tuple
    values: tuple
    std: tuple | None = None

    def __post_init__(self):
        if len(self.lead_steps) != len(self.values):
            raise ValueError("lead_steps and values must have equal length")
        if self.std is not None and len(self.std) != len(self.values):
            raise ValueError("std must match values in length")
        if self.metric in ("acc", "cosine"):
            # direction channels are float32, so raw dot products can sit
            # above 1 by the unit-circle quantization error
            if any(abs(v) > 1.0 + 1e-6 for v in self.values):
                raise ValueError("%s values must lie in [-1, 1]" % self.metric)


@dataclass
class SkillConfig:
    """Controls for a skill experiment.

    climatology defaults to the evaluated stack's own time mean; pass the
    training stack's mean to score against independent statistics.
    da_schedules maps a variant name to (every_steps, observed fraction);
    each such variant reruns the rollout assimilating truth-sampled
    observations at every multiple of every_steps.
    """

    leads: int = 10
    climatology: WaveFrame | None = None
    dt: float = 1.0
    linear_mode: bool = False
    heun_inner_dt: bool = False
    da_schedules: dict = field(default_factory=dict)
    obs_seed: int = 0


METRIC_NAMES = ("acc", "cosine", "nrmse")


def _score_stack(forecast, truth, start, leads, climo, mask):
    out = {m: [] for m in METRIC_NAMES}
    for lead in range(leads + 1):
        pred = forecast.frames[lead]
        target = truth.frames[start + lead]
        out["acc"].append(acc(pred, target, climo, mask))
        out["cosine"].append(cosine_direction(pred, target, mask))
        out["nrmse"].append(nrmse(pred, target, mask))
    return out


def _window_starts(ntime, leads, n_inits):
    last = ntime - 1 - leads
    if last < 0:
        raise ValueError("truth stack too short for the requested lead range")
    if n_inits == 1:
        return [0]
    starts = np.unique(np.round(np.linspace(0, last, n_inits)).astype(int))
    if starts.size < n_inits:
        raise ValueError("truth stack too short for %d initializations" % n_inits)
    return [int(s) for s in starts]


def skill_experiment(truth, weights, n_inits, cfg=None):
    """Score rollouts, persistence, and assimilation variants against truth.

    Runs a single-shot rollout and a persistence forecast from n_inits
    windows spread over the truth stack, plus one extra rollout per
    configured assimilation schedule, and aggregates each metric's mean
    and spread across the windows. Returns
    {variant: {metric: SkillCurve}} with variants "model", "persistence",
    and the da_schedules keys.
    """
    cfg = cfg or SkillConfig()
    grid = truth.grid
    mask = grid.mask
    climo = cfg.climatology or climatology_frame(truth)
    starts = _window_starts(truth.ntime, cfg.leads, n_inits)

    variants = ["model", "persistence"] + list(cfg.da_schedules)
    scores = {v: {m: [] for m in METRIC_NAMES} for v in variants}
    for k, s in enumerate(starts):
        init = truth.frames[s]
        base_cfg = RolloutConfig(steps=cfg.leads, dt=cfg.dt,
                                 step_seconds=truth.step_seconds,
                                 linear_mode=cfg.linear_mode,
                                 heun_inner_dt=cfg.heun_inner_dt)
        try:
            model = rollout(init, grid, weights, base_cfg)
        except GridError as e:
            raise GridError("initialization %d (frame %d): %s" % (k, s, e)) from e
        pers = persistence_forecast(init, grid, cfg.leads, truth.step_seconds)
        runs = {"model": model, "persistence": pers}
        for name, (every, fraction) in cfg.da_schedules.items():
            schedule = {}
            for step in range(int(every), cfg.leads + 1, int(every)):
                schedule[step] = sample_observations(
                    truth.frames[s + step], grid, fraction,
                    seed=cfg.obs_seed + 104729 * k + step)
            da_cfg = RolloutConfig(steps=cfg.leads, dt=cfg.dt,
                                   step_seconds=truth.step_seconds,
                                   linear_mode=cfg.linear_mode,
                                   heun_inner_dt=cfg.heun_inner_dt,
                                   assimilation_schedule=schedule)
            try:
                runs[name] = rollout(init, grid, weights, da_cfg)
            except GridError as e:
                raise GridError("initialization %d (frame %d, %s): %s"
                                % (k, s, name, e)) from e
        for name, forecast in runs.items():
            got = _score_stack(forecast, truth, s, cfg.leads, climo, mask)
            for m in METRIC_NAMES:
                scores[name][m].append(got[m])

    leads = tuple(range(cfg.leads + 1))
    out = {}
    for name in variants:
        out[name] = {}
        for m in METRIC_NAMES:
            arr = np.asarray(scores[name][m], dtype=np.float64)
            out[name][m] = SkillCurve(
                metric=m,
                lead_steps=leads,
                values=tuple(float(v) for v in arr.mean(axis=0)),
                std=tuple(float(v) for v in arr.std(axis=0)),
            )
    return out


def score_forecast(forecast, truth, climatology=None):
    """Per-lead skill of a stored forecast stack against a truth stack.

    Frames align by timestamp: the forecast must share the truth's grid
    and step and start on one of its frames, and the truth must cover the
    whole forecast window. Returns {"forecast": {metric: SkillCurve}},
    the same shape skill_experiment produces, so the CSV and JSON
    emitters apply unchanged.
    """
    if forecast.grid != truth.grid:
        raise GridError("forecast and truth are on different grids")
    if forecast.step_seconds != truth.step_seconds:
        raise GridError("forecast and truth have different steps")
    offset = forecast.t0 - truth.t0
    if offset % truth.step_seconds != 0:
        raise GridError("forecast start is not on a truth frame")
    start = offset // truth.step_seconds
    leads = forecast.ntime - 1
    if start < 0 or start + leads >= truth.ntime:
        raise GridError("truth does not cover the forecast window")
    climo = climatology or climatology_frame(truth)
    got = _score_stack(forecast, truth, start, leads, climo, truth.grid.mask)
    lead_steps = tuple(range(leads + 1))
    return {"forecast": {m: SkillCurve(metric=m, lead_steps=lead_steps,
                                       values=tuple(got[m]))
                         for m in METRIC_NAMES}}


def skill_to_csv(result):
    """CSV rows `metric,lead,mean,std`, metric qualified as variant.metric."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["metric", "lead", "mean", "std"])
    for variant in sorted(result):
        for m in METRIC_NAMES:
            curve = result[variant][m]
            for i, lead in enumerate(curve.lead_steps):
                std = "" if curve.std is None else repr(curve.std[i])
                writer.writerow(["%s.%s" % (variant, m), lead,
                                 repr(curve.values[i]), std])
    return buf.getvalue()


def skill_to_json(result):
    """Plot-ready nested dict mirroring the CSV content."""
    return {
        variant: {
            m: {
                "lead_steps": list(curve.lead_steps),
                "values": list(curve.values),
                "std": list(curve.std) if curve.std is not None else None,
            }
            for m, curve in curves.items()
        }
        for variant, curves in result.items()
    }
