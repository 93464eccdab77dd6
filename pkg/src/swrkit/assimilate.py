"""Sparse-observation assimilation by Gaussian innovation spreading.

Each observation is snapped to its nearest grid cell (land-snapped
observations are dropped with a warning).  For a cell g and observations i
with snapped cells g_i, innovations y_i - x_f(g_i) spread with Gaussian
weights in cell units:

    w_i(g) = exp(-d(g, g_i)^2 / (2 sigma^2))
    D(g)   = sum_i w_i(g)                      (kernel density)
    I(g)   = sum_i w_i(g) (y_i - x_f(g_i)) / max(D(g), 1e-12)
    x_a(g) = x_f(g) + min(D(g), cap) * I(g)

so an isolated observation corrects its own cell exactly (w = D = 1) and
its influence falls off with the kernel; the min(D, cap) factor keeps
dense clusters from overshooting.  Updates apply per channel; direction
channels are renormalized afterwards and land cells keep sentinel 0.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass

import numpy as np

from .grids import CHANNELS, WaveFrame, renormalize_directions

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Observation:
    lat: float
    lon: float
    time: int
    channel: str
    value: float


@dataclass(frozen=True)
class AssimConfig:
    bandwidth_cells: float = 1.5
    density_cap: float = 1.0


def rbf_assimilate(frame, grid, observations, cfg=None):
    """Blend observations into a forecast frame; returns a new WaveFrame.

    Observation times are expected to lie within half a step of the frame;
    that is the caller's contract and is not re-checked here.
    """
    cfg = cfg or AssimConfig()
    x = frame.values.astype(np.float64)

    by_channel = {name: [] for name in CHANNELS}
    for ob in observations:
        if ob.channel not in by_channel:
            raise ValueError(f"unknown observation channel {ob.channel!r}")
        i, j = grid.nearest_cell(ob.lat, ob.lon)
        if not grid.mask[i, j]:
            log.warning("dropping observation at (%.3f, %.3f): snapped to land",
                        ob.lat, ob.lon)
            continue
        by_channel[ob.channel].append((i, j, ob.value))

    oc_r, oc_c = np.nonzero(grid.mask)
    two_sigma2 = 2.0 * cfg.bandwidth_cells ** 2
    for ci, name in enumerate(CHANNELS):
        obs = by_channel[name]
        if not obs:
            continue
        rr = np.array([o[0] for o in obs], dtype=np.float64)
        cc = np.array([o[1] for o in obs], dtype=np.float64)
        vals = np.array([o[2] for o in obs], dtype=np.float64)
        innov = vals - x[ci, rr.astype(int), cc.astype(int)]

        d2 = ((oc_r[:, None] - rr[None, :]) ** 2
              + (oc_c[:, None] - cc[None, :]) ** 2)
        w = np.exp(-d2 / two_sigma2)
        density = w.sum(axis=1)
        spread = (w @ innov) / np.maximum(density, 1e-12)
        x[ci, oc_r, oc_c] += np.minimum(density, cfg.density_cap) * spread

    x = renormalize_directions(x, grid.mask)
    x[:, ~grid.mask] = 0.0
    return WaveFrame(frame.timestamp, x.astype(np.float32))


def sample_observations(frame, grid, fraction, seed, channels=CHANNELS):
    """Draw observations from a truth frame at a random subset of ocean cells.

    Picks round(fraction * n_ocean) distinct ocean cells without
    replacement and emits one observation per requested channel per cell.
    """
    if not 0.0 < fraction <= 1.0:
        raise ValueError("fraction must be in (0, 1]")
    rng = np.random.default_rng(seed)
    oc_r, oc_c = np.nonzero(grid.mask)
    n = int(round(fraction * len(oc_r)))
    picks = rng.choice(len(oc_r), size=n, replace=False)
    out = []
    for p in picks:
        i, j = int(oc_r[p]), int(oc_c[p])
        lat, lon = grid.cell_center(i, j)
        for name in channels:
            out.append(Observation(lat=lat, lon=lon, time=frame.timestamp,
                                   channel=name,
                                   value=float(frame.values[CHANNELS.index(name), i, j])))
    return out


def write_observations_csv(path, observations):
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["lat", "lon", "time", "channel", "value"])
        for ob in observations:
            wr.writerow([repr(ob.lat), repr(ob.lon), ob.time, ob.channel,
                         repr(ob.value)])


def read_observations_csv(path):
    out = []
    with open(path, newline="") as fh:
        rd = csv.DictReader(fh)
        for row in rd:
            out.append(Observation(lat=float(row["lat"]), lon=float(row["lon"]),
                                   time=int(row["time"]), channel=row["channel"],
                                   value=float(row["value"])))
    return out
