"""Seeded synthetic wave-field truth generator.

Frame 0 is a smooth random field: Gaussian bumps for wave height, a
spatially uniform direction field, and constant-plus-noise peak period.
Every later frame applies, in order, periodic semi-Lagrangian advection by
a constant velocity, Gaussian diffusion smoothing, and a fixed rotation of
the direction field.  The output is a pure function of (grid, params,
nframes): the same inputs always produce bit-identical stacks.

Periodic boundaries keep the dynamics conservative, which is what the
advection conservation tests rely on.  The grid mask only zeroes the
emitted frames; the internal state evolves on the full torus.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import gaussian_filter, map_coordinates

from .errors import GridError
from .grids import VHM0, VMDRX, VMDRY, VTPK, FieldStack, WaveFrame


@dataclass(frozen=True)
class SynthParams:
    """Parameters of the synthetic truth dynamics.

    velocity         advection velocity in cells per step, (rows, cols)
    diffusion        Gaussian smoothing sigma per step (cells), >= 0
    rotation         direction rotation in degrees per step
    base_height      mean VHM0 in metres
    height_amplitude bump amplitude; base_height - height_amplitude >= 0
    base_period      mean VTPK in seconds, > 0
    seed             RNG seed; all randomness flows from it
    noise_floor      std of a broadband VHM0 noise floor in metres (0 disables)
    """

    velocity: tuple = (1.0, 0.0)
    diffusion: float = 0.0
    rotation: float = 0.0
    base_height: float = 2.0
    height_amplitude: float = 1.0
    base_period: float = 8.0
    seed: int = 0
    noise_floor: float = 1e-3

    def __post_init__(self):
        if self.diffusion < 0:
            raise GridError("diffusion must be >= 0")
        if self.base_height - self.height_amplitude < 0:
            raise GridError("base_height - height_amplitude must be >= 0")
        if self.base_period <= 0:
            raise GridError("base_period must be positive")
        if self.noise_floor < 0:
            raise GridError("noise_floor must be >= 0")


def _periodic_bumps(rng, nlat, nlon, n_bumps):
    """Sum of signed Gaussian bumps with periodic distance, peak-normalized."""
    rows = np.arange(nlat)[:, None]
    cols = np.arange(nlon)[None, :]
    fld = np.zeros((nlat, nlon))
    lo = max(2.0, min(nlat, nlon) / 16.0)
    hi = max(lo + 1.0, min(nlat, nlon) / 6.0)
    for _ in range(n_bumps):
        cr = rng.uniform(0, nlat)
        cc = rng.uniform(0, nlon)
        sigma = rng.uniform(lo, hi)
        amp = rng.uniform(-1.0, 1.0)
        dr = np.mod(rows - cr + nlat / 2.0, nlat) - nlat / 2.0
        dc = np.mod(cols - cc + nlon / 2.0, nlon) - nlon / 2.0
        fld += amp * np.exp(-(dr * dr + dc * dc) / (2.0 * sigma * sigma))
    peak = np.abs(fld).max()
    if peak > 0:
        fld /= peak
    return fld


def _advect(plane, velocity):
    """Periodic semi-Lagrangian step: sample upstream with bilinear wrap."""
    nlat, nlon = plane.shape
    rows = np.arange(nlat, dtype=np.float64)[:, None] - velocity[0]
    cols = np.arange(nlon, dtype=np.float64)[None, :] - velocity[1]
    coords = np.broadcast_arrays(rows, cols)
    return map_coordinates(plane, np.stack(coords), order=1, mode="grid-wrap")


def gen_synthetic(grid, params, nframes, step_seconds=10800, t0=0):
    """Generate a deterministic synthetic truth stack on ``grid``."""
    if nframes < 1:
        raise GridError("nframes must be >= 1")
    rng = np.random.default_rng(params.seed)
    nlat, nlon = grid.shape

    theta0 = rng.uniform(0.0, 360.0)
    n_bumps = max(4, (nlat * nlon) // 512)
    bumps = _periodic_bumps(rng, nlat, nlon, n_bumps)

    vhm0 = params.base_height + params.height_amplitude * bumps
    if params.noise_floor > 0:
        vhm0 = vhm0 + params.noise_floor * rng.standard_normal((nlat, nlon))
    vhm0 = np.maximum(vhm0, 0.0)

    # smoothing scale matches the height bumps so every channel occupies
    # the same low-wavenumber band
    period_noise = gaussian_filter(rng.standard_normal((nlat, nlon)),
                                   sigma=max(6.0, nlat / 12, nlon / 12),
                                   mode="wrap")
    vtpk = params.base_period * (1.0 + 0.05 * period_noise)
    vtpk = np.maximum(vtpk, 0.1 * params.base_period)

    state = np.empty((4, nlat, nlon), dtype=np.float64)
    state[VHM0] = vhm0
    rad0 = np.deg2rad(theta0)
    state[VMDRX] = np.sin(rad0)
    state[VMDRY] = np.cos(rad0)
    state[VTPK] = vtpk

    def emit(t_index, st):
        vals = st.astype(np.float32)
        vals[:, ~grid.mask] = 0.0
        return WaveFrame(t0 + t_index * step_seconds, vals)

    frames = [emit(0, state)]
    rot = np.deg2rad(params.rotation)
    cr, sr = np.cos(rot), np.sin(rot)
    for t in range(1, nframes):
        for c in range(4):
            state[c] = _advect(state[c], params.velocity)
        if params.diffusion > 0:
            for c in range(4):
                state[c] = gaussian_filter(state[c], sigma=params.diffusion,
                                           mode="wrap")
        # rotate the direction angle by `rotation` degrees
        vx, vy = state[VMDRX].copy(), state[VMDRY].copy()
        state[VMDRX] = vx * cr + vy * sr
        state[VMDRY] = vy * cr - vx * sr
        frames.append(emit(t, state))

    return FieldStack(grid, frames, step_seconds)
