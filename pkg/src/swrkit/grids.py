"""Geographic grids and wave-field containers.

Core data model shared by every other module:

* ``GeoGrid``    -- a regular lat/lon cell grid with an ocean/land mask.
* ``WaveFrame``  -- one time slice holding the four wave channels.
* ``FieldStack`` -- a uniformly spaced sequence of frames on one grid.

Channel layout (fixed order):

    0  VHM0   significant wave height, metres
    1  VMDRX  sin of mean wave direction (direction waves come from)
    2  VMDRY  cos of mean wave direction
    3  VTPK   peak wave period, seconds

Directions are degrees clockwise from north.  Land cells hold sentinel 0
in every channel.  Frame payloads are float32; numerical kernels upcast
to float64 internally.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import GridError

CHANNELS = ("VHM0", "VMDRX", "VMDRY", "VTPK")
N_CHANNELS = 4

# channel indices by name, handy for callers
VHM0, VMDRX, VMDRY, VTPK = 0, 1, 2, 3


def encode_direction(theta_deg):
    """Encode direction angles (deg clockwise from north) as (sin, cos) pairs.

    Returns two arrays (x, y) with x^2 + y^2 = 1.
    """
    rad = np.deg2rad(np.asarray(theta_deg, dtype=np.float64))
    return np.sin(rad), np.cos(rad)


def decode_direction(x, y):
    """Recover direction angles in [0, 360) from (sin, cos) components."""
    deg = np.rad2deg(np.arctan2(np.asarray(x, dtype=np.float64),
                                np.asarray(y, dtype=np.float64)))
    return np.mod(deg, 360.0)


def renormalize_directions(values, mask, eps=1e-12):
    """Scale the direction channels back to unit length on ocean cells.

    ``values`` is a (4, nlat, nlon) array, modified out of place.  Cells
    where the vector norm is below ``eps`` are left untouched (there is no
    direction to recover).  Land cells are never touched.
    """
    out = np.array(values, copy=True)
    vx = out[VMDRX].astype(np.float64)
    vy = out[VMDRY].astype(np.float64)
    norm = np.sqrt(vx * vx + vy * vy)
    ok = mask & (norm > eps)
    vx = np.where(ok, vx / np.where(ok, norm, 1.0), vx)
    vy = np.where(ok, vy / np.where(ok, norm, 1.0), vy)
    out[VMDRX] = vx.astype(out.dtype, copy=False)
    out[VMDRY] = vy.astype(out.dtype, copy=False)
    return out


@dataclass(frozen=True, eq=False)
class GeoGrid:
    """Regular lat/lon grid of cells with an ocean mask.

    ``mask`` is (nlat, nlon) boolean, True on ocean.  Values are registered
    at cell centers: cell (i, j) sits at lat_min + (i + 0.5) * dlat.
    """

    lat_min: float
    lat_max: float
    lon_min: float
    lon_max: float
    nlat: int
    nlon: int
    mask: np.ndarray

    def __post_init__(self):
        if not (self.lat_min < self.lat_max and self.lon_min < self.lon_max):
            raise GridError("grid bounds must satisfy min < max")
        if self.nlat < 2 or self.nlon < 2:
            raise GridError("grid needs at least 2 cells per axis")
        m = np.asarray(self.mask, dtype=bool)
        if m.shape != (self.nlat, self.nlon):
            raise GridError(f"mask shape {m.shape} != ({self.nlat}, {self.nlon})")
        object.__setattr__(self, "mask", m)

    @property
    def shape(self):
        return (self.nlat, self.nlon)

    @property
    def dlat(self):
        return (self.lat_max - self.lat_min) / self.nlat

    @property
    def dlon(self):
        return (self.lon_max - self.lon_min) / self.nlon

    @property
    def n_ocean(self):
        return int(self.mask.sum())

    def cell_lats(self):
        return self.lat_min + (np.arange(self.nlat) + 0.5) * self.dlat

    def cell_lons(self):
        return self.lon_min + (np.arange(self.nlon) + 0.5) * self.dlon

    def cell_center(self, i, j):
        return (self.lat_min + (i + 0.5) * self.dlat,
                self.lon_min + (j + 0.5) * self.dlon)

    def nearest_cell(self, lat, lon):
        """Index of the cell whose center is nearest (clipped to the grid)."""
        i = int(math.floor((lat - self.lat_min) / self.dlat))
        j = int(math.floor((lon - self.lon_min) / self.dlon))
        return (min(max(i, 0), self.nlat - 1), min(max(j, 0), self.nlon - 1))

    def __eq__(self, other):
        if not isinstance(other, GeoGrid):
            return NotImplemented
        return (self.nlat == other.nlat and self.nlon == other.nlon
                and self.lat_min == other.lat_min and self.lat_max == other.lat_max
                and self.lon_min == other.lon_min and self.lon_max == other.lon_max
                and np.array_equal(self.mask, other.mask))


def make_grid(lat_range, lon_range, nlat, nlon, land_boxes=()):
    """Build a GeoGrid, all ocean except optional rectangular land boxes.

    Each land box is (lat_lo, lat_hi, lon_lo, lon_hi); cells whose centers
    fall inside any box become land.
    """
    mask = np.ones((nlat, nlon), dtype=bool)
    grid = GeoGrid(lat_range[0], lat_range[1], lon_range[0], lon_range[1],
                   nlat, nlon, mask)
    if land_boxes:
        lats = grid.cell_lats()[:, None]
        lons = grid.cell_lons()[None, :]
        for lat_lo, lat_hi, lon_lo, lon_hi in land_boxes:
            inside = ((lats >= lat_lo) & (lats <= lat_hi)
                      & (lons >= lon_lo) & (lons <= lon_hi))
            mask = mask & ~inside
        grid = GeoGrid(lat_range[0], lat_range[1], lon_range[0], lon_range[1],
                       nlat, nlon, mask)
    return grid


@dataclass(eq=False)
class WaveFrame:
    """One time slice: epoch-second timestamp plus (4, nlat, nlon) float32 values."""

    timestamp: int
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.ndim != 3 or v.shape[0] != N_CHANNELS:
            raise GridError(f"frame values must be (4, nlat, nlon), got {v.shape}")
        self.values = np.ascontiguousarray(v, dtype=np.float32)
        self.timestamp = int(self.timestamp)

    def channel(self, name):
        return self.values[CHANNELS.index(name)]

    def validate(self, grid, physical=True):
        """Check frame invariants against a grid; raises GridError.

        Structural checks always run: shape, finiteness, land sentinel.
        With ``physical=True`` also requires VHM0 >= 0, VTPK > 0 and unit
        direction vectors (within 1e-6) on ocean cells.
        """
        if self.values.shape[1:] != grid.shape:
            raise GridError("frame shape does not match grid")
        if not np.all(np.isfinite(self.values)):
            raise GridError("frame contains non-finite values")
        land = ~grid.mask
        if land.any() and np.any(self.values[:, land] != 0.0):
            raise GridError("land cells must hold sentinel 0")
        if physical and grid.mask.any():
            oc = grid.mask
            if np.any(self.values[VHM0][oc] < 0):
                raise GridError("VHM0 negative on ocean cells")
            if np.any(self.values[VTPK][oc] <= 0):
                raise GridError("VTPK non-positive on ocean cells")
            norm = np.hypot(self.values[VMDRX][oc].astype(np.float64),
                            self.values[VMDRY][oc].astype(np.float64))
            if np.any(np.abs(norm - 1.0) > 1e-6):
                raise GridError("direction vectors not unit length on ocean")

    def __eq__(self, other):
        if not isinstance(other, WaveFrame):
            return NotImplemented
        return (self.timestamp == other.timestamp
                and np.array_equal(self.values, other.values))


@dataclass(eq=False)
class FieldStack:
    """Uniformly spaced frames on one grid.

    ``step_seconds`` is the spacing; frame timestamps must equal
    t0 + i * step_seconds exactly.
    """

    grid: GeoGrid
    frames: list = field(default_factory=list)
    step_seconds: int = 10800

    def __post_init__(self):
        if not self.frames:
            raise GridError("a field stack needs at least one frame")
        self.step_seconds = int(self.step_seconds)
        if self.step_seconds <= 0:
            raise GridError("step_seconds must be positive")
        t0 = self.frames[0].timestamp
        for i, fr in enumerate(self.frames):
            if fr.values.shape[1:] != self.grid.shape:
                raise GridError("frame shape does not match grid")
            if fr.timestamp != t0 + i * self.step_seconds:
                raise GridError("frame timestamps must be uniformly spaced")

    @property
    def t0(self):
        return self.frames[0].timestamp

    @property
    def ntime(self):
        return len(self.frames)

    def times(self):
        return [fr.timestamp for fr in self.frames]

    def values4d(self):
        """Stacked (ntime, 4, nlat, nlon) float32 view of all frames."""
        return np.stack([fr.values for fr in self.frames], axis=0)

    def frame_index_at(self, t):
        """Index of the frame nearest to epoch time t, clipped to range."""
        idx = int(round((t - self.t0) / self.step_seconds))
        return min(max(idx, 0), self.ntime - 1)

    def __eq__(self, other):
        if not isinstance(other, FieldStack):
            return NotImplemented
        return (self.grid == other.grid
                and self.step_seconds == other.step_seconds
                and len(self.frames) == len(other.frames)
                and all(a == b for a, b in zip(self.frames, other.frames)))


def regrid(stack, nlat, nlon):
    """Resample a stack to a new resolution on the same bounding box.

    Channel values use bilinear interpolation between cell centers, clamped
    at the boundary (no extrapolation, so global min/max are preserved).
    The mask is resampled by nearest neighbor.  Direction vectors are
    renormalized on ocean cells after interpolation; land keeps sentinel 0.
    """
    src = stack.grid
    tgt_plain = GeoGrid(src.lat_min, src.lat_max, src.lon_min, src.lon_max,
                        nlat, nlon, np.ones((nlat, nlon), dtype=bool))

    # fractional source indices of target cell centers
    fi = (tgt_plain.cell_lats() - src.lat_min) / src.dlat - 0.5
    fj = (tgt_plain.cell_lons() - src.lon_min) / src.dlon - 0.5
    fi = np.clip(fi, 0.0, src.nlat - 1.0)
    fj = np.clip(fj, 0.0, src.nlon - 1.0)

    mask = src.mask[np.clip(np.round(fi).astype(int), 0, src.nlat - 1)[:, None],
                    np.clip(np.round(fj).astype(int), 0, src.nlon - 1)[None, :]]
    tgt = GeoGrid(src.lat_min, src.lat_max, src.lon_min, src.lon_max,
                  nlat, nlon, mask)

    i0 = np.floor(fi).astype(int)
    j0 = np.floor(fj).astype(int)
    i1 = np.minimum(i0 + 1, src.nlat - 1)
    j1 = np.minimum(j0 + 1, src.nlon - 1)
    wi = (fi - i0)[:, None]
    wj = (fj - j0)[None, :]

    frames = []
    for fr in stack.frames:
        vals = fr.values.astype(np.float64)
        a = vals[:, i0[:, None], j0[None, :]]
        b = vals[:, i0[:, None], j1[None, :]]
        c = vals[:, i1[:, None], j0[None, :]]
        d = vals[:, i1[:, None], j1[None, :]]
        out = (a * (1 - wi) * (1 - wj) + b * (1 - wi) * wj
               + c * wi * (1 - wj) + d * wi * wj)
        out = renormalize_directions(out, mask)
        out[:, ~mask] = 0.0
        frames.append(WaveFrame(fr.timestamp, out.astype(np.float32)))
    return FieldStack(tgt, frames, stack.step_seconds)
