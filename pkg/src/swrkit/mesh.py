"""Navigation mesh over ocean cells, constraint rasterization, and snapping.

The mesh connects ocean cell centers with king moves (8-connectivity) and
optionally knight moves (16-connectivity). Knight moves are only added when
both cells the straight center-to-center segment passes through are ocean,
so routes cannot cut corners across land. Edge lengths are great-circle
distances in nautical miles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import FormatError, GridError, SnapError
from .geo import haversine_nm, initial_bearing_deg
from .grids import GeoGrid

_KING = ((-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1))
_KNIGHT = ((-2, -1), (-2, 1), (-1, -2), (-1, 2), (1, -2), (1, 2), (2, -1), (2, 1))


def _knight_intermediates(di, dj):
    """The two cells a knight-move segment crosses between its endpoints."""
    if abs(dj) == 2:
        sj = 1 if dj > 0 else -1
        return (0, sj), (di, sj)
    si = 1 if di > 0 else -1
    return (si, 0), (si, dj)


@dataclass(eq=False)
class NavMesh:
    """Directed graph of ocean cells in CSR form.

    nodes holds the flat cell index (i * nlon + j) of every ocean cell in
    ascending order; edges out of node position p live in the half-open
    range indptr[p]:indptr[p + 1]. mid_cell is the flat index of the cell
    containing the edge's geometric midpoint, used for wave sampling.
    """

    grid: GeoGrid
    connectivity: int
    nodes: np.ndarray
    node_lat: np.ndarray
    node_lon: np.ndarray
    indptr: np.ndarray
    to_node: np.ndarray
    distance_nm: np.ndarray
    heading_deg: np.ndarray
    mid_cell: np.ndarray
    cell_to_node: np.ndarray

    @property
    def n_nodes(self):
        return int(self.nodes.size)

    @property
    def n_edges(self):
        return int(self.to_node.size)

    def edges_from(self, p):
        """Edge index range for node position p."""
        return range(int(self.indptr[p]), int(self.indptr[p + 1]))

    def node_position(self, flat_cell):
        """Node position for a flat cell index, or -1 on land."""
        return int(self.cell_to_node[flat_cell])


def build_mesh(grid, connectivity=16):
    """Build the navigation mesh for a grid.

    connectivity 8 uses king moves only; 16 adds knight moves whose two
    crossed cells are both ocean.
    """
    if connectivity not in (8, 16):
        raise ValueError("connectivity must be 8 or 16")
    mask = grid.mask
    if not mask.any():
        raise GridError("grid has no ocean cells")
    nlat, nlon = grid.shape
    flat = np.flatnonzero(mask.ravel()).astype(np.int64)
    cell_to_node = np.full(nlat * nlon, -1, dtype=np.int64)
    cell_to_node[flat] = np.arange(flat.size)
    lats = grid.cell_lats()
    lons = grid.cell_lons()

    offsets = _KING if connectivity == 8 else _KING + _KNIGHT
    indptr = [0]
    to_node = []
    dist = []
    head = []
    mid = []
    for cell in flat:
        i, j = divmod(int(cell), nlon)
        for di, dj in offsets:
            ii, jj = i + di, j + dj
            if not (0 <= ii < nlat and 0 <= jj < nlon) or not mask[ii, jj]:
                continue
            if abs(di) + abs(dj) == 3:
                (ai, aj), (bi, bj) = _knight_intermediates(di, dj)
                if not (mask[i + ai, j + aj] and mask[i + bi, j + bj]):
                    continue
            to_node.append(cell_to_node[ii * nlon + jj])
            dist.append(haversine_nm(lats[i], lons[j], lats[ii], lons[jj]))
            head.append(initial_bearing_deg(lats[i], lons[j], lats[ii], lons[jj]))
            mi, mj = grid.nearest_cell((lats[i] + lats[ii]) / 2.0,
                                       (lons[j] + lons[jj]) / 2.0)
            mid.append(mi * nlon + mj)
        indptr.append(len(to_node))

    mesh = NavMesh(
        grid=grid,
        connectivity=connectivity,
        nodes=flat,
        node_lat=lats[flat // nlon],
        node_lon=lons[flat % nlon],
        indptr=np.asarray(indptr, dtype=np.int64),
        to_node=np.asarray(to_node, dtype=np.int64),
        distance_nm=np.asarray(dist, dtype=np.float64),
        heading_deg=np.asarray(head, dtype=np.float64),
        mid_cell=np.asarray(mid, dtype=np.int64),
        cell_to_node=cell_to_node,
    )
    for arr in (mesh.nodes, mesh.node_lat, mesh.node_lon, mesh.indptr,
                mesh.to_node, mesh.distance_nm, mesh.heading_deg,
                mesh.mid_cell, mesh.cell_to_node):
        arr.setflags(write=False)
    return mesh


@dataclass(eq=False)
class ConstraintField:
    """Blocked-cell plane rasterized from lat/lon polygon rings."""

    polygons: tuple
    blocked: np.ndarray

    def blocked_nodes(self, mesh):
        """Boolean array over mesh node positions."""
        return self.blocked.ravel()[mesh.nodes]


def _even_odd_inside(grid, ring):
    """Even-odd containment of every cell center in one closed ring."""
    py = grid.cell_lats()[:, None]
    px = grid.cell_lons()[None, :]
    inside = np.zeros(grid.shape, dtype=bool)
    n = len(ring)
    for k in range(n):
        y1, x1 = ring[k]
        y2, x2 = ring[(k + 1) % n]
        if y1 == y2:
            continue
        crosses = (y1 > py) != (y2 > py)
        x_int = (x2 - x1) * (py - y1) / (y2 - y1) + x1
        inside ^= crosses & (px < x_int)
    return inside


def clean_polygons(polygons):
    """Validate lat/lon polygon documents into vertex tuples.

    Each polygon is a sequence of [lat, lon] pairs; a repeated closing
    vertex is dropped, and at least three distinct vertices must remain
    (the same rule the rasterizer applies). Raises FormatError with the
    offending polygon's index.
    """
    cleaned = []
    for i, poly in enumerate(polygons):
        try:
            pts = [(float(v[0]), float(v[1])) for v in poly]
            sane = all(len(v) == 2 for v in poly)
        except (TypeError, ValueError, IndexError, KeyError):
            sane = False
        if not sane:
            raise FormatError("polygon %d: vertices must be [lat, lon] pairs"
                              % i)
        if not all(math.isfinite(a) and math.isfinite(b) for a, b in pts):
            raise FormatError("polygon %d: non-finite vertex" % i)
        if len(pts) > 1 and pts[0] == pts[-1]:
            pts = pts[:-1]
        if len(pts) < 3:
            raise FormatError("polygon %d: need at least 3 vertices" % i)
        cleaned.append(tuple(pts))
    return tuple(cleaned)


def rasterize_constraints(grid, polygons):
    """Rasterize polygon rings to a blocked-cell plane.

    A cell is blocked when its center lies inside any ring under the
    even-odd rule; self-crossing lasso rings therefore exclude their
    overlap lobes. Rings may repeat their first vertex at the end; after
    dropping that repeat each ring needs at least 3 vertices.
    """
    blocked = np.zeros(grid.shape, dtype=bool)
    rings = []
    for poly in polygons:
        ring = [(float(lat), float(lon)) for lat, lon in poly]
        if len(ring) >= 2 and ring[0] == ring[-1]:
            ring = ring[:-1]
        if len(ring) < 3:
            raise ValueError("degenerate polygon: need at least 3 vertices")
        ring = tuple(ring)
        rings.append(ring)
        blocked |= _even_odd_inside(grid, ring)
    return ConstraintField(polygons=tuple(rings), blocked=blocked)


def snap_to_node(mesh, lat, lon, label="point", max_cells=5):
    """Snap a lat/lon to the nearest ocean node within max_cells cells.

    Nearness is Euclidean in cell units around the containing cell, ties
    broken by flat cell index. Raises SnapError ("<label> on land") when
    no ocean cell lies within the search window, and rejects points
    outside the grid's bounding box outright.
    """
    grid = mesh.grid
    nlat, nlon = grid.shape
    if not (grid.lat_min <= lat <= grid.lat_max
            and grid.lon_min <= lon <= grid.lon_max):
        raise SnapError(
            "%s (%.4f, %.4f) outside the grid coverage "
            "[%.2f, %.2f] x [%.2f, %.2f]"
            % (label, lat, lon, grid.lat_min, grid.lat_max,
               grid.lon_min, grid.lon_max))
    i0, j0 = grid.nearest_cell(lat, lon)
    best = None
    for di in range(-max_cells, max_cells + 1):
        ii = i0 + di
        if not 0 <= ii < nlat:
            continue
        for dj in range(-max_cells, max_cells + 1):
            jj = j0 + dj
            if not 0 <= jj < nlon or not grid.mask[ii, jj]:
                continue
            key = (di * di + dj * dj, ii * nlon + jj)
            if best is None or key < best:
                best = key
    if best is None:
        raise SnapError(
            "%s on land: no ocean cell within %d cells of (%.4f, %.4f)"
            % (label, max_cells, lat, lon))
    return int(mesh.cell_to_node[best[1]])
