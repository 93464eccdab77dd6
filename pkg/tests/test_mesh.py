import math

import numpy as np
import pytest

from swrkit.errors import GridError, SnapError
from swrkit.geo import EARTH_RADIUS_M, METERS_PER_NM
from swrkit.grids import make_grid
from swrkit.mesh import build_mesh, rasterize_constraints, snap_to_node

_KING = ((-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1))
_KNIGHT = ((-2, -1), (-2, 1), (-1, -2), (-1, 2), (1, -2), (1, 2), (2, -1), (2, 1))


def _segment_cells(i, j, ii, jj, samples=801):
    """Cells crossed by the straight segment between two cell centers.

    Independent derivation of the corner-cutting rule: sample the segment
    densely and collect every cell it passes through, excluding endpoints.
    """
    cells = set()
    for t in np.linspace(0.0, 1.0, samples)[1:-1]:
        y = i + 0.5 + t * (ii - i)
        x = j + 0.5 + t * (jj - j)
        cells.add((int(math.floor(y)), int(math.floor(x))))
    cells.discard((i, j))
    cells.discard((ii, jj))
    return cells


def _oracle_edges(grid, connectivity):
    """Brute-force enumeration of the expected directed edge set."""
    mask = grid.mask
    nlat, nlon = grid.shape
    offsets = _KING if connectivity == 8 else _KING + _KNIGHT
    edges = set()
    for i in range(nlat):
        for j in range(nlon):
            if not mask[i, j]:
                continue
            for di, dj in offsets:
                ii, jj = i + di, j + dj
                if not (0 <= ii < nlat and 0 <= jj < nlon) or not mask[ii, jj]:
                    continue
                if abs(di) + abs(dj) == 3:
                    crossed = _segment_cells(i, j, ii, jj)
                    if not all(mask[c] for c in crossed):
                        continue
                edges.add(((i, j), (ii, jj)))
    return edges


def _mesh_edge_set(mesh):
    nlon = mesh.grid.nlon
    out = set()
    for p in range(mesh.n_nodes):
        src = divmod(int(mesh.nodes[p]), nlon)
        for e in mesh.edges_from(p):
            dst = divmod(int(mesh.nodes[int(mesh.to_node[e])]), nlon)
            out.add((src, dst))
    return out


def test_center_node_has_eight_neighbors():
    g = make_grid((0.0, 3.0), (0.0, 3.0), 3, 3)
    mesh = build_mesh(g, connectivity=8)
    p = mesh.node_position(1 * 3 + 1)
    assert len(list(mesh.edges_from(p))) == 8


def test_land_center_has_no_edges():
    g = make_grid((0.0, 3.0), (0.0, 3.0), 3, 3, land_boxes=[(1.0, 2.0, 1.0, 2.0)])
    mesh = build_mesh(g, connectivity=8)
    assert mesh.node_position(4) == -1
    assert mesh.n_nodes == 8
    # no edge can reference the land cell
    for e in range(mesh.n_edges):
        assert int(mesh.nodes[int(mesh.to_node[e])]) != 4


def test_edge_count_matches_enumeration_oracle_8():
    g = make_grid((0.0, 4.0), (0.0, 4.0), 4, 4)
    mesh = build_mesh(g, connectivity=8)
    oracle = _oracle_edges(g, 8)
    assert _mesh_edge_set(mesh) == oracle
    # closed form for an all-ocean n x n board of king moves
    n = 4
    assert mesh.n_edges == 8 * (n - 2) ** 2 + 20 * (n - 2) + 12 == len(oracle)


def test_random_masks_match_enumeration_oracle_16():
    for seed in range(6):
        rng = np.random.default_rng(seed)
        land = rng.random((6, 6)) < 0.3
        land[0, 0] = False
        boxes = []
        for i in range(6):
            for j in range(6):
                if land[i, j]:
                    boxes.append((float(i), float(i + 1), float(j), float(j + 1)))
        g = make_grid((0.0, 6.0), (0.0, 6.0), 6, 6, land_boxes=boxes)
        for conn in (8, 16):
            mesh = build_mesh(g, connectivity=conn)
            assert _mesh_edge_set(mesh) == _oracle_edges(g, conn), (seed, conn)


def test_knight_move_blocked_by_crossed_land():
    # the (1, 2) knight move from (0,0) crosses (0,1) and (1,1);
    # making (0,1) land must remove it while king moves survive
    g_open = make_grid((0.0, 3.0), (0.0, 4.0), 3, 4)
    g_cut = make_grid((0.0, 3.0), (0.0, 4.0), 3, 4, land_boxes=[(0.0, 1.0, 1.0, 2.0)])
    open_edges = _mesh_edge_set(build_mesh(g_open, connectivity=16))
    cut_edges = _mesh_edge_set(build_mesh(g_cut, connectivity=16))
    assert ((0, 0), (1, 2)) in open_edges
    assert ((0, 0), (1, 2)) not in cut_edges
    assert ((0, 0), (1, 1)) in cut_edges


def test_edge_lengths_and_headings():
    one_deg_nm = EARTH_RADIUS_M * math.pi / 180.0 / METERS_PER_NM
    g = make_grid((-1.0, 1.0), (-1.0, 1.0), 2, 2)  # centers at lat/lon -0.5, 0.5
    mesh = build_mesh(g, connectivity=8)
    p = mesh.node_position(0)  # cell (0, 0), center (-0.5, -0.5)
    for e in mesh.edges_from(p):
        dst = int(mesh.nodes[int(mesh.to_node[e])])
        assert mesh.distance_nm[e] > 0
        assert 0.0 <= mesh.heading_deg[e] < 360.0
        if dst == 1:  # due east along a parallel
            assert abs(mesh.distance_nm[e] - one_deg_nm * math.cos(math.radians(0.5))) < 1e-3
            assert abs(mesh.heading_deg[e] - 90.0) < 0.01
        if dst == 2:  # due north along a meridian
            assert abs(mesh.distance_nm[e] - one_deg_nm) < 1e-9
            assert abs(mesh.heading_deg[e] - 0.0) < 1e-9


def test_mid_cells_are_valid():
    g = make_grid((0.0, 5.0), (0.0, 5.0), 5, 5, land_boxes=[(2.0, 3.0, 2.0, 3.0)])
    mesh = build_mesh(g, connectivity=16)
    ncell = g.nlat * g.nlon
    assert np.all(mesh.mid_cell >= 0)
    assert np.all(mesh.mid_cell < ncell)
    # a due-east edge midpoint falls on the shared boundary and lands in
    # one of the two endpoint cells
    p = mesh.node_position(0)
    for e in mesh.edges_from(p):
        if int(mesh.nodes[int(mesh.to_node[e])]) == 1:
            assert int(mesh.mid_cell[e]) in (0, 1)


def test_build_mesh_rejects_bad_input():
    g = make_grid((0.0, 2.0), (0.0, 2.0), 2, 2, land_boxes=[(0.0, 2.0, 0.0, 2.0)])
    with pytest.raises(GridError):
        build_mesh(g, connectivity=8)
    g2 = make_grid((0.0, 2.0), (0.0, 2.0), 2, 2)
    with pytest.raises(ValueError):
        build_mesh(g2, connectivity=7)


# --- constraint rasterization ---


def _inside_by_vertical_ray(y, x, ring):
    """Even-odd containment via an upward ray (independent of the module,
    which casts its ray sideways)."""
    inside = False
    n = len(ring)
    for k in range(n):
        y1, x1 = ring[k]
        y2, x2 = ring[(k + 1) % n]
        if x1 == x2:
            continue
        if (x1 > x) != (x2 > x):
            y_int = (y2 - y1) * (x - x1) / (x2 - x1) + y1
            if y < y_int:
                inside = not inside
    return inside


def test_empty_polygon_list_blocks_nothing():
    g = make_grid((0.0, 8.0), (0.0, 8.0), 8, 8)
    cf = rasterize_constraints(g, [])
    assert not cf.blocked.any()
    assert cf.polygons == ()


def test_rectangle_blocks_exactly_nine_cells():
    g = make_grid((0.0, 8.0), (0.0, 8.0), 8, 8)
    rect = [(2.0, 2.0), (2.0, 5.0), (5.0, 5.0), (5.0, 2.0)]
    cf = rasterize_constraints(g, [rect])
    blocked = {(i, j) for i, j in zip(*np.nonzero(cf.blocked))}
    assert blocked == {(i, j) for i in (2, 3, 4) for j in (2, 3, 4)}


def test_closed_ring_accepted_and_degenerate_rejected():
    g = make_grid((0.0, 8.0), (0.0, 8.0), 8, 8)
    closed = [(2.0, 2.0), (2.0, 5.0), (5.0, 5.0), (5.0, 2.0), (2.0, 2.0)]
    cf = rasterize_constraints(g, [closed])
    assert int(cf.blocked.sum()) == 9
    with pytest.raises(ValueError):
        rasterize_constraints(g, [[(0.0, 0.0), (1.0, 1.0)]])
    with pytest.raises(ValueError):
        rasterize_constraints(g, [[(0.0, 0.0), (1.0, 1.0), (0.0, 0.0)]])


def test_self_crossing_ring_matches_even_odd_oracle():
    # a bowtie: the crossing region is entered twice and excluded
    g = make_grid((0.0, 8.0), (0.0, 8.0), 8, 8)
    # vertices chosen so no cell center falls exactly on a ring edge
    bowtie = [(1.13, 1.21), (6.87, 6.79), (1.13, 6.79), (6.87, 1.21)]
    cf = rasterize_constraints(g, [bowtie])
    lats = g.cell_lats()
    lons = g.cell_lons()
    for i in range(8):
        for j in range(8):
            want = _inside_by_vertical_ray(lats[i], lons[j], bowtie)
            assert cf.blocked[i, j] == want, (i, j)
    assert cf.blocked.any()


def test_union_of_disjoint_rectangles():
    g = make_grid((0.0, 8.0), (0.0, 8.0), 8, 8)
    r1 = [(0.0, 0.0), (0.0, 2.0), (2.0, 2.0), (2.0, 0.0)]
    r2 = [(5.0, 5.0), (5.0, 8.0), (8.0, 8.0), (8.0, 5.0)]
    both = rasterize_constraints(g, [r1, r2]).blocked
    a = rasterize_constraints(g, [r1]).blocked
    b = rasterize_constraints(g, [r2]).blocked
    assert np.array_equal(both, a | b)
    assert int(a.sum()) == 4 and int(b.sum()) == 9


# --- snapping ---


def test_snap_on_ocean_keeps_cell():
    g = make_grid((0.0, 8.0), (0.0, 8.0), 8, 8)
    mesh = build_mesh(g)
    p = snap_to_node(mesh, 3.5, 4.5)
    assert int(mesh.nodes[p]) == 3 * 8 + 4


def test_snap_moves_to_nearest_ocean():
    # land block over rows/cols 2..5, one probe in its middle snaps to the
    # nearest open-water cell on the block's border
    g = make_grid((0.0, 8.0), (0.0, 8.0), 8, 8, land_boxes=[(2.0, 6.0, 2.0, 6.0)])
    mesh = build_mesh(g)
    p = snap_to_node(mesh, 3.5, 3.5)  # cell (3, 3), two cells from open water
    i, j = divmod(int(mesh.nodes[p]), 8)
    assert g.mask[i, j]
    assert abs(i - 3) + abs(j - 3) <= 4
    # ties resolve to the smallest flat cell index: equidistant candidates
    # (1, 3) and (3, 1) both sit 2 cells away; flat 11 < 25
    assert (i, j) == (1, 3)


def test_snap_beyond_radius_reports_side():
    g = make_grid((0.0, 16.0), (0.0, 16.0), 16, 16,
                  land_boxes=[(0.0, 16.0, 0.0, 14.0)])
    mesh = build_mesh(g)
    with pytest.raises(SnapError, match="origin on land"):
        snap_to_node(mesh, 8.5, 2.5, label="origin")
    with pytest.raises(SnapError, match="destination on land"):
        snap_to_node(mesh, 8.5, 2.5, label="destination")
