"""Grid, frame and regridding behavior."""

import numpy as np
import pytest

from swrkit.errors import GridError
from swrkit.grids import (GeoGrid, FieldStack, WaveFrame, decode_direction,
                          encode_direction, make_grid, regrid,
                          renormalize_directions)


def test_encode_direction_cardinal_points():
    x, y = encode_direction([0.0, 90.0, 180.0, 270.0])
    assert np.allclose(x, [0.0, 1.0, 0.0, -1.0], atol=1e-15)
    assert np.allclose(y, [1.0, 0.0, -1.0, 0.0], atol=1e-15)


def test_direction_round_trip_and_unit_norm():
    rng = np.random.default_rng(3)
    theta = rng.uniform(0.0, 360.0, size=500)
    x, y = encode_direction(theta)
    assert np.allclose(x * x + y * y, 1.0, atol=1e-12)
    back = decode_direction(x, y)
    assert np.allclose(back, theta, atol=1e-9)
    assert np.all((back >= 0.0) & (back < 360.0))


def test_decode_direction_range_on_negative_components():
    deg = decode_direction([-1.0, 0.0], [0.0, -1.0])
    assert np.allclose(deg, [270.0, 180.0])


def test_renormalize_directions_restores_unit_length():
    rng = np.random.default_rng(11)
    vals = rng.normal(size=(4, 6, 6)).astype(np.float32)
    mask = np.ones((6, 6), dtype=bool)
    mask[0, 0] = False
    out = renormalize_directions(vals, mask)
    norm = np.hypot(out[1], out[2])
    assert np.allclose(norm[mask], 1.0, atol=1e-6)
    # land cell untouched
    assert out[1, 0, 0] == vals[1, 0, 0]


def test_renormalize_leaves_near_zero_vectors_alone():
    vals = np.zeros((4, 3, 3), dtype=np.float32)
    mask = np.ones((3, 3), dtype=bool)
    out = renormalize_directions(vals, mask)
    assert np.all(out == 0.0)


def test_grid_invariants_rejected():
    with pytest.raises(GridError):
        GeoGrid(10.0, 5.0, 0.0, 10.0, 4, 4, np.ones((4, 4), bool))
    with pytest.raises(GridError):
        GeoGrid(0.0, 10.0, 0.0, 10.0, 4, 4, np.ones((3, 4), bool))


def test_nearest_cell_and_centers():
    g = make_grid((0.0, 4.0), (0.0, 8.0), 4, 8)
    assert g.dlat == 1.0 and g.dlon == 1.0
    assert g.cell_center(0, 0) == (0.5, 0.5)
    assert g.nearest_cell(0.6, 0.4) == (0, 0)
    assert g.nearest_cell(3.9, 7.9) == (3, 7)
    # clipped outside the box
    assert g.nearest_cell(-5.0, 100.0) == (0, 7)


def test_make_grid_land_boxes():
    g = make_grid((0.0, 4.0), (0.0, 4.0), 4, 4, land_boxes=[(1.0, 3.0, 1.0, 3.0)])
    assert not g.mask[1, 1] and not g.mask[2, 2]
    assert g.mask[0, 0] and g.mask[3, 3]
    assert g.n_ocean == 12


def test_frame_land_sentinel_enforced():
    g = make_grid((0.0, 2.0), (0.0, 2.0), 2, 2, land_boxes=[(0.0, 0.9, 0.0, 0.9)])
    vals = np.ones((4, 2, 2), dtype=np.float32)
    fr = WaveFrame(0, vals)
    with pytest.raises(GridError):
        fr.validate(g, physical=False)


def test_stack_requires_uniform_spacing():
    g = make_grid((0.0, 2.0), (0.0, 2.0), 2, 2)
    v = np.zeros((4, 2, 2), np.float32)
    frames = [WaveFrame(0, v), WaveFrame(100, v)]
    with pytest.raises(GridError):
        FieldStack(g, frames, step_seconds=60)


def _stack_from_planes(grid, planes):
    """Single-frame stack with VHM0 = planes, unit north directions."""
    vals = np.zeros((4, grid.nlat, grid.nlon), dtype=np.float32)
    vals[0] = planes
    vals[2] = 1.0
    vals[3] = 8.0
    vals[:, ~grid.mask] = 0.0
    return FieldStack(grid, [WaveFrame(0, vals)], 3600)


def test_regrid_preserves_constant_fields():
    g = make_grid((0.0, 8.0), (0.0, 8.0), 8, 8)
    st = _stack_from_planes(g, np.full((8, 8), 2.5, np.float32))
    out = regrid(st, 16, 16)
    assert np.allclose(out.frames[0].values[0], 2.5, atol=1e-7)
    assert np.allclose(out.frames[0].values[3], 8.0, atol=1e-7)


def test_regrid_reproduces_linear_field_on_interior_nodes():
    # bilinear interpolation is exact for fields linear in latitude; the
    # boundary rows clamp (no extrapolation) so the check covers nodes
    # inside the source cell-center hull
    g = make_grid((0.0, 8.0), (0.0, 8.0), 8, 8)
    lats = g.cell_lats()
    plane = np.repeat((3.0 + 0.5 * lats)[:, None], 8, axis=1).astype(np.float32)
    out = regrid(_stack_from_planes(g, plane), 16, 16)
    tg = out.grid
    expected = 3.0 + 0.5 * tg.cell_lats()
    got = out.frames[0].values[0]
    interior = (tg.cell_lats() >= lats[0]) & (tg.cell_lats() <= lats[-1])
    for i in np.nonzero(interior)[0]:
        assert np.allclose(got[i], expected[i], atol=1e-6), i


def test_regrid_preserves_bounds():
    rng = np.random.default_rng(7)
    g = make_grid((0.0, 8.0), (0.0, 8.0), 8, 8)
    for _ in range(20):
        plane = rng.uniform(0.5, 4.0, size=(8, 8)).astype(np.float32)
        out = regrid(_stack_from_planes(g, plane), 13, 11)
        o = out.frames[0].values[0]
        assert o.min() >= plane.min() - 1e-6
        assert o.max() <= plane.max() + 1e-6


def test_regrid_mask_nearest_neighbor_and_sentinel():
    g = make_grid((0.0, 4.0), (0.0, 4.0), 4, 4, land_boxes=[(0.0, 1.0, 0.0, 1.0)])
    st = _stack_from_planes(g, np.full((4, 4), 2.0, np.float32))
    out = regrid(st, 8, 8)
    # the land cell maps onto the 2x2 block of nearest target cells
    assert not out.grid.mask[0, 0] and not out.grid.mask[1, 1]
    assert out.grid.mask[2, 2]
    assert np.all(out.frames[0].values[:, ~out.grid.mask] == 0.0)
    # direction vectors stay unit length on ocean
    norm = np.hypot(out.frames[0].values[1], out.frames[0].values[2])
    assert np.allclose(norm[out.grid.mask], 1.0, atol=1e-6)
