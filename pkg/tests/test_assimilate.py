"""Assimilation update: exactness, kernel falloff, sampling, CSV."""

import numpy as np
import pytest

from swrkit.assimilate import (AssimConfig, Observation, rbf_assimilate,
                               read_observations_csv, sample_observations,
                               write_observations_csv)
from swrkit.grids import WaveFrame, make_grid
from swrkit.synth import SynthParams, gen_synthetic


def _flat_frame(grid, height=2.0):
    vals = np.zeros((4, grid.nlat, grid.nlon), np.float32)
    vals[0] = height
    vals[2] = 1.0
    vals[3] = 8.0
    vals[:, ~grid.mask] = 0.0
    return WaveFrame(0, vals)


def test_isolated_observation_corrects_its_cell_exactly():
    g = make_grid((0.0, 16.0), (0.0, 16.0), 16, 16)
    fr = _flat_frame(g)
    lat, lon = g.cell_center(8, 8)
    ob = Observation(lat=lat, lon=lon, time=0, channel="VHM0", value=3.0)
    out = rbf_assimilate(fr, g, [ob])
    assert abs(float(out.values[0, 8, 8]) - 3.0) < 1e-6


def test_kernel_falloff_matches_closed_form():
    # single observation, bandwidth 0.5: a cell at distance d receives
    # exactly w = exp(-d^2 / (2 sigma^2)) of the unit innovation, because
    # D = w there and the density cap does not bind (w <= 1)
    g = make_grid((0.0, 16.0), (0.0, 16.0), 16, 16)
    fr = _flat_frame(g, height=2.0)
    lat, lon = g.cell_center(8, 8)
    ob = Observation(lat=lat, lon=lon, time=0, channel="VHM0", value=3.0)
    out = rbf_assimilate(fr, g, [ob], AssimConfig(bandwidth_cells=0.5))
    for dj, d in ((1, 1.0), (2, 2.0)):
        inc = float(out.values[0, 8, 8 + dj]) - 2.0
        expected = np.exp(-d * d / (2 * 0.25))
        assert abs(inc - expected) < 1e-6, d
    # at 3 sigma (1.5 cells) the kernel passes less than 1.2% through
    assert np.exp(-1.5 ** 2 / (2 * 0.25)) < 0.012


def test_land_snapped_observations_dropped_with_warning(caplog):
    g = make_grid((0.0, 8.0), (0.0, 8.0), 8, 8, land_boxes=[(0.0, 2.0, 0.0, 2.0)])
    fr = _flat_frame(g)
    lat, lon = g.cell_center(0, 0)   # land
    ob = Observation(lat=lat, lon=lon, time=0, channel="VHM0", value=9.0)
    with caplog.at_level("WARNING"):
        out = rbf_assimilate(fr, g, [ob])
    assert "land" in caplog.text
    assert np.array_equal(out.values, fr.values)


def test_unknown_channel_rejected():
    g = make_grid((0.0, 8.0), (0.0, 8.0), 8, 8)
    fr = _flat_frame(g)
    with pytest.raises(ValueError):
        rbf_assimilate(fr, g, [Observation(1.0, 1.0, 0, "WAVES", 1.0)])


def test_assimilating_truth_never_increases_ocean_rmse():
    g = make_grid((0.0, 32.0), (0.0, 32.0), 32, 32,
                  land_boxes=[(20.0, 26.0, 4.0, 10.0)])
    for seed in range(5):
        truth = gen_synthetic(g, SynthParams(velocity=(0.7, 0.4), diffusion=0.2,
                                             rotation=2.0, seed=seed), 3)
        # use frame 0 as a wrong forecast of frame 2
        fc = WaveFrame(truth.frames[2].timestamp, truth.frames[0].values.copy())
        obs = sample_observations(truth.frames[2], g, 0.2, seed=100 + seed)
        out = rbf_assimilate(fc, g, obs)
        t2 = truth.frames[2].values.astype(np.float64)
        before = np.sqrt(np.mean((fc.values.astype(np.float64)[:, g.mask]
                                  - t2[:, g.mask]) ** 2))
        after = np.sqrt(np.mean((out.values.astype(np.float64)[:, g.mask]
                                 - t2[:, g.mask]) ** 2))
        assert after <= before + 1e-12, seed


def test_sample_observations_count_and_determinism():
    g = make_grid((0.0, 10.0), (0.0, 10.0), 10, 10)   # 100 ocean cells
    truth = gen_synthetic(g, SynthParams(seed=0), 1)
    obs = sample_observations(truth.frames[0], g, 0.2, seed=5)
    cells = {(o.lat, o.lon) for o in obs}
    assert len(cells) == 20          # exactly 20 distinct cells
    assert len(obs) == 80            # one obs per channel per cell
    again = sample_observations(truth.frames[0], g, 0.2, seed=5)
    assert obs == again


def test_directions_stay_unit_after_assimilation():
    g = make_grid((0.0, 8.0), (0.0, 8.0), 8, 8)
    truth = gen_synthetic(g, SynthParams(rotation=4.0, seed=7), 2)
    fc = WaveFrame(truth.frames[1].timestamp, truth.frames[0].values.copy())
    obs = sample_observations(truth.frames[1], g, 0.3, seed=1)
    out = rbf_assimilate(fc, g, obs)
    norm = np.hypot(out.values[1].astype(np.float64),
                    out.values[2].astype(np.float64))
    assert np.allclose(norm[g.mask], 1.0, atol=1e-6)


def test_observation_csv_round_trip(tmp_path):
    g = make_grid((0.0, 8.0), (0.0, 8.0), 8, 8)
    truth = gen_synthetic(g, SynthParams(seed=3), 1)
    obs = sample_observations(truth.frames[0], g, 0.25, seed=2)
    p = tmp_path / "obs.csv"
    write_observations_csv(p, obs)
    back = read_observations_csv(p)
    assert back == obs
