"""Integrator semantics, oracle rollouts, persistence baseline."""

import numpy as np
import pytest

from swrkit.errors import GridError
from swrkit.grids import WaveFrame, make_grid
from swrkit.stepping import (RolloutConfig, pec_core, pec_step,
                             persistence_forecast, rollout)
from swrkit.surrogate import init_weights
from swrkit.synth import SynthParams, gen_synthetic


def test_pec_scalar_decay_matches_closed_form():
    # N[x] = -x: inner state is x - x = 0, so x' = x * (1 - dt/2)
    x0, dt = 1.0, 0.1
    got = pec_core(x0, lambda v: -v, dt)
    assert abs(got - 0.95) < 1e-12
    for dt in (0.01, 0.25, 1.0):
        got = pec_core(2.0, lambda v: -v, dt)
        assert abs(got - 2.0 * (1.0 - 0.5 * dt)) < 1e-12


def test_pec_heun_inner_dt_matches_closed_form():
    # classical Heun on N[x] = -x gives x * (1 - dt + dt^2/2)
    for dt in (0.01, 0.1, 0.5):
        got = pec_core(1.0, lambda v: -v, dt, heun_inner_dt=True)
        assert abs(got - (1.0 - dt + 0.5 * dt * dt)) < 1e-12


def test_pec_linear_system_closed_forms():
    rng = np.random.default_rng(2)
    a = rng.normal(size=(3, 3)) * 0.3
    x = rng.normal(size=3)
    dt = 0.2
    ident = np.eye(3)
    # verbatim inner step: x + dt*A x + (dt/2) A^2 x
    want = (ident + dt * a + 0.5 * dt * (a @ a)) @ x
    got = pec_core(x, lambda v: a @ v, dt)
    assert np.allclose(got, want, atol=1e-12)
    # heun inner step: (I + dt A + (dt A)^2 / 2) x
    want_h = (ident + dt * a + 0.5 * (dt * a) @ (dt * a)) @ x
    got_h = pec_core(x, lambda v: a @ v, dt, heun_inner_dt=True)
    assert np.allclose(got_h, want_h, atol=1e-12)


def test_oracle_tendency_rollout_stays_on_truth():
    """Feeding the true frame differences as tendency must reproduce truth.

    With constant tendency c the update is x + (dt/2)(c + c) = x + c at
    dt = 1, so a tendency keyed to the frame timestamps keeps the rollout
    exactly on the generated trajectory (up to float32 rounding).
    """
    g = make_grid((0.0, 16.0), (0.0, 16.0), 16, 16,
                  land_boxes=[(10.0, 13.0, 2.0, 5.0)])
    truth = gen_synthetic(g, SynthParams(velocity=(0.8, 0.4), diffusion=0.2,
                                         rotation=2.0, seed=11), 8)
    t0, step = truth.t0, truth.step_seconds
    vals = truth.values4d().astype(np.float64)

    def oracle(v, timestamp):
        i = int((timestamp - t0) // step)
        return vals[i + 1] - vals[i]

    cfg = RolloutConfig(steps=7, step_seconds=step)
    fc = rollout(truth.frames[0], g, None, cfg, tendency_fn=oracle)
    for t in range(8):
        err = fc.frames[t].values - truth.frames[t].values
        rmse = float(np.sqrt(np.mean(err.astype(np.float64) ** 2)))
        assert rmse < 1e-4, t
        assert np.abs(err).max() < 1e-5, t


def test_pec_step_renormalizes_directions():
    g = make_grid((0.0, 4.0), (0.0, 4.0), 4, 4)
    w = init_weights(kmax=2, width=3, seed=0)   # zero spectral, tiny tendency
    vals = np.zeros((4, 4, 4), np.float32)
    vals[0] = 2.0
    vals[1] = 0.6   # deliberately non-unit direction vector
    vals[2] = 0.6
    vals[3] = 8.0
    out = pec_step(WaveFrame(0, vals), g, w, RolloutConfig())
    norm = np.hypot(out.values[1].astype(np.float64),
                    out.values[2].astype(np.float64))
    assert np.allclose(norm, 1.0, atol=1e-6)


def test_rollout_rejects_non_finite_steps():
    g = make_grid((0.0, 4.0), (0.0, 4.0), 4, 4)
    vals = np.ones((4, 4, 4), np.float32)
    frame = WaveFrame(0, vals)

    def blowup(v, timestamp):
        return np.full_like(v, np.inf)

    with pytest.raises(GridError):
        rollout(frame, g, None, RolloutConfig(steps=2), tendency_fn=blowup)


def test_persistence_repeats_init_with_advancing_timestamps():
    g = make_grid((0.0, 8.0), (0.0, 8.0), 8, 8)
    truth = gen_synthetic(g, SynthParams(seed=3), 1)
    fc = persistence_forecast(truth.frames[0], g, steps=4, step_seconds=3600)
    assert fc.ntime == 5
    for i, fr in enumerate(fc.frames):
        assert fr.timestamp == truth.t0 + i * 3600
        assert np.array_equal(fr.values, truth.frames[0].values)
