"""End-to-end walkthrough on a small grid.

Generates a synthetic truth, fits the surrogate, rolls a forecast with
sparse assimilation, routes a preset ship through it, and re-routes
around an avoidance zone. Prints the same comparison tables the CLI
produces. Runs in well under a minute.
"""

import numpy as np

import swrkit as sw
from swrkit.cli import emit_table

SEED = 7

grid = sw.make_grid((30.0, 46.0), (130.0, 146.0), 32, 32)
params = sw.SynthParams(velocity=(0.45, 0.28), diffusion=0.25, rotation=2.0,
                        base_height=2.0, height_amplitude=1.2, seed=SEED)
truth = sw.gen_synthetic(grid, params, nframes=80, step_seconds=3600)
print("truth: %d frames on a %dx%d grid" % (truth.ntime, *grid.shape))

weights = sw.train(truth, sw.TrainConfig(linear_mode=True, epochs=6,
                                         seed=1))
print("trained: kmax=%d width=%d" % (weights.kmax, weights.width))

# forecast 24 steps, assimilating 10% of ocean cells every 6 steps
schedule = {step: sw.sample_observations(truth.frames[step], grid, 0.1,
                                         seed=100 + step)
            for step in (6, 12, 18, 24)}
fc = sw.rollout(truth.frames[0], grid, weights,
                sw.RolloutConfig(steps=24, step_seconds=3600,
                                 linear_mode=True,
                                 assimilation_schedule=schedule))

climo = sw.climatology_frame(truth)
for lead in (6, 12, 24):
    a = sw.acc(fc.frames[lead], truth.frames[lead], climo, grid.mask)
    print("lead %2d: ACC %.4f" % (lead, a))

ship = sw.get_ship(sw.DEFAULT_SHIP)
mesh = sw.build_mesh(grid)
tokyo, hakodate = sw.get_port("Tokyo"), sw.get_port("Hakodate")
optimized = sw.optimize_route(mesh, fc, ship, (tokyo.lat, tokyo.lon),
                              (hakodate.lat, hakodate.lon), fc.t0)
baseline = sw.min_distance_route(mesh, ship, (tokyo.lat, tokyo.lon),
                                 (hakodate.lat, hakodate.lon), fields=fc,
                                 departure=fc.t0)
print()
print(emit_table([
    ("optimized", sw.route_summary(optimized, ship, baseline=baseline)),
    (baseline.kind, sw.route_summary(baseline, ship)),
]))

# rehearse: block a box across the corridor and re-route
zone = ((37.0, 138.0), (37.0, 142.0), (39.5, 142.0), (39.5, 138.0))
constraint = sw.rasterize_constraints(grid, [zone])
rerouted = sw.optimize_route(mesh, fc, ship, optimized.origin_latlon,
                             optimized.dest_latlon, fc.t0, constraint,
                             kind=sw.KIND_REHEARSAL)
summary = sw.route_summary(rerouted, ship, baseline=optimized)
print(emit_table([
    ("optimized", sw.route_summary(optimized, ship)),
    ("rehearsal", summary),
]))
deltas = summary.reduction_pct or {}
for key, pct in deltas.items():
    print("%s: %+.2f%% vs the unconstrained route" % (key, -pct))
