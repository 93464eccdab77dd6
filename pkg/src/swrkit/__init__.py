"""Ship-weather-routing kit.

Spectral surrogate forecasting of wave fields, sparse-observation
assimilation, time-dependent route optimization, and emissions/seakeeping
analytics, with a file format, CLI and HTTP service on top.
"""

__version__ = "0.1.0"

from .analytics import (EmissionFactors, LegAnalytics, RouteSummary,
                        analyze_route, route_summary, safety_flags,
                        segment_filter, summary_to_json)
from .assimilate import (AssimConfig, Observation, rbf_assimilate,
                         read_observations_csv, sample_observations,
                         write_observations_csv)
from .config import ServiceConfig, load_config
from .grids import (CHANNELS, FieldStack, GeoGrid, WaveFrame,
                    decode_direction, encode_direction, make_grid, regrid)
from .mesh import (ConstraintField, NavMesh, build_mesh, clean_polygons,
                   rasterize_constraints, snap_to_node)
from .metrics import (SkillConfig, SkillCurve, acc, climatology_frame,
                      cosine_direction, nrmse, score_forecast,
                      skill_experiment, skill_to_csv, skill_to_json,
                      spectral_energy)
from .presets import (DEFAULT_SHIP, PORTS, SHIPS, Port, get_port,
                      get_ship, ship_from_doc, ship_to_doc)
from .routing import (KIND_MIN_DISTANCE, KIND_OPTIMIZED, KIND_REHEARSAL,
                      Route, RouteLeg, Ship, WaveSample, effective_speed,
                      encounter_angle_deg, min_distance_route,
                      optimize_route, route_from_json, route_to_geojson,
                      route_to_json)
from .stepping import (RolloutConfig, pec_core, pec_step,
                       persistence_forecast, rollout)
from .surrogate import (SurrogateWeights, init_weights, load_weights,
                        save_weights, tendency, zero_weights)
from .synth import SynthParams, gen_synthetic
from .training import TrainConfig, train
from .wgrid import read_field_stack, write_field_stack

__all__ = [
    "EmissionFactors", "LegAnalytics", "RouteSummary", "analyze_route",
    "route_summary", "safety_flags", "segment_filter", "summary_to_json",
    "AssimConfig", "Observation", "rbf_assimilate", "read_observations_csv",
    "sample_observations", "write_observations_csv",
    "ServiceConfig", "load_config",
    "CHANNELS", "FieldStack", "GeoGrid", "WaveFrame",
    "decode_direction", "encode_direction", "make_grid", "regrid",
    "ConstraintField", "NavMesh", "build_mesh", "clean_polygons",
    "rasterize_constraints", "snap_to_node",
    "SkillConfig", "SkillCurve", "acc", "climatology_frame",
    "cosine_direction", "nrmse", "score_forecast", "skill_experiment",
    "skill_to_csv", "skill_to_json", "spectral_energy",
    "DEFAULT_SHIP", "PORTS", "SHIPS", "Port", "get_port", "get_ship",
    "ship_from_doc", "ship_to_doc",
    "KIND_MIN_DISTANCE", "KIND_OPTIMIZED", "KIND_REHEARSAL", "Route",
    "RouteLeg", "Ship", "WaveSample", "effective_speed",
    "encounter_angle_deg", "min_distance_route", "optimize_route",
    "route_from_json", "route_to_geojson", "route_to_json",
    "RolloutConfig", "pec_core", "pec_step", "persistence_forecast",
    "rollout",
    "SurrogateWeights", "init_weights", "load_weights", "save_weights",
    "tendency", "zero_weights",
    "SynthParams", "gen_synthetic",
    "TrainConfig", "train",
    "read_field_stack", "write_field_stack",
    "__version__",
]
