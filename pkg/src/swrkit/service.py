"""HTTP service: forecasts, field slices, routes, rehearsals, scenarios.

All endpoints live under ``/api/v1``.  Execution is synchronous; every
create endpoint still returns a job handle so the schema can move to
async workers without breaking clients.  Errors share one JSON shape,
``{"code", "message", "detail"}``, with the package's exception codes.

Forecast creation is idempotent: requests are hashed over their
canonical serialization, and an identical repeat returns the stored
forecast id instead of recomputing.  Rehearsal slots (five per base
route) are reserved before the re-optimization runs and released on
failure, so concurrent requests cannot oversubscribe the limit.
"""

from __future__ import annotations

import base64
import os
import threading

import numpy as np
from fastapi import FastAPI
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, ConfigDict, Field

from . import __version__
from .analytics import (analyze_route, route_summary, segment_filter,
                        summary_to_json)
from .assimilate import sample_observations
from .config import ServiceConfig, load_config
from .errors import (FormatError, GridError, LimitError, NotFoundError,
                     SwrkitError, UnreachableError)
from .grids import CHANNELS, make_grid
from .mesh import build_mesh, clean_polygons, rasterize_constraints
from .presets import (DEFAULT_SHIP, PORTS, SHIPS, get_port, get_ship,
                      ship_from_doc, ship_to_doc)
from .routing import (KIND_MIN_DISTANCE, KIND_OPTIMIZED, KIND_REHEARSAL,
                      min_distance_route, optimize_route, route_from_json,
                      route_to_geojson, route_to_json)
from .stepping import RolloutConfig, rollout
from .store import RouteRecord, Store
from .surrogate import load_weights, zero_weights
from .synth import SynthParams, gen_synthetic
from .wgrid import read_field_stack

API = "/api/v1"


# ---------------------------------------------------------------------------
# request bodies

class SyntheticInit(BaseModel):
    """Synthetic truth parameters; omitted fields use generator defaults."""

    model_config = ConfigDict(extra="forbid")

    seed: int
    velocity: tuple[float, float] | None = None
    diffusion: float | None = None
    rotation: float | None = None
    base_height: float | None = None
    height_amplitude: float | None = None
    base_period: float | None = None
    noise_floor: float | None = None

    def params(self):
        given = {k: v for k, v in self.model_dump().items() if v is not None}
        return SynthParams(**given)


class InitSource(BaseModel):
    """Exactly one of a synthetic spec or a stored .wgrid file name."""

    model_config = ConfigDict(extra="forbid")

    synthetic: SyntheticInit | None = None
    wgrid: str | None = None


class Resolution(BaseModel):
    model_config = ConfigDict(extra="forbid")

    shape: tuple[int, int] = (32, 32)
    lat_span: tuple[float, float] = (30.0, 46.0)
    lon_span: tuple[float, float] = (130.0, 146.0)


class DaSchedule(BaseModel):
    """Assimilate a fraction of truth cells every ``every`` steps."""

    model_config = ConfigDict(extra="forbid")

    every: int = Field(ge=1)
    fraction: float = Field(gt=0.0, le=1.0)
    seed: int = 0


class ForecastRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    init: InitSource
    horizon: int = Field(ge=0)
    resolution: Resolution | None = None
    da: DaSchedule | None = None
    step_seconds: int = Field(default=3600, ge=1)
    linear_mode: bool | None = None


class ConstraintRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    polygons: list


class RouteRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    forecast_id: str
    origin: str | tuple[float, float]
    dest: str | tuple[float, float]
    ship: dict | None = None
    departure: float | None = None
    constraint_id: str | None = None


class RehearsalRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    route_id: str
    polygons: list = Field(default_factory=list)


# ---------------------------------------------------------------------------
# helpers

def _json_error(status, code, message, detail=None):
    return JSONResponse(status_code=status,
                        content={"code": code, "message": message,
                                 "detail": detail})


def _resolve_channel(channel):
    """Channel path segment -> index; accepts a name or an integer."""
    name = str(channel).upper()
    if name in CHANNELS:
        return CHANNELS.index(name)
    try:
        idx = int(channel)
    except ValueError:
        idx = -1
    if 0 <= idx < len(CHANNELS):
        return idx
    raise FormatError("unknown channel %r; expected one of %s or an index"
                      % (channel, ", ".join(CHANNELS)))


def _resolve_point(value):
    """Port name or [lat, lon] -> (lat, lon)."""
    if isinstance(value, str):
        port = get_port(value)
        return (port.lat, port.lon)
    return (float(value[0]), float(value[1]))


def _b64(arr):
    return base64.b64encode(np.ascontiguousarray(arr).tobytes()).decode("ascii")


def _poly_doc(polygons):
    return [[list(v) for v in poly] for poly in polygons]


# ---------------------------------------------------------------------------
# app factory

def create_app(config: ServiceConfig | None = None):
    cfg = config if config is not None else load_config()
    store = Store(cfg.data_dir)
    if cfg.weights_path:
        weights = load_weights(cfg.weights_path)
        model_name = "surrogate"
    else:
        weights = zero_weights()
        model_name = "persistence"

    app = FastAPI(title="swrkit", version=__version__)
    app.state.config = cfg
    app.state.store = store
    app.state.weights = weights
    app.state.model_name = model_name
    meshes = {}
    mesh_lock = threading.Lock()

    def mesh_for(fid, grid):
        with mesh_lock:
            if fid not in meshes:
                meshes[fid] = build_mesh(grid)
            return meshes[fid]

    # -- error mapping --------------------------------------------------
    def handler(status):
        def handle(request, exc):
            return _json_error(status, getattr(exc, "code", "invalid"),
                               str(exc))
        return handle

    app.add_exception_handler(NotFoundError, handler(404))
    app.add_exception_handler(LimitError, handler(409))
    app.add_exception_handler(UnreachableError, handler(409))
    app.add_exception_handler(SwrkitError, handler(422))
    app.add_exception_handler(ValueError, handler(422))

    def validation_handler(request, exc):
        detail = [{"loc": list(e.get("loc", ())), "msg": str(e.get("msg", "")),
                   "type": str(e.get("type", ""))} for e in exc.errors()]
        return _json_error(422, "validation", "invalid request body", detail)

    app.add_exception_handler(RequestValidationError, validation_handler)

    # -- meta -------------------------------------------------------------
    @app.get(API + "/health")
    def health():
        return {"status": "ok", "version": __version__, "model": model_name}

    @app.get(API + "/ships")
    def ships():
        return {"ships": [ship_to_doc(s) for s in SHIPS],
                "ports": [{"name": p.name, "lat": p.lat, "lon": p.lon}
                          for p in PORTS],
                "default": cfg.default_ship or DEFAULT_SHIP}

    @app.get(API + "/jobs/{job_id}")
    def get_job(job_id: str):
        return store.get_job(job_id).to_doc()

    # -- forecasts ----------------------------------------------------------
    def resolve_init(req):
        """Initial frame plus (for assimilation) the truth stack."""
        init = req.init
        if (init.synthetic is None) == (init.wgrid is None):
            raise FormatError(
                "init must give exactly one of 'synthetic' or 'wgrid'")
        if init.synthetic is not None:
            res = req.resolution or Resolution()
            grid = make_grid(res.lat_span, res.lon_span, *res.shape)
            nframes = req.horizon + 1 if req.da else 1
            truth = gen_synthetic(grid, init.synthetic.params(), nframes,
                                  step_seconds=req.step_seconds)
            return truth
        if req.resolution is not None:
            raise FormatError("resolution only applies to synthetic init")
        name = init.wgrid
        if os.path.basename(name) != name or not name:
            raise FormatError("wgrid init must be a plain file name")
        path = os.path.join(cfg.data_dir, name)
        if not os.path.exists(path):
            raise NotFoundError("unknown init source %r" % (name,))
        return read_field_stack(path)

    def assimilation_schedule(req, truth):
        if req.da is None:
            return {}
        da = req.da
        steps = list(range(da.every, req.horizon + 1, da.every))
        if not steps:
            raise FormatError(
                "assimilation schedule starts beyond the horizon")
        if steps[-1] >= truth.ntime:
            raise FormatError(
                "assimilation needs truth frames up to step %d; the init "
                "source has %d" % (steps[-1], truth.ntime))
        return {step: sample_observations(truth.frames[step], truth.grid,
                                          da.fraction, seed=da.seed + step)
                for step in steps}

    @app.post(API + "/forecasts")
    def create_forecast(req: ForecastRequest):
        request_doc = req.model_dump(mode="json")
        job = store.new_job("forecast")
        cached = store.lookup_forecast_request(request_doc)
        if cached is not None:
            job.finish("done")
            return {"job": job.to_doc(), "forecast_id": cached,
                    "cached": True, "meta": store.forecast_meta(cached)}
        try:
            truth = resolve_init(req)
            schedule = assimilation_schedule(req, truth)
            linear = (cfg.linear_mode if req.linear_mode is None
                      else req.linear_mode)
            run_cfg = RolloutConfig(steps=req.horizon,
                                    step_seconds=truth.step_seconds,
                                    linear_mode=linear,
                                    assimilation_schedule=schedule)
            try:
                stack = rollout(truth.frames[0], truth.grid, weights, run_cfg)
            except GridError as exc:
                job.finish("failed", str(exc))
                return _json_error(500, "blow-up", str(exc),
                                   {"job": job.to_doc()})
            grid = stack.grid
            meta = {"request": request_doc, "horizon": req.horizon,
                    "step_seconds": stack.step_seconds,
                    "shape": list(grid.shape),
                    "lat_span": [grid.lat_min, grid.lat_max],
                    "lon_span": [grid.lon_min, grid.lon_max],
                    "t0": stack.t0, "ntime": stack.ntime,
                    "channels": list(CHANNELS), "model": model_name,
                    "linear_mode": linear,
                    "assimilation_steps": sorted(schedule)}
            fid = store.put_forecast(request_doc, stack, meta)
        except Exception as exc:
            if job.status == "pending":
                job.finish("failed", str(exc))
            raise
        job.finish("done")
        return {"job": job.to_doc(), "forecast_id": fid, "cached": False,
                "meta": store.forecast_meta(fid)}

    @app.get(API + "/forecasts/{fid}")
    def forecast_meta(fid: str):
        return store.forecast_meta(fid)

    @app.get(API + "/forecasts/{fid}/fields/{t_index}/{channel}")
    def field_slice(fid: str, t_index: int, channel: str):
        stack = store.get_forecast(fid)
        ch = _resolve_channel(channel)
        if not 0 <= t_index < stack.ntime:
            return _json_error(
                416, "out-of-range",
                "t_index %d outside [0, %d)" % (t_index, stack.ntime))
        grid = stack.grid
        frame = stack.frames[t_index]
        plane = frame.values[ch]
        ocean = plane[grid.mask]
        return {"forecast_id": fid, "t_index": t_index,
                "channel": CHANNELS[ch], "timestamp": frame.timestamp,
                "shape": list(grid.shape),
                "bbox": {"lat_min": grid.lat_min, "lat_max": grid.lat_max,
                         "lon_min": grid.lon_min, "lon_max": grid.lon_max},
                "vmin": float(ocean.min()) if ocean.size else 0.0,
                "vmax": float(ocean.max()) if ocean.size else 0.0,
                "data": _b64(plane.astype("<f4", copy=False)),
                "mask": _b64(grid.mask.astype(np.uint8)),
                "encoding": {"dtype": "<f4", "order": "C",
                             "mask_dtype": "u1"}}

    # -- constraints --------------------------------------------------------
    @app.post(API + "/constraints")
    def create_constraint(req: ConstraintRequest):
        polys = clean_polygons(req.polygons)
        cid = store.add_constraint(polys)
        return {"constraint_id": cid, "count": len(polys),
                "polygons": _poly_doc(polys)}

    # -- routes -------------------------------------------------------------
    def route_payload(rid, rec):
        return {"id": rid, "kind": rec.kind,
                "route": route_to_json(rec.route),
                "geojson": route_to_geojson(rec.route),
                "summary": summary_to_json(rec.summary)}

    @app.post(API + "/routes")
    def create_route(req: RouteRequest):
        job = store.new_job("route")
        try:
            stack = store.get_forecast(req.forecast_id)
            ship = (ship_from_doc(req.ship) if req.ship
                    else get_ship(cfg.default_ship or DEFAULT_SHIP))
            origin = _resolve_point(req.origin)
            dest = _resolve_point(req.dest)
            departure = (stack.t0 if req.departure is None
                         else float(req.departure))
            polys = store.get_constraint(req.constraint_id) \
                if req.constraint_id else ()
            constraint = (rasterize_constraints(stack.grid, polys)
                          if polys else None)
            mesh = mesh_for(req.forecast_id, stack.grid)
            optimized = optimize_route(mesh, stack, ship, origin, dest,
                                       departure, constraint)
            mindist = min_distance_route(mesh, ship, origin, dest,
                                         fields=stack, departure=departure,
                                         constraint=constraint)
            sum_min = route_summary(mindist, ship)
            sum_opt = route_summary(optimized, ship, baseline=mindist)
            min_rid = store.add_route(RouteRecord(
                route=mindist, ship=ship, forecast_id=req.forecast_id,
                summary=sum_min, kind=KIND_MIN_DISTANCE,
                constraint_id=req.constraint_id, polygons=polys))
            rid = store.add_route(RouteRecord(
                route=optimized, ship=ship, forecast_id=req.forecast_id,
                summary=sum_opt, kind=KIND_OPTIMIZED,
                constraint_id=req.constraint_id, min_distance_id=min_rid,
                polygons=polys))
        except Exception as exc:
            job.finish("failed", str(exc))
            raise
        job.finish("done")
        return {"job": job.to_doc(), "route_id": rid,
                "min_distance_route_id": min_rid,
                "routes": {
                    "optimized": route_payload(rid, store.get_route(rid)),
                    "min_distance": route_payload(min_rid,
                                                  store.get_route(min_rid)),
                }}

    @app.get(API + "/routes/{rid}")
    def get_route(rid: str):
        rec = store.get_route(rid)
        doc = route_payload(rid, rec)
        doc.update({"forecast_id": rec.forecast_id,
                    "ship": ship_to_doc(rec.ship),
                    "constraint_id": rec.constraint_id,
                    "base_id": rec.base_id,
                    "min_distance_id": rec.min_distance_id,
                    "polygons": _poly_doc(rec.polygons)})
        return doc

    @app.get(API + "/routes/{rid}/legs")
    def route_legs(rid: str):
        """Per-leg engine, emission, and safety numbers for chart clients."""
        rec = store.get_route(rid)
        stats = analyze_route(rec.route, rec.ship)
        legs = route_to_json(rec.route)["legs"]
        for leg, a in zip(legs, stats):
            leg.update({"power_kw": a.power_kw, "energy_kwh": a.energy_kwh,
                        "fuel_kg": a.fuel_kg, "co2_kg": a.co2_kg,
                        "sox_kg": a.sox_kg, "nox_kg": a.nox_kg,
                        "pm_kg": a.pm_kg, "surf_riding": a.surf_riding,
                        "parametric_roll": a.parametric_roll,
                        "flagged": a.flagged})
        return {"route_id": rid, "kind": rec.kind,
                "departure_time": rec.route.departure_time,
                "arrival_time": (rec.route.legs[-1].arrival_time
                                 if rec.route.legs
                                 else rec.route.departure_time),
                "legs": legs}

    @app.get(API + "/routes/{rid}/segment")
    def route_segment(rid: str, t_start: float, t_end: float):
        """Summary over the legs departing within [t_start, t_end)."""
        rec = store.get_route(rid)
        stats = analyze_route(rec.route, rec.ship)
        summary = segment_filter(rec.route, stats, t_start, t_end)
        return {"route_id": rid, "t_start": t_start, "t_end": t_end,
                "summary": summary_to_json(summary)}

    # -- rehearsals -----------------------------------------------------------
    @app.post(API + "/rehearsals")
    def create_rehearsal(req: RehearsalRequest):
        base = store.get_route(req.route_id)
        if base.kind != KIND_OPTIMIZED:
            raise FormatError(
                "rehearsals take an optimized base route, got %r" % base.kind)
        added = clean_polygons(req.polygons) if req.polygons else ()
        store.reserve_rehearsal(req.route_id)
        job = store.new_job("rehearsal")
        try:
            stack = store.get_forecast(base.forecast_id)
            effective = tuple(base.polygons) + added
            constraint = (rasterize_constraints(stack.grid, effective)
                          if effective else None)
            mesh = mesh_for(base.forecast_id, stack.grid)
            route = optimize_route(mesh, stack, base.ship,
                                   base.route.origin_latlon,
                                   base.route.dest_latlon,
                                   base.route.departure_time, constraint,
                                   kind=KIND_REHEARSAL)
            summary = route_summary(route, base.ship, baseline=base.route)
            rid = store.add_route(RouteRecord(
                route=route, ship=base.ship, forecast_id=base.forecast_id,
                summary=summary, kind=KIND_REHEARSAL,
                constraint_id=base.constraint_id, base_id=req.route_id,
                polygons=effective))
            store.commit_rehearsal(req.route_id, rid)
        except Exception as exc:
            store.release_rehearsal(req.route_id)
            job.finish("failed", str(exc))
            raise
        job.finish("done")
        return {"job": job.to_doc(), "route_id": rid,
                "base_id": req.route_id,
                "route": route_to_json(route),
                "geojson": route_to_geojson(route),
                "summary": summary_to_json(summary),
                "added_polygons": _poly_doc(added),
                "comparison": {"base": summary_to_json(base.summary),
                               "rehearsal": summary_to_json(summary),
                               "deltas": dict(summary.reduction_pct or {})}}

    # -- scenarios -------------------------------------------------------------
    def save_scenario(body):
        allowed = {"name", "route_id", "rehearsal_ids"}
        unknown = set(body) - allowed
        if unknown:
            raise FormatError("unknown scenario fields: %s"
                              % ", ".join(sorted(unknown)))
        if "route_id" not in body:
            raise FormatError("scenario needs a route_id")
        try:
            rec = store.get_route(body["route_id"])
            if rec.kind != KIND_OPTIMIZED:
                raise FormatError("scenario base must be an optimized route")
            reh_ids = body.get("rehearsal_ids")
            if reh_ids is None:
                reh_ids = list(store.rehearsal_ids(body["route_id"]))
            summaries = {body["route_id"]: summary_to_json(rec.summary)}
            reh_polys = {}
            for rid in reh_ids:
                r = store.get_route(rid)
                if r.base_id != body["route_id"]:
                    raise FormatError(
                        "route %r is not a rehearsal of %r"
                        % (rid, body["route_id"]))
                summaries[rid] = summary_to_json(r.summary)
                reh_polys[rid] = _poly_doc(r.polygons)
            routes = {"base": body["route_id"],
                      "min_distance": rec.min_distance_id,
                      "rehearsals": list(reh_ids)}
            if rec.min_distance_id:
                min_rec = store.get_route(rec.min_distance_id)
                summaries[rec.min_distance_id] = summary_to_json(
                    min_rec.summary)
            doc = {"name": body.get("name"),
                   "forecast_id": rec.forecast_id,
                   "ship": ship_to_doc(rec.ship),
                   "origin": list(rec.route.origin_latlon),
                   "dest": list(rec.route.dest_latlon),
                   "departure_time": rec.route.departure_time,
                   "constraint_polygons": _poly_doc(rec.polygons),
                   "routes": routes,
                   "rehearsal_polygons": reh_polys,
                   "summaries": summaries}
            sid = store.save_scenario(doc)
        except NotFoundError as exc:
            return _json_error(422, "dangling-reference", str(exc))
        return {"scenario_id": sid, "scenario": store.get_scenario(sid)}

    def import_scenario(body):
        embedded = body.get("embedded")
        routes = body.get("routes")
        if not isinstance(embedded, dict) or not isinstance(routes, dict):
            raise FormatError("scenario bundle needs 'embedded' and 'routes'")
        for key in ("base", "rehearsals"):
            if key not in routes:
                raise FormatError("scenario bundle routes need %r" % key)

        def rebuild(old_id):
            if old_id not in embedded:
                raise FormatError("bundle is missing embedded route %r"
                                  % (old_id,))
            d = embedded[old_id]
            return route_from_json(d["route"]), ship_from_doc(d["ship"])

        fid = body.get("forecast_id", "")
        constraint_polys = tuple(
            tuple(tuple(v) for v in poly)
            for poly in body.get("constraint_polygons", ()))

        new_min = None
        min_route = None
        if routes.get("min_distance"):
            min_route, min_ship = rebuild(routes["min_distance"])
            new_min = store.add_route(RouteRecord(
                route=min_route, ship=min_ship, forecast_id=fid,
                summary=route_summary(min_route, min_ship),
                kind=KIND_MIN_DISTANCE, polygons=constraint_polys))

        base_route, base_ship = rebuild(routes["base"])
        base_summary = route_summary(base_route, base_ship,
                                     baseline=min_route)
        new_base = store.add_route(RouteRecord(
            route=base_route, ship=base_ship, forecast_id=fid,
            summary=base_summary, kind=KIND_OPTIMIZED,
            min_distance_id=new_min, polygons=constraint_polys))

        id_map = {routes["base"]: new_base}
        if new_min:
            id_map[routes["min_distance"]] = new_min
        new_rehearsals = []
        reh_polys = {}
        for old_id in routes["rehearsals"]:
            route, ship = rebuild(old_id)
            summary = route_summary(route, ship, baseline=base_route)
            store.reserve_rehearsal(new_base)
            rid = store.add_route(RouteRecord(
                route=route, ship=ship, forecast_id=fid, summary=summary,
                kind=KIND_REHEARSAL, base_id=new_base,
                polygons=tuple(tuple(tuple(v) for v in poly) for poly in
                               body.get("rehearsal_polygons", {})
                               .get(old_id, ()))))
            store.commit_rehearsal(new_base, rid)
            id_map[old_id] = rid
            new_rehearsals.append(rid)
            reh_polys[rid] = body.get("rehearsal_polygons", {}) \
                .get(old_id, [])

        doc = {k: v for k, v in body.items() if k != "embedded"}
        doc["routes"] = {"base": new_base, "min_distance": new_min,
                         "rehearsals": new_rehearsals}
        doc["rehearsal_polygons"] = reh_polys
        doc["summaries"] = {rid: summary_to_json(store.get_route(rid).summary)
                            for rid in id_map.values()}
        sid = store.import_scenario(doc)
        return {"scenario_id": sid, "scenario": store.get_scenario(sid),
                "route_ids": id_map}

    @app.post(API + "/scenarios")
    def post_scenario(body: dict):
        if "embedded" in body:
            return import_scenario(body)
        return save_scenario(body)

    @app.get(API + "/scenarios")
    def list_scenarios():
        docs = store.list_scenarios()
        return {"scenarios": [{"id": d["id"], "name": d.get("name"),
                               "created_at": d.get("created_at"),
                               "routes": d.get("routes")} for d in docs]}

    @app.get(API + "/scenarios/{sid}")
    def get_scenario(sid: str):
        return store.get_scenario(sid)

    @app.get(API + "/scenarios/{sid}/export")
    def export_scenario(sid: str):
        doc = store.get_scenario(sid)
        routes = doc["routes"]
        ids = [routes["base"], *routes["rehearsals"]]
        if routes.get("min_distance"):
            ids.append(routes["min_distance"])
        embedded = {}
        for rid in ids:
            rec = store.get_route(rid)
            embedded[rid] = {"kind": rec.kind,
                             "route": route_to_json(rec.route),
                             "ship": ship_to_doc(rec.ship),
                             "summary": summary_to_json(rec.summary),
                             "base_id": rec.base_id,
                             "min_distance_id": rec.min_distance_id,
                             "polygons": _poly_doc(rec.polygons)}
        out = dict(doc, embedded=embedded)
        return JSONResponse(out, headers={
            "Content-Disposition": 'attachment; filename="%s.json"' % sid})

    if cfg.static_dir:
        from fastapi.staticfiles import StaticFiles
        if not os.path.isdir(cfg.static_dir):
            raise FormatError("static_dir %r is not a directory"
                              % cfg.static_dir)
        app.mount("/", StaticFiles(directory=cfg.static_dir, html=True),
                  name="client")

    return app


def main(config=None):
    """Run the service under uvicorn (blocking)."""
    import uvicorn
    cfg = config if config is not None else load_config()
    uvicorn.run(create_app(cfg), host=cfg.host, port=cfg.port)


if __name__ == "__main__":
    main()
