"""HTTP service contract: endpoints, error mapping, concurrency."""

import base64
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace

import numpy as np
import pytest
from fastapi.testclient import TestClient

from swrkit.analytics import (analyze_route, route_summary, segment_filter,
                              summary_to_json)
from swrkit.config import ServiceConfig
from swrkit.grids import make_grid
from swrkit.presets import get_ship
from swrkit.routing import route_from_json
from swrkit.service import create_app
from swrkit.surrogate import init_weights, save_weights
from swrkit.synth import SynthParams, gen_synthetic
from swrkit.wgrid import write_field_stack


def make_client(tmp_path, **cfg_kw):
    cfg = ServiceConfig(data_dir=str(tmp_path / "data"), **cfg_kw)
    return TestClient(create_app(cfg), raise_server_exceptions=False)


def synth_request(seed=7, horizon=3, shape=(16, 16), **extra):
    req = {"init": {"synthetic": {"seed": seed, "velocity": [0.3, 0.2],
                                  "diffusion": 0.3}},
           "horizon": horizon, "resolution": {"shape": list(shape)}}
    req.update(extra)
    return req


def calm_request(horizon=2):
    """A forecast whose wave height is exactly zero everywhere."""
    return {"init": {"synthetic": {"seed": 1, "base_height": 0.0,
                                   "height_amplitude": 0.0,
                                   "noise_floor": 0.0}},
            "horizon": horizon, "resolution": {"shape": [16, 16]}}


def make_forecast(client, req=None):
    r = client.post("/api/v1/forecasts", json=req or synth_request())
    assert r.status_code == 200, r.text
    return r.json()["forecast_id"]


def make_route(client, fid, **extra):
    body = {"forecast_id": fid, "origin": "Tokyo", "dest": "Hakodate"}
    body.update(extra)
    r = client.post("/api/v1/routes", json=body)
    assert r.status_code == 200, r.text
    return r.json()


# -- meta ---------------------------------------------------------------

def test_health_and_ships(tmp_path):
    c = make_client(tmp_path)
    h = c.get("/api/v1/health").json()
    assert h["status"] == "ok" and h["model"] == "persistence"
    s = c.get("/api/v1/ships").json()
    assert {x["name"] for x in s["ships"]} >= {"tokai-liner"}
    assert {x["name"] for x in s["ports"]} >= {"Tokyo", "Hakodate"}
    assert s["default"] == "tokai-liner"


def test_job_handles(tmp_path):
    c = make_client(tmp_path)
    r = c.post("/api/v1/forecasts", json=synth_request(horizon=0)).json()
    assert r["job"]["status"] == "done" and r["job"]["kind"] == "forecast"
    assert c.get("/api/v1/jobs/%s" % r["job"]["id"]).json() == r["job"]
    assert c.get("/api/v1/jobs/j-none").status_code == 404


# -- forecasts ------------------------------------------------------------

def test_horizon_zero_yields_single_frame(tmp_path):
    c = make_client(tmp_path)
    fid = make_forecast(c, synth_request(horizon=0))
    meta = c.get("/api/v1/forecasts/%s" % fid).json()
    assert meta["ntime"] == 1 and meta["horizon"] == 0


def test_identical_requests_share_a_forecast(tmp_path):
    c = make_client(tmp_path)
    req = synth_request()
    first = c.post("/api/v1/forecasts", json=req).json()
    second = c.post("/api/v1/forecasts", json=req).json()
    assert first["cached"] is False and second["cached"] is True
    assert first["forecast_id"] == second["forecast_id"]
    other = c.post("/api/v1/forecasts", json=synth_request(seed=8)).json()
    assert other["forecast_id"] != first["forecast_id"]


def test_forecast_validation(tmp_path):
    c = make_client(tmp_path)
    r = c.post("/api/v1/forecasts", json=synth_request(horizon=-1))
    assert r.status_code == 422 and r.json()["code"] == "validation"
    r = c.post("/api/v1/forecasts", json=dict(synth_request(), bogus=1))
    assert r.status_code == 422
    # exactly one init source
    r = c.post("/api/v1/forecasts",
               json={"init": {}, "horizon": 1})
    assert r.status_code == 422
    r = c.post("/api/v1/forecasts",
               json={"init": {"synthetic": {"seed": 1}, "wgrid": "x.wgrid"},
                     "horizon": 1})
    assert r.status_code == 422
    # assimilation step beyond the horizon
    r = c.post("/api/v1/forecasts", json=synth_request(
        horizon=2, da={"every": 3, "fraction": 0.2, "seed": 0}))
    assert r.status_code == 422 and r.json()["code"] == "format"


def test_forecast_with_assimilation_runs(tmp_path):
    c = make_client(tmp_path)
    fid = make_forecast(c, synth_request(
        horizon=4, da={"every": 2, "fraction": 0.2, "seed": 3}))
    meta = c.get("/api/v1/forecasts/%s" % fid).json()
    assert meta["assimilation_steps"] == [2, 4]
    assert meta["ntime"] == 5


def test_wgrid_init_source(tmp_path):
    c = make_client(tmp_path)
    grid = make_grid((30.0, 46.0), (130.0, 146.0), 16, 16)
    stack = gen_synthetic(grid, SynthParams(seed=3, velocity=(0.4, 0.1)),
                          5, step_seconds=3600)
    write_field_stack(tmp_path / "data" / "init.wgrid", stack)

    req = {"init": {"wgrid": "init.wgrid"}, "horizon": 0}
    fid = make_forecast(c, req)
    slice0 = c.get("/api/v1/forecasts/%s/fields/0/VHM0" % fid).json()
    want = stack.frames[0].values[0].astype("<f4").tobytes()
    assert base64.b64decode(slice0["data"]) == want

    assert c.post("/api/v1/forecasts",
                  json={"init": {"wgrid": "missing.wgrid"}, "horizon": 0}
                  ).status_code == 404
    assert c.post("/api/v1/forecasts",
                  json={"init": {"wgrid": "../esc.wgrid"}, "horizon": 0}
                  ).status_code == 422
    assert c.post("/api/v1/forecasts",
                  json=dict(req, resolution={"shape": [8, 8]})
                  ).status_code == 422
    # file has frames 0..4, so a schedule needing step 5 cannot be served
    r = c.post("/api/v1/forecasts",
               json={"init": {"wgrid": "init.wgrid"}, "horizon": 6,
                     "da": {"every": 5, "fraction": 0.2, "seed": 0}})
    assert r.status_code == 422


# -- field slices -----------------------------------------------------------

def test_field_slice_bytes_are_bit_identical(tmp_path):
    c = make_client(tmp_path)
    fid = make_forecast(c)
    stack = c.app.state.store.get_forecast(fid)
    for t in range(stack.ntime):
        for ch, name in enumerate(("VHM0", "VMDRX", "VMDRY", "VTPK")):
            payload = c.get("/api/v1/forecasts/%s/fields/%d/%s"
                            % (fid, t, name)).json()
            sent = base64.b64decode(payload["data"])
            assert sent == stack.frames[t].values[ch].tobytes()
            got = np.frombuffer(sent, dtype="<f4").reshape(payload["shape"])
            assert np.array_equal(got, stack.frames[t].values[ch])
    mask = base64.b64decode(payload["mask"])
    assert np.array_equal(
        np.frombuffer(mask, dtype=np.uint8).reshape(payload["shape"]),
        stack.grid.mask.astype(np.uint8))


def test_field_slice_metadata_and_channel_index(tmp_path):
    c = make_client(tmp_path)
    fid = make_forecast(c)
    by_name = c.get("/api/v1/forecasts/%s/fields/1/VTPK" % fid).json()
    by_index = c.get("/api/v1/forecasts/%s/fields/1/3" % fid).json()
    assert by_name["data"] == by_index["data"]
    assert by_name["channel"] == "VTPK"
    assert by_name["vmin"] <= by_name["vmax"]
    assert by_name["bbox"] == {"lat_min": 30.0, "lat_max": 46.0,
                               "lon_min": 130.0, "lon_max": 146.0}


def test_field_slice_errors(tmp_path):
    c = make_client(tmp_path)
    fid = make_forecast(c, synth_request(horizon=2))
    r = c.get("/api/v1/forecasts/%s/fields/3/VHM0" % fid)
    assert r.status_code == 416 and r.json()["code"] == "out-of-range"
    r = c.get("/api/v1/forecasts/%s/fields/-1/VHM0" % fid)
    assert r.status_code == 416
    r = c.get("/api/v1/forecasts/%s/fields/0/SWELL" % fid)
    assert r.status_code == 422
    r = c.get("/api/v1/forecasts/f-unknown/fields/0/VHM0")
    assert r.status_code == 404 and r.json()["code"] == "not-found"


# -- routes -----------------------------------------------------------------

def test_calm_forecast_routes_agree(tmp_path):
    c = make_client(tmp_path)
    fid = make_forecast(c, calm_request())
    resp = make_route(c, fid)
    opt = resp["routes"]["optimized"]
    mind = resp["routes"]["min_distance"]
    for key in ("voyage_hours", "fuel_mt", "miles_nm"):
        assert opt["summary"][key] == pytest.approx(mind["summary"][key],
                                                    abs=1e-9)
    opt_nodes = [leg["node"] for leg in opt["route"]["legs"]]
    min_nodes = [leg["node"] for leg in mind["route"]["legs"]]
    assert opt_nodes == min_nodes


def test_route_summary_matches_analytics_module(tmp_path):
    """The response must carry exactly what route_summary computes."""
    c = make_client(tmp_path)
    fid = make_forecast(c)
    resp = make_route(c, fid)
    ship = get_ship("tokai-liner")
    opt = route_from_json(resp["routes"]["optimized"]["route"])
    mind = route_from_json(resp["routes"]["min_distance"]["route"])
    assert resp["routes"]["optimized"]["summary"] == summary_to_json(
        route_summary(opt, ship, baseline=mind))
    assert resp["routes"]["min_distance"]["summary"] == summary_to_json(
        route_summary(mind, ship))


def test_route_legs_carry_per_leg_analytics(tmp_path):
    c = make_client(tmp_path)
    fid = make_forecast(c)
    resp = make_route(c, fid)
    rid = resp["route_id"]
    doc = c.get("/api/v1/routes/%s/legs" % rid).json()
    route = route_from_json(resp["routes"]["optimized"]["route"])
    stats = analyze_route(route, get_ship("tokai-liner"))
    assert doc["route_id"] == rid and doc["kind"] == "optimized"
    assert len(doc["legs"]) == len(route.legs)
    assert doc["departure_time"] == route.departure_time
    assert doc["arrival_time"] == route.legs[-1].arrival_time
    for leg_doc, leg, a in zip(doc["legs"], route.legs, stats):
        assert leg_doc["node"] == leg.node
        assert leg_doc["departure_time"] == leg.departure_time
        assert leg_doc["power_kw"] == a.power_kw
        assert leg_doc["fuel_kg"] == a.fuel_kg
        assert leg_doc["co2_kg"] == a.co2_kg
        assert leg_doc["surf_riding"] is a.surf_riding
        assert leg_doc["parametric_roll"] is a.parametric_roll
        assert leg_doc["flagged"] is a.flagged
    assert c.get("/api/v1/routes/r-none/legs").status_code == 404


def test_segment_endpoint_matches_segment_filter(tmp_path):
    c = make_client(tmp_path)
    fid = make_forecast(c)
    resp = make_route(c, fid)
    rid = resp["route_id"]
    route = route_from_json(resp["routes"]["optimized"]["route"])
    ship = get_ship("tokai-liner")
    stats = analyze_route(route, ship)
    dep = route.departure_time
    arr = route.legs[-1].arrival_time
    mid = 0.5 * (dep + arr)

    r = c.get("/api/v1/routes/%s/segment" % rid,
              params={"t_start": dep, "t_end": mid})
    assert r.status_code == 200
    expected = summary_to_json(segment_filter(route, stats, dep, mid))
    assert r.json()["summary"] == expected

    # the full window reproduces the route totals
    r = c.get("/api/v1/routes/%s/segment" % rid,
              params={"t_start": dep, "t_end": arr + 1.0})
    assert r.json()["summary"] == summary_to_json(
        route_summary(route, ship))

    # an inverted window is a client error, an unknown route is a 404
    r = c.get("/api/v1/routes/%s/segment" % rid,
              params={"t_start": mid, "t_end": mid})
    assert r.status_code == 422
    r = c.get("/api/v1/routes/r-none/segment",
              params={"t_start": 0.0, "t_end": 1.0})
    assert r.status_code == 404


def test_route_with_custom_ship_and_departure(tmp_path):
    c = make_client(tmp_path)
    fid = make_forecast(c, synth_request(horizon=2))
    meta = c.get("/api/v1/forecasts/%s" % fid).json()
    dep = meta["t0"] + meta["step_seconds"]
    resp = make_route(c, fid, ship={"preset": "tsugaru-feeder"},
                      departure=dep)
    assert resp["routes"]["optimized"]["route"]["departure_time"] == dep

    r = c.post("/api/v1/routes", json={
        "forecast_id": fid, "origin": "Tokyo", "dest": "Hakodate",
        "ship": {"preset": "tokai-liner", "warp": 9}})
    assert r.status_code == 422


def test_route_errors(tmp_path):
    c = make_client(tmp_path)
    fid = make_forecast(c)
    r = c.post("/api/v1/routes", json={"forecast_id": "f-none",
                                       "origin": "Tokyo",
                                       "dest": "Hakodate"})
    assert r.status_code == 404
    r = c.post("/api/v1/routes", json={"forecast_id": fid,
                                       "origin": [10.0, 100.0],
                                       "dest": "Hakodate"})
    assert r.status_code == 422 and r.json()["code"] == "snap"
    r = c.post("/api/v1/routes", json={"forecast_id": fid,
                                       "origin": "Tokyo", "dest": "Hakodate",
                                       "departure": 1.0e12})
    assert r.status_code == 422
    # a constraint blanketing the destination makes it unreachable
    poly = [[[41.0, 139.9], [41.0, 141.5], [42.4, 141.5], [42.4, 139.9]]]
    cid = c.post("/api/v1/constraints",
                 json={"polygons": poly}).json()["constraint_id"]
    r = c.post("/api/v1/routes", json={"forecast_id": fid,
                                       "origin": "Tokyo", "dest": "Hakodate",
                                       "constraint_id": cid})
    assert r.status_code == 409 and r.json()["code"] == "unreachable"


def test_static_client_hosting(tmp_path):
    static = tmp_path / "client"
    static.mkdir()
    (static / "index.html").write_text("<!doctype html><title>x</title>")
    c = make_client(tmp_path, static_dir=str(static))
    assert c.get("/").status_code == 200
    assert "doctype" in c.get("/index.html").text
    # the API namespace still wins over the static mount
    assert c.get("/api/v1/health").json()["status"] == "ok"
    with pytest.raises(Exception):
        make_client(tmp_path, static_dir=str(tmp_path / "missing"))


def test_constraint_validation(tmp_path):
    c = make_client(tmp_path)
    r = c.post("/api/v1/constraints",
               json={"polygons": [[[31.0, 131.0], [32.0, 132.0]]]})
    assert r.status_code == 422
    r = c.post("/api/v1/constraints",
               json={"polygons": [[[31.0], [32.0, 132.0], [33.0, 131.0]]]})
    assert r.status_code == 422
    # a closing vertex equal to the first is dropped, not counted
    r = c.post("/api/v1/constraints", json={"polygons": [
        [[31.0, 131.0], [32.0, 132.0], [31.0, 131.0]]]})
    assert r.status_code == 422


# -- rehearsals ----------------------------------------------------------

def test_rehearsal_with_no_polygons_equals_base(tmp_path):
    c = make_client(tmp_path)
    fid = make_forecast(c)
    base = make_route(c, fid)
    r = c.post("/api/v1/rehearsals", json={"route_id": base["route_id"],
                                           "polygons": []})
    assert r.status_code == 200
    body = r.json()
    base_nodes = [l["node"] for l in
                  base["routes"]["optimized"]["route"]["legs"]]
    assert [l["node"] for l in body["route"]["legs"]] == base_nodes
    assert all(v == 0.0 for v in body["comparison"]["deltas"].values())


def test_rehearsal_off_corridor_polygon_is_non_binding(tmp_path):
    c = make_client(tmp_path)
    fid = make_forecast(c)
    base = make_route(c, fid)
    # a zone in the far south-east corner, away from the Tokyo-Hakodate path
    poly = [[31.0, 143.5], [31.0, 145.5], [33.0, 145.5], [33.0, 143.5]]
    r = c.post("/api/v1/rehearsals", json={"route_id": base["route_id"],
                                           "polygons": [poly]})
    assert r.status_code == 200
    body = r.json()
    base_nodes = [l["node"] for l in
                  base["routes"]["optimized"]["route"]["legs"]]
    assert [l["node"] for l in body["route"]["legs"]] == base_nodes
    assert all(v == 0.0 for v in body["comparison"]["deltas"].values())


def test_rehearsal_blocking_polygon_changes_the_route(tmp_path):
    c = make_client(tmp_path)
    fid = make_forecast(c)
    base = make_route(c, fid)
    poly = [[37.0, 138.0], [37.0, 142.0], [39.5, 142.0], [39.5, 138.0]]
    r = c.post("/api/v1/rehearsals", json={"route_id": base["route_id"],
                                           "polygons": [poly]})
    assert r.status_code == 200
    body = r.json()
    assert body["summary"]["voyage_hours"] >= \
        base["routes"]["optimized"]["summary"]["voyage_hours"]
    assert body["comparison"]["base"] == \
        base["routes"]["optimized"]["summary"]


def test_sixth_rehearsal_is_rejected(tmp_path):
    c = make_client(tmp_path)
    fid = make_forecast(c)
    rid = make_route(c, fid)["route_id"]
    for _ in range(5):
        assert c.post("/api/v1/rehearsals",
                      json={"route_id": rid,
                            "polygons": []}).status_code == 200
    r = c.post("/api/v1/rehearsals", json={"route_id": rid, "polygons": []})
    assert r.status_code == 409
    assert r.json()["message"] == "rehearsal limit reached"


def test_concurrent_rehearsals_never_exceed_the_limit(tmp_path):
    c = make_client(tmp_path)
    fid = make_forecast(c)
    rid = make_route(c, fid)["route_id"]

    def fire(_):
        return c.post("/api/v1/rehearsals",
                      json={"route_id": rid, "polygons": []}).status_code

    with ThreadPoolExecutor(max_workers=8) as pool:
        codes = sorted(pool.map(fire, range(8)))
    assert codes == [200] * 5 + [409] * 3
    assert len(c.app.state.store.rehearsal_ids(rid)) == 5


def test_rehearsal_input_errors(tmp_path):
    c = make_client(tmp_path)
    fid = make_forecast(c)
    resp = make_route(c, fid)
    assert c.post("/api/v1/rehearsals",
                  json={"route_id": "r-none",
                        "polygons": []}).status_code == 404
    # the min-distance companion is not a rehearsal base
    r = c.post("/api/v1/rehearsals",
               json={"route_id": resp["min_distance_route_id"],
                     "polygons": []})
    assert r.status_code == 422
    # a degenerate polygon is rejected before a slot is reserved
    r = c.post("/api/v1/rehearsals",
               json={"route_id": resp["route_id"],
                     "polygons": [[[31.0, 131.0]]]})
    assert r.status_code == 422
    for _ in range(5):
        assert c.post("/api/v1/rehearsals",
                      json={"route_id": resp["route_id"],
                            "polygons": []}).status_code == 200


# -- scenarios ----------------------------------------------------------

def test_scenario_save_load_round_trip(tmp_path):
    c = make_client(tmp_path)
    fid = make_forecast(c)
    base = make_route(c, fid)
    reh = c.post("/api/v1/rehearsals",
                 json={"route_id": base["route_id"],
                       "polygons": [[[37.0, 138.0], [37.0, 142.0],
                                     [39.5, 142.0], [39.5, 138.0]]]}).json()
    r = c.post("/api/v1/scenarios", json={"route_id": base["route_id"],
                                          "name": "northbound"})
    assert r.status_code == 200, r.text
    sid = r.json()["scenario_id"]
    saved = r.json()["scenario"]
    assert saved["routes"]["base"] == base["route_id"]
    assert saved["routes"]["min_distance"] == base["min_distance_route_id"]
    assert saved["routes"]["rehearsals"] == [reh["route_id"]]
    assert saved["forecast_id"] == fid
    assert set(saved["summaries"]) == {base["route_id"],
                                       base["min_distance_route_id"],
                                       reh["route_id"]}
    # load is the exact inverse of save
    assert c.get("/api/v1/scenarios/%s" % sid).json() == saved
    listing = c.get("/api/v1/scenarios").json()["scenarios"]
    assert [d["id"] for d in listing] == [sid]
    assert listing[0]["name"] == "northbound"


def test_scenario_errors(tmp_path):
    c = make_client(tmp_path)
    r = c.post("/api/v1/scenarios", json={"route_id": "r-none"})
    assert r.status_code == 422
    assert r.json()["code"] == "dangling-reference"
    assert c.get("/api/v1/scenarios/s-none").status_code == 404
    assert c.get("/api/v1/scenarios/s-none/export").status_code == 404
    r = c.post("/api/v1/scenarios", json={"route_id": "r-1", "typo": 1})
    assert r.status_code == 422


def test_scenario_export_reimport_reproduces_summaries(tmp_path):
    c = make_client(tmp_path)
    fid = make_forecast(c)
    base = make_route(c, fid)
    c.post("/api/v1/rehearsals",
           json={"route_id": base["route_id"],
                 "polygons": [[[37.0, 138.0], [37.0, 142.0],
                               [39.5, 142.0], [39.5, 138.0]]]})
    sid = c.post("/api/v1/scenarios",
                 json={"route_id": base["route_id"]}).json()["scenario_id"]
    bundle = c.get("/api/v1/scenarios/%s/export" % sid).json()
    assert set(bundle["embedded"]) == set(bundle["summaries"])

    fresh = make_client(tmp_path / "second")
    r = fresh.post("/api/v1/scenarios", json=bundle)
    assert r.status_code == 200, r.text
    remap = r.json()["route_ids"]
    new_summaries = r.json()["scenario"]["summaries"]
    for old_id, new_id in remap.items():
        assert new_summaries[new_id] == bundle["summaries"][old_id]


def test_scenario_files_survive_restart(tmp_path):
    cfg = ServiceConfig(data_dir=str(tmp_path / "data"))
    c = TestClient(create_app(cfg), raise_server_exceptions=False)
    fid = make_forecast(c)
    rid = make_route(c, fid)["route_id"]
    sid = c.post("/api/v1/scenarios",
                 json={"route_id": rid}).json()["scenario_id"]
    doc = c.get("/api/v1/scenarios/%s" % sid).json()

    c2 = TestClient(create_app(cfg), raise_server_exceptions=False)
    assert c2.get("/api/v1/scenarios/%s" % sid).json() == doc


# -- model loading and failure surfaces -----------------------------------

def test_blown_up_rollout_reports_diagnostics(tmp_path):
    w = init_weights(kmax=1, width=2, seed=0)
    w = replace(w, lift_w=np.full_like(w.lift_w, 10.0),
                pw1_w=np.full_like(w.pw1_w, 10.0),
                pw2_w=np.full_like(w.pw2_w, 10.0),
                proj_w=np.full_like(w.proj_w, 10.0))
    wpath = tmp_path / "explosive.wgts"
    save_weights(wpath, w)
    c = make_client(tmp_path, weights_path=str(wpath))
    assert c.get("/api/v1/health").json()["model"] == "surrogate"

    r = c.post("/api/v1/forecasts", json=synth_request(horizon=40))
    assert r.status_code == 500
    body = r.json()
    assert body["code"] == "blow-up"
    assert body["detail"]["job"]["status"] == "failed"
