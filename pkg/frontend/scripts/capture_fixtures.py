"""Record service responses for the browser-client test suite.

Drives the real HTTP app in-process through the exact call sequence the
client makes (forecast, slices, route, legs, constraint, rehearsal,
segment windows) and writes each request/response pair to
frontend/tests/fixtures/.  The vitest suite replays these documents from
a mock fetch, so every number the tests assert against came out of the
real service.

The constraint ring is computed with the same equirectangular pixel
arithmetic the client uses (IEEE doubles, same operation order), so the
test can check the POSTed polygon equals this fixture bit for bit.

Run from the repository root:

    python3 frontend/scripts/capture_fixtures.py
"""

import json
import pathlib
import sys
import tempfile

from fastapi.testclient import TestClient

from swrkit.config import ServiceConfig
from swrkit.service import create_app

OUT_DIR = pathlib.Path(__file__).resolve().parent.parent / "tests" / "fixtures"

MAP_SIZE = 480.0

FORECAST_REQUEST = {
    "init": {"synthetic": {"seed": 5, "velocity": [0.4, 0.25],
                           "diffusion": 0.2}},
    "horizon": 2,
    "resolution": {"shape": [24, 24]},
}

# Rectangle drag on the 480x480 canvas, pixel coordinates.
DRAG_START = (290.0, 180.0)
DRAG_END = (330.0, 240.0)


def to_latlon(bbox, x, y):
    """Mirror of the client's MapProjection.toLatLon, same float ops."""
    lat_span = bbox["lat_max"] - bbox["lat_min"]
    lon_span = bbox["lon_max"] - bbox["lon_min"]
    lat = bbox["lat_max"] - (y / MAP_SIZE) * lat_span
    lon = bbox["lon_min"] + (x / MAP_SIZE) * lon_span
    return [lat, lon]


def rectangle_ring(bbox, start, end):
    """Mirror of the client's rectangleRing corner order."""
    (x0, y0), (x1, y1) = start, end
    return [to_latlon(bbox, x0, y0), to_latlon(bbox, x1, y0),
            to_latlon(bbox, x1, y1), to_latlon(bbox, x0, y1)]


def get(client, path, **params):
    r = client.get("/api/v1" + path, params=params or None)
    assert r.status_code == 200, (path, r.status_code, r.text)
    return r.json()


def post(client, path, body):
    r = client.post("/api/v1" + path, json=body)
    assert r.status_code == 200, (path, r.status_code, r.text)
    return r.json()


def save(name, doc):
    path = OUT_DIR / name
    path.write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n")
    print("wrote", path.relative_to(OUT_DIR.parent.parent))


def main():
    OUT_DIR.mkdir(parents=True, exist_ok=True)
    tmp = tempfile.mkdtemp(prefix="swrviz-fixtures-")
    cfg = ServiceConfig(data_dir=tmp)
    client = TestClient(create_app(cfg), raise_server_exceptions=False)

    save("ships.json", get(client, "/ships"))

    forecast = post(client, "/forecasts", FORECAST_REQUEST)
    save("forecast.json", {"request": FORECAST_REQUEST, "response": forecast})
    fid = forecast["forecast_id"]

    bbox = None
    for t in range(forecast["meta"]["ntime"]):
        doc = get(client, "/forecasts/%s/fields/%d/VHM0" % (fid, t))
        save("slice%d.json" % t, doc)
        bbox = doc["bbox"]
    save("slice0_vtpk.json", get(client, "/forecasts/%s/fields/0/VTPK" % fid))

    route_request = {"forecast_id": fid, "origin": "Tokyo",
                     "dest": "Hakodate"}
    route = post(client, "/routes", route_request)
    save("route.json", {"request": route_request, "response": route})
    rid = route["route_id"]
    min_rid = route["min_distance_route_id"]

    save("legs_optimized.json", get(client, "/routes/%s/legs" % rid))
    save("legs_min_distance.json", get(client, "/routes/%s/legs" % min_rid))

    ring = rectangle_ring(bbox, DRAG_START, DRAG_END)
    constraint_request = {"polygons": [ring]}
    constraint = post(client, "/constraints", constraint_request)
    save("constraint.json", {"request": constraint_request,
                             "response": constraint})

    rehearsal_request = {"route_id": rid,
                         "polygons": constraint["polygons"]}
    rehearsal = post(client, "/rehearsals", rehearsal_request)
    save("rehearsal.json", {"request": rehearsal_request,
                            "response": rehearsal})
    reh_rid = rehearsal["route_id"]
    save("legs_rehearsal.json", get(client, "/routes/%s/legs" % reh_rid))

    legs = get(client, "/routes/%s/legs" % rid)
    dep = legs["departure_time"]
    arr = legs["arrival_time"]
    mid = dep + 0.5 * (arr - dep)
    segments = []
    for target in (rid, reh_rid):
        for t_start, t_end in ((dep, mid), (dep, arr + 1.0)):
            doc = get(client, "/routes/%s/segment" % target,
                      t_start=t_start, t_end=t_end)
            segments.append(doc)
    save("segments.json", {"windows": {"dep": dep, "mid": mid, "arr": arr},
                           "responses": segments})

    # Fill the rehearsal cap to record the verbatim 409 limit error.
    for _ in range(4):
        post(client, "/rehearsals", {"route_id": rid, "polygons": []})
    r = client.post("/api/v1/rehearsals",
                    json={"route_id": rid, "polygons": []})
    assert r.status_code == 409, r.text
    save("limit_error.json", {"status": r.status_code, "body": r.json()})

    r = client.get("/api/v1/forecasts/f-9999/fields/0/VHM0")
    assert r.status_code == 404, r.text
    save("missing_field_error.json", {"status": r.status_code,
                                      "body": r.json()})
    return 0


if __name__ == "__main__":
    sys.exit(main())
