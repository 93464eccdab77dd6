"""In-process object store behind the HTTP service.

Append-only maps guarded by one lock: forecasts (idempotent by request
hash), routes, constraints, job handles, and scenarios.  Scenarios are
additionally persisted as one JSON file each under
``<data_dir>/scenarios/``, written atomically and re-read on startup, so
saved work survives restarts and stays diffable.

The rehearsal budget (at most five per base route) uses
reserve/commit/release accounting so concurrent requests cannot
oversubscribe a slot: a reservation is taken before the expensive
re-optimization runs and is released if it fails.
"""

from __future__ import annotations

import hashlib
import itertools
import json
import os
import threading
import time
from dataclasses import dataclass, field

from .errors import FormatError, LimitError, NotFoundError

MAX_REHEARSALS = 5


def canonical_request_hash(doc):
    """Hash of the canonical serialization of a JSON-able request."""
    blob = json.dumps(doc, sort_keys=True, separators=(",", ":"),
                      ensure_ascii=True)
    return hashlib.sha256(blob.encode("ascii")).hexdigest()[:12]


@dataclass
class JobHandle:
    """Execution record for a create endpoint; terminal states immutable."""

    id: str
    kind: str
    status: str = "pending"
    error: str | None = None

    def finish(self, status, error=None):
        if self.status in ("done", "failed"):
            raise ValueError("job %s already terminal" % self.id)
        if status not in ("done", "failed"):
            raise ValueError("bad terminal status %r" % (status,))
        self.status = status
        self.error = error

    def to_doc(self):
        return {"id": self.id, "kind": self.kind, "status": self.status,
                "error": self.error}


@dataclass
class RouteRecord:
    """A stored route plus everything needed to recompute its analytics."""

    route: object
    ship: object
    forecast_id: str
    summary: object
    kind: str
    constraint_id: str | None = None
    base_id: str | None = None          # set on rehearsal routes
    min_distance_id: str | None = None  # baseline used for reduction figures
    polygons: tuple = ()


class Store:
    def __init__(self, data_dir):
        self._lock = threading.RLock()
        self.data_dir = str(data_dir)
        self._forecasts = {}
        self._forecast_meta = {}
        self._by_request = {}
        self._routes = {}
        self._constraints = {}
        self._scenarios = {}
        self._jobs = {}
        self._rehearsals = {}
        self._reserved = {}
        self._seq = itertools.count(1)
        os.makedirs(self._scenario_dir, exist_ok=True)
        self._load_scenarios()

    @property
    def _scenario_dir(self):
        return os.path.join(self.data_dir, "scenarios")

    def _next_id(self, prefix):
        # skip ids already taken, e.g. scenarios re-read from disk
        while True:
            cand = "%s-%04d" % (prefix, next(self._seq))
            if not (cand in self._routes or cand in self._constraints
                    or cand in self._scenarios or cand in self._jobs):
                return cand

    # -- jobs ----------------------------------------------------------
    def new_job(self, kind):
        with self._lock:
            job = JobHandle(self._next_id("j"), kind)
            self._jobs[job.id] = job
            return job

    def get_job(self, job_id):
        with self._lock:
            if job_id not in self._jobs:
                raise NotFoundError("unknown job %r" % (job_id,))
            return self._jobs[job_id]

    # -- forecasts ------------------------------------------------------
    def forecast_id_for(self, request_doc):
        return "f-" + canonical_request_hash(request_doc)

    def lookup_forecast_request(self, request_doc):
        """Forecast id for an identical earlier request, else None."""
        with self._lock:
            return self._by_request.get(canonical_request_hash(request_doc))

    def put_forecast(self, request_doc, stack, meta):
        with self._lock:
            h = canonical_request_hash(request_doc)
            fid = "f-" + h
            if h not in self._by_request:
                self._by_request[h] = fid
                self._forecasts[fid] = stack
                self._forecast_meta[fid] = dict(meta)
            return fid

    def get_forecast(self, fid):
        with self._lock:
            if fid not in self._forecasts:
                raise NotFoundError("unknown forecast %r" % (fid,))
            return self._forecasts[fid]

    def forecast_meta(self, fid):
        with self._lock:
            if fid not in self._forecast_meta:
                raise NotFoundError("unknown forecast %r" % (fid,))
            return self._forecast_meta[fid]

    def set_forecast_meta(self, fid, **extra):
        with self._lock:
            self._forecast_meta[fid].update(extra)

    # -- constraints ----------------------------------------------------
    def add_constraint(self, polygons):
        with self._lock:
            cid = self._next_id("c")
            self._constraints[cid] = tuple(tuple(tuple(v) for v in poly)
                                           for poly in polygons)
            return cid

    def get_constraint(self, cid):
        with self._lock:
            if cid not in self._constraints:
                raise NotFoundError("unknown constraint %r" % (cid,))
            return self._constraints[cid]

    # -- routes ---------------------------------------------------------
    def add_route(self, record):
        with self._lock:
            rid = self._next_id("r")
            self._routes[rid] = record
            return rid

    def get_route(self, rid):
        with self._lock:
            if rid not in self._routes:
                raise NotFoundError("unknown route %r" % (rid,))
            return self._routes[rid]

    # -- rehearsal accounting --------------------------------------------
    def reserve_rehearsal(self, base_rid):
        """Atomically claim one of the five rehearsal slots of a route."""
        with self._lock:
            if base_rid not in self._routes:
                raise NotFoundError("unknown route %r" % (base_rid,))
            used = (len(self._rehearsals.get(base_rid, ()))
                    + self._reserved.get(base_rid, 0))
            if used >= MAX_REHEARSALS:
                raise LimitError("rehearsal limit reached")
            self._reserved[base_rid] = self._reserved.get(base_rid, 0) + 1

    def commit_rehearsal(self, base_rid, rehearsal_rid):
        with self._lock:
            self._reserved[base_rid] -= 1
            self._rehearsals.setdefault(base_rid, []).append(rehearsal_rid)

    def release_rehearsal(self, base_rid):
        with self._lock:
            self._reserved[base_rid] -= 1

    def rehearsal_ids(self, base_rid):
        with self._lock:
            return tuple(self._rehearsals.get(base_rid, ()))

    # -- scenarios --------------------------------------------------------
    def save_scenario(self, doc):
        """Persist a scenario document; returns its id.

        References must resolve at save time; a dangling forecast or
        route id raises NotFoundError before anything is written.
        """
        with self._lock:
            if len(doc["routes"]["rehearsals"]) > MAX_REHEARSALS:
                raise LimitError("scenario exceeds the rehearsal limit")
            if doc.get("forecast_id") not in self._forecasts:
                raise NotFoundError("scenario references unknown forecast %r"
                                    % (doc.get("forecast_id"),))
            route_ids = [doc["routes"]["base"], *doc["routes"]["rehearsals"]]
            if doc["routes"].get("min_distance"):
                route_ids.append(doc["routes"]["min_distance"])
            for rid in route_ids:
                if rid not in self._routes:
                    raise NotFoundError("scenario references unknown route %r"
                                        % (rid,))
            sid = doc.get("id") or self._next_id("s")
            doc = dict(doc, id=sid)
            doc.setdefault("created_at", int(time.time()))
            self._scenarios[sid] = doc
            self._write_scenario(doc)
            return sid

    def get_scenario(self, sid):
        with self._lock:
            if sid not in self._scenarios:
                raise NotFoundError("unknown scenario %r" % (sid,))
            return self._scenarios[sid]

    def list_scenarios(self):
        with self._lock:
            return [dict(d) for d in self._scenarios.values()]

    def import_scenario(self, doc):
        """Store a scenario document as-is (routes already registered)."""
        with self._lock:
            sid = doc.get("id")
            if not sid or sid in self._scenarios:
                sid = self._next_id("s")
                doc = dict(doc, id=sid)
            self._scenarios[sid] = dict(doc)
            self._write_scenario(self._scenarios[sid])
            return sid

    def scenario_path(self, sid):
        return os.path.join(self._scenario_dir, "%s.json" % sid)

    def _write_scenario(self, doc):
        path = self.scenario_path(doc["id"])
        tmp = path + ".tmp"
        with open(tmp, "w") as f:
            json.dump(doc, f, indent=2, sort_keys=True)
            f.write("\n")
        os.replace(tmp, path)

    def _load_scenarios(self):
        for fname in sorted(os.listdir(self._scenario_dir)):
            if not fname.endswith(".json"):
                continue
            path = os.path.join(self._scenario_dir, fname)
            try:
                with open(path) as f:
                    doc = json.load(f)
            except (OSError, json.JSONDecodeError) as exc:
                raise FormatError("bad scenario file %s: %s" % (path, exc))
            self._scenarios[doc["id"]] = doc
