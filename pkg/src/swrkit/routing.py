"""Ships, speed loss in waves, and time-dependent route optimization.

Routes are searched with A* over the navigation mesh. Edge traversal time
is distance over the wave-degraded speed, with waves sampled at the edge's
midpoint cell from the frame nearest the edge's departure time, so costs
are piecewise constant in time and waiting at a node never pays. The
heuristic (great-circle distance to the goal at design speed) never
overestimates because waves only slow the ship down.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import NamedTuple

from .errors import UnreachableError
from .geo import haversine_nm
from .grids import VHM0, VMDRX, VMDRY, VTPK, decode_direction
from .mesh import snap_to_node

KIND_MIN_DISTANCE = "minimum-distance"
KIND_OPTIMIZED = "optimized"
KIND_REHEARSAL = "rehearsal"


class WaveSample(NamedTuple):
    """Waves met on a leg: height (m), from-direction (deg), peak period (s)."""

    height_m: float
    from_deg: float
    period_s: float


CALM = WaveSample(0.0, 0.0, 0.0)


@dataclass(frozen=True)
class Ship:
    """Vessel parameters used by the speed, power, and safety models."""

    name: str
    v_design: float
    p_installed: float
    sfoc: float
    length: float
    displacement: float
    roll_period: float
    load_factor: float = 0.8
    v_min: float = 4.0

    def __post_init__(self):
        for attr in ("v_design", "p_installed", "sfoc", "length",
                     "displacement", "roll_period", "load_factor", "v_min"):
            if not getattr(self, attr) > 0:
                raise ValueError("ship %s must be positive" % attr)
        if self.load_factor > 1:
            raise ValueError("ship load_factor must be in (0, 1]")
        if not self.v_min < self.v_design:
            raise ValueError("ship v_min must be below v_design")


def encounter_angle_deg(heading_deg, wave_from_deg):
    """Angle between the ship's course and the oncoming waves, in [0, 180].

    0 means head seas (waves arriving from dead ahead), 180 following seas.
    """
    d = (heading_deg - wave_from_deg) % 360.0
    return 360.0 - d if d > 180.0 else d


def effective_speed(ship, wave, heading_deg):
    """Speed over ground after involuntary wave-induced loss, in knots.

    The loss grows with wave height and is strongest in head seas, fading
    linearly with the encounter angle in radians; a displacement-dependent
    factor (clamped to [0.1, 1]) scales it, and the result never drops
    below the ship's v_min nor exceeds v_design.
    """
    q = math.radians(encounter_angle_deg(heading_deg, wave.from_deg))
    raw = 0.745 * wave.height_m - 0.257 * q * wave.height_m
    factor = 1.0 - 1.35e-6 * ship.displacement * ship.v_design
    factor = min(1.0, max(0.1, factor))
    dv = max(0.0, raw) * factor
    return max(ship.v_min, ship.v_design - dv)


@dataclass(frozen=True)
class RouteLeg:
    """One edge traversal: arrival node, timing, and the waves met."""

    node: int
    lat: float
    lon: float
    departure_time: float
    arrival_time: float
    heading_deg: float
    distance_nm: float
    v_eff_knots: float
    wave_height_m: float
    wave_from_deg: float
    wave_period_s: float

    @property
    def hours(self):
        return (self.arrival_time - self.departure_time) / 3600.0


@dataclass(frozen=True)
class Route:
    """A node path with per-leg timing, speeds, and sampled waves."""

    kind: str
    origin: int
    destination: int
    origin_latlon: tuple
    dest_latlon: tuple
    departure_time: float
    legs: tuple
    total_nm: float
    total_hours: float


def field_sampler(mesh, fields):
    """Sampler giving the waves met on an edge departing at time t.

    Uses the frame nearest the departure time and the cell containing the
    edge midpoint. Land midpoint cells hold the zero sentinel and so read
    as calm water.
    """
    vals = fields.values4d()
    nlon = mesh.grid.nlon

    def sample(edge, t):
        k = fields.frame_index_at(t)
        i, j = divmod(int(mesh.mid_cell[edge]), nlon)
        return WaveSample(float(vals[k, VHM0, i, j]),
                          decode_direction(float(vals[k, VMDRX, i, j]),
                                           float(vals[k, VMDRY, i, j])),
                          float(vals[k, VTPK, i, j]))

    return sample


def calm_sampler(edge, t):
    """Sampler for flat water; every edge runs at design speed."""
    return CALM


def _astar(mesh, ship, origin_p, dest_p, departure, sampler, blocked):
    """Earliest-arrival search from origin to dest node positions.

    Returns (path of (node position, incoming edge index), hours). Ties on
    f are broken by smaller heuristic, then smaller node index, so equal
    -cost instances resolve identically across calls.
    """
    if blocked is not None and (blocked[origin_p] or blocked[dest_p]):
        raise UnreachableError("unreachable: an endpoint is inside a constraint")
    goal_lat = mesh.node_lat[dest_p]
    goal_lon = mesh.node_lon[dest_p]
    hcache = {}

    def heur(p):
        h = hcache.get(p)
        if h is None:
            h = haversine_nm(mesh.node_lat[p], mesh.node_lon[p],
                             goal_lat, goal_lon) / ship.v_design
            hcache[p] = h
        return h

    indptr = mesh.indptr
    to_node = mesh.to_node
    dist_nm = mesh.distance_nm
    heading = mesh.heading_deg
    g = {origin_p: 0.0}
    parent = {}
    settled = set()
    h0 = heur(origin_p)
    pq = [(h0, h0, origin_p)]
    while pq:
        _, _, u = heapq.heappop(pq)
        if u in settled:
            continue
        settled.add(u)
        if u == dest_p:
            break
        gu = g[u]
        t_dep = departure + gu * 3600.0
        for e in range(int(indptr[u]), int(indptr[u + 1])):
            v = int(to_node[e])
            if v in settled or (blocked is not None and blocked[v]):
                continue
            speed = effective_speed(ship, sampler(e, t_dep), heading[e])
            gv = gu + dist_nm[e] / speed
            if gv < g.get(v, math.inf):
                g[v] = gv
                parent[v] = (u, e)
                hv = heur(v)
                heapq.heappush(pq, (gv + hv, hv, v))
    if dest_p not in settled:
        raise UnreachableError("unreachable: no ocean path between the endpoints")

    path = []
    p = dest_p
    while p != origin_p:
        u, e = parent[p]
        path.append((p, e))
        p = u
    path.append((origin_p, None))
    path.reverse()
    return path, g[dest_p]


def _build_route(mesh, ship, path, departure, sampler, kind):
    """Walk a node path accumulating leg times with the given sampler."""
    nlon = mesh.grid.nlon
    legs = []
    elapsed = 0.0
    for p, e in path[1:]:
        t_dep = departure + elapsed * 3600.0
        wave = sampler(e, t_dep)
        speed = effective_speed(ship, wave, mesh.heading_deg[e])
        elapsed = elapsed + mesh.distance_nm[e] / speed
        legs.append(RouteLeg(
            node=int(mesh.nodes[p]),
            lat=float(mesh.node_lat[p]),
            lon=float(mesh.node_lon[p]),
            departure_time=t_dep,
            arrival_time=departure + elapsed * 3600.0,
            heading_deg=float(mesh.heading_deg[e]),
            distance_nm=float(mesh.distance_nm[e]),
            v_eff_knots=speed,
            wave_height_m=wave.height_m,
            wave_from_deg=wave.from_deg,
            wave_period_s=wave.period_s,
        ))
    origin_p = path[0][0]
    dest_p = path[-1][0]
    total_nm = float(sum(mesh.distance_nm[e] for _, e in path[1:]))
    return Route(
        kind=kind,
        origin=int(mesh.nodes[origin_p]),
        destination=int(mesh.nodes[dest_p]),
        origin_latlon=(float(mesh.node_lat[origin_p]), float(mesh.node_lon[origin_p])),
        dest_latlon=(float(mesh.node_lat[dest_p]), float(mesh.node_lon[dest_p])),
        departure_time=float(departure),
        legs=tuple(legs),
        total_nm=total_nm,
        total_hours=elapsed,
    )


def _check_departure(fields, departure):
    t_last = fields.times()[-1]
    if not fields.t0 <= departure <= t_last:
        raise ValueError("departure %s outside field time range [%s, %s]"
                         % (departure, fields.t0, t_last))


def optimize_route(mesh, fields, ship, origin, dest, departure,
                   constraint=None, kind=KIND_OPTIMIZED):
    """Time-optimal route between lat/lon endpoints under evolving waves.

    Endpoints snap to the nearest ocean node within 5 cells. Cells blocked
    by the constraint are removed from the search. Departure must fall
    within the field stack's time span; legs beyond the last frame sail
    under that frame's waves.
    """
    _check_departure(fields, departure)
    origin_p = snap_to_node(mesh, origin[0], origin[1], label="origin")
    dest_p = snap_to_node(mesh, dest[0], dest[1], label="destination")
    blocked = None if constraint is None else constraint.blocked_nodes(mesh)
    sampler = field_sampler(mesh, fields)
    path, _ = _astar(mesh, ship, origin_p, dest_p, float(departure),
                     sampler, blocked)
    return _build_route(mesh, ship, path, float(departure), sampler, kind)


def min_distance_route(mesh, ship, origin, dest, fields=None,
                       departure=None, constraint=None):
    """Shortest-distance route, with leg times evaluated after the fact.

    The path ignores waves entirely (every edge priced at design speed, so
    cost is proportional to distance). When a field stack is supplied the
    legs are then timed under its waves with the same speed model the
    optimizer uses; otherwise the route is timed on flat water.
    """
    if departure is None:
        departure = fields.t0 if fields is not None else 0.0
    if fields is not None:
        _check_departure(fields, departure)
    origin_p = snap_to_node(mesh, origin[0], origin[1], label="origin")
    dest_p = snap_to_node(mesh, dest[0], dest[1], label="destination")
    blocked = None if constraint is None else constraint.blocked_nodes(mesh)
    path, _ = _astar(mesh, ship, origin_p, dest_p, float(departure),
                     calm_sampler, blocked)
    sampler = field_sampler(mesh, fields) if fields is not None else calm_sampler
    return _build_route(mesh, ship, path, float(departure), sampler,
                        KIND_MIN_DISTANCE)


def route_to_json(route):
    """Plain-dict form of a route, one entry per leg field."""
    return {
        "kind": route.kind,
        "origin": {"node": route.origin,
                   "lat": route.origin_latlon[0], "lon": route.origin_latlon[1]},
        "destination": {"node": route.destination,
                        "lat": route.dest_latlon[0], "lon": route.dest_latlon[1]},
        "departure_time": route.departure_time,
        "total_nm": route.total_nm,
        "total_hours": route.total_hours,
        "legs": [{
            "node": leg.node,
            "lat": leg.lat,
            "lon": leg.lon,
            "departure_time": leg.departure_time,
            "arrival_time": leg.arrival_time,
            "heading_deg": leg.heading_deg,
            "distance_nm": leg.distance_nm,
            "v_eff_knots": leg.v_eff_knots,
            "wave_height_m": leg.wave_height_m,
            "wave_from_deg": leg.wave_from_deg,
            "wave_period_s": leg.wave_period_s,
        } for leg in route.legs],
    }


def route_from_json(doc):
    """Inverse of route_to_json."""
    legs = tuple(RouteLeg(
        node=int(d["node"]),
        lat=float(d["lat"]),
        lon=float(d["lon"]),
        departure_time=float(d["departure_time"]),
        arrival_time=float(d["arrival_time"]),
        heading_deg=float(d["heading_deg"]),
        distance_nm=float(d["distance_nm"]),
        v_eff_knots=float(d["v_eff_knots"]),
        wave_height_m=float(d["wave_height_m"]),
        wave_from_deg=float(d["wave_from_deg"]),
        wave_period_s=float(d["wave_period_s"]),
    ) for d in doc["legs"])
    return Route(
        kind=doc["kind"],
        origin=int(doc["origin"]["node"]),
        destination=int(doc["destination"]["node"]),
        origin_latlon=(float(doc["origin"]["lat"]), float(doc["origin"]["lon"])),
        dest_latlon=(float(doc["destination"]["lat"]), float(doc["destination"]["lon"])),
        departure_time=float(doc["departure_time"]),
        legs=legs,
        total_nm=float(doc["total_nm"]),
        total_hours=float(doc["total_hours"]),
    )


def route_to_geojson(route):
    """GeoJSON Feature with a LineString through every waypoint."""
    coords = [[route.origin_latlon[1], route.origin_latlon[0]]]
    coords.extend([leg.lon, leg.lat] for leg in route.legs)
    return {
        "type": "Feature",
        "geometry": {"type": "LineString", "coordinates": coords},
        "properties": {
            "kind": route.kind,
            "departure_time": route.departure_time,
            "total_nm": route.total_nm,
            "total_hours": route.total_hours,
        },
    }
