"""Bundled ship and port presets.

Small data tables so the service, the CLI, and the demos can reference
vessels and harbours by name.  The values are plausible coastal-shipping
figures shipped as convenience data; they are not measurements of any
particular vessel. Ports cover the north-west Pacific corridor the
standard benchmark grid spans.
"""

from __future__ import annotations

from typing import NamedTuple

from .errors import NotFoundError
from .routing import Ship


class Port(NamedTuple):
    name: str
    lat: float
    lon: float


PORTS = (
    Port("Tokyo", 35.62, 139.78),
    Port("Hakodate", 41.78, 140.73),
    Port("Sendai", 38.27, 141.62),
    Port("Kushiro", 42.98, 144.37),
    Port("Niigata", 37.95, 139.07),
)


SHIPS = (
    Ship(name="tokai-liner", v_design=24.0, p_installed=10000.0, sfoc=180.0,
         length=150.0, displacement=10000.0, roll_period=12.0),
    Ship(name="tsugaru-feeder", v_design=18.0, p_installed=12400.0,
         sfoc=178.0, length=135.0, displacement=18000.0, roll_period=11.0),
    Ship(name="kitamae-bulker", v_design=14.5, p_installed=7800.0,
         sfoc=175.0, length=190.0, displacement=45000.0, roll_period=14.0),
)

DEFAULT_SHIP = SHIPS[0].name


def get_ship(name):
    for ship in SHIPS:
        if ship.name == name:
            return ship
    raise NotFoundError("unknown ship preset %r" % (name,))


def get_port(name):
    for port in PORTS:
        if port.name.lower() == str(name).lower():
            return port
    raise NotFoundError("unknown port %r" % (name,))


SHIP_FIELDS = ("name", "v_design", "p_installed", "sfoc", "length",
               "displacement", "roll_period", "load_factor", "v_min")


def ship_to_doc(ship):
    """Plain-dict form of a ship."""
    return {f: getattr(ship, f) for f in SHIP_FIELDS}


def ship_from_doc(doc):
    """Build a Ship from a plain dict.

    Accepts {"preset": name} as a shorthand for a bundled vessel,
    optionally overriding individual fields.
    """
    doc = dict(doc)
    preset = doc.pop("preset", None)
    if preset is not None:
        base = ship_to_doc(get_ship(preset))
        base.update(doc)
        doc = base
    unknown = set(doc) - set(SHIP_FIELDS)
    if unknown:
        raise ValueError("unknown ship fields: %s" % ", ".join(sorted(unknown)))
    if "name" not in doc:
        doc["name"] = "custom"
    return Ship(**{k: (str(v) if k == "name" else float(v))
                   for k, v in doc.items()})
