"""Per-leg power, fuel and emissions, safety flagging, and route summaries.

The engine model keeps throttle at the commanded load while waves shed
speed involuntarily: demanded power rises with the speed deficit and is
capped at installed power. This keeps fuel and every emission total
non-decreasing when seas get rougher on a fixed path, matching how the
routing layer treats wave loss as involuntary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .routing import encounter_angle_deg

GRAVITY = 9.81

SUMMARY_QUANTITIES = ("fuel_mt", "co2_mt", "sox_mt", "nox_mt", "pm_mt")


@dataclass(frozen=True)
class EmissionFactors:
    """Mass factors per fuel burned or per energy produced."""

    co2_per_fuel: float = 3.114   # kg CO2 per kg fuel
    sox_per_fuel: float = 0.02    # kg SOx per kg fuel (about 1% sulfur fuel)
    nox_per_kwh: float = 14.0     # g NOx per kWh
    pm_per_kwh: float = 0.4       # g PM per kWh

    def __post_init__(self):
        for attr in ("co2_per_fuel", "sox_per_fuel", "nox_per_kwh", "pm_per_kwh"):
            if getattr(self, attr) < 0:
                raise ValueError("emission factor %s must be >= 0" % attr)


@dataclass(frozen=True)
class LegAnalytics:
    """Engine, fuel, emission, and safety results for one leg."""

    power_kw: float
    hours: float
    energy_kwh: float
    fuel_kg: float
    co2_kg: float
    sox_kg: float
    nox_kg: float
    pm_kg: float
    surf_riding: bool
    parametric_roll: bool

    @property
    def flagged(self):
        return self.surf_riding or self.parametric_roll


@dataclass(frozen=True)
class RouteSummary:
    """Route-level totals in the comparison-table column set."""

    voyage_hours: float
    fuel_mt: float
    co2_mt: float
    sox_mt: float
    nox_mt: float
    pm_mt: float
    miles_nm: float
    safety_pct: float
    reduction_pct: dict | None = None
    empty: bool = False


def leg_power(ship, v_eff_knots):
    """Engine power (kW) while holding load through an involuntary slowdown.

    Power grows linearly with the relative speed deficit and never exceeds
    installed power.
    """
    factor = 1.0 + (ship.v_design - v_eff_knots) / ship.v_design
    return min(ship.p_installed, ship.load_factor * ship.p_installed * factor)


def leg_emissions(power_kw, hours, ship, factors):
    """Energy, fuel, and emission masses for one leg at constant power."""
    energy = power_kw * hours
    fuel = energy * ship.sfoc / 1000.0
    return {
        "energy_kwh": energy,
        "fuel_kg": fuel,
        "co2_kg": fuel * factors.co2_per_fuel,
        "sox_kg": fuel * factors.sox_per_fuel,
        "nox_kg": energy * factors.nox_per_kwh / 1000.0,
        "pm_kg": energy * factors.pm_per_kwh / 1000.0,
    }


def safety_flags(leg, ship):
    """Surf-riding and parametric-roll checks for one leg.

    The encounter angle is 0 in head seas and 180 in following seas.
    Surf-riding triggers in following-to-quartering seas (angle > 135)
    when speed beats the hull-length threshold. Parametric roll triggers
    when the deep-water wavelength suits the hull (0.6 to 2.3 ship
    lengths) and the wave encounter period sits within 10% of the natural
    roll period or 5% of its half.
    """
    alpha = encounter_angle_deg(leg.heading_deg, leg.wave_from_deg)
    v = leg.v_eff_knots

    surf = False
    if alpha > 135.0:
        threshold = 1.8 * math.sqrt(ship.length) / math.cos(math.radians(180.0 - alpha))
        surf = v > threshold

    roll = False
    t_wave = leg.wave_period_s
    if t_wave > 0.0:
        wavelength = GRAVITY * t_wave * t_wave / (2.0 * math.pi)
        if 0.6 * ship.length <= wavelength <= 2.3 * ship.length:
            denom = 3.0 * t_wave + v * math.cos(math.radians(alpha))
            if abs(denom) > 1e-9:
                t_enc = 3.0 * t_wave * t_wave / denom
                t_roll = ship.roll_period
                roll = (abs(t_enc - t_roll) <= 0.1 * t_roll
                        or abs(t_enc - t_roll / 2.0) <= 0.05 * t_roll)
    return surf, roll


def analyze_route(route, ship, factors=None):
    """Per-leg analytics for every leg of a route."""
    if factors is None:
        factors = EmissionFactors()
    out = []
    for leg in route.legs:
        hours = leg.hours
        power = leg_power(ship, leg.v_eff_knots)
        masses = leg_emissions(power, hours, ship, factors)
        surf, roll = safety_flags(leg, ship)
        out.append(LegAnalytics(power_kw=power, hours=hours,
                                surf_riding=surf, parametric_roll=roll,
                                **masses))
    return out


def _totals(legs, analytics, safety_weighting):
    voyage_hours = sum(a.hours for a in analytics)
    fuel = sum(a.fuel_kg for a in analytics)
    co2 = sum(a.co2_kg for a in analytics)
    sox = sum(a.sox_kg for a in analytics)
    nox = sum(a.nox_kg for a in analytics)
    pm = sum(a.pm_kg for a in analytics)
    miles = sum(l.distance_nm for l in legs)
    if not analytics:
        safety = 0.0
    elif safety_weighting == "hours":
        total = sum(a.hours for a in analytics)
        safety = 100.0 * sum(a.hours for a in analytics if a.flagged) / total
    else:
        safety = 100.0 * sum(1 for a in analytics if a.flagged) / len(analytics)
    return {
        "voyage_hours": voyage_hours,
        "fuel_mt": fuel / 1000.0,
        "co2_mt": co2 / 1000.0,
        "sox_mt": sox / 1000.0,
        "nox_mt": nox / 1000.0,
        "pm_mt": pm / 1000.0,
        "miles_nm": miles,
        "safety_pct": safety,
    }


def route_summary(route, ship, factors=None, baseline=None,
                  safety_weighting="legs"):
    """Totals for a route, optionally with percent reductions vs a baseline.

    Reductions are reported per fuel/pollutant quantity; quantities whose
    baseline total is zero are omitted (the percentage is undefined).
    safety_weighting counts flagged legs by default; "hours" weights them
    by leg duration instead.
    """
    if safety_weighting not in ("legs", "hours"):
        raise ValueError("safety_weighting must be 'legs' or 'hours'")
    if factors is None:
        factors = EmissionFactors()
    analytics = analyze_route(route, ship, factors)
    totals = _totals(route.legs, analytics, safety_weighting)
    reduction = None
    if baseline is not None:
        base_analytics = analyze_route(baseline, ship, factors)
        base_totals = _totals(baseline.legs, base_analytics, safety_weighting)
        reduction = {}
        for key in SUMMARY_QUANTITIES:
            if base_totals[key] != 0.0:
                reduction[key] = 100.0 * (base_totals[key] - totals[key]) / base_totals[key]
    return RouteSummary(reduction_pct=reduction, **totals)


def segment_filter(route, analytics, t_start, t_end, safety_weighting="legs"):
    """Summary over the legs departing within [t_start, t_end).

    An empty selection returns a zeroed summary with its ``empty`` flag
    set instead of raising.
    """
    if not t_start < t_end:
        raise ValueError("segment window must satisfy t_start < t_end")
    if len(analytics) != len(route.legs):
        raise ValueError("analytics list does not match route legs")
    picked = [(l, a) for l, a in zip(route.legs, analytics)
              if t_start <= l.departure_time < t_end]
    legs = [l for l, _ in picked]
    stats = [a for _, a in picked]
    totals = _totals(legs, stats, safety_weighting)
    return RouteSummary(empty=not picked, **totals)


def summary_to_json(summary):
    """Plain-dict form of a summary in the comparison-table column set."""
    doc = {
        "voyage_hours": summary.voyage_hours,
        "fuel_mt": summary.fuel_mt,
        "co2_mt": summary.co2_mt,
        "sox_mt": summary.sox_mt,
        "nox_mt": summary.nox_mt,
        "pm_mt": summary.pm_mt,
        "miles_nm": summary.miles_nm,
        "safety_pct": summary.safety_pct,
    }
    if summary.reduction_pct is not None:
        doc["reduction_pct"] = dict(summary.reduction_pct)
    if summary.empty:
        doc["empty"] = True
    return doc
