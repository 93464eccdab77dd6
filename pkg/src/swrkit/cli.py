"""Headless pipeline driver.

Subcommands cover the whole workflow: gen-synth (synthetic truth to a
.wgrid file), train (stack to .wgts weights), forecast (rollout with
optional sparse assimilation), route (optimized vs minimum-distance with
the comparison table), rehearse (re-route around avoidance zones),
metrics (skill CSV), and serve (the HTTP service).

Exit codes: 0 success, 1 usage error, 2 runtime error. Every randomized
subcommand takes an explicit --seed; nothing is seeded from the clock.
Existing output files are only overwritten with --force, and every
result is byte-identical to composing the library calls directly.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from decimal import ROUND_HALF_UP, Decimal

from .analytics import route_summary, summary_to_json
from .assimilate import sample_observations
from .config import load_config
from .errors import FormatError, SwrkitError
from .grids import make_grid
from .mesh import build_mesh, clean_polygons, rasterize_constraints
from .metrics import score_forecast, skill_to_csv, skill_to_json
from .presets import get_port, get_ship, ship_from_doc, ship_to_doc
from .routing import (KIND_REHEARSAL, min_distance_route, optimize_route,
                      route_from_json, route_to_json)
from .stepping import RolloutConfig, rollout
from .surrogate import load_weights, save_weights, zero_weights
from .synth import SynthParams, gen_synthetic
from .training import TrainConfig, train
from .wgrid import read_field_stack, write_field_stack

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_RUNTIME = 2

TABLE_COLUMNS = ("Voyage Hours", "Fuel (mT)", "CO2", "SOx", "NOx", "PM",
                 "Miles", "Safety (%)")
_COLUMN_KEYS = ("voyage_hours", "fuel_mt", "co2_mt", "sox_mt", "nox_mt",
                "pm_mt", "miles_nm", "safety_pct")


class UsageError(Exception):
    """Bad flags or arguments; rendered with the parser's usage text."""

    def __init__(self, message, parser=None):
        super().__init__(message)
        self.parser = parser


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message, self)


# ---------------------------------------------------------------------------
# table rendering

def format_fixed(value):
    """Two-decimal string with ties rounding half away from zero.

    55.004 renders as '55.00' and 17.145 as '17.15'; the tie rule is
    applied to the shortest decimal form of the value.
    """
    q = Decimal(repr(float(value))).quantize(Decimal("0.01"),
                                             rounding=ROUND_HALF_UP)
    if q == 0:
        q = abs(q)
    return str(q)


def emit_table(rows):
    """Fixed-width comparison table over the standard column set.

    ``rows`` is a sequence of (label, summary) pairs; summaries may be
    RouteSummary values or their plain-dict form.
    """
    rows = list(rows)
    if not rows:
        raise ValueError("need at least one summary")
    docs = []
    for label, summary in rows:
        doc = summary if isinstance(summary, dict) else summary_to_json(summary)
        docs.append((str(label),
                     [format_fixed(doc[k]) for k in _COLUMN_KEYS]))
    widths = [len(h) for h in TABLE_COLUMNS]
    for _, cells in docs:
        widths = [max(w, len(c)) for w, c in zip(widths, cells)]
    label_w = max(len("Route"), *(len(label) for label, _ in docs))
    lines = ["Route".ljust(label_w)
             + "".join("  " + h.rjust(w)
                       for h, w in zip(TABLE_COLUMNS, widths))]
    for label, cells in docs:
        lines.append(label.ljust(label_w)
                     + "".join("  " + c.rjust(w)
                               for c, w in zip(cells, widths)))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# argument helpers

def _shape(text, parser):
    try:
        a, b = text.lower().split("x")
        return int(a), int(b)
    except ValueError:
        raise UsageError("--shape must look like NLATxNLON, got %r" % text,
                         parser)


def _span(text, flag, parser):
    try:
        a, b = text.split(":")
        return float(a), float(b)
    except ValueError:
        raise UsageError("%s must look like LO:HI, got %r" % (flag, text),
                         parser)


def _land_box(text, parser):
    try:
        vals = tuple(float(x) for x in text.split(":"))
        if len(vals) != 4:
            raise ValueError
        return vals
    except ValueError:
        raise UsageError(
            "--land-box must look like LAT0:LAT1:LON0:LON1, got %r" % text,
            parser)


def _point(text):
    """A port name or 'lat,lon' string as a (lat, lon) pair."""
    if "," in text:
        a, b = text.split(",", 1)
        return float(a), float(b)
    port = get_port(text)
    return port.lat, port.lon


def _load_ship(spec):
    """A preset name, or a path to a ship JSON document."""
    if spec.endswith(".json") or os.path.exists(spec):
        with open(spec) as f:
            return ship_from_doc(json.load(f))
    return get_ship(spec)


def _load_polygons(path):
    with open(path) as f:
        doc = json.load(f)
    if isinstance(doc, dict):
        doc = doc.get("polygons", doc)
    if not isinstance(doc, list):
        raise FormatError("%s: expected a polygon list or "
                          '{"polygons": [...]}' % path)
    return clean_polygons(doc)


def _check_out(path, force):
    if os.path.exists(path) and not force:
        raise FormatError("refusing to overwrite %s (pass --force)" % path)


def _write_json(path, doc, force):
    _check_out(path, force)
    with open(path, "w") as f:
        json.dump(doc, f, indent=2, sort_keys=True)
        f.write("\n")


def _emit(args, table_rows, doc):
    """Print either the fixed-width table or the structured document."""
    if args.json:
        print(json.dumps(doc, indent=2, sort_keys=True))
    else:
        sys.stdout.write(emit_table(table_rows))


# ---------------------------------------------------------------------------
# subcommands

def cmd_gen_synth(args):
    _check_out(args.out, args.force)
    grid = make_grid(_span(args.lat_span, "--lat-span", args.parser),
                     _span(args.lon_span, "--lon-span", args.parser),
                     *_shape(args.shape, args.parser),
                     land_boxes=[_land_box(b, args.parser)
                                 for b in args.land_box])
    overrides = {}
    if args.velocity is not None:
        try:
            vr, vc = args.velocity.split(",")
            overrides["velocity"] = (float(vr), float(vc))
        except ValueError:
            raise UsageError("--velocity must look like VROW,VCOL, got %r"
                             % args.velocity, args.parser)
    for name in ("diffusion", "rotation", "base_height", "height_amplitude",
                 "base_period", "noise_floor"):
        value = getattr(args, name)
        if value is not None:
            overrides[name] = value
    params = SynthParams(seed=args.seed, **overrides)
    stack = gen_synthetic(grid, params, args.frames,
                          step_seconds=args.step_seconds, t0=args.t0)
    write_field_stack(args.out, stack)
    print("wrote %s: %d frames, %dx%d grid" % (args.out, stack.ntime,
                                               *grid.shape))
    return EXIT_OK


def cmd_train(args):
    _check_out(args.out, args.force)
    stack = read_field_stack(args.data)
    cfg = TrainConfig(seed=args.seed, kmax=args.kmax, width=args.width,
                      epochs=args.epochs, batch_size=args.batch_size,
                      step_size=args.step_size, lambda_spec=args.lambda_spec,
                      weight_decay=args.weight_decay,
                      optimizer=args.optimizer, lr_schedule=args.lr_schedule,
                      linear_mode=args.linear)
    weights = train(stack, cfg)
    save_weights(args.out, weights)
    print("wrote %s: kmax=%d width=%d" % (args.out, weights.kmax,
                                          weights.width))
    return EXIT_OK


def _assimilation_schedule(stack, steps, every, fraction, seed):
    plan = list(range(every, steps + 1, every))
    if not plan:
        raise FormatError("assimilation schedule starts beyond the horizon")
    if plan[-1] >= stack.ntime:
        raise FormatError("assimilation needs truth frames up to step %d; "
                          "the init stack has %d" % (plan[-1], stack.ntime))
    return {step: sample_observations(stack.frames[step], stack.grid,
                                      fraction, seed=seed + step)
            for step in plan}


def cmd_forecast(args):
    if (args.da_every is None) != (args.da_frac is None):
        raise UsageError("--da-every and --da-frac go together", args.parser)
    if args.da_every is not None and args.seed is None:
        raise UsageError("observation sampling is randomized; pass --seed",
                         args.parser)
    _check_out(args.out, args.force)
    stack = read_field_stack(args.init)
    weights = load_weights(args.weights) if args.weights else zero_weights()
    schedule = {}
    if args.da_every is not None:
        schedule = _assimilation_schedule(stack, args.steps, args.da_every,
                                          args.da_frac, args.seed)
    cfg = RolloutConfig(steps=args.steps, step_seconds=stack.step_seconds,
                        linear_mode=args.linear,
                        assimilation_schedule=schedule)
    out = rollout(stack.frames[0], stack.grid, weights, cfg)
    write_field_stack(args.out, out)
    print("wrote %s: %d frames" % (args.out, out.ntime))
    return EXIT_OK


def cmd_route(args):
    stack = read_field_stack(args.forecast)
    ship = _load_ship(args.ship)
    origin = _point(args.origin)
    dest = _point(args.dest)
    departure = stack.t0 if args.departure is None else args.departure
    polygons = _load_polygons(args.constraints) if args.constraints else ()
    constraint = (rasterize_constraints(stack.grid, polygons)
                  if polygons else None)
    mesh = build_mesh(stack.grid)
    optimized = optimize_route(mesh, stack, ship, origin, dest, departure,
                               constraint)
    mindist = min_distance_route(mesh, ship, origin, dest, fields=stack,
                                 departure=departure, constraint=constraint)
    sum_opt = route_summary(optimized, ship, baseline=mindist)
    sum_min = route_summary(mindist, ship)
    bundle = {"forecast": args.forecast,
              "departure": float(departure),
              "ship": ship_to_doc(ship),
              "origin": list(origin), "dest": list(dest),
              "polygons": [[list(v) for v in poly] for poly in polygons],
              "routes": {"optimized": route_to_json(optimized),
                         "min_distance": route_to_json(mindist)},
              "summaries": {"optimized": summary_to_json(sum_opt),
                            "min_distance": summary_to_json(sum_min)}}
    if args.out:
        _write_json(args.out, bundle, args.force)
    _emit(args, [("optimized", sum_opt), (mindist.kind, sum_min)], bundle)
    return EXIT_OK


def cmd_rehearse(args):
    with open(args.route) as f:
        bundle = json.load(f)
    for key in ("routes", "ship", "forecast"):
        if key not in bundle:
            raise FormatError("%s: not a route bundle (missing %r)"
                              % (args.route, key))
    base = route_from_json(bundle["routes"]["optimized"])
    ship = ship_from_doc(bundle["ship"])
    fc_path = bundle["forecast"]
    if not os.path.isabs(fc_path):
        fc_path = os.path.join(os.path.dirname(os.path.abspath(args.route)),
                               fc_path)
    stack = read_field_stack(fc_path)
    zones = _load_polygons(args.polygons)
    effective = tuple(tuple(tuple(v) for v in poly)
                      for poly in bundle.get("polygons", ())) + zones
    constraint = (rasterize_constraints(stack.grid, effective)
                  if effective else None)
    mesh = build_mesh(stack.grid)
    reroute = optimize_route(mesh, stack, ship, base.origin_latlon,
                             base.dest_latlon, base.departure_time,
                             constraint, kind=KIND_REHEARSAL)
    base_summary = route_summary(base, ship)
    reh_summary = route_summary(reroute, ship, baseline=base)
    doc = {"base": summary_to_json(base_summary),
           "rehearsal": summary_to_json(reh_summary),
           "deltas": dict(reh_summary.reduction_pct or {}),
           "route": route_to_json(reroute),
           "polygons": [[list(v) for v in poly] for poly in effective]}
    if args.out:
        _write_json(args.out, doc, args.force)
    _emit(args, [("optimized", base_summary), ("rehearsal", reh_summary)],
          doc)
    return EXIT_OK


def cmd_metrics(args):
    truth = read_field_stack(args.truth)
    forecast = read_field_stack(args.forecast)
    result = score_forecast(forecast, truth)
    if args.json:
        text = json.dumps(skill_to_json(result), indent=2, sort_keys=True)
        text += "\n"
    else:
        text = skill_to_csv(result)
    if args.out:
        _check_out(args.out, args.force)
        with open(args.out, "w") as f:
            f.write(text)
        print("wrote %s" % args.out)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_serve(args):
    cfg = load_config(args.config)
    overrides = {}
    if args.bind:
        overrides["bind"] = args.bind
    if args.data_dir:
        overrides["data_dir"] = args.data_dir
    if args.weights:
        overrides["weights_path"] = args.weights
    if args.linear:
        overrides["linear_mode"] = True
    if args.static_dir:
        overrides["static_dir"] = args.static_dir
    if overrides:
        cfg = dataclasses.replace(cfg, **overrides)
    from .service import main as serve_main
    serve_main(cfg)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser

def build_parser():
    parser = _Parser(prog="swrkit",
                     description="Wave forecasting and ship weather routing.")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    p = sub.add_parser("gen-synth", help="generate a synthetic truth stack")
    p.add_argument("--out", required=True, help="output .wgrid path")
    p.add_argument("--seed", required=True, type=int)
    p.add_argument("--frames", type=int, default=64)
    p.add_argument("--shape", default="32x32", metavar="NLATxNLON")
    p.add_argument("--lat-span", default="30:46", metavar="LO:HI")
    p.add_argument("--lon-span", default="130:146", metavar="LO:HI")
    p.add_argument("--land-box", action="append", default=[],
                   metavar="LAT0:LAT1:LON0:LON1")
    p.add_argument("--step-seconds", type=int, default=3600)
    p.add_argument("--t0", type=int, default=0)
    p.add_argument("--velocity", metavar="VROW,VCOL")
    for name, kind in (("diffusion", float), ("rotation", float),
                       ("base-height", float), ("height-amplitude", float),
                       ("base-period", float), ("noise-floor", float)):
        p.add_argument("--" + name, type=kind)
    p.add_argument("--force", action="store_true")
    p.set_defaults(func=cmd_gen_synth, parser=p)

    d = TrainConfig()
    p = sub.add_parser("train", help="fit surrogate weights to a stack")
    p.add_argument("--data", required=True, help="training .wgrid path")
    p.add_argument("--out", required=True, help="output .wgts path")
    p.add_argument("--seed", required=True, type=int)
    p.add_argument("--kmax", type=int, default=d.kmax)
    p.add_argument("--width", type=int, default=d.width)
    p.add_argument("--epochs", type=int, default=d.epochs)
    p.add_argument("--batch-size", type=int, default=d.batch_size)
    p.add_argument("--step-size", type=float, default=d.step_size)
    p.add_argument("--lambda-spec", type=float, default=d.lambda_spec)
    p.add_argument("--weight-decay", type=float, default=d.weight_decay)
    p.add_argument("--optimizer", choices=("adam", "gd"), default=d.optimizer)
    p.add_argument("--lr-schedule", choices=("linear", "constant"),
                   default=d.lr_schedule)
    p.add_argument("--linear", action="store_true",
                   help="train without the pointwise nonlinearity")
    p.add_argument("--force", action="store_true")
    p.set_defaults(func=cmd_train, parser=p)

    p = sub.add_parser("forecast", help="roll a stack's first frame forward")
    p.add_argument("--init", required=True, help="initial stack (.wgrid)")
    p.add_argument("--out", required=True, help="output .wgrid path")
    p.add_argument("--steps", required=True, type=int)
    p.add_argument("--weights", help=".wgts file; omitted means persistence")
    p.add_argument("--linear", action="store_true")
    p.add_argument("--da-every", type=int, metavar="N",
                   help="assimilate observations every N steps")
    p.add_argument("--da-frac", type=float, metavar="F",
                   help="fraction of ocean cells observed")
    p.add_argument("--seed", type=int,
                   help="observation sampling seed (required with --da-*)")
    p.add_argument("--force", action="store_true")
    p.set_defaults(func=cmd_forecast, parser=p)

    p = sub.add_parser("route", help="optimize a route under a forecast")
    p.add_argument("--forecast", required=True, help="forecast .wgrid path")
    p.add_argument("--origin", required=True,
                   help="port name or 'lat,lon'")
    p.add_argument("--dest", required=True, help="port name or 'lat,lon'")
    p.add_argument("--ship", default="tokai-liner",
                   help="preset name or ship JSON path")
    p.add_argument("--departure", type=float,
                   help="departure timestamp (default: forecast start)")
    p.add_argument("--constraints", help="polygon JSON path")
    p.add_argument("--out", help="write the route bundle JSON here")
    p.add_argument("--json", action="store_true",
                   help="print the bundle instead of the table")
    p.add_argument("--force", action="store_true")
    p.set_defaults(func=cmd_route, parser=p)

    p = sub.add_parser("rehearse",
                       help="re-route a saved bundle around avoidance zones")
    p.add_argument("--route", required=True, help="route bundle JSON path")
    p.add_argument("--polygons", required=True, help="polygon JSON path")
    p.add_argument("--out", help="write the rehearsal JSON here")
    p.add_argument("--json", action="store_true")
    p.add_argument("--force", action="store_true")
    p.set_defaults(func=cmd_rehearse, parser=p)

    p = sub.add_parser("metrics", help="score a forecast against truth")
    p.add_argument("--truth", required=True, help="truth .wgrid path")
    p.add_argument("--forecast", required=True, help="forecast .wgrid path")
    p.add_argument("--out", help="write CSV (or JSON with --json) here")
    p.add_argument("--json", action="store_true")
    p.add_argument("--force", action="store_true")
    p.set_defaults(func=cmd_metrics, parser=p)

    p = sub.add_parser("serve", help="start the HTTP service")
    p.add_argument("--config", help="TOML config path")
    p.add_argument("--bind", metavar="HOST:PORT")
    p.add_argument("--data-dir")
    p.add_argument("--weights")
    p.add_argument("--linear", action="store_true")
    p.add_argument("--static-dir", help="serve a web client from this directory")
    p.set_defaults(func=cmd_serve, parser=p)

    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        target = exc.parser or parser
        sys.stderr.write(target.format_usage())
        sys.stderr.write("error: %s\n" % exc)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    if args.command is None:
        parser.print_help(sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        target = exc.parser or parser
        sys.stderr.write(target.format_usage())
        sys.stderr.write("error: %s\n" % exc)
        return EXIT_USAGE
    except (SwrkitError, OSError, ValueError) as exc:
        sys.stderr.write("error: %s\n" % exc)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
