"""Command-line front end.

Exit codes: 0 on success, 2 on a validation error, 3 when a budget is hit.
Every file written with ``--out`` gets a ``<out>.manifest.json`` next to it;
``coxperc replay <manifest>`` re-runs the recorded command.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import sys
from datetime import datetime, timezone
from decimal import Decimal, InvalidOperation
from typing import List, Optional

from . import __version__
from . import cayley, coxeter, cycles, growth, percolation, slab, spectral
from .errors import BadFlag, BudgetError, CacheMiss, UnknownCommand, ValidationError

COMMANDS = ("certify", "table", "growth", "ball", "cycles", "percolate", "slab", "replay")
PLACES = 10


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        if "invalid choice" in message and "command" in message:
            raise UnknownCommand(message)
        raise BadFlag(message)


# --- formatting ---------------------------------------------------------------

def fmt(x, places: int = PLACES) -> str:
    return f"{float(x):.{places}f}"


def csv_text(header: List[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(header)
    for row in rows:
        w.writerow(row)
    return buf.getvalue()


def json_text(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def parse_p_grid(text: str) -> List[str]:
    """``a:b:step`` (inclusive) or a comma list; values kept as exact decimal strings."""
    try:
        if ":" in text:
            parts = text.split(":")
            if len(parts) != 3:
                raise BadFlag(f"bad p range {text!r}")
            lo, hi, step = (Decimal(x) for x in parts)
            if step <= 0 or hi < lo:
                raise BadFlag(f"bad p range {text!r}")
            out, x = [], lo
            while x <= hi:
                out.append(x)
                x += step
        else:
            out = [Decimal(x) for x in text.split(",")]
    except InvalidOperation as exc:
        raise BadFlag(f"bad p value in {text!r}") from exc
    for x in out:
        if not 0 <= x <= 1:
            raise BadFlag(f"p={x} outside [0, 1]")
    return [str(x) for x in out]


# --- inputs -------------------------------------------------------------------

def load_system(args) -> coxeter.CoxeterSystem:
    if getattr(args, "nerve", None):
        return coxeter.load_nerve_json(args.nerve)
    if getattr(args, "preset", None):
        return coxeter.preset(args.preset)
    raise BadFlag("one of --nerve or --preset is required")


def _file_hash(path) -> str:
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


def cache_path(cache_dir: str, system, R: int, mode: str) -> str:
    return os.path.join(cache_dir, cayley.cache_key(system, R, mode) + ".bin")


def obtain_ball(args, system=None) -> cayley.CayleyBall:
    """From ``--ball``/``--graph`` file, else from the cache, else build (unless ``--no-build``)."""
    path = getattr(args, "ball", None) or getattr(args, "graph", None)
    if path:
        if not os.path.exists(path):
            raise CacheMiss(f"ball file {path} not found")
        return cayley.load_ball(path)
    system = system or load_system(args)
    if args.radius is None:
        raise BadFlag("--radius is required")
    mode = cayley.resolve_mode(system, args.ball_mode)
    cached = cache_path(args.cache_dir, system, args.radius, mode) if args.cache_dir else None
    if cached and os.path.exists(cached):
        return cayley.load_ball(cached)
    if args.no_build:
        raise CacheMiss(f"no cached ball for radius {args.radius} ({mode})")
    ball = cayley.build_ball(system, args.radius, mode, budget=args.budget)
    if cached:
        os.makedirs(args.cache_dir, exist_ok=True)
        cayley.save_ball(ball, cached)
    return ball


# --- outputs ------------------------------------------------------------------

def emit(args, text: str, suffix: Optional[str] = None, binary: Optional[bytes] = None,
         path: Optional[str] = None):
    path = path or args.out
    if path and suffix:
        path = path + suffix
    if not path:
        sys.stdout.write(text)
        return None
    if binary is not None:
        with open(path, "wb") as fh:
            fh.write(binary)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return path


def write_manifest(args, argv: List[str], outputs: List[str]):
    if not args.out:
        return
    params = {k: v for k, v in sorted(vars(args).items()) if k not in ("func",)}
    inputs = {}
    for key in ("nerve", "ball", "graph"):
        p = params.get(key)
        if p and os.path.exists(p):
            inputs[p] = _file_hash(p)
    manifest = {
        "command": args.command,
        "argv": list(argv),
        "params": params,
        "seed": params.get("seed"),
        "version": __version__,
        "input_hashes": inputs,
        "outputs": {p: _file_hash(p) for p in outputs if p and os.path.exists(p)},
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }
    with open(args.out + ".manifest.json", "w", encoding="utf-8") as fh:
        fh.write(json_text(manifest))


# --- commands -----------------------------------------------------------------

def cmd_certify(args):
    cert = spectral.certify_phase(args.k, args.family, args.mode)
    return [emit(args, json_text(cert.to_json_dict()))]


def cmd_table(args):
    rows = spectral.threshold_table(args.k_max)
    return [emit(args, csv_text(["lemma", "mode", "threshold"],
                                [(lem, mode, "" if t is None else t) for lem, mode, t in rows]))]


def cmd_growth(args):
    system = load_system(args)
    nerve = coxeter.build_nerve(system, assert_h3=args.assert_h3)
    result = growth.growth_rate(growth.steinberg_inverse_growth(nerve), order=args.order)
    return [emit(args, json_text(result.to_json_dict()))]


def cmd_ball(args):
    system = load_system(args)
    ball = obtain_ball(args, system)
    outputs = []
    if args.out:
        outputs.append(emit(args, "", binary=cayley.dumps_ball(ball)))
    if args.json:
        dump = json.dumps(ball.to_json_dict(), sort_keys=True, separators=(",", ":")) + "\n"
        outputs.append(emit(args, dump, path=args.json))
    if not args.out and not args.json:
        sys.stdout.write(json_text({"R": ball.R, "mode": ball.mode, "spheres": ball.spheres}))
    return outputs


def cmd_cycles(args):
    ball = obtain_ball(args)
    counts = cycles.count_walks(ball, 0, args.N, args.simple_N)
    rows = [(n, c, a, "" if s is None else s) for n, c, a, s in counts.rows()]
    return [emit(args, csv_text(["n", "C", "a_star", "a_simple"], rows))]


def cmd_percolate(args):
    ball = obtain_ball(args)
    grid = parse_p_grid(args.p)
    curve = percolation.crossing_curve(ball, args.mode, [float(p) for p in grid],
                                       args.trials, args.seed, args.threads)
    rows = [(p, fmt(pt.estimate), fmt(pt.ci_lo), fmt(pt.ci_hi)) for p, pt in zip(grid, curve)]
    outputs = [emit(args, csv_text(["p", "estimate", "ci_lo", "ci_hi"], rows))]
    if args.probe_p is not None:
        probe = percolation.multiplicity_probe(ball, args.mode, args.probe_p, args.trials,
                                               args.seed, args.min_size, args.threads)
        probe["mean"] = fmt(probe["mean"])
        probe["p"] = str(args.probe_p)
        outputs.append(emit(args, json_text(probe), suffix=".histogram.json"))
    return outputs


def cmd_slab(args):
    emb = slab.embed_polygon_group(args.pgon, args.radius, budget=args.budget)
    grid = slab.default_r_grid(args.rmax, args.rstep)
    est = slab.estimate_g(emb, args.H, args.p, grid, args.trials, args.seed,
                          args.mode, args.threads)
    rows = [(fmt(r, 6), fmt(g), fmt(lo), fmt(hi)) for r, g, lo, hi in est.rows()]
    fit = {
        "psi_hat": None if est.psi_hat is None else fmt(est.psi_hat),
        "r2": None if est.r2 is None else fmt(est.r2),
        "fit_points": est.fit_points,
        "note": est.note,
    }
    outputs = [emit(args, csv_text(["r", "g_hat", "ci_lo", "ci_hi"], rows))]
    if args.out:
        outputs.append(emit(args, json_text(fit), suffix=".fit.json"))
    else:
        sys.stdout.write(json_text(fit))
    return outputs


def cmd_replay(args):
    with open(args.manifest, encoding="utf-8") as fh:
        manifest = json.load(fh)
    argv = manifest["argv"]
    if argv and argv[0] == "replay":
        raise BadFlag("refusing to replay a replay")
    result = main(argv, _return_outputs=True)
    if isinstance(result, int):
        raise ValidationError(f"replayed command exited with {result}")
    return result


# --- parser -------------------------------------------------------------------

def _add_system(p):
    p.add_argument("--nerve", help="nerve JSON file")
    p.add_argument("--preset", help="dodecahedron, pentagon, free-product-<k>, polygon-<p>")


def _add_ball_source(p):
    _add_system(p)
    p.add_argument("--radius", type=int)
    p.add_argument("--ball-mode", default="auto", choices=cayley.MODES)
    p.add_argument("--cache-dir")
    p.add_argument("--no-build", action="store_true")
    p.add_argument("--budget", type=int, default=cayley.DEFAULT_BUDGET)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="coxperc", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("certify", help="phase certificate for one k")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--family", required=True, choices=spectral.FAMILIES)
    p.add_argument("--mode", default="gamma", choices=spectral.MODES)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("table", help="threshold table as CSV")
    p.add_argument("--k-max", type=int, default=spectral.SCAN_MAX_K)
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("growth", help="growth series and rate")
    _add_system(p)
    p.add_argument("--order", type=int, default=growth.TAYLOR_ORDER)
    p.add_argument("--assert-h3", action="store_true")
    p.set_defaults(func=cmd_growth)

    p = sub.add_parser("ball", help="build or load a Cayley ball")
    _add_ball_source(p)
    p.add_argument("--mode", dest="ball_mode", default="auto", choices=cayley.MODES)
    p.add_argument("--json", help="also write the JSON debug dump here")
    p.set_defaults(func=cmd_ball)

    p = sub.add_parser("cycles", help="closed, non-backtracking and simple cycle counts")
    _add_ball_source(p)
    p.add_argument("--graph", help="ball cache file")
    p.add_argument("--N", type=int, default=12)
    p.add_argument("--simple-N", type=int, default=None)
    p.set_defaults(func=cmd_cycles)

    p = sub.add_parser("percolate", help="crossing curve with Wilson intervals")
    _add_ball_source(p)
    p.add_argument("--ball", help="ball cache file")
    p.add_argument("--mode", default="bond", choices=percolation.MODES)
    p.add_argument("--p", required=True, help="a:b:step or comma list")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--probe-p", type=float, default=None,
                   help="also write the rim-cluster histogram at this p")
    p.add_argument("--min-size", type=int, default=2)
    p.set_defaults(func=cmd_percolate)

    p = sub.add_parser("slab", help="slab connection function estimate")
    p.add_argument("--pgon", type=int, default=5)
    p.add_argument("--radius", type=int, default=7)
    p.add_argument("--H", type=float, default=1.0)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--rmax", type=float, default=20.0)
    p.add_argument("--rstep", type=float, default=0.25)
    p.add_argument("--trials", type=int, default=5000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--mode", default="bond", choices=percolation.MODES)
    p.add_argument("--budget", type=int, default=cayley.DEFAULT_BUDGET)
    p.set_defaults(func=cmd_slab)

    p = sub.add_parser("replay", help="re-run the command recorded in a manifest")
    p.add_argument("manifest")
    p.set_defaults(func=cmd_replay)

    for name, sp in sub.choices.items():
        if name != "replay" and not any(a.dest == "out" for a in sp._actions):
            sp.add_argument("--out", help="output file (a manifest is written next to it)")
    return parser


def main(argv: Optional[List[str]] = None, _return_outputs: bool = False):
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(argv)
        if not hasattr(args, "out"):
            args.out = None
        outputs = args.func(args)
        if args.command != "replay":
            write_manifest(args, argv, [o for o in outputs if o])
    except ValidationError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except BudgetError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    return outputs if _return_outputs else 0


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
