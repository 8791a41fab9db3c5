"""Command-line front end: ``lipcap <subcommand> ...``.

Usage errors exit with status 2; computation errors exit with status 1 and print a
JSON error object.  All floats are written with 17 significant digits.
"""
from __future__ import annotations

import argparse
import sys
from typing import Optional

from . import __version__
from .config import Config
from .content import (ball_bracket, dyadic_content, gauge_content, lower_content_estimate,
                      parse_gauge)
from .errors import LipcapError
from .fileio import csv_text, dumps, load_measure, load_scene, parse_param
from .geom import rasterize
from .measures import frostman, growth_check
from .partition import build_partition
from .transforms import PoissonGridSpec, cauchy_transform, ts_norm_estimate
from .wiener import SeriesSpec, classify


class UsageError(Exception):
    pass


def _pair(text: str):
    try:
        x, y = (float(v) for v in text.split(","))
    except ValueError as exc:
        raise UsageError(f"expected x,y but got {text!r}") from exc
    return complex(x, y)


def _s_range(text: str):
    try:
        start, stop, step = (float(v) for v in text.split(":"))
    except ValueError as exc:
        raise UsageError(f"expected start:stop:step but got {text!r}") from exc
    if step <= 0 or stop < start:
        raise UsageError("s-range needs start <= stop and a positive step")
    count = int(round((stop - start) / step)) + 1
    return [round(start + i * step, 12) for i in range(count)]


def _grid(text: Optional[str], mu, cfg: Config) -> PoissonGridSpec:
    if text is None:
        return PoissonGridSpec.around(mu, cfg)
    parts = text.split(",")
    if len(parts) not in (4, 5, 8):
        raise UsageError("--grid takes xmin,xmax,ymin,ymax[,nz[,tmin,tmax,nt]]")
    xmin, xmax, ymin, ymax = (float(v) for v in parts[:4])
    nz = int(parts[4]) if len(parts) > 4 else cfg.poisson_nz
    if len(parts) == 8:
        tmin, tmax, nt = float(parts[5]), float(parts[6]), int(parts[7])
    else:
        tmin, tmax, nt = cfg.poisson_tmin, cfg.poisson_tmax, cfg.poisson_nt
    return PoissonGridSpec(xmin, xmax, ymin, ymax, nz, tmin, tmax, nt)


# -- subcommands -------------------------------------------------------------

def cmd_content(args, cfg):
    scene = load_scene(args.scene)
    if args.lower:
        return dumps(lower_content_estimate(scene, args.beta, args.eta, args.J,
                                            depth_cap=cfg.depth_cap).to_dict())
    raster = rasterize(scene, args.depth, depth_cap=cfg.depth_cap)
    if args.bracket:
        res = ball_bracket(raster, args.beta)
    elif args.gauge:
        res = gauge_content(raster, parse_gauge(args.gauge, args.beta))
    else:
        res = dyadic_content(raster, args.beta)
    return dumps(res.to_dict())


def _domain(args):
    if args.param and args.scene:
        raise UsageError("give either --param or --scene, not both")
    if args.param:
        return parse_param(args.param)
    if args.scene:
        return load_scene(args.scene)
    raise UsageError("one of --param or --scene is required")


def cmd_classify(args, cfg):
    domain = _domain(args)
    spec = SeriesSpec(args.s, args.k, args.content)
    return dumps(classify(domain, spec, n_max=args.nmax, depth=min(args.depth, cfg.depth_cap)).to_dict())


def cmd_sweep(args, cfg):
    domain = parse_param(args.param)
    rows = []
    for s in _s_range(args.s_range):
        rep = classify(domain, SeriesSpec(s, args.k, args.content))
        rows.append([float(s), rep.verdict, float(rep.dual_norm_estimate)])
    return csv_text(["s", "verdict", "sum"], rows).rstrip("\n")


def cmd_frostman(args, cfg):
    raster = rasterize(load_scene(args.scene), args.depth, depth_cap=cfg.depth_cap)
    mu = frostman(raster, args.beta)
    out = mu.to_dict()
    if args.check:
        out["growth"] = growth_check(mu, args.beta, r_min=raster.leaf_side).to_dict()
    return dumps(out)


def cmd_poisson_norm(args, cfg):
    mu = load_measure(args.measure)
    return dumps(ts_norm_estimate(mu, args.s, _grid(args.grid, mu, cfg)).to_dict())


def cmd_cauchy(args, cfg):
    mu = load_measure(args.measure)
    z = _pair(args.at)
    value = complex(cauchy_transform(mu, z, exclusion=args.exclusion))
    return dumps({"at": [z.real, z.imag], "value": [value.real, value.imag]})


def cmd_partition(args, cfg):
    E = rasterize(load_scene(args.scene), args.depth, depth_cap=cfg.depth_cap)
    res = build_partition(E.maximal_blocks(), E, k=args.k)
    return dumps(res.summary())


def cmd_verify(args, cfg):
    from .acceptance import run_all
    numbers = None
    if args.only:
        try:
            numbers = [int(v) for v in args.only.split(",")]
        except ValueError as exc:
            raise UsageError("--only takes a comma-separated list of criterion numbers") from exc
        if any(not 1 <= n <= 11 for n in numbers):
            raise UsageError("criteria are numbered 1 to 11")
    results = run_all(numbers)
    lines = [r.line() for r in results]
    passed = sum(r.passed for r in results)
    lines.append(f"{passed}/{len(results)} criteria passed")
    return "\n".join(lines), (0 if passed == len(results) else 1)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lipcap", description="Lipschitz-class capacities and Wiener-type series.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("content", help="dyadic, gauge, ladder or ball-bracket content of a scene")
    c.add_argument("--scene", required=True)
    c.add_argument("--beta", type=float, required=True)
    c.add_argument("--depth", type=int, default=10)
    c.add_argument("--gauge", help="power | ladder:eta=0.5,j=8")
    c.add_argument("--bracket", action="store_true", help="report the ball-content bracket")
    c.add_argument("--lower", action="store_true", help="ladder estimate of the lower content")
    c.add_argument("--eta", type=float, default=0.5)
    c.add_argument("--J", type=int, default=3)
    c.set_defaults(func=cmd_content)

    c = sub.add_parser("classify", help="Wiener-series verdict for a scene or parametric domain")
    c.add_argument("--scene")
    c.add_argument("--param", help="slit:a0=..,q=..,c0=..,p=.. or roadrunner:...")
    c.add_argument("--s", type=float, required=True)
    c.add_argument("--k", type=int, default=0)
    c.add_argument("--content", choices=("upper", "lower"), default="upper")
    c.add_argument("--nmax", type=int, default=10)
    c.add_argument("--depth", type=int, default=12)
    c.set_defaults(func=cmd_classify)

    c = sub.add_parser("sweep", help="verdicts over a range of s (CSV)")
    c.add_argument("--param", required=True)
    c.add_argument("--s-range", required=True, help="start:stop:step")
    c.add_argument("--k", type=int, default=0)
    c.add_argument("--content", choices=("upper", "lower"), default="upper")
    c.set_defaults(func=cmd_sweep)

    c = sub.add_parser("frostman", help="Frostman measure on a rastered scene")
    c.add_argument("--scene", required=True)
    c.add_argument("--beta", type=float, required=True)
    c.add_argument("--depth", type=int, default=8)
    c.add_argument("--check", action="store_true", help="append a growth report")
    c.set_defaults(func=cmd_frostman)

    c = sub.add_parser("poisson-norm", help="grid estimate of the T_s norm of a measure")
    c.add_argument("--measure", required=True)
    c.add_argument("--s", type=float, required=True)
    c.add_argument("--grid", help="xmin,xmax,ymin,ymax[,nz[,tmin,tmax,nt]]")
    c.set_defaults(func=cmd_poisson_norm)

    c = sub.add_parser("cauchy", help="Cauchy transform of a measure at a point")
    c.add_argument("--measure", required=True)
    c.add_argument("--at", required=True, help="x,y")
    c.add_argument("--exclusion", type=float, default=0.0)
    c.set_defaults(func=cmd_cauchy)

    c = sub.add_parser("partition", help="partition of unity over the maximal blocks of a scene")
    c.add_argument("--scene", required=True)
    c.add_argument("--depth", type=int, default=6)
    c.add_argument("--k", type=int, default=3)
    c.set_defaults(func=cmd_partition)

    c = sub.add_parser("verify", help="run the acceptance suite")
    c.add_argument("--only", help="comma-separated criterion numbers")
    c.set_defaults(func=cmd_verify)
    return p


# flags whose values may start with '-' but are not plain numbers
_DASHED_VALUES = ("--s-range", "--at", "--grid")


def _join_dashed(argv: list) -> list:
    """Rewrite ``--s-range -0.9:-0.1:0.05`` as ``--s-range=-0.9:-0.1:0.05``."""
    out, i = [], 0
    while i < len(argv):
        if argv[i] in _DASHED_VALUES and i + 1 < len(argv):
            out.append(f"{argv[i]}={argv[i + 1]}")
            i += 2
        else:
            out.append(argv[i])
            i += 1
    return out


def run(argv=None) -> tuple[int, str]:
    """Parse and execute; returns (exit status, text to print)."""
    parser = build_parser()
    argv = _join_dashed(list(sys.argv[1:] if argv is None else argv))
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return (exc.code if isinstance(exc.code, int) else 2), ""
    cfg = Config()
    try:
        out = args.func(args, cfg)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        return 2, dumps({"error": "UsageError", "message": str(exc)})
    except OSError as exc:
        return 2, dumps({"error": type(exc).__name__, "message": str(exc)})
    except (LipcapError, ValueError) as exc:
        return 1, dumps({"error": type(exc).__name__, "message": str(exc)})
    if isinstance(out, tuple):
        text, status = out
        return status, text
    return 0, out


def main(argv=None) -> int:
    status, text = run(argv)
    if text:
        print(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
