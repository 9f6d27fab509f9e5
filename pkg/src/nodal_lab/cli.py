"""Command line: ``nodal-lab <spectrum|verify|constants>``.

Examples::

    nodal-lab spectrum --domain rect --a 3.141593 --b 3.141593 --count 4
    nodal-lab verify --claim Thm1.8 --domain rect --count 50 --out out/
    nodal-lab constants --n 2,3 --p 1,2,inf

``verify`` writes report.json plus one CSV per claim and exits non-zero if
any asserted row fails.  Timestamps in the report come from --timestamp or
SOURCE_DATE_EPOCH when given, so fixed-seed runs can be byte-identical.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import time
from datetime import datetime, timezone

from . import __version__, bounds, claims, specfun
from .cache import cached_spectrum
from .report import Report, table_csv


def _floats(text: str) -> tuple:
    out = []
    for part in text.split(","):
        part = part.strip().lower()
        if part:
            out.append(math.inf if part in ("inf", "infinity") else float(part))
    if not out:
        raise argparse.ArgumentTypeError("expected a comma-separated list of numbers")
    return tuple(out)


def _ints(text: str) -> tuple:
    try:
        return tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError("expected a comma-separated list of integers") from None


def _positive(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("domain")
    g.add_argument("--domain", choices=claims.DOMAIN_NAMES)
    g.add_argument("--a", type=_positive, default=1.0, help="first side length")
    g.add_argument("--b", type=_positive, default=1.0, help="second side length")
    g.add_argument("--c", type=_positive, default=1.0, help="third side length (box)")
    g.add_argument("--L", type=_positive, default=2 * math.pi, help="torus period")
    g.add_argument("--R", type=_positive, default=1.0, help="disk radius")
    g.add_argument("--h", type=_positive, default=1 / 64, help="finite-difference spacing")
    g.add_argument("--bc", choices=("dirichlet", "neumann"), default="dirichlet")
    g.add_argument("--resolution", type=_positive,
                   help="points per unit length (latitude intervals on the sphere)")
    g.add_argument("--count", type=int, help="number of eigenpairs")
    common.add_argument("--cache", help="spectrum cache directory")

    parser = argparse.ArgumentParser(prog="nodal-lab", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"nodal-lab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("spectrum", parents=[common], help="print the eigenvalue table as CSV")

    v = sub.add_parser("verify", parents=[common], help="run claim checks and write a report")
    v.add_argument("--claim", required=True, help=", ".join(claims.CLAIMS) + " or all")
    v.add_argument("--deltas", type=_floats, default=claims.DEFAULT_DELTAS)
    v.add_argument("--p", type=_floats, help="exponents (default depends on the claim)")
    v.add_argument("--amp", type=_positive, default=0.5,
                   help="threshold a in m >= a lambda^((n-1)/4) for Cor1.7")
    v.add_argument("--out", default="nodal-lab-out")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--timestamp", help="fixed ISO timestamp for the report metadata")
    v.add_argument("--slope-tol", type=float, help="override the fitted-slope tolerance")
    v.add_argument("--grid-slack", type=float, help="override the relative grid slack")

    c = sub.add_parser("constants", help="print K_{n,p}, exponents and Bessel zeros as CSV")
    c.add_argument("--n", type=_ints, default=(2, 3))
    c.add_argument("--p", type=_floats, default=(1.0, 2.0))
    return parser


def _config(args) -> claims.RunConfig:
    cfg = claims.RunConfig(command=args.command)
    for key in ("domain", "a", "b", "c", "L", "R", "h", "bc", "resolution", "count", "cache",
                "deltas", "p", "amp", "claim", "out", "seed", "n", "timestamp"):
        if hasattr(args, key):
            setattr(cfg, key, getattr(args, key))
    if getattr(args, "slope_tol", None) is not None:
        cfg.tolerances["slope"] = args.slope_tol
    if getattr(args, "grid_slack", None) is not None:
        cfg.tolerances["grid_slack"] = args.grid_slack
    if cfg.count is not None and cfg.count < 1:
        raise ValueError("--count must be >= 1")
    if any(not 0 < d < 1 for d in cfg.deltas) or list(cfg.deltas) != sorted(cfg.deltas):
        raise ValueError("--deltas must be ascending values in (0, 1)")
    return cfg


def _now(cfg: claims.RunConfig) -> str:
    if cfg.timestamp:
        return cfg.timestamp
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    t = float(epoch) if epoch else time.time()
    return datetime.fromtimestamp(t, timezone.utc).isoformat(timespec="seconds")


def cmd_spectrum(cfg: claims.RunConfig, out=sys.stdout) -> int:
    domain = claims.make_domain(cfg, "rect")
    pairs, _ = cached_spectrum(domain, cfg.count or 10, cfg.cache)
    out.write(table_csv(("index", "lambda"), ((e.index, e.lam) for e in pairs)))
    return 0


def cmd_verify(cfg: claims.RunConfig, out=sys.stdout) -> int:
    started = _now(cfg)
    ids = claims.CLAIMS if cfg.claim == "all" else tuple(cfg.claim.split(","))
    for cid in ids:
        if cid not in claims.PIPELINES:
            raise ValueError(f"unknown claim {cid!r}; choose from {', '.join(claims.CLAIMS)}")
    results = []
    for cid in ids:
        results += claims.run_claim(cid, cfg)
    meta = {"version": __version__, "config": cfg.echo(), "started": started,
            "finished": _now(cfg)}
    report = Report(meta, results)
    report.write(cfg.out)
    for r in results:
        out.write(f"{r.id},{r.verdict},{len(r.rows)}\n")
    return 0 if report.ok else 1


def constants_table(ns, ps) -> list[tuple]:
    rows = []
    for n in ns:
        if n < 2:
            raise ValueError("n must be >= 2")
        j = specfun.bessel_first_zero(n / 2 - 1)
        vol = specfun.unit_ball_volume(n)
        for p in ps:
            if p < 1:
                raise ValueError("p must be >= 1")
            k = bounds.chiti_constant(n, p) if math.isfinite(p) else None
            delta = bounds.sogge_delta(n, p) if p >= 2 else None
            alpha = bounds.smith_sogge_alpha(n, p) if n >= 3 and p >= 2 else None
            rows.append((n, p, None if k is None else k.value, None if k is None else k.quad_error,
                         delta, alpha, j, vol))
    return rows


def cmd_constants(cfg: claims.RunConfig, out=sys.stdout) -> int:
    header = ("n", "p", "K", "quad_error", "delta", "alpha", "j", "alpha_n")
    out.write(table_csv(header, constants_table(cfg.n, cfg.p)))
    return 0


COMMANDS = {"spectrum": cmd_spectrum, "verify": cmd_verify, "constants": cmd_constants}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _config(args)
        return COMMANDS[args.command](cfg)
    except ValueError as exc:
        parser.exit(2, f"nodal-lab: error: {exc}\n")


if __name__ == "__main__":
    sys.exit(main())
