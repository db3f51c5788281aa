"""Command line entry point.

::

    heunlab verify {lame,reduction,p6,modular,monodromy,all} [options]
    heunlab trajectory --family hitchin_l0000 --tau-grid 1i:1.5i:50 [options]

Exit status: 0 when every check passes, 1 when some check fails, 2 on a
usage error.
"""
import argparse
import re
import sys

import numpy as np

from . import painleve as pv
from .report import build_report, report_csv, report_json, trajectory_csv, trajectory_json
from .suites import DEFAULT_GRID, SUITES, RunConfig, run_suite, trajectory_rows

_COMPLEX_UNIT = re.compile(r"(^|[+\-eE(])([ij])")


def parse_complex(text):
    """Parse ``1.2i``, ``0.1+1.1i``, ``-i`` or ``1.3j`` into a complex number."""
    s = text.strip().replace(" ", "")
    if not s:
        raise ValueError("empty complex literal")
    s = _COMPLEX_UNIT.sub(lambda m: m.group(1) + "1" + m.group(2), s)
    s = s.replace("i", "j")
    return complex(s)


def parse_grid(text):
    """``a:b:n`` (``n`` evenly spaced points from ``a`` to ``b``) or a comma list."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError("grid must look like start:stop:count")
        a, b = parse_complex(parts[0]), parse_complex(parts[1])
        n = int(parts[2])
        if n < 1:
            raise ValueError("grid count must be positive")
        return tuple(complex(z) for z in np.linspace(a, b, n)) if n > 1 else (a,)
    return tuple(parse_complex(p) for p in text.split(",") if p.strip())


def _parser():
    p = argparse.ArgumentParser(prog="heunlab", description=__doc__.split("\n\n")[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--tau", action="append", default=None,
                        help="modulus tau (repeatable, or comma separated), e.g. 1.2i")
        sp.add_argument("--tau-grid", default=None, help="start:stop:count or comma list of tau values")
        sp.add_argument("--family", default="hitchin_l0000", choices=pv.FAMILIES)
        sp.add_argument("--index", type=int, default=None, choices=(1, 2, 3),
                        help="e_i index for degenerate_mui and degenerate_l1000_ei")
        for name in ("c1", "c3", "d1", "d3"):
            sp.add_argument(f"--{name}", default=None)
        for i in range(4):
            sp.add_argument(f"--l{i}", type=int, default=None)
        sp.add_argument("--tol", type=float, default=None, help="override the residual tolerance")
        sp.add_argument("--precision", choices=("double", "extended"), default="double")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--samples", type=int, default=5, help="random energies per tau")
        sp.add_argument("--out", default=None, help="output file (stdout if omitted)")

    v = sub.add_parser("verify", help="run a verification suite")
    v.add_argument("suite", choices=SUITES + ("all",))
    common(v)
    v.add_argument("--format", choices=("json", "csv"), default="json")
    t = sub.add_parser("trajectory", help="emit a Painleve VI trajectory")
    common(t)
    t.add_argument("--format", choices=("json", "csv"), default="csv")
    return p


def config_from_args(args, parser):
    try:
        taus = ()
        if args.tau:
            taus = tuple(z for item in args.tau for z in parse_grid(item))
            if not taus:
                parser.error("empty --tau sample list")
        grid = parse_grid(args.tau_grid) if args.tau_grid is not None else ()
        if args.tau_grid is not None and not grid:
            parser.error("empty --tau-grid")
        for z in taus + grid:
            if z.imag <= 0:
                parser.error(f"tau must lie in the upper half plane, got {z}")
        c = (parse_complex(args.c1 or "0.31"), parse_complex(args.c3 or "0.17")) if (args.c1 or args.c3) else None
        d = (parse_complex(args.d1 or "0.3"), parse_complex(args.d3 or "1.0")) if (args.d1 or args.d3) else None
    except ValueError as exc:
        parser.error(str(exc))
    if args.tol is not None and not args.tol > 0:
        parser.error("--tol must be positive")
    if args.samples < 1:
        parser.error("--samples must be positive")
    ls = [args.l0, args.l1, args.l2, args.l3]
    l = (2, 0, 0, 0) if all(v is None for v in ls) else tuple(v or 0 for v in ls)
    if min(l) < 0:
        parser.error("l_i must be non-negative")
    if args.family in pv.INDEXED and args.index is None:
        parser.error(f"--index is required for {args.family}")
    cfg = RunConfig(command=args.command, suite=getattr(args, "suite", None) or "all", taus=taus,
                    tau_grid=grid, family=args.family, index=args.index if args.family in pv.INDEXED else None,
                    c=c, d=d, l=l, tol=args.tol, precision=args.precision, seed=args.seed,
                    samples=args.samples, out=args.out, format=args.format)
    return cfg


def _emit(text, out):
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None):
    parser = _parser()
    args = parser.parse_args(argv)
    cfg = config_from_args(args, parser)
    if cfg.command == "verify":
        checks = run_suite(cfg)
        rep = build_report(checks, cfg.echo())
        _emit(report_json(rep) if cfg.format == "json" else report_csv(rep), cfg.out)
        return 0 if rep["summary"]["overall"] == "pass" else 1
    inst = cfg.instance()
    grid = cfg.tau_grid or DEFAULT_GRID
    rows = trajectory_rows(inst, grid)
    if cfg.format == "csv":
        _emit(trajectory_csv(rows), cfg.out)
    else:
        _emit(trajectory_json(rows, {"family": inst.name, "constants": list(inst.constants), "config": cfg.echo()}),
              cfg.out)
    return 0 if all(r["status"] == "ok" for r in rows) else 1


if __name__ == "__main__":
    sys.exit(main())
