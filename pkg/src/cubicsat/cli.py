"""Command-line entry point: ``cubicsat <subcommand> ...``.

Exit codes: 0 success, 1 bad input, 2 internal assertion failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from fractions import Fraction
from typing import Sequence

from . import circle, harness, solvers, surfaces, targets
from .errors import CubicSatError


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _ints(text: str) -> tuple[int, ...]:
    return tuple(int(float(s)) if "e" in s.lower() else int(s) for s in text.split(","))


def _floats(text: str) -> tuple[float, ...]:
    """Comma-separated reals; ``a/b`` is read exactly before rounding."""
    return tuple(float(Fraction(s.strip())) for s in text.split(","))


def _emit(rows: list[dict], fmt: str, out=None) -> None:
    out = out or sys.stdout
    if fmt == "json":
        json.dump(rows if len(rows) != 1 else rows[0], out, indent=2, default=str)
        out.write("\n")
        return
    if not rows:
        return
    w = csv.DictWriter(out, fieldnames=list(rows[0]), lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow({k: (";".join(map(str, v)) if isinstance(v, (list, tuple)) else v) for k, v in row.items()})


def cmd_surfaces(args) -> int:
    rows = []
    for sid in surfaces.SURFACE_IDS:
        s = surfaces.get_surface(sid)
        rows.append({
            "id": s.id,
            "singularity": s.singularity,
            "family": s.family,
            "r": s.r_bound,
            "odd_primes_max": s.rtilde_bound,
            "equation": s.equation,
        })
    _emit(rows, args.format)
    return 0


def cmd_derive(args) -> int:
    d = targets.derive_generic(args.surface, args.xi)
    row = d.as_dict()
    row["relation_residuals"] = list(d.relation_residuals())
    if args.epsilon is not None:
        row["delta"] = targets.shrink_delta(d, args.xi, args.epsilon)
    _emit([row], args.format)
    return 0


def cmd_solve(args) -> int:
    fam = solvers.ConstraintFamily(args.family, args.betas, Fraction(args.alpha), args.two_slot)
    solvers.check_gammas(fam, args.gammas)
    ivals = solvers.family_intervals(fam, args.gammas, args.B, args.delta)
    sols = solvers.solve(fam, ivals, workers=args.workers or solvers.worker_count())
    if args.emit == "tuples":
        names = [f"p{j + 1}" for j in range(fam.arity)]
        _emit([dict(zip(names, s)) for s in sols], args.format)
    else:
        _emit([{"family": fam.kind, "B": args.B, "solutions": len(sols),
                "weighted": solvers.weighted_count(sols, args.weight)}], args.format)
    return 0


def cmd_series(args) -> int:
    _emit([circle.singular_series(args.P).as_dict()], args.format)
    return 0


def cmd_aq(args) -> int:
    rows = []
    for q in args.q:
        a = circle.A_of_q(q)
        rows.append({"q": q, "A": str(a), "A_float": float(a)})
    _emit(rows, args.format)
    return 0


def cmd_circle_verify(args) -> int:
    grid = args.grid or (args.B,)
    rows = [circle.verify_r1_asymptotic(B, args.gammas, args.betas, args.delta, args.P).as_dict() for B in grid]
    _emit(rows, args.format)
    return 0


def cmd_count(args) -> int:
    spec = surfaces.get_surface(args.surface)
    r = args.r if args.r is not None else spec.r_bound
    res = harness.enumerate_points(
        spec.id, args.xi, args.epsilon, args.B, r, args.delta,
        workers=args.workers or 1, keep_points=args.points,
    )
    if args.points:
        _emit([{"x0": x[0], "x1": x[1], "x2": x[2], "x3": x[3]} for x in res.points], args.format)
    else:
        _emit([{"surface": spec.id, "B": args.B, "epsilon": args.epsilon, "r": r,
                "delta": res.delta, "M": res.count}], args.format)
    return 0


def cmd_grid(args) -> int:
    cfg = harness.load_config(args.config)
    fmt = args.format or cfg.format
    report = harness.run_grid(cfg, workers=args.workers or solvers.worker_count())
    out = args.output or cfg.output
    if out:
        harness.write_report(report, out, fmt)
    else:
        sys.stdout.write(report.render(fmt))
    return 0


def cmd_verify_table1(args) -> int:
    results = harness.verify_table1(seed=args.seed, n=args.n)
    rows = []
    for res in results.values():
        rows.append({"surface": res.surface, "r": res.r_bound, "checked": res.checked,
                     "status": "pass" if res.passed else "FAIL",
                     "counterexample": json.dumps(res.counterexample) if res.counterexample else ""})
    _emit(rows, args.format)
    if not all(r.passed for r in results.values()):
        raise AssertionError("saturation-bound check failed")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="cubicsat", description="Almost-prime points on singular cubic surfaces.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    def fmt(sp):
        sp.add_argument("--format", choices=("csv", "json"), default="csv")

    sp = sub.add_parser("surfaces", help="the eight surfaces")
    sp.add_argument("action", choices=("list",))
    fmt(sp)
    sp.set_defaults(fn=cmd_surfaces)

    sp = sub.add_parser("derive", help="gammas and betas for a target point")
    sp.add_argument("--surface", required=True)
    sp.add_argument("--xi", type=_floats, required=True)
    sp.add_argument("--epsilon", type=float)
    sp.add_argument("--format", choices=("csv", "json"), default="json")
    sp.set_defaults(fn=cmd_derive)

    sp = sub.add_parser("solve", help="prime solutions of a constraint family")
    sp.add_argument("--family", choices=solvers.KINDS, required=True)
    sp.add_argument("--betas", type=_ints, required=True)
    sp.add_argument("--gammas", type=_floats, required=True)
    sp.add_argument("--B", type=lambda s: _ints(s)[0], required=True)
    sp.add_argument("--delta", type=float, default=solvers.DEFAULT_DELTA)
    sp.add_argument("--alpha", default="1/3")
    sp.add_argument("--two-slot", type=int, default=0)
    sp.add_argument("--weight", choices=("log", "unit"), default="log")
    sp.add_argument("--emit", choices=("count", "tuples"), default="count")
    sp.add_argument("--workers", type=int)
    fmt(sp)
    sp.set_defaults(fn=cmd_solve)

    sp = sub.add_parser("series", help="singular series, product and partial sum")
    sp.add_argument("--P", type=lambda s: _ints(s)[0], default=circle.DEFAULT_P0)
    fmt(sp)
    sp.set_defaults(fn=cmd_series)

    sp = sub.add_parser("aq", help="exact A(q)")
    sp.add_argument("--q", type=_ints, required=True)
    fmt(sp)
    sp.set_defaults(fn=cmd_aq)

    sp = sub.add_parser("circle-verify", help="R1 against J times the singular series")
    sp.add_argument("--B", type=lambda s: _ints(s)[0], default=10**6)
    sp.add_argument("--grid", type=_ints, help="comma-separated list of B; overrides --B")
    sp.add_argument("--gammas", type=_floats, default=circle.CANONICAL_F1["gammas"])
    sp.add_argument("--betas", type=_ints, default=circle.CANONICAL_F1["betas"])
    sp.add_argument("--delta", type=float, default=circle.CANONICAL_F1["delta"])
    sp.add_argument("--P", type=int, default=circle.DEFAULT_P0)
    fmt(sp)
    sp.set_defaults(fn=cmd_circle_verify)

    sp = sub.add_parser("count", help="almost-prime points near xi")
    sp.add_argument("--surface", required=True)
    sp.add_argument("--xi", type=_floats, required=True)
    sp.add_argument("--epsilon", type=float, required=True)
    sp.add_argument("--B", type=lambda s: _ints(s)[0], required=True)
    sp.add_argument("--r", type=int)
    sp.add_argument("--delta", type=float)
    sp.add_argument("--points", action="store_true", help="list the points instead of counting")
    sp.add_argument("--workers", type=int)
    fmt(sp)
    sp.set_defaults(fn=cmd_count)

    sp = sub.add_parser("grid", help="run a B-grid from a config file")
    sp.add_argument("config")
    sp.add_argument("--output")
    sp.add_argument("--format", choices=("csv", "json"))
    sp.add_argument("--workers", type=int)
    sp.set_defaults(fn=cmd_grid)

    sp = sub.add_parser("verify-table1", help="seeded exactness sweep over all surfaces")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--n", type=int, default=500)
    fmt(sp)
    sp.set_defaults(fn=cmd_verify_table1)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.fn(args)
    except AssertionError as exc:
        print(f"cubicsat: assertion failed: {exc}", file=sys.stderr)
        return 2
    except (CubicSatError, ValueError, KeyError, OSError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"cubicsat: error: {msg}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
