"""Command-line front end.

Exit codes: 0 success (or "witness"), 1 "violated", 2 unparsable state id,
3 dimension mismatch, 4 "trivial" witness, 5 SDP budget exceeded,
6 malformed input file.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from fractions import Fraction

import numpy as np

from . import __version__
from .errors import BudgetExceededError, ShapeError, UnknownStateError
from .ghzw import lambda_critical, numeric_sup_check
from .hierarchy import HierarchyGraph
from .overlap import OptimizerConfig, OverlapTable, maximize_slocc_overlap, overlap_table
from .reference import PUBLISHED
from .states import PSI_IDS, parse_state_id, representative
from .witness import build_witness, verify_slocc_witness, witness_to_json

SEED_ENV = "SLOCCWIT_SEED"

EXIT_OK, EXIT_VIOLATED, EXIT_BAD_ID, EXIT_DIMS, EXIT_TRIVIAL, EXIT_BUDGET, EXIT_BAD_FILE = range(7)

NAMED_FRACTIONS = [Fraction(1, 2), Fraction(9, 16), Fraction(2, 3), Fraction(7, 10),
                   Fraction(3, 4), Fraction(4, 5), Fraction(5, 6), Fraction(7, 8),
                   Fraction(9, 10), Fraction(19, 20)]

log = logging.getLogger("sloccwit")


def format_value(v, saturated=False):
    """``1*`` for saturated cells, a fraction within 1e-9 of a listed one, else 6 decimals."""
    if saturated:
        return "1*"
    for f in NAMED_FRACTIONS:
        if abs(v - float(f)) <= 1e-9:
            return f"{f.numerator}/{f.denominator}"
    return f"{v:.6f}"


def render_text(table: OverlapTable):
    ids = [str(s) for s in table.ids]
    width = max(8, max(len(s) for s in ids) + 1)
    lines = ["orbit\\target".ljust(width + 4) + "".join(s.rjust(width) for s in ids)]
    for j, r in enumerate(ids):
        cells = []
        for i in range(len(ids)):
            cells.append("self" if i == j else format_value(table.value(j, i), table.saturated(j, i)))
        lines.append(r.ljust(width + 4) + "".join(c.rjust(width) for c in cells))
    return "\n".join(lines) + "\n"


def _default_seed():
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise SystemExit(f"{SEED_ENV} must be an integer, got {raw!r}")


def _config(args, **extra):
    kw = dict(restarts=args.restarts, seed=args.seed, max_sweeps=args.max_sweeps)
    if getattr(args, "threshold", None) is not None:
        kw["saturation_threshold"] = args.threshold
    kw.update(extra)
    return OptimizerConfig(**kw)


def _emit(text, out=None):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def cmd_overlap(args):
    target, orbit = parse_state_id(args.target), parse_state_id(args.orbit)
    if target.dims_of != orbit.dims_of:
        raise ShapeError(f"target dims {target.dims_of} differ from orbit dims {orbit.dims_of}")
    if target == orbit:
        doc = {"schemaVersion": 1, "kind": "overlap", "target": str(target),
               "orbit": str(orbit), "lambda": 1.0, "self": True}
        _emit(json.dumps(doc, indent=1))
        return EXIT_OK
    res = maximize_slocc_overlap(representative(target), representative(orbit), _config(args))
    doc = {"schemaVersion": 1, "kind": "overlap", "target": str(target), "orbit": str(orbit),
           "display": format_value(res.lam, res.saturated)}
    doc.update(res.to_dict(with_argmax=args.argmax))
    _emit(json.dumps(doc, indent=1))
    return EXIT_OK


def cmd_table233(args):
    ids = [s.strip() for s in args.ids.split(",")] if args.ids else list(PSI_IDS)
    cfg = _config(args)

    def progress(key, res):
        log.info("orbit %s target %s: %s", ids[key[0]], ids[key[1]], format_value(res.lam, res.saturated))

    table = overlap_table(ids, cfg, jobs=args.jobs, progress=progress)
    if args.format == "csv":
        text = table.to_csv()
    elif args.format == "json":
        text = table.to_json(with_argmax=args.argmax)
    else:
        text = render_text(table)
    _emit(text, args.out)
    return EXIT_OK


def _published_table():
    ids = list(PSI_IDS)
    mask = np.array([[PUBLISHED[r][c] == 1 for c in ids] for r in ids])
    return ids, mask


def cmd_hierarchy(args):
    if args.published:
        ids, mask = _published_table()
    else:
        if not args.table:
            raise SystemExit("hierarchy needs a table file or --published")
        try:
            with open(args.table) as fh:
                text = fh.read()
            table = (OverlapTable.from_json(text) if text.lstrip().startswith("{")
                     else OverlapTable.from_csv(text))
        except (OSError, ValueError, KeyError) as exc:
            print(f"error: cannot read table {args.table}: {exc}", file=sys.stderr)
            return EXIT_BAD_FILE
        ids, mask = table.ids, table.saturated_mask()
    graph = HierarchyGraph.from_mask(ids, mask, reduce=args.reduce)
    _emit(graph.to_dot(), args.out)
    return EXIT_OK


def cmd_witness_check(args):
    phi = representative(args.phi)
    orbit = parse_state_id(args.orbit)
    if orbit.dims_of != phi.dims:
        raise ShapeError(f"phi dims {phi.dims} differ from orbit dims {orbit.dims_of}")
    w = build_witness(args.lam, phi, orbit)
    verdict = verify_slocc_witness(w, _config(args))
    _emit(witness_to_json(w, verdict, phi_id=parse_state_id(args.phi)))
    return {"witness": EXIT_OK, "violated": EXIT_VIOLATED, "trivial": EXIT_TRIVIAL}[verdict.kind]


def cmd_sdp_bound(args):
    from .sdp import InteriorPointSolver, ppt_bound_lambda

    phi, psi = representative(args.phi), representative(args.psi)
    if phi.dims != psi.dims:
        raise ShapeError(f"phi dims {phi.dims} differ from psi dims {psi.dims}")
    solver = InteriorPointSolver(dim_budget=args.budget,
                                 memory_budget=int(args.memory_gib * 2 ** 30))
    cfg = _config(args)
    lower = maximize_slocc_overlap(phi, psi, cfg).lam
    bound = ppt_bound_lambda(phi, psi, args.bisect_tol, solver=solver, lower=lower,
                             solver_tol=args.solver_tol)
    doc = {"schemaVersion": 1, "kind": "ppt_bound", "phi": args.phi, "psi": args.psi,
           "lowerBound": lower, "upperBound": bound, "bisectTol": args.bisect_tol,
           "trivial": bound >= 1 - 2 * args.bisect_tol}
    _emit(json.dumps(doc, indent=1))
    return EXIT_OK


def cmd_ghzw(args):
    rows = []
    for n in args.n:
        res = maximize_slocc_overlap(representative(f"ghz:{n}"), representative(f"w:{n}"),
                                     _config(args))
        rows.append({"N": n, "analytic": lambda_critical(n),
                     "numericSup": numeric_sup_check(n, args.trials, args.seed),
                     "optimizer": res.lam})
    _emit(json.dumps({"schemaVersion": 1, "kind": "ghzw", "rows": rows}, indent=1))
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="sloccwit", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def opt_flags(sp, restarts=200):
        sp.add_argument("--restarts", type=int, default=restarts)
        sp.add_argument("--seed", type=int, default=_default_seed(),
                        help=f"RNG seed (default: ${SEED_ENV} or 0)")
        sp.add_argument("--max-sweeps", type=int, default=2000)
        sp.add_argument("--threshold", type=float, default=1 - 1e-6,
                        help="saturation threshold on lambda (default 1-1e-6)")

    sp = sub.add_parser("overlap", help="maximal squared overlap of a target with an orbit")
    sp.add_argument("--target", required=True)
    sp.add_argument("--orbit", required=True)
    sp.add_argument("--argmax", action="store_true", help="include the maximizing operators")
    opt_flags(sp)
    sp.set_defaults(func=cmd_overlap)

    sp = sub.add_parser("table233", help="overlap table over the 2x3x3 representatives")
    sp.add_argument("--ids", help="comma-separated subset, e.g. psi6,psi7")
    sp.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    sp.add_argument("--format", choices=("csv", "json", "text"), default="csv")
    sp.add_argument("--out")
    sp.add_argument("--argmax", action="store_true")
    opt_flags(sp)
    sp.set_defaults(func=cmd_table233)

    sp = sub.add_parser("hierarchy", help="DOT graph of saturated table entries")
    sp.add_argument("table", nargs="?", help="table in CSV or JSON form")
    sp.add_argument("--published", action="store_true", help="use the published 2x3x3 values")
    sp.add_argument("--reduce", action="store_true", help="transitive reduction")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_hierarchy)

    sp = sub.add_parser("witness-check", help="test lam*1 - |phi><phi| on an orbit")
    sp.add_argument("--lambda", dest="lam", type=float, required=True)
    sp.add_argument("--phi", required=True)
    sp.add_argument("--orbit", required=True)
    opt_flags(sp)
    sp.set_defaults(func=cmd_witness_check)

    sp = sub.add_parser("sdp-bound", help="PPT upper bound on the overlap")
    sp.add_argument("--phi", required=True)
    sp.add_argument("--psi", required=True)
    sp.add_argument("--bisect-tol", type=float, default=1e-3)
    sp.add_argument("--solver-tol", type=float, default=1e-8)
    sp.add_argument("--budget", type=int, default=128, help="maximal SDP matrix dimension")
    sp.add_argument("--memory-gib", type=float, default=2.0)
    opt_flags(sp, restarts=20)
    sp.set_defaults(func=cmd_sdp_bound)

    sp = sub.add_parser("ghzw", help="GHZ_N versus W-class thresholds")
    sp.add_argument("--n", type=int, nargs="+", default=[3, 4, 5])
    sp.add_argument("--trials", type=int, default=50)
    opt_flags(sp, restarts=50)
    sp.set_defaults(func=cmd_ghzw)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except UnknownStateError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_ID
    except ShapeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIMS
    except BudgetExceededError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET


if __name__ == "__main__":
    sys.exit(main())
