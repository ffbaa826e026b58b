"""Command-line interface: ``wellround <command> ...``.

Exit codes: 0 success, 1 parse or validation error, 2 enumeration budget
exceeded, 3 orbit search budget exhausted, 4 covering certificate VIOLATED.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import bundled
from .covering import certify_multiplicity, cover_order, unfold_cover
from .errors import BudgetExhausted, EnumerationBudgetExceeded, WellRoundError
from .exterior import flag_codim_check, nested_multiindices, stabilizer_subspace, wedge_of_group
from .io import (
    cover_to_dict,
    dumps,
    grid_cover_to_dict,
    lattice_to_dict,
    load_config,
    load_json,
    multiplicity_csv,
    read_cover,
    read_flag,
    read_lattice,
    read_orbit_spec,
    trace_csv,
)
from .lattice import (
    DiagonalElement,
    cover_indices,
    dim_delta,
    is_generic_well_rounded,
    is_well_rounded,
    minimal_vectors,
    short_vectors,
    wr_transversality_rank,
)
from .orbits import compact_orbit_from_quadratic, orbit_from_spec, search_well_rounded

EXIT_OK, EXIT_INPUT, EXIT_ENUM, EXIT_BUDGET, EXIT_VIOLATED = 0, 1, 2, 3, 4


class _Out:
    """Collects the primary JSON document and side files, then writes them in order."""

    def __init__(self, args, cfg):
        self.args = args
        self.cfg = cfg
        self.files = []

    def side(self, name, text, explicit=None):
        if explicit:
            self.files.append((Path(explicit), text))
        elif self.cfg.output_dir:
            self.files.append((Path(self.cfg.output_dir) / name, text))

    def emit(self, name, doc, csv_text=None):
        text = dumps(doc)
        for path, body in self.files:
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(body, encoding="utf-8")
        if self.cfg.output_dir:
            out = Path(self.cfg.output_dir)
            out.mkdir(parents=True, exist_ok=True)
            (out / f"{name}.json").write_text(text, encoding="utf-8")
        if getattr(self.args, "output", None):
            Path(self.args.output).write_text(text, encoding="utf-8")
        elif self.cfg.format == "csv" and csv_text is not None:
            sys.stdout.write(csv_text)
        else:
            sys.stdout.write(text)


# -- commands ------------------------------------------------------------------

def cmd_svp(args, out):
    x = read_lattice(args.lattice)
    rep = short_vectors(x, args.delta_max)
    rows = ["ratio," + ",".join(f"v_{i + 1}" for i in range(x.dim))]
    rows += [",".join(repr(float(f"{v:.12g}")) for v in [r, *vec]) for r, vec in zip(rep.ratios, rep.vectors)]
    out.emit("svp", rep.to_dict(), "\n".join(rows) + "\n")
    return EXIT_OK


def cmd_wr_check(args, out):
    x = read_lattice(args.lattice)
    wr = is_well_rounded(x, args.tol)
    doc = {"well_rounded": wr, "generic_well_rounded": False, "transversality_rank": None,
           "minimal_vectors": minimal_vectors(x, args.tol)}
    if wr:
        doc["generic_well_rounded"] = is_generic_well_rounded(x, args.tol)
        if doc["generic_well_rounded"]:
            doc["transversality_rank"] = wr_transversality_rank(x)
    out.emit("wr-check", doc)
    return EXIT_OK


def cmd_dim_delta(args, out):
    x = read_lattice(args.lattice)
    out.emit("dim-delta", {"delta": args.delta, "dim": dim_delta(x, args.delta)})
    return EXIT_OK


def cmd_cover_membership(args, out):
    x = read_lattice(args.lattice)
    a = DiagonalElement(np.array(args.a, dtype=float)) if args.a else DiagonalElement.identity(x.dim)
    js = cover_indices(x, a, args.eps)
    out.emit("cover-membership", {"eps": args.eps, "a": a.log_coords, "j": js[0] if js else None, "all": js})
    return EXIT_OK


def cmd_orbit_search(args, out):
    cfg = out.cfg
    spec = read_orbit_spec(args.spec)
    x, s = orbit_from_spec(spec)
    code = EXIT_OK
    try:
        res = search_well_rounded(x, s, budget=cfg.budget, seed=cfg.seed, tol=cfg.geom_tol, keep_trace=True)
    except BudgetExhausted as exc:
        res, code = exc.result, EXIT_BUDGET
    doc = {"status": "ok" if code == EXIT_OK else "budget_exhausted", "seed": cfg.seed,
           "budget": cfg.budget, "tol": cfg.geom_tol, "structure": s.to_dict(), **res.to_dict()}
    text = trace_csv(res)
    out.side("trace.csv", text, args.trace)
    out.emit("orbit-search", doc, text)
    return code


def cmd_orbit_compact(args, out):
    x, s = compact_orbit_from_quadratic(args.D)
    out.emit("orbit-compact", {"D": args.D, "lattice": lattice_to_dict(x), "structure": s.to_dict()})
    return EXIT_OK


def cmd_flag(args, out):
    flag = read_flag(args.file)
    nested = nested_multiindices(flag)
    codim, ok = flag_codim_check(flag)
    out.emit("flag", {"n": flag.n, "dims": flag.dims, "rational": flag.rational,
                      "nested": [list(J) for J in nested], "codim": codim, "length": flag.length,
                      "satisfies": ok})
    return EXIT_OK


def cmd_stab(args, out):
    data = load_json(args.file)
    n = int(data["n"])
    if "supports" in data:
        supports = [tuple(J) for J in data["supports"]]
    else:
        supports = sorted({J for g in data["groups"] for J in wedge_of_group(g).support()})
    dim, basis = stabilizer_subspace(supports, n)
    out.emit("stab", {"n": n, "supports": [list(J) for J in supports], "dim": dim,
                      "codim": n - 1 - dim, "basis": basis})
    return EXIT_OK


def cmd_cover_certify(args, out):
    c, d = read_cover(args.file)
    rep = certify_multiplicity(c, d, check_hypotheses=not args.no_hypotheses, affine_tol=args.affine_tol)
    g = c.on(d)
    text = multiplicity_csv(g)
    out.side("multiplicity.csv", text, args.csv)
    doc = rep.to_dict()
    doc["target_met"] = rep.order >= rep.target
    out.emit("cover-certify", doc, text)
    return EXIT_VIOLATED if rep.violated else EXIT_OK


def cmd_cover_unfold(args, out):
    c, d = read_cover(args.file)
    u = unfold_cover(c, d, args.window)
    order, witness = cover_order(u)
    doc = {"order": order, "witness": witness, "window": args.window, **grid_cover_to_dict(u)}
    text = multiplicity_csv(u)
    out.side("multiplicity.csv", text, args.csv)
    out.emit("cover-unfold", doc, text)
    return EXIT_OK


def cmd_cover_example(args, out):
    factories = {**bundled.CERTIFY_SUITE, "square-quadrants": bundled.square_quadrants,
                 "whole-segment": bundled.whole_segment}
    if args.name not in factories:
        raise ValueError(f"unknown example {args.name!r}; choose from {sorted(factories)}")
    c, d = factories[args.name](resolution=args.resolution)
    out.emit("cover-example", cover_to_dict(c, d))
    return EXIT_OK


# -- parser ------------------------------------------------------------------

def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration file")
    common.add_argument("--seed", type=int)
    common.add_argument("--budget", type=int)
    common.add_argument("--geom-tol", type=float, dest="geom_tol")
    common.add_argument("--rank-tol", type=float, dest="rank_tol")
    common.add_argument("--output-dir", dest="output_dir")
    common.add_argument("--format", choices=("json", "csv"))
    common.add_argument("-o", "--output", help="write the JSON report here instead of stdout")

    p = argparse.ArgumentParser(prog="wellround", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    q = sub.add_parser("svp", parents=[common], help="short vectors up to (1 + delta_max) * alpha")
    q.add_argument("lattice")
    q.add_argument("--delta-max", type=float, default=0.5, dest="delta_max")
    q.set_defaults(func=cmd_svp)

    q = sub.add_parser("wr-check", parents=[common], help="well-rounded / generic checks")
    q.add_argument("lattice")
    q.add_argument("--tol", type=float, default=0.0)
    q.set_defaults(func=cmd_wr_check)

    q = sub.add_parser("dim-delta", parents=[common], help="dimension of the span of Min_delta")
    q.add_argument("lattice")
    q.add_argument("--delta", type=float, required=True)
    q.set_defaults(func=cmd_dim_delta)

    q = sub.add_parser("cover-membership", parents=[common], help="indices j with a in U_j")
    q.add_argument("lattice")
    q.add_argument("--a", type=float, nargs="+", help="log coordinates of the diagonal element")
    q.add_argument("--eps", type=float, default=0.04)
    q.set_defaults(func=cmd_cover_membership)

    orbit = sub.add_parser("orbit", help="closed orbit commands").add_subparsers(dest="orbit_command", required=True)
    q = orbit.add_parser("search", parents=[common], help="search an orbit for a well-rounded lattice")
    q.add_argument("spec")
    q.add_argument("--trace", help="trace CSV path")
    q.set_defaults(func=cmd_orbit_search)
    q = orbit.add_parser("compact", parents=[common], help="compact orbit of Z[sqrt(D)]")
    q.add_argument("D", type=int)
    q.set_defaults(func=cmd_orbit_compact)

    q = sub.add_parser("flag", parents=[common], help="nested multi-indices and stabilizer codimension")
    q.add_argument("file")
    q.set_defaults(func=cmd_flag)

    q = sub.add_parser("stab", parents=[common], help="stabilizer of a set of wedge supports")
    q.add_argument("file")
    q.set_defaults(func=cmd_stab)

    cover = sub.add_parser("cover", help="covering commands").add_subparsers(dest="cover_command", required=True)
    q = cover.add_parser("certify", parents=[common], help="grid certificate for a cover file")
    q.add_argument("file")
    q.add_argument("--no-hypotheses", action="store_true", dest="no_hypotheses")
    q.add_argument("--affine-tol", type=float, dest="affine_tol")
    q.add_argument("--csv", help="multiplicity CSV path")
    q.set_defaults(func=cmd_cover_certify)
    q = cover.add_parser("unfold", parents=[common], help="pull a CFK cover back to a Euclidean window")
    q.add_argument("file")
    q.add_argument("--window", type=float, default=2.0)
    q.add_argument("--csv", help="multiplicity CSV path")
    q.set_defaults(func=cmd_cover_unfold)
    q = cover.add_parser("example", parents=[common], help="write a bundled example cover")
    q.add_argument("name")
    q.add_argument("--resolution", type=int, default=32)
    q.set_defaults(func=cmd_cover_example)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config, seed=args.seed, budget=args.budget, geom_tol=args.geom_tol,
                          rank_tol=args.rank_tol, output_dir=args.output_dir, format=args.format)
        return args.func(args, _Out(args, cfg))
    except EnumerationBudgetExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ENUM
    except (WellRoundError, ValueError, KeyError, TypeError, IndexError, OSError,
            json.JSONDecodeError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
