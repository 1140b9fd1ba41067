"""Command line entry point: ``coaction-tower <verb> SPEC [options]``.

SPEC is a path to a JSON spec file or the name of a bundled spec.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .algebra import p_weights
from .coaction import canonical_Q
from .runner import EXIT_MALFORMED, run
from .specfile import SUITE_ORDER, SpecError, bundled_spec, bundled_spec_names, load_spec
from . import tower


def _load(target: str):
    path = Path(target)
    if path.suffix == ".json" or path.exists():
        return load_spec(path)
    return bundled_spec(target)


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="coaction-tower",
                                     description="Fixed points of a coaction along the Jones tower.")
    sub = parser.add_subparsers(dest="verb", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("spec", help="spec file path or bundled spec name")
    common.add_argument("--nmax", type=int, default=None, help="largest tower degree")
    common.add_argument("--tol", type=float, default=None, help="absolute residual tolerance")
    check = sub.add_parser("check", parents=[common], help="run verification suites")
    check.add_argument("--suite", action="append", choices=SUITE_ORDER, default=None,
                       help="restrict to a suite (repeatable)")
    check.add_argument("--seed", type=int, default=None, help="seed for randomized spot checks")
    check.add_argument("--output", type=Path, default=None, help="also write the report here")
    sub.add_parser("poincare", parents=[common], help="print dim Q_n for n = 0..nmax")
    fixed = sub.add_parser("fixed-points", parents=[common], help="dump an orthonormal basis of Q_n")
    fixed.add_argument("--degree", type=int, default=None, help="only this degree")
    sub.add_parser("describe", parents=[common], help="echo the parsed spec with derived data")
    sub.add_parser("list", help="list bundled specs").add_argument("spec", nargs="?", help=argparse.SUPPRESS)
    return parser


def _cmd_check(spec, args) -> int:
    report = run(spec, n_max=args.nmax, tol=args.tol,
                 suites=tuple(args.suite) if args.suite else None, seed=args.seed)
    lines = report.lines()
    print("\n".join(lines))
    if args.output:
        args.output.write_text("\n".join(lines) + "\n")
    return report.exit_code


def _n_max(spec, args) -> int:
    from .lattice import default_n_max
    return args.nmax or spec.run.n_max or default_n_max(spec.algebra)


def _require_coaction(spec):
    if spec.coaction is None:
        raise SpecError("coaction", "missing section (required by this command)")
    return spec.coaction


def _cmd_poincare(spec, args) -> int:
    c = _require_coaction(spec)
    tol = args.tol or spec.run.tolerance
    for n, dim in enumerate(tower.poincare_series(c, _n_max(spec, args), tol)):
        print(json.dumps({"n": n, "dim": dim}))
    return 0


def _cmd_fixed_points(spec, args) -> int:
    c = _require_coaction(spec)
    tol = args.tol or spec.run.tolerance
    degrees = [args.degree] if args.degree is not None else range(0, _n_max(spec, args) + 1)
    for n in degrees:
        Q = tower.fixed_point_basis(c, n, tol)
        for k, x in enumerate(Q.basis):
            print(json.dumps({"n": n, "index": k, "records": x.to_records()}))
    return 0


def _cmd_describe(spec, args) -> int:
    alg = spec.algebra
    out = {
        "name": spec.name,
        "blocks": list(alg.block_sizes),
        "weights": [float(w) for w in alg.q**4],
        "q": [float(q) for q in alg.q],
        "delta": alg.delta,
        "loop_dims": [alg.power(n).dim for n in range(0, _n_max(spec, args) + 1)],
    }
    if alg.has_delta:
        out["p_weights"] = [float(p) for p in p_weights(alg)]
    if spec.hopf is not None:
        out["hopf"] = {"name": spec.hopf.name, "dim": spec.hopf.dim,
                       "commutative": spec.hopf.is_commutative}
    if spec.coaction is not None:
        try:
            Q = canonical_Q(spec.coaction, args.tol or spec.run.tolerance)
            out["Q"] = {"diagonal": [float(v) for v in np.diag(Q.matrix).real],
                        "block_traces": list(Q.block_traces), "delta": Q.delta}
        except ValueError as exc:
            out["Q"] = {"error": str(exc)}
    out["run"] = {"n_max": spec.run.n_max, "tolerance": spec.run.tolerance, "suites": list(spec.run.suites)}
    print(json.dumps(out, indent=2))
    return 0


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    if args.verb == "list":
        print("\n".join(bundled_spec_names()))
        return 0
    try:
        spec = _load(args.spec)
        handler = {"check": _cmd_check, "poincare": _cmd_poincare,
                   "fixed-points": _cmd_fixed_points, "describe": _cmd_describe}[args.verb]
        return handler(spec, args)
    except SpecError as exc:
        print(f"malformed spec: {exc}", file=sys.stderr)
        return EXIT_MALFORMED
    except OSError as exc:
        print(f"cannot read spec: {exc}", file=sys.stderr)
        return EXIT_MALFORMED


if __name__ == "__main__":
    sys.exit(main())
