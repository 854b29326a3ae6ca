"""Command-line interface.

    cosoliton run <spec> [--suite NAME]... [--alpha X] [--rho X] [--q X]
                  [--lambda X] [--mu X] [--seed N] [--points N] [--tol X]
                  [--format json|text] [--deterministic]
    cosoliton validate <spec>
    cosoliton init-examples [dir]

<spec> is a JSON document path, or the name of a built-in fixture
(alpha_cosymplectic_5d, cosymplectic_flat_5d).  The environment variable
COSOLITON_TOL supplies a global tolerance default; --tol overrides it.

Exit codes: 0 all checks pass, 1 a check failed, 2 input or spec error,
3 internal numerical failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from ._version import __version__
from .document import builtin_document, builtin_documents, load_spec
from .errors import NumericalError, SpecError
from .expr import ExpressionError
from .suites import SUITE_NAMES, run

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_SPEC_ERROR = 2
EXIT_NUMERICAL = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cosoliton",
        description="Numerical verification of contact-structure, connection, "
                    "curvature and soliton identities on frame manifolds.")
    parser.add_argument("--version", action="version", version=f"cosoliton {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run check suites against a spec document")
    run_p.add_argument("spec", help="path to a JSON spec document, or a built-in fixture name")
    run_p.add_argument("--suite", action="append", default=None, metavar="NAME",
                       help=f"suite to run (repeatable); one of: {', '.join(SUITE_NAMES)}, all")
    run_p.add_argument("--alpha", type=float, default=None,
                       help="override the structure constant")
    run_p.add_argument("--rho", type=float, default=None, help="override the Ricci weight")
    run_p.add_argument("--q", type=float, default=None, help="override the Yamabe weight")
    run_p.add_argument("--lambda", dest="lam", type=float, default=None,
                       help="override the soliton constant")
    run_p.add_argument("--mu", type=float, default=None,
                       help="override the eta-term coefficient")
    run_p.add_argument("--seed", type=int, default=None, help="override the sampling seed")
    run_p.add_argument("--points", type=int, default=None,
                       help="override the sample point count (box sampling only)")
    run_p.add_argument("--tol", type=float, default=None,
                       help="global tolerance override (default from COSOLITON_TOL)")
    run_p.add_argument("--format", choices=("json", "text"), default="text")
    run_p.add_argument("--deterministic", action="store_true",
                       help="omit timing so identical runs emit identical reports")
    run_p.add_argument("--convention", choices=("paper", "standard"), default="paper",
                       help="sign convention for expanding/shrinking classification")
    run_p.add_argument("--output", default=None, help="write the report to a file")

    val_p = sub.add_parser("validate", help="validate a spec document and exit")
    val_p.add_argument("spec", help="path to a JSON spec document")

    init_p = sub.add_parser("init-examples",
                            help="write the built-in fixture documents to disk")
    init_p.add_argument("dir", nargs="?", default=".", help="target directory (default: .)")
    return parser


def _load(spec: str):
    path = Path(spec)
    if path.exists():
        return load_spec(path)
    if spec in builtin_documents():
        return builtin_document(spec)
    raise SpecError(f"spec file not found: {spec}")


def _cmd_run(args) -> int:
    doc = _load(args.spec)
    doc = doc.with_overrides(alpha=args.alpha, rho=args.rho, q=args.q,
                             lam=args.lam, mu=args.mu,
                             seed=args.seed, points=args.points)
    suites = args.suite if args.suite else list(doc.checks)
    tol = args.tol
    if tol is None and os.environ.get("COSOLITON_TOL"):
        try:
            tol = float(os.environ["COSOLITON_TOL"])
        except ValueError:
            raise SpecError(f"COSOLITON_TOL is not a number: "
                            f"{os.environ['COSOLITON_TOL']!r}") from None
    report = run(doc, suites, tol=tol, deterministic=args.deterministic,
                 convention=args.convention)
    if args.format == "json":
        text = json.dumps(report.to_dict(), indent=2, sort_keys=True)
    else:
        text = report.to_text()
    if args.output:
        Path(args.output).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)
    if any(r.error_kind == "numerical" for r in report.suites):
        return EXIT_NUMERICAL
    return EXIT_OK if report.passed else EXIT_CHECK_FAILED


def _cmd_validate(args) -> int:
    doc = load_spec(args.spec)
    print(f"ok: {doc.name} (dimension {doc.dimension}, "
          f"{len(doc.checks)} suite entr{'y' if len(doc.checks) == 1 else 'ies'})")
    return EXIT_OK


def _cmd_init_examples(args) -> int:
    target = Path(args.dir)
    target.mkdir(parents=True, exist_ok=True)
    for name, doc in sorted(builtin_documents().items()):
        path = target / f"{name}.json"
        path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        print(path)
    return EXIT_OK


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "validate":
            return _cmd_validate(args)
        if args.command == "init-examples":
            return _cmd_init_examples(args)
        raise SpecError(f"unknown command {args.command!r}")
    except (SpecError, ExpressionError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_SPEC_ERROR
    except NumericalError as err:
        print(f"numerical failure: {err}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
