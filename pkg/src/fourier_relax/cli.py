"""Command line entry point.

Exit codes: 0 success, 1 usage error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .conservation import MODES
from .experiments import BENCH_CASES, clean_json, SCENARIOS, IntegrationFailure, get_scenario, perf_bench, run_scenario
from .models import MODELS
from .tableaux import ALIASES, TABLEAUX

USAGE_ERROR = 1
NUMERICAL_FAILURE = 2

_FAMILY = {"bbm": "scalar", "kdv": "scalar", "nls": "nls", "hypnls": "nls"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 by default, which is reserved for numerical failures
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(USAGE_ERROR, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="fourier-relax", description="Fourier Galerkin solvers with relaxation time stepping")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("solve", help="run a registered scenario, optionally overriding its settings")
    s.add_argument("--equation", required=True, choices=sorted(MODELS))
    s.add_argument("--scenario", required=True)
    s.add_argument("--n", type=int, help="number of nodes")
    s.add_argument("--dt", type=float)
    s.add_argument("--t-final", type=float)
    s.add_argument("--span", choices=("ci", "full"), default="ci")
    s.add_argument("--tableau", choices=sorted(ALIASES) + sorted(TABLEAUX))
    s.add_argument("--conserve", choices=MODES)
    s.add_argument("--beta", type=float)
    s.add_argument("--tau", type=float)
    s.add_argument("--out", help="output directory")
    s.add_argument("--format", choices=("csv", "json"), default="csv")

    sub.add_parser("list-scenarios", help="print the scenario registry")

    b = sub.add_parser("bench", help="timing benchmark")
    b.add_argument("--case", required=True, choices=sorted(BENCH_CASES))
    b.add_argument("--repeats", type=int, default=3)
    return p


def _configure(args):
    try:
        sc = get_scenario(args.scenario)
    except KeyError as exc:
        raise UsageError(exc.args[0]) from None
    if _FAMILY[args.equation] != _FAMILY[sc.equation]:
        raise UsageError(f"scenario {sc.name!r} holds {sc.equation} data, not usable with --equation {args.equation}")
    changes = {"equation": args.equation}
    for key, attr in (("n", "n_nodes"), ("dt", "dt"), ("tableau", "tableau"), ("conserve", "conserve"),
                      ("beta", "beta"), ("tau", "tau")):
        value = getattr(args, key)
        if value is not None:
            changes[attr] = value
    t0, t1 = sc.span(args.span)
    if args.t_final is not None:
        t1 = args.t_final
    changes["t_span"] = (t0, t1)
    changes["full_t_span"] = None
    try:
        sc = sc.replace(**changes)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    n = sc.steps_for(sc.t_span)
    if sc.cadence > n:
        sc = sc.replace(cadence=n)
    return sc


def _solve(args) -> int:
    sc = _configure(args)
    res = run_scenario(sc, "ci", out_dir=args.out, fmt=args.format)
    print(json.dumps(clean_json({"scenario": sc.name, **res.summary}), indent=1))
    return 0


def _list() -> int:
    for sc in SCENARIOS.values():
        full = sc.full_t_span or sc.t_span
        print(f"{sc.name:12s} {sc.equation:6s} N={sc.n_nodes:<5d} dt={sc.dt:<9.3g} ci={sc.t_span} full={full} "
              f"{sc.tableau} {sc.conserve} ref={sc.reference}")
    return 0


def _bench(args) -> int:
    rep = perf_bench(args.case, repeats=args.repeats)
    print(json.dumps(clean_json({"case": rep.case, "median_s": rep.median, "times_s": rep.times, "steps": rep.steps,
                      "final_l2_error": rep.final_error, "metadata": rep.metadata}), indent=1))
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        if args.command == "solve":
            return _solve(args)
        if args.command == "list-scenarios":
            return _list()
        return _bench(args)
    except UsageError as exc:
        print(f"fourier-relax: error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except (IntegrationFailure, FloatingPointError) as exc:
        print(f"fourier-relax: numerical failure: {exc}", file=sys.stderr)
        return NUMERICAL_FAILURE


if __name__ == "__main__":
    sys.exit(main())
