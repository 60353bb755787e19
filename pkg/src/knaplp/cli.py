"""Command line entry point: ``knaplp {gen,solve,gap,verify}``."""

from __future__ import annotations

import argparse
import json
import sys
import time
from fractions import Fraction
from pathlib import Path

from . import harness
from .errors import BudgetExceeded, ContractViolation, Infeasible, UnboundedObjective
from .instance import GenParams, InstanceError, Sense, generate_random, load_instance
from .suites import SUITES, run_suite

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INFEASIBLE = 2
EXIT_UNBOUNDED = 3
EXIT_BUDGET = 4
EXIT_VIOLATION = 5


class _Parser(argparse.ArgumentParser):
    """Usage errors exit with 1 so that 2 keeps meaning "infeasible"."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _dump(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True)


def _pair(text: str) -> tuple[int, int]:
    lo, _, hi = text.partition(":")
    try:
        return int(lo), int(hi or lo)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO:HI, got {text!r}") from None


def _write(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)


def cmd_gen(args) -> int:
    params = GenParams(
        k=args.k,
        n=args.n,
        weight_range=args.weights,
        cost_range=args.costs,
        bound_range=args.bounds,
        sense=Sense(args.sense),
        tightness=Fraction(args.tightness),
        min_rhs=args.min_rhs,
    )
    inst = generate_random(params, args.seed)
    inst.validate()
    _write(inst.dumps(), args.out)
    return EXIT_OK


def cmd_solve(args) -> int:
    inst = load_instance(args.instance)
    trace: list | None = [] if args.trace and args.method == "ptas" else None
    t0 = time.perf_counter()
    rep = harness.solve(inst, args.method, args.gamma, args.epsilon, args.workers, trace)
    if args.timings:
        rep["seconds_approx"] = round(time.perf_counter() - t0, 4)
    if trace is not None:
        Path(args.trace).write_text("".join(json.dumps(t, sort_keys=True) + "\n" for t in trace))
    _write(_dump(rep), args.out)
    return EXIT_OK


def cmd_gap(args) -> int:
    inst = load_instance(args.instance)
    rep = harness.gap_report(inst, args.gammas, not args.no_costfree, args.timings)
    _write(harness.gap_csv(rep).rstrip("\n") if args.csv else _dump(rep), args.out)
    harness.check_contract(rep)
    return EXIT_OK


def cmd_verify(args) -> int:
    res = run_suite(args.suite, args.seed, args.count, Path(args.dump_dir))
    print(res.summary())
    for index, _, problems in res.failures:
        print(f"  instance {index}: {'; '.join(problems)}")
    if res.counterexample:
        print(f"  counterexample written to {res.counterexample}")
    return EXIT_OK if res.passed else EXIT_VIOLATION


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="knaplp", description="LP relaxations for k-dimensional knapsack.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gen", help="generate a random instance")
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--n", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sense", choices=[s.value for s in Sense], default="packing")
    p.add_argument("--weights", type=_pair, default=(1, 9), metavar="LO:HI")
    p.add_argument("--costs", type=_pair, default=(1, 9), metavar="LO:HI")
    p.add_argument("--bounds", type=_pair, default=(1, 1), metavar="LO:HI")
    p.add_argument("--tightness", default="1/2", help="rational in [0, 1]")
    p.add_argument("--min-rhs", type=int, default=1)
    p.add_argument("-o", "--out")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("solve", help="run one pipeline on an instance file")
    p.add_argument("instance")
    p.add_argument("--method", required=True, choices=harness.METHODS)
    p.add_argument("--gamma", type=int)
    p.add_argument("--epsilon", type=Fraction)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--trace", metavar="FILE", help="per-guess JSON lines (ptas)")
    p.add_argument("--timings", action="store_true", help="add approximate wall-clock seconds")
    p.add_argument("-o", "--out")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("gap", help="integrality gaps and LP sizes over a list of gammas")
    p.add_argument("instance")
    p.add_argument("--gammas", type=int, nargs="+", default=[1, 2])
    p.add_argument("--csv", action="store_true")
    p.add_argument("--no-costfree", action="store_true")
    p.add_argument("--timings", action="store_true")
    p.add_argument("-o", "--out")
    p.set_defaults(func=cmd_gap)

    p = sub.add_parser("verify", help="run a randomized property suite")
    p.add_argument("suite", choices=sorted(SUITES))
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--dump-dir", default=".")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return exc.code
    try:
        return args.func(args)
    except Infeasible as exc:
        code, msg = EXIT_INFEASIBLE, f"infeasible: {exc}"
    except UnboundedObjective as exc:
        code, msg = EXIT_UNBOUNDED, f"unbounded: {exc}"
    except BudgetExceeded as exc:
        code, msg = EXIT_BUDGET, f"budget exceeded: {exc}"
    except ContractViolation as exc:
        code, msg = EXIT_VIOLATION, f"invariant violation: {exc}"
    except (InstanceError, ValueError, OSError) as exc:
        code, msg = EXIT_USAGE, f"error: {exc}"
    print(msg, file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
