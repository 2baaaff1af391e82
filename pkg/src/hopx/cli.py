"""``hopx`` command line: generate instances, solve them, run property checks.

Exit codes: 0 success, 1 usage or parse error, 2 iteration cap reached,
3 property violation.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .bisection import solve_bisection_p2
from .checks import PROPERTIES, run_property
from .core import HopProblem, SolverConfig
from .instance import KINDS, InstanceParseError, generate, read_instance, serialize_instance
from .solver import solve_hop

EXIT_OK, EXIT_USAGE, EXIT_MAXITER, EXIT_VIOLATION = 0, 1, 2, 3
TRACE_HEADER = "iter,lambda_norm,t_k,sigma_k,objective,kkt_residual,elapsed_ms"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _num(x):
    return f"{float(x):.17g}"


def trace_csv(report, timing=False):
    """Render a solve trace as CSV text.

    ``elapsed_ms`` is written as 0 unless `timing` is set, so repeated runs
    produce identical bytes.
    """
    rows = [TRACE_HEADER]
    for r in report.trace:
        elapsed = r.elapsed_ms if timing else 0.0
        rows.append(",".join([str(r.k), _num(r.lambda_norm), _num(r.t_k), _num(r.sigma_k),
                              _num(r.objective), _num(r.kkt_residual), _num(elapsed)]))
    return "\n".join(rows) + "\n"


def _parse_p_list(text):
    try:
        ps = [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise UsageError(f"--p expects a number or comma-separated list, got {text!r}") from None
    if not ps or any(not p >= 1 for p in ps):
        raise UsageError("--p values must be >= 1")
    return ps


def _lambda0(choice, n):
    if choice in ("auto", "zero"):
        return choice
    if choice.startswith("file:"):
        path = choice[len("file:"):]
        try:
            vals = np.array(Path(path).read_text().split(), dtype=np.float64)
        except (OSError, ValueError) as exc:
            raise UsageError(f"cannot read lambda0 from {path}: {exc}") from None
        if vals.size != n:
            raise UsageError(f"lambda0 file has {vals.size} values, instance has n={n}")
        return vals
    raise UsageError(f"--lambda0 must be auto, zero or file:<path>, got {choice!r}")


def _sweep_path(path, p, many):
    if not many:
        return Path(path)
    path = Path(path)
    return path.with_name(f"{path.stem}_p{p:g}{path.suffix}")


def cmd_gen(args):
    if args.n is None:
        raise UsageError("gen requires --n")
    try:
        inst = generate(args.kind, args.n, args.seed, p=args.p_value, sigma=args.sigma, m=args.m)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    text = serialize_instance(inst)
    if args.out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(args.out).write_text(text, encoding="ascii")
    return EXIT_OK


def cmd_solve(args):
    if args.instance is None:
        raise UsageError("solve requires --instance")
    try:
        inst = read_instance(args.instance)
    except InstanceParseError as exc:
        print(f"{args.instance}:{exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"cannot read {args.instance}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    ps = _parse_p_list(args.p) if args.p else [inst.p]
    if args.method == "bisect" and any(p != 2.0 for p in ps):
        raise UsageError("--method bisect requires p = 2")
    sigma = inst.sigma if args.sigma is None else args.sigma
    if not sigma > 0:
        raise UsageError("--sigma must be positive")
    inst.sigma = sigma
    lam0 = _lambda0(args.lambda0, inst.n)
    f = inst.function()

    def run(p):
        if args.method == "bisect":
            return solve_bisection_p2(f, inst.c, sigma, max_iters=args.max_iters or 200,
                                      tol_t=args.tol or 1e-13)
        config = SolverConfig(max_iters=args.max_iters or 500, tol=args.tol or 1e-10,
                              lambda0=lam0)
        return solve_hop(HopProblem(f, sigma, p, inst.c), config)

    threads = max(1, int(os.environ.get("HOPX_THREADS", "1") or 1))
    with ThreadPoolExecutor(max_workers=min(threads, len(ps))) as pool:
        reports = list(pool.map(run, ps))

    status = EXIT_OK
    many = len(ps) > 1
    for p, rep in zip(ps, reports):
        if args.trace:
            _sweep_path(args.trace, p, many).write_text(trace_csv(rep, args.timing))
        if args.dump_lambda:
            lines = (" ".join(_num(v) for v in r.lam) for r in rep.trace)
            _sweep_path(args.dump_lambda, p, many).write_text("\n".join(lines) + "\n")
        last = rep.trace[-1]
        print(f"p={p:g} method={args.method} iterations={rep.iterations} "
              f"converged={str(rep.converged).lower()} objective={_num(last.objective)} "
              f"kkt_residual={_num(last.kkt_residual)}")
        if not rep.converged:
            status = EXIT_MAXITER
    return status


def cmd_check(args):
    n = args.n or 20
    outcomes = run_property(args.property, args.seed, n)
    failed = [o for o in outcomes if not o.passed]
    for o in outcomes:
        status = "pass" if o.passed else "fail"
        print(f"check={o.property} case=\"{o.case}\" status={status} {o.detail}")
    print(f"check={args.property} summary passed={len(outcomes) - len(failed)} failed={len(failed)}")
    if failed:
        out = Path(args.counterexample or f"hopx-counterexample-{args.property}.json")
        payload = [{"case": o.case, "detail": o.detail, **o.counterexample} for o in failed]
        out.write_text(json.dumps(payload, indent=1))
        print(f"counterexample written to {out}", file=sys.stderr)
        return EXIT_VIOLATION
    return EXIT_OK


def build_parser():
    parser = _Parser(prog="hopx", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    gen = sub.add_parser("gen", help="generate a random instance file")
    gen.add_argument("kind", choices=KINDS)
    gen.add_argument("--n", type=int)
    gen.add_argument("--m", type=int, help="number of log-sum-exp terms (quadratic only)")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--p", dest="p_value", type=float, default=2.0)
    gen.add_argument("--sigma", type=float, default=1.0)
    gen.add_argument("--out", "-o", help="output path (default: stdout)")
    gen.set_defaults(func=cmd_gen)

    solve = sub.add_parser("solve", help="solve an instance and write its trace")
    solve.add_argument("--instance", required=True)
    solve.add_argument("--method", choices=("fixedpoint", "bisect"), default="fixedpoint")
    solve.add_argument("--p", help="override p; a comma-separated list runs a sweep")
    solve.add_argument("--sigma", type=float)
    solve.add_argument("--tol", type=float)
    solve.add_argument("--max-iters", type=int)
    solve.add_argument("--lambda0", default="auto", help="auto, zero or file:<path>")
    solve.add_argument("--trace", help="CSV trace path (suffixed _p<p> in sweeps)")
    solve.add_argument("--dump-lambda", help="write every dual iterate, one per line")
    solve.add_argument("--timing", action="store_true", help="record wall-clock times in the trace")
    solve.set_defaults(func=cmd_solve)

    check = sub.add_parser("check", help="run a property suite")
    check.add_argument("property", choices=sorted(PROPERTIES))
    check.add_argument("--seed", type=int, default=0)
    check.add_argument("--n", "--scale", dest="n", type=int, help="problem dimension (default 20)")
    check.add_argument("--counterexample", help="where to write failing cases (JSON)")
    check.set_defaults(func=cmd_check)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"hopx: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
