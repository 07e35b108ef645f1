"""Command-line front end: ``gave {solve,check,sweep,bench,generate}``.

Exit codes: 0 converged (or condition holds), 1 usage or I/O error,
2 iteration limit reached, 3 diverged or failed, 4 condition fails.
"""

import argparse
import json
import sys

from . import __version__
from .bench import TAU_GRID, BenchPlan, emit_table, find_methods, run_table, sweep_tau
from .convergence import (
    check_corollary_3_2,
    check_mn,
    check_mn_old,
    check_nms,
    check_nms_old,
    check_picard,
    check_picard_rho,
    check_rnms,
    check_rnms_old,
    check_theorem_3_1,
    compute_scalars,
)
from .errors import GaveError, NonFiniteIterate
from .mmio import read_matrix, read_vector
from .problems import GaveProblem, example_4_1, load_problem, random_problem, save_problem
from .solvers import (
    DEFAULT_MAX_ITER,
    DEFAULT_TOL,
    Termination,
    preset_fpi,
    preset_gnms,
    preset_mn,
    preset_ngs,
    preset_nms,
    preset_picard,
    preset_rmn,
    preset_rms,
    preset_rnms,
    preset_ssmn,
)
from .splittings import (
    gauss_seidel_splitting,
    jacobi_splitting,
    omega_diag,
    scalar_splitting,
    trivial_splitting,
    weighted_lower_splitting,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_MAX_ITER = 2
EXIT_DIVERGED = 3
EXIT_CHECK_FAILS = 4

METHODS = ("gnms", "mn", "picard", "fpi", "nms", "ngs", "rms", "ssmn", "rmn", "rnms")
SPLITTINGS = ("weighted", "gauss-seidel", "jacobi", "trivial")
CONDITIONS = (
    "theorem-3-1", "corollary-3-2", "mn", "mn-old", "picard-norm", "picard-rho",
    "nms", "nms-old", "rnms", "rnms-old",
)
_EXIT_FOR = {
    Termination.CONVERGED: EXIT_OK,
    Termination.MAX_ITER: EXIT_MAX_ITER,
    Termination.DIVERGED: EXIT_DIVERGED,
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """Usage errors exit with status 1 instead of argparse's 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# -- argument parsing ------------------------------------------------------------------------


def _key_values(text, allowed, positional=None):
    """Parse ``k=v,k=v`` (or a bare value for ``positional``) into a dict of strings."""
    out = {}
    for part in filter(None, (p.strip() for p in text.split(","))):
        if "=" in part:
            key, value = (s.strip() for s in part.split("=", 1))
        elif positional and positional not in out:
            key, value = positional, part
        else:
            raise UsageError(f"expected key=value, got {part!r}")
        if key not in allowed:
            raise UsageError(f"unknown key {key!r}; expected one of {', '.join(allowed)}")
        out[key] = value
    return out


def _int(value, name):
    try:
        return int(value)
    except ValueError:
        raise UsageError(f"{name} must be an integer, got {value!r}") from None


def parse_example(text):
    """``"m=20,block_rows=10"`` (or just ``"20"``) -> ``(m, block_rows)``."""
    kv = _key_values(text, ("m", "block_rows"), positional="m")
    if "m" not in kv:
        raise UsageError("--example needs m")
    block_rows = _int(kv["block_rows"], "block_rows") if "block_rows" in kv else None
    return _int(kv["m"], "m"), block_rows


def parse_grid(text):
    """``"start:step:stop"`` -> increasing tuple of grid points (inclusive)."""
    try:
        start, step, stop = (float(p) for p in text.split(":"))
    except ValueError:
        raise UsageError(f"--grid expects start:step:stop, got {text!r}") from None
    if step <= 0 or stop < start:
        raise UsageError("--grid needs a positive step and stop >= start")
    count = int(round((stop - start) / step)) + 1
    return tuple(round(start + k * step, 10) for k in range(count))


def _add_source(p):
    group = p.add_argument_group("problem source (exactly one)")
    group.add_argument("--example", metavar="SPEC",
                       help="block-banded benchmark instance, e.g. 'm=20' or 'm=20,block_rows=10'")
    group.add_argument("--problem", metavar="PATH", help="manifest file or a directory holding manifest.txt")
    group.add_argument("--a", metavar="PATH", help="Matrix Market file for A (with --b and --c)")
    group.add_argument("--b", metavar="PATH", help="Matrix Market file for B")
    group.add_argument("--c", metavar="PATH", help="Matrix Market file for c")


def _add_method_params(p):
    group = p.add_argument_group("method parameters")
    group.add_argument("--tau", type=float, default=1.0, help="relaxation parameter (default 1.0)")
    group.add_argument("--splitting", choices=SPLITTINGS, default=None,
                       help="splitting of A for gnms, nms, rms and rnms (default weighted)")
    group.add_argument("--coefficient", type=float, default=0.75,
                       help="weight on L in the weighted splitting M = D - coefficient*L (default 0.75)")
    group.add_argument("--q1", type=float, default=None, help="Q1 = q1*I (gnms; default 10)")
    group.add_argument("--q2", type=float, default=None, help="Q2 = q2*I (gnms; default 0.5)")
    group.add_argument("--omega-scale", type=float, default=0.5,
                       help="Omega = scale*diag(A) for mn, nms, ngs, ssmn, rmn, rnms (default 0.5)")
    group.add_argument("--theta", type=float, default=1.0, help="relaxation for rmn and rnms (default 1.0)")


def _add_run_limits(p):
    p.add_argument("--tol", type=float, default=DEFAULT_TOL, help=f"stop once RES <= tol (default {DEFAULT_TOL:g})")
    p.add_argument("--max-iter", type=int, default=DEFAULT_MAX_ITER,
                   help=f"iteration limit (default {DEFAULT_MAX_ITER})")


def build_parser():
    parser = _Parser(prog="gave", description="Splitting iterations for A x - B|x| - c = 0.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", required=True)

    p = sub.add_parser("solve", help="run one method on one problem",
                       description="Run one method; exit 0 converged, 2 iteration limit, 3 diverged.")
    _add_source(p)
    p.add_argument("--method", choices=METHODS, required=True, help="iteration to run")
    _add_method_params(p)
    _add_run_limits(p)
    p.add_argument("--history", action="store_true", help="print the residual of every iterate")
    p.add_argument("--format", choices=("text", "json"), default="text", help="report format (default text)")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("check", help="evaluate a sufficient convergence condition",
                       description="Evaluate a convergence condition; exit 0 if it holds, 4 if it fails.")
    _add_source(p)
    p.add_argument("--condition", choices=CONDITIONS, required=True, help="condition to evaluate")
    _add_method_params(p)
    p.add_argument("--format", choices=("text", "json"), default="text", help="report format (default text)")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("sweep", help="pick tau by scanning a grid",
                       description="Report the first grid tau reaching the minimal iteration count.")
    _add_source(p)
    p.add_argument("--method", choices=("gnms", "fpi", "rms"), required=True, help="method with a tau parameter")
    p.add_argument("--grid", default="0.01:0.01:2", help="tau grid as start:step:stop (default 0.01:0.01:2)")
    p.add_argument("--repetitions", type=int, default=10, help="timed reruns at the chosen tau (default 10)")
    _add_run_limits(p)
    p.add_argument("--format", choices=("text", "csv", "json"), default="text", help="output format (default text)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("bench", help="run the benchmark table",
                       description="Run every benchmark method on one instance and print the table.")
    p.add_argument("--example", metavar="SPEC", default="m=20", help="instance size (default m=20)")
    p.add_argument("--methods", metavar="LIST", default=None,
                   help="comma-separated method names to keep (default all)")
    p.add_argument("--repetitions", type=int, default=10, help="runs averaged per row (default 10)")
    p.add_argument("--no-sweep", action="store_true", help="use fixed tau values instead of scanning the grid")
    _add_run_limits(p)
    p.add_argument("--format", choices=("text", "csv", "json"), default="text", help="output format (default text)")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("generate", help="write a problem to Matrix Market files",
                       description="Write A, B, c, x_star and a manifest into a directory.")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--example", metavar="SPEC", help="block-banded instance, e.g. 'm=9'")
    group.add_argument("--random", metavar="SPEC",
                       help="random instance 'n=10[,target=0.5][,bandwidth=2]' with ||A^-1 B|| = target")
    p.add_argument("--seed", type=int, default=0, help="seed for --random (default 0)")
    p.add_argument("--out", required=True, metavar="DIR", help="output directory")
    p.set_defaults(func=cmd_generate)
    return parser


# -- helpers -------------------------------------------------------------------------------


def load_source(args):
    files = [args.a, args.b, args.c]
    given = [args.example is not None, args.problem is not None, any(f is not None for f in files)]
    if sum(given) != 1:
        raise UsageError("give exactly one problem source: --example, --problem or --a/--b/--c")
    if args.example is not None:
        return example_4_1(*parse_example(args.example))
    if args.problem is not None:
        return load_problem(args.problem)
    if any(f is None for f in files):
        raise UsageError("--a, --b and --c must be given together")
    return GaveProblem(read_matrix(args.a), read_matrix(args.b), read_vector(args.c), label=args.a)


def base_splitting(name, a, coefficient=0.75):
    if name in (None, "weighted"):
        return weighted_lower_splitting(a, coefficient)
    return {"gauss-seidel": gauss_seidel_splitting, "jacobi": jacobi_splitting, "trivial": trivial_splitting}[name](a)


def build_preset(args, problem):
    a, b = problem.a, problem.b
    method = args.method
    omega = omega_diag(a, args.omega_scale)
    if method == "gnms":
        q1 = 10.0 if args.q1 is None else args.q1
        q2 = 0.5 if args.q2 is None else args.q2
        split = base_splitting(args.splitting, a, args.coefficient)
        return preset_gnms(a, b, split, scalar_splitting(problem.n, q1, q2), args.tau)
    if method == "mn":
        return preset_mn(a, b, omega)
    if method == "picard":
        return preset_picard(a, b)
    if method == "fpi":
        return preset_fpi(a, b, args.tau)
    if method == "nms":
        return preset_nms(a, b, base_splitting(args.splitting, a, args.coefficient), omega)
    if method == "ngs":
        return preset_ngs(a, b, omega)
    if method == "rms":
        return preset_rms(a, b, base_splitting(args.splitting, a, args.coefficient), args.tau)
    if method == "ssmn":
        return preset_ssmn(a, b, omega)
    if method == "rmn":
        return preset_rmn(a, b, args.theta, omega)
    return preset_rnms(a, b, base_splitting(args.splitting, a, args.coefficient), args.theta, omega)


def _write(text):
    sys.stdout.write(text)
    sys.stdout.flush()


# -- subcommands -----------------------------------------------------------------------------


def cmd_solve(args):
    problem = load_source(args)
    preset = build_preset(args, problem)
    try:
        report = preset.run(problem.c, tol=args.tol, max_iter=args.max_iter)
    except NonFiniteIterate as exc:
        print(f"diverged: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    res_kind = "absolute" if report.absolute_residual else "relative"
    if args.format == "json":
        out = {
            "method": preset.name,
            "termination": report.termination.value,
            "iterations": report.iterations,
            "res": report.final_residual,
            "residual": res_kind,
            "wall_time_seconds": report.wall_time_seconds,
        }
        if args.history:
            out["history"] = report.residual_history
        _write(json.dumps(out, indent=2) + "\n")
    else:
        lines = [
            f"method: {preset.name}",
            f"termination: {report.termination.value}",
            f"IT: {report.iterations}",
            f"RES: {report.final_residual:.4e} ({res_kind})",
            f"time_s: {report.wall_time_seconds:.4f}",
        ]
        if args.history:
            lines.append("history:")
            lines.extend(f"{k} {r:.6e}" for k, r in enumerate(report.residual_history))
        _write("\n".join(lines) + "\n")
    return _EXIT_FOR[report.termination]


def certificate_for(args, problem):
    a, b = problem.a, problem.b
    cond = args.condition
    omega = omega_diag(a, args.omega_scale)
    if cond in ("theorem-3-1", "corollary-3-2"):
        missing = [f for f, v in (("--splitting", args.splitting), ("--q1", args.q1), ("--q2", args.q2)) if v is None]
        if missing:
            raise UsageError(f"--condition {cond} requires {', '.join(missing)}")
        scalars = compute_scalars(base_splitting(args.splitting, a, args.coefficient),
                                  scalar_splitting(problem.n, args.q1, args.q2), b, args.tau)
        return (check_theorem_3_1 if cond == "theorem-3-1" else check_corollary_3_2)(scalars)
    if cond == "mn":
        return check_mn(a, b, omega)
    if cond == "mn-old":
        return check_mn_old(a, b, omega)
    if cond == "picard-norm":
        return check_picard(a, b)
    if cond == "picard-rho":
        return check_picard_rho(a, b)
    split = base_splitting(args.splitting, a, args.coefficient)
    if cond == "nms":
        return check_nms(split, b, omega)
    if cond == "nms-old":
        return check_nms_old(split, b, omega)
    if cond == "rnms":
        return check_rnms(split, args.theta, omega, b)
    return check_rnms_old(split, args.theta, omega, b)


def cmd_check(args):
    problem = load_source(args)
    cert = certificate_for(args, problem)
    if args.format == "json":
        _write(cert.to_json(indent=2) + "\n")
    else:
        lines = [f"{cert.condition_name}: {'holds' if cert.holds else 'fails'} (margin {cert.margin:.6g})"]
        for q in cert.inequalities:
            lines.append(f"  {q.name}: {q.lhs:.6g} vs {q.rhs:.6g} [{'ok' if q.holds else 'violated'}]")
        lines.extend(f"  {k} = {v:.6g}" for k, v in cert.values.items())
        _write("\n".join(lines) + "\n")
    return EXIT_OK if cert.holds else EXIT_CHECK_FAILS


def cmd_sweep(args):
    problem = load_source(args)
    grid = parse_grid(args.grid)
    m, block_rows = parse_example(args.example) if args.example is not None else (problem.n, 1)
    plan = BenchPlan(m=m, block_rows=block_rows, repetitions=args.repetitions, tol=args.tol,
                     max_iter=args.max_iter, tau_grid=grid)
    spec = find_methods(args.method)[0]
    tau_opt, row = sweep_tau(plan, spec, problem)
    if args.format == "text":
        _write(f"tau_opt: {tau_opt:.2f}\nIT: {row.as_record()['it']}\nRES: {row.mean_res:.4e}\n")
    else:
        _write(emit_table([row], args.format).decode("utf-8"))
    return EXIT_OK


def _select_methods(text):
    if text is None:
        return None
    specs = []
    for name in filter(None, (p.strip() for p in text.split(","))):
        try:
            specs.extend(find_methods(name))
        except KeyError as exc:
            raise UsageError(exc.args[0]) from None
    return tuple(specs)


def cmd_bench(args):
    m, block_rows = parse_example(args.example)
    plan = BenchPlan(m=m, block_rows=block_rows, methods=_select_methods(args.methods),
                     repetitions=args.repetitions, tol=args.tol, max_iter=args.max_iter,
                     tau_grid=TAU_GRID, sweep=not args.no_sweep)
    rows = run_table(plan)
    _write(emit_table(rows, args.format).decode("utf-8"))
    if any(r.failed or r.termination == Termination.DIVERGED.value for r in rows):
        return EXIT_DIVERGED
    if any(r.termination == Termination.MAX_ITER.value for r in rows):
        return EXIT_MAX_ITER
    return EXIT_OK


def cmd_generate(args):
    if args.example is not None:
        problem = example_4_1(*parse_example(args.example))
    else:
        kv = _key_values(args.random, ("n", "target", "bandwidth"), positional="n")
        if "n" not in kv:
            raise UsageError("--random needs n")
        try:
            target = float(kv.get("target", 0.5))
        except ValueError:
            raise UsageError(f"target must be a number, got {kv['target']!r}") from None
        problem = random_problem(_int(kv["n"], "n"), seed=args.seed, condition_target=target,
                                 bandwidth=_int(kv.get("bandwidth", "2"), "bandwidth"))
    print(save_problem(problem, args.out))
    return EXIT_OK


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"gave {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (GaveError, OSError, ValueError, KeyError, ArithmeticError) as exc:
        print(f"gave {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
