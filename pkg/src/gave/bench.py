"""Benchmark protocol for the block-banded instance family.

Each row of the table is one method with one parameter set.  Methods with a
relaxation parameter can have ``tau`` chosen by scanning a grid; the chosen
value is the first grid point reaching the smallest iteration count.  Every
row is then rerun ``repetitions`` times and the averages are reported.
"""

import csv
import io
import json
import os
import statistics
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .errors import AllDiverged, GaveError
from .problems import example_4_1
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
    preset_rms,
    preset_ssmn,
)
from .splittings import omega_diag, scalar_splitting, weighted_lower_splitting

TAU_GRID = tuple(round(0.01 * k, 2) for k in range(1, 201))
CSV_COLUMNS = ("method", "params", "m", "tau_opt", "it", "cpu_s", "res")
THREADS_ENV = "GAVE_THREADS"


# -- method table ---------------------------------------------------------------------


def _gnms(problem):
    split = weighted_lower_splitting(problem.a)
    q = scalar_splitting(problem.n, 10.0, 0.5)
    return lambda tau: preset_gnms(problem.a, problem.b, split, q, tau)


def _omega_method(preset, scale, with_split=False):
    def bind(problem):
        omega = omega_diag(problem.a, scale)
        if with_split:
            split = weighted_lower_splitting(problem.a)
            return lambda tau: preset(problem.a, problem.b, split, omega)
        return lambda tau: preset(problem.a, problem.b, omega)
    return bind


def _picard(problem):
    return lambda tau: preset_picard(problem.a, problem.b)


def _fpi(problem):
    return lambda tau: preset_fpi(problem.a, problem.b, tau)


def _rms(problem):
    split = weighted_lower_splitting(problem.a)
    return lambda tau: preset_rms(problem.a, problem.b, split, tau)


@dataclass(frozen=True)
class MethodSpec:
    """A table row template.

    ``bind(problem)`` does the per-problem setup and returns a function
    mapping ``tau`` to a ready :class:`~gave.solvers.MethodPreset`.  Methods
    without a relaxation parameter ignore ``tau``.
    """

    name: str
    params: str
    bind: object = field(repr=False, compare=False)
    sweeps_tau: bool = False
    default_tau: float = None

    @property
    def key(self):
        return self.name.lower()


def standard_methods():
    """The twelve rows of the benchmark table, in reporting order."""
    two, half = "Omega=2*diag(A)", "Omega=1/2*diag(A)"
    return [
        MethodSpec("GNMS", "Q1=10I;Q2=0.5I;M=D-3/4L;N=1/4L+U", _gnms, True, 1.0),
        MethodSpec("MN", two, _omega_method(preset_mn, 2.0)),
        MethodSpec("MN", half, _omega_method(preset_mn, 0.5)),
        MethodSpec("Picard", "", _picard),
        MethodSpec("FPI", "", _fpi, True, 0.8),
        MethodSpec("NMS", two + ";Mb=D-3/4L", _omega_method(preset_nms, 2.0, with_split=True)),
        MethodSpec("NMS", half + ";Mb=D-3/4L", _omega_method(preset_nms, 0.5, with_split=True)),
        MethodSpec("NGS", two, _omega_method(preset_ngs, 2.0)),
        MethodSpec("NGS", half, _omega_method(preset_ngs, 0.5)),
        MethodSpec("RMS", "S=D-3/4L;T=1/4L+U", _rms, True, 0.99),
        MethodSpec("SSMN", "Omega~=2*diag(A)", _omega_method(preset_ssmn, 2.0)),
        MethodSpec("SSMN", "Omega~=1/2*diag(A)", _omega_method(preset_ssmn, 0.5)),
    ]


def find_methods(name, methods=None):
    """All specs whose name matches ``name`` case-insensitively."""
    methods = standard_methods() if methods is None else methods
    found = [s for s in methods if s.key == name.lower()]
    if not found:
        known = sorted({s.key for s in methods})
        raise KeyError(f"unknown method {name!r}; expected one of {', '.join(known)}")
    return found


# -- plan and rows ----------------------------------------------------------------------


@dataclass(frozen=True)
class BenchPlan:
    m: int = 20
    block_rows: int = None
    methods: tuple = None
    repetitions: int = 10
    tol: float = DEFAULT_TOL
    max_iter: int = DEFAULT_MAX_ITER
    tau_grid: tuple = TAU_GRID
    sweep: bool = True

    def __post_init__(self):
        if self.repetitions < 1:
            raise ValueError("repetitions must be at least 1")
        if not self.tau_grid:
            raise ValueError("tau grid is empty")
        if any(not 0 < t <= 2 for t in self.tau_grid):
            raise ValueError("tau grid must lie in (0, 2]")
        if list(self.tau_grid) != sorted(self.tau_grid):
            raise ValueError("tau grid must be increasing")

    @property
    def method_list(self):
        return list(self.methods) if self.methods is not None else standard_methods()

    def problem(self):
        return example_4_1(self.m, self.block_rows)


@dataclass(frozen=True)
class BenchRow:
    method: str
    params: str
    m: int
    block_rows: int
    tau_opt: float = None
    mean_iterations: float = None
    mean_cpu_seconds: float = None
    mean_res: float = None
    termination: str = None
    error: str = None

    @property
    def failed(self):
        return self.error is not None

    def as_record(self):
        it = self.mean_iterations
        if it is not None and float(it).is_integer():
            it = int(it)
        return {
            "method": self.method,
            "params": self.params,
            "m": self.m,
            "tau_opt": self.tau_opt,
            "it": it,
            "cpu_s": self.mean_cpu_seconds,
            "res": self.mean_res,
        }


def measure(plan, spec, problem, tau):
    """Run ``spec`` at ``tau`` ``plan.repetitions`` times and average.

    The timing covers building the method (splitting and factorization)
    plus the iteration.
    """
    its, cpus, ress = [], [], []
    termination = None
    for _ in range(plan.repetitions):
        start = time.perf_counter()
        report = spec.bind(problem)(tau).run(problem.c, tol=plan.tol, max_iter=plan.max_iter)
        cpus.append(time.perf_counter() - start)
        its.append(report.iterations)
        ress.append(report.final_residual)
        termination = report.termination
    return BenchRow(
        spec.name, spec.params, plan.m, problem.n // plan.m,
        tau_opt=tau if spec.sweeps_tau else None,
        mean_iterations=statistics.fmean(its),
        mean_cpu_seconds=statistics.fmean(cpus),
        mean_res=statistics.fmean(ress),
        termination=Termination(termination).value,
    )


def sweep_tau(plan, spec, problem=None):
    """First ``tau`` on the grid attaining the minimal iteration count.

    The grid is scanned in increasing order.  Once a count ``k`` is reached,
    later points only need ``k - 1`` iterations to matter, so they run with
    that cap; ties never replace the incumbent.

    Returns
    -------
    (tau_opt, BenchRow)

    Raises
    ------
    AllDiverged
        If no grid point converges.
    """
    problem = plan.problem() if problem is None else problem
    make = spec.bind(problem)
    best_tau, best_it = None, None
    cap = plan.max_iter
    for tau in plan.tau_grid:
        try:
            report = make(tau).run(problem.c, tol=plan.tol, max_iter=cap)
        except (ArithmeticError, ValueError):
            continue
        if report.converged and (best_it is None or report.iterations < best_it):
            best_tau, best_it = tau, report.iterations
            cap = best_it - 1
            if cap < 1:
                break
    if best_tau is None:
        raise AllDiverged(f"{spec.name} did not converge for any tau on the grid")
    return best_tau, measure(plan, spec, problem, best_tau)


def _row(plan, spec, problem):
    try:
        if spec.sweeps_tau and plan.sweep:
            return sweep_tau(plan, spec, problem)[1]
        return measure(plan, spec, problem, spec.default_tau)
    except (GaveError, ArithmeticError, ValueError) as exc:
        return BenchRow(spec.name, spec.params, plan.m, problem.n // plan.m,
                        error=f"{type(exc).__name__}: {exc}")


def worker_count(n_jobs):
    """Thread count: ``GAVE_THREADS`` if set, else the CPU count, capped by the job count."""
    raw = os.environ.get(THREADS_ENV)
    if raw:
        try:
            limit = int(raw)
        except ValueError:
            raise ValueError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
        if limit < 1:
            raise ValueError(f"{THREADS_ENV} must be positive, got {limit}")
    else:
        limit = os.cpu_count() or 1
    return max(1, min(limit, n_jobs))


def run_table(plan):
    """One row per method spec; failed rows carry ``error`` instead of numbers.

    Rows run on a thread pool but come back in plan order.
    """
    problem = plan.problem()
    methods = plan.method_list
    with ThreadPoolExecutor(max_workers=worker_count(len(methods))) as pool:
        return list(pool.map(lambda s: _row(plan, s, problem), methods))


# -- output -----------------------------------------------------------------------


def _cell(v):
    return "" if v is None else repr(v) if isinstance(v, float) else str(v)


def emit_table(rows, fmt="text"):
    """Serialize rows as ``csv``, ``json`` or an aligned ``text`` table (UTF-8 bytes)."""
    records = [r.as_record() for r in rows]
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for rec in records:
            writer.writerow([_cell(rec[k]) for k in CSV_COLUMNS])
        return buf.getvalue().encode("utf-8")
    if fmt == "json":
        return (json.dumps(records, indent=2) + "\n").encode("utf-8")
    if fmt == "text":
        return _text_table(rows).encode("utf-8")
    raise ValueError(f"unknown format {fmt!r}; expected csv, json or text")


def _text_table(rows):
    header = ("Method", "Params", "m", "tau_opt", "IT", "CPU", "RES")
    body = []
    for r in rows:
        if r.failed:
            body.append((r.method, r.params, str(r.m), "", "failed", "", r.error))
            continue
        rec = r.as_record()
        it = str(rec["it"]) if isinstance(rec["it"], int) else f"{rec['it']:.1f}"
        if r.termination != Termination.CONVERGED.value:
            it += f" ({r.termination})"
        body.append((
            r.method, r.params, str(r.m),
            "" if r.tau_opt is None else f"{r.tau_opt:.2f}",
            it, f"{r.mean_cpu_seconds:.4f}", f"{r.mean_res:.4e}",
        ))
    widths = [max(len(line[i]) for line in [header, *body]) for i in range(len(header))]
    lines = ["  ".join(c.ljust(w) for c, w in zip(line, widths)).rstrip() for line in [header, *body]]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"
