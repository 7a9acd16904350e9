"""Command-line harness: generate, solve, compare, sweep, diagnose.

Exit codes: 0 success, 2 usage, 3 malformed data file, 4 numerical
failure (rank deficiency, zero row), 5 I/O failure.

All experiment output is CSV.  Trace files share one schema:

    method,s,trial,iter,error_sq,residual_norm,elapsed_ns

with error_sq left empty when the system has no planted solution, and s
left empty for the unsketched methods.  Reruns with identical arguments
are byte-identical except the elapsed_ns / time_to_threshold_ns columns.

Trials run serially by default; set SKETCHSOLVE_WORKERS=<k> to fan
trials out over k processes (output order is unaffected).
"""

from __future__ import annotations

import argparse
import csv
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import FormatError, InputError, RankDeficientError, ZeroRowError
from .linalg import condition_kappa_tilde, dynamic_range
from .problems import ModelSpec, generate_system, load_csv_matrix, load_system, save_system
from .solvers import (
    CONVERGED,
    METHODS,
    LinearSystem,
    SolverConfig,
    contraction_summary,
    run,
)

__all__ = [
    "ExperimentPlan",
    "TRACE_HEADER",
    "SWEEP_HEADER",
    "run_compare",
    "run_sweep",
    "main",
]

TRACE_HEADER = ("method", "s", "trial", "iter", "error_sq", "residual_norm", "elapsed_ns")
SWEEP_HEADER = ("s", "trial", "iters_to_threshold", "time_to_threshold_ns")

_SKETCHED = ("skm", "gsm", "sgsm")

WORKERS_ENV = "SKETCHSOLVE_WORKERS"


@dataclass(frozen=True)
class ExperimentPlan:
    """A comparison or sweep campaign over one system.

    cells lists (method, s) pairs; s is None for kaczmarz and motzkin.
    mode picks the summary emphasis: per-iteration or per-time.
    threshold (sweeps) is relative: to the initial squared error when
    the system has a planted solution, else to 1 + ||b||.
    """

    source: str | ModelSpec | None
    cells: tuple[tuple[str, int | None], ...]
    trials: int = 1
    tol: float = 1e-8
    max_iters: int = 10_000
    seed: int = 0
    mode: str = "per-iteration"
    threshold: float | None = None
    record_dense_limit: int = 10_000
    record_stride: int = 10

    def __post_init__(self):
        if not self.cells:
            raise InputError("plan has no (method, s) cells")
        for method, s in self.cells:
            if method not in METHODS:
                raise InputError(f"unknown method {method!r}, expected one of {METHODS}")
            if method in _SKETCHED and (s is None or s < 1):
                raise InputError(f"method {method} needs a sketch size, write {method}:<s>")
        if self.trials < 1:
            raise InputError(f"trials must be at least 1, got {self.trials}")
        if self.mode not in ("per-iteration", "per-time"):
            raise InputError(f"unknown mode {self.mode!r}")
        if self.threshold is not None and not self.threshold > 0.0:
            raise InputError(f"threshold must be positive, got {self.threshold}")


def _worker_count() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        workers = int(raw)
    except ValueError:
        raise InputError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from None
    if workers < 1:
        raise InputError(f"{WORKERS_ENV} must be at least 1, got {workers}")
    return workers


def _run_task(task):
    system, config = task
    return run(system, config)[1]


def _run_all(system, configs):
    """One trace per config, in order; fans out when workers allow it."""
    workers = min(_worker_count(), len(configs))
    if workers == 1:
        return [run(system, config)[1] for config in configs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_task, [(system, config) for config in configs]))


def _trace_csv_rows(method, s, trial, trace):
    s_text = str(s) if method in _SKETCHED else ""
    for rec in trace.records:
        yield (
            method,
            s_text,
            str(trial),
            str(rec.iter),
            "" if rec.error_sq is None else repr(rec.error_sq),
            repr(rec.residual_norm),
            str(rec.elapsed_ns),
        )


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        writer.writerows(rows)


def _median_text(values, as_int=False):
    finite = [v for v in values if math.isfinite(v)]
    if len(finite) < len(values) / 2 or not finite:
        return "DNF"
    med = float(np.median(finite))
    return str(int(round(med))) if as_int else f"{med:.6e}"


def run_compare(system: LinearSystem, plan: ExperimentPlan):
    """Run every (method, s) cell for plan.trials trials.

    Returns (csv_rows, summary_lines); trial t of every cell uses seed
    plan.seed + t, so cells see identical selection randomness.
    """
    record_error = system.x_star is not None
    tasks = []
    for method, s in plan.cells:
        for trial in range(plan.trials):
            tasks.append(
                SolverConfig(
                    method=method,
                    s=s if s is not None else 1,
                    max_iters=plan.max_iters,
                    tol=plan.tol,
                    seed=plan.seed + trial,
                    record_error=record_error,
                    record_dense_limit=plan.record_dense_limit,
                    record_stride=plan.record_stride,
                )
            )
    traces = _run_all(system, tasks)

    rows = []
    summaries = []
    index = 0
    for method, s in plan.cells:
        cell = traces[index:index + plan.trials]
        index += plan.trials
        for trial, trace in enumerate(cell):
            rows.extend(_trace_csv_rows(method, s, trial, trace))
        iters = [t.final.iter if t.status == CONVERGED else math.inf for t in cell]
        times = [t.final.elapsed_ns / 1e9 if t.status == CONVERGED else math.inf for t in cell]
        finals = [t.final.residual_norm for t in cell]
        contractions = []
        for t in cell:
            try:
                contractions.append(contraction_summary(t))
            except InputError:
                pass
        converged = sum(t.status == CONVERGED for t in cell)
        parts = [
            f"method={method}",
            f"s={s if s is not None else '-'}",
            f"trials={plan.trials}",
            f"converged={converged}/{plan.trials}",
        ]
        if plan.mode == "per-time":
            parts.append(f"median_time_s={_median_text(times)}")
        else:
            parts.append(f"median_iters={_median_text(iters, as_int=True)}")
        parts.append(f"median_final_residual={float(np.median(finals)):.6e}")
        if contractions:
            parts.append(f"median_contraction={float(np.median(contractions)):.6f}")
        summaries.append("  ".join(parts))
    return rows, summaries


def run_sweep(system: LinearSystem, method: str, s_values, threshold: float,
              trials: int, max_iters: int, seed: int = 0,
              record_dense_limit: int = 2000, record_stride: int = 20):
    """Time/iterations-to-threshold over sketch sizes for one method.

    With a planted solution the threshold is on the squared error
    relative to its initial value; otherwise it is a relative residual
    tolerance.  Rows are (s, trial, iters_to_threshold,
    time_to_threshold_ns), with DNF when max_iters hit first.
    """
    if method not in _SKETCHED:
        raise InputError(f"sweep needs a sketched method ({', '.join(_SKETCHED)}), got {method!r}")
    s_values = list(s_values)
    if not s_values:
        raise InputError("sweep needs at least one sketch size")
    if not threshold > 0.0:
        raise InputError(f"threshold must be positive, got {threshold}")
    has_error = system.x_star is not None
    if has_error:
        xs = system.x_star.a
        error_stop = threshold * float(xs @ xs)

    tasks = []
    for s in s_values:
        for trial in range(trials):
            if has_error:
                config = SolverConfig(
                    method=method, s=s, max_iters=max_iters, tol=0.0,
                    seed=seed + trial, record_error=True, error_stop=error_stop,
                    record_dense_limit=record_dense_limit, record_stride=record_stride,
                )
            else:
                config = SolverConfig(
                    method=method, s=s, max_iters=max_iters, tol=threshold,
                    seed=seed + trial,
                    record_dense_limit=record_dense_limit, record_stride=record_stride,
                )
            tasks.append(config)
    traces = _run_all(system, tasks)

    rows = []
    index = 0
    for s in s_values:
        for trial in range(trials):
            trace = traces[index]
            index += 1
            if trace.status == CONVERGED:
                rows.append((str(s), str(trial), str(trace.final.iter), str(trace.final.elapsed_ns)))
            else:
                rows.append((str(s), str(trial), "DNF", "DNF"))
    return rows


# ---------------------------------------------------------------------------
# argument plumbing


def _load_plan_file(path):
    options = {}
    with open(path) as handle:
        for lineno, line in enumerate(handle, start=1):
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            key, eq, value = text.partition("=")
            if not eq:
                raise FormatError(f"{path}:{lineno}: expected 'key = value', got {text!r}")
            options[key.strip()] = value.strip()
    return options


def _resolve(cli_value, plan_options, key, default, parse=str):
    if cli_value is not None:
        return cli_value
    if key in plan_options:
        raw = plan_options[key]
        try:
            return parse(raw)
        except ValueError:
            raise InputError(f"plan key {key!r}: cannot parse {raw!r}") from None
    return default


def _parse_methods(text):
    cells = []
    for token in text.split(","):
        token = token.strip()
        if not token:
            continue
        name, colon, s_text = token.partition(":")
        name = name.strip()
        if name not in METHODS:
            raise InputError(f"unknown method {name!r}, expected one of {METHODS}")
        if colon:
            try:
                s = int(s_text)
            except ValueError:
                raise InputError(f"bad sketch size in {token!r}") from None
            if name not in _SKETCHED:
                raise InputError(f"method {name} takes no sketch size")
        else:
            s = None
        cells.append((name, s))
    if not cells:
        raise InputError("no methods given")
    return tuple(cells)


def _parse_s_list(text):
    try:
        values = [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise InputError(f"bad sketch-size list {text!r}") from None
    if not values:
        raise InputError("empty sketch-size list")
    return values


def _load_input_system(args) -> LinearSystem:
    if getattr(args, "csv", False):
        system = load_csv_matrix(
            args.system,
            delimiter=args.delimiter,
            skip_rows=args.skip_rows,
            target_column=args.target_column,
            plant_seed=args.plant_seed,
        )
        if args.target_column is not None:
            print("note: b taken from a data column; consistency is not guaranteed and error tracking is off")
        return system
    return load_system(args.system)


def _resolve_system(args, plan_options) -> LinearSystem:
    source = _resolve(args.system, plan_options, "system", None)
    model = _resolve(args.model, plan_options, "model", None)
    if source is not None and model is not None:
        raise InputError("give either --system or --model, not both")
    if source is not None:
        return load_system(source)
    if model is None:
        raise InputError("no input system: give --system FILE or --model with --rows/--cols")
    rows = _resolve(args.rows, plan_options, "rows", None, int)
    cols = _resolve(args.cols, plan_options, "cols", None, int)
    if rows is None or cols is None:
        raise InputError("--model needs --rows and --cols")
    model_seed = _resolve(args.model_seed, plan_options, "model-seed", 0, int)
    return generate_system(ModelSpec(model, rows, cols, model_seed))


def _add_csv_input_flags(parser):
    parser.add_argument("--csv", action="store_true", help="treat --system as delimited text, not a binary system file")
    parser.add_argument("--delimiter", default=",", help="CSV field delimiter (default ',')")
    parser.add_argument("--skip-rows", type=int, default=0, help="header rows to skip")
    parser.add_argument("--target-column", type=int, default=None, help="0-based column to use as b (default: plant a solution)")
    parser.add_argument("--plant-seed", type=int, default=0, help="seed for the planted solution of a CSV matrix")


def _print_condition(system):
    stats = condition_kappa_tilde(system.A)
    print(f"rows: {system.A.rows}")
    print(f"cols: {system.A.cols}")
    print(f"frobenius_sq: {stats.frobenius_sq!r}")
    print(f"s_min: {stats.s_min!r}")
    print(f"kappa_tilde: {stats.kappa_tilde!r}")
    return stats


# ---------------------------------------------------------------------------
# subcommands


def cmd_generate(args) -> int:
    spec = ModelSpec(args.model, args.rows, args.cols, args.seed)
    system = generate_system(spec)
    save_system(system, args.out)
    _print_condition(system)
    print(f"saved: {args.out}")
    return 0


def cmd_solve(args) -> int:
    system = _load_input_system(args)
    config = SolverConfig(
        method=args.method,
        s=args.s,
        max_iters=args.max_iters,
        tol=args.tol,
        seed=args.seed,
        fixed_block=args.fixed_block,
        record_error=system.x_star is not None,
        record_dense_limit=args.record_dense,
        record_stride=args.record_stride,
    )
    _, trace = run(system, config)
    if args.trace:
        _write_csv(args.trace, TRACE_HEADER, _trace_csv_rows(args.method, args.s, 0, trace))
    final = trace.final
    print(f"status: {trace.status}")
    print(f"iterations: {final.iter}")
    print(f"final_residual: {final.residual_norm:.6e}")
    print(f"elapsed_s: {final.elapsed_ns / 1e9:.6f}")
    try:
        print(f"contraction: {contraction_summary(trace):.6f}")
    except InputError:
        print("contraction: n/a")
    return 0


def cmd_compare(args) -> int:
    plan_options = _load_plan_file(args.plan) if args.plan else {}
    methods_text = _resolve(args.methods, plan_options, "methods", None)
    if methods_text is None:
        raise InputError("no methods given: use --methods or a plan file")
    out = _resolve(args.out, plan_options, "out", None)
    if out is None:
        raise InputError("no output path: use --out or a plan file")
    system = _resolve_system(args, plan_options)
    plan = ExperimentPlan(
        source=args.system or args.model,
        cells=_parse_methods(methods_text),
        trials=_resolve(args.trials, plan_options, "trials", 1, int),
        tol=_resolve(args.tol, plan_options, "tol", 1e-8, float),
        max_iters=_resolve(args.max_iters, plan_options, "max-iters", 10_000, int),
        seed=_resolve(args.seed, plan_options, "seed", 0, int),
        mode=_resolve(args.mode, plan_options, "mode", "per-iteration"),
        record_dense_limit=_resolve(args.record_dense, plan_options, "record-dense", 10_000, int),
        record_stride=_resolve(args.record_stride, plan_options, "record-stride", 10, int),
    )
    rows, summaries = run_compare(system, plan)
    _write_csv(out, TRACE_HEADER, rows)
    for line in summaries:
        print(line)
    print(f"saved: {out}")
    return 0


def cmd_sweep(args) -> int:
    plan_options = _load_plan_file(args.plan) if args.plan else {}
    method = _resolve(args.method, plan_options, "method", None)
    s_text = _resolve(args.s_list, plan_options, "s-list", None)
    threshold = _resolve(args.threshold, plan_options, "threshold", None, float)
    out = _resolve(args.out, plan_options, "out", None)
    if method is None or s_text is None or threshold is None or out is None:
        raise InputError("sweep needs --method, --s-list, --threshold, and --out (flags or plan file)")
    system = _resolve_system(args, plan_options)
    rows = run_sweep(
        system,
        method,
        _parse_s_list(s_text) if isinstance(s_text, str) else s_text,
        threshold,
        trials=_resolve(args.trials, plan_options, "trials", 1, int),
        max_iters=_resolve(args.max_iters, plan_options, "max-iters", 100_000, int),
        seed=_resolve(args.seed, plan_options, "seed", 0, int),
        record_dense_limit=_resolve(args.record_dense, plan_options, "record-dense", 2000, int),
        record_stride=_resolve(args.record_stride, plan_options, "record-stride", 20, int),
    )
    _write_csv(out, SWEEP_HEADER, rows)
    by_s = {}
    for s, _, iters, _ in rows:
        by_s.setdefault(s, []).append(math.inf if iters == "DNF" else int(iters))
    for s, iters in by_s.items():
        print(f"s={s} trials={len(iters)} median_iters_to_threshold={_median_text(iters, as_int=True)}")
    print(f"saved: {out}")
    return 0


def cmd_diagnose(args) -> int:
    system = _load_input_system(args)
    _print_condition(system)
    if system.x_star is not None and system.b_norm > 0.0:
        zero = np.zeros(system.A.cols)
        print(f"dynamic_range_origin: {dynamic_range(system.A, zero, system.x_star)!r}")
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sketchsolve",
        description="Row-projection solvers for consistent overdetermined linear systems",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="generate a synthetic system and save it")
    p.add_argument("--model", required=True, choices=("gaussian", "coherent"))
    p.add_argument("--rows", type=int, required=True)
    p.add_argument("--cols", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("solve", help="run one method on a stored system")
    p.add_argument("--system", required=True)
    _add_csv_input_flags(p)
    p.add_argument("--method", required=True, choices=METHODS)
    p.add_argument("--s", type=int, default=1, help="sketch size (sketched methods)")
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--max-iters", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--fixed-block", type=int, default=None, help="pin the sgsm block index")
    p.add_argument("--trace", default=None, help="write the per-iteration trace CSV here")
    p.add_argument("--record-dense", type=int, default=10_000)
    p.add_argument("--record-stride", type=int, default=10)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("compare", help="run several methods on one system, emit trace CSV")
    p.add_argument("--system", default=None)
    p.add_argument("--model", default=None, choices=("gaussian", "coherent"))
    p.add_argument("--rows", type=int, default=None)
    p.add_argument("--cols", type=int, default=None)
    p.add_argument("--model-seed", type=int, default=None)
    p.add_argument("--methods", default=None, help="comma list, sketched methods take :s (e.g. kaczmarz,gsm:25)")
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--max-iters", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--mode", default=None, choices=("per-iteration", "per-time"))
    p.add_argument("--record-dense", type=int, default=None)
    p.add_argument("--record-stride", type=int, default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--plan", default=None, help="key = value file supplying defaults for any flag")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("sweep", help="iterations/time to an error threshold across sketch sizes")
    p.add_argument("--system", default=None)
    p.add_argument("--model", default=None, choices=("gaussian", "coherent"))
    p.add_argument("--rows", type=int, default=None)
    p.add_argument("--cols", type=int, default=None)
    p.add_argument("--model-seed", type=int, default=None)
    p.add_argument("--method", default=None, choices=_SKETCHED)
    p.add_argument("--s-list", default=None, help="comma list of sketch sizes")
    p.add_argument("--threshold", type=float, default=None, help="relative error (or residual) threshold")
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--max-iters", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--record-dense", type=int, default=None)
    p.add_argument("--record-stride", type=int, default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--plan", default=None)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("diagnose", help="condition diagnostics of a stored system")
    p.add_argument("--system", required=True)
    _add_csv_input_flags(p)
    p.set_defaults(func=cmd_diagnose)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return int(args.func(args) or 0)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (RankDeficientError, ZeroRowError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 5
