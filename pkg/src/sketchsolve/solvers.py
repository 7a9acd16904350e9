"""Row-projection solvers for consistent overdetermined linear systems.

All five methods share one primitive: project the iterate onto the
hyperplane of a single row, x <- x + ((b_i - <a_i, x>) / ||a_i||^2) a_i.
They differ only in how the row is chosen:

  * kaczmarz: random row, probability proportional to ||a_i||^2;
  * motzkin:  the row with the largest squared residual (deterministic);
  * skm:      max-residual row within a random aligned block of A;
  * gsm:      max-residual row of a fresh dense Gaussian sketch S^T A;
  * sgsm:     max-residual row of a sparse Gaussian sketch (an s-by-s
              Gaussian mix of one random aligned block).

The sketched methods project onto the selected *sketched* row, which
keeps the one-step geometry exact: the error stays orthogonal to the
row used, so the squared error never increases on consistent systems.

run() drives any method to a residual tolerance with a timed, thinned
trace; reruns with the same seed are bit-identical except wall times.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import InputError, ZeroRowError
from .linalg import DenseMatrix, RealVector, _own, as_matrix, as_vector
from .rng import RngState, _pick_from_cumulative
from .sketch import SketchSpec, SketchedSystem, _build_raw, _wrap

__all__ = [
    "METHODS",
    "CONVERGED",
    "MAX_ITERS",
    "LinearSystem",
    "SolverConfig",
    "TraceRecord",
    "RunTrace",
    "StepProvenance",
    "project_row",
    "select_max_residual",
    "kaczmarz_step",
    "motzkin_step",
    "sketched_motzkin_step",
    "run",
    "contraction_summary",
]

METHODS = ("kaczmarz", "motzkin", "skm", "gsm", "sgsm")

# Sketch family behind each sketched method.
_METHOD_KIND = {"skm": "block", "gsm": "gaussian", "sgsm": "sparse"}

CONVERGED = "converged"
MAX_ITERS = "max_iters"

# A row is unusable for projection when ||row||^2 <= gate * max(1, ||x||^2).
ZERO_ROW_GATE = 1e-14

# Consistency slack for a planted solution: ||A x* - b|| <= slack * (1 + ||b||).
CONSISTENCY_TOL = 1e-10

# Squared error may rise by at most this fraction of the initial squared
# error between consecutive trace records (floating-point slack only).
MONOTONE_SLACK = 1e-9


@dataclass(frozen=True, eq=False)
class LinearSystem:
    """A consistent m-by-n system A x = b with m >= n.

    x_star, when present, is a planted solution and must satisfy
    ||A x_star - b||_2 <= 1e-10 * (1 + ||b||_2); solvers can then track
    the true error per iteration.
    """

    A: DenseMatrix
    b: RealVector
    x_star: RealVector | None = None

    def __post_init__(self):
        object.__setattr__(self, "A", as_matrix(self.A))
        object.__setattr__(self, "b", as_vector(self.b))
        if self.A.rows < self.A.cols:
            raise InputError(f"system must have rows >= cols, got {self.A.rows}x{self.A.cols}")
        if len(self.b) != self.A.rows:
            raise InputError(f"b has length {len(self.b)}, expected {self.A.rows}")
        if self.x_star is not None:
            object.__setattr__(self, "x_star", as_vector(self.x_star))
            if len(self.x_star) != self.A.cols:
                raise InputError(f"x_star has length {len(self.x_star)}, expected {self.A.cols}")
            gap = float(np.linalg.norm(self.A.a @ self.x_star.a - self.b.a))
            bound = CONSISTENCY_TOL * (1.0 + self.b_norm)
            if gap > bound:
                raise InputError(f"x_star is not a solution: ||A x* - b|| = {gap:.3e} > {bound:.3e}")

    @cached_property
    def row_norms_sq(self) -> np.ndarray:
        return _own(np.einsum("ij,ij->i", self.A.a, self.A.a))

    @cached_property
    def cum_row_weights(self) -> np.ndarray:
        return _own(np.cumsum(self.row_norms_sq))

    @cached_property
    def b_norm(self) -> float:
        return float(np.linalg.norm(self.b.a))

    def __repr__(self):
        planted = self.x_star is not None
        return f"LinearSystem(rows={self.A.rows}, cols={self.A.cols}, planted={planted})"


@dataclass(frozen=True)
class SolverConfig:
    """Method choice and run controls.

    s is the sketch size (ignored by kaczmarz and motzkin).  fixed_block
    pins the sparse sketch to one aligned block index (sgsm only).  The
    trace records every iteration up to record_dense_limit, then every
    record_stride-th; the stopping rules are checked at record points.
    error_stop, when set, additionally stops the run once the recorded
    squared error drops to that absolute value (requires record_error).
    """

    method: str
    s: int = 1
    max_iters: int = 1000
    tol: float = 1e-8
    seed: int = 0
    fixed_block: int | None = None
    record_error: bool = False
    record_dense_limit: int = 10_000
    record_stride: int = 10
    error_stop: float | None = None

    def __post_init__(self):
        if self.method not in METHODS:
            raise InputError(f"unknown method {self.method!r}, expected one of {METHODS}")
        if self.s < 1:
            raise InputError(f"sketch size must be at least 1, got {self.s}")
        if self.max_iters < 1:
            raise InputError(f"max_iters must be at least 1, got {self.max_iters}")
        if not np.isfinite(self.tol) or self.tol < 0.0:
            raise InputError(f"tol must be a nonnegative real, got {self.tol}")
        if self.fixed_block is not None:
            if self.method != "sgsm":
                raise InputError("fixed_block applies only to method 'sgsm'")
            if self.fixed_block < 0:
                raise InputError(f"fixed_block must be nonnegative, got {self.fixed_block}")
        if self.record_dense_limit < 0 or self.record_stride < 1:
            raise InputError("record_dense_limit must be >= 0 and record_stride >= 1")
        if self.error_stop is not None:
            if not self.record_error:
                raise InputError("error_stop requires record_error")
            if not np.isfinite(self.error_stop) or self.error_stop < 0.0:
                raise InputError(f"error_stop must be a nonnegative real, got {self.error_stop}")


@dataclass(frozen=True)
class TraceRecord:
    """State snapshot after `iter` completed steps (iter 0 is the start)."""

    iter: int
    error_sq: float | None
    residual_norm: float
    elapsed_ns: int


@dataclass(frozen=True, eq=False)
class RunTrace:
    """Recorded run history: strictly iter-ordered records plus a status.

    When error_sq is tracked it must be non-increasing record to record,
    up to a floating-point slack of MONOTONE_SLACK times the initial
    squared error; construction rejects anything else.
    """

    records: tuple[TraceRecord, ...]
    status: str

    def __post_init__(self):
        if self.status not in (CONVERGED, MAX_ITERS):
            raise InputError(f"unknown status {self.status!r}")
        if not self.records:
            raise InputError("a trace needs at least one record")
        prev = None
        slack = None
        for rec in self.records:
            if rec.iter < 0:
                raise InputError("record iterations must be nonnegative")
            if prev is not None and rec.iter <= prev.iter:
                raise InputError("records must be strictly ordered by iteration")
            if rec.error_sq is not None:
                if slack is None:
                    slack = MONOTONE_SLACK * rec.error_sq
                elif prev is not None and prev.error_sq is not None and rec.error_sq > prev.error_sq + slack:
                    raise InputError(
                        f"squared error increased at iteration {rec.iter}: "
                        f"{prev.error_sq!r} -> {rec.error_sq!r}"
                    )
            prev = rec

    @property
    def final(self) -> TraceRecord:
        return self.records[-1]


@dataclass(frozen=True, eq=False)
class StepProvenance:
    """The sketched system a step projected against and the chosen row."""

    sketched: SketchedSystem
    chosen: int


def _zero_gate(row_sq: float, x_sq: float) -> bool:
    return row_sq <= ZERO_ROW_GATE * max(1.0, x_sq)


def _project_raw(xa, row, beta, row_sq):
    return xa + ((beta - float(row @ xa)) / row_sq) * row


def _project(xa, row, beta):
    row_sq = float(row @ row)
    if _zero_gate(row_sq, float(xa @ xa)):
        raise ZeroRowError(f"cannot project onto a (near-)zero row (||row||^2 = {row_sq:.3e})")
    return _project_raw(xa, row, beta, row_sq)


def project_row(x, a, beta: float) -> RealVector:
    """Orthogonal projection of x onto the hyperplane {y : <a, y> = beta}.

    Raises ZeroRowError when ||a||^2 <= 1e-14 * max(1, ||x||^2).
    """
    x = as_vector(x)
    a = as_vector(a)
    if len(x) != len(a):
        raise InputError(f"x and a must have equal length, got {len(x)} and {len(a)}")
    if not np.isfinite(beta):
        raise InputError("beta must be finite")
    return RealVector(_own(_project(x.a, a.a, float(beta))))


def select_max_residual(M, r, x) -> int:
    """Index of the largest squared residual (M x - r)_i^2; ties take the
    lowest index."""
    M = as_matrix(M)
    r = as_vector(r)
    x = as_vector(x)
    if len(r) != M.rows or len(x) != M.cols:
        raise InputError("select_max_residual: shapes disagree")
    t = M.a @ x.a - r.a
    return int(np.argmax(t * t))


def _motzkin_core(Aa, ba, xa):
    t = Aa @ xa - ba
    i = int(np.argmax(t * t))
    if t[i] == 0.0:
        return xa, i
    return _project(xa, Aa[i], ba[i]), i


def _kaczmarz_core(Aa, ba, cum, gen, xa):
    i = _pick_from_cumulative(gen, cum)
    return _project(xa, Aa[i], ba[i]), i


def _sketched_core(Aa, ba, kind, s, gen, xa, fixed_block):
    """One sketched max-residual step on raw arrays.

    A selected row that fails the zero-norm gate (possible for block
    sketches of degenerate data) triggers exactly one resample; a second
    failure is an error.  A zero selected residual means the iterate
    already solves the sketched system: x is returned unchanged.
    """
    for _ in range(2):
        raw = _build_raw(Aa, ba, kind, s, gen, fixed_block)
        Ma, ra = raw[0], raw[1]
        t = Ma @ xa - ra
        i = int(np.argmax(t * t))
        if t[i] == 0.0:
            return xa, raw, i
        row = Ma[i]
        row_sq = float(row @ row)
        if not _zero_gate(row_sq, float(xa @ xa)):
            return _project_raw(xa, row, ra[i], row_sq), raw, i
    raise ZeroRowError(f"selected sketched row has (near-)zero norm (||row||^2 = {row_sq:.3e}) after one resample")


def kaczmarz_step(system: LinearSystem, x, rng: RngState):
    """One randomized-Kaczmarz step: sample row i with probability
    ||a_i||^2 / ||A||_F^2, project onto it.  Returns (x_next, i)."""
    x = as_vector(x)
    if len(x) != system.A.cols:
        raise InputError(f"x has length {len(x)}, expected {system.A.cols}")
    cum = system.cum_row_weights
    if cum[-1] <= 0.0:
        raise InputError("all rows of A are zero; cannot sample a row")
    xa, i = _kaczmarz_core(system.A.a, system.b.a, cum, rng.gen, x.a)
    return RealVector(_own(xa)), i


def motzkin_step(system: LinearSystem, x):
    """One max-residual step over all rows (deterministic).  Returns
    (x_next, i); x is returned unchanged when the residual is zero."""
    x = as_vector(x)
    if len(x) != system.A.cols:
        raise InputError(f"x has length {len(x)}, expected {system.A.cols}")
    xa, i = _motzkin_core(system.A.a, system.b.a, x.a)
    return RealVector(xa if not xa.flags.writeable else _own(xa)), i


def sketched_motzkin_step(system: LinearSystem, spec: SketchSpec, x, rng: RngState, fixed_block: int | None = None):
    """One max-residual step on a fresh sketch of the system.

    Returns (x_next, StepProvenance); the provenance carries the full
    sketched system, so the step can be replayed or audited exactly.
    """
    x = as_vector(x)
    if len(x) != system.A.cols:
        raise InputError(f"x has length {len(x)}, expected {system.A.cols}")
    m = system.A.rows
    if spec.kind in ("block", "sparse") and spec.s > m:
        raise InputError(f"sketch size {spec.s} exceeds row count {m}")
    if fixed_block is not None:
        if spec.kind != "sparse":
            raise InputError("fixed_block applies only to sparse sketches")
        if not 0 <= fixed_block < m // spec.s:
            raise InputError(f"fixed_block {fixed_block} out of range [0, {m // spec.s})")
    xa, raw, i = _sketched_core(system.A.a, system.b.a, spec.kind, spec.s, rng.gen, x.a, fixed_block)
    prov = StepProvenance(_wrap(spec.kind, raw), i)
    return RealVector(xa if not xa.flags.writeable else _own(xa)), prov


def _make_stepper(system: LinearSystem, config: SolverConfig, gen):
    Aa, ba = system.A.a, system.b.a
    if config.method == "kaczmarz":
        cum = system.cum_row_weights
        if cum[-1] <= 0.0:
            raise InputError("all rows of A are zero; cannot sample a row")

        def step(xa):
            return _kaczmarz_core(Aa, ba, cum, gen, xa)[0]

        return step
    if config.method == "motzkin":

        def step(xa):
            return _motzkin_core(Aa, ba, xa)[0]

        return step
    kind = _METHOD_KIND[config.method]
    s, fixed = config.s, config.fixed_block

    def step(xa):
        return _sketched_core(Aa, ba, kind, s, gen, xa, fixed)[0]

    return step


def _validate_run(system: LinearSystem, config: SolverConfig):
    m = system.A.rows
    if config.method in ("skm", "sgsm") and config.s > m:
        raise InputError(f"sketch size {config.s} exceeds row count {m}")
    if config.fixed_block is not None and config.fixed_block >= m // config.s:
        raise InputError(f"fixed_block {config.fixed_block} out of range [0, {m // config.s})")
    if config.record_error and system.x_star is None:
        raise InputError("record_error requires a system with a planted solution")


def run(system: LinearSystem, config: SolverConfig, x0=None):
    """Iterate the configured method until the relative residual rule
    ||A x - b||_2 <= tol * (1 + ||b||_2) fires, the optional error_stop
    fires, or max_iters steps complete.

    The iterate starts at 0 unless x0 is given.  Stopping is checked at
    record points; past record_dense_limit iterations only every
    record_stride-th iteration is recorded (the final one always is), so
    a run can overshoot the rule by at most record_stride - 1 steps.

    Returns (x_final, RunTrace).  Reruns with identical inputs produce
    identical traces except the elapsed_ns fields.
    """
    _validate_run(system, config)
    Aa, ba = system.A.a, system.b.a
    if x0 is None:
        xa = np.zeros(system.A.cols)
    else:
        x0 = as_vector(x0)
        if len(x0) != system.A.cols:
            raise InputError(f"x0 has length {len(x0)}, expected {system.A.cols}")
        xa = x0.a
    xs = system.x_star.a if config.record_error else None

    threshold = config.tol * (1.0 + system.b_norm)
    records = []
    start = time.perf_counter_ns()

    def snapshot(k, xa):
        residual = float(np.linalg.norm(Aa @ xa - ba))
        if xs is None:
            err = None
        else:
            diff = xa - xs
            err = float(diff @ diff)
        records.append(TraceRecord(k, err, residual, time.perf_counter_ns() - start))
        stop = residual <= threshold
        if config.error_stop is not None and err <= config.error_stop:
            stop = True
        return stop

    status = MAX_ITERS
    if snapshot(0, xa):
        status = CONVERGED
    else:
        gen = RngState(config.seed).gen
        step = _make_stepper(system, config, gen)
        dense, stride = config.record_dense_limit, config.record_stride
        for k in range(1, config.max_iters + 1):
            try:
                xa = step(xa)
            except ZeroRowError as exc:
                raise ZeroRowError(f"iteration {k}: {exc}") from exc
            if k <= dense or k % stride == 0 or k == config.max_iters:
                if snapshot(k, xa):
                    status = CONVERGED
                    break
    x = RealVector(xa if not xa.flags.writeable else _own(xa))
    return x, RunTrace(tuple(records), status)


def contraction_summary(trace: RunTrace) -> float:
    """Mean per-iteration contraction factor of the squared error.

    Geometric mean of the per-iteration error_sq ratios implied by the
    trace (gaps between thinned records are weighted by their length).
    Requires at least two records with error_sq and a positive initial
    value; returns 0.0 in the degenerate case of an exactly zero final
    error.
    """
    recs = [r for r in trace.records if r.error_sq is not None]
    if len(recs) < 2:
        raise InputError("need at least two records with squared error")
    first, last = recs[0], recs[-1]
    if first.error_sq <= 0.0:
        raise InputError("initial squared error must be positive")
    if last.error_sq == 0.0:
        return 0.0
    span = last.iter - first.iter
    return float(np.exp(np.log(last.error_sq / first.error_sq) / span))
