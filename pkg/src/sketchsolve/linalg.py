"""Dense matrix/vector containers, norms, and spectral diagnostics.

Everything is float64 and row-major: the solvers touch rows, never
columns, so row slices must be cheap views.  The container types are
immutable after construction and reject non-finite entries up front,
which keeps NaN handling out of every downstream routine.

Indices are 0-based throughout the package.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError, RankDeficientError

__all__ = [
    "DenseMatrix",
    "RealVector",
    "ConditionStats",
    "as_matrix",
    "as_vector",
    "matvec",
    "row_norm_sq",
    "frobenius_norm_sq",
    "smallest_singular_value",
    "condition_kappa_tilde",
    "dynamic_range",
]

# s_min <= RANK_GATE * ||A||_F counts as numerically rank-deficient.
RANK_GATE = 1e-12


def _own(arr: np.ndarray) -> np.ndarray:
    """Mark a freshly allocated array read-only so wrapping it never copies."""
    arr.setflags(write=False)
    return arr


def _validated(values, ndim, name):
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != ndim:
        raise InputError(f"{name} must be {ndim}-D, got shape {arr.shape}")
    if arr.size == 0:
        raise InputError(f"{name} must be non-empty")
    if not np.all(np.isfinite(arr)):
        raise InputError(f"{name} must be finite (found NaN or Inf)")
    arr = np.ascontiguousarray(arr)
    if arr is values and arr.flags.writeable:
        # Caller keeps a writeable handle; snapshot it instead of aliasing.
        arr = arr.copy()
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class DenseMatrix:
    """Immutable dense real matrix, row-major, all entries finite.

    Writeable input arrays are copied once at construction; read-only
    arrays (including row slices of another DenseMatrix) are wrapped
    without copying.
    """

    a: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "a", _validated(self.a, 2, "matrix"))

    @property
    def rows(self) -> int:
        return self.a.shape[0]

    @property
    def cols(self) -> int:
        return self.a.shape[1]

    @property
    def data(self) -> np.ndarray:
        """Entries as a flat row-major view of length rows*cols."""
        return self.a.reshape(-1)

    def row(self, i: int) -> np.ndarray:
        if not 0 <= i < self.rows:
            raise InputError(f"row index {i} out of range [0, {self.rows})")
        return self.a[i]

    def __repr__(self):
        return f"DenseMatrix(rows={self.rows}, cols={self.cols})"


@dataclass(frozen=True, eq=False)
class RealVector:
    """Immutable real vector with finite entries.  Same copy policy as DenseMatrix."""

    a: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "a", _validated(self.a, 1, "vector"))

    def __len__(self):
        return self.a.shape[0]

    @property
    def data(self) -> np.ndarray:
        return self.a

    def __repr__(self):
        return f"RealVector(len={len(self)})"


def as_matrix(m) -> DenseMatrix:
    return m if isinstance(m, DenseMatrix) else DenseMatrix(m)


def as_vector(v) -> RealVector:
    return v if isinstance(v, RealVector) else RealVector(v)


@dataclass(frozen=True)
class ConditionStats:
    """Scaled condition diagnostics of a matrix.

    kappa_tilde = ||A||_F^2 / s_min(A)^2; it is at least cols(A) and
    governs the per-iteration contraction of the row-projection solvers.
    """

    frobenius_sq: float
    s_min: float
    kappa_tilde: float


def matvec(A, x) -> RealVector:
    """Product A @ x."""
    A = as_matrix(A)
    x = as_vector(x)
    if len(x) != A.cols:
        raise InputError(f"matvec shape mismatch: matrix is {A.rows}x{A.cols}, vector has length {len(x)}")
    return RealVector(_own(A.a @ x.a))


def row_norm_sq(A, i: int) -> float:
    """Squared Euclidean norm of row i of A."""
    r = as_matrix(A).row(i)
    return float(r @ r)


def frobenius_norm_sq(A) -> float:
    """Sum of all squared entries of A."""
    a = as_matrix(A).a
    return float((a * a).sum())


def smallest_singular_value(A) -> float:
    """Smallest singular value of a tall matrix (rows >= cols).

    Computed from the eigenvalues of the n-by-n Gram matrix A^T A, which
    is cheap at the column counts this package targets.  Returns 0.0 for
    exactly rank-deficient input; accuracy degrades with the square of
    the condition number, so treat values near machine-epsilon scale as
    "numerically zero" rather than exact.
    """
    A = as_matrix(A)
    if A.rows < A.cols:
        raise InputError(f"need rows >= cols, got {A.rows}x{A.cols}")
    gram = A.a.T @ A.a
    lam = float(np.linalg.eigvalsh(gram)[0])
    return float(np.sqrt(lam)) if lam > 0.0 else 0.0


def condition_kappa_tilde(A) -> ConditionStats:
    """Compute ||A||_F^2, s_min, and their ratio kappa_tilde = ||A||_F^2 / s_min^2.

    Raises
    ------
    RankDeficientError
        If s_min <= RANK_GATE * ||A||_F, naming the offending value.
    """
    A = as_matrix(A)
    fro_sq = frobenius_norm_sq(A)
    s_min = smallest_singular_value(A)
    if s_min <= RANK_GATE * np.sqrt(fro_sq):
        raise RankDeficientError(
            f"matrix is numerically rank-deficient: s_min={s_min:.6e} "
            f"<= {RANK_GATE:g} * ||A||_F={np.sqrt(fro_sq):.6e}"
        )
    return ConditionStats(fro_sq, s_min, fro_sq / (s_min * s_min))


def dynamic_range(A, x, x_star) -> float:
    """Ratio ||A(x - x_star)||_2^2 / ||A(x - x_star)||_inf^2, in [1, rows].

    Measures how spread out the residual is: 1 when a single entry
    dominates, rows(A) when all entries share the same magnitude.  The
    residual must be nonzero.
    """
    A = as_matrix(A)
    x = as_vector(x)
    x_star = as_vector(x_star)
    if len(x) != A.cols or len(x_star) != A.cols:
        raise InputError("x and x_star must have length cols(A)")
    r = A.a @ x.a - A.a @ x_star.a
    peak = float(np.max(np.abs(r)))
    if peak == 0.0:
        raise InputError("residual A(x - x_star) is zero; dynamic range undefined")
    return float(r @ r) / (peak * peak)
