"""Real square matrices in dense or banded storage, plus the small set of
factorizations, solves and norm estimators the solvers need.

Banded matrices use the LAPACK general-band layout: ``ab[upper + i - j, j]``
holds ``a[i, j]``.  Every public operation accepts either storage kind.
"""

import warnings

import numpy as np
import scipy.linalg
from scipy.linalg import lapack
from scipy.sparse.linalg import ArpackNoConvergence, LinearOperator, eigsh

from .errors import (
    DimensionMismatch,
    NoConvergence,
    NonFiniteValue,
    SingularMatrix,
    ZeroDiagonal,
)

# A pivot below PIVOT_RTOL * max|a_ij| declares the matrix singular.
PIVOT_RTOL = 1e-14

NORM_TOL = 1e-10
NORM_MAX_ITER = 5000
_POWER_SEED = 20240527


def as_vector(x, n=None, name="vector"):
    """Return ``x`` as a finite 1-D float array, optionally of length ``n``."""
    v = np.asarray(x, dtype=float)
    if v.ndim != 1:
        raise DimensionMismatch(f"{name} must be one-dimensional, got shape {v.shape}")
    if n is not None and v.shape[0] != n:
        raise DimensionMismatch(f"{name} has length {v.shape[0]}, expected {n}")
    if not np.all(np.isfinite(v)):
        raise NonFiniteValue(f"{name} contains NaN or Inf")
    return v


class Matrix:
    """Immutable real matrix with dense or banded storage.

    Construct with :meth:`dense`, :meth:`from_diagonals`, :meth:`identity`
    or :meth:`diag` rather than calling ``Matrix(...)`` directly.
    """

    __slots__ = ("n_rows", "n_cols", "lower", "upper", "_dense", "_ab", "_diags")

    def __init__(self, n_rows, n_cols, dense=None, ab=None, lower=0, upper=0):
        self.n_rows = int(n_rows)
        self.n_cols = int(n_cols)
        self.lower = int(lower)
        self.upper = int(upper)
        self._dense = dense
        self._ab = ab
        self._diags = None
        for arr in (dense, ab):
            if arr is not None:
                if not np.all(np.isfinite(arr)):
                    raise NonFiniteValue("matrix contains NaN or Inf")
                arr.setflags(write=False)

    # -- construction ------------------------------------------------------

    @classmethod
    def dense(cls, values):
        a = np.array(values, dtype=float)
        if a.ndim == 1:
            a = a.reshape(1, -1)
        if a.ndim != 2 or a.size == 0:
            raise DimensionMismatch(f"expected a non-empty 2-D array, got shape {a.shape}")
        return cls(a.shape[0], a.shape[1], dense=a)

    @classmethod
    def banded(cls, ab, lower, upper):
        ab = np.array(ab, dtype=float)
        if ab.ndim != 2 or ab.shape[0] != lower + upper + 1:
            raise DimensionMismatch("band array must have lower + upper + 1 rows")
        n = ab.shape[1]
        ab = ab.copy()
        # zero the unused corners so they never leak into products
        for k in range(1, upper + 1):
            ab[upper - k, :k] = 0.0
        for k in range(1, lower + 1):
            ab[upper + k, n - k:] = 0.0
        return cls(n, n, ab=ab, lower=lower, upper=upper)

    @classmethod
    def from_diagonals(cls, n, diagonals):
        """Banded ``n x n`` matrix from ``{offset: values}``; offset ``k`` is
        the diagonal ``a[i, i + k]``.  Scalars broadcast along the diagonal."""
        lower = max([-k for k in diagonals if k < 0] + [0])
        upper = max([k for k in diagonals if k > 0] + [0])
        if lower >= n or upper >= n:
            raise DimensionMismatch("diagonal offset outside the matrix")
        ab = np.zeros((lower + upper + 1, n))
        for k, vals in diagonals.items():
            length = n - abs(k)
            vals = np.broadcast_to(np.asarray(vals, dtype=float), (length,))
            if k >= 0:
                ab[upper - k, k:] = vals
            else:
                ab[upper - k, :length] = vals
        return cls(n, n, ab=ab, lower=lower, upper=upper)

    @classmethod
    def identity(cls, n, scale=1.0):
        return cls.from_diagonals(n, {0: float(scale)})

    @classmethod
    def diag(cls, values):
        values = as_vector(values, name="diagonal")
        return cls.from_diagonals(len(values), {0: values})

    @classmethod
    def zeros(cls, n):
        return cls.from_diagonals(n, {0: 0.0})

    # -- inspection ---------------------------------------------------------

    @property
    def shape(self):
        return (self.n_rows, self.n_cols)

    @property
    def storage(self):
        return "banded" if self._ab is not None else "dense"

    @property
    def is_banded(self):
        return self._ab is not None

    @property
    def is_square(self):
        return self.n_rows == self.n_cols

    @property
    def band_array(self):
        """The LAPACK band array (read-only); only for banded storage."""
        if self._ab is None:
            raise ValueError("matrix is stored densely")
        return self._ab

    def __repr__(self):
        extra = f", lower={self.lower}, upper={self.upper}" if self.is_banded else ""
        return f"Matrix({self.n_rows}x{self.n_cols}, {self.storage}{extra})"

    def diagonal(self, k=0):
        if self._ab is None:
            return np.diagonal(self._dense, k).copy()
        n = self.n_rows
        if abs(k) >= n:
            return np.zeros(0)
        if k > self.upper or -k > self.lower:
            return np.zeros(n - abs(k))
        row = self._ab[self.upper - k]
        return (row[k:] if k >= 0 else row[: n + k]).copy()

    def _nonzero_diagonals(self):
        if self._diags is None:
            diags = []
            for k in range(-self.lower, self.upper + 1):
                d = self.diagonal(k)
                if np.any(d):
                    diags.append((k, d))
            self._diags = diags
        return self._diags

    def nonzero_offsets(self):
        """Offsets of the diagonals holding at least one nonzero (banded only)."""
        return [k for k, _ in self._nonzero_diagonals()]

    def max_abs(self):
        data = self._dense if self._ab is None else self._ab
        return float(np.max(np.abs(data))) if data.size else 0.0

    def bandwidth(self):
        """Actual ``(lower, upper)`` bandwidth of the nonzero pattern."""
        if self._ab is not None:
            offs = self.nonzero_offsets() or [0]
            return max(0, -min(offs)), max(0, max(offs))
        rows, cols = np.nonzero(self._dense)
        if rows.size == 0:
            return 0, 0
        return int(max(0, np.max(rows - cols))), int(max(0, np.max(cols - rows)))

    def is_lower_triangular(self):
        return self.bandwidth()[1] == 0

    def is_upper_triangular(self):
        return self.bandwidth()[0] == 0

    # -- conversion ---------------------------------------------------------

    def to_dense(self):
        if self._ab is None:
            return self._dense.copy()
        n = self.n_rows
        out = np.zeros((n, n))
        idx = np.arange(n)
        for k in range(-self.lower, self.upper + 1):
            d = self.diagonal(k)
            if k >= 0:
                out[idx[: n - k], idx[k:]] = d
            else:
                out[idx[-k:], idx[: n + k]] = d
        return out

    def to_banded(self, lower=None, upper=None):
        if not self.is_square:
            raise DimensionMismatch("banded storage requires a square matrix")
        l_act, u_act = self.bandwidth()
        lower = l_act if lower is None else lower
        upper = u_act if upper is None else upper
        if lower < l_act or upper < u_act:
            raise ValueError("requested band is narrower than the matrix's nonzero pattern")
        if self._ab is not None and (lower, upper) == (self.lower, self.upper):
            return self
        diagonals = {k: self.diagonal(k) for k in range(-lower, upper + 1)}
        return Matrix.from_diagonals(self.n_rows, diagonals)

    # -- products -----------------------------------------------------------

    def matvec(self, x):
        x = as_vector(x, self.n_cols, "x")
        if self._ab is None:
            return self._dense @ x
        n = self.n_rows
        y = np.zeros(n)
        for k, d in self._nonzero_diagonals():
            if k >= 0:
                y[: n - k] += d * x[k:]
            else:
                y[-k:] += d * x[: n + k]
        return y

    def rmatvec(self, x):
        """``self.T @ x`` without forming the transpose."""
        x = as_vector(x, self.n_rows, "x")
        if self._ab is None:
            return self._dense.T @ x
        n = self.n_rows
        y = np.zeros(n)
        for k, d in self._nonzero_diagonals():
            if k >= 0:
                y[k:] += d * x[: n - k]
            else:
                y[: n + k] += d * x[-k:]
        return y

    def __matmul__(self, other):
        if isinstance(other, Matrix):
            return Matrix.dense(self.to_dense() @ other.to_dense())
        return self.matvec(other)

    @property
    def T(self):
        if self._ab is None:
            return Matrix.dense(self._dense.T)
        return Matrix.from_diagonals(
            self.n_rows, {-k: self.diagonal(k) for k in range(-self.lower, self.upper + 1)}
        )

    # -- arithmetic ---------------------------------------------------------

    def _combine(self, other, op):
        if not isinstance(other, Matrix):
            return NotImplemented
        if self.shape != other.shape:
            raise DimensionMismatch(f"shapes {self.shape} and {other.shape} differ")
        if self.is_banded and other.is_banded:
            lower = max(self.lower, other.lower)
            upper = max(self.upper, other.upper)
            return Matrix.from_diagonals(
                self.n_rows,
                {k: op(self.diagonal(k), other.diagonal(k)) for k in range(-lower, upper + 1)},
            )
        return Matrix.dense(op(self.to_dense(), other.to_dense()))

    def __add__(self, other):
        return self._combine(other, np.add)

    def __sub__(self, other):
        return self._combine(other, np.subtract)

    def __mul__(self, s):
        if not np.isscalar(s):
            return NotImplemented
        if self._ab is None:
            return Matrix.dense(self._dense * s)
        return Matrix(self.n_rows, self.n_cols, ab=self._ab * s, lower=self.lower, upper=self.upper)

    __rmul__ = __mul__

    def __truediv__(self, s):
        return self * (1.0 / s)

    def __neg__(self):
        return self * -1.0

    def abs(self):
        """Entrywise absolute value ``|U|``."""
        if self._ab is None:
            return Matrix.dense(np.abs(self._dense))
        return Matrix(self.n_rows, self.n_cols, ab=np.abs(self._ab), lower=self.lower, upper=self.upper)

    def tril(self, k=0):
        """Lower triangle including diagonal ``k`` (``k=-1`` is strictly lower)."""
        if self._ab is None:
            return Matrix.dense(np.tril(self._dense, k))
        offs = range(-self.lower, min(k, self.upper) + 1)
        return Matrix.from_diagonals(self.n_rows, {j: self.diagonal(j) for j in offs} or {0: 0.0})

    def triu(self, k=0):
        if self._ab is None:
            return Matrix.dense(np.triu(self._dense, k))
        offs = range(max(k, -self.lower), self.upper + 1)
        return Matrix.from_diagonals(self.n_rows, {j: self.diagonal(j) for j in offs} or {0: 0.0})

    def diag_part(self):
        """The diagonal of ``self`` as a banded diagonal matrix."""
        return Matrix.diag(self.diagonal())


def _require_square(a, name="matrix"):
    if not a.is_square:
        raise DimensionMismatch(f"{name} must be square, got {a.shape}")


# -- factorizations -----------------------------------------------------------


class LuFactors:
    """Row-pivoted LU factors of a square matrix.

    Dense inputs go through LAPACK ``getrf``; banded inputs through ``gbtrf``
    so that the band structure is kept.
    """

    def __init__(self, n, kind, lu, piv, lower=0, upper=0):
        self.n = n
        self.kind = kind
        self._lu = lu
        self._piv = piv
        self._lower = lower
        self._upper = upper

    def u_diagonal(self):
        if self.kind == "dense":
            return np.diagonal(self._lu).copy()
        return self._lu[self._lower + self._upper].copy()

    def solve(self, b, trans=False):
        b = np.asarray(b, dtype=float)
        if b.shape[0] != self.n:
            raise DimensionMismatch(f"right-hand side has {b.shape[0]} rows, expected {self.n}")
        if self.kind == "dense":
            return scipy.linalg.lu_solve((self._lu, self._piv), b, trans=int(trans))
        rhs = b.reshape(self.n, -1)
        x, info = lapack.dgbtrs(self._lu, self._lower, self._upper, rhs, self._piv, trans=int(trans))
        if info != 0:
            raise SingularMatrix(f"gbtrs failed with info={info}")
        return x.reshape(b.shape)

    def reconstruct(self):
        """Dense ``(P, L, U)`` with ``P @ A = L @ U``; mainly for testing."""
        if self.kind != "dense":
            raise NotImplementedError("reconstruction is only provided for dense factors")
        n = self.n
        lower = np.tril(self._lu, -1) + np.eye(n)
        upper = np.triu(self._lu)
        perm = np.arange(n)
        for i, p in enumerate(self._piv):
            perm[i], perm[p] = perm[p], perm[i]
        return np.eye(n)[perm], lower, upper


class DiagonalFactors:
    def __init__(self, d):
        self.n = len(d)
        self._d = d

    def solve(self, b, trans=False):
        b = np.asarray(b, dtype=float)
        if b.shape[0] != self.n:
            raise DimensionMismatch(f"right-hand side has {b.shape[0]} rows, expected {self.n}")
        return b / self._d if b.ndim == 1 else b / self._d[:, None]


class TriangularFactors:
    def __init__(self, m, shape):
        self.n = m.n_rows
        self.matrix = m
        self.shape = shape

    def solve(self, b, trans=False):
        return triangular_solve(self.matrix, b, self.shape, trans=trans, check=False)


def _singular_threshold(a):
    scale = a.max_abs()
    if scale == 0.0:
        raise SingularMatrix("matrix is identically zero")
    return PIVOT_RTOL * scale


def lu_factor(a):
    """Factor a square matrix with partial pivoting.

    Raises
    ------
    SingularMatrix
        If a pivot magnitude falls below ``1e-14 * max|a_ij|``.
    """
    _require_square(a)
    threshold = _singular_threshold(a)
    n = a.n_rows
    if a.is_banded:
        l, u = a.lower, a.upper
        work = np.zeros((2 * l + u + 1, n))
        work[l:] = a.band_array
        lu, piv, info = lapack.dgbtrf(work, l, u)
        if info < 0:
            raise ValueError(f"gbtrf: illegal argument {-info}")
        f = LuFactors(n, "banded", lu, piv, l, u)
    else:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
            lu, piv = scipy.linalg.lu_factor(a.to_dense(), check_finite=False)
        f = LuFactors(n, "dense", lu, piv)
    pivots = np.abs(f.u_diagonal())
    if np.any(pivots < threshold):
        i = int(np.argmin(pivots))
        raise SingularMatrix(f"pivot {i} has magnitude {pivots[i]:.3e} below threshold {threshold:.3e}")
    return f


def lu_solve(f, b, trans=False):
    return f.solve(b, trans=trans)


def factorize(m, strategy="lu"):
    """Return a solver object for ``m`` using ``strategy``.

    ``strategy`` is one of ``"diagonal"``, ``"lower"``, ``"upper"`` or ``"lu"``.
    Diagonal and triangular strategies apply the same pivot threshold as
    :func:`lu_factor` to the diagonal.
    """
    _require_square(m)
    if strategy == "lu":
        return lu_factor(m)
    threshold = _singular_threshold(m)
    d = m.diagonal()
    if np.any(np.abs(d) < threshold):
        raise ZeroDiagonal("zero (or negligible) diagonal entry in triangular factor")
    if strategy == "diagonal":
        if m.bandwidth() != (0, 0):
            raise ValueError("matrix is not diagonal")
        return DiagonalFactors(d)
    if strategy in ("lower", "upper"):
        ok = m.is_lower_triangular() if strategy == "lower" else m.is_upper_triangular()
        if not ok:
            raise ValueError(f"matrix is not {strategy} triangular")
        return TriangularFactors(m, strategy)
    raise ValueError(f"unknown solve strategy {strategy!r}")


def triangular_solve(m, b, shape="lower", trans=False, check=True):
    """Solve ``m @ x = b`` (or ``m.T @ x = b``) for triangular ``m``."""
    _require_square(m)
    b = np.asarray(b, dtype=float)
    if b.shape[0] != m.n_rows:
        raise DimensionMismatch(f"right-hand side has {b.shape[0]} rows, expected {m.n_rows}")
    if shape not in ("lower", "upper"):
        raise ValueError("shape must be 'lower' or 'upper'")
    if check:
        if np.any(m.diagonal() == 0.0):
            raise ZeroDiagonal("triangular matrix has a zero diagonal entry")
        ok = m.is_lower_triangular() if shape == "lower" else m.is_upper_triangular()
        if not ok:
            raise ValueError(f"matrix is not {shape} triangular")
    if not m.is_banded:
        return scipy.linalg.solve_triangular(
            m.to_dense(), b, lower=(shape == "lower"), trans=int(trans), check_finite=False
        )
    ab = m.band_array
    tri = ab[m.upper:] if shape == "lower" else ab[: m.upper + 1]
    rhs = b.reshape(m.n_rows, -1)
    x, info = lapack.dtbtrs(
        tri, rhs, uplo="L" if shape == "lower" else "U", trans="T" if trans else "N"
    )
    if info > 0:
        raise ZeroDiagonal(f"zero diagonal at position {info - 1}")
    return x.reshape(b.shape)


# -- norm estimation ----------------------------------------------------------


def _start_vector(n):
    v = np.random.default_rng(_POWER_SEED).uniform(0.5, 1.5, n)
    return v / np.linalg.norm(v)


def _unconverged(message, estimate, strict):
    if strict:
        raise NoConvergence(message, estimate=estimate)
    warnings.warn(message, RuntimeWarning, stacklevel=3)
    return estimate


def _gram_norm(apply, apply_t, n, tol, max_iter, strict):
    # Lanczos on U^T U through ARPACK.  Plain power iteration stalls when the
    # top singular values are clustered, which happens on the benchmark family.
    if tol <= 0:
        raise ValueError("tol must be positive")
    if n == 0:
        return 0.0
    v0 = _start_vector(n)
    lower = float(np.linalg.norm(apply(v0)))
    if lower == 0.0:
        return 0.0
    if n < 3:
        cols = np.column_stack([apply(e) for e in np.eye(n)])
        return float(np.linalg.norm(cols, 2))
    op = LinearOperator((n, n), matvec=lambda v: apply_t(apply(np.ravel(v))), dtype=float)
    try:
        vals = eigsh(op, k=1, which="LA", v0=v0, tol=tol, maxiter=max_iter, return_eigenvectors=False)
    except ArpackNoConvergence as exc:
        # ||U v0|| is a lower bound when no Ritz value has converged
        est = float(np.sqrt(max(np.max(exc.eigenvalues), 0.0))) if len(exc.eigenvalues) else lower
        return _unconverged(f"2-norm estimate did not converge in {max_iter} restarts", est, strict)
    return float(np.sqrt(max(vals[0], 0.0)))


def two_norm(m, tol=NORM_TOL, max_iter=NORM_MAX_ITER, strict=True):
    """Largest singular value of ``m`` by Lanczos iteration on ``m.T @ m``."""
    if not isinstance(m, Matrix):
        m = Matrix.dense(m)
    return _gram_norm(m.matvec, m.rmatvec, m.n_cols, tol, max_iter, strict)


def two_norm_of_product(solve_with, right=None, tol=NORM_TOL, max_iter=NORM_MAX_ITER, strict=True):
    """2-norm of ``F^{-1} R`` where ``F`` is factored in ``solve_with``.

    ``right`` is a :class:`Matrix`, a sequence of matrices whose product is
    taken left to right, or ``None`` for the identity.  The product is never
    formed; each step costs one solve and one transposed solve.
    """
    if right is None:
        rights = []
    elif isinstance(right, Matrix):
        rights = [right]
    else:
        rights = list(right)
    n = solve_with.n
    for r in rights:
        if r.shape != (n, n):
            raise DimensionMismatch(f"factor of shape {r.shape} does not match n={n}")

    def apply(v):
        for r in reversed(rights):
            v = r.matvec(v)
        return solve_with.solve(v)

    def apply_t(w):
        w = solve_with.solve(w, trans=True)
        for r in rights:
            w = r.rmatvec(w)
        return w

    return _gram_norm(apply, apply_t, n, tol, max_iter, strict)


def spectral_radius_nonneg(m, tol=NORM_TOL, max_iter=NORM_MAX_ITER, strict=True):
    """Perron root of an entrywise nonnegative matrix.

    Power iteration on ``m + s I`` with ``s = max(m)`` and a positive start
    vector; the shift removes the oscillation of periodic matrices and is
    subtracted from the result.
    """
    if not isinstance(m, Matrix):
        m = Matrix.dense(m)
    _require_square(m)
    data = m.band_array if m.is_banded else m.to_dense()
    if np.any(data < 0):
        raise ValueError("spectral_radius_nonneg requires an entrywise nonnegative matrix")
    shift = float(np.max(data)) if data.size else 0.0
    if shift == 0.0:
        return 0.0
    if tol <= 0:
        raise ValueError("tol must be positive")
    x = _start_vector(m.n_rows)
    lam_old = 0.0
    lam = 0.0
    for _ in range(max_iter):
        z = m.matvec(x) + shift * x
        lam = float(np.linalg.norm(z))
        if abs(lam - lam_old) <= tol * lam:
            return max(lam - shift, 0.0)
        lam_old = lam
        x = z / lam
    return _unconverged(
        f"spectral radius estimate did not stabilize in {max_iter} iterations",
        max(lam - shift, 0.0),
        strict,
    )


# -- vector helpers -------------------------------------------------------------


def abs_vector(x):
    return np.abs(as_vector(x, name="x"))


def mat_vec(m, x):
    return m.matvec(x)


def add(x, y):
    x = as_vector(x, name="x")
    return x + as_vector(y, len(x), "y")


def sub(x, y):
    x = as_vector(x, name="x")
    return x - as_vector(y, len(x), "y")


def scale(s, x):
    return float(s) * as_vector(x, name="x")


def vec_norm2(x):
    return float(np.linalg.norm(as_vector(x, name="x")))
