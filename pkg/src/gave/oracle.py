"""Exact small-instance solver by sign-pattern enumeration.

On the orthant where ``sign(x) = s`` we have ``|x| = diag(s) x``, so every
solution of ``A x - B|x| = c`` solves ``(A - B diag(s)) x = c`` for some
``s`` in ``{+1, -1}^n`` and is sign-consistent with it.  This module uses
plain ``numpy.linalg`` and none of the package's own solvers.
"""

import itertools

import numpy as np

from .errors import DimensionMismatch, TooLarge

N_MAX = 16
SIGN_TOL = 1e-12
DEDUP_TOL = 1e-9
_CHUNK = 4096


def _dense(m):
    return m.to_dense() if hasattr(m, "to_dense") else np.asarray(m, dtype=float)


def sign_patterns(n):
    """All ``2**n`` sign vectors in lexicographic order (``+1`` before ``-1``)."""
    return np.array(list(itertools.product((1.0, -1.0), repeat=n)), dtype=float).reshape(2 ** n, n)


def _solve_batch(mats, c):
    try:
        return np.linalg.solve(mats, np.broadcast_to(c, mats.shape[:2])[..., None])[..., 0]
    except np.linalg.LinAlgError:
        out = np.full(mats.shape[:2], np.nan)
        for i, m in enumerate(mats):
            try:
                out[i] = np.linalg.solve(m, c)
            except np.linalg.LinAlgError:
                pass
        return out


def enumerate_solutions(a, b_mat, c, n_max=N_MAX):
    """Every solution of ``A x - B|x| - c = 0``, in pattern order.

    Singular orthant systems are skipped.  Candidates must be
    sign-consistent (entries within ``1e-12`` of zero count for either
    sign) and satisfy the equation to a backward-error tolerance of
    ``1e-10``; solutions closer than ``1e-9`` are merged.
    """
    a = _dense(a)
    b = _dense(b_mat)
    c = np.asarray(c, dtype=float)
    n = a.shape[0]
    if a.shape != (n, n) or b.shape != (n, n) or c.shape != (n,):
        raise DimensionMismatch("A, B must be n x n and c of length n")
    if n > n_max:
        raise TooLarge(f"enumeration limited to n <= {n_max}, got n = {n}")
    scale_a = np.linalg.norm(a, 2)
    scale_b = np.linalg.norm(b, 2)
    cnorm = np.linalg.norm(c)
    patterns = sign_patterns(n)
    found = []
    for start in range(0, len(patterns), _CHUNK):
        s = patterns[start:start + _CHUNK]
        mats = a[None, :, :] - b[None, :, :] * s[:, None, :]
        xs = _solve_batch(mats, c)
        for x, sign in zip(xs, s):
            if not np.all(np.isfinite(x)) or np.any(sign * x < -SIGN_TOL):
                continue
            r = np.linalg.norm(a @ x - b @ np.abs(x) - c)
            if r > 1e-10 * ((scale_a + scale_b) * np.linalg.norm(x) + cnorm):
                continue
            if all(np.linalg.norm(x - y) > DEDUP_TOL for y in found):
                found.append(x)
    return found


def verify_solution(a, b_mat, c, x, tol=1e-8):
    """True iff ``||A x - B|x| - c|| <= tol * max(1, ||c||)``."""
    c = np.asarray(c, dtype=float)
    x = np.asarray(x, dtype=float)
    n = len(c)
    if x.shape != (n,) or tuple(a.shape) != (n, n) or tuple(b_mat.shape) != (n, n):
        raise DimensionMismatch("inconsistent dimensions")
    r = _apply(a, x) - _apply(b_mat, np.abs(x)) - c
    return bool(np.linalg.norm(r) <= tol * max(1.0, np.linalg.norm(c)))


def _apply(m, v):
    return m.matvec(v) if hasattr(m, "matvec") else np.asarray(m, dtype=float) @ v
