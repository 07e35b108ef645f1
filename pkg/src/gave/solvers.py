"""Splitting iterations for ``A x - B|x| - c = 0``.

The GNMS engine updates ``y`` (with ``|x| = Q y``) first and then ``x``.
Every other method in the package is either a parameter choice of that
engine (MN, Picard, NMS, NGS, SSMN, RMN, RNMS) or the lagged-``y`` scheme
shared by FPI and RMS.
"""

import time
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import DimensionMismatch, NonFiniteIterate, ZeroRightHandSide
from .linalg import Matrix, as_vector, factorize
from .splittings import (
    Splitting,
    gauss_seidel_splitting,
    relaxed_splitting,
    scalar_splitting,
    shifted_splitting,
    solve_strategy_for,
    trivial_splitting,
)

DEFAULT_TOL = 1e-8
DEFAULT_MAX_ITER = 10000
DIVERGENCE_RES = 1e12


class Termination(str, Enum):
    CONVERGED = "converged"
    MAX_ITER = "max_iter"
    DIVERGED = "diverged"


@dataclass(frozen=True)
class GnmsConfig:
    """Parameters of the GNMS iteration.

    ``rhs_scale`` multiplies the ``B``-terms and ``c`` in the ``x``-update;
    it is 1 for every method except the literal shift-splitting scheme.
    """

    a_split: Splitting
    q_split: Splitting
    tau: float = 1.0
    max_iter: int = DEFAULT_MAX_ITER
    tol: float = DEFAULT_TOL
    rhs_scale: float = 1.0

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError(f"tau must be positive, got {self.tau}")
        if self.max_iter < 1:
            raise ValueError("max_iter must be positive")
        if self.a_split.n != self.q_split.n:
            raise DimensionMismatch("splittings of A and Q have different sizes")
        q = self.q_split.split_matrix()
        factorize(q, solve_strategy_for(q))


@dataclass
class SolveReport:
    iterations: int
    residual_history: list
    x_final: np.ndarray
    y_final: np.ndarray = None
    termination: Termination = Termination.MAX_ITER
    wall_time_seconds: float = 0.0
    absolute_residual: bool = False
    iterates: list = field(default=None, repr=False)

    @property
    def converged(self):
        return self.termination is Termination.CONVERGED

    @property
    def final_residual(self):
        return self.residual_history[-1]


def default_x0(n):
    """``(-1, 0, -1, 0, ...)``."""
    x = np.zeros(n)
    x[0::2] = -1.0
    return x


def absolute_residual(a, b_mat, c, x):
    return float(np.linalg.norm(a.matvec(x) - b_mat.matvec(np.abs(x)) - c))


def residual(a, b_mat, c, x):
    """Relative residual ``||A x - B|x| - c|| / ||c||``.

    Raises
    ------
    ZeroRightHandSide
        If ``||c|| = 0``; the exception carries the absolute residual.
    """
    c = as_vector(c, a.n_rows, "c")
    x = as_vector(x, a.n_cols, "x")
    cnorm = float(np.linalg.norm(c))
    r = absolute_residual(a, b_mat, c, x)
    if cnorm == 0.0:
        raise ZeroRightHandSide(r)
    return r / cnorm


def _iterate(step, a, b_mat, c, x, y, tol, max_iter, keep_iterates):
    """Drive ``(x, y) <- step(x, y)`` until RES <= tol, divergence or max_iter."""
    start = time.perf_counter()
    absolute = float(np.linalg.norm(c)) == 0.0

    def res(v):
        return absolute_residual(a, b_mat, c, v) if absolute else residual(a, b_mat, c, v)

    history = [res(x)]
    iterates = [x.copy()] if keep_iterates else None
    termination = Termination.MAX_ITER
    k = 0
    if history[0] <= tol:
        termination = Termination.CONVERGED
    else:
        for k in range(1, max_iter + 1):
            x, y = step(x, y)
            if not np.all(np.isfinite(x)) or (y is not None and not np.all(np.isfinite(y))):
                raise NonFiniteIterate(f"non-finite iterate at iteration {k}")
            r = res(x)
            history.append(r)
            if keep_iterates:
                iterates.append(x.copy())
            if r <= tol:
                termination = Termination.CONVERGED
                break
            if r > DIVERGENCE_RES:
                termination = Termination.DIVERGED
                break
    return SolveReport(
        iterations=k,
        residual_history=history,
        x_final=x,
        y_final=y,
        termination=termination,
        wall_time_seconds=time.perf_counter() - start,
        absolute_residual=absolute,
        iterates=iterates,
    )


def _prepare(n, c, x0, y0):
    c = as_vector(c, n, "c")
    x = default_x0(n) if x0 is None else as_vector(x0, n, "x0").copy()
    y = c.copy() if y0 is None else as_vector(y0, n, "y0").copy()
    return c, x, y


def _problem_matrix(cfg, a):
    if a is not None:
        return a
    if cfg.rhs_scale != 1.0:
        raise ValueError("pass the problem matrix `a` when rhs_scale != 1")
    return cfg.a_split.split_matrix()


def gnms_solve(cfg, b_mat, c, x0=None, y0=None, *, a=None, tol=None, max_iter=None,
               keep_iterates=False):
    """Run the GNMS iteration

        y+ = (1 - tau) y + tau Q1^{-1} (Q2 y + |x|)
        x+ = M^{-1} (N x + B Q1 y+ - B Q2 y + c)

    ``a`` is the matrix used for the residual; it defaults to ``M - N``.
    Defaults: ``x0 = (-1, 0, -1, 0, ...)``, ``y0 = c``.
    """
    a = _problem_matrix(cfg, a)
    c, x, y = _prepare(a.n_rows, c, x0, y0)
    tau, s = cfg.tau, cfg.rhs_scale
    asp, qsp = cfg.a_split, cfg.q_split
    sc = s * c

    def step(x, y):
        y_new = (1.0 - tau) * y + tau * qsp.solve(qsp.n_part.matvec(y) + np.abs(x))
        coupling = b_mat.matvec(qsp.m_part.matvec(y_new) - qsp.n_part.matvec(y))
        x_new = asp.solve(asp.n_part.matvec(x) + s * coupling + sc)
        return x_new, y_new

    return _iterate(
        step, a, b_mat, c, x, y,
        cfg.tol if tol is None else tol,
        cfg.max_iter if max_iter is None else max_iter,
        keep_iterates,
    )


def gnms_solve_reformulated(cfg, b_mat, c, x0=None, y0=None, *, a=None, tol=None, max_iter=None,
                            keep_iterates=False):
    """The same iteration written with ``Q = Q1 - Q2`` and ``|x|`` in the
    ``x``-update:

        x+ = M^{-1} (N x + (1 - tau) B Q y + tau B|x| + c)
    """
    a = _problem_matrix(cfg, a)
    c, x, y = _prepare(a.n_rows, c, x0, y0)
    tau, s = cfg.tau, cfg.rhs_scale
    asp, qsp = cfg.a_split, cfg.q_split
    sc = s * c

    def step(x, y):
        ax = np.abs(x)
        y_new = (1.0 - tau) * y + tau * qsp.solve(qsp.n_part.matvec(y)) + tau * qsp.solve(ax)
        qy = qsp.m_part.matvec(y) - qsp.n_part.matvec(y)
        rhs = asp.n_part.matvec(x) + s * ((1.0 - tau) * b_mat.matvec(qy) + tau * b_mat.matvec(ax)) + sc
        return asp.solve(rhs), y_new

    return _iterate(
        step, a, b_mat, c, x, y,
        cfg.tol if tol is None else tol,
        cfg.max_iter if max_iter is None else max_iter,
        keep_iterates,
    )


def rms_solve(a_split, b_mat, c, tau, x0=None, y0=None, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER,
              *, a=None, keep_iterates=False):
    """Relaxed matrix-splitting scheme with ``S = M``, ``T = N``:

        x+ = S^{-1} (T x + B y + c)
        y+ = (1 - tau) y + tau |x+|
    """
    if not tau > 0:
        raise ValueError(f"tau must be positive, got {tau}")
    a = a_split.split_matrix() if a is None else a
    c, x, y = _prepare(a.n_rows, c, x0, y0)

    def step(x, y):
        x_new = a_split.solve(a_split.n_part.matvec(x) + b_mat.matvec(y) + c)
        return x_new, (1.0 - tau) * y + tau * np.abs(x_new)

    return _iterate(step, a, b_mat, c, x, y, tol, max_iter, keep_iterates)


def fpi_solve(a, b_mat, c, tau, x0=None, y0=None, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER,
              *, keep_iterates=False):
    """Fixed point iteration ``x+ = A^{-1}(B y + c)``, ``y+ = (1 - tau) y + tau |x+|``."""
    return rms_solve(trivial_splitting(a), b_mat, c, tau, x0, y0, tol, max_iter, a=a,
                     keep_iterates=keep_iterates)


# -- method presets -----------------------------------------------------------------


@dataclass(frozen=True)
class MethodPreset:
    """A named method bound to a problem's ``A`` and ``B``.

    ``config`` is set for methods run by the GNMS engine; FPI and RMS use
    ``lagged_split`` and ``tau`` instead.
    """

    name: str
    params: dict
    a: Matrix
    b_mat: Matrix
    config: GnmsConfig = None
    lagged_split: Splitting = None
    tau: float = None

    def run(self, c, x0=None, y0=None, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER, keep_iterates=False):
        if self.config is not None:
            return gnms_solve(self.config, self.b_mat, c, x0, y0, a=self.a, tol=tol, max_iter=max_iter,
                              keep_iterates=keep_iterates)
        return rms_solve(self.lagged_split, self.b_mat, c, self.tau, x0, y0, tol, max_iter, a=self.a,
                         keep_iterates=keep_iterates)


def identity_q(n):
    return scalar_splitting(n, 1.0, 0.0)


def _engine_preset(name, params, a, b_mat, a_split, rhs_scale=1.0):
    cfg = GnmsConfig(a_split=a_split, q_split=identity_q(a.n_rows), tau=1.0, rhs_scale=rhs_scale)
    return MethodPreset(name, params, a, b_mat, config=cfg)


def preset_gnms(a, b_mat, a_split, q_split, tau=1.0):
    cfg = GnmsConfig(a_split=a_split, q_split=q_split, tau=tau)
    return MethodPreset("GNMS", {"tau": tau}, a, b_mat, config=cfg)


def preset_mn(a, b_mat, omega):
    """``x+ = (A + Omega)^{-1} (Omega x + B|x| + c)``."""
    m_part = a + omega
    split = Splitting.build(m_part, omega, solve_strategy_for(m_part), target=a)
    return _engine_preset("MN", {"omega": omega}, a, b_mat, split)


def preset_picard(a, b_mat):
    """``x+ = A^{-1} (B|x| + c)``."""
    return _engine_preset("Picard", {}, a, b_mat, trivial_splitting(a))


def preset_nms(a, b_mat, split, omega):
    """``x+ = (Mb + Omega)^{-1} ((Nb + Omega) x + B|x| + c)`` for ``A = Mb - Nb``."""
    return _engine_preset("NMS", {"split": split, "omega": omega}, a, b_mat,
                          shifted_splitting(split, omega, target=a))


def preset_ngs(a, b_mat, omega):
    """NMS with the Gauss-Seidel splitting ``Mb = D - L``, ``Nb = U``."""
    preset = preset_nms(a, b_mat, gauss_seidel_splitting(a), omega)
    return MethodPreset("NGS", {"omega": omega}, a, b_mat, config=preset.config)


def preset_ssmn(a, b_mat, omega_tilde):
    """``x+ = (A + Omega~)^{-1} ((Omega~ - A) x + 2B|x| + 2c)``, run literally."""
    m_part = a + omega_tilde
    split = Splitting.build(m_part, omega_tilde - a, solve_strategy_for(m_part), target=2.0 * a)
    return _engine_preset("SSMN", {"omega_tilde": omega_tilde}, a, b_mat, split, rhs_scale=2.0)


def preset_rmn(a, b_mat, theta=1.0, omega=None):
    """``x+ = (theta A + Omega)^{-1} (Omega x + (theta - 1) A x + B|x| + c)``."""
    omega = Matrix.zeros(a.n_rows) if omega is None else omega
    return _engine_preset("RMN", {"theta": theta, "omega": omega}, a, b_mat,
                          relaxed_splitting(a, theta, omega))


def preset_rnms(a, b_mat, split, theta=1.0, omega_hat=None):
    """``x+ = (theta Mh + Omh)^{-1} ((Omh + (theta - 1) Mh + Nh) x + B|x| + c)``."""
    omega_hat = Matrix.zeros(a.n_rows) if omega_hat is None else omega_hat
    return _engine_preset("RNMS", {"split": split, "theta": theta, "omega_hat": omega_hat}, a, b_mat,
                          relaxed_splitting(a, theta, omega_hat, inner=split))


def preset_fpi(a, b_mat, tau):
    return MethodPreset("FPI", {"tau": tau}, a, b_mat, lagged_split=trivial_splitting(a), tau=tau)


def preset_rms(a, b_mat, split, tau):
    return MethodPreset("RMS", {"split": split, "tau": tau}, a, b_mat, lagged_split=split, tau=tau)
