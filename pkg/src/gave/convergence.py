"""Sufficient convergence conditions for the splitting iterations.

All conditions are strict inequalities.  A :class:`Certificate` records
each inequality with its two sides so callers can see how much room there
is, and ``holds`` is true only when every margin is strictly positive.
"""

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NoConvergence
from .linalg import Matrix, factorize, spectral_radius_nonneg, two_norm, two_norm_of_product
from .splittings import solve_strategy_for


@dataclass(frozen=True)
class ConvergenceScalars:
    """``alpha = ||Q1^-1 Q2||``, ``beta = ||Q1^-1||``, ``gamma = ||M^-1 N||``,
    ``mu = ||M^-1 B Q1||``, ``nu = ||M^-1 B Q2||`` and the relaxation ``tau``."""

    alpha: float
    beta: float
    gamma: float
    mu: float
    nu: float
    tau: float

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma", "mu", "nu"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise ValueError(f"{name} must be finite and nonnegative, got {v}")
        if not (math.isfinite(self.tau) and self.tau > 0):
            raise ValueError(f"tau must be positive, got {self.tau}")

    def with_tau(self, tau):
        return ConvergenceScalars(self.alpha, self.beta, self.gamma, self.mu, self.nu, tau)


@dataclass(frozen=True)
class Inequality:
    """``lhs < rhs``."""

    name: str
    lhs: float
    rhs: float

    @property
    def margin(self):
        return self.rhs - self.lhs

    @property
    def holds(self):
        return self.margin > 0


def _json_number(v):
    return v if math.isfinite(v) else None


@dataclass(frozen=True)
class Certificate:
    condition_name: str
    inequalities: tuple
    values: dict = field(default_factory=dict)

    @property
    def holds(self):
        return all(q.holds for q in self.inequalities)

    @property
    def margin(self):
        """Smallest ``rhs - lhs`` over the constituent inequalities."""
        return min(q.margin for q in self.inequalities)

    @property
    def details(self):
        return {q.name: {"lhs": q.lhs, "rhs": q.rhs, "margin": q.margin} for q in self.inequalities}

    def to_dict(self):
        return {
            "condition": self.condition_name,
            "holds": self.holds,
            "margin": _json_number(self.margin),
            "inequalities": [
                {"name": q.name, "lhs": _json_number(q.lhs), "rhs": _json_number(q.rhs),
                 "margin": _json_number(q.margin), "holds": q.holds}
                for q in self.inequalities
            ],
            "values": {k: _json_number(v) for k, v in self.values.items()},
        }

    def to_json(self, **kwargs):
        return json.dumps(self.to_dict(), **kwargs)


# -- scalar bounds and the W matrix -----------------------------------------------


def compute_scalars(a_split, q_split, b_mat, tau, tol=1e-10, max_iter=5000):
    """The five norm bounds for the splittings ``A = M - N``, ``Q = Q1 - Q2``."""
    jobs = {
        "alpha": (q_split.factors, q_split.n_part),
        "beta": (q_split.factors, None),
        "gamma": (a_split.factors, a_split.n_part),
        "mu": (a_split.factors, [b_mat, q_split.m_part]),
        "nu": (a_split.factors, [b_mat, q_split.n_part]),
    }
    values = {}
    for name, (factors, right) in jobs.items():
        try:
            values[name] = two_norm_of_product(factors, right, tol=tol, max_iter=max_iter)
        except NoConvergence as exc:
            raise NoConvergence(f"estimate of {name} did not converge", exc.estimate, name) from exc
    return ConvergenceScalars(tau=tau, **values)


def _fg(s):
    return abs(1.0 - s.tau) + s.tau * s.alpha, s.tau * s.beta


def build_w(s):
    """The 2x2 nonnegative contraction matrix bounding successive differences
    ``(||y+ - y||, ||x+ - x||)``."""
    f, g = _fg(s)
    return Matrix.dense([[f, g], [f * s.mu + s.nu, g * s.mu + s.gamma]])


def w_characteristic(s):
    """``(trace, det)`` so that the eigenvalues of W solve ``l^2 - trace l + det = 0``."""
    f, g = _fg(s)
    return f + s.mu * g + s.gamma, s.gamma * f - g * s.nu


def quadratic_root_moduli(p, q):
    """Moduli of the roots of ``x^2 - p x + q``, largest first."""
    disc = p * p - 4.0 * q
    if disc >= 0:
        r = math.sqrt(disc)
        # avoid cancellation in the smaller root
        big = (p + r) / 2.0 if p >= 0 else (p - r) / 2.0
        small = q / big if big != 0 else 0.0
        return tuple(sorted((abs(big), abs(small)), reverse=True))
    m = math.sqrt(q)
    return (m, m)


def w_spectral_radius(s):
    """Closed-form spectral radius of :func:`build_w`."""
    return quadratic_root_moduli(*w_characteristic(s))[0]


def youngs_root_test(s, q):
    """True iff both roots of ``x^2 - s x + q = 0`` have modulus below one."""
    return abs(q) < 1 and abs(s) < 1 + q


# -- GNMS conditions -------------------------------------------------------------------


def check_theorem_3_1(s):
    """Two-inequality sufficient condition for GNMS convergence and unique
    solvability (equivalent to ``rho(W) < 1``)."""
    t = s.tau
    first = abs(s.gamma * abs(1.0 - t) + t * (s.gamma * s.alpha - s.beta * s.nu))
    second_lhs = t * (s.mu * s.beta + s.beta * s.nu)
    second_rhs = (s.gamma - 1.0) * (abs(1.0 - t) + t * s.alpha - 1.0)
    return Certificate(
        "theorem-3-1",
        (
            Inequality("|gamma|1-tau| + tau(gamma alpha - beta nu)| < 1", first, 1.0),
            Inequality("tau(mu beta + beta nu) < (gamma-1)(|1-tau| + tau alpha - 1)", second_lhs, second_rhs),
        ),
        _scalar_values(s),
    )


def corollary_3_2_tau_bound(s):
    """Upper end of the admissible ``tau`` interval (``-inf`` when undefined)."""
    denom = s.beta * (s.mu + s.nu) - (s.gamma - 1.0) * (s.alpha + 1.0)
    if denom <= 0:
        return -math.inf
    return 2.0 * (1.0 - s.gamma) / denom


def check_corollary_3_2(s):
    """Condition stated on the scalars alone plus an explicit ``tau`` range."""
    bound = corollary_3_2_tau_bound(s)
    values = _scalar_values(s)
    values["tau_upper_bound"] = bound
    return Certificate(
        "corollary-3-2",
        (
            Inequality("|gamma alpha - beta nu| < gamma", abs(s.gamma * s.alpha - s.beta * s.nu), s.gamma),
            Inequality("gamma < 1", s.gamma, 1.0),
            Inequality("beta(mu + nu) < (gamma-1)(alpha-1)", s.beta * (s.mu + s.nu),
                       (s.gamma - 1.0) * (s.alpha - 1.0)),
            Inequality("0 < tau", 0.0, s.tau),
            Inequality("tau < 2(1-gamma)/(beta(mu+nu) - (gamma-1)(alpha+1))", s.tau, bound),
        ),
        values,
    )


def _scalar_values(s):
    return {"alpha": s.alpha, "beta": s.beta, "gamma": s.gamma, "mu": s.mu, "nu": s.nu, "tau": s.tau}


def certify_config(cfg, b_mat):
    """Theorem certificate for a :class:`~gave.solvers.GnmsConfig`."""
    return check_theorem_3_1(compute_scalars(cfg.a_split, cfg.q_split, b_mat, cfg.tau))


# -- conditions for the special cases ------------------------------------------------


def _factor(m):
    return factorize(m, solve_strategy_for(m))


def _split_condition(name, m_part, n_part, b_mat, n_label):
    """``||M^-1 N|| + ||M^-1 B|| < 1``."""
    f = _factor(m_part)
    t1 = two_norm_of_product(f, n_part)
    t2 = two_norm_of_product(f, b_mat)
    return Certificate(
        name,
        (Inequality(f"||M^-1 {n_label}|| + ||M^-1 B|| < 1", t1 + t2, 1.0),),
        {f"norm_Minv_{n_label}": t1, "norm_Minv_B": t2},
    )


def _split_condition_old(name, m_part, n_part, b_mat, n_label):
    """``||M^-1|| (||N|| + ||B||) < 1``."""
    f = _factor(m_part)
    inv = two_norm_of_product(f, None)
    nn = two_norm(n_part)
    nb = two_norm(b_mat)
    return Certificate(
        name,
        (Inequality(f"||M^-1|| (||{n_label}|| + ||B||) < 1", inv * (nn + nb), 1.0),),
        {"norm_Minv": inv, f"norm_{n_label}": nn, "norm_B": nb},
    )


def check_mn(a, b_mat, omega):
    return _split_condition("mn", a + omega, omega, b_mat, "Omega")


def check_mn_old(a, b_mat, omega):
    return _split_condition_old("mn-old", a + omega, omega, b_mat, "Omega")


def check_picard(a, b_mat):
    """``||A^-1 B|| < 1``."""
    value = two_norm_of_product(_factor(a), b_mat)
    return Certificate("picard-norm", (Inequality("||A^-1 B|| < 1", value, 1.0),), {"norm_Ainv_B": value})


def check_picard_rho(a, b_mat):
    """``rho(|A^-1 B|) < 1``.  Forms ``A^-1 B`` densely."""
    prod = _factor(a).solve(b_mat.to_dense())
    value = spectral_radius_nonneg(Matrix.dense(np.abs(prod)))
    return Certificate("picard-rho", (Inequality("rho(|A^-1 B|) < 1", value, 1.0),), {"rho_abs_Ainv_B": value})


def check_nms(a_split_bar, b_mat, omega):
    return _split_condition("nms", a_split_bar.m_part + omega, a_split_bar.n_part + omega, b_mat, "(Nb+Omega)")


def check_nms_old(a_split_bar, b_mat, omega):
    return _split_condition_old("nms-old", a_split_bar.m_part + omega, a_split_bar.n_part + omega, b_mat,
                                "(Nb+Omega)")


def _rnms_parts(split, theta, omega_hat):
    m_part = theta * split.m_part + omega_hat
    n_part = omega_hat + (theta - 1.0) * split.m_part + split.n_part
    return m_part, n_part


def check_rnms(split, theta, omega_hat, b_mat):
    m_part, n_part = _rnms_parts(split, theta, omega_hat)
    return _split_condition("rnms", m_part, n_part, b_mat, "(Omh+(theta-1)Mh+Nh)")


def check_rnms_old(split, theta, omega_hat, b_mat):
    m_part, n_part = _rnms_parts(split, theta, omega_hat)
    return _split_condition_old("rnms-old", m_part, n_part, b_mat, "(Omh+(theta-1)Mh+Nh)")
