"""Matrix splittings ``U = U1 - U2`` with a factored, nonsingular ``U1``.

Sign convention: ``A = D - L - U`` where ``D`` is the diagonal of ``A`` and
``-L``, ``-U`` are its strictly lower and strictly upper parts.
"""

from dataclasses import dataclass, field

from .errors import DimensionMismatch, NegativeTheta
from .linalg import Matrix, factorize

RECONSTRUCTION_RTOL = 1e-14


@dataclass(frozen=True)
class DLUDecomposition:
    d: Matrix
    l: Matrix
    u: Matrix

    def reconstruct(self):
        return self.d - self.l - self.u


@dataclass(frozen=True)
class Splitting:
    """``m_part - n_part`` with ``m_part`` factored by ``strategy``.

    Build instances with :meth:`build` (or the constructors below) so the
    factorization and the reconstruction check are always performed.
    """

    m_part: Matrix
    n_part: Matrix
    strategy: str
    factors: object = field(repr=False, compare=False)

    @classmethod
    def build(cls, m_part, n_part, strategy="lu", target=None):
        """Factor ``m_part`` and, when ``target`` is given, check
        ``m_part - n_part == target`` entrywise to ``1e-14`` relative."""
        if m_part.shape != n_part.shape:
            raise DimensionMismatch(f"M is {m_part.shape} but N is {n_part.shape}")
        if target is not None:
            check_reconstruction(m_part, n_part, target)
        return cls(m_part, n_part, strategy, factorize(m_part, strategy))

    @property
    def n(self):
        return self.m_part.n_rows

    def solve(self, b, trans=False):
        """Apply ``m_part^{-1}`` (or its transpose) to ``b``."""
        return self.factors.solve(b, trans=trans)

    def split_matrix(self):
        return self.m_part - self.n_part


def check_reconstruction(m_part, n_part, target, rtol=RECONSTRUCTION_RTOL):
    diff = (m_part - n_part) - target
    scale = max(target.max_abs(), m_part.max_abs(), n_part.max_abs(), 1e-300)
    err = diff.max_abs()
    if err > rtol * scale:
        raise ValueError(f"splitting does not reproduce its matrix: max error {err:.3e}")


def dlu(a):
    """Split ``a`` into ``D``, ``L``, ``U`` with ``a = D - L - U``."""
    if not a.is_square:
        raise DimensionMismatch(f"matrix must be square, got {a.shape}")
    return DLUDecomposition(d=a.diag_part(), l=-a.tril(-1), u=-a.triu(1))


def solve_strategy_for(m):
    """Cheapest solve strategy that the sparsity pattern of ``m`` allows."""
    bw = m.bandwidth()
    if bw == (0, 0):
        return "diagonal"
    if bw[1] == 0:
        return "lower"
    if bw[0] == 0:
        return "upper"
    return "lu"


def weighted_lower_splitting(a, coefficient=0.75):
    """``M = D - coefficient * L``, ``N = (1 - coefficient) * L + U``.

    The default ``0.75`` is the choice used in the benchmark; ``coefficient=1``
    gives the Gauss-Seidel splitting ``M = D - L``, ``N = U``.
    """
    parts = dlu(a)
    m_part = parts.d - coefficient * parts.l
    n_part = (1.0 - coefficient) * parts.l + parts.u
    return Splitting.build(m_part, n_part, solve_strategy_for(m_part), target=a)


def gauss_seidel_splitting(a):
    return weighted_lower_splitting(a, coefficient=1.0)


def jacobi_splitting(a):
    parts = dlu(a)
    return Splitting.build(parts.d, parts.l + parts.u, "diagonal", target=a)


def trivial_splitting(a):
    """``M = a``, ``N = 0``; the Picard/MN base splitting."""
    return Splitting.build(a, Matrix.zeros(a.n_rows), solve_strategy_for(a), target=a)


def scalar_splitting(n, q1, q2):
    """``Q = q1*I - q2*I`` with diagonal solves."""
    return Splitting.build(
        Matrix.identity(n, q1), Matrix.identity(n, q2), "diagonal", target=Matrix.identity(n, q1 - q2)
    )


def omega_diag(a, scale):
    """``scale * diag(a)`` as a diagonal matrix."""
    return float(scale) * a.diag_part()


def shift_splitting(a, omega):
    """``M = (a + omega)/2``, ``N = (omega - a)/2``."""
    m_part = 0.5 * (a + omega)
    n_part = 0.5 * (omega - a)
    return Splitting.build(m_part, n_part, "lu", target=a)


def shifted_splitting(split, omega, target=None):
    """``(M + omega, N + omega)`` from an existing splitting of ``A``."""
    m_part = split.m_part + omega
    n_part = split.n_part + omega
    if target is None:
        target = split.split_matrix()
    return Splitting.build(m_part, n_part, solve_strategy_for(m_part), target=target)


def relaxed_splitting(a, theta, omega, inner=None):
    """Relaxed splitting ``M = theta*Mh + omega``, ``N = omega + (theta-1)*Mh + Nh``.

    ``inner`` is a splitting ``(Mh, Nh)`` of ``a``; without it ``Mh = a`` and
    ``Nh = 0``.  Since ``M - N = Mh - Nh``, the result is again a splitting of
    ``a`` and is validated as one.
    """
    if theta < 0:
        raise NegativeTheta(f"theta must be nonnegative, got {theta}")
    if inner is None:
        m_hat, n_hat = a, Matrix.zeros(a.n_rows)
    else:
        m_hat, n_hat = inner.m_part, inner.n_part
    m_part = theta * m_hat + omega
    n_part = omega + (theta - 1.0) * m_hat + n_hat
    return Splitting.build(m_part, n_part, solve_strategy_for(m_part), target=a)


