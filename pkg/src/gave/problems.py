"""Problem instances: the block-banded benchmark family, random certified
instances, and a manifest-plus-Matrix-Market file layout."""

import os
from dataclasses import dataclass

import numpy as np

from .errors import MissingPart, ParseError, TooSmall
from .linalg import Matrix, lu_factor, two_norm_of_product
from .mmio import read_matrix, read_vector, write_matrix, write_vector

MANIFEST_NAME = "manifest.txt"
MANIFEST_KEYS = ("A", "B", "c", "x_star", "label")

# S1 and S2 stencils (offset -> value within a diagonal block) and the
# coupling between blocks (block offset -> multiple of I).
S1_STENCIL = {0: 36.0, 1: -1.5, 2: -0.5, 3: -1.5}
S2_STENCIL = {0: 3.0, 1: -1.0, 2: -1.0, 3: -1.0}
A_BLOCK_COUPLING = {1: -1.5, 2: -0.5, 3: -1.5, 4: -0.5}
B_BLOCK_COUPLING = {1: -1.0, 2: -1.0, 3: -1.0, 4: -1.0}
A_SHIFT = 0.2


@dataclass(frozen=True)
class GaveProblem:
    a: Matrix
    b: Matrix
    c: np.ndarray
    x_star: np.ndarray = None
    label: str = ""

    @property
    def n(self):
        return self.a.n_rows


def _symmetric(stencil):
    out = dict(stencil)
    out.update({-k: v for k, v in stencil.items() if k})
    return out


def block_banded(m, block_rows, stencil, coupling):
    """Block-banded ``(m*block_rows)``-square matrix.

    Diagonal blocks carry the symmetric ``stencil`` truncated at block
    edges; block ``(i, i+k)`` is ``coupling[|k|] * I``.
    """
    n = m * block_rows
    diagonals = {}
    for k, v in _symmetric(stencil).items():
        if abs(k) >= m:
            continue
        rows = np.arange(n - abs(k)) + max(0, -k)
        same_block = rows // m == (rows + k) // m
        diagonals[k] = np.where(same_block, v, 0.0)
    for kb, v in _symmetric(coupling).items():
        if abs(kb) >= block_rows:
            continue
        k = kb * m
        diagonals[k] = diagonals.get(k, 0.0) + np.full(n - abs(k), v)
    return Matrix.from_diagonals(n, diagonals)


def alternating_solution(n):
    """``(1/2, 1, 1/2, 1, ...)``."""
    x = np.ones(n)
    x[0::2] = 0.5
    return x


def example_4_1(m, block_rows=None):
    """The benchmark instance with ``m x m`` blocks; ``n = m * block_rows``.

    ``block_rows`` defaults to ``m``.  ``A = A~ + I/5`` and ``c`` is built
    from the known solution ``x* = (1/2, 1, ...)``.
    """
    block_rows = m if block_rows is None else block_rows
    if m < 1 or block_rows < 1:
        raise TooSmall(f"need m >= 1 and block_rows >= 1, got m={m}, block_rows={block_rows}")
    a = block_banded(m, block_rows, S1_STENCIL, A_BLOCK_COUPLING) + Matrix.identity(m * block_rows, A_SHIFT)
    b = block_banded(m, block_rows, S2_STENCIL, B_BLOCK_COUPLING)
    x_star = alternating_solution(a.n_rows)
    c = a.matvec(x_star) - b.matvec(np.abs(x_star))
    return GaveProblem(a, b, c, x_star, f"banded m={m} block_rows={block_rows}")


def random_problem(n, seed=0, condition_target=0.5, bandwidth=2):
    """Random banded instance with ``||A^-1 B|| = condition_target``.

    ``A`` is strictly diagonally dominant with a positive diagonal, ``B`` is
    rescaled so that the Picard condition holds with the requested value,
    and ``c`` comes from a random ``x*`` with mixed signs.
    """
    if n < 1:
        raise TooSmall("n must be positive")
    if not 0 < condition_target:
        raise ValueError("condition_target must be positive")
    rng = np.random.default_rng(seed)
    w = min(bandwidth, n - 1)
    offsets = [k for k in range(-w, w + 1) if k]
    a_diags = {k: rng.uniform(-1.0, 1.0, n - abs(k)) for k in offsets}
    row_sums = np.zeros(n)
    for k, d in a_diags.items():
        rows = np.arange(n - abs(k)) + max(0, -k)
        np.add.at(row_sums, rows, np.abs(d))
    a_diags[0] = row_sums + rng.uniform(1.0, 2.0, n)
    a = Matrix.from_diagonals(n, a_diags)
    b = Matrix.from_diagonals(n, {k: rng.uniform(-1.0, 1.0, n - abs(k)) for k in range(-w, w + 1)})
    b = b * (condition_target / two_norm_of_product(lu_factor(a), b))
    x_star = rng.uniform(-1.0, 1.0, n)
    c = a.matvec(x_star) - b.matvec(np.abs(x_star))
    return GaveProblem(a, b, c, x_star, f"random n={n} seed={seed}")


# -- files ------------------------------------------------------------------------


def save_problem(problem, directory):
    """Write ``A.mtx``, ``B.mtx``, ``c.mtx`` (and ``x_star.mtx``) plus a manifest."""
    os.makedirs(directory, exist_ok=True)
    entries = {"A": "A.mtx", "B": "B.mtx", "c": "c.mtx"}
    write_matrix(os.path.join(directory, "A.mtx"), problem.a)
    write_matrix(os.path.join(directory, "B.mtx"), problem.b)
    write_vector(os.path.join(directory, "c.mtx"), problem.c)
    if problem.x_star is not None:
        entries["x_star"] = "x_star.mtx"
        write_vector(os.path.join(directory, "x_star.mtx"), problem.x_star)
    if problem.label:
        entries["label"] = problem.label
    path = os.path.join(directory, MANIFEST_NAME)
    with open(path, "w", encoding="utf-8") as fh:
        for key, value in entries.items():
            fh.write(f"{key} = {value}\n")
    return path


def read_manifest(path):
    entries = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            if "=" not in line:
                raise ParseError("expected 'key = value'", lineno, len(line) - len(line.lstrip()) + 1)
            key, value = line.split("=", 1)
            key = key.strip()
            if key not in MANIFEST_KEYS:
                raise ParseError(f"unknown manifest key {key!r}", lineno, line.find(key) + 1)
            if key in entries:
                raise ParseError(f"duplicate manifest key {key!r}", lineno, line.find(key) + 1)
            entries[key] = value.strip()
    return entries


def load_problem(path):
    """Load a problem from a manifest file or a directory holding one."""
    if os.path.isdir(path):
        path = os.path.join(path, MANIFEST_NAME)
    entries = read_manifest(path)
    base = os.path.dirname(os.path.abspath(path))
    for key in ("A", "B", "c"):
        if key not in entries:
            raise MissingPart(f"manifest {path} does not name {key}")

    def resolve(name):
        return name if os.path.isabs(name) else os.path.join(base, name)

    a = read_matrix(resolve(entries["A"]))
    b = read_matrix(resolve(entries["B"]))
    c = read_vector(resolve(entries["c"]))
    x_star = read_vector(resolve(entries["x_star"])) if "x_star" in entries else None
    return GaveProblem(a, b, c, x_star, entries.get("label", ""))
