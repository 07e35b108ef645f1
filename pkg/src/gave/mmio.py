"""Matrix Market reader/writer.

Banded matrices are written in ``coordinate`` format and read back as banded;
dense matrices and vectors use the ``array`` format and read back dense.
Values are written with ``repr`` so every float survives the round trip.
"""

import numpy as np

from .errors import ParseError
from .linalg import Matrix

_FIELDS = ("real", "integer", "double")
_SYMMETRIES = ("general", "symmetric", "skew-symmetric")


def _format(v):
    return repr(float(v))


def write_matrix(path, m, comment=None):
    lines = []
    if m.is_banded:
        lines.append("%%MatrixMarket matrix coordinate real general")
        if comment:
            lines.append(f"% {comment}")
        entries = []
        n = m.n_rows
        for k in m.nonzero_offsets():
            d = m.diagonal(k)
            rows = np.arange(n - abs(k)) + max(0, -k)
            for i, v in zip(rows, d):
                if v != 0.0:
                    entries.append((int(i), int(i + k), v))
        entries.sort()
        lines.append(f"{n} {n} {len(entries)}")
        lines.extend(f"{i + 1} {j + 1} {_format(v)}" for i, j, v in entries)
    else:
        a = m.to_dense()
        lines.append("%%MatrixMarket matrix array real general")
        if comment:
            lines.append(f"% {comment}")
        lines.append(f"{a.shape[0]} {a.shape[1]}")
        lines.extend(_format(v) for v in a.ravel(order="F"))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def write_vector(path, x, comment=None):
    write_matrix(path, Matrix.dense(np.asarray(x, dtype=float).reshape(-1, 1)), comment)


def _parse_number(tok, lineno, col):
    try:
        return float(tok)
    except ValueError:
        raise ParseError(f"invalid number {tok!r}", lineno, col) from None


def _parse_int(tok, lineno, col):
    try:
        return int(tok)
    except ValueError:
        raise ParseError(f"invalid integer {tok!r}", lineno, col) from None


def _data_lines(lines, start):
    for lineno, line in enumerate(lines[start:], start=start + 1):
        stripped = line.strip()
        if stripped and not stripped.startswith("%"):
            yield lineno, line


def _columns(line):
    """Split ``line`` into ``(token, 1-based column)`` pairs."""
    out = []
    i = 0
    while i < len(line):
        if line[i].isspace():
            i += 1
            continue
        j = i
        while j < len(line) and not line[j].isspace():
            j += 1
        out.append((line[i:j], i + 1))
        i = j
    return out


def read_matrix(path):
    """Read a Matrix Market file into a :class:`Matrix`.

    Raises
    ------
    ParseError
        With the offending line and column.
    """
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise ParseError("empty file", 1, 1)
    header = lines[0].split()
    if len(header) != 5 or header[0] != "%%MatrixMarket" or header[1].lower() != "matrix":
        raise ParseError("missing '%%MatrixMarket matrix' header", 1, 1)
    fmt, field, symmetry = (h.lower() for h in header[2:])
    if fmt not in ("coordinate", "array"):
        raise ParseError(f"unsupported format {fmt!r}", 1, lines[0].find(header[2]) + 1)
    if field not in _FIELDS:
        raise ParseError(f"unsupported field {field!r}", 1, lines[0].find(header[3]) + 1)
    if symmetry not in _SYMMETRIES:
        raise ParseError(f"unsupported symmetry {symmetry!r}", 1, lines[0].find(header[4]) + 1)

    body = _data_lines(lines, 1)
    try:
        lineno, size_line = next(body)
    except StopIteration:
        raise ParseError("missing size line", len(lines) + 1, 1) from None
    toks = _columns(size_line)
    expected = 3 if fmt == "coordinate" else 2
    if len(toks) != expected:
        raise ParseError(f"size line needs {expected} integers", lineno, 1)
    dims = [_parse_int(t, lineno, c) for t, c in toks]
    n_rows, n_cols = dims[0], dims[1]
    if n_rows <= 0 or n_cols <= 0:
        raise ParseError("dimensions must be positive", lineno, 1)
    if symmetry != "general" and n_rows != n_cols:
        raise ParseError("symmetric storage requires a square matrix", lineno, 1)

    if fmt == "array":
        values = []
        for lineno, line in body:
            toks = _columns(line)
            if len(toks) != 1:
                raise ParseError("array entries hold one value per line", lineno, toks[1][1])
            values.append((_parse_number(toks[0][0], lineno, toks[0][1]), lineno))
        a = np.zeros((n_rows, n_cols))
        if symmetry == "general":
            if len(values) != n_rows * n_cols:
                raise ParseError(f"expected {n_rows * n_cols} entries, found {len(values)}", len(lines), 1)
            a[:] = np.array([v for v, _ in values]).reshape((n_rows, n_cols), order="F")
        else:
            sign = 1.0 if symmetry == "symmetric" else -1.0
            first = 0 if symmetry == "symmetric" else 1
            slots = [(i, j) for j in range(n_cols) for i in range(j + first, n_rows)]
            if len(values) != len(slots):
                raise ParseError(f"expected {len(slots)} entries, found {len(values)}", len(lines), 1)
            for (i, j), (v, _) in zip(slots, values):
                a[i, j] = v
                if i != j:
                    a[j, i] = sign * v
        return Matrix.dense(a)

    nnz = dims[2]
    rows, cols, vals = [], [], []
    n_read = 0
    for lineno, line in body:
        n_read += 1
        toks = _columns(line)
        if len(toks) != 3:
            col = toks[min(len(toks), 3) - 1][1] if toks else 1
            raise ParseError("coordinate entries need 'row col value'", lineno, col)
        i = _parse_int(toks[0][0], lineno, toks[0][1])
        j = _parse_int(toks[1][0], lineno, toks[1][1])
        if not 1 <= i <= n_rows:
            raise ParseError(f"row index {i} out of range", lineno, toks[0][1])
        if not 1 <= j <= n_cols:
            raise ParseError(f"column index {j} out of range", lineno, toks[1][1])
        v = _parse_number(toks[2][0], lineno, toks[2][1])
        rows.append(i - 1)
        cols.append(j - 1)
        vals.append(v)
        if symmetry != "general" and i != j:
            rows.append(j - 1)
            cols.append(i - 1)
            vals.append(v if symmetry == "symmetric" else -v)
    if n_read != nnz:
        raise ParseError(f"expected {nnz} entries, found {n_read}", len(lines), 1)

    if n_rows != n_cols:
        a = np.zeros((n_rows, n_cols))
        np.add.at(a, (rows, cols), vals)
        return Matrix.dense(a)
    n = n_rows
    diagonals = {0: np.zeros(n)}
    for i, j, v in zip(rows, cols, vals):
        k = j - i
        d = diagonals.setdefault(k, np.zeros(n - abs(k)))
        d[min(i, j)] += v
    return Matrix.from_diagonals(n, diagonals)


def read_vector(path):
    m = read_matrix(path)
    if m.n_cols != 1:
        raise ParseError(f"expected a single column, found {m.n_cols}", 1, 1)
    return m.to_dense()[:, 0]
