"""Dense linear algebra over GF(2).

Matrices are plain ``numpy`` arrays of dtype ``uint8`` holding 0/1 entries.
Every routine copies its input, so callers never see their arrays mutated.
Elimination pivots on the lowest available index, which makes every basis
returned here reproducible from run to run.
"""

from __future__ import annotations

import numpy as np
import numpy.typing as npt

BinaryMatrix = npt.NDArray[np.uint8]


class SingularMatrix(ValueError):
    """Raised when inverting a matrix that has no GF(2) inverse."""


class DimensionMismatch(ValueError):
    """Raised when operand shapes are incompatible."""


class MatrixParseError(ValueError):
    """Raised on malformed matrix text; carries the offending line number."""

    def __init__(self, message: str, lineno: int | None = None):
        self.lineno = lineno
        prefix = f"line {lineno}: " if lineno is not None else ""
        super().__init__(prefix + message)


def as_binary(a) -> BinaryMatrix:
    """Return a fresh ``uint8`` copy of ``a`` reduced mod 2."""
    arr = np.asarray(a)
    if arr.dtype == np.bool_:
        return arr.astype(np.uint8)
    return (arr.astype(np.int64) & 1).astype(np.uint8)


def frozen(a) -> BinaryMatrix:
    """Binary copy of ``a`` flagged read-only."""
    out = as_binary(a)
    out.flags.writeable = False
    return out


def identity(n: int) -> BinaryMatrix:
    return np.eye(n, dtype=np.uint8)


def zeros(rows: int, cols: int | None = None) -> BinaryMatrix:
    return np.zeros((rows, rows if cols is None else cols), dtype=np.uint8)


def transvection(n: int, i: int, j: int) -> BinaryMatrix:
    """The elementary matrix ``I + e_i e_j^T``.

    Left-multiplying by it adds row ``j`` into row ``i``; it is its own inverse.
    """
    if i == j:
        raise ValueError("transvection needs distinct indices")
    t = identity(n)
    t[i, j] = 1
    return t


def multiply(a, b) -> BinaryMatrix:
    """Matrix product mod 2."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.ndim != 2 or b.ndim not in (1, 2) or a.shape[1] != b.shape[0]:
        raise DimensionMismatch(f"cannot multiply {a.shape} by {b.shape}")
    # int64 accumulation cannot overflow for any matrix that fits in memory
    return ((a.astype(np.int64) @ b.astype(np.int64)) & 1).astype(np.uint8)


def tensor(a, b) -> BinaryMatrix:
    """Kronecker product; row ``(i1, i2)`` of the result has index ``i1 * b.rows + i2``."""
    return np.kron(as_binary(a), as_binary(b)).astype(np.uint8)


def row_reduce(m, *, ncols: int | None = None) -> tuple[BinaryMatrix, list[int]]:
    """Reduced row echelon form by Gauss-Jordan elimination.

    Only the first ``ncols`` columns are eligible as pivots (all by default),
    which is how augmented systems ``[A | B]`` are reduced on ``A`` alone.

    Returns:
        ``(R, pivots)`` where ``pivots[r]`` is the pivot column of row ``r``.
    """
    r = as_binary(m)
    if r.ndim != 2:
        raise DimensionMismatch("row_reduce expects a 2-D array")
    rows, cols = r.shape
    limit = cols if ncols is None else ncols
    pivots: list[int] = []
    top = 0
    for c in range(limit):
        if top == rows:
            break
        hits = np.flatnonzero(r[top:, c])
        if hits.size == 0:
            continue
        p = top + hits[0]
        if p != top:
            r[[top, p]] = r[[p, top]]
        mask = r[:, c].astype(bool)
        mask[top] = False
        r[mask] ^= r[top]
        pivots.append(c)
        top += 1
    return r, pivots


def rank(m) -> int:
    """Dimension of the row space."""
    m = np.asarray(m)
    if m.size == 0:
        return 0
    return len(row_reduce(m)[1])


def kernel_basis(m) -> BinaryMatrix:
    """Basis of the right null space ``{v : m v = 0}``, one vector per row.

    One vector per free column, in increasing column order; the vector for
    free column ``f`` has a 1 at ``f`` and zeros at every other free column.
    """
    m = as_binary(m)
    cols = m.shape[1]
    if m.shape[0] == 0:
        return identity(cols)
    r, pivots = row_reduce(m)
    pivot_set = set(pivots)
    free = [c for c in range(cols) if c not in pivot_set]
    basis = zeros(len(free), cols)
    for idx, f in enumerate(free):
        basis[idx, f] = 1
        for row, p in enumerate(pivots):
            basis[idx, p] = r[row, f]
    return basis


def image_basis(m) -> BinaryMatrix:
    """Basis of the column space, taken from the pivot columns of ``m`` itself."""
    m = as_binary(m)
    if m.size == 0:
        return zeros(0, m.shape[0])
    _, pivots = row_reduce(m)
    return np.ascontiguousarray(m[:, pivots].T)


def row_basis(m) -> BinaryMatrix:
    """Nonzero rows of the reduced row echelon form."""
    m = as_binary(m)
    if m.shape[0] == 0:
        return m.copy()
    r, pivots = row_reduce(m)
    return r[: len(pivots)]


def independent_rows(m) -> list[int]:
    """Indices of a greedy maximal independent subset of the rows, scanning top to bottom."""
    m = as_binary(m)
    chosen: list[int] = []
    # echelon rows with their leading columns, kept reduced against each other
    echelon: list[np.ndarray] = []
    leads: list[int] = []
    for idx, row in enumerate(m):
        v = row.copy()
        for e, lead in zip(echelon, leads):
            if v[lead]:
                v ^= e
        nz = np.flatnonzero(v)
        if nz.size:
            echelon.append(v)
            leads.append(int(nz[0]))
            chosen.append(idx)
    return chosen


def invert(m) -> BinaryMatrix:
    """Inverse over GF(2); raises :class:`SingularMatrix` if none exists."""
    m = as_binary(m)
    n, cols = m.shape
    if n != cols:
        raise DimensionMismatch(f"cannot invert non-square {m.shape}")
    r, pivots = row_reduce(np.hstack([m, identity(n)]), ncols=n)
    if len(pivots) < n:
        raise SingularMatrix(f"matrix has rank {len(pivots)} < {n}")
    return np.ascontiguousarray(r[:, n:])


def pseudo_inverse(m) -> BinaryMatrix:
    """A matrix ``g`` with ``m @ g @ b = b`` for every ``b`` in the column space of ``m``.

    Free variables are set to zero, so ``g @ b`` is supported on pivot columns.
    """
    m = as_binary(m)
    rows, cols = m.shape
    r, pivots = row_reduce(np.hstack([m, identity(rows)]), ncols=cols)
    g = zeros(cols, rows)
    for row, p in enumerate(pivots):
        g[p] = r[row, cols:]
    return g


def in_row_space(basis, vectors) -> np.ndarray:
    """Boolean mask: which rows of ``vectors`` lie in the row space of ``basis``."""
    vectors = np.atleast_2d(as_binary(vectors))
    basis = as_binary(basis)
    if basis.shape[0] == 0:
        return ~vectors.any(axis=1)
    r, pivots = row_reduce(basis)
    r = r[: len(pivots)]
    residue = vectors.copy()
    for row, p in zip(r, pivots):
        residue[residue[:, p].astype(bool)] ^= row
    return ~residue.any(axis=1)


def same_row_space(a, b) -> bool:
    """True when ``a`` and ``b`` span the same row space."""
    a = as_binary(a)
    b = as_binary(b)
    if a.shape[1] != b.shape[1]:
        return False
    return bool(in_row_space(a, b).all() and in_row_space(b, a).all())


def weights(m, axis: int) -> np.ndarray:
    return np.asarray(m, dtype=np.int64).sum(axis=axis)


def max_weight(m) -> int:
    """Largest number of ones in any row or column (0 for an empty matrix)."""
    m = np.asarray(m)
    if m.size == 0:
        return 0
    return int(max(weights(m, 0).max(), weights(m, 1).max()))


# -- text format ------------------------------------------------------------


def to_text(m, *, split: int | None = None) -> str:
    """Serialize as ``"rows cols"`` then one line of 0/1 per row.

    ``split`` inserts a ``|`` separator after that many columns.
    """
    m = as_binary(m)
    rows, cols = m.shape
    lines = [f"{rows} {cols}"]
    for row in m:
        bits = "".join("1" if b else "0" for b in row)
        if split is not None and 0 < split < cols:
            bits = bits[:split] + "|" + bits[split:]
        lines.append(bits)
    return "\n".join(lines) + "\n"


def from_text(text: str) -> BinaryMatrix:
    """Parse the matrix text format; ``|`` characters and trailing blank lines are ignored."""
    lines = text.splitlines()
    while lines and not lines[-1].strip():
        lines.pop()
    if not lines:
        raise MatrixParseError("empty input", 1)
    header = lines[0].split()
    if len(header) != 2 or not all(h.isdigit() for h in header):
        raise MatrixParseError(f"expected 'rows cols' header, got {lines[0]!r}", 1)
    rows, cols = (int(h) for h in header)
    body = lines[1:]
    if len(body) != rows:
        raise MatrixParseError(f"expected {rows} rows, found {len(body)}", len(lines))
    out = zeros(rows, cols)
    for idx, line in enumerate(body):
        lineno = idx + 2
        bits = line.strip().replace("|", "")
        if len(bits) != cols:
            raise MatrixParseError(f"expected {cols} bits, found {len(bits)}", lineno)
        bad = set(bits) - {"0", "1"}
        if bad:
            raise MatrixParseError(f"unexpected character {sorted(bad)[0]!r}", lineno)
        out[idx] = np.frombuffer(bits.encode(), dtype=np.uint8) - ord("0")
    return out
