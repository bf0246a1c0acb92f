"""Single-sector chain complexes and the CSS codes they define.

A square binary matrix ``d`` with ``d @ d = 0`` defines a CSS code: its rows
are X checks and its columns are Z checks. Conversely every CSS code with as
many independent X checks as Z checks comes from such a ``d``, and ``d`` is
conjugate to a canonical block form by a CNOT encoder.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import gf2
from .circuit import Circuit, PauliOperator, circuit_to_matrix, synthesize_circuit


class NotAComplex(ValueError):
    """The boundary operator does not square to zero (or is not square)."""


class AsymmetricCode(ValueError):
    """X and Z stabilizer groups have different ranks; pad the code first."""


@dataclass(frozen=True, eq=False)
class ChainComplex:
    """A space ``F_2^n`` with a boundary map ``d`` satisfying ``d^2 = 0``."""

    boundary: np.ndarray
    name: str = ""

    def __post_init__(self):
        d = gf2.frozen(self.boundary)
        if d.ndim != 2 or d.shape[0] != d.shape[1]:
            raise NotAComplex(f"boundary must be square, got shape {d.shape}")
        if gf2.multiply(d, d).any():
            raise NotAComplex("boundary does not square to zero")
        object.__setattr__(self, "boundary", d)

    @property
    def n(self) -> int:
        return self.boundary.shape[0]

    @property
    def rank(self) -> int:
        return gf2.rank(self.boundary)

    @property
    def k(self) -> int:
        return self.n - 2 * self.rank

    @property
    def sparsity(self) -> int:
        return gf2.max_weight(self.boundary)


@dataclass(frozen=True, eq=False)
class CssCode:
    """A CSS code given by X and Z generator matrices (one generator per row).

    Generating sets may be over-complete. ``boundary`` is kept when the code
    was read off a chain complex, so the exact matrix can be recovered.
    """

    hx: np.ndarray
    hz: np.ndarray
    boundary: np.ndarray | None = None
    name: str = ""
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        hx = np.atleast_2d(gf2.frozen(self.hx))
        hz = np.atleast_2d(gf2.frozen(self.hz))
        if hx.shape[1] != hz.shape[1]:
            raise ValueError("X and Z generators act on different qubit counts")
        if gf2.multiply(hx, hz.T).any():
            raise ValueError("X and Z generators do not commute")
        object.__setattr__(self, "hx", hx)
        object.__setattr__(self, "hz", hz)
        if self.boundary is not None:
            object.__setattr__(self, "boundary", gf2.frozen(self.boundary))

    @classmethod
    def trivial(cls, n: int, name: str = "") -> CssCode:
        return cls(gf2.zeros(0, n), gf2.zeros(0, n), boundary=gf2.zeros(n), name=name)

    @property
    def n(self) -> int:
        return self.hx.shape[1]

    @property
    def rank_x(self) -> int:
        return gf2.rank(self.hx)

    @property
    def rank_z(self) -> int:
        return gf2.rank(self.hz)

    @property
    def k(self) -> int:
        return self.n - self.rank_x - self.rank_z

    @property
    def is_symmetric(self) -> bool:
        return self.rank_x == self.rank_z

    @property
    def l(self) -> int:  # noqa: E743
        """Common rank of the X and Z stabilizer groups."""
        rx, rz = self.rank_x, self.rank_z
        if rx != rz:
            raise AsymmetricCode(f"{rx} independent X checks but {rz} independent Z checks")
        return rx

    @property
    def x_stabilizers(self) -> list[PauliOperator]:
        return [PauliOperator.x_type(row) for row in self.hx]

    @property
    def z_stabilizers(self) -> list[PauliOperator]:
        return [PauliOperator.z_type(row) for row in self.hz]

    def with_name(self, name: str) -> CssCode:
        return CssCode(self.hx, self.hz, self.boundary, name, dict(self.metadata))

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "k": self.k,
            "x_stabilizers": [_bits(r) for r in self.hx],
            "z_stabilizers": [_bits(r) for r in self.hz],
        }

    @classmethod
    def from_dict(cls, data: dict) -> CssCode:
        n = int(data["n"])
        hx = _rows(data.get("x_stabilizers", []), n)
        hz = _rows(data.get("z_stabilizers", []), n)
        code = cls(hx, hz)
        if "k" in data and int(data["k"]) != code.k:
            raise ValueError(f"declared k={data['k']} but generators give k={code.k}")
        return code


def _bits(row) -> str:
    return "".join("1" if b else "0" for b in row)


def _rows(strings, n: int) -> np.ndarray:
    out = gf2.zeros(len(strings), n)
    for i, s in enumerate(strings):
        if len(s) != n or set(s) - {"0", "1"}:
            raise ValueError(f"bad stabilizer bitstring {s!r} for n={n}")
        out[i] = [int(c) for c in s]
    return out


def css_from_boundary(c: ChainComplex) -> CssCode:
    """X generators are the nonzero rows of ``d``, Z generators its nonzero columns."""
    d = c.boundary
    hx = d[d.any(axis=1)]
    hz = d.T[d.any(axis=0)]
    return CssCode(hx, hz, boundary=d, name=c.name)


def sparsity(obj) -> int:
    """Largest check weight or per-qubit check count of a concrete representative.

    Accepts a boundary matrix, a :class:`ChainComplex` or a :class:`CssCode`;
    for a code this looks at its generator lists as given.
    """
    if isinstance(obj, ChainComplex):
        return obj.sparsity
    if isinstance(obj, CssCode):
        return max(gf2.max_weight(obj.hx), gf2.max_weight(obj.hz))
    return gf2.max_weight(obj)


def canonical_delta(k: int, l: int) -> gf2.BinaryMatrix:  # noqa: E741
    """Block matrix that is zero except for ``I_l`` in row block 2, column block 3.

    Blocks follow the partition ``(k, l, l)``: logical qubits, then the ``|0>``
    ancillas (nonzero columns), then the ``|+>`` ancillas (nonzero rows).
    """
    n = k + 2 * l
    d0 = gf2.zeros(n)
    for a in range(l):
        d0[k + a, k + l + a] = 1
    return d0


@dataclass(frozen=True, eq=False)
class CanonicalForm:
    """Witness that ``boundary == W @ delta0 @ W^-1`` with ``W`` a CNOT encoder.

    Input qubits ``0..k-1`` carry logical states, ``k..k+l-1`` start in ``|0>``
    and ``k+l..n-1`` in ``|+>``.
    """

    delta0: np.ndarray
    encoder_matrix: np.ndarray
    encoder_circuit: Circuit
    k: int
    l: int  # noqa: E741

    @property
    def n(self) -> int:
        return self.k + 2 * self.l

    @property
    def boundary(self) -> np.ndarray:
        w = self.encoder_matrix
        return gf2.multiply(gf2.multiply(w, self.delta0), gf2.invert(w))

    @property
    def logical_x(self) -> np.ndarray:
        """Encoded X for each input logical qubit (rows of ``W^-1``)."""
        return gf2.invert(self.encoder_matrix)[: self.k]

    @property
    def logical_z(self) -> np.ndarray:
        """Encoded Z for each input logical qubit (columns of ``W``)."""
        return np.ascontiguousarray(self.encoder_matrix[:, : self.k].T)


def canonical_form(obj) -> CanonicalForm:
    """Find a CNOT encoder ``W`` with ``W delta0 W^-1`` equal to the code's boundary.

    For a :class:`ChainComplex` (or a code carrying its boundary) the match is
    exact. A bare :class:`CssCode` is first turned into a boundary by
    :func:`boundary_from_css`.

    Writing ``p_a`` for the pivot columns of ``d``, the columns of ``W`` are:
    ``k`` kernel vectors independent modulo the image, then ``d e_{p_a}``, then
    ``e_{p_a}``. Then ``d W = W delta0`` holds column by column.
    """
    if isinstance(obj, CssCode):
        d = obj.boundary if obj.boundary is not None else boundary_from_css(obj).boundary
    elif isinstance(obj, ChainComplex):
        d = obj.boundary
    else:
        d = ChainComplex(obj).boundary
    n = d.shape[0]
    _, pivots = gf2.row_reduce(d)
    l = len(pivots)  # noqa: E741
    k = n - 2 * l
    image = np.ascontiguousarray(d[:, pivots].T)
    logical = _complement(image, gf2.kernel_basis(d), k)
    unit = gf2.zeros(l, n)
    unit[np.arange(l), pivots] = 1
    w = np.ascontiguousarray(np.vstack([logical, image, unit]).T)
    circuit = synthesize_circuit(w)
    return CanonicalForm(gf2.frozen(canonical_delta(k, l)), gf2.frozen(w), circuit, k, l)


def _complement(base: np.ndarray, candidates: np.ndarray, count: int) -> np.ndarray:
    """Pick ``count`` rows of ``candidates`` independent of ``base`` and of each other."""
    stacked = np.vstack([base, candidates])
    chosen = [i - base.shape[0] for i in gf2.independent_rows(stacked) if i >= base.shape[0]]
    if len(chosen) != count:
        raise AssertionError(f"expected {count} logical vectors, found {len(chosen)}")
    return candidates[chosen]


def boundary_from_css(code: CssCode) -> ChainComplex:
    """A boundary operator whose rows/columns generate the code's X/Z groups.

    Take independent subsets ``s_x`` and ``s_z`` (``l`` rows each) of the given
    generators; then ``d = s_z^T s_x``. This equals ``W delta0 W^-1`` for the
    encoder mapping ``Z_{k+a} -> s_z[a]`` and ``X_{k+l+a} -> s_x[a]``. Each row
    of ``d`` sums at most ``t`` rows of ``s_x`` (``t`` the generator-set
    sparsity), so no row or column of ``d`` exceeds weight ``t**2``.
    """
    l = code.l  # noqa: E741
    sx = code.hx[gf2.independent_rows(code.hx)]
    sz = code.hz[gf2.independent_rows(code.hz)]
    assert sx.shape[0] == sz.shape[0] == l
    d = gf2.multiply(sz.T, sx) if l else gf2.zeros(code.n)
    return ChainComplex(d, name=code.name)


def encoder_matrix_of(form: CanonicalForm) -> np.ndarray:
    """Recompute ``W`` from the emitted circuit (independent of the stored matrix)."""
    return circuit_to_matrix(form.encoder_circuit)
