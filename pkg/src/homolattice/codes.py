"""Code catalog, code transformations, distance oracle and lookup decoders.

Paulis are handled as bit-vector pairs ``(x, z)``. For a code with X checks
``hx`` and Z checks ``hz`` the syndrome of ``(x, z)`` is the concatenation
``(hz @ x, hx @ z)``: Z checks flag X errors, X checks flag Z errors.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from importlib import resources
from math import comb

import numpy as np

from . import gf2
from .chain_complex import ChainComplex, CssCode, boundary_from_css, css_from_boundary
from .circuit import Circuit, PauliOperator, conjugate_pauli


class CapExceeded(RuntimeError):
    """An exhaustive search was refused because it exceeds its configured cap."""


class UnknownCode(KeyError):
    pass


# -- catalog ---------------------------------------------------------------------


def _load(name: str) -> np.ndarray:
    text = resources.files("homolattice.data").joinpath(name).read_text(encoding="utf-8")
    return gf2.from_text(text)


def steane() -> ChainComplex:
    """Boundary operator of the 7-qubit Steane code, rows and columns of weight 4."""
    return ChainComplex(_load("steane.txt"), name="steane")


def padded_reed_muller_appendix() -> ChainComplex:
    """21x21 boundary of the Reed-Muller code padded with six ``|+>`` qubits."""
    return ChainComplex(_load("rm15_padded.txt"), name="rm15-padded")


def _rm15_labels() -> np.ndarray:
    # qubit q carries the 4-bit label 15 - q, most significant bit first; this
    # ordering makes the generator spans agree with the bundled padded matrix
    labels = 15 - np.arange(15)
    return np.array([(labels >> (3 - b)) & 1 for b in range(4)], dtype=np.uint8)


def reed_muller_15() -> CssCode:
    """The [[15,1,3]] code with gauge fixed to Z: 4 X generators, 10 Z generators.

    X generators are the weight-8 coordinate rows of the punctured first-order
    Reed-Muller code. Z generators are those rows plus their six pairwise
    products (weight 4).
    """
    rows = _rm15_labels()
    pairs = [rows[a] & rows[b] for a, b in itertools.combinations(range(4), 2)]
    hz = np.vstack([rows, np.array(pairs, dtype=np.uint8)])
    return CssCode(rows, hz, name="rm15", metadata={"transversal_t": True})


# Fig.-3 style [[4,2,2]] encoder: inputs psi1, psi2, |0>, |+> on wires 0..3
_ENCODER_422 = (("CX", 0, 2), ("CX", 3, 1), ("CX", 1, 2), ("CX", 3, 0))


def four_two_two() -> tuple[CssCode, Circuit]:
    """The [[4,2,2]] code {XXXX, ZZZZ} and its four-CNOT encoder.

    Encoder wires: two data inputs, then ``|0>``, then ``|+>``.
    """
    ones = np.ones((1, 4), dtype=np.uint8)
    code = CssCode(ones, ones, boundary=np.ones((4, 4), dtype=np.uint8), name="422")
    return code, Circuit(4, _ENCODER_422)


def trivial(n: int = 1) -> ChainComplex:
    return ChainComplex(gf2.zeros(n), name=f"trivial{n}")


# -- transformations --------------------------------------------------------------


def rotate(code: CssCode) -> CssCode:
    """Swap the roles of X and Z generators."""
    boundary = None if code.boundary is None else code.boundary.T
    name = f"rot:{code.name}" if code.name else ""
    return CssCode(code.hz, code.hx, boundary=boundary, name=name, metadata=dict(code.metadata))


def pad(code: CssCode, extra: int | None = None, *, flip: bool = False) -> CssCode:
    """Append ``extra`` qubits in ``|+>``, each with its own single-qubit X check.

    ``extra`` defaults to the rank deficit of the X group. A code with more X
    than Z checks raises unless ``flip`` is set, in which case ``|0>`` qubits
    with single-qubit Z checks are appended instead.
    """
    rx, rz = code.rank_x, code.rank_z
    if rx > rz and not flip:
        raise ValueError(f"code has more X checks ({rx}) than Z checks ({rz}); pass flip=True")
    deficit = abs(rz - rx)
    if extra is None:
        extra = deficit
    if extra < 0:
        raise ValueError("extra must be non-negative")
    if extra == 0:
        return code
    n = code.n
    ancilla = np.hstack([gf2.zeros(extra, n), gf2.identity(extra)])
    grow = np.hstack([code.hz, gf2.zeros(code.hz.shape[0], extra)])
    keep = np.hstack([code.hx, gf2.zeros(code.hx.shape[0], extra)])
    name = f"{code.name}+{extra}" if code.name else ""
    if flip:
        return CssCode(keep, np.vstack([grow, ancilla]), name=name, metadata=dict(code.metadata))
    return CssCode(np.vstack([keep, ancilla]), grow, name=name, metadata=dict(code.metadata))


def double(code: CssCode) -> tuple[CssCode, Circuit]:
    """Symmetrize a CSS code with ``n`` parallel copies of the [[4,2,2]] encoder.

    Block ``b`` (``b = 0..3``) occupies qubits ``b*n .. b*n + n-1``. Before
    encoding, block 0 holds the code, block 1 its rotation, block 2 is ``|0>``
    and block 3 is ``|+>``; position ``j`` of every block feeds one encoder
    copy. The returned generators are the input stabilizers conjugated through
    that circuit, so X and Z counts agree and the X and Z supports mirror each
    other.
    """
    n = code.n
    gates = []
    for g in _ENCODER_422:
        gates += [("CX", g[1] * n + j, g[2] * n + j) for j in range(n)]
    circuit = Circuit(4 * n, tuple(gates))

    def place(rows, block):
        out = gf2.zeros(rows.shape[0], 4 * n)
        out[:, block * n : (block + 1) * n] = rows
        return out

    eye = gf2.identity(n)
    x_in = np.vstack([place(code.hx, 0), place(code.hz, 1), place(eye, 3)])
    z_in = np.vstack([place(code.hz, 0), place(code.hx, 1), place(eye, 2)])
    hx = np.array([conjugate_pauli(circuit, PauliOperator.x_type(r)).x for r in x_in], dtype=np.uint8)
    hz = np.array([conjugate_pauli(circuit, PauliOperator.z_type(r)).z for r in z_in], dtype=np.uint8)
    name = f"double:{code.name}" if code.name else ""
    doubled = CssCode(hx, hz, name=name)
    return CssCode(hx, hz, boundary=boundary_from_css(doubled).boundary, name=name), circuit


# -- naming -------------------------------------------------------------------------


CATALOG_NAMES = ("steane", "rm15", "rm15-padded", "422", "trivial1")


def get(name: str) -> CssCode:
    """Look up a catalog code, including ``double:<name>`` and ``trivial<n>``."""
    if name.startswith("double:"):
        return double(get(name[len("double:") :]))[0]
    if name == "steane":
        return css_from_boundary(steane())
    if name == "rm15":
        return reed_muller_15()
    if name == "rm15-padded":
        return css_from_boundary(padded_reed_muller_appendix())
    if name == "422":
        return four_two_two()[0]
    if name.startswith("trivial") and name[len("trivial") :].isdigit():
        c = trivial(int(name[len("trivial") :]))
        return css_from_boundary(c)
    raise UnknownCode(name)


def get_complex(name: str) -> ChainComplex:
    """Catalog entry as a chain complex (asymmetric codes raise ``AsymmetricCode``)."""
    code = get(name)
    if code.boundary is None:
        return boundary_from_css(code)
    return ChainComplex(code.boundary, name=code.name)


def as_code(obj) -> CssCode:
    """Accept a ``CssCode``, a ``ChainComplex`` or anything with a ``boundary``."""
    if isinstance(obj, CssCode):
        return obj
    if isinstance(obj, ChainComplex):
        return css_from_boundary(obj)
    boundary = getattr(obj, "boundary", obj)
    return css_from_boundary(ChainComplex(boundary, name=getattr(obj, "name", "")))


# -- logical operators ----------------------------------------------------------------


def logical_operators(obj) -> tuple[np.ndarray, np.ndarray]:
    """Paired logical representatives ``(lx, lz)`` with ``lx @ lz.T = I`` over GF(2).

    ``lx`` rows are X-type operators commuting with every Z check and
    independent of the X checks; ``lz`` rows are the Z-type counterparts.
    """
    code = as_code(obj)
    lx = _quotient(gf2.kernel_basis(code.hz), code.hx, code.k)
    lz = _quotient(gf2.kernel_basis(code.hx), code.hz, code.k)
    if code.k == 0:
        return lx, lz
    pairing = gf2.multiply(lx, lz.T)
    lz = gf2.multiply(gf2.invert(pairing).T, lz)
    return lx, lz


def _quotient(kernel: np.ndarray, stabilizers: np.ndarray, k: int) -> np.ndarray:
    base = gf2.row_basis(stabilizers)
    stacked = np.vstack([base, kernel])
    picked = [i - base.shape[0] for i in gf2.independent_rows(stacked) if i >= base.shape[0]]
    if len(picked) != k:
        raise AssertionError(f"found {len(picked)} logical operators, expected {k}")
    return np.ascontiguousarray(kernel[picked]).reshape(k, stabilizers.shape[1])


def syndrome(code: CssCode, x, z) -> np.ndarray:
    """Syndrome bits ``(hz @ x, hx @ z)`` of the Pauli with bit vectors ``x`` and ``z``."""
    return np.concatenate([gf2.multiply(code.hz, x), gf2.multiply(code.hx, z)])


def classify(code: CssCode, x, z) -> str:
    """One of ``identity``, ``stabilizer``, ``detectable`` or ``logical``."""
    x = gf2.as_binary(x)
    z = gf2.as_binary(z)
    if not x.any() and not z.any():
        return "identity"
    if syndrome(code, x, z).any():
        return "detectable"
    if gf2.in_row_space(code.hx, x)[0] and gf2.in_row_space(code.hz, z)[0]:
        return "stabilizer"
    return "logical"


# -- distance oracle -------------------------------------------------------------------


@dataclass(frozen=True)
class LowerBound:
    """The search found no logical operator of weight ``<= cap``: distance exceeds it."""

    cap: int

    def __str__(self) -> str:
        return f">{self.cap}"


@dataclass(frozen=True)
class Distance:
    x: int | LowerBound | None
    z: int | LowerBound | None

    @property
    def exact(self) -> bool:
        return isinstance(self.x, int) and isinstance(self.z, int)

    @property
    def min(self) -> int | LowerBound | None:
        if self.x is None:
            return None
        if self.exact:
            return min(self.x, self.z)
        values = [v for v in (self.x, self.z) if isinstance(v, int)]
        if values:
            return min(values)
        return LowerBound(min(self.x.cap, self.z.cap))

    def as_tuple(self):
        return self.x, self.z

    def to_dict(self) -> dict:
        def enc(v):
            if isinstance(v, LowerBound):
                return {"lower_bound": v.cap + 1}
            return v

        return {"dx": enc(self.x), "dz": enc(self.z)}


def _pack_columns(m: np.ndarray) -> np.ndarray:
    """Pack each column of ``m`` into bytes: shape ``(cols, ceil(rows/8))``."""
    if m.shape[0] == 0:
        return np.zeros((m.shape[1], 1), dtype=np.uint8)
    return np.packbits(m.T.astype(np.uint8), axis=1)


def _combos(n: int, w: int) -> np.ndarray:
    if w == 0:
        return np.zeros((1, 0), dtype=np.intp)
    return np.array(list(itertools.combinations(range(n), w)), dtype=np.intp).reshape(-1, w)


def _xor_keys(packed: np.ndarray, combos: np.ndarray) -> np.ndarray:
    out = np.zeros((combos.shape[0], packed.shape[1]), dtype=np.uint8)
    for c in range(combos.shape[1]):
        out ^= packed[combos[:, c]]
    return out


def _min_logical_weight_plain(checks, logicals, n, cap, limit):
    """Smallest weight vector with zero syndrome under ``checks`` and nonzero logical signature."""
    if logicals.shape[0] == 0:
        return None
    pc = _pack_columns(checks)
    pl = _pack_columns(logicals)
    for w in range(1, cap + 1):
        if comb(n, w) > limit:
            raise CapExceeded(f"{comb(n, w)} weight-{w} candidates exceed the limit {limit}")
        combos = _combos(n, w)
        quiet = ~_xor_keys(pc, combos).any(axis=1)
        if quiet.any() and _xor_keys(pl, combos[quiet]).any(axis=1).any():
            return w
    return LowerBound(cap)


def _min_logical_weight_mitm(checks, logicals, n, cap, limit):
    """Meet in the middle: pair half-weight vectors with equal syndrome, different logical class."""
    if logicals.shape[0] == 0:
        return None
    half = (cap + 1) // 2
    total = sum(comb(n, w) for w in range(half + 1))
    if total > limit:
        raise CapExceeded(f"{total} half-weight candidates exceed the limit {limit}")
    pc = _pack_columns(checks)
    pl = _pack_columns(logicals)
    syn, sig, wts = [], [], []
    for w in range(half + 1):
        combos = _combos(n, w)
        syn.append(_xor_keys(pc, combos))
        sig.append(_xor_keys(pl, combos))
        wts.append(np.full(combos.shape[0], w))
    syn = np.vstack(syn)
    sig = np.vstack(sig)
    wts = np.concatenate(wts)
    _, gid = np.unique(syn, axis=0, return_inverse=True)
    _, lid = np.unique(sig, axis=0, return_inverse=True)
    gid = gid.ravel()
    lid = lid.ravel()
    # lightest representative of every (syndrome, logical class) pair
    order = np.lexsort((wts, lid, gid))
    g, l_, w = gid[order], lid[order], wts[order]
    first = np.ones(order.size, dtype=bool)
    first[1:] = (g[1:] != g[:-1]) | (l_[1:] != l_[:-1])
    g, w = g[first], w[first]
    # two lightest distinct classes within each syndrome group
    order = np.lexsort((w, g))
    g, w = g[order], w[order]
    same = g[1:] == g[:-1]
    lead = np.ones(g.size, dtype=bool)
    lead[1:] = ~same
    pair_start = lead[:-1] & same
    if not pair_start.any():
        return LowerBound(cap)
    best = int((w[:-1][pair_start] + w[1:][pair_start]).min())
    return best if best <= cap else LowerBound(cap)


def distance(obj, cap: int = 5, *, method: str = "auto", limit: int = 20_000_000) -> Distance:
    """Minimum weight of a nontrivial X-type and Z-type logical operator.

    Each entry is exact when at most ``cap``; otherwise a :class:`LowerBound`.
    ``method`` is ``plain`` (enumerate weights ``1..cap``), ``mitm``
    (meet in the middle over weights up to ``ceil(cap/2)``) or ``auto``,
    which picks plain enumeration for ``cap <= 5``. Codes with ``k = 0`` give
    ``None`` entries. Raises :class:`CapExceeded` beyond ``limit`` candidates.
    """
    code = as_code(obj)
    if method == "auto":
        method = "plain" if cap <= 5 else "mitm"
    search = {"plain": _min_logical_weight_plain, "mitm": _min_logical_weight_mitm}[method]
    lx, lz = logical_operators(code)
    n = code.n
    # X-type logicals commute with Z checks and are caught by some Z logical
    dx = search(code.hz, lz, n, cap, limit)
    dz = search(code.hx, lx, n, cap, limit)
    return Distance(dx, dz)


# -- decoders -------------------------------------------------------------------------


def _paulis_of_weight(n: int, w: int):
    """All ``(x, z)`` of weight ``w`` in increasing (x-bits, z-bits) lexicographic order."""
    out = []
    for support in itertools.combinations(range(n), w):
        for kinds in itertools.product((1, 2, 3), repeat=w):
            x = np.zeros(n, dtype=np.uint8)
            z = np.zeros(n, dtype=np.uint8)
            for q, kind in zip(support, kinds):
                x[q] = kind & 1
                z[q] = kind >> 1
            out.append((x.tobytes(), z.tobytes(), x, z))
    out.sort(key=lambda item: (item[0], item[1]))
    return [(x, z) for _, _, x, z in out]


@dataclass
class Decoder:
    """Maps syndromes to recoveries.

    ``t`` is the guaranteed correctable weight ``floor((d-1)/2)``;
    ``search_weight`` is how far the table (or on-demand search) reaches. For a
    distance-2 code ``t`` is 0: weight-1 errors get a matching recovery but the
    residual may be a logical operator (detection only).
    """

    code: CssCode
    strategy: str
    t: int
    search_weight: int
    table: dict = field(default_factory=dict)
    limit: int = 2_000_000

    @property
    def n(self) -> int:
        return self.code.n

    @property
    def syndrome_length(self) -> int:
        return self.code.hz.shape[0] + self.code.hx.shape[0]

    def syndrome(self, x, z) -> np.ndarray:
        return syndrome(self.code, x, z)

    def decode(self, bits) -> PauliOperator | None:
        """Recovery for the syndrome ``bits``, or ``None`` when none is known."""
        bits = gf2.as_binary(bits).ravel()
        if bits.size != self.syndrome_length:
            raise gf2.DimensionMismatch(f"expected {self.syndrome_length} syndrome bits, got {bits.size}")
        key = bits.tobytes()
        if key not in self.table and self.strategy == "minweight":
            self._search(key)
        hit = self.table.get(key)
        if hit is None:
            return None
        return PauliOperator(hit[0], hit[1])

    def decode_batch(self, bits: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Decode syndromes given one per row. Returns ``(x, z, ok)`` with recoveries per row."""
        bits = gf2.as_binary(bits)
        count = bits.shape[0]
        rx = np.zeros((count, self.n), dtype=np.uint8)
        rz = np.zeros((count, self.n), dtype=np.uint8)
        ok = np.zeros(count, dtype=bool)
        if count == 0:
            return rx, rz, ok
        uniq, inverse = np.unique(bits, axis=0, return_inverse=True)
        inverse = inverse.ravel()
        for u, row in enumerate(uniq):
            rec = self.decode(row)
            if rec is None:
                continue
            sel = inverse == u
            rx[sel] = rec.x
            rz[sel] = rec.z
            ok[sel] = True
        return rx, rz, ok

    def _search(self, key: bytes) -> None:
        target = np.frombuffer(key, dtype=np.uint8)
        for w in range(self.search_weight + 1):
            count = comb(self.n, w) * 3**w
            if count > self.limit:
                raise CapExceeded(f"{count} weight-{w} Paulis exceed the limit {self.limit}")
            for x, z in _paulis_of_weight(self.n, w):
                if np.array_equal(self.syndrome(x, z), target):
                    self.table[key] = (x, z)
                    return
        self.table[key] = None


def build_decoder(
    obj,
    strategy: str = "lookup",
    *,
    t: int | None = None,
    search_weight: int | None = None,
    limit: int = 2_000_000,
    distance_cap: int = 5,
) -> Decoder:
    """Lookup table (or on-demand search) decoder with lexicographic tie-breaking.

    Among minimum-weight recoveries the one with the smallest X bitstring wins,
    then the smallest Z bitstring. ``t`` defaults to ``floor((d-1)/2)`` from the
    distance oracle; ``search_weight`` defaults to ``max(t, 1)``.
    """
    code = as_code(obj)
    if t is None:
        d = distance(code, cap=distance_cap).min
        if d is None:
            t = code.n
        elif isinstance(d, LowerBound):
            t = d.cap // 2
        else:
            t = (d - 1) // 2
        if code.k == 0:
            t = code.n
    if search_weight is None:
        search_weight = max(min(t, code.n), 1) if code.k else code.n
    dec = Decoder(code, strategy, t, search_weight, limit=limit)
    if strategy == "minweight":
        return dec
    if strategy != "lookup":
        raise ValueError(f"unknown decoder strategy {strategy!r}")
    size = sum(comb(code.n, w) * 3**w for w in range(search_weight + 1))
    if size > limit:
        raise CapExceeded(f"lookup table would hold {size} errors, limit {limit}")
    for w in range(search_weight + 1):
        for x, z in _paulis_of_weight(code.n, w):
            dec.table.setdefault(dec.syndrome(x, z).tobytes(), (x, z))
    return dec
