"""Partial-decode gate protocols on product codes, and fault injection for them.

A protocol unencodes one factor of a product code (one parallel layer per
encoder gate, each gate copied into every band), optionally applies a
transversal layer to the blocks of the factor that stayed encoded, and then
re-encodes. Every step conjugates the code by a Kronecker-structured CNOT
frame, so syndromes measured at any step can be mapped back to the
half-unencoded reference code and decoded there block by block.

Error bands follow the grid convention of :mod:`hprod`: axis-1 band ``a`` is
``{(a, j)}`` and axis-2 band ``a`` is ``{(i, a)}``. Unencoding factor 2 only
moves errors within axis-1 bands, which the encoded factor 1 protects.
"""

from __future__ import annotations

import concurrent.futures
import hashlib
import itertools
import json
from dataclasses import dataclass, field
from functools import cached_property
from math import comb

import numpy as np
from scipy.stats import binomtest

from . import gf2
from .chain_complex import CssCode
from .circuit import CLIFFORD_GATES, Circuit, PauliOperator, apply_gate_frames, inverse_gate, propagate_frames
from .codes import CapExceeded, LowerBound, build_decoder, distance, logical_operators
from .hprod import ProductCode
from .chain_complex import canonical_form

OUTCOMES = ("identity", "stabilizer", "detectable", "logical")
CORRECT_AT = ("none", "end", "every_step")


class NotTransversal(ValueError):
    """A gate couples qubits from different protected bands."""


# -- bands ---------------------------------------------------------------------------


def _shape(grid) -> tuple[int, int]:
    if isinstance(grid, ProductCode):
        return grid.shape
    return tuple(grid)


def band_of(qubit: int, axis: int, grid) -> int:
    _, n2 = _shape(grid)
    i, j = divmod(int(qubit), n2)
    if axis == 1:
        return i
    if axis == 2:
        return j
    raise ValueError(f"axis must be 1 or 2, got {axis}")


def band_qubits(band: int, axis: int, grid) -> np.ndarray:
    n1, n2 = _shape(grid)
    if axis == 1:
        return band * n2 + np.arange(n2)
    return np.arange(n1) * n2 + band


def band_support(pauli: PauliOperator, axis: int, grid) -> set[int]:
    """Smallest set of bands along ``axis`` covering the Pauli's support."""
    n1, n2 = _shape(grid)
    if pauli.n != n1 * n2:
        raise gf2.DimensionMismatch(f"Pauli on {pauli.n} qubits, grid has {n1 * n2}")
    return {band_of(q, axis, (n1, n2)) for q in pauli.support}


@dataclass(frozen=True)
class BandCheck:
    passed: bool
    checked: int
    axis: int
    budget: int
    mode: str
    counterexample: PauliOperator | None = None

    def to_dict(self) -> dict:
        return {
            "check": "band-theorem",
            "axis": self.axis,
            "budget": self.budget,
            "mode": self.mode,
            "checked": self.checked,
            "passed": self.passed,
            "counterexample": None if self.counterexample is None else str(self.counterexample),
        }


def _mm(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """GF(2) product through float32 BLAS; exact while inner dimensions stay below 2**24."""
    out = np.asarray(a, dtype=np.float32) @ np.asarray(b, dtype=np.float32)
    return (out.astype(np.int64) & 1).astype(np.uint8)


def _bad_columns(boundary, lx, lz, qubits, x, z) -> np.ndarray:
    """Columns of the Pauli batch (restricted to ``qubits``) that are nontrivial logicals."""
    quiet = ~(_mm(boundary[qubits, :].T, x).any(axis=0) | _mm(boundary[:, qubits], z).any(axis=0))
    hidden = _mm(lz[:, qubits], x).any(axis=0) | _mm(lx[:, qubits], z).any(axis=0)
    return np.flatnonzero(quiet & hidden)


def _pauli_from(n, qubits, x, z) -> PauliOperator:
    fx = np.zeros(n, dtype=np.uint8)
    fz = np.zeros(n, dtype=np.uint8)
    fx[qubits] = x
    fz[qubits] = z
    return PauliOperator(fx, fz)


def check_band_theorem(
    product: ProductCode,
    axis: int,
    band_budget: int,
    mode: str = "exhaustive",
    *,
    cap: int = 5_000_000,
    samples: int = 100_000,
    seed: int = 0,
    chunk: int = 1 << 16,
) -> BandCheck:
    """Check that no Pauli on at most ``band_budget`` bands is a nontrivial logical.

    Each Pauli is either detected by some check or lies in the stabilizer
    group (both tested against the product's paired logical operators).
    Exhaustive mode enumerates every band subset of size ``band_budget`` and
    all ``4**m`` Paulis on its ``m`` qubits, refusing beyond ``cap`` Paulis.
    Sampled mode draws ``samples`` random subsets with a uniform random Pauli.
    """
    n1, n2 = product.shape
    nbands = n1 if axis == 1 else n2
    boundary = product.boundary
    lx, lz = logical_operators(boundary)
    n = product.n
    budget = min(band_budget, nbands)
    if budget <= 0:
        return BandCheck(True, 0, axis, band_budget, mode)

    if mode == "exhaustive":
        m = budget * (n2 if axis == 1 else n1)
        total = comb(nbands, budget) * 4**m
        if total > cap:
            raise CapExceeded(f"{total} Paulis exceed the enumeration cap {cap}")
        for subset in itertools.combinations(range(nbands), budget):
            qubits = np.concatenate([band_qubits(b, axis, product) for b in subset])
            for start in range(0, 4**m, chunk):
                codes_ = np.arange(start, min(start + chunk, 4**m), dtype=np.int64)
                digits = (codes_[None, :] >> (2 * np.arange(m)[:, None])) & 3
                x = (digits & 1).astype(np.uint8)
                z = (digits >> 1).astype(np.uint8)
                bad = _bad_columns(boundary, lx, lz, qubits, x, z)
                if bad.size:
                    c = bad[0]
                    return BandCheck(False, total, axis, band_budget, mode, _pauli_from(n, qubits, x[:, c], z[:, c]))
        return BandCheck(True, total, axis, band_budget, mode)

    if mode != "sampled":
        raise ValueError(f"unknown mode {mode!r}")
    rng = np.random.default_rng(seed)
    done = 0
    while done < samples:
        size = min(chunk, samples - done)
        # random band subsets via argsort of uniform keys
        subsets = np.argsort(rng.random((size, nbands)), axis=1)[:, :budget]
        mask = np.zeros((size, nbands), dtype=bool)
        np.put_along_axis(mask, subsets, True, axis=1)
        grid = mask[:, :, None] if axis == 1 else mask[:, None, :]
        on = np.broadcast_to(grid, (size, n1, n2)).reshape(size, n).T
        kinds = rng.integers(0, 4, size=(n, size), dtype=np.uint8) * on
        x = kinds & 1
        z = kinds >> 1
        bad = _bad_columns(boundary, lx, lz, np.arange(n), x, z)
        if bad.size:
            c = bad[0]
            return BandCheck(False, done + size, axis, band_budget, mode, PauliOperator(x[:, c], z[:, c]))
        done += size
    return BandCheck(True, samples, axis, band_budget, mode)


# -- error model -----------------------------------------------------------------------


@dataclass(frozen=True)
class ErrorModel:
    """Independent faults with probability ``p`` at every location.

    A fault after a two-qubit gate is one of the 15 nontrivial two-qubit
    Paulis; after a one-qubit gate, or on an idle qubit, one of 3.
    """

    p: float
    idle: bool = True
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= float(self.p) <= 1.0:
            raise ValueError(f"fault probability {self.p} outside [0, 1]")


# -- schedules -------------------------------------------------------------------------


@dataclass(frozen=True)
class Step:
    index: int
    phase: str
    factor: int | None
    factor_gate: tuple | None
    gates: tuple


def _replicate(gate, factor: int, shape: tuple[int, int]) -> tuple:
    n1, n2 = shape
    _, c, t = gate
    if factor == 2:
        return tuple(("CX", i * n2 + c, i * n2 + t) for i in range(n1))
    return tuple(("CX", c * n2 + j, t * n2 + j) for j in range(n2))


def _row_op(m: np.ndarray, gate) -> None:
    _, c, t = gate
    m[c] ^= m[t]


def _col_op(m: np.ndarray, gate) -> None:
    _, c, t = gate
    m[:, t] ^= m[:, c]


class GateSchedule:
    """Step-by-step gate layers with the code each step is encoded in.

    Step 0 is the encoded product code. Each later step applies one layer.
    Frame ``B_s`` maps the reference code (half-unencoded, before or after
    the transversal layer) to step ``s``: the step's boundary is
    ``B_s d_ref B_s^-1``, and ``B_s`` factorizes as ``A_s (x) C_s``.
    """

    def __init__(
        self,
        product: ProductCode,
        unencode_factor: int,
        steps: list[Step],
        mid: int,
        layer: int | None,
        band_groups: np.ndarray,
        decoder_weight: int | None = None,
        name: str = "",
    ):
        self.product = product
        self.unencode_factor = unencode_factor
        self.protected_axis = 3 - unencode_factor
        self.steps = tuple(steps)
        self.mid = mid
        self.layer = layer
        self.band_groups = band_groups
        self.name = name
        self._decoder_weight = decoder_weight
        self._frames = self._build_frames()
        self._cache: dict[int, tuple[np.ndarray, np.ndarray]] = {}

    # structure ------------------------------------------------------------------------

    @property
    def n(self) -> int:
        return self.product.n

    @property
    def shape(self) -> tuple[int, int]:
        return self.product.shape

    @property
    def depth(self) -> int:
        """Index of the last step."""
        return len(self.steps) - 1

    @property
    def reference_step(self) -> int:
        return self.mid if self.layer is None else self.layer

    def reference_of(self, s: int) -> int:
        return self.mid if s <= self.mid else self.reference_step

    @cached_property
    def propagation_approximate(self) -> bool:
        return any(g[0] in ("T", "TDG") for st in self.steps for g in st.gates)

    def circuit(self) -> Circuit:
        return Circuit(self.n, tuple(g for st in self.steps for g in st.gates))

    def to_text(self) -> str:
        lines = [f"QUBITS {self.n}"]
        for st in self.steps[1:]:
            lines.append(f"#STEP {st.index}")
            lines += [" ".join(str(p) for p in g) for g in st.gates]
        return "\n".join(lines) + "\n"

    @property
    def schedule_id(self) -> str:
        return hashlib.sha256(self.to_text().encode("utf-8")).hexdigest()[:16]

    def _build_frames(self):
        n1, n2 = self.shape
        frames: list = [None] * len(self.steps)

        def ident():
            return [gf2.identity(n1), gf2.identity(n1), gf2.identity(n2), gf2.identity(n2)]

        # before the layer: walk back from the midpoint, B_{s-1} = H_s^-1 B_s
        cur = ident()
        frames[self.mid] = [m.copy() for m in cur]
        for s in range(self.mid, 0, -1):
            st = self.steps[s]
            fwd, inv = (0, 1) if st.factor == 1 else (2, 3)
            _row_op(cur[fwd], st.factor_gate)
            _col_op(cur[inv], st.factor_gate)
            frames[s - 1] = [m.copy() for m in cur]
        # after the layer (or the midpoint): B_s = H_s B_{s-1}
        ref = self.reference_step
        cur = ident()
        frames[ref] = [m.copy() for m in cur]
        for s in range(ref + 1, len(self.steps)):
            st = self.steps[s]
            fwd, inv = (0, 1) if st.factor == 1 else (2, 3)
            _row_op(cur[fwd], st.factor_gate)
            _col_op(cur[inv], st.factor_gate)
            frames[s] = [m.copy() for m in cur]
        return frames

    def factor_frames(self, s: int):
        """``(A, A^-1, C, C^-1)`` for step ``s``."""
        return tuple(self._frames[s])

    def frame(self, s: int) -> tuple[np.ndarray, np.ndarray]:
        """Dense ``(B_s, B_s^-1)``."""
        if s not in self._cache:
            a, ai, c, ci = self._frames[s]
            self._cache[s] = (gf2.tensor(a, c), gf2.tensor(ai, ci))
        return self._cache[s]

    @cached_property
    def mid_factors(self) -> tuple[np.ndarray, np.ndarray]:
        """Factor boundaries of the reference code."""
        a, ai, c, ci = self._frames[0]
        d1 = gf2.multiply(gf2.multiply(ai, self.product.factor1.boundary), a)
        d2 = gf2.multiply(gf2.multiply(ci, self.product.factor2.boundary), c)
        return d1, d2

    @cached_property
    def mid_boundary(self) -> np.ndarray:
        d1, d2 = self.mid_factors
        n1, n2 = self.shape
        return gf2.tensor(d1, gf2.identity(n2)) ^ gf2.tensor(gf2.identity(n1), d2)

    def factor_boundaries(self, s: int) -> tuple[np.ndarray, np.ndarray]:
        a, ai, c, ci = self._frames[s]
        d1, d2 = self.mid_factors
        return gf2.multiply(gf2.multiply(a, d1), ai), gf2.multiply(gf2.multiply(c, d2), ci)

    def boundary(self, s: int) -> np.ndarray:
        """Boundary of the code at step ``s``: rows are X checks, columns Z checks."""
        d1, d2 = self.factor_boundaries(s)
        n1, n2 = self.shape
        return gf2.tensor(d1, gf2.identity(n2)) ^ gf2.tensor(gf2.identity(n1), d2)

    # reference-frame decoding data ---------------------------------------------------

    @cached_property
    def logical_indices(self) -> np.ndarray:
        """Indices of the unencoded factor that carry logical blocks."""
        d = self.mid_factors[self.unencode_factor - 1]
        idx = np.flatnonzero(~d.any(axis=0) & ~d.any(axis=1))
        return idx

    @cached_property
    def blocks(self) -> list[np.ndarray]:
        """Qubits of each logical block of the protected factor, in factor order."""
        n1, n2 = self.shape
        if self.unencode_factor == 2:
            return [np.arange(n1) * n2 + m for m in self.logical_indices]
        return [m * n2 + np.arange(n2) for m in self.logical_indices]

    @cached_property
    def ancilla_qubits(self) -> np.ndarray:
        used = np.zeros(self.n, dtype=bool)
        for b in self.blocks:
            used[b] = True
        return np.flatnonzero(~used)

    @cached_property
    def protected_code(self) -> CssCode:
        d = self.mid_factors[self.protected_axis - 1]
        return CssCode(d, d.T, boundary=d, name="protected")

    @cached_property
    def decoder(self):
        code = self.protected_code
        if code.k == 0:
            raise ValueError("protected factor encodes no logical qubits")
        d = distance(code, cap=3).min
        # a code with no logical operator up to weight 3 still corrects one error
        t = 1 if isinstance(d, LowerBound) else (d - 1) // 2
        weight = self._decoder_weight if self._decoder_weight is not None else t + 1
        return build_decoder(code, "lookup", t=t, search_weight=weight)

    @cached_property
    def ancilla_solvers(self) -> tuple[np.ndarray, np.ndarray]:
        """``(Gx, Gz)``: recoveries ``x = Gx bz`` and ``z = Gz bx`` on the ancilla qubits."""
        anc = self.ancilla_qubits
        d = self.mid_boundary[np.ix_(anc, anc)]
        if gf2.rank(d) * 2 != anc.size:
            raise AssertionError("ancilla part of the reference code is not fully constrained")
        return gf2.pseudo_inverse(d.T), gf2.pseudo_inverse(d)

    @cached_property
    def logicals(self) -> tuple[np.ndarray, np.ndarray]:
        return logical_operators(self.product.boundary)

    def band_group_of_qubit(self) -> np.ndarray:
        bands = np.array([band_of(q, self.protected_axis, self.shape) for q in range(self.n)])
        return self.band_groups[bands]


def logical_block_qubits(product: ProductCode, unencode_factor: int, block: int) -> np.ndarray:
    """Qubits of logical block ``block``: the protected factor's copy at that logical index."""
    factor = product.factor2 if unencode_factor == 2 else product.factor1
    form = canonical_form(factor)
    if not 0 <= block < form.k:
        raise ValueError(f"block {block} out of range for k={form.k}")
    n1, n2 = product.shape
    if unencode_factor == 2:
        return np.arange(n1) * n2 + block
    return block * n2 + np.arange(n2)


def transversal_layer(
    product: ProductCode,
    unencode_factor: int,
    gate: str,
    blocks: tuple[int, ...] = (0,),
    positions=None,
) -> list[tuple]:
    """Gates of a transversal layer on logical blocks of the protected factor.

    A one-qubit gate name acts on every qubit of ``blocks[0]`` (or only at
    ``positions``, indices into the protected factor); ``"CX"`` couples
    matching qubits of ``blocks[0]`` and ``blocks[1]``.
    """
    gate = gate.upper()
    first = logical_block_qubits(product, unencode_factor, blocks[0])
    pick = slice(None) if positions is None else np.asarray(positions, dtype=int)
    if gate == "CX":
        second = logical_block_qubits(product, unencode_factor, blocks[1])
        return [("CX", int(a), int(b)) for a, b in zip(first[pick], second[pick])]
    return [(gate, int(q)) for q in first[pick]]


def build_protocol(
    product: ProductCode,
    unencode_factor: int = 2,
    transversal_layer: list | tuple = (),
    *,
    inner_unencode: Circuit | None = None,
    band_groups=None,
    decoder_weight: int | None = None,
    name: str = "",
) -> GateSchedule:
    """Unencode one factor, apply ``transversal_layer``, re-encode.

    ``inner_unencode`` is an extra CNOT circuit on the protected factor run
    after the unencode phase (and undone before re-encoding), for instance
    the [[4,2,2]] layer of a doubled code. ``band_groups`` lists groups of
    protected-axis bands treated as one band when checking that every gate
    stays within a band. Raises :class:`NotTransversal` when a gate does not.
    """
    if unencode_factor not in (1, 2):
        raise ValueError("unencode_factor must be 1 or 2")
    shape = product.shape
    factor = product.factor2 if unencode_factor == 2 else product.factor1
    encoder = canonical_form(factor).encoder_circuit
    protected = 3 - unencode_factor
    nbands = shape[protected - 1]
    groups = np.arange(nbands)
    if band_groups is not None:
        groups = np.full(nbands, -1)
        for g, members in enumerate(band_groups):
            groups[list(members)] = g
        missing = np.flatnonzero(groups < 0)
        groups[missing] = len(band_groups) + np.arange(missing.size)

    plan: list[tuple[str, int | None, tuple | None]] = []
    for g in reversed(encoder.gates):
        plan.append(("unencode", unencode_factor, inverse_gate(g)))
    if inner_unencode is not None:
        if not inner_unencode.is_cnot_only():
            raise ValueError("inner unencoding circuit must contain only CNOTs")
        for g in inner_unencode.gates:
            plan.append(("inner-unencode", protected, g))
    mid = len(plan)
    layer = tuple(Circuit(product.n, tuple(transversal_layer)).gates)
    if layer:
        plan.append(("layer", None, None))
    if inner_unencode is not None:
        for g in inner_unencode.inverse().gates:
            plan.append(("inner-encode", protected, g))
    for g in encoder.gates:
        plan.append(("encode", unencode_factor, g))

    steps = [Step(0, "start", None, None, ())]
    for idx, (phase, fac, g) in enumerate(plan, start=1):
        gates = layer if phase == "layer" else _replicate(g, fac, shape)
        steps.append(Step(idx, phase, fac, g, gates))

    qubit_group = groups[[band_of(q, protected, shape) for q in range(product.n)]]
    for st in steps:
        for g in st.gates:
            if len({int(qubit_group[q]) for q in g[1:]}) > 1:
                raise NotTransversal(f"step {st.index} ({st.phase}) gate {g} spans protected bands")
    if layer:
        used = [q for g in layer for q in g[1:]]
        if len(used) != len(set(used)):
            raise NotTransversal("transversal layer reuses a qubit")

    schedule = GateSchedule(
        product,
        unencode_factor,
        steps,
        mid,
        mid + 1 if layer else None,
        groups,
        decoder_weight=decoder_weight,
        name=name,
    )
    if layer and all(g[0] in CLIFFORD_GATES for g in layer):
        _check_layer_preserves_code(schedule, layer)
    return schedule


def _check_layer_preserves_code(schedule: GateSchedule, layer) -> None:
    d = schedule.mid_boundary
    n = schedule.n
    # one column per generator: X checks are rows of d, Z checks its columns
    x = np.hstack([d.T, gf2.zeros(n)])
    z = np.hstack([gf2.zeros(n), d])
    propagate_frames(layer, x, z)
    if not (gf2.in_row_space(d, x.T).all() and gf2.in_row_space(d.T, z.T).all()):
        raise NotTransversal("transversal layer does not preserve the stabilizer group")


def parse_schedule_text(text: str) -> tuple[int, list[list[tuple]]]:
    """Inverse of :meth:`GateSchedule.to_text`: qubit count and the gate list of each step."""
    layers: list[list[tuple]] = []
    n = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if line.startswith("#STEP"):
            layers.append([])
            continue
        if not line or line.startswith("#"):
            continue
        if n is None:
            n = Circuit.from_text(line).n
            continue
        if not layers:
            raise gf2.MatrixParseError("gate before the first #STEP marker", lineno)
        layers[-1].append(line)
    if n is None:
        raise gf2.MatrixParseError("missing 'QUBITS n' header", 1)
    parsed = []
    for gates in layers:
        c = Circuit.from_text("\n".join([f"QUBITS {n}", *gates]))
        parsed.append(list(c.gates))
    return n, parsed


def sparsity_profile(schedule: GateSchedule) -> list[int]:
    """Largest row or column weight of the boundary at every step (not bounded in general)."""
    return [gf2.max_weight(schedule.boundary(s)) for s in range(len(schedule.steps))]


# -- syndromes and decoding ---------------------------------------------------------------


def measure(schedule: GateSchedule, s: int, x: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Syndrome bits at step ``s``: Z checks (columns) first, then X checks (rows).

    ``x`` and ``z`` have shape ``(n,)`` or ``(n, batch)``.
    """
    d = schedule.boundary(s)
    return np.concatenate([_mm(d.T, x), _mm(d, z)])


def map_syndrome(schedule: GateSchedule, s: int, measured) -> np.ndarray:
    """Re-express step-``s`` syndrome bits against the reference code's checks.

    With ``B = B_s``: Z-check bits map by ``B^T`` and X-check bits by ``B^-1``.
    """
    bits = gf2.as_binary(measured)
    n = schedule.n
    if bits.shape[0] != 2 * n:
        raise gf2.DimensionMismatch(f"expected {2 * n} syndrome bits, got {bits.shape[0]}")
    b, binv = schedule.frame(s)
    return np.concatenate([_mm(b.T, bits[:n]), _mm(binv, bits[n:])])


def decode_reference(schedule: GateSchedule, mapped: np.ndarray, decoder=None):
    """Recovery in the reference frame for a batch of mapped syndromes ``(2n, batch)``.

    Logical blocks go through the protected factor's decoder; the ancilla part
    has no logical qubits and is solved linearly. Returns ``(x, z, ok)``.
    """
    dec = schedule.decoder if decoder is None else decoder
    n = schedule.n
    batch = mapped.shape[1]
    bz, bx = mapped[:n], mapped[n:]
    rx = np.zeros((n, batch), dtype=np.uint8)
    rz = np.zeros((n, batch), dtype=np.uint8)
    ok = np.ones(batch, dtype=bool)
    for block in schedule.blocks:
        syn = np.concatenate([bz[block], bx[block]]).T
        bx_, bz_, good = dec.decode_batch(syn)
        rx[block] = bx_.T
        rz[block] = bz_.T
        ok &= good
    anc = schedule.ancilla_qubits
    if anc.size:
        gx, gz = schedule.ancilla_solvers
        rx[anc] = _mm(gx, bz[anc])
        rz[anc] = _mm(gz, bx[anc])
    return rx, rz, ok


def decode_step(schedule: GateSchedule, s: int, measured, decoder=None):
    """Recovery ``(x, z, ok)`` in the frame of step ``s`` for measured syndrome bits.

    Maps the syndrome to the reference code, decodes there, and conjugates the
    recovery forward: ``x -> B^-T x`` and ``z -> B z``.
    """
    bits = gf2.as_binary(measured)
    single = bits.ndim == 1
    if single:
        bits = bits[:, None]
    mapped = map_syndrome(schedule, s, bits)
    rx, rz, ok = decode_reference(schedule, mapped, decoder)
    b, binv = schedule.frame(s)
    x, z = _mm(binv.T, rx), _mm(b, rz)
    if single:
        return PauliOperator(x[:, 0], z[:, 0]), bool(ok[0])
    return x, z, ok


def to_reference_direct(schedule: GateSchedule, s: int, x: np.ndarray, z: np.ndarray):
    """Carry frames from step ``s`` to its reference step gate by gate (no frame matrices)."""
    x = x.copy()
    z = z.copy()
    ref = schedule.reference_of(s)
    if s <= ref:
        for st in schedule.steps[s + 1 : ref + 1]:
            propagate_frames(st.gates, x, z)
    else:
        for st in reversed(schedule.steps[ref + 1 : s + 1]):
            propagate_frames(st.gates, x, z, inverse=True)
    return x, z


def direct_reference_syndrome(schedule: GateSchedule, s: int, x: np.ndarray, z: np.ndarray) -> np.ndarray:
    rx, rz = to_reference_direct(schedule, s, x, z)
    d = schedule.mid_boundary
    return np.concatenate([_mm(d.T, rx), _mm(d, rz)])


# -- fault locations -------------------------------------------------------------------------


@dataclass(frozen=True)
class Locations:
    """Fault locations: ``step``, first qubit, second qubit (-1 if none) and Pauli count."""

    step: np.ndarray
    q0: np.ndarray
    q1: np.ndarray

    @property
    def size(self) -> int:
        return self.step.size

    @property
    def kinds(self) -> np.ndarray:
        return np.where(self.q1 >= 0, 15, 3)


def fault_locations(schedule: GateSchedule, idle: bool = True) -> Locations:
    steps, q0, q1 = [], [], []
    for st in schedule.steps[1:]:
        busy = np.zeros(schedule.n, dtype=bool)
        for g in st.gates:
            steps.append(st.index)
            q0.append(g[1])
            q1.append(g[2] if len(g) == 3 else -1)
            busy[list(g[1:])] = True
        if idle:
            for q in np.flatnonzero(~busy):
                steps.append(st.index)
                q0.append(int(q))
                q1.append(-1)
    arr = lambda v: np.asarray(v, dtype=np.int64)  # noqa: E731
    return Locations(arr(steps), arr(q0), arr(q1))


@dataclass
class _Events:
    """Single-qubit Pauli insertions: column, step, qubit, x bit, z bit."""

    col: np.ndarray
    step: np.ndarray
    qubit: np.ndarray
    x: np.ndarray
    z: np.ndarray
    band: np.ndarray  # protected band group of each insertion


def _events(schedule: GateSchedule, locs: Locations, cols, loc_idx, paulis) -> _Events:
    cols = np.asarray(cols, dtype=np.int64)
    loc_idx = np.asarray(loc_idx, dtype=np.int64)
    paulis = np.asarray(paulis, dtype=np.int64)
    two = locs.q1[loc_idx] >= 0
    first = np.where(two, paulis >> 2, paulis)
    second = paulis & 3
    col = np.concatenate([cols, cols[two]])
    step = np.concatenate([locs.step[loc_idx], locs.step[loc_idx][two]])
    qubit = np.concatenate([locs.q0[loc_idx], locs.q1[loc_idx][two]])
    kind = np.concatenate([first, second[two]])
    keep = kind != 0
    col, step, qubit, kind = col[keep], step[keep], qubit[keep], kind[keep]
    order = np.argsort(step, kind="stable")
    groups = schedule.band_group_of_qubit()
    return _Events(
        col[order], step[order], qubit[order],
        (kind[order] & 1).astype(np.uint8), (kind[order] >> 1).astype(np.uint8),
        groups[qubit[order]],
    )


@dataclass
class _BatchResult:
    outcome: np.ndarray
    decoder_failed: np.ndarray
    mapping_checked: int = 0
    mapping_mismatches: int = 0
    confinement_violations: int = 0


def _simulate(schedule: GateSchedule, ncols: int, ev: _Events, correct_at: str, *,
              check_mapping: bool = False, check_confinement: bool = False) -> _BatchResult:
    if correct_at not in CORRECT_AT:
        raise ValueError(f"correct_at must be one of {CORRECT_AT}")
    n = schedule.n
    x = np.zeros((n, ncols), dtype=np.uint8)
    z = np.zeros((n, ncols), dtype=np.uint8)
    failed = np.zeros(ncols, dtype=bool)
    dirty = np.zeros(ncols, dtype=bool)
    res = _BatchResult(np.zeros(ncols, dtype=np.int8), failed)
    bounds = np.searchsorted(ev.step, np.arange(len(schedule.steps) + 1))
    qubit_group = schedule.band_group_of_qubit()
    ngroups = int(qubit_group.max()) + 1
    membership = np.zeros((ngroups, n), dtype=np.float32)
    membership[qubit_group, np.arange(n)] = 1

    for s in range(1, len(schedule.steps)):
        for g in schedule.steps[s].gates:
            apply_gate_frames(g, x, z)
        lo, hi = bounds[s], bounds[s + 1]
        if hi > lo:
            np.bitwise_xor.at(x, (ev.qubit[lo:hi], ev.col[lo:hi]), ev.x[lo:hi])
            np.bitwise_xor.at(z, (ev.qubit[lo:hi], ev.col[lo:hi]), ev.z[lo:hi])
        if check_confinement:
            touched = membership @ (x | z).astype(np.float32)
            res.confinement_violations += int(((touched > 0).sum(axis=0) > 1).sum())
        if correct_at == "every_step":
            # a column whose syndrome was zero and that took no new fault still has
            # zero syndrome: checks and errors are conjugated by the same layer
            fresh = np.zeros(ncols, dtype=bool)
            fresh[ev.col[lo:hi]] = True
            active = np.flatnonzero(fresh | dirty)
            if active.size:
                dirty[active] = _correct(schedule, s, x, z, active, failed, res, check_mapping)

    last = len(schedule.steps) - 1
    if correct_at == "end":
        active = np.flatnonzero((x | z).any(axis=0))
        if active.size:
            _correct(schedule, last, x, z, active, failed, res, check_mapping)
    res.outcome[:] = _classify(schedule, x, z)
    return res


def _correct(schedule, s, x, z, active, failed, res, check_mapping) -> np.ndarray:
    sx, sz = x[:, active], z[:, active]
    bits = measure(schedule, s, sx, sz)
    noisy = bits.any(axis=0)
    if not noisy.any():
        return np.zeros(active.size, dtype=bool)
    if check_mapping:
        mapped = map_syndrome(schedule, s, bits)
        direct = direct_reference_syndrome(schedule, s, sx, sz)
        res.mapping_checked += active.size
        res.mapping_mismatches += int((mapped != direct).any(axis=0).sum())
    cols = active[noisy]
    rx, rz, ok = decode_step(schedule, s, bits[:, noisy])
    x[:, cols] ^= rx
    z[:, cols] ^= rz
    failed[cols[~ok]] = True
    after = measure(schedule, s, x[:, cols], z[:, cols]).any(axis=0)
    out = np.zeros(active.size, dtype=bool)
    out[np.flatnonzero(noisy)[after]] = True
    return out


def _classify(schedule: GateSchedule, x: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Outcome index per column (see :data:`OUTCOMES`) for errors after the last step.

    The last step is back in the product code itself, so its own logical
    operators decide between stabilizer and logical residuals.
    """
    s = len(schedule.steps) - 1
    outcome = np.zeros(x.shape[1], dtype=np.int8)
    nonzero = (x | z).any(axis=0)
    outcome[nonzero] = 1
    cols = np.flatnonzero(nonzero)
    if cols.size == 0:
        return outcome
    sx, sz = x[:, cols], z[:, cols]
    detect = measure(schedule, s, sx, sz).any(axis=0)
    lx, lz = schedule.logicals
    hidden = _mm(lz, sx).any(axis=0) | _mm(lx, sz).any(axis=0)
    outcome[cols[detect]] = 2
    outcome[cols[~detect & hidden]] = 3
    return outcome


# -- sweeps and Monte Carlo -------------------------------------------------------------------


@dataclass
class SweepResult:
    schedule_id: str
    correct_at: str
    faults: int
    counts: dict
    decoder_failures: int
    band_histogram: dict
    mapping_checked: int = 0
    mapping_mismatches: int = 0
    confinement_violations: int = 0
    failures: list = field(default_factory=list)

    @property
    def logical_failures(self) -> int:
        return self.counts["logical"]

    def to_dict(self) -> dict:
        return {
            "schedule_id": self.schedule_id,
            "sweep": "single-fault",
            "correct_at": self.correct_at,
            "faults": self.faults,
            "counts": dict(self.counts),
            "logical_failures": self.logical_failures,
            "decoder_failures": self.decoder_failures,
            "band_histogram": dict(self.band_histogram),
            "mapping_checked": self.mapping_checked,
            "mapping_mismatches": self.mapping_mismatches,
            "confinement_violations": self.confinement_violations,
            "failures": list(self.failures),
        }


def _count(outcome: np.ndarray) -> dict:
    return {name: int((outcome == i).sum()) for i, name in enumerate(OUTCOMES)}


def _histogram(bands: np.ndarray) -> dict:
    values, counts = np.unique(bands, return_counts=True)
    return {str(int(v)): int(c) for v, c in zip(values, counts)}


def single_fault_sweep(
    schedule: GateSchedule,
    correct_at: str = "end",
    *,
    idle: bool = True,
    check_mapping: bool = False,
    check_confinement: bool = False,
    chunk: int = 1 << 15,
) -> SweepResult:
    """Inject every nontrivial Pauli at every location, one fault per run."""
    locs = fault_locations(schedule, idle=idle)
    loc_idx = np.repeat(np.arange(locs.size), locs.kinds)
    paulis = np.concatenate([np.arange(1, k + 1) for k in locs.kinds]) if locs.size else np.zeros(0, np.int64)
    total = loc_idx.size
    counts = dict.fromkeys(OUTCOMES, 0)
    hist: dict[str, int] = {}
    out = SweepResult(schedule.schedule_id, correct_at, total, counts, 0, hist)
    groups = schedule.band_group_of_qubit()
    for start in range(0, total, chunk):
        sel = slice(start, min(start + chunk, total))
        li, pa = loc_idx[sel], paulis[sel]
        cols = np.arange(li.size)
        ev = _events(schedule, locs, cols, li, pa)
        res = _simulate(schedule, li.size, ev, correct_at,
                        check_mapping=check_mapping, check_confinement=check_confinement)
        for k, v in _count(res.outcome).items():
            counts[k] += v
        out.decoder_failures += int(res.decoder_failed.sum())
        out.mapping_checked += res.mapping_checked
        out.mapping_mismatches += res.mapping_mismatches
        out.confinement_violations += res.confinement_violations
        for k, v in _histogram(groups[locs.q0[li]]).items():
            hist[k] = hist.get(k, 0) + v
        for c in np.flatnonzero(res.outcome == 3)[: max(0, 10 - len(out.failures))]:
            loc = li[c]
            out.failures.append({"step": int(locs.step[loc]), "q0": int(locs.q0[loc]),
                                 "q1": int(locs.q1[loc]), "pauli": int(pa[c])})
    out.band_histogram = dict(sorted(hist.items(), key=lambda kv: int(kv[0])))
    return out


def simulate_fault_sets(schedule: GateSchedule, fault_sets, correct_at: str = "end", *, idle: bool = True):
    """Outcome names for explicit fault sets, each a list of ``(location index, pauli)`` pairs."""
    locs = fault_locations(schedule, idle=idle)
    cols, li, pa = [], [], []
    for c, faults in enumerate(fault_sets):
        for loc, p in faults:
            cols.append(c)
            li.append(loc)
            pa.append(p)
    ev = _events(schedule, locs, cols, li, pa)
    res = _simulate(schedule, len(fault_sets), ev, correct_at)
    return [OUTCOMES[o] for o in res.outcome]


def _sample_trials(locs: Locations, p: float, seed: int, first: int, count: int):
    cols, li, pa = [], [], []
    kinds = locs.kinds
    for t in range(first, first + count):
        rng = np.random.default_rng([seed, t])
        k = int(rng.binomial(locs.size, p)) if locs.size else 0
        if k == 0:
            continue
        where = np.sort(rng.choice(locs.size, size=k, replace=False))
        which = rng.integers(1, kinds[where] + 1)
        cols.append(np.full(k, t - first))
        li.append(where)
        pa.append(which)
    if not cols:
        empty = np.zeros(0, dtype=np.int64)
        return empty, empty, empty
    return np.concatenate(cols), np.concatenate(li), np.concatenate(pa)


def _dominant_band(ev_cols: np.ndarray, ev_bands: np.ndarray, ncols: int) -> np.ndarray:
    """Band with the most insertions per column (lowest index on ties), -1 if none."""
    out = np.full(ncols, -1, dtype=np.int64)
    if ev_cols.size == 0:
        return out
    pairs, counts = np.unique(np.stack([ev_cols, ev_bands]), axis=1, return_counts=True)
    order = np.lexsort((pairs[1], -counts, pairs[0]))
    cols = pairs[0][order]
    first = np.ones(cols.size, dtype=bool)
    first[1:] = cols[1:] != cols[:-1]
    out[cols[first]] = pairs[1][order][first]
    return out


def _run_chunk(args):
    schedule, model, correct_at, first, count = args
    locs = fault_locations(schedule, idle=model.idle)
    cols, li, pa = _sample_trials(locs, model.p, model.seed, first, count)
    ev = _events(schedule, locs, cols, li, pa)
    res = _simulate(schedule, count, ev, correct_at)
    # attribute each trial to a band using its faults, counted per location
    loc_band = schedule.band_group_of_qubit()[locs.q0[li]] if li.size else np.zeros(0, np.int64)
    dom = _dominant_band(cols, loc_band, count)
    return res.outcome, res.decoder_failed, dom


@dataclass
class RunRecord:
    schedule_id: str
    p: float
    trials: int
    seed: int
    counts: dict
    failure_rate: float
    ci95: tuple[float, float]
    band_histogram: dict
    correct_at: str
    decoder_failures: int
    logical_band_histogram: dict
    propagation_approximate: bool

    def to_dict(self) -> dict:
        return {
            "schedule_id": self.schedule_id,
            "p": self.p,
            "trials": self.trials,
            "seed": self.seed,
            "counts": dict(self.counts),
            "failure_rate": self.failure_rate,
            "ci95": [self.ci95[0], self.ci95[1]],
            "band_histogram": dict(self.band_histogram),
            "correct_at": self.correct_at,
            "decoder_failures": self.decoder_failures,
            "logical_band_histogram": dict(self.logical_band_histogram),
            "propagation_approximate": self.propagation_approximate,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


def wilson_interval(successes: int, trials: int) -> tuple[float, float]:
    ci = binomtest(successes, trials).proportion_ci(confidence_level=0.95, method="wilson")
    return float(ci.low), float(ci.high)


def fault_injection_run(
    schedule: GateSchedule,
    model: ErrorModel,
    trials: int,
    correct_at: str = "end",
    *,
    jobs: int = 1,
    chunk: int = 2048,
) -> RunRecord:
    """Monte Carlo over independent trials; trial ``t`` draws from ``default_rng([seed, t])``.

    Results do not depend on ``jobs`` or ``chunk``: each trial is simulated
    independently and chunks are merged in trial order.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    if correct_at not in CORRECT_AT:
        raise ValueError(f"correct_at must be one of {CORRECT_AT}")
    tasks = [(schedule, model, correct_at, f, min(chunk, trials - f)) for f in range(0, trials, chunk)]
    if jobs > 1 and len(tasks) > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(_run_chunk, tasks))
    else:
        parts = [_run_chunk(t) for t in tasks]
    outcome = np.concatenate([p[0] for p in parts])
    failed = np.concatenate([p[1] for p in parts])
    dom = np.concatenate([p[2] for p in parts])
    counts = _count(outcome)
    logical = counts["logical"]
    return RunRecord(
        schedule_id=schedule.schedule_id,
        p=float(model.p),
        trials=int(trials),
        seed=int(model.seed),
        counts=counts,
        failure_rate=logical / trials,
        ci95=wilson_interval(logical, trials),
        band_histogram=_histogram(dom[dom >= 0]),
        correct_at=correct_at,
        decoder_failures=int(failed.sum()),
        logical_band_histogram=_histogram(dom[(dom >= 0) & (outcome == 3)]),
        propagation_approximate=schedule.propagation_approximate,
    )


def band_confinement(schedule: GateSchedule, *, idle: bool = True) -> SweepResult:
    """Single-fault sweep without correction, counting runs that ever leave one band group."""
    return single_fault_sweep(schedule, "none", idle=idle, check_confinement=True)
