"""Clifford circuits, Pauli operators and stabilizer tableaus.

A CNOT circuit is at once a unitary and an invertible GF(2) matrix. Gate
``("CX", c, t)`` has matrix ``I + e_c e_t^T`` and a circuit ``g_1 ... g_N``
(``g_1`` applied first) has matrix ``G_N ... G_1``. Under that circuit an
X-type row vector ``x`` becomes ``x W^{-1}`` and a Z-type column vector ``z``
becomes ``W z``, so conjugating a boundary operator as ``W d W^{-1}`` carries
its rows (X checks) and columns (Z checks) along with the circuit.

Gates are plain tuples: ``("CX", control, target)`` or ``(name, qubit)`` with
``name`` one of ``H S SDG X Y Z T TDG``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import gf2

Gate = tuple

SINGLE_QUBIT_GATES = frozenset({"H", "S", "SDG", "X", "Y", "Z", "T", "TDG"})
CLIFFORD_GATES = frozenset({"CX", "H", "S", "SDG", "X", "Y", "Z"})
_INVERSE_NAME = {"S": "SDG", "SDG": "S", "T": "TDG", "TDG": "T"}


class Unsupported(ValueError):
    """Raised when an operation meets a gate it cannot handle (e.g. T in a tableau)."""


# -- Pauli operators ----------------------------------------------------------


_PAULI_CHARS = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
_CHAR_OF = {v: k for k, v in _PAULI_CHARS.items()}


@dataclass(frozen=True, eq=False)
class PauliOperator:
    """Phase-free Pauli operator stored as X and Z bit-vectors."""

    x: np.ndarray
    z: np.ndarray

    def __post_init__(self):
        x = gf2.frozen(np.ravel(self.x))
        z = gf2.frozen(np.ravel(self.z))
        if x.shape != z.shape:
            raise ValueError("x and z parts differ in length")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "z", z)

    @classmethod
    def identity(cls, n: int) -> PauliOperator:
        return cls(np.zeros(n, np.uint8), np.zeros(n, np.uint8))

    @classmethod
    def from_string(cls, s: str) -> PauliOperator:
        bits = [_PAULI_CHARS[ch] for ch in s.upper()]
        return cls(np.array([b[0] for b in bits]), np.array([b[1] for b in bits]))

    @classmethod
    def x_type(cls, bits) -> PauliOperator:
        bits = gf2.as_binary(bits)
        return cls(bits, np.zeros_like(bits))

    @classmethod
    def z_type(cls, bits) -> PauliOperator:
        bits = gf2.as_binary(bits)
        return cls(np.zeros_like(bits), bits)

    @classmethod
    def on(cls, n: int, qubits: dict[int, str]) -> PauliOperator:
        """Build from a ``{qubit: "X"|"Y"|"Z"}`` mapping."""
        x = np.zeros(n, np.uint8)
        z = np.zeros(n, np.uint8)
        for q, ch in qubits.items():
            x[q], z[q] = _PAULI_CHARS[ch]
        return cls(x, z)

    @property
    def n(self) -> int:
        return self.x.size

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.x | self.z)

    @property
    def weight(self) -> int:
        return int(np.count_nonzero(self.x | self.z))

    def is_identity(self) -> bool:
        return not (self.x.any() or self.z.any())

    def commutes_with(self, other: PauliOperator) -> bool:
        return (int(self.x @ other.z) + int(self.z @ other.x)) % 2 == 0

    def __mul__(self, other: PauliOperator) -> PauliOperator:
        return PauliOperator(self.x ^ other.x, self.z ^ other.z)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PauliOperator):
            return NotImplemented
        return np.array_equal(self.x, other.x) and np.array_equal(self.z, other.z)

    def __hash__(self) -> int:
        return hash((self.x.tobytes(), self.z.tobytes()))

    def __str__(self) -> str:
        return "".join(_CHAR_OF[(int(a), int(b))] for a, b in zip(self.x, self.z))

    def __repr__(self) -> str:
        return f"PauliOperator({str(self)!r})"


# -- circuits -------------------------------------------------------------------


def _normalize_gate(gate, n: int) -> Gate:
    name, *qubits = gate
    name = str(name).upper()
    qubits = tuple(int(q) for q in qubits)
    if name in ("CX", "CNOT"):
        if len(qubits) != 2:
            raise ValueError(f"CX takes two qubits, got {qubits}")
        if qubits[0] == qubits[1]:
            raise ValueError(f"CX control equals target: {qubits}")
        name = "CX"
    elif name in SINGLE_QUBIT_GATES:
        if len(qubits) != 1:
            raise ValueError(f"{name} takes one qubit, got {qubits}")
    else:
        raise Unsupported(f"unknown gate {name!r}")
    for q in qubits:
        if not 0 <= q < n:
            raise ValueError(f"qubit {q} out of range for {n} qubits")
    return (name, *qubits)


@dataclass(frozen=True)
class Circuit:
    """An ordered gate list on ``n`` qubits. Mostly CNOTs, hence also a GF(2) matrix."""

    n: int
    gates: tuple = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(_normalize_gate(g, self.n) for g in self.gates))

    @classmethod
    def cnots(cls, n: int, pairs: Iterable[tuple[int, int]]) -> Circuit:
        return cls(n, tuple(("CX", c, t) for c, t in pairs))

    def __len__(self) -> int:
        return len(self.gates)

    def __add__(self, other: Circuit) -> Circuit:
        if other.n != self.n:
            raise ValueError("cannot concatenate circuits of different width")
        return Circuit(self.n, self.gates + other.gates)

    def is_cnot_only(self) -> bool:
        return all(g[0] == "CX" for g in self.gates)

    def inverse(self) -> Circuit:
        return Circuit(self.n, tuple(inverse_gate(g) for g in reversed(self.gates)))

    def to_text(self) -> str:
        lines = [f"QUBITS {self.n}"]
        lines += [" ".join(str(part) for part in g) for g in self.gates]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> Circuit:
        n = None
        gates = []
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if n is None:
                if parts[0].upper() != "QUBITS" or len(parts) != 2 or not parts[1].isdigit():
                    raise gf2.MatrixParseError("expected 'QUBITS n' header", lineno)
                n = int(parts[1])
                continue
            try:
                gates.append(_normalize_gate((parts[0], *map(int, parts[1:])), n))
            except ValueError as exc:
                raise gf2.MatrixParseError(str(exc), lineno) from None
        if n is None:
            raise gf2.MatrixParseError("missing 'QUBITS n' header", 1)
        return cls(n, tuple(gates))


def inverse_gate(gate: Gate) -> Gate:
    return (_INVERSE_NAME.get(gate[0], gate[0]), *gate[1:])


def circuit_to_matrix(circuit: Circuit) -> gf2.BinaryMatrix:
    """The ordered transvection product ``G_N ... G_1`` of a CNOT circuit."""
    if not circuit.is_cnot_only():
        raise Unsupported("only CNOT circuits have a GF(2) matrix form")
    w = gf2.identity(circuit.n)
    for _, c, t in circuit.gates:
        # left-multiplying by I + e_c e_t^T adds row t into row c
        w[c] ^= w[t]
    return w


def synthesize_circuit(w) -> Circuit:
    """A CNOT circuit whose matrix form is exactly ``w``.

    Gauss-Jordan elimination with row additions only, pivoting on the lowest
    index. If row operations ``T_1 ... T_m`` reduce ``w`` to the identity then
    ``w = T_1 ... T_m``, and each ``T`` adding row ``j`` into row ``i`` is the
    gate ``CX(i, j)``; the gates are emitted in reverse order of the row ops.
    """
    w = gf2.as_binary(w)
    n, cols = w.shape
    if n != cols:
        raise gf2.DimensionMismatch(f"encoder must be square, got {w.shape}")
    ops: list[tuple[int, int]] = []
    for c in range(n):
        if not w[c, c]:
            below = np.flatnonzero(w[c + 1 :, c])
            if below.size == 0:
                raise gf2.SingularMatrix(f"matrix is singular at column {c}")
            r = c + 1 + int(below[0])
            w[c] ^= w[r]
            ops.append((c, r))
        for r in np.flatnonzero(w[:, c]):
            if r != c:
                w[r] ^= w[c]
                ops.append((int(r), c))
    return Circuit.cnots(n, reversed(ops))


# -- sign-free propagation --------------------------------------------------------


def apply_gate_frames(gate: Gate, x: np.ndarray, z: np.ndarray) -> None:
    """Conjugate a batch of Pauli frames by one gate, in place.

    ``x`` and ``z`` have shape ``(n, batch)``: one row per qubit. T and TDG act
    as the identity here; their non-Pauli residue is not representable.
    """
    name = gate[0]
    if name == "CX":
        _, c, t = gate
        x[t] ^= x[c]
        z[c] ^= z[t]
    elif name == "H":
        q = gate[1]
        tmp = x[q].copy()
        x[q] = z[q]
        z[q] = tmp
    elif name in ("S", "SDG"):
        q = gate[1]
        z[q] ^= x[q]


def propagate_frames(gates: Sequence[Gate], x: np.ndarray, z: np.ndarray, *, inverse: bool = False) -> None:
    """Conjugate frames through ``gates`` (or their inverse), in place."""
    if inverse:
        for g in reversed(gates):
            apply_gate_frames(inverse_gate(g), x, z)
    else:
        for g in gates:
            apply_gate_frames(g, x, z)


def conjugate_pauli(circuit: Circuit, pauli: PauliOperator, inverse: bool = False) -> PauliOperator:
    """Return ``U P U^dag`` (or ``U^dag P U`` when ``inverse``), ignoring phases.

    CX(c, t) sends ``X_c -> X_c X_t`` and ``Z_t -> Z_c Z_t``.
    """
    if pauli.n != circuit.n:
        raise gf2.DimensionMismatch(f"Pauli on {pauli.n} qubits, circuit on {circuit.n}")
    x = pauli.x.astype(np.uint8).reshape(-1, 1).copy()
    z = pauli.z.astype(np.uint8).reshape(-1, 1).copy()
    propagate_frames(circuit.gates, x, z, inverse=inverse)
    return PauliOperator(x[:, 0], z[:, 0])


def product_encoder(enc1: Circuit, enc2: Circuit) -> Circuit:
    """Encoder for the product grid, with matrix form ``W1 (x) W2``.

    Qubit ``(i, j)`` is ``i * n2 + j``. All copies of ``enc2`` (one per fixed
    ``i``) come first, then all copies of ``enc1`` (one per fixed ``j``). Gate
    copies are interleaved so each original gate forms one parallel layer.
    """
    n1, n2 = enc1.n, enc2.n
    gates = []
    for _, c, t in _cnot_gates(enc2):
        gates += [("CX", i * n2 + c, i * n2 + t) for i in range(n1)]
    for _, c, t in _cnot_gates(enc1):
        gates += [("CX", c * n2 + j, t * n2 + j) for j in range(n2)]
    return Circuit(n1 * n2, tuple(gates))


def _cnot_gates(circuit: Circuit):
    if not circuit.is_cnot_only():
        raise Unsupported("encoders must be CNOT circuits")
    return circuit.gates


# -- stabilizer tableau ------------------------------------------------------------


def _g(x1, z1, x2, z2):
    """Exponent of i picked up when multiplying single-qubit Paulis (Aaronson-Gottesman)."""
    x1 = x1.astype(np.int64)
    z1 = z1.astype(np.int64)
    x2 = x2.astype(np.int64)
    z2 = z2.astype(np.int64)
    return np.where(
        (x1 == 1) & (z1 == 1),
        z2 - x2,
        np.where(x1 == 1, z2 * (2 * x2 - 1), np.where(z1 == 1, x2 * (1 - 2 * z2), 0)),
    )


@dataclass(frozen=True, eq=False)
class StabilizerTableau:
    """``n`` independent commuting signed Pauli generators of a stabilizer state."""

    x: np.ndarray
    z: np.ndarray
    signs: np.ndarray

    def __post_init__(self):
        x = gf2.frozen(self.x)
        z = gf2.frozen(self.z)
        signs = gf2.frozen(np.ravel(self.signs))
        if x.ndim != 2 or x.shape != z.shape or x.shape[0] != x.shape[1] or signs.size != x.shape[0]:
            raise ValueError("tableau needs n generators on n qubits")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "signs", signs)
        if gf2.rank(np.hstack([x, z])) != self.n:
            raise ValueError("tableau generators are not independent")
        sym = (gf2.multiply(x, z.T) + gf2.multiply(z, x.T)) % 2
        if sym.any():
            raise ValueError("tableau generators do not commute")

    @classmethod
    def from_paulis(cls, paulis: Sequence[PauliOperator], signs=None) -> StabilizerTableau:
        x = np.array([p.x for p in paulis], dtype=np.uint8)
        z = np.array([p.z for p in paulis], dtype=np.uint8)
        if signs is None:
            signs = np.zeros(len(paulis), np.uint8)
        return cls(x, z, np.asarray(signs, np.uint8))

    @classmethod
    def zero_state(cls, n: int) -> StabilizerTableau:
        return cls(gf2.zeros(n), gf2.identity(n), np.zeros(n, np.uint8))

    @property
    def n(self) -> int:
        return self.x.shape[0]

    def generators(self) -> list[tuple[int, PauliOperator]]:
        return [(int(s), PauliOperator(a, b)) for s, a, b in zip(self.signs, self.x, self.z)]

    def sign_of(self, pauli: PauliOperator) -> int | None:
        """Sign bit of ``pauli`` within the stabilizer group, or ``None`` if absent.

        A returned 0 means ``+P`` stabilizes the state, 1 means ``-P`` does.
        """
        n = self.n
        if pauli.n != n:
            raise gf2.DimensionMismatch("Pauli size does not match tableau")
        gens = np.hstack([self.x, self.z])
        target = np.concatenate([pauli.x, pauli.z])
        # solve coeffs @ gens = target
        r, pivots = gf2.row_reduce(np.hstack([gens.T, target.reshape(-1, 1)]), ncols=n)
        if r[len(pivots):, n].any():
            return None
        coeffs = np.zeros(n, np.uint8)
        for row, p in enumerate(pivots):
            coeffs[p] = r[row, n]
        acc_x = np.zeros(n, np.uint8)
        acc_z = np.zeros(n, np.uint8)
        phase = 0
        for i in np.flatnonzero(coeffs):
            phase += 2 * int(self.signs[i]) + int(_g(self.x[i], self.z[i], acc_x, acc_z).sum())
            acc_x = acc_x ^ self.x[i]
            acc_z = acc_z ^ self.z[i]
        phase %= 4
        if phase not in (0, 2):
            raise AssertionError("commuting generators produced an imaginary phase")
        return phase // 2

    def stabilizes(self, pauli: PauliOperator, sign: int = 0) -> bool:
        return self.sign_of(pauli) == sign


def tableau_run(circuit: Circuit, tableau: StabilizerTableau) -> StabilizerTableau:
    """Evolve a tableau through a Clifford circuit, tracking signs."""
    if circuit.n != tableau.n:
        raise gf2.DimensionMismatch("circuit and tableau sizes differ")
    x = tableau.x.copy()
    z = tableau.z.copy()
    r = tableau.signs.copy()
    for gate in circuit.gates:
        name = gate[0]
        if name not in CLIFFORD_GATES:
            raise Unsupported(f"{name} is not a Clifford gate")
        if name == "CX":
            _, a, b = gate
            r ^= x[:, a] & z[:, b] & (x[:, b] ^ z[:, a] ^ 1)
            x[:, b] ^= x[:, a]
            z[:, a] ^= z[:, b]
            continue
        q = gate[1]
        if name == "H":
            r ^= x[:, q] & z[:, q]
            x[:, q], z[:, q] = z[:, q].copy(), x[:, q].copy()
        elif name == "S":
            r ^= x[:, q] & z[:, q]
            z[:, q] ^= x[:, q]
        elif name == "SDG":
            r ^= x[:, q] & (z[:, q] ^ 1)
            z[:, q] ^= x[:, q]
        elif name == "X":
            r ^= z[:, q]
        elif name == "Z":
            r ^= x[:, q]
        elif name == "Y":
            r ^= x[:, q] ^ z[:, q]
    return StabilizerTableau(x, z, r)
