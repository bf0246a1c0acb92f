"""Homological products of two single-sector complexes.

Qubits of the product live on an ``n1 x n2`` grid; qubit ``(i, j)`` has flat
index ``i * n2 + j``, matching the Kronecker convention of :func:`gf2.tensor`.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import gf2
from .chain_complex import ChainComplex, canonical_delta


@dataclass(frozen=True, eq=False)
class ProductCode:
    factor1: ChainComplex
    factor2: ChainComplex
    boundary: np.ndarray
    k: int
    name: str = ""

    @property
    def n1(self) -> int:
        return self.factor1.n

    @property
    def n2(self) -> int:
        return self.factor2.n

    @property
    def n(self) -> int:
        return self.n1 * self.n2

    @property
    def shape(self) -> tuple[int, int]:
        return self.n1, self.n2

    @property
    def complex(self) -> ChainComplex:
        return ChainComplex(self.boundary, name=self.name)

    def index(self, i: int, j: int) -> int:
        return i * self.n2 + j

    def coords(self, q: int) -> tuple[int, int]:
        return divmod(q, self.n2)


def product_boundary(d1, d2) -> gf2.BinaryMatrix:
    """``d1 (x) I + I (x) d2``."""
    d1 = gf2.as_binary(d1)
    d2 = gf2.as_binary(d2)
    return gf2.tensor(d1, gf2.identity(d2.shape[0])) ^ gf2.tensor(gf2.identity(d1.shape[0]), d2)


def homological_product(c1: ChainComplex, c2: ChainComplex, name: str = "") -> ProductCode:
    d = product_boundary(c1.boundary, c2.boundary)
    k = c1.k * c2.k
    direct = d.shape[0] - 2 * gf2.rank(d)
    if direct != k:
        raise AssertionError(f"k1*k2 = {k} but n - 2 rank = {direct}")
    if not name and c1.name and c2.name:
        name = f"{c1.name}*{c2.name}"
    return ProductCode(c1, c2, gf2.frozen(d), k, name)


def canonical_product_boundary(k1: int, l1: int, k2: int, l2: int, delta2=None) -> gf2.BinaryMatrix:
    """Canonical boundary of the product, or its half-canonical variant.

    Without ``delta2`` both factors are canonical. With ``delta2`` the second
    factor keeps that boundary, giving ``delta1_0 (x) I + I (x) delta2``.
    """
    d1 = canonical_delta(k1, l1)
    if delta2 is None:
        d2 = canonical_delta(k2, l2)
    else:
        d2 = gf2.as_binary(delta2)
        if d2.shape != (k2 + 2 * l2,) * 2:
            raise gf2.DimensionMismatch(
                f"delta2 has shape {d2.shape}, expected {(k2 + 2 * l2,) * 2}"
            )
    return product_boundary(d1, d2)


class Role(enum.Enum):
    LOGICAL = "logical"
    ZERO = "zero"
    PLUS = "plus"
    BELL = "bell"


@dataclass(frozen=True)
class InitialStateLayout:
    """Role of every grid qubit before the product encoder runs."""

    shape: tuple[int, int]
    roles: tuple[Role, ...]
    partners: tuple[int | None, ...]

    def role(self, i: int, j: int) -> Role:
        return self.roles[i * self.shape[1] + j]

    def count(self, role: Role) -> int:
        return sum(r is role for r in self.roles)

    def bell_pairs(self) -> list[tuple[int, int]]:
        return [(q, p) for q, p in enumerate(self.partners) if p is not None and q < p]

    def grid(self) -> list[list[str]]:
        n1, n2 = self.shape
        return [[self.roles[i * n2 + j].value for j in range(n2)] for i in range(n1)]


def initial_state_layout(k1: int, l1: int, k2: int, l2: int) -> InitialStateLayout:
    """Read the unencoded state off the canonical product boundary.

    A weight-1 row of the canonical boundary is a single-qubit X check (``|+>``),
    a weight-1 column a single-qubit Z check (``|0>``). A weight-2 row pairs two
    qubits that also share a weight-2 column: a Bell pair. Every other qubit is
    unconstrained and holds logical information.
    """
    d0 = canonical_product_boundary(k1, l1, k2, l2)
    n1, n2 = k1 + 2 * l1, k2 + 2 * l2
    n = n1 * n2
    roles: list[Role | None] = [None] * n
    partners: list[int | None] = [None] * n

    def assign(q: int, role: Role) -> None:
        if roles[q] is not None and roles[q] is not role:
            raise AssertionError(f"qubit {q} has conflicting roles {roles[q]} and {role}")
        roles[q] = role

    for row in d0:
        support = np.flatnonzero(row)
        if support.size == 1:
            assign(int(support[0]), Role.PLUS)
        elif support.size == 2:
            a, b = (int(s) for s in support)
            assign(a, Role.BELL)
            assign(b, Role.BELL)
            partners[a], partners[b] = b, a
    for col in d0.T:
        support = np.flatnonzero(col)
        if support.size == 1:
            assign(int(support[0]), Role.ZERO)
        elif support.size == 2:
            a, b = (int(s) for s in support)
            if partners[a] != b:
                raise AssertionError(f"weight-2 column on {a},{b} has no matching row")
    roles = [Role.LOGICAL if r is None else r for r in roles]
    return InitialStateLayout((n1, n2), tuple(roles), tuple(partners))


@dataclass(frozen=True)
class ProductReport:
    n1: int
    n2: int
    k1: int
    k2: int
    k: int
    sparsity: int
    sparsity_bound: int
    distance_window_x: tuple[int, int]
    distance_window_z: tuple[int, int]

    @property
    def n(self) -> int:
        return self.n1 * self.n2

    def to_dict(self) -> dict:
        return {
            "n1": self.n1,
            "n2": self.n2,
            "k1": self.k1,
            "k2": self.k2,
            "k": self.k,
            "sparsity": self.sparsity,
            "sparsity_bound": self.sparsity_bound,
            "distance_window_x": list(self.distance_window_x),
            "distance_window_z": list(self.distance_window_z),
        }


def product_params(
    c1: ChainComplex,
    c2: ChainComplex,
    d1: tuple[int, int],
    d2: tuple[int, int],
) -> ProductReport:
    """Parameters of the product plus the bounds it must satisfy.

    ``d1`` and ``d2`` are ``(dX, dZ)`` of the factors, supplied by the caller.
    The product's distance of each type lies in ``[max(d1, d2), d1 * d2]``.
    """
    product = homological_product(c1, c2)
    (d1x, d1z), (d2x, d2z) = d1, d2
    return ProductReport(
        n1=c1.n,
        n2=c2.n,
        k1=c1.k,
        k2=c2.k,
        k=product.k,
        sparsity=gf2.max_weight(product.boundary),
        sparsity_bound=c1.sparsity + c2.sparsity,
        distance_window_x=(max(d1x, d2x), d1x * d2x),
        distance_window_z=(max(d1z, d2z), d1z * d2z),
    )


def kernel_identity_holds(product: ProductCode) -> bool:
    """Check ``ker d = ker d1 (x) ker d2 + im d`` by mutual containment of spans."""
    k1 = gf2.kernel_basis(product.factor1.boundary)
    k2 = gf2.kernel_basis(product.factor2.boundary)
    d = product.boundary
    tensors = np.array([np.kron(u, v) for u in k1 for v in k2], dtype=np.uint8).reshape(-1, product.n)
    rhs = np.vstack([tensors, gf2.image_basis(d)])
    lhs = gf2.kernel_basis(d)
    return gf2.same_row_space(lhs, rhs)
