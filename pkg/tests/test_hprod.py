from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings

from homolattice import codes, gf2, hprod
from homolattice.chain_complex import ChainComplex, canonical_delta
from homolattice.hprod import Role

from .conftest import complexes


def test_steane_times_padded_rm(prod147):
    assert (prod147.n, prod147.k) == (147, 1)
    assert gf2.max_weight(prod147.boundary) == 15


def test_trivial_factor_gives_back_boundary(steane):
    p = hprod.homological_product(steane, codes.trivial(1))
    assert np.array_equal(p.boundary, steane.boundary)
    assert p.k == steane.k


def test_j4_squared(prod422):
    assert (prod422.n, prod422.k, gf2.rank(prod422.boundary)) == (16, 4, 6)


def test_grid_indexing(prod147):
    assert prod147.index(2, 5) == 2 * 21 + 5
    assert prod147.coords(47) == (2, 5)


@settings(max_examples=40)
@given(complexes(max_n=6), complexes(max_n=6))
def test_product_invariants(c1, c2):
    p = hprod.homological_product(c1, c2)
    assert not gf2.multiply(p.boundary, p.boundary).any()
    assert p.k == c1.k * c2.k == p.n - 2 * gf2.rank(p.boundary)
    assert gf2.max_weight(p.boundary) <= c1.sparsity + c2.sparsity
    assert hprod.kernel_identity_holds(p)


def test_canonical_product_weights():
    d0 = hprod.canonical_product_boundary(1, 3, 1, 10)
    assert gf2.max_weight(d0) <= 2


def test_half_canonical_keeps_second_factor(steane):
    d = hprod.canonical_product_boundary(1, 3, 1, 3, delta2=steane.boundary)
    # the first k1 * n2 rows hold delta2 on the diagonal block
    assert np.array_equal(d[:7, :7], steane.boundary)
    with pytest.raises(gf2.DimensionMismatch):
        hprod.canonical_product_boundary(1, 3, 1, 2, delta2=steane.boundary)


def test_canonical_product_with_empty_factor():
    d = hprod.canonical_product_boundary(2, 1, 1, 0)
    assert np.array_equal(d, canonical_delta(2, 1))


def test_initial_layout_147():
    layout = hprod.initial_state_layout(1, 3, 1, 10)
    assert layout.count(Role.LOGICAL) == 1
    assert layout.role(0, 0) is Role.LOGICAL
    pairs = layout.bell_pairs()
    assert len(pairs) == 3 * 10
    assert layout.count(Role.BELL) == 2 * 3 * 10
    for a, b in pairs:
        assert layout.partners[a] == b and layout.partners[b] == a
    total = sum(layout.count(r) for r in Role)
    assert total == 7 * 21


def test_initial_layout_without_ancillas():
    layout = hprod.initial_state_layout(2, 0, 3, 0)
    assert layout.count(Role.LOGICAL) == 6


def test_initial_layout_bell_factors():
    layout = hprod.initial_state_layout(0, 1, 0, 1)
    assert layout.grid() == [["zero", "bell"], ["bell", "plus"]]
    assert layout.bell_pairs() == [(1, 2)]


def test_logical_block_is_top_left():
    layout = hprod.initial_state_layout(2, 1, 2, 2)
    for i in range(4):
        for j in range(6):
            assert (layout.role(i, j) is Role.LOGICAL) == (i < 2 and j < 2)


def test_product_report(steane, rm15p):
    rep = hprod.product_params(steane, rm15p, (3, 3), (7, 3)).to_dict()
    assert list(rep) == ["n1", "n2", "k1", "k2", "k", "sparsity", "sparsity_bound",
                         "distance_window_x", "distance_window_z"]
    assert rep["sparsity"] == 15 <= rep["sparsity_bound"]
    assert rep["distance_window_z"] == [3, 9]


def test_window_collapses_for_trivial_factor(steane):
    rep = hprod.product_params(steane, codes.trivial(1), (3, 3), (1, 1))
    assert rep.distance_window_x == (3, 3)


def test_j4_distance_within_window(prod422):
    d = codes.distance(prod422, cap=5)
    rep = hprod.product_params(codes.get_complex("422"), codes.get_complex("422"), (2, 2), (2, 2))
    lo, hi = rep.distance_window_x
    assert lo <= d.x <= hi and lo <= d.z <= hi
