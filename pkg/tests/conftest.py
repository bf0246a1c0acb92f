from __future__ import annotations

import numpy as np
import pytest
from hypothesis import strategies as st

from homolattice import codes, ftgate, gf2, hprod
from homolattice.chain_complex import ChainComplex, canonical_delta
from homolattice.circuit import Circuit, circuit_to_matrix

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
        terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def steane():
    return codes.steane()


@pytest.fixture(scope="session")
def rm15p():
    return codes.padded_reed_muller_appendix()


@pytest.fixture(scope="session")
def j4():
    return codes.get_complex("422")


@pytest.fixture(scope="session")
def prod147(steane, rm15p):
    return hprod.homological_product(steane, rm15p)


@pytest.fixture(scope="session")
def prod422(j4):
    return hprod.homological_product(j4, j4)


@pytest.fixture(scope="session")
def schedule147(prod147):
    return ftgate.build_protocol(prod147, 2, ftgate.transversal_layer(prod147, 2, "H"))


@pytest.fixture(scope="session")
def schedule_steane2(steane):
    product = hprod.homological_product(steane, steane)
    return ftgate.build_protocol(product, 2, ftgate.transversal_layer(product, 2, "S"))


def random_complex(rng: np.random.Generator, n: int, k: int, gates: int) -> ChainComplex:
    """Canonical block form conjugated by a random CNOT circuit."""
    l = (n - k) // 2  # noqa: E741
    n = k + 2 * l
    pairs = []
    while len(pairs) < gates and n > 1:
        c, t = rng.choice(n, size=2, replace=False)
        pairs.append((int(c), int(t)))
    w = circuit_to_matrix(Circuit.cnots(n, pairs))
    d = gf2.multiply(gf2.multiply(w, canonical_delta(k, l)), gf2.invert(w))
    return ChainComplex(d)


@st.composite
def complexes(draw, max_n: int = 8):
    n = draw(st.integers(1, max_n))
    k = draw(st.integers(0, n))
    if (n - k) % 2:
        k += 1
    seed = draw(st.integers(0, 2**32 - 1))
    gates = draw(st.integers(0, 3 * n))
    return random_complex(np.random.default_rng(seed), n, k, gates)


@st.composite
def binary_matrices(draw, max_rows: int = 8, max_cols: int = 8):
    rows = draw(st.integers(0, max_rows))
    cols = draw(st.integers(1, max_cols))
    bits = draw(st.lists(st.integers(0, 1), min_size=rows * cols, max_size=rows * cols))
    return np.array(bits, dtype=np.uint8).reshape(rows, cols)


@st.composite
def invertible_matrices(draw, max_n: int = 8):
    n = draw(st.integers(1, max_n))
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    while True:
        m = rng.integers(0, 2, size=(n, n), dtype=np.uint8)
        if gf2.rank(m) == n:
            return m
