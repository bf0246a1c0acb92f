"""Walk through the small codes shipped with the package.

Run with ``python3 demos/01_catalog_codes.py``.
"""

from __future__ import annotations

import numpy as np

from homolattice import codes, gf2
from homolattice.chain_complex import canonical_form

# The Steane boundary: every row and column has weight 4.
d7 = codes.steane()
print(gf2.to_text(d7.boundary))
print("n =", d7.n, " k =", d7.k, " sparsity =", d7.sparsity)

# Squaring to zero is what makes rows X checks and columns Z checks.
assert not gf2.multiply(d7.boundary, d7.boundary).any()

# The padded Reed-Muller boundary keeps 6 extra |+> qubits out of every Z check.
d15 = codes.padded_reed_muller_appendix()
print("\npadded RM: n =", d15.n, " rank =", gf2.rank(d15.boundary), " k =", d15.k)
print("Z-check support on padding qubits:", int(d15.boundary[15:].sum()))

# Any symmetric complex is a CNOT circuit away from a block-diagonal form.
form = canonical_form(d15)
print("k =", form.k, " l =", form.l, " encoder CNOTs =", len(form.encoder_circuit))
rebuilt = gf2.multiply(gf2.multiply(form.encoder_matrix, form.delta0), gf2.invert(form.encoder_matrix))
print("W d0 W^-1 reproduces the boundary:", np.array_equal(rebuilt, d15.boundary))

# Distances come from a brute-force oracle.
for name in ("steane", "422", "rm15", "rm15-padded"):
    print(f"{name:12s}", codes.distance(codes.get(name), cap=7, method="mitm"))
