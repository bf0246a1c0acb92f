"""Build the 147-qubit product code and look at its structure.

Run with ``python3 demos/02_product_147.py``.
"""

from __future__ import annotations

import numpy as np

from homolattice import codes, ftgate, gf2, hprod

steane = codes.steane()
rm15p = codes.padded_reed_muller_appendix()
prod = hprod.homological_product(steane, rm15p)

print("n =", prod.n, " k =", prod.k, " grid =", prod.shape)
print("largest check weight:", gf2.max_weight(prod.boundary))
print("kernel identity holds:", hprod.kernel_identity_holds(prod))

# The unencoded product state, read off the canonical product boundary.
layout = hprod.initial_state_layout(1, 3, 1, 10)
for role in hprod.Role:
    print(f"{role.value:8s}", layout.count(role))

# Errors confined to a single band along either axis are never silent logicals.
# Axis 2 has 147 / 21 = 7 qubits per band, so exhaustive enumeration is cheap.
check = ftgate.check_band_theorem(prod, 2, 1)
print("\nsingle band, axis 2:", "passed" if check.passed else "FAILED", f"({check.checked} Paulis)")

# A single-band error of each type on axis 1 (21 qubits per band), sampled.
check = ftgate.check_band_theorem(prod, 1, 1, "sampled", samples=20_000, seed=1)
print("single band, axis 1:", "passed" if check.passed else "FAILED", f"({check.checked} samples)")

weights = np.concatenate([gf2.weights(prod.boundary, 1), gf2.weights(prod.boundary, 0)])
values, counts = np.unique(weights, return_counts=True)
print("\ncheck weight histogram:", dict(zip(values.tolist(), counts.tolist())))
