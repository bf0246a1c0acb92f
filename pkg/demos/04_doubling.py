"""Symmetrize an asymmetric code through parallel [[4,2,2]] encoders.

Run with ``python3 demos/04_doubling.py``.
"""

from __future__ import annotations

from homolattice import codes, ftgate, gf2, hprod
from homolattice.circuit import Circuit

rm = codes.reed_muller_15()
print("rm15 generators: X", rm.hx.shape[0], " Z", rm.hz.shape[0])

doubled, encoder = codes.double(rm)
print("doubled: n =", doubled.n, " k =", doubled.k,
      " X", doubled.hx.shape[0], " Z", doubled.hz.shape[0])
print("X and Z generators span the same space:", gf2.same_row_space(doubled.hx, doubled.hz))

# Doubling a distance-3 code gives distance 6.
for name in ("422", "steane"):
    d = codes.distance(codes.get(name), cap=3).min
    dd = codes.distance(codes.double(codes.get(name))[0], cap=2 * d, method="mitm")
    print(f"{name}: {d} -> {dd.min}")

# A product with the doubled code, where the inner [[4,2,2]] layer is also undone
# before a T layer on one Reed-Muller copy. Bands 0, 15, 30, 45 stay together.
prod = hprod.homological_product(codes.steane(), codes.get_complex("double:rm15"))
inner = Circuit(doubled.n, encoder.gates).inverse()
groups = [[j, 15 + j, 30 + j, 45 + j] for j in range(15)]
layer = ftgate.transversal_layer(prod, 1, "T", positions=range(15))
schedule = ftgate.build_protocol(prod, 1, layer, inner_unencode=inner, band_groups=groups)
print("\nT protocol: steps", len(schedule.steps),
      " frames approximate through T:", schedule.propagation_approximate)
