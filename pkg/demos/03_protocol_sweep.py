"""Unencode one factor, apply a transversal gate, re-encode, and hunt for bad faults.

Run with ``python3 demos/03_protocol_sweep.py``. Takes a few seconds.
"""

from __future__ import annotations

from homolattice import codes, ftgate, hprod

prod = hprod.homological_product(codes.steane(), codes.padded_reed_muller_appendix())

# Unencode the padded Reed-Muller factor so Steane blocks carry the logical qubit,
# then apply transversal H on the block that holds it.
layer = ftgate.transversal_layer(prod, 2, "H")
schedule = ftgate.build_protocol(prod, 2, layer)
print("steps:", len(schedule.steps), " gates:", len(schedule.circuit()))

profile = ftgate.sparsity_profile(schedule)
print("check weight at start / middle / end:", profile[0], profile[schedule.mid], profile[-1])
print("largest check weight along the way:", max(profile))

# Every single fault, every Pauli, corrected once at the end.
end = ftgate.single_fault_sweep(schedule, "end")
print("\nend correction:", end.faults, "faults,", end.logical_failures, "logical failures")

# Same sweep, correcting after every step with syndromes mapped to the reference code.
every = ftgate.single_fault_sweep(schedule, "every_step", check_mapping=True)
print("every-step correction:", every.logical_failures, "logical failures,",
      every.mapping_mismatches, "mapping mismatches out of", every.mapping_checked)

# Random noise at every gate and idle location. With tens of thousands of
# locations, two faults in different bands are already common at p = 1e-4.
for p in (1e-5, 1e-4):
    rec = ftgate.fault_injection_run(schedule, ftgate.ErrorModel(p, seed=1), 2000)
    lo, hi = rec.ci95
    print(f"p={p:g}: failure rate {rec.failure_rate:.4f}  95% CI [{lo:.4f}, {hi:.4f}]")
