from __future__ import annotations

import numpy as np
import pytest

from homolattice import codes, ftgate, gf2, hprod
from homolattice.chain_complex import canonical_form
from homolattice.circuit import PauliOperator
from homolattice.codes import CapExceeded
from homolattice.ftgate import ErrorModel, NotTransversal


@pytest.fixture(scope="module")
def prod_steane2(steane):
    return hprod.homological_product(steane, steane)


def test_band_support_examples():
    grid = (3, 4)
    p = PauliOperator.on(12, {0: "X", 5: "Z", 6: "Y"})
    assert ftgate.band_support(p, 1, grid) == {0, 1}
    assert ftgate.band_support(p, 2, grid) == {0, 1, 2}
    assert ftgate.band_support(PauliOperator.identity(12), 1, grid) == set()
    assert list(ftgate.band_qubits(1, 2, grid)) == [1, 5, 9]
    with pytest.raises(gf2.DimensionMismatch):
        ftgate.band_support(PauliOperator.identity(5), 1, grid)


@pytest.mark.parametrize("axis", [1, 2])
def test_band_theorem_exhaustive_small(prod422, axis):
    res = ftgate.check_band_theorem(prod422, axis, 1)
    assert res.passed and res.checked == 4 * 4**4


def test_band_theorem_finds_counterexample(prod422):
    # two bands exceed the guarantee of a distance-2 factor
    res = ftgate.check_band_theorem(prod422, 1, 2, "sampled", samples=20000, seed=1)
    assert not res.passed
    p = res.counterexample
    assert len(ftgate.band_support(p, 1, prod422)) <= 2
    d = prod422.boundary
    assert not gf2.multiply(d.T, p.x[:, None]).any() and not gf2.multiply(d, p.z[:, None]).any()


def test_band_theorem_vacuous_and_cap(prod422, prod147):
    assert ftgate.check_band_theorem(prod422, 1, 0).checked == 0
    with pytest.raises(CapExceeded):
        ftgate.check_band_theorem(prod147, 1, 1)
    with pytest.raises(ValueError):
        ftgate.check_band_theorem(prod422, 1, 1, "bogus")


def test_schedule_endpoints(schedule147, prod147):
    assert np.array_equal(schedule147.boundary(0), prod147.boundary)
    assert np.array_equal(schedule147.boundary(schedule147.depth), prod147.boundary)
    d1, d2 = schedule147.mid_factors
    assert np.array_equal(d1, prod147.factor1.boundary)
    form = canonical_form(prod147.factor2)
    assert np.array_equal(d2, form.delta0)
    assert schedule147.steps[schedule147.layer].phase == "layer"


def test_boundaries_are_conjugates(schedule147):
    for s in (1, 50, schedule147.mid, schedule147.layer, 180):
        b, binv = schedule147.frame(s)
        assert np.array_equal(gf2.multiply(b, binv), gf2.identity(schedule147.n))
        ref = schedule147.mid_boundary
        assert np.array_equal(schedule147.boundary(s), gf2.multiply(gf2.multiply(b, ref), binv))


def test_sparsity_profile(schedule147):
    prof = ftgate.sparsity_profile(schedule147)
    assert len(prof) == len(schedule147.steps)
    assert prof[0] == prof[-1] == 15
    assert min(prof) >= 1


def test_empty_schedule_profile(prod422):
    sched = ftgate.build_protocol(prod422, 2)
    assert sched.layer is None
    empty = ftgate.GateSchedule(prod422, 2, [ftgate.Step(0, "start", None, None, ())], 0, None,
                                np.arange(4))
    assert ftgate.sparsity_profile(empty) == [gf2.max_weight(prod422.boundary)] == [6]


def test_map_syndrome_matches_direct(schedule147):
    rng = np.random.default_rng(7)
    n = schedule147.n
    x = (rng.random((n, 12)) < 0.02).astype(np.uint8)
    z = (rng.random((n, 12)) < 0.02).astype(np.uint8)
    x[:, 0] = z[:, 0] = 0
    for s in range(0, len(schedule147.steps), 7):
        bits = ftgate.measure(schedule147, s, x, z)
        assert np.array_equal(ftgate.map_syndrome(schedule147, s, bits),
                              ftgate.direct_reference_syndrome(schedule147, s, x, z))
    assert not ftgate.map_syndrome(schedule147, 3, np.zeros(2 * n, np.uint8)).any()


def test_map_syndrome_length(schedule147):
    with pytest.raises(gf2.DimensionMismatch):
        ftgate.map_syndrome(schedule147, 0, np.zeros(5, np.uint8))


def test_decode_step_single_errors(schedule147):
    s = 40
    d = schedule147.boundary(s)
    for q in (0, 30, 100, 146):
        e = PauliOperator.on(schedule147.n, {q: "Y"})
        bits = ftgate.measure(schedule147, s, e.x, e.z)
        r, ok = ftgate.decode_step(schedule147, s, bits)
        assert ok
        rx, rz = e.x ^ r.x, e.z ^ r.z
        assert not gf2.multiply(d.T, rx[:, None]).any() and not gf2.multiply(d, rz[:, None]).any()


def test_ancilla_band_fault(schedule147):
    locs = ftgate.fault_locations(schedule147)
    anc = set(schedule147.ancilla_qubits.tolist())
    idx = next(i for i in range(locs.size) if locs.q1[i] < 0 and int(locs.q0[i]) in anc
               and locs.step[i] == schedule147.mid)
    out = ftgate.simulate_fault_sets(schedule147, [[(idx, p)] for p in (1, 2, 3)])
    assert all(o in ("identity", "stabilizer") for o in out)


def test_zero_noise_is_clean(schedule_steane2):
    rec = ftgate.fault_injection_run(schedule_steane2, ErrorModel(0.0, seed=3), 50)
    assert rec.counts["identity"] == 50 and rec.failure_rate == 0.0
    assert rec.band_histogram == {}


def test_two_faults_in_one_band(schedule147):
    locs = ftgate.fault_locations(schedule147)
    group = schedule147.band_group_of_qubit()
    same = [i for i in range(locs.size) if locs.q1[i] < 0 and group[locs.q0[i]] == 0][:2]
    far = [i for i in range(locs.size) if locs.q1[i] < 0 and group[locs.q0[i]] == 3][:1]
    out = ftgate.simulate_fault_sets(schedule147, [[(same[0], 3), (same[1], 3)], [(same[0], 1), (far[0], 2)]])
    assert out[0] in ("identity", "stabilizer")
    assert len(out) == 2


def test_cross_band_gate_rejected(prod422):
    with pytest.raises(NotTransversal):
        ftgate.build_protocol(prod422, 2, [("CX", 0, 4)])
    with pytest.raises(NotTransversal):
        ftgate.build_protocol(prod422, 2, [("H", 0), ("S", 0)])


def test_layer_must_preserve_code(prod_steane2):
    with pytest.raises(NotTransversal):
        ftgate.build_protocol(prod_steane2, 2, [("H", 0)])


def test_schedule_text_roundtrip(schedule147):
    n, layers = ftgate.parse_schedule_text(schedule147.to_text())
    assert n == schedule147.n
    assert layers == [list(st.gates) for st in schedule147.steps[1:]]
    with pytest.raises(gf2.MatrixParseError):
        ftgate.parse_schedule_text("QUBITS 4\nCX 0 1\n")


def test_single_fault_sweep_steane2(schedule_steane2):
    res = ftgate.single_fault_sweep(schedule_steane2, "end")
    assert res.logical_failures == 0
    assert res.faults == sum(ftgate.fault_locations(schedule_steane2).kinds)


def test_confinement_small(schedule_steane2):
    assert ftgate.band_confinement(schedule_steane2).confinement_violations == 0


def test_monte_carlo_increases_with_p(schedule_steane2):
    low = ftgate.fault_injection_run(schedule_steane2, ErrorModel(1e-3, seed=11), 1000)
    high = ftgate.fault_injection_run(schedule_steane2, ErrorModel(1e-2, seed=11), 1000)
    assert low.failure_rate < high.failure_rate
    lo, hi = high.ci95
    assert lo <= high.failure_rate <= hi


def test_monte_carlo_independent_of_jobs(schedule_steane2):
    model = ErrorModel(5e-3, seed=2)
    a = ftgate.fault_injection_run(schedule_steane2, model, 600, chunk=600)
    b = ftgate.fault_injection_run(schedule_steane2, model, 600, jobs=2, chunk=150)
    assert a.to_json() == b.to_json()


def test_error_model_validation():
    with pytest.raises(ValueError):
        ErrorModel(1.5)
