import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from limb import estimators as est
from limb.analysis import sum_weighted
from limb.schedules import LearningRateSchedule, UpdateRateSchedule, parse_schedule
from limb.thermo import BOLTZMANN

LN2 = math.log(2)
LR = LearningRateSchedule()
D16 = 2.0**-16
BRAIN = est.Workload(1e28, 1e15, D16)
KT300 = BOLTZMANN * 300.0


def poly(g):
    return UpdateRateSchedule("polynomial", g)


def unit_workload(delta=1.0):
    return est.Workload(1.0, 0.0, delta)


# values frozen from mpmath evaluations of the closed forms
MP = {
    "lim_a_g1_d16": 47891.28196269267,
    "zeta3_over_zeta2": 0.7307629694014385,
    "zeta2001_over_zeta1001": 0.001643048998982368,
    "zeta12_over_zeta11": 0.9997520204978326,
    "lb_closed_g2": 1.0227925448764998,
    "lb_closed_g10": 0.6965956985653296,
    "lb_finite_g2": 1.1876152236673611,
    "lb_finite_g10": 0.6969405503658680,
    "lim_a_exp_g1": 0.7881331674844335,
    "lim_a_exp_g5": 0.9966234342501140,
    "barrier_g1_n2p20": 24.952973053479005,
}


def test_workload_validation():
    assert est.Workload.from_bits(1, 1, 16).delta == D16
    assert est.Workload.from_bits(1, 1, 16).bits == 16
    for bad in (dict(flops=-1, params=1), dict(flops=1, params=-1), dict(flops=1, params=1, delta=0),
                dict(flops=1, params=1, delta=1.5)):
        with pytest.raises(ValueError):
            est.Workload(**bad)
    with pytest.raises(ValueError):
        est.Workload.from_bits(1, 1, 0)


def test_asymptotic_barrier():
    assert est.asymptotic_barrier(0.5) == pytest.approx(LN2)
    assert est.asymptotic_barrier(D16) == pytest.approx(16 * LN2)
    assert est.asymptotic_barrier(D16) == pytest.approx(11.0904, abs=1e-4)
    assert est.asymptotic_barrier(1.0) == 0.0
    with pytest.raises(ValueError):
        est.asymptotic_barrier(0.0)


def test_barrier_profile_examples():
    assert est.barrier_profile(LR, poly(10.0), D16, 1) == pytest.approx(LN2, abs=1e-15)
    got = est.barrier_profile(LR, poly(1.0), D16, 2**20)
    assert got == pytest.approx(MP["barrier_g1_n2p20"], rel=1e-13)
    # decomposition: log 2 + 40 log 2 + log tanh(2^-5)
    assert got == pytest.approx(LN2 + 40 * LN2 + math.log(math.tanh(2.0**-5)), rel=1e-14)
    assert est.barrier_profile(LR, UpdateRateSchedule("exp_unit"), D16, 10) == pytest.approx(LN2 + 10, rel=1e-15)


def test_barrier_profile_landauer_limit():
    # eps = 1, r = 1, tilt -> inf
    assert est.barrier_profile(LR, poly(1.0), 1e-300, 1) == pytest.approx(LN2, rel=1e-15)


def test_barrier_grows_like_log_n():
    g = 2.0
    b1 = est.barrier_profile(LR, poly(g), 1e-12, 1)
    bn = est.barrier_profile(LR, poly(g), 1e-12, 10**4)
    assert bn - b1 == pytest.approx((1 + g) * math.log(1e4), rel=1e-6)


def test_lim_a_examples():
    e = est.lim_a_numeric(BRAIN, LR, poly(1.0))
    assert e.dynamic_kt_per_op == pytest.approx(MP["lim_a_g1_d16"], rel=1e-9)
    assert e.dynamic_kt_per_op == pytest.approx(4.7893e4, rel=1e-4)
    assert e.total_joules == pytest.approx(1.98e12, rel=5e-3)
    assert est.lim_a_numeric(unit_workload(), LR, poly(1.0)).dynamic_kt_per_op == pytest.approx(
        MP["zeta3_over_zeta2"], rel=1e-9)


def test_lim_a_closed_examples():
    w = unit_workload()
    assert est.lim_a_closed_poly(w, 1.0).dynamic_kt_per_op == pytest.approx(MP["zeta3_over_zeta2"], rel=1e-12)
    assert est.lim_a_closed_poly(w, 1e-3).dynamic_kt_per_op == pytest.approx(MP["zeta2001_over_zeta1001"], rel=1e-9)
    assert est.lim_a_closed_poly(w, 10.0).dynamic_kt_per_op == pytest.approx(MP["zeta12_over_zeta11"], rel=1e-12)
    with pytest.raises(ValueError):
        est.lim_a_closed_poly(w, 0.0)


@pytest.mark.parametrize("gamma", [0.5, 1.0, 2.0, 5.0, 10.0])
@pytest.mark.parametrize("delta", [2.0**-8, D16])
def test_lim_a_closed_equals_numeric(gamma, delta):
    w = est.Workload(1.0, 1.0, delta)
    closed = est.lim_a_closed_poly(w, gamma).dynamic_kt_per_op
    num = est.lim_a_numeric(w, LR, poly(gamma)).dynamic_kt_per_op
    assert abs(closed - num) / closed < 1e-6


@pytest.mark.parametrize("gamma", [0.5, 1.0, 2.0])
def test_exp_closed_equals_numeric(gamma):
    ur = UpdateRateSchedule("exponential", gamma)
    a_closed = est.lim_a_exp_closed(BRAIN, gamma).dynamic_kt_per_op
    a_num = est.lim_a_numeric(BRAIN, LR, ur).dynamic_kt_per_op
    assert abs(a_closed - a_num) / a_closed < 1e-6
    # at delta = 2^-16 log tanh(1/(2 n delta)) is below 1e-300 wherever e^-gamma n is not negligible
    b_closed = est.lim_b_exp_closed(BRAIN, gamma).dynamic_kt_per_op
    b_num = est.lim_b_numeric(BRAIN, LR, ur).dynamic_kt_per_op
    assert abs(b_closed - b_num) / b_closed < 1e-6


def test_exp_closed_examples():
    w = unit_workload()
    assert est.lim_a_exp_closed(w, 1.0).dynamic_kt_per_op == pytest.approx(MP["lim_a_exp_g1"], rel=1e-13)
    assert est.lim_a_exp_closed(w, 5.0).dynamic_kt_per_op == pytest.approx(MP["lim_a_exp_g5"], rel=1e-13)
    assert est.lim_a_exp_closed(w, 30.0).dynamic_kt_per_op == pytest.approx(1.0, rel=1e-12)
    assert est.lim_b_exp_closed(w, 1.0).dynamic_kt_per_op == pytest.approx(2.27513, abs=1e-5)
    assert est.lim_b_exp_closed(w, 1e-6).dynamic_kt_per_op == pytest.approx(LN2 + 1, abs=1e-6)
    assert est.lim_b_exp_closed(w, 10.0).dynamic_kt_per_op == pytest.approx(10.6936, abs=1e-4)


def test_lim_b_examples():
    e = est.lim_b_numeric(BRAIN, LR, poly(10.0))
    assert e.dynamic_kt_per_op == pytest.approx(0.697, abs=5e-4)
    assert e.total_joules == pytest.approx(2.9e7, rel=0.01)
    deep = est.lim_b_numeric(est.Workload(1, 1, 2.0**-64), LR, poly(0.01)).dynamic_kt_per_op
    shallow = est.lim_b_numeric(est.Workload(1, 1, D16), LR, poly(0.01)).dynamic_kt_per_op
    assert shallow < deep < 64 * LN2


def test_lim_b_upper_examples():
    assert est.lim_b_upper(BRAIN).dynamic_kt_per_op == pytest.approx(11.0904, abs=1e-4)
    assert est.lim_b_upper(BRAIN).dynamic_joules == pytest.approx(4.59e8, rel=2e-3)
    assert est.lim_b_upper(est.Workload(1, 1, 0.5)).dynamic_kt_per_op == pytest.approx(LN2)


def test_lower_bounds():
    assert est.lim_b_lower_closed(BRAIN, 10.0).dynamic_kt_per_op == pytest.approx(MP["lb_closed_g10"], rel=1e-12)
    assert est.lim_b_lower_closed(BRAIN, 2.0).dynamic_kt_per_op == pytest.approx(MP["lb_closed_g2"], rel=1e-12)
    assert est.lim_b_lower_closed(BRAIN, 2.0).dynamic_kt_per_op == pytest.approx(1.0228, abs=1e-4)
    assert est.lim_b_lower_closed(BRAIN, 50.0).dynamic_kt_per_op == pytest.approx(LN2, abs=1e-6)
    assert est.lim_b_lower_finite(BRAIN, 10.0).dynamic_kt_per_op == pytest.approx(MP["lb_finite_g10"], rel=1e-12)
    assert est.lim_b_lower_finite(BRAIN, 10.0, n_terms=1).dynamic_kt_per_op == pytest.approx(LN2, rel=1e-15)
    assert est.lim_b_lower_finite(BRAIN, 2.0).dynamic_kt_per_op == pytest.approx(MP["lb_finite_g2"], rel=1e-12)
    assert est.lim_b_lower_finite(BRAIN, 2.0).notes["N"] == 65536


@pytest.mark.parametrize("gamma", [2.0, 5.0, 10.0])
def test_sandwich(gamma):
    lo = est.lim_b_lower_closed(BRAIN, gamma).dynamic_kt_per_op
    mid = est.lim_b_numeric(BRAIN, LR, poly(gamma)).dynamic_kt_per_op
    hi = est.lim_b_upper(BRAIN).dynamic_kt_per_op
    assert lo <= mid <= hi


@settings(max_examples=25, deadline=None)
@given(st.floats(0.05, 20.0), st.floats(8.0, 60.0))
def test_landauer_floor(gamma, bits):
    # barrier(1) = log 2 + log tanh(1/(2 delta)) sits ~2 exp(-1/delta) below log 2, so the
    # floor is a small-delta statement; at delta = 1/2 and gamma >= 3 it fails by design
    w = est.Workload.from_bits(1.0, 1.0, bits)
    assert est.lim_b_numeric(w, LR, poly(gamma)).dynamic_kt_per_op >= LN2


@settings(max_examples=25, deadline=None)
@given(st.floats(1e10, 1e30), st.floats(1e3, 1e16), st.floats(1.0, 1000.0))
def test_scale_and_temperature_linearity(flops, params, temp):
    w = est.Workload(flops, params, D16)
    w2 = est.Workload(2 * flops, 2 * params, D16)
    for fn in (est.lim_b_upper, lambda x, t=300.0: est.ceb_energy(x, temperature=t)):
        a, b = fn(w), fn(w2)
        assert b.dynamic_joules == pytest.approx(2 * a.dynamic_joules, rel=1e-15)
        assert b.retention_joules == pytest.approx(2 * a.retention_joules, rel=1e-15)
    base = est.lim_b_upper(w, 300.0).total_joules
    assert est.lim_b_upper(w, temp).total_joules == pytest.approx(base * temp / 300.0, rel=1e-14)


def test_total_and_retention_invariants():
    for e in (est.lim_a_numeric(BRAIN, LR, poly(2.0)), est.lim_b_numeric(BRAIN, LR, poly(2.0)),
              est.lim_b_upper(BRAIN), est.lim_a_closed_poly(BRAIN, 2.0)):
        assert e.retention_kt == pytest.approx(1e15 * 16 * LN2, rel=1e-15)
        assert e.total_joules == pytest.approx((e.flops * e.dynamic_kt_per_op + e.retention_kt) * KT300, rel=1e-15)


def test_ceb_brain_scale():
    assert est.ceb_energy(BRAIN, e_bit=1e-15).total_joules == pytest.approx(1.6e14, rel=1e-9)
    assert est.ceb_energy(BRAIN, e_bit=1e-12).total_joules == pytest.approx(1.6e17, rel=1e-9)
    one_bit = est.ceb_energy(est.Workload(0.0, 1.0, 0.5), bits=1)
    assert one_bit.total_kt == pytest.approx(LN2)
    with pytest.raises(ValueError):
        est.ceb_energy(BRAIN, e_bit=-1.0)


def test_measurement_limit():
    assert est.measurement_limit_per_bit() == pytest.approx(2 * math.pi * LN2, rel=1e-12)
    assert est.measurement_limit_per_bit() == pytest.approx(4.35, rel=5e-3)
    triples = [(1e-15, 1.0, 1e9), (1e-12, 0.1, 1e6), (3e-14, 2.5, 7e10)]
    vals = [est.measurement_energy_per_bit(*t) for t in triples]
    assert vals[0] == pytest.approx(vals[1], rel=1e-12) and vals[0] == pytest.approx(vals[2], rel=1e-12)
    assert est.LANDAUER_MEASUREMENT_KT == pytest.approx(5.04, rel=5e-3)


def test_shannon_capacity_endpoints():
    assert est.shannon_capacity(0.5, 1e9) == pytest.approx(0.0, abs=1e-6)
    assert est.shannon_capacity(0.0, 1e9) == 1e9
    with pytest.raises(ValueError):
        est.shannon_capacity(1.5, 1.0)


def test_landauer_measurement_total():
    assert est.landauer_measurement_total(BRAIN).total_joules == pytest.approx(3.35e9, rel=2e-3)
    assert est.landauer_measurement_total(est.Workload(0.0, 0.0, D16)).total_joules == 0.0


def test_trajectory():
    pts, checks = est.trajectory(LR, poly(10.0), D16, n_points=50, n_max=10**6)
    assert pts[0].n == 1 and pts[0].barrier_kt == pytest.approx(LN2, abs=1e-12)
    assert pts[0].power_watts == pytest.approx(2.87e-9, rel=2e-3)
    assert checks["monotone_barrier"] and checks["infeasible_steps"] == []
    assert all(p.power_watts >= 0 and p.feasible for p in pts)
    assert all(p.tilt_kt == pytest.approx(p.epsilon_n / D16) for p in pts)


def test_trajectory_flags_infeasible():
    # with delta = 1 the tilt 1/n is small and r(n) ~ 1, so early barriers go negative
    _, checks = est.trajectory(LR, parse_schedule("exp:0.001"), 1.0, n_points=30, n_max=1000)
    assert checks["infeasible_steps"]


def test_manual_calibration():
    cal = est.LimCalibration(beta=2.0, lambda_min=0.5, precision_bits=1.0, mode="manual")
    assert cal.c(D16) == pytest.approx(0.25)
    with pytest.raises(ValueError):
        est.LimCalibration(mode="other")


def test_diagnostics_attached():
    e = est.lim_b_numeric(BRAIN, LR, poly(2.0))
    assert len(e.diagnostics) == 2 and all(d.converged for d in e.diagnostics)
    assert e.diagnostics[1].value == pytest.approx(sum_weighted(poly(2.0), "unit").value)
