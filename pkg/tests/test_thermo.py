import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from limb.thermo import (
    BOLTZMANN,
    BistableCellParams,
    ThermalEnvironment,
    barrier_for_rate,
    default_temperature,
    is_feasible,
    log_tanh_half,
    log_tanh_half_array,
    net_update_rate,
    p_transition,
    to_joules,
)

mpmath.mp.dps = 50

tilts = st.floats(min_value=1e-12, max_value=1e4, allow_nan=False)


def mp_log_tanh_half(x):
    # tanh(x/2) differs from 1 by ~2e^-x, so carry enough digits to see it
    with mpmath.workdps(50 + int(x)):
        return float(mpmath.log(mpmath.tanh(mpmath.mpf(x) / 2)))


def test_p_transition():
    assert p_transition(0.0) == 1.0
    assert p_transition(math.log(2)) == pytest.approx(0.5, rel=1e-15)
    with pytest.raises(ValueError):
        p_transition(-1.0)


@pytest.mark.parametrize("x", [1e-12, 1e-9, 1e-8, 2e-8, 1e-4, 0.1, 0.5, 0.999, 1.0, 1.001, 3.0, 20.0, 40.0, 700.0])
def test_log_tanh_half_matches_mpmath(x):
    want = mp_log_tanh_half(x)
    assert log_tanh_half(x) == pytest.approx(want, rel=2e-14, abs=0)


def test_log_tanh_half_saturates():
    assert log_tanh_half(1e6) == 0.0
    assert log_tanh_half(50.0) == pytest.approx(-2 * math.exp(-50.0), rel=1e-12)


@pytest.mark.parametrize("bad", [0.0, -1.0, float("nan")])
def test_log_tanh_half_domain(bad):
    with pytest.raises(ValueError):
        log_tanh_half(bad)
    with pytest.raises(ValueError):
        log_tanh_half_array(np.array([1.0, bad]))


@given(st.lists(tilts, min_size=1, max_size=20))
def test_array_agrees_with_scalar(xs):
    arr = log_tanh_half_array(np.array(xs))
    # numpy and libm tanh may differ in the last bit
    np.testing.assert_allclose(arr, [log_tanh_half(x) for x in xs], rtol=4 * np.finfo(float).eps, atol=0)


@given(tilts, tilts)
def test_log_tanh_half_monotone_nonpositive(a, b):
    lo, hi = sorted((a, b))
    assert log_tanh_half(lo) <= log_tanh_half(hi) <= 0.0


def test_extrinsic_ceiling():
    cell = BistableCellParams(barrier=0.0, tilt=math.log(3.0), r_max=1e12)
    assert net_update_rate(cell) == pytest.approx(1e12, rel=1e-12)


def test_landauer_recovery():
    assert barrier_for_rate(1e12, 1e3, 1e12) == pytest.approx(math.log(2), rel=1e-9)


def test_net_rate_example():
    cell = BistableCellParams(2.0, 1.0, 1e6)
    assert net_update_rate(cell) == pytest.approx(2e6 * math.exp(-2) * math.tanh(0.5), rel=1e-15)
    assert net_update_rate(BistableCellParams(3.0, 0.0, 1e6)) == 0.0


@settings(max_examples=200)
@given(
    st.floats(min_value=0.0, max_value=60.0),
    st.floats(min_value=1e-6, max_value=500.0),
    st.floats(min_value=1.0, max_value=1e13),
)
def test_barrier_for_rate_inverts_net_rate(barrier, tilt, r_max):
    rate = net_update_rate(BistableCellParams(barrier, tilt, r_max))
    if rate == 0.0:
        return
    assert barrier_for_rate(rate, tilt, r_max) == pytest.approx(barrier, abs=1e-9 * max(1.0, barrier))


def test_barrier_for_rate_negative_when_unreachable():
    # above the extrinsic ceiling the required barrier goes negative
    assert barrier_for_rate(2e12, 1e3, 1e12) == pytest.approx(0.0, abs=1e-12)
    assert barrier_for_rate(3e12, 1e3, 1e12) < 0
    assert not is_feasible(2e12, 1e12)
    assert is_feasible(1e12, 1e12)


@pytest.mark.parametrize("args", [(0.0, 1.0, 1.0), (1.0, 0.0, 1.0), (1.0, 1.0, 0.0)])
def test_barrier_for_rate_domain(args):
    with pytest.raises(ValueError):
        barrier_for_rate(*args)


@pytest.mark.parametrize("kwargs", [dict(barrier=-1, tilt=0, r_max=1), dict(barrier=0, tilt=-1, r_max=1),
                                    dict(barrier=0, tilt=0, r_max=0)])
def test_cell_validation(kwargs):
    with pytest.raises(ValueError):
        BistableCellParams(**kwargs)


def test_thermal_environment():
    env = ThermalEnvironment(300.0)
    assert env.kt == BOLTZMANN * 300.0
    assert env.kt == pytest.approx(4.141947e-21, rel=1e-6)
    assert to_joules(2.0, env) == 2.0 * env.kt
    with pytest.raises(ValueError):
        ThermalEnvironment(0.0)


def test_temperature_env_override(monkeypatch):
    monkeypatch.delenv("LIMB_TEMP_K", raising=False)
    assert default_temperature() == 300.0
    monkeypatch.setenv("LIMB_TEMP_K", "77")
    assert default_temperature() == 77.0
    monkeypatch.setenv("LIMB_TEMP_K", "-4")
    with pytest.raises(ValueError):
        default_temperature()
