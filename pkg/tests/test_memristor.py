import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from neusoc.memristor import (
    IvTrace,
    MemristorParams,
    MemristorState,
    SineDrive,
    conductance,
    current,
    integrate_state,
    pinched_metrics,
    run_iv_sweep,
    shoelace,
)

P = MemristorParams()


def test_beta_puts_full_rail_on_lrs():
    # beta = g_max / (v_dd - v_thn) = 2.5 uS / 0.9 V
    assert P.beta == pytest.approx(2.5e-6 / 0.9, rel=1e-15)
    assert conductance(MemristorState(1.2), P) == pytest.approx(2.5e-6, rel=1e-12)


def test_conductance_below_threshold_is_hrs():
    assert conductance(MemristorState(0.3), P) == pytest.approx(62.5e-9)
    assert conductance(MemristorState(0.0), P) == pytest.approx(1 / 16e6)


def test_conductance_linear_midpoint():
    v = P.v_thn + (P.g_max / P.beta) / 2
    assert conductance(v, P) == pytest.approx(P.g_max / 2, rel=1e-12)


def test_conductance_accepts_arrays():
    g = conductance(np.array([0.0, 1.2]), P)
    assert g.shape == (2,)
    assert g[0] == P.g_min and g[1] == pytest.approx(P.g_max)


def test_current_examples():
    lrs = MemristorState(1.2)
    assert current(0.3, lrs, P) == pytest.approx(0.75e-6, rel=1e-12)
    assert current(-0.3, lrs, P) == pytest.approx(-0.75e-6, rel=1e-12)
    assert current(0.0, lrs, P) == 0.0


def test_integrate_state_examples():
    s = MemristorState(0.5)
    assert integrate_state(MemristorState(0.5, strobe=False), 0.3, 1e-6, P) == MemristorState(0.5, strobe=False)
    assert integrate_state(s, 0.0, 1e-6, P).v_g == 0.5
    # (1 uS / 100 fF) * 0.1 V * 100 ns = 0.1 V
    assert integrate_state(s, 0.1, 100e-9, P).v_g == pytest.approx(0.6, abs=1e-12)


def test_integrate_state_rejects_nonpositive_dt():
    with pytest.raises(ValueError):
        integrate_state(MemristorState(0.5), 0.1, 0.0, P)


@pytest.mark.parametrize("kw", [dict(beta=-1.0), dict(g_min=3e-6), dict(v_thn=1.5), dict(c_m=0.0)])
def test_params_validation(kw):
    with pytest.raises(ValueError):
        MemristorParams(**kw)


def test_sweep_step_bound():
    with pytest.raises(ValueError, match="too coarse"):
        run_iv_sweep(P, SineDrive(dt=1e-8))


def test_zero_amplitude_sweep_is_flat():
    tr = run_iv_sweep(P, SineDrive(amplitude=0.0))
    assert np.all(tr.i == 0)
    assert pinched_metrics(tr) == {"origin_residual": 0.0, "loop_area": 0.0}


def test_sweep_is_pinched_with_positive_area():
    tr = run_iv_sweep(P, SineDrive(cycles=2.0))
    m = pinched_metrics(tr)
    assert m["origin_residual"] < P.g_max * 1e-6
    assert m["loop_area"] > 0


def test_one_cycle_pinched():
    tr = run_iv_sweep(P, SineDrive(cycles=1.0))
    near = np.abs(tr.v) < 1e-12
    assert near.any()
    assert np.all(np.abs(tr.i[near]) <= P.g_max * 1e-12)


def test_resistor_trace_has_zero_area():
    t = np.linspace(0, 1, 1001)
    v = np.sin(2 * np.pi * 2 * t)
    m = pinched_metrics(IvTrace(t, v, 1e-6 * v))
    assert m["loop_area"] == pytest.approx(0.0, abs=1e-18)


def test_empty_trace_rejected():
    with pytest.raises(ValueError):
        pinched_metrics(IvTrace([], [], []))


def test_trace_time_must_increase():
    with pytest.raises(ValueError):
        IvTrace([0.0, 0.0], [0.0, 1.0], [0.0, 1.0])


def test_shoelace_unit_square():
    assert shoelace([0, 1, 1, 0], [0, 0, 1, 1]) == 1.0
    assert shoelace([0, 0, 1, 1], [0, 1, 1, 0]) == -1.0


def test_dt_halving_converges():
    d = SineDrive(cycles=2.0, dt=1e-9)
    a = run_iv_sweep(P, d).v_g[-1]
    b = run_iv_sweep(P, SineDrive(cycles=2.0, dt=0.5e-9)).v_g[-1]
    assert abs(b - a) / a < 0.01


def test_csv_round_trip(tmp_path):
    tr = run_iv_sweep(P, SineDrive(cycles=0.5, dt=1e-9))
    path = tmp_path / "iv.csv"
    tr.to_csv(path)
    assert path.read_text().splitlines()[0] == "t_s,v_ab_V,i_A"
    back = IvTrace.from_csv(path)
    np.testing.assert_array_equal(back.t, tr.t)
    np.testing.assert_array_equal(back.i, tr.i)


# --- properties -------------------------------------------------------------

volts = st.floats(-1.2, 1.2, allow_nan=False)
states = st.floats(0.0, 1.2, allow_nan=False)


@given(states)
def test_pinched_at_origin(v_g):
    assert current(0.0, MemristorState(v_g), P) == 0.0


@given(states, st.lists(st.tuples(volts, st.floats(1e-12, 1e-6)), max_size=50))
def test_strobe_low_holds_bit_identical(v_g, drive):
    s = MemristorState(v_g, strobe=False)
    for v, dt in drive:
        s = integrate_state(s, v, dt, P)
    assert s.v_g == v_g


@given(states, states)
def test_conductance_monotone(a, b):
    lo, hi = min(a, b), max(a, b)
    assert conductance(lo, P) <= conductance(hi, P)


@settings(max_examples=200)
@given(states, st.lists(st.tuples(volts, st.floats(1e-12, 1e-5)), max_size=100))
def test_state_and_conductance_clamped(v_g, drive):
    s = MemristorState(v_g)
    for v, dt in drive:
        s = integrate_state(s, v, dt, P)
        assert 0.0 <= s.v_g <= P.v_dd
        g = conductance(s, P)
        assert P.g_min <= g <= P.g_max and math.isfinite(g)
