import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import adiabatic_jumps as aj

from conftest import CONSTANT_CASE, make_spec


def test_constant_case_amplitude_frozen_values():
    for lam, expected in CONSTANT_CASE.items():
        assert aj.constant_case_amplitude(lam, 1.0) == pytest.approx(
            expected, abs=1e-15)


def test_constant_case_zero_at_full_cycles():
    for k in (1, 2, 5):
        lam = 2.0 * np.pi * k
        assert aj.constant_case_amplitude(lam, 1.0) <= 1e-15


@given(lam=st.floats(min_value=1e-3, max_value=1e6),
       duration=st.floats(min_value=1e-3, max_value=100.0))
@settings(max_examples=100, deadline=None)
def test_constant_case_bounded_by_two_over_lambda(lam, duration):
    assert aj.constant_case_amplitude(lam, duration) <= 2.0 / lam + 1e-15


def test_constant_case_rejects_nonpositive_lambda():
    with pytest.raises(aj.InvalidParameter):
        aj.constant_case_amplitude(0.0, 1.0)


# --- power-law fitting ------------------------------------------------------------

def test_fit_exact_inverse_law():
    xs = np.array([1.0, 2.0, 4.0, 8.0, 16.0])
    fit = aj.fit_power_law(xs, 3.0 / xs)
    assert fit.exponent == pytest.approx(-1.0, abs=1e-12)
    assert fit.r_squared == pytest.approx(1.0, abs=1e-12)
    assert np.exp(fit.intercept) == pytest.approx(3.0, rel=1e-10)


def test_fit_exact_inverse_square_law():
    xs = np.array([2.0, 3.0, 5.0, 9.0, 17.0])
    fit = aj.fit_power_law(xs, 5.0 / xs**2)
    assert fit.exponent == pytest.approx(-2.0, abs=1e-12)


def test_fit_with_multiplicative_noise():
    rng = np.random.default_rng(314)
    xs = np.logspace(0.0, 2.0, 24)
    ys = (1.0 / xs) * (1.0 + 0.01 * rng.standard_normal(len(xs)))
    fit = aj.fit_power_law(xs, ys)
    assert -1.05 <= fit.exponent <= -0.95
    assert fit.r_squared >= 0.99


def test_fit_degenerate_inputs():
    with pytest.raises(aj.DegenerateInput):
        aj.fit_power_law([1.0, 2.0, 3.0], [1.0, 2.0, 3.0])
    with pytest.raises(aj.DegenerateInput):
        aj.fit_power_law([1.0, 2.0, 3.0, -4.0], [1.0, 2.0, 3.0, 4.0])
    with pytest.raises(aj.DegenerateInput):
        aj.fit_power_law([2.0, 2.0, 2.0, 2.0], [1.0, 2.0, 3.0, 4.0])
    with pytest.raises(aj.DegenerateInput):
        aj.fit_power_law([1.0, 2.0, 3.0, 4.0], [1.0, 2.0, 0.0, 4.0])


# --- bound and asymptotics ----------------------------------------------------------

def test_standard_bound_constant_model_is_zero():
    lam = 10.0
    pipe = aj.build_pipeline(make_spec("constant"), lam)
    assert aj.standard_bound(pipe.kernel, lam, 0) == 0.0


def test_standard_bound_rotated_frame():
    lam = 10.0
    pipe = aj.build_pipeline(make_spec("rotated_frame"), lam)
    assert aj.coupling_gamma(pipe.kernel, 0) == pytest.approx(1.0, abs=1e-9)
    assert aj.standard_bound(pipe.kernel, lam, 0) == pytest.approx(0.2, abs=1e-9)


def test_boundary_asymptotic_constant_model_zero():
    lam = 10.0
    pipe = aj.build_pipeline(make_spec("constant"), lam)
    val = aj.boundary_asymptotic(pipe.frame, pipe.kernel, pipe.phases, 1, lam)
    assert val == 0.0


def test_boundary_asymptotic_reproduces_constant_gap_case():
    # constant unit gap and coupling: the endpoint formula is exact for the
    # closed-form magnitude, so it must land within O(lam^-2) slack
    lam = 10.0
    pipe = aj.build_pipeline(make_spec("rotated_frame"), lam)
    val = aj.boundary_asymptotic(pipe.frame, pipe.kernel, pipe.phases, 1, lam)
    assert abs(val) == pytest.approx(CONSTANT_CASE[lam], abs=5.0 / lam**2)


def test_boundary_asymptotic_vanishes_for_flat_ramp():
    lam = 40.0
    pipe = aj.build_pipeline(make_spec("flat_endpoint_ramp"), lam)
    val = aj.boundary_asymptotic(pipe.frame, pipe.kernel, pipe.phases, 1, lam)
    assert abs(val) <= 1e-12


def test_first_order_amplitude_under_bound():
    for family in ("rotated_frame", "landau_zener_window",
                   "smooth_interpolation"):
        lam = 60.0
        pipe = aj.build_pipeline(make_spec(family), lam, points_per_period=32)
        series = pipe.expand(lam, 1)
        bound = aj.standard_bound(pipe.kernel, lam, pipe.frame.m0)
        assert abs(series.final(1)[1]) <= bound * 1.05


# --- scans ---------------------------------------------------------------------------

def test_secular_probe_flags_null_case():
    report = aj.secular_probe(make_spec("constant"), 50.0, [2.0, 4.0, 8.0])
    assert report.null_case
    assert report.fit is None
    assert any("noise floor" in note for note in report.notes)


def test_secular_probe_skips_fit_below_four_points():
    report = aj.secular_probe(make_spec("rotated_frame"), 60.0, [4.0, 8.0])
    assert report.fit is None and not report.null_case
    assert any("too few points" in note for note in report.notes)


def test_secular_probe_linear_growth_short():
    report = aj.secular_probe(make_spec("rotated_frame"), 60.0,
                              [4.0, 8.0, 16.0, 32.0])
    assert report.fit is not None
    assert 0.9 <= report.fit.exponent <= 1.1
    assert report.gamma == pytest.approx(1.0, abs=1e-8)
    assert any("gamma^2" in note for note in report.notes)


def test_first_order_scan_reports_bound_margins():
    report = aj.first_order_decay_scan(
        make_spec("smooth_interpolation"), [40.0, 80.0, 160.0, 320.0],
        envelope_points=7)
    assert report.fit is not None
    assert -1.3 <= report.fit.exponent <= -0.7
    assert np.all(report.bound_margins > 0)


def test_endpoint_order_magnitude_matches_pipeline():
    lam = 30.0
    spec = make_spec("rotated_frame")
    val = aj.endpoint_order_magnitude(spec, lam, 1, 1, points_per_period=64)
    assert val == pytest.approx(aj.constant_case_amplitude(lam, 1.0), abs=1e-7)
