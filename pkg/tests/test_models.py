import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import adiabatic_jumps as aj
from adiabatic_jumps.models import central_difference_derivative

from conftest import BUILTIN_SPECS, make_model, make_spec

ALL_FAMILIES = sorted(BUILTIN_SPECS)


def test_scales_lambda_is_derived():
    scales = aj.ModelScales(energy=10.0, time=0.5, duration=2.0)
    assert scales.lam == 5.0
    assert scales.total_time == 1.0
    assert aj.ModelScales.from_lambda(7.0).lam == 7.0


@pytest.mark.parametrize("field,kw", [
    ("energy", dict(energy=-1.0)),
    ("time", dict(time=0.0)),
    ("duration", dict(duration=-2.0)),
])
def test_scales_rejects_nonpositive(field, kw):
    with pytest.raises(aj.InvalidParameter, match=field):
        aj.ModelScales(**kw)


def test_constant_family_is_constant():
    model = make_model("constant")
    h0 = model.h(0.0)
    assert np.array_equal(h0, np.diag([0.0, 1.0]))
    for s in (0.3, 0.7, 1.0):
        assert np.array_equal(model.h(s), h0)
        assert np.all(model.dh(s) == 0)


def test_rotated_frame_spectrum_is_s_independent():
    # similarity transform preserves eigenvalues; check by direct diagonalization
    model = make_model("rotated_frame")
    for s in np.linspace(0.0, 1.0, 25):
        e = np.linalg.eigvalsh(model.h(s))
        assert np.allclose(e, [0.0, 1.0], atol=1e-12)


def test_user_polynomial_rejects_non_hermitian():
    spec = make_spec("user_matrix_polynomial",
                     params={"coefficients": [[[0.0, 1.0], [0.0, 0.0]]]})
    with pytest.raises(aj.InvalidParameter, match="coefficients"):
        aj.build_model(spec)


def test_unknown_family():
    with pytest.raises(aj.UnknownFamily):
        aj.build_model(aj.ModelSpec(family="no_such_family"))


def test_unknown_parameter_named():
    with pytest.raises(aj.InvalidParameter, match="params.bogus"):
        aj.build_model(aj.ModelSpec(family="constant", params={"bogus": 1}))


def test_spec_validation():
    with pytest.raises(aj.InvalidParameter):
        aj.ModelSpec(family="constant", dim=1)
    with pytest.raises(aj.InvalidParameter):
        aj.ModelSpec(family="constant", initial_state_index=5)


def test_dim_mismatch_for_two_level_families():
    with pytest.raises(aj.DimensionMismatch):
        aj.build_model(aj.ModelSpec(family="rotating_spin", dim=3))
    with pytest.raises(aj.DimensionMismatch):
        aj.build_model(aj.ModelSpec(family="landau_zener_window", dim=4))


def test_out_of_domain():
    model = make_model("constant")
    with pytest.raises(aj.OutOfDomain):
        model.h(1.5)
    with pytest.raises(aj.OutOfDomain):
        model.h(-0.2)
    # slack of 1e-12 is allowed
    model.h(1.0 + 1e-13)


@pytest.mark.parametrize("family", ALL_FAMILIES)
def test_hermiticity_at_random_times(family):
    model = make_model(family)
    rng = np.random.default_rng(1234)
    s = rng.uniform(0.0, model.duration, size=100)
    hs = model.h_batch(np.sort(s))
    dev = np.max(np.abs(hs - hs.conj().transpose(0, 2, 1)))
    assert dev <= 1e-12


@given(s=st.floats(min_value=0.0, max_value=1.0))
@settings(max_examples=50, deadline=None)
def test_rotating_spin_hermitian_property(s):
    model = make_model("rotating_spin")
    h = model.h(s)
    assert np.max(np.abs(h - h.conj().T)) <= 1e-12


def test_evaluation_is_deterministic():
    model = make_model("rotating_spin")
    assert np.array_equal(model.h(0.37), model.h(0.37))
    assert np.array_equal(model.dh(0.37), model.dh(0.37))


def test_rotating_spin_closed_loop_endpoints_match():
    model = make_model("rotating_spin", params={"theta": np.pi / 3})
    assert np.allclose(model.h(0.0), model.h(1.0), atol=1e-12)


def test_rotating_spin_aligned_level_has_zero_energy():
    model = make_model("rotating_spin")
    e = np.linalg.eigvalsh(model.h(0.4))
    assert np.allclose(e, [0.0, 1.0], atol=1e-12)


def test_landau_zener_midpoint_gap_equals_parameter():
    # closed form: energies +-sqrt(a^2 + (gap/2)^2), minimal at the midpoint
    gap, sweep = 0.8, 2.0
    model = make_model("landau_zener_window", params={"gap": gap, "sweep": sweep})
    e_mid = np.linalg.eigvalsh(model.h(0.5))
    assert np.isclose(e_mid[1] - e_mid[0], gap, atol=1e-12)
    for s in (0.0, 0.21, 0.77):
        a = sweep * (2 * s - 1.0)
        expected = np.hypot(a, gap / 2)
        e = np.linalg.eigvalsh(model.h(s))
        assert np.allclose(e, [-expected, expected], atol=1e-12)


def test_smooth_interpolation_constant_derivative():
    model = make_model("smooth_interpolation", duration=2.0)
    h0, h1 = model.h(0.0), model.h(2.0)
    expected = (h1 - h0) / 2.0
    for s in (0.0, 0.9, 2.0):
        assert np.allclose(model.dh(s), expected, atol=1e-14)


def test_flat_endpoint_ramp_derivative_vanishes_at_ends():
    model = make_model("flat_endpoint_ramp")
    assert np.allclose(model.dh(0.0), 0.0, atol=1e-14)
    assert np.allclose(model.dh(1.0), 0.0, atol=1e-14)
    assert np.max(np.abs(model.dh(0.5))) > 0.1


@pytest.mark.parametrize("family", ALL_FAMILIES)
def test_analytic_derivative_matches_central_difference(family):
    model = make_model(family)
    assert model.has_analytic_derivative
    for s in (0.11, 0.5, 0.93):
        fd = central_difference_derivative(model._h_batch, s)
        assert np.max(np.abs(model.dh(s) - fd)) <= 1e-7


def test_rotated_frame_commutator_identity():
    # dh/ds = [A, h(s)]; verified against the finite-difference stencil
    model = make_model("rotated_frame")
    a = np.array([[0.0, -1.0], [1.0, 0.0]])
    for s in (0.2, 0.8):
        h = model.h(s)
        comm = a @ h - h @ a
        assert np.max(np.abs(model.dh(s) - comm)) <= 1e-12
        fd = central_difference_derivative(model._h_batch, s)
        assert np.max(np.abs(comm - fd)) <= 1e-8


def test_fallback_derivative_used_when_family_lacks_one():
    model = make_model("rotating_spin")
    bare = aj.Model(model.spec, model._h_batch, None)
    assert not bare.has_analytic_derivative
    for s in (0.25, 0.75):
        assert np.max(np.abs(bare.dh(s) - model.dh(s))) <= 1e-7


def test_user_polynomial_evaluates_and_differentiates():
    c0 = [[0.0, 0.0], [0.0, 1.0]]
    c1 = [[0.0, 0.5], [0.5, 0.0]]
    model = make_model("user_matrix_polynomial",
                       params={"coefficients": [c0, c1]})
    s = 0.6
    assert np.allclose(model.h(s), np.array(c0) + s * np.array(c1), atol=1e-15)
    assert np.allclose(model.dh(s), c1, atol=1e-15)


def test_complex_entries_accepted_as_strings():
    c0 = [["0", "0.3j"], ["-0.3j", "1"]]
    model = make_model("user_matrix_polynomial", params={"coefficients": [c0]})
    h = model.h(0.5)
    assert h[0, 1] == 0.3j
