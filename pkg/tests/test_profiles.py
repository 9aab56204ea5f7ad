from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from barrier_bound.errors import DomainError, ParameterError, RangeError
from barrier_bound.profiles import (
    IsotropicCoefficients,
    build_profile,
    c_sup,
    c_sup_argmax,
    check_structure,
    coefficients_from_profile,
    eval_K,
    invert_K,
)


def plaplace(p, potential="zero", **kw):
    return build_profile({"kind": "p-laplace", "p": p}, potential, **kw)


# --- coefficients -------------------------------------------------------------


def test_linear_laplacian_coefficients():
    a, b, _ = coefficients_from_profile(build_profile("linear")).evaluate(0.3, 3.0)
    assert a == pytest.approx(1.0) and b == pytest.approx(1.0)


def test_plaplace_coefficients_at_unit_gradient():
    a, b, _ = coefficients_from_profile(plaplace(4.0)).evaluate(0.0, 1.0)
    assert a == pytest.approx(3.0, rel=1e-12)
    assert b == pytest.approx(1.0, rel=1e-12)


def test_symmetric_well_has_critical_point_at_zero():
    _, _, q = coefficients_from_profile(build_profile("linear", "allen-cahn-well")).evaluate(0.0, 0.5)
    assert q == pytest.approx(0.0, abs=1e-15)


def test_potential_signs():
    u = np.linspace(-1.5, 1.5, 31)
    ac = build_profile("linear", "allen-cahn-well")
    dw = build_profile("linear", "double-well")
    np.testing.assert_allclose(ac.potential_derivative(u), u - u ** 3, atol=1e-14)
    np.testing.assert_allclose(dw.potential_derivative(u), u ** 3 - u, atol=1e-14)


def test_negative_gradient_norm_rejected():
    with pytest.raises(DomainError):
        IsotropicCoefficients.constant().evaluate(0.0, -1.0)


def test_nan_coefficient_rejected():
    coeffs = IsotropicCoefficients.constant(q=lambda u: np.full_like(np.asarray(u, float), np.nan))
    with pytest.raises(DomainError):
        coeffs.evaluate(0.0, 1.0)


def test_validate_rejects_negative_alpha():
    with pytest.raises(DomainError):
        IsotropicCoefficients.constant(alpha=-1.0).validate([0.0], [1.0])


# --- K and its inverse --------------------------------------------------------


def test_K_closed_forms():
    assert eval_K(build_profile("linear"), 4.0) == pytest.approx(2.0)
    assert eval_K(plaplace(3.0), 1.0) == pytest.approx(2.0 / 3.0, rel=1e-14)
    assert eval_K(plaplace(3.0), 0.0) == 0.0


def test_K_rejects_negative_argument():
    with pytest.raises(DomainError):
        eval_K(build_profile("linear"), -1.0)


def test_invert_K_closed_forms():
    assert invert_K(build_profile("linear"), 3.0) == pytest.approx(6.0, rel=1e-12)
    assert invert_K(build_profile("linear"), 0.0) == 0.0
    assert invert_K(plaplace(4.0), 0.75) == pytest.approx(1.0, rel=1e-12)


def test_invert_K_rejects_negative_and_infinite():
    prof = build_profile("linear")
    with pytest.raises(RangeError):
        invert_K(prof, -0.1)
    with pytest.raises(RangeError):
        invert_K(prof, np.inf)


@given(st.floats(1.1, 6.0), st.floats(1e-8, 1e4))
def test_invert_K_roundtrip_plaplace(p, s):
    prof = plaplace(p)
    back = invert_K(prof, eval_K(prof, s))
    assert abs(back - s) <= 1e-9 * max(1.0, s)


@given(st.floats(1.1, 6.0), st.floats(1e-6, 1e3))
def test_K_matches_plaplace_closed_form(p, s):
    assert eval_K(plaplace(p), s) == pytest.approx((1.0 - 1.0 / p) * s ** (p / 2.0), rel=1e-12)


@given(st.lists(st.floats(0.0, 50.0), min_size=1, max_size=20))
def test_invert_K_is_monotone_on_arrays(ts):
    t = np.sort(np.asarray(ts))
    s = invert_K(build_profile({"kind": "polynomial", "coefficients": [0.0, 1.0, 0.25]}), t)
    assert np.all(np.diff(s) >= 0)


# --- c_u -----------------------------------------------------------------------


def test_c_sup_interior_maximum():
    prof = build_profile("linear", "double-well")
    cu, arg = c_sup_argmax(prof, (-0.9, 0.9))
    assert cu == pytest.approx(0.25, abs=1e-15)
    assert arg == pytest.approx(0.0, abs=1e-6)


def test_c_sup_constant_and_endpoint():
    assert c_sup(build_profile("linear", {"kind": "constant", "value": 7.0})) == pytest.approx(7.0)
    assert c_sup(build_profile("linear", {"kind": "linear", "slope": 1.0}), (0.0, 1.0)) == pytest.approx(1.0)


@given(st.floats(-2.0, 2.0), st.floats(0.0, 2.0))
def test_c_sup_dominates_dense_scan(m, width):
    prof = build_profile("linear", "allen-cahn-well")
    M = m + width
    cu = c_sup(prof, (m, M))
    scan = prof.potential(np.linspace(m, M, 2001))
    assert cu >= scan.max() - 1e-15
    assert cu >= max(prof.potential(m), prof.potential(M))


# --- structure conditions -------------------------------------------------------


@pytest.mark.parametrize("p", [1.5, 2.0, 3.0, 4.0])
def test_plaplace_structure_margins_nonnegative(p):
    rep = check_structure(plaplace(p), np.geomspace(1e-3, 1e3, 200))
    assert rep.ok


def test_linear_structure_is_tight():
    rep = check_structure(build_profile("linear"), np.linspace(0.1, 10.0, 50))
    assert rep.ok
    for margin in (rep.phi_lower, rep.phi_upper, rep.lam_lower, rep.lam_upper):
        np.testing.assert_allclose(margin, 0.0, atol=1e-14)


def test_quadratic_phi_violates_growth_bounds():
    prof = build_profile({"kind": "polynomial", "coefficients": [0.0, 0.0, 1.0]}, p=2.0, c1=1.0, c2=1.0)
    rep = check_structure(prof, np.array([1.0, 10.0]))
    assert not rep.ok
    assert 10.0 in rep.violations()


def test_profile_parameter_errors():
    with pytest.raises(ParameterError):
        plaplace(1.0)
    with pytest.raises(ParameterError):
        build_profile("cubic")
    with pytest.raises(ParameterError):
        build_profile("linear", "quartic")


@given(st.floats(1.1, 6.0), st.one_of(st.just(0.0), st.floats(1e-12, 1e3)))
def test_closed_form_inverse_matches_bisection(p, t):
    prof = plaplace(p)
    closed = invert_K(prof, t)
    assert invert_K(prof, t, method="bisect") == pytest.approx(closed, rel=1e-12)


def test_unknown_inversion_method():
    with pytest.raises(ParameterError):
        invert_K(build_profile("linear"), 1.0, method="newton")
