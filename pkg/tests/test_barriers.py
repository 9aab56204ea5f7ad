from __future__ import annotations

import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from barrier_bound.barriers import (
    BarrierCurve,
    constant_barrier,
    invert_barrier,
    modica_barrier,
    modica_crosscheck,
    monotonicity_quantity,
    solve_flat_barrier,
    solve_sphere_family,
    solve_warped_barrier,
)
from barrier_bound.errors import (
    CoverageWarning,
    DomainError,
    InvalidWarpError,
    MonotonicityError,
    ParameterError,
)
from barrier_bound.geometry import warp_factor
from barrier_bound.profiles import IsotropicCoefficients, build_profile, coefficients_from_profile, eval_K, invert_K

SQ2 = np.sqrt(2.0)
LAPLACE = IsotropicCoefficients.constant()


def allen_cahn_coeffs():
    return coefficients_from_profile(build_profile("linear", "allen-cahn-well"))


def kink_curve(lo=-0.96, hi=0.96, n=2049):
    z = np.linspace(SQ2 * np.arctanh(lo), SQ2 * np.arctanh(hi), n)
    phi = np.tanh(z / SQ2)
    return BarrierCurve(grid=z, phi=phi, dphi=(1.0 - phi ** 2) / SQ2, kind="flat")


# --- flat -----------------------------------------------------------------------


def test_flat_linear_solution():
    c = solve_flat_barrier(LAPLACE, 0.0, 1.0, (0.0, 1.0))
    np.testing.assert_allclose(c.phi, c.grid, atol=1e-10)
    np.testing.assert_allclose(c.dphi, 1.0, atol=1e-10)


def test_flat_allen_cahn_is_the_kink():
    ref = kink_curve()
    a, b = ref.interval
    c = solve_flat_barrier(allen_cahn_coeffs(), a, b, (-0.96, 0.96))
    np.testing.assert_allclose(c.phi, np.tanh(c.grid / SQ2), atol=1e-8)
    first = 0.5 * c.dphi ** 2 - 0.25 * (1.0 - c.phi ** 2) ** 2
    assert np.max(np.abs(first)) <= 1e-8


def test_flat_delta_monotonicity_quantity_decreases():
    ref = kink_curve()
    a, b = ref.interval
    coeffs = allen_cahn_coeffs()
    c = solve_flat_barrier(coeffs, a, b, (-0.96, 0.96), delta=1e-3)
    mq = monotonicity_quantity(c, coeffs)[2:-2]
    assert np.all(np.diff(mq) < 0)
    assert c.meta["monotonicity_max_slope"] < 0


def test_flat_constant_range_and_errors():
    assert solve_flat_barrier(LAPLACE, 0.0, 1.0, (0.3, 0.3)).is_constant
    with pytest.raises(ParameterError):
        solve_flat_barrier(LAPLACE, 1.0, 0.0, (0.0, 1.0))
    with pytest.raises(ParameterError):
        solve_flat_barrier(LAPLACE, 0.0, 1.0, (0.0, 1.0), delta=-1.0)


@given(st.floats(0.2, 5.0), st.floats(-2.0, 2.0), st.floats(0.1, 3.0))
def test_flat_laplace_is_affine(length, m, width):
    c = solve_flat_barrier(LAPLACE, 0.0, length, (m, m + width), n_points=65)
    np.testing.assert_allclose(c.dphi, width / length, rtol=1e-7)
    assert c.phi[0] == pytest.approx(m) and c.phi[-1] == pytest.approx(m + width, abs=1e-9)


# --- warped ---------------------------------------------------------------------


def test_warped_gudermannian():
    gd = lambda z: 2.0 * np.arctan(np.tanh(z / 2.0))  # noqa: E731
    c = solve_warped_barrier(LAPLACE, -1.0, 2, 0.0, 0.0, 1.0, (0.0, gd(1.0)))
    np.testing.assert_allclose(c.phi, gd(c.grid), atol=1e-8)
    np.testing.assert_allclose(c.dphi, 1.0 / np.cosh(c.grid), atol=1e-8)


def test_warped_manufactured_linear_barrier():
    w = warp_factor(-1.0)
    coeffs = IsotropicCoefficients(alpha=lambda u, t: 1.0 + 0 * t, beta=lambda u, t: 1.0 + 0 * t,
                                   q=lambda u, t: -w.log_derivative(u) + 0 * t)
    c = solve_warped_barrier(coeffs, -1.0, 2, 0.0, 0.0, 1.0, (0.0, 1.0))
    np.testing.assert_allclose(c.phi, c.grid, atol=1e-9)
    assert c.meta["residual"] <= 1e-8


def test_warped_drift_decreases_along_grid():
    c = solve_warped_barrier(allen_cahn_coeffs(), -1.0, 3, 0.0, 0.0, 1.0, (-0.5, 0.5))
    drift = -(3 - 1) * warp_factor(-1.0).log_derivative(c.grid)
    assert np.all(np.diff(drift) < 0)


def test_warped_rejects_bad_warp():
    from barrier_bound.geometry import Warp

    with pytest.raises(InvalidWarpError):
        solve_warped_barrier(LAPLACE, -1.0, 2, 0.0, 0.0, 1.0, (0.0, 1.0), warp=Warp(-1.0, np.inf))


# --- spherical family -----------------------------------------------------------


def test_sphere_family_secant_solution():
    prof = build_profile("linear", "zero", value_range=(-1.0, 1.0))
    c = solve_sphere_family(prof, 0.5, u0=0.0, n=2)
    i0 = int(np.argmin(np.abs(c.grid)))
    assert c.dphi[i0] == pytest.approx(1.0 / np.cos(c.grid[i0]), rel=1e-8)
    np.testing.assert_allclose(c.dphi, 1.0 / np.cos(c.grid), rtol=1e-6)
    assert c.meta["identity_error"] <= 1e-6


@pytest.mark.parametrize("c", [0.26, 0.255, 0.2505])
def test_sphere_family_lower_bound(c):
    prof = build_profile("linear", "double-well", value_range=(-0.9, 0.9))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", CoverageWarning)
        curve = solve_sphere_family(prof, c)
    assert np.all(curve.dphi >= np.sqrt(invert_K(prof, c - 0.25)) - 1e-12)


def test_sphere_family_coverage_length_grows_as_c_decreases():
    prof = build_profile("linear", "double-well", value_range=(-0.9, 0.9))
    lengths = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", CoverageWarning)
        for c in (0.26, 0.255, 0.2505):
            lengths.append(solve_sphere_family(prof, c).meta["covered_length"])
    assert lengths[0] < lengths[1] < lengths[2]


def test_sphere_family_requires_c_above_cu():
    prof = build_profile("linear", "double-well", value_range=(-0.9, 0.9))
    with pytest.raises(ParameterError):
        solve_sphere_family(prof, 0.25)


# --- Modica ---------------------------------------------------------------------


def test_modica_converges_to_kink():
    # K(phi'^2) = c + (1 - phi^2)^2 / 4 tends to the kink's first integral as c -> 0
    prof = build_profile("linear", "allen-cahn-well", value_range=(-0.9, 0.9))
    errors = []
    for c in (1e-2, 1e-4):
        curve = modica_barrier(prof, c)
        s_mid = curve.grid[int(np.argmin(np.abs(curve.phi)))]
        errors.append(np.max(np.abs(curve.phi - np.tanh((curve.grid - s_mid) / SQ2))))
    assert errors[1] < 0.05 * errors[0]
    assert errors[1] <= 1e-3


def test_modica_flat_potential_gives_unit_slope():
    prof = build_profile("linear", "zero", value_range=(0.0, 2.0))
    curve = modica_barrier(prof, 0.5)
    np.testing.assert_allclose(curve.dphi, 1.0, atol=1e-12)
    np.testing.assert_allclose(curve.phi, curve.grid, atol=1e-12)


@pytest.mark.parametrize("p", [2.0, 3.0])
@pytest.mark.parametrize("potential", ["allen-cahn-well", "double-well"])
def test_modica_quadrature_matches_ode(p, potential):
    prof = build_profile({"kind": "p-laplace", "p": p}, potential, value_range=(-0.9, 0.9))
    from barrier_bound.profiles import c_sup

    curve = modica_barrier(prof, c_sup(prof) + 1e-2)
    assert modica_crosscheck(prof, curve) <= 1e-6
    first = eval_K(prof, curve.dphi ** 2) + prof.potential(curve.phi) - curve.c
    assert np.max(np.abs(first)) <= 1e-10


def test_modica_requires_c_above_cu():
    prof = build_profile("linear", "double-well", value_range=(-0.9, 0.9))
    with pytest.raises(ParameterError, match="c > c_u"):
        modica_barrier(prof, 0.25)


# --- inverse --------------------------------------------------------------------


def test_inverse_identity():
    z = np.linspace(0.0, 1.0, 33)
    inv = invert_barrier(BarrierCurve(grid=z, phi=z, dphi=np.ones_like(z), kind="flat"))
    v = np.linspace(0.0, 1.0, 101)
    np.testing.assert_allclose(inv.psi(v), v, atol=1e-15)


def test_inverse_of_kink():
    inv = invert_barrier(kink_curve(n=8193))
    assert inv.psi(0.5) == pytest.approx(SQ2 * np.arctanh(0.5), abs=1e-9)


def test_inverse_chain_rule_at_midpoints():
    curve = kink_curve(n=8193)
    inv = invert_barrier(curve)
    mid = 0.5 * (curve.grid[1:] + curve.grid[:-1])
    prod = inv.dpsi(curve.phi_at(mid)) * curve.dphi_at(mid)
    assert np.max(np.abs(prod - 1.0)) <= 1e-8


def test_inverse_domain_error():
    inv = invert_barrier(kink_curve(-0.5, 0.5))
    with pytest.raises(DomainError):
        inv.psi(0.9)


def test_constant_barrier_inverse_is_zero():
    inv = invert_barrier(constant_barrier(0.2))
    assert inv.is_constant
    assert float(inv.psi(0.2)) == 0.0


def test_non_monotone_curve_rejected():
    z = np.linspace(0.0, 1.0, 5)
    with pytest.raises(MonotonicityError):
        BarrierCurve(grid=z, phi=z, dphi=np.array([1.0, 1.0, 0.0, 1.0, 1.0]), kind="flat")
