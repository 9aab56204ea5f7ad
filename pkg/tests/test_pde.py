from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from barrier_bound.barriers import solve_warped_barrier
from barrier_bound.errors import ParameterError
from barrier_bound.geometry import Circle, FlatTorus, Line, RadialBall, WarpedProduct, warp_factor
from barrier_bound.pde import (
    ScalarField,
    analytic_field,
    field_gradient_norms,
    lift_barrier,
    make_seed,
    manufactured_forcing,
    prolong,
    relax_to_steady,
    solve_symmetric,
    torus_field,
)
from barrier_bound.profiles import IsotropicCoefficients, build_profile, coefficients_from_profile

LAPLACE = IsotropicCoefficients.constant()


# --- radial balls ---------------------------------------------------------------


def test_ball_zero_data_gives_zero():
    f = solve_symmetric(RadialBall(3, 1.0), LAPLACE, {"type": "dirichlet", "value": 0.0})
    assert np.max(np.abs(f.values)) <= 1e-12
    assert f.certified


@pytest.mark.parametrize("radius", [1.0, 0.5])
def test_ball_torsion_polynomial(radius):
    coeffs = IsotropicCoefficients.constant(q=6.0)
    f = solve_symmetric(RadialBall(3, radius), coeffs, {"type": "dirichlet", "value": 0.0})
    r = f.coords[0]
    np.testing.assert_allclose(f.values, radius ** 2 - r ** 2, atol=1e-8)


# --- symmetric reductions -------------------------------------------------------


def test_lifted_warped_barrier_residual():
    coeffs = coefficients_from_profile(build_profile("linear", "allen-cahn-well"))
    curve = solve_warped_barrier(coeffs, -1.0, 2, 0.0, 0.0, 1.0, (-0.5, 0.5))
    f = lift_barrier(curve, WarpedProduct(2, (0.0, 1.0), warp_factor(-1.0)), coeffs)
    assert f.residual_norm <= 1e-8


def test_circle_neumann_reduction_has_zero_end_slopes():
    prof = build_profile("linear", "allen-cahn-well")
    f = solve_symmetric(Circle(1.5), coefficients_from_profile(prof), {"type": "neumann", "bracket": [0.5, 0.99]})
    u = f.values
    n = u.size
    assert f.certified
    np.testing.assert_allclose(u[1:], u[1:][::-1], atol=1e-12)
    assert np.argmax(u) == 0 and np.argmin(u) == n // 2
    assert f.gradient_norm[0] <= 1e-12 and f.gradient_norm[n // 2] <= 1e-12
    assert 0.5 <= u.max() <= 0.99


def test_circle_needs_neumann():
    with pytest.raises(ParameterError):
        solve_symmetric(Circle(1.0), LAPLACE, {"type": "dirichlet", "values": [0.0, 1.0]})


# --- gradient norms -------------------------------------------------------------


def test_gradient_norm_of_sine_on_circle():
    circle = Circle(1.0 / (2.0 * np.pi))
    x = np.arange(256) / 256.0
    f = field_gradient_norms(ScalarField(circle, (x,), np.sin(2 * np.pi * x)))
    assert np.max(np.abs(f.gradient_norm - 2 * np.pi * np.abs(np.cos(2 * np.pi * x)))) <= 1e-6


def test_gradient_norm_of_constant_and_coordinate():
    tor = FlatTorus((1.0, 1.0))
    x = np.arange(16) / 16.0
    const = field_gradient_norms(ScalarField(tor, (x, x), np.full((16, 16), 0.3)))
    assert np.max(const.gradient_norm) == 0.0
    wp = WarpedProduct(2, (0.0, 1.0), warp_factor(-1.0))
    s = np.linspace(0.0, 1.0, 65)
    lin = field_gradient_norms(ScalarField(wp, (s,), s.copy()))
    np.testing.assert_allclose(lin.gradient_norm, 1.0, atol=1e-12)


def test_minkowski_gradient_uses_dual_norm():
    from barrier_bound.geometry import LpNorm

    tor = FlatTorus((2 * np.pi, 2 * np.pi), LpNorm(4.0 / 3.0, 2))
    x = np.arange(64) * (2 * np.pi / 64)
    X, Y = np.meshgrid(x, x, indexing="ij")
    f = field_gradient_norms(ScalarField(tor, (x, x), np.sin(X + Y)))
    np.testing.assert_allclose(f.gradient_norm, 2.0 ** 0.25 * np.abs(np.cos(X + Y)), atol=1e-5)


# --- manufactured forcing -------------------------------------------------------


def test_manufactured_circle_forcing():
    circle = Circle(1.0 / (2.0 * np.pi))
    q, mask = manufactured_forcing(circle, lambda x: np.sin(2 * np.pi * x), LAPLACE, resolution=256)
    x = np.arange(256) / 256.0
    np.testing.assert_allclose(q, 4 * np.pi ** 2 * np.sin(2 * np.pi * x), atol=1e-8)


def test_manufactured_constant_needs_no_forcing():
    tor = FlatTorus((1.0, 1.0))
    q, _ = manufactured_forcing(tor, lambda x, y: 0.7 + 0 * x, build_profile("linear"), resolution=(16, 16))
    assert np.max(np.abs(q)) == 0.0


def test_manufactured_plaplace_is_an_exact_grid_solution():
    prof = build_profile({"kind": "p-laplace", "p": 3.0}, "zero")
    tor = FlatTorus((1.0, 1.0))
    func = lambda x, y: np.sin(2 * np.pi * x) + np.cos(2 * np.pi * y)  # noqa: E731
    q, _ = manufactured_forcing(tor, func, prof, resolution=(32, 32))
    f = torus_field(tor, prof, func(*np.meshgrid(*(np.arange(32) / 32.0,) * 2, indexing="ij")), source=q)
    assert f.residual_norm <= 1e-9


# --- relaxation -----------------------------------------------------------------


def test_relax_without_reaction_reaches_constant():
    tor = FlatTorus((1.0, 1.0))
    prof = build_profile("linear", "zero")
    seed = make_seed(tor, (16, 16), "random", amplitude=0.5, offset=0.2, seed=3)
    f = relax_to_steady(tor, prof, seed, tol=1e-10)
    assert f.certified and f.is_constant
    assert np.mean(f.values) == pytest.approx(np.mean(seed), abs=1e-9)


def test_allen_cahn_stripe_steady_state():
    tor = FlatTorus((3 * np.pi, 3 * np.pi))
    prof = build_profile("linear", "allen-cahn-well")
    f = relax_to_steady(tor, prof, make_seed(tor, (64, 64), "stripe", 0.5), tol=1e-9)
    assert f.residual_norm <= 1e-9
    lo, hi = f.range
    assert hi - lo > 0.5 and not f.is_constant
    assert np.max(np.abs(f.values - f.values[:, :1])) <= 1e-8


def test_newton_method_and_unknown_method():
    tor = FlatTorus((5.0, 5.0))
    prof = build_profile("linear", "double-well")
    f = relax_to_steady(tor, prof, make_seed(tor, (32, 32), "stripe", 0.35, offset=1.0), tol=1e-9, method="newton")
    assert f.certified and f.meta["method"] == "newton"
    with pytest.raises(ParameterError):
        relax_to_steady(tor, prof, f, method="multigrid")


def test_relax_rejects_non_torus_and_bad_shape():
    prof = build_profile("linear")
    with pytest.raises(ParameterError):
        relax_to_steady(Circle(1.0), prof, np.zeros(8))
    with pytest.raises(ParameterError):
        make_seed(FlatTorus((1.0, 1.0)), (12, 12))


@given(st.integers(2, 4), st.integers(0, 3))
def test_prolong_reproduces_band_limited_data(k_coarse, mode):
    n = 2 ** k_coarse * 4
    x = np.arange(n) / n
    fine = np.arange(2 * n) / (2 * n)
    f = lambda a, b: np.cos(2 * np.pi * mode * a)[:, None] + np.sin(2 * np.pi * b)[None, :]  # noqa: E731
    np.testing.assert_allclose(prolong(f(x, x), (2 * n, 2 * n)), f(fine, fine), atol=1e-12)


# --- fields ---------------------------------------------------------------------


def test_is_constant_respects_tolerance():
    line = Line((0.0, 1.0))
    x = np.linspace(0.0, 1.0, 5)
    assert ScalarField(line, (x,), np.full(5, 2.0)).is_constant
    assert ScalarField(line, (x,), 1e-10 * x, tolerance=1e-9).is_constant
    assert not ScalarField(line, (x,), 1e-6 * x, tolerance=1e-9).is_constant


def test_analytic_kink_residual():
    prof = build_profile("linear", "allen-cahn-well")
    x = np.linspace(-8.0, 8.0, 2049)
    f = analytic_field(Line((-8.0, 8.0)), lambda s: np.tanh(s / np.sqrt(2)), x,
                       gradient=lambda s: (1 - np.tanh(s / np.sqrt(2)) ** 2) / np.sqrt(2),
                       coeffs=coefficients_from_profile(prof))
    assert f.residual_norm <= 1e-8
