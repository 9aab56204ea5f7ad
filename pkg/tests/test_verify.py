from __future__ import annotations

import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from barrier_bound.barriers import BarrierCurve, constant_barrier, invert_barrier, modica_barrier, solve_flat_barrier
from barrier_bound.errors import DomainError
from barrier_bound.geometry import FlatTorus, Line, RadialBall, WarpedProduct, warp_factor
from barrier_bound.pde import ScalarField, lift_barrier, make_seed, relax_to_steady, solve_symmetric
from barrier_bound.profiles import IsotropicCoefficients, build_profile, c_sup, coefficients_from_profile
from barrier_bound.verify import (
    ToleranceModel,
    _judge,
    combine_refinement,
    dirichlet_boundary_audit,
    gradient_audit,
    modica_audit,
    observed_order,
    rigidity_audit,
    two_point_audit,
    two_point_values,
)

SQ2 = np.sqrt(2.0)
AC = build_profile("linear", "allen-cahn-well")
AC_COEFFS = coefficients_from_profile(AC)


def kink_field(half_width=3.0, n=1025):
    s = np.linspace(-half_width, half_width, n)
    u = np.tanh(s / SQ2)
    return ScalarField(Line((-half_width, half_width)), (s,), u, gradient_norm=(1 - u ** 2) / SQ2)


def linear_inverse(lo, hi, slope=1.0):
    z = np.linspace(0.0, (hi - lo) / slope, 257)
    return invert_barrier(BarrierCurve(grid=z, phi=lo + slope * z, dphi=np.full(z.size, slope), kind="flat"))


@pytest.fixture(scope="module")
def stripe():
    tor = FlatTorus((3 * np.pi, 3 * np.pi))
    return relax_to_steady(tor, AC, make_seed(tor, (64, 64), "stripe", 0.5), tol=1e-10)


# --- two-point function ---------------------------------------------------------


def test_constant_field_two_point_is_minus_min_distance():
    tor = FlatTorus((1.0, 1.0))
    x = np.arange(8) / 8.0
    f = ScalarField(tor, (x, x), np.full((8, 8), 0.4))
    rep = two_point_audit(f, invert_barrier(constant_barrier(0.4)))
    assert rep.passed
    assert rep.max_defect == pytest.approx(-1.0 / 8.0)


def test_kink_against_its_own_barrier_is_the_equality_case():
    f = kink_field()
    a, b = f.coords[0][0], f.coords[0][-1]
    curve = solve_flat_barrier(AC_COEFFS, a, b, f.range)
    rep = two_point_audit(f, invert_barrier(curve))
    assert abs(rep.max_defect) <= 1e-9
    assert rep.details["forward_pair_max_abs"] <= 1e-9


@given(st.integers(0, 2 ** 32 - 1))
def test_two_point_antisymmetry(seed):
    rng = np.random.default_rng(seed)
    x = np.linspace(0.0, 1.0, 12)
    u = rng.uniform(-1.0, 1.0, 12)
    f = ScalarField(Line((0.0, 1.0)), (x,), u)
    inv = linear_inverse(-1.0, 1.0, slope=rng.uniform(0.5, 3.0))
    i, j = rng.integers(0, 12, size=2)
    zij = two_point_values(f, inv, i, j)
    zji = two_point_values(f, inv, j, i)
    assert zij + zji == pytest.approx(-2.0 * abs(x[i] - x[j]), abs=1e-12)


@given(st.integers(0, 2 ** 32 - 1), st.floats(1.0, 10.0))
def test_steeper_barrier_never_raises_the_two_point_maximum(seed, factor):
    rng = np.random.default_rng(seed)
    x = np.linspace(0.0, 1.0, 20)
    f = ScalarField(Line((0.0, 1.0)), (x,), rng.uniform(-1.0, 1.0, 20))
    base = two_point_audit(f, linear_inverse(-1.0, 1.0, 1.0)).max_defect
    steep = two_point_audit(f, linear_inverse(-1.0, 1.0, factor)).max_defect
    assert steep <= base + 1e-12


def test_stripe_two_point_and_gradient_are_strictly_negative(stripe):
    # at 64^2 the barrier gap must dominate the O(h^2) grid error, so offsets stop at 1e-3
    offsets = (1e-2, 1e-3)
    lo, hi = stripe.range
    prof = AC.with_range(lo, hi)
    cu = c_sup(prof, (lo, hi))
    tp, gr = [], []
    for off in offsets:
        curve = modica_barrier(prof, cu + off)
        inv = invert_barrier(curve)
        tp.append(two_point_audit(stripe, inv).max_defect)
        gr.append(gradient_audit(stripe, curve, inv).max_defect)
    assert all(v < 0 for v in tp + gr)
    assert abs(tp[0]) > abs(tp[1])
    assert abs(gr[0]) > abs(gr[1])


def test_uncertified_field_is_refused():
    f = kink_field()
    bad = ScalarField(f.model, f.coords, f.values, residual_norm=1.0, tolerance=1e-8)
    inv = linear_inverse(-1.0, 1.0)
    with pytest.raises(DomainError, match="refusing"):
        two_point_audit(bad, inv)
    with pytest.raises(DomainError):
        modica_audit(bad, AC)


def test_barrier_range_shorter_than_field_range():
    with pytest.raises(DomainError):
        two_point_audit(kink_field(), linear_inverse(-0.5, 0.5))


# --- gradient audit -------------------------------------------------------------


def test_gradient_audit_sharp_on_symmetric_solution():
    from barrier_bound.barriers import solve_warped_barrier

    curve = solve_warped_barrier(AC_COEFFS, -1.0, 2, 0.0, 0.0, 1.0, (-0.5, 0.5))
    f = lift_barrier(curve, WarpedProduct(2, (0.0, 1.0), warp_factor(-1.0)), AC_COEFFS)
    rep = gradient_audit(f, curve, invert_barrier(curve))
    assert abs(rep.max_defect) <= 1e-9
    assert "sharp" in rep.flags


def test_gradient_audit_on_constant_field():
    x = np.linspace(0.0, 1.0, 9)
    f = ScalarField(Line((0.0, 1.0)), (x,), np.zeros(9))
    curve = solve_flat_barrier(IsotropicCoefficients.constant(), 0.0, 2.0, (-1.0, 1.0))
    rep = gradient_audit(f, curve, invert_barrier(curve))
    assert rep.max_defect == pytest.approx(-curve.dphi.min(), rel=1e-8)


# --- Modica audit ---------------------------------------------------------------


def test_modica_audit_on_exact_kink():
    rep = modica_audit(kink_field(8.0, 2049), AC, c_u=0.0)
    assert rep.max_defect <= 1e-9 and rep.passed


def test_modica_audit_constant_at_potential_maximum():
    prof = build_profile("linear", "double-well")
    x = np.linspace(0.0, 1.0, 9)
    rep = modica_audit(ScalarField(Line((0.0, 1.0)), (x,), np.zeros(9)), prof)
    assert rep.max_defect == 0.0


def test_modica_audit_on_stripe(stripe):
    rep = modica_audit(stripe, AC, tolerance=ToleranceModel(floor=1e-9, C=0.1))
    assert rep.passed


# --- rigidity -------------------------------------------------------------------


def test_rigidity_on_stripe(stripe):
    rep = rigidity_audit(stripe, AC)
    assert rep.passed
    assert rep.details["interior_critical_points"] == 0


def test_rigidity_constant_field_is_vacuous():
    x = np.linspace(0.0, 1.0, 9)
    rep = rigidity_audit(ScalarField(Line((0.0, 1.0)), (x,), np.full(9, 0.3)), build_profile("linear"))
    assert rep.passed and "constant" in rep.flags


def test_rigidity_monotone_potential():
    prof = build_profile("linear", {"kind": "linear", "slope": 1.0})
    x = np.linspace(0.0, 1.0, 9)
    rep = rigidity_audit(ScalarField(Line((0.0, 1.0)), (x,), x.copy()), prof)
    assert rep.passed
    assert rep.details["c_u"] == pytest.approx(1.0)


def test_rigidity_flags_interior_maximum():
    prof = build_profile("linear", "double-well")
    x = np.linspace(-1.0, 1.0, 41)
    rep = rigidity_audit(ScalarField(Line((-1.0, 1.0)), (x,), 0.5 * x), prof)
    assert not rep.passed
    assert "interior-maximum-of-Q" in rep.flags


# --- Dirichlet ------------------------------------------------------------------


def test_dirichlet_torsion_against_flat_barrier():
    ball = RadialBall(3, 1.0)
    coeffs = IsotropicCoefficients.constant(q=6.0)
    f = solve_symmetric(ball, coeffs, {"type": "dirichlet", "value": 0.0})
    lo, hi = f.range
    curve = solve_flat_barrier(coeffs, 0.0, 0.5, (lo, hi))
    rep = dirichlet_boundary_audit(f, invert_barrier(curve), tolerance=ToleranceModel(floor=1e-8))
    assert rep.passed


def test_dirichlet_constant_field():
    r = np.linspace(0.0, 1.0, 17)
    f = ScalarField(RadialBall(3, 1.0), (r,), np.full(17, 0.2))
    assert dirichlet_boundary_audit(f, invert_barrier(constant_barrier(0.2))).passed


def test_dirichlet_requires_ball():
    with pytest.raises(DomainError):
        dirichlet_boundary_audit(kink_field(), linear_inverse(-1.0, 1.0))


# --- tolerance and refinement ---------------------------------------------------


def test_tolerance_threshold():
    tm = ToleranceModel(floor=1e-9, C=0.5)
    assert tm.threshold(None) == 1e-9
    assert tm.threshold(0.1) == pytest.approx(5e-3)


@given(st.floats(1.0, 3.0), st.floats(1e-3, 10.0))
def test_observed_order_recovers_power_law(order, const):
    hs = np.array([0.1, 0.05, 0.025])
    assert observed_order(hs, const * hs ** order) == pytest.approx(order, rel=1e-9)


def test_combine_refinement_calibrated_pass_and_order_failure():
    tm = ToleranceModel(floor=1e-12, calibrate=True)
    good = [_judge("modica", 0.3 * h * h, h, tm) for h in (0.1, 0.05, 0.025)]
    out = combine_refinement(good)
    assert out.passed and out.details["observed_order"] == pytest.approx(2.0)
    assert len(out.refinement_history) == 3
    slow = [_judge("modica", 0.3 * h, h, tm) for h in (0.1, 0.05, 0.025)]
    bad = combine_refinement(slow)
    assert not bad.passed and "order-below-threshold" in bad.flags


def test_single_level_calibration_is_inconclusive():
    rep = _judge("modica", 1e-3, 0.1, ToleranceModel(floor=1e-9, calibrate=True))
    assert rep.verdict == "inconclusive"


def test_report_serialises_non_finite_values():
    rep = _judge("rigidity", -np.inf, 0.1, ToleranceModel())
    d = json.loads(json.dumps(rep.to_dict()))
    assert d["max_defect"] == "-inf"
