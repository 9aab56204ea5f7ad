"""One-dimensional barrier curves and their inverses.

Four constructions are provided:

* :func:`solve_flat_barrier` shoots ``alpha phi'' + q = -delta z beta phi'`` from
  ``phi(a) = m`` to ``phi(b) = M``;
* :func:`solve_warped_barrier` does the same with the drift ``(n-1) rho'/rho``
  of a hyperbolic warp;
* :func:`solve_sphere_family` integrates the spherical family outward from the
  maximiser of ``Q``;
* :func:`modica_barrier` builds the curve with ``K(phi'^2) = c - Q(phi)`` by
  quadrature and inverts it.

Curves are reported on a uniform grid of :data:`REPORT_POINTS` samples.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicHermiteSpline
from scipy.optimize import brentq

from .errors import (ConstructionError, CoverageWarning, DomainError, InvalidWarpError,
                     MonotonicityError, ParameterError)
from .geometry import Warp, warp_factor
from .profiles import (IsotropicCoefficients, VariationalProfile, c_sup, c_sup_argmax, eval_K,
                       invert_K)

REPORT_POINTS = 1025
RTOL = 1e-12
ATOL = 1e-12
SHOOT_MAXITER = 80
MODICA_NODES = 4097
_SPHERE_EDGE = 1e-6


def fd4(y, h):
    """Fourth-order finite-difference derivative of uniformly spaced samples."""
    y = np.asarray(y, dtype=float)
    n = y.size
    if n < 5:
        return np.gradient(y, h)
    d = np.empty_like(y)
    d[2:-2] = (y[:-4] - 8.0 * y[1:-3] + 8.0 * y[3:-1] - y[4:]) / (12.0 * h)
    d[0] = (-25 * y[0] + 48 * y[1] - 36 * y[2] + 16 * y[3] - 3 * y[4]) / (12.0 * h)
    d[1] = (-3 * y[0] - 10 * y[1] + 18 * y[2] - 6 * y[3] + y[4]) / (12.0 * h)
    d[-1] = (25 * y[-1] - 48 * y[-2] + 36 * y[-3] - 16 * y[-4] + 3 * y[-5]) / (12.0 * h)
    d[-2] = (3 * y[-1] + 10 * y[-2] - 18 * y[-3] + 6 * y[-4] - y[-5]) / (12.0 * h)
    return d


@dataclass(frozen=True)
class BarrierCurve:
    """A strictly increasing ``phi`` sampled on ``grid`` with ``phi'`` and ``phi''``.

    ``kind`` is one of ``flat``, ``warped``, ``sphere-family``, ``modica`` or
    ``constant``; the last is the degenerate curve used for constant fields.
    """

    grid: np.ndarray
    phi: np.ndarray
    dphi: np.ndarray
    kind: str
    ddphi: np.ndarray | None = None
    delta: float = 0.0
    c: float | None = None
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        for name in ("grid", "phi", "dphi"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))
        if self.ddphi is not None:
            object.__setattr__(self, "ddphi", np.asarray(self.ddphi, dtype=float))
        if self.is_constant:
            return
        if not (self.grid.shape == self.phi.shape == self.dphi.shape) or self.grid.size < 2:
            raise ConstructionError("grid, phi and dphi must be equal-length arrays with >= 2 samples")
        if np.any(np.diff(self.grid) <= 0):
            raise ConstructionError("barrier grid must be strictly increasing")
        if np.any(self.dphi <= 0):
            k = int(np.argmin(self.dphi))
            raise MonotonicityError(f"phi' <= 0 at z = {self.grid[k]:.6g}", z_fail=float(self.grid[k]))
        if np.any(np.diff(self.phi) <= 0):
            k = int(np.argmin(np.diff(self.phi)))
            raise MonotonicityError(f"phi not increasing near z = {self.grid[k]:.6g}",
                                    z_fail=float(self.grid[k]))

    @property
    def is_constant(self) -> bool:
        return self.kind == "constant"

    @property
    def interval(self) -> tuple[float, float]:
        return float(self.grid[0]), float(self.grid[-1])

    @property
    def range(self) -> tuple[float, float]:
        return float(self.phi[0]), float(self.phi[-1])

    def phi_at(self, z):
        return CubicHermiteSpline(self.grid, self.phi, self.dphi)(z)

    def dphi_at(self, z):
        if self.ddphi is not None:
            return CubicHermiteSpline(self.grid, self.dphi, self.ddphi)(z)
        return CubicHermiteSpline(self.grid, self.dphi, fd4(self.dphi, self.grid[1] - self.grid[0]))(z)

    def summary(self) -> dict:
        out = {"kind": self.kind, "delta": self.delta, "c": self.c}
        if not self.is_constant:
            out.update(interval=list(self.interval), range=list(self.range),
                       min_dphi=float(self.dphi.min()), samples=int(self.grid.size))
        else:
            out.update(value=float(self.phi[0]))
        out.update({k: v for k, v in self.meta.items() if isinstance(v, (int, float, str, bool))})
        return out


def constant_barrier(value: float) -> BarrierCurve:
    """Placeholder curve for a zero-length range; audits treat it as trivially satisfied."""
    v = float(value)
    return BarrierCurve(grid=np.zeros(1), phi=np.array([v]), dphi=np.zeros(1), kind="constant")


# --- shooting -----------------------------------------------------------------


def _second_derivative(coeffs: IsotropicCoefficients, drift):
    """Right-hand side ``phi'' = -(q + drift(z) beta phi') / alpha``."""

    def rhs(z, y):
        u, du = y
        t = abs(du)
        a = float(coeffs.alpha(u, t))
        b = float(coeffs.beta(u, t))
        qv = float(coeffs.q(u, t))
        if not a > 0:
            raise MonotonicityError(f"alpha vanished at z = {z:.6g}", z_fail=float(z))
        return [du, -(qv + drift(z) * b * du) / a]

    return rhs


def _flight(rhs, a, span, m, M, s, max_step=np.inf):
    """Integrate from ``(a, m, s)`` until ``phi = M`` or ``phi' = 0``; return the solution.

    ``max_step`` keeps the integrator from stepping over a double crossing of
    ``phi = M``, which happens on exactly integrable (polynomial) solutions.
    """

    def hit(z, y):
        return y[0] - M
    hit.terminal, hit.direction = True, 1.0

    def stall(z, y):
        return y[1]
    stall.terminal, stall.direction = True, -1.0

    try:
        return solve_ivp(rhs, (a, a + span), [m, s], method="RK45", rtol=RTOL, atol=ATOL,
                         events=(hit, stall), dense_output=True, max_step=max_step)
    except (MonotonicityError, DomainError, FloatingPointError, OverflowError, ValueError):
        return None


def _hit_time(sol):
    if sol is None or sol.status != 1 or len(sol.t_events[0]) == 0:
        return math.inf
    return float(sol.t_events[0][0])


def _shoot(rhs, a, b, m, M, slope_bracket=None):
    """Find the initial slope ``s`` with ``phi(b) = M``. Returns ``(s, solution, iterations)``."""
    L = b - a
    span = 50.0 * L
    cache = {}

    def z_hit(s):
        if s not in cache:
            cache[s] = _flight(rhs, a, span, m, M, s, max_step=L / 64.0)
        return _hit_time(cache[s]) - a

    if slope_bracket is None:
        guess = (M - m) / L
        lo, hi = guess, guess
        for _ in range(60):
            if z_hit(hi) < L:
                break
            hi *= 2.0
        for _ in range(60):
            if z_hit(lo) > L:
                break
            lo *= 0.5
    else:
        lo, hi = map(float, slope_bracket)
    if not (z_hit(hi) < L < z_hit(lo)):
        sol = cache.get(lo)
        if sol is not None and sol.status == 1 and len(sol.t_events[1]):
            zf = float(sol.t_events[1][0])
            raise MonotonicityError(f"phi' reaches 0 at z = {zf:.6g} before the range is covered",
                                    z_fail=zf)
        raise ConstructionError(f"shooting could not bracket an admissible slope in [{lo:.3g}, {hi:.3g}]")
    it = 0
    while not math.isfinite(z_hit(lo)) and it < SHOOT_MAXITER:
        mid = 0.5 * (lo + hi)
        if z_hit(mid) > L:
            lo = mid
        else:
            hi = mid
        it += 1
    if not math.isfinite(z_hit(lo)):
        raise ConstructionError("hit time jumps past b: no initial slope reaches the range end at b")
    if abs(z_hit(lo) - L) == 0:
        s = lo
    elif abs(z_hit(hi) - L) == 0:
        s = hi
    else:
        s, r = brentq(lambda x: z_hit(x) - L, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps,
                      maxiter=SHOOT_MAXITER, full_output=True)
        it += r.iterations
    z_hit(s)
    return s, cache[s], it


def _curve_from_solution(sol, rhs, a, z_end, kind, n_points, **kw):
    grid = np.linspace(a, z_end, n_points)
    y = sol.sol(grid)
    phi, dphi = y[0], y[1]
    dd = np.array([rhs(z, yy)[1] for z, yy in zip(grid, y[:2].T)])
    return BarrierCurve(grid=grid, phi=phi, dphi=dphi, ddphi=dd, kind=kind, **kw)


def _ode_residual(curve: BarrierCurve, coeffs: IsotropicCoefficients, drift) -> np.ndarray:
    """``alpha phi'' + q + drift beta phi'`` with ``phi''`` from finite differences of ``phi'``."""
    h = curve.grid[1] - curve.grid[0]
    dd = fd4(curve.dphi, h)
    t = np.abs(curve.dphi)
    a, b, qv = coeffs.evaluate(curve.phi, t)
    return a * dd + qv + drift(curve.grid) * b * curve.dphi


def monotonicity_quantity(curve: BarrierCurve, coeffs: IsotropicCoefficients) -> np.ndarray:
    """``(q + phi'' alpha) / (phi' beta)`` at the samples, ``phi''`` by finite differences."""
    h = curve.grid[1] - curve.grid[0]
    dd = fd4(curve.dphi, h)
    a, b, qv = coeffs.evaluate(curve.phi, np.abs(curve.dphi))
    return (qv + dd * a) / (curve.dphi * b)


def solve_flat_barrier(coeffs: IsotropicCoefficients, a: float, b: float, target_range, delta: float = 0.0,
                       slope_bracket=None, n_points: int = REPORT_POINTS) -> BarrierCurve:
    """Barrier on ``[a, b]`` with ``phi(a) = m``, ``phi(b) = M`` for the flat, delta-perturbed ODE."""
    m, M = map(float, target_range)
    if delta < 0:
        raise ParameterError("delta must be nonnegative")
    if not b > a:
        raise ParameterError("need a < b")
    if M == m:
        return constant_barrier(m)
    if M < m:
        raise ParameterError(f"empty target range [{m}, {M}]")
    drift = (lambda z: delta * np.asarray(z)) if delta else (lambda z: 0.0 * np.asarray(z))
    rhs = _second_derivative(coeffs, lambda z: delta * z)
    s0, sol, its = _shoot(rhs, a, b, m, M, slope_bracket)
    z_end = _hit_time(sol)
    curve = _curve_from_solution(sol, rhs, a, z_end, "flat", n_points, delta=float(delta))
    res = _ode_residual(curve, coeffs, drift)
    curve.meta.update(initial_slope=s0, shooting_iterations=its, target_b=float(b),
                      endpoint_mismatch=float(z_end - b), residual=float(np.max(np.abs(res[2:-2]))))
    mq = monotonicity_quantity(curve, coeffs)
    curve.meta["monotonicity_max_slope"] = float(np.max(np.diff(mq[2:-2])))
    return curve


def solve_warped_barrier(coeffs: IsotropicCoefficients, kappa: float, n: int, z0: float, a: float, b: float,
                         target_range, slope_bracket=None, n_points: int = REPORT_POINTS,
                         warp: Warp | None = None) -> BarrierCurve:
    """Barrier for ``alpha phi'' + q + (n-1)(rho'/rho) beta phi' = 0`` with ``rho = cosh``."""
    m, M = map(float, target_range)
    warp = warp or warp_factor(kappa, z0)
    if not b > a:
        raise ParameterError("need a < b")
    dl = warp.d_log_derivative(np.linspace(a, b, 1001))
    if np.any(dl <= 0):
        raise InvalidWarpError("(rho'/rho)' must be positive on the interval")
    if M == m:
        return constant_barrier(m)
    if M < m:
        raise ParameterError(f"empty target range [{m}, {M}]")
    drift = lambda z: (n - 1) * warp.log_derivative(z)  # noqa: E731
    rhs = _second_derivative(coeffs, drift)
    s0, sol, its = _shoot(rhs, a, b, m, M, slope_bracket)
    z_end = _hit_time(sol)
    curve = _curve_from_solution(sol, rhs, a, z_end, "warped", n_points)
    res = _ode_residual(curve, coeffs, drift)
    curve.meta.update(initial_slope=s0, shooting_iterations=its, target_b=float(b), kappa=float(kappa),
                      n=int(n), z0=float(z0), endpoint_mismatch=float(z_end - b),
                      residual=float(np.max(np.abs(res[2:-2]))))
    return curve


# --- spherical family ---------------------------------------------------------


def solve_sphere_family(profile: VariationalProfile, c: float, u0: float | None = None, n: int = 2,
                        n_points: int = REPORT_POINTS, identity_tol: float = 1e-6) -> BarrierCurve:
    """Integrate ``Lambda phi'' + q = (n-1) tan z Phi' phi'`` from the maximiser ``u0`` of ``Q``.

    The curve starts at ``phi(0) = u0`` with ``phi'(0) = sqrt(K^{-1}(c - c_u))`` and
    is continued both ways until it leaves ``profile.value_range`` or comes within
    ``1e-6`` of ``z = +-pi/2``. Incomplete coverage is reported as a
    :class:`CoverageWarning`.
    """
    m, M = profile.value_range
    cu, arg = c_sup_argmax(profile)
    if not c > cu:
        raise ParameterError(f"family parameter requires c > c_u (c = {c}, c_u = {cu})")
    if u0 is None:
        u0 = arg
    if not (m <= u0 <= M) or abs(float(profile.potential(u0)) - cu) > 1e-10 * max(1.0, abs(cu)):
        raise ParameterError(f"u0 = {u0} is not a maximiser of Q on [{m}, {M}]")
    slope0 = math.sqrt(float(invert_K(profile, c - cu)))

    def rhs(z, y):
        u, du, _ = y
        s = du * du
        lam = float(profile.Lambda(s))
        d1 = float(profile.dphi(s))
        drift = (n - 1) * math.tan(z)
        return [du, (drift * d1 * du - float(profile.potential_derivative(u))) / lam, drift * d1 * s]

    def run(bound, target, direction):
        def hit(z, y):
            return y[0] - target
        hit.terminal, hit.direction = True, 0.0
        sol = solve_ivp(rhs, (0.0, bound), [u0, slope0, 0.0], method="RK45", rtol=RTOL, atol=ATOL,
                        events=hit, dense_output=True, max_step=0.02)
        done = len(sol.t_events[0]) > 0
        return sol, (float(sol.t_events[0][0]) if done else float(sol.t[-1])), done

    edge = math.pi / 2 - _SPHERE_EDGE
    fwd, z_hi, ok_hi = run(edge, M, 1) if u0 < M else (None, 0.0, True)
    bwd, z_lo, ok_lo = run(-edge, m, -1) if u0 > m else (None, 0.0, True)
    if not (ok_hi and ok_lo):
        warnings.warn(f"sphere family c={c}: range [{m}, {M}] not covered inside (-pi/2, pi/2)",
                      CoverageWarning, stacklevel=2)
    grid = np.linspace(z_lo, z_hi, n_points)
    y = np.empty((3, n_points))
    neg = grid < 0
    if bwd is not None and neg.any():
        y[:, neg] = bwd.sol(grid[neg])
    if fwd is not None and (~neg).any():
        y[:, ~neg] = fwd.sol(grid[~neg])
    phi, dphi, integral = y
    dd = np.array([rhs(z, yy)[1] for z, yy in zip(grid, y.T)])
    kinetic = eval_K(profile, dphi * dphi)
    identity = kinetic + profile.potential(phi) - c - integral
    # phi' grows like 1/cos z near the poles, so the identity is checked relative to its size
    ident_err = float(np.max(np.abs(identity) / np.maximum(1.0, np.abs(kinetic))))
    if ident_err > identity_tol:
        raise ConstructionError(f"sphere family first-integral identity off by {ident_err:.3g}")
    lower = math.sqrt(float(invert_K(profile, c - cu)))
    curve = BarrierCurve(grid=grid, phi=phi, dphi=dphi, ddphi=dd, kind="sphere-family", c=float(c))
    curve.meta.update(c_u=float(cu), u0=float(u0), n=int(n), identity_error=ident_err,
                      lower_bound=lower, lower_bound_margin=float(np.min(dphi) - lower),
                      covered=bool(ok_hi and ok_lo), covered_length=float(z_hi - z_lo))
    return curve


# --- Modica quadrature --------------------------------------------------------

_GL_HI = np.polynomial.legendre.leggauss(20)
_GL_LO = np.polynomial.legendre.leggauss(10)


def _gauss(f, lo, hi, rule):
    x, w = rule
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    pts = mid[:, None] + half[:, None] * x[None, :]
    return half * (f(pts.ravel()).reshape(pts.shape) @ w)


def _panel_integrals(f, lo, hi, tol=1e-14, depth=0):
    """Adaptive Gauss-Legendre on many panels at once (20-point rule checked against 10-point)."""
    fine = _gauss(f, lo, hi, _GL_HI)
    coarse = _gauss(f, lo, hi, _GL_LO)
    bad = np.abs(fine - coarse) > tol * np.maximum(1.0, np.abs(fine))
    if bad.any() and depth < 30:
        mid = 0.5 * (lo[bad] + hi[bad])
        left = _panel_integrals(f, lo[bad], mid, tol, depth + 1)
        right = _panel_integrals(f, mid, hi[bad], tol, depth + 1)
        fine[bad] = left + right
    return fine


def modica_integrand(profile: VariationalProfile, c: float):
    """``1 / sqrt(K^{-1}(c - Q(phi)))``, the ``ds/dphi`` of the Modica curve."""

    def g(v):
        return 1.0 / np.sqrt(invert_K(profile, c - profile.potential(v)))
    return g


def modica_barrier(profile: VariationalProfile, c: float, s0: float = 0.0, value_range=None,
                   n_points: int = REPORT_POINTS, nodes: int = MODICA_NODES,
                   newton_steps: int = 6) -> BarrierCurve:
    """Curve with ``K(phi'^2) = c - Q(phi)`` from ``phi(s0) = inf u`` to ``sup u``.

    ``s(phi) = s0 + int_m^phi dv / sqrt(K^{-1}(c - Q(v)))`` is evaluated on ``nodes``
    panels (split at the maximiser of ``Q``) and inverted on a uniform ``s``-grid
    by Hermite interpolation followed by Newton steps.
    """
    m, M = value_range if value_range is not None else profile.value_range
    m, M = float(m), float(M)
    cu, arg = c_sup_argmax(profile, (m, M))
    if not c > cu:
        raise ParameterError(f"Modica barrier requires c > c_u (c = {c}, c_u = {cu})")
    if M == m:
        return constant_barrier(m)
    g = modica_integrand(profile, c)
    knots = np.linspace(m, M, nodes)
    if m < arg < M:
        knots = np.unique(np.append(knots, arg))
    seg = _panel_integrals(g, knots[:-1], knots[1:])
    s_knots = s0 + np.concatenate([[0.0], np.cumsum(seg)])
    grid = np.linspace(s0, s_knots[-1], n_points)
    guess = CubicHermiteSpline(s_knots, knots, 1.0 / g(knots))(grid)
    guess = np.clip(guess, m, M)
    idx = np.clip(np.searchsorted(knots, guess, side="right") - 1, 0, knots.size - 2)
    phi = guess
    for _ in range(newton_steps):
        base = knots[idx]
        partial = np.zeros_like(phi)
        off = phi != base
        if off.any():
            partial[off] = _panel_integrals(g, base[off], phi[off])
        resid = s_knots[idx] + partial - grid
        phi = np.clip(phi - resid / g(phi), m, M)
        idx = np.clip(np.searchsorted(knots, phi, side="right") - 1, 0, knots.size - 2)
        if np.max(np.abs(resid)) < 1e-14 * max(1.0, abs(grid[-1])):
            break
    phi[0], phi[-1] = m, M
    dphi = np.sqrt(invert_K(profile, c - profile.potential(phi)))
    ddphi = -profile.potential_derivative(phi) / profile.Lambda(dphi * dphi)
    curve = BarrierCurve(grid=grid, phi=phi, dphi=dphi, ddphi=ddphi, kind="modica", c=float(c))
    first = eval_K(profile, dphi * dphi) + profile.potential(phi) - c
    curve.meta.update(c_u=float(cu), s0=float(s0), first_integral_residual=float(np.max(np.abs(first))),
                      inversion_residual=float(np.max(np.abs(resid))))
    return curve


def modica_ode_curve(profile: VariationalProfile, curve: BarrierCurve) -> np.ndarray:
    """Integrate ``Lambda(phi'^2) phi'' + q(phi) = 0`` from the curve's left data; return phi on its grid."""

    def rhs(s, y):
        u, du = y
        return [du, -float(profile.potential_derivative(u)) / float(profile.Lambda(du * du))]

    sol = solve_ivp(rhs, curve.interval, [curve.phi[0], curve.dphi[0]], method="RK45",
                    rtol=RTOL, atol=1e-12, t_eval=curve.grid)
    if not sol.success:
        raise ConstructionError(f"cross-check integration failed: {sol.message}")
    return sol.y[0]


def modica_crosscheck(profile: VariationalProfile, curve: BarrierCurve) -> float:
    """Sup-norm distance between the quadrature curve and direct ODE integration."""
    return float(np.max(np.abs(modica_ode_curve(profile, curve) - curve.phi)))


# --- inverse ------------------------------------------------------------------


def _fritsch_carlson(x, y, d):
    """Limit Hermite slopes so each cubic piece stays monotone."""
    d = d.copy()
    sec = np.diff(y) / np.diff(x)
    a = d[:-1] / sec
    b = d[1:] / sec
    r = np.hypot(a, b)
    over = r > 3.0
    if over.any():
        t = 3.0 / r[over]
        k = np.nonzero(over)[0]
        d[k] = np.minimum(d[k], t * a[over] * sec[over])
        d[k + 1] = np.minimum(d[k + 1], t * b[over] * sec[over])
    return d


@dataclass(frozen=True)
class InverseBarrier:
    """Monotone cubic ``psi`` with ``psi(phi(z_i)) = z_i`` at the curve samples."""

    curve: BarrierCurve
    psi_spline: object = None
    margin: float = 1e-12

    @property
    def domain(self) -> tuple[float, float]:
        return self.curve.range

    @property
    def is_constant(self) -> bool:
        return self.curve.is_constant

    def _prepare(self, v, clip=True):
        v = np.asarray(v, dtype=float)
        lo, hi = self.domain
        tol = self.margin * max(1.0, abs(lo), abs(hi))
        if np.any(v < lo - tol) or np.any(v > hi + tol):
            raise DomainError(f"values [{v.min():.12g}, {v.max():.12g}] exceed barrier range "
                              f"[{lo:.12g}, {hi:.12g}]")
        return np.clip(v, lo, hi) if clip else v

    def psi(self, v):
        return self.psi_spline(self._prepare(v))

    def dpsi(self, v):
        return self.psi_spline.derivative()(self._prepare(v))

    __call__ = psi

    def dphi_of(self, v):
        """``phi'(psi(v))``."""
        return self.curve.dphi_at(self.psi(v))


def invert_barrier(curve: BarrierCurve) -> InverseBarrier:
    """Monotone piecewise-cubic inverse of ``curve`` with slopes ``1/phi'``."""
    if curve.is_constant:
        return InverseBarrier(curve=curve, psi_spline=lambda v: np.zeros_like(np.asarray(v, float)))
    slopes = _fritsch_carlson(curve.phi, curve.grid, 1.0 / curve.dphi)
    return InverseBarrier(curve=curve, psi_spline=CubicHermiteSpline(curve.phi, curve.grid, slopes))


__all__ = [
    "BarrierCurve", "InverseBarrier", "constant_barrier", "fd4", "invert_barrier", "modica_barrier",
    "modica_crosscheck", "modica_integrand", "modica_ode_curve", "monotonicity_quantity",
    "solve_flat_barrier", "solve_sphere_family", "solve_warped_barrier", "c_sup",
]
