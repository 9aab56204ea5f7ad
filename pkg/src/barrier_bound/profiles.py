"""Equation coefficients and the variational profile algebra.

The isotropic equation is

    [alpha(u,|Du|) n_i n_j + beta(u,|Du|)(delta_ij - n_i n_j)] D_ij u + q(u,|Du|) = 0,
    n = Du/|Du|,

and the variational family is ``div(Phi'(|Du|^2) Du) + q(u) = 0`` with
``q = Q'``. For the latter ``alpha = Lambda(t^2)`` and ``beta = Phi'(t^2)``
where

    K(s)      = Phi'(s) s - Phi(s)/2,
    Lambda(s) = 2 Phi''(s) s + Phi'(s) = 2 K'(s).

Sign convention: the reaction term enters with a plus sign, so the
Allen-Cahn equation ``Delta u + u - u^3 = 0`` has ``Q(u) = -(1-u^2)^2/4``
(built-in ``allen-cahn-well``) and Modica-type bounds read
``K(|Du|^2) <= c_u - Q(u)`` with ``c_u = sup Q`` over the range of ``u``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from numpy.polynomial import Polynomial
from scipy.interpolate import CubicSpline

from .errors import DomainError, ParameterError, RangeError

_EPS = np.finfo(float).eps
_FD_SCALE = _EPS ** (1.0 / 3.0)

ScalarFn = Callable[[np.ndarray], np.ndarray]
CoeffFn = Callable[[np.ndarray, np.ndarray], np.ndarray]


def central_difference(f: ScalarFn, x):
    """First derivative by central differences, step ``eps^(1/3) max(1,|x|)``."""
    x = np.asarray(x, dtype=float)
    h = _FD_SCALE * np.maximum(1.0, np.abs(x))
    return (f(x + h) - f(x - h)) / (2.0 * h)


def _finite(name, values, where):
    values = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(values)):
        bad = np.asarray(where, dtype=float)
        if bad.shape == values.shape:
            bad = bad[~np.isfinite(values)]
        raise DomainError(f"{name} is not finite at {np.ravel(bad)[:3]}")
    return values


@dataclass(frozen=True)
class IsotropicCoefficients:
    """The triple ``(alpha, beta, q)``, each a function of ``(u, t)`` with ``t = |Du|``."""

    alpha: CoeffFn
    beta: CoeffFn
    q: CoeffFn
    name: str = "custom"

    @classmethod
    def constant(cls, alpha=1.0, beta=1.0, q: Callable | float = 0.0, name="constant"):
        """Constant ``alpha``, ``beta``; ``q`` may depend on ``u`` only, or be a number."""
        a, b = float(alpha), float(beta)
        if callable(q):
            qf = lambda u, t: np.asarray(q(u), dtype=float) + 0.0 * np.asarray(t)  # noqa: E731
        else:
            qv = float(q)
            qf = lambda u, t: qv + 0.0 * np.asarray(u, dtype=float) + 0.0 * np.asarray(t)  # noqa: E731
        return cls(
            alpha=lambda u, t: a + 0.0 * np.asarray(t, dtype=float),
            beta=lambda u, t: b + 0.0 * np.asarray(t, dtype=float),
            q=qf,
            name=name,
        )

    def evaluate(self, u, t):
        """Return finite ``(alpha, beta, q)`` at ``(u, t)``; raises :class:`DomainError`."""
        t = np.asarray(t, dtype=float)
        if np.any(t < 0):
            raise DomainError("gradient norm must be nonnegative")
        a = _finite("alpha", self.alpha(u, t), t)
        b = _finite("beta", self.beta(u, t), t)
        qv = _finite("q", self.q(u, t), t)
        return a, b, qv

    def validate(self, u_samples, t_samples):
        """Check nonnegativity of alpha, beta and ``beta > 0`` for ``t > 0`` on a sample grid."""
        uu, tt = np.meshgrid(np.asarray(u_samples, float), np.asarray(t_samples, float))
        a, b, _ = self.evaluate(uu, tt)
        if np.any(a < 0) or np.any(b < 0):
            raise DomainError(f"{self.name}: alpha and beta must be nonnegative")
        if np.any(b[tt > 0] <= 0):
            raise DomainError(f"{self.name}: beta must be positive for t > 0")
        return True


@dataclass(frozen=True)
class VariationalProfile:
    """``Phi``, ``Q`` and derived quantities, with structure-condition metadata.

    Derivatives not supplied analytically are taken by central differences.
    ``value_range`` is the ``u``-interval ``[m, M]`` on which ``c_u`` and the
    barriers are computed.
    """

    Phi: ScalarFn
    Q: ScalarFn
    dPhi: ScalarFn | None = None
    d2Phi: ScalarFn | None = None
    q: ScalarFn | None = None
    p: float = 2.0
    tau: float = 0.0
    c1: float = 1.0
    c2: float = 1.0
    value_range: tuple[float, float] = (-1.0, 1.0)
    Lam: ScalarFn | None = None
    K_inverse: ScalarFn | None = None
    name: str = "custom"
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if not self.p > 1:
            raise ParameterError("structure exponent p must exceed 1")
        if self.tau < 0:
            raise ParameterError("tau must be nonnegative")
        if not (self.c1 > 0 and self.c2 > 0):
            raise ParameterError("structure constants c1, c2 must be positive")
        m, M = self.value_range
        if not M >= m:
            raise ParameterError(f"empty value range [{m}, {M}]")

    def with_range(self, m, M) -> "VariationalProfile":
        from dataclasses import replace

        return replace(self, value_range=(float(m), float(M)))

    def dphi(self, s):
        if self.dPhi is not None:
            return np.asarray(self.dPhi(np.asarray(s, float)), dtype=float)
        return central_difference(self.Phi, s)

    def d2phi(self, s):
        if self.d2Phi is not None:
            return np.asarray(self.d2Phi(np.asarray(s, float)), dtype=float)
        return central_difference(self.dphi, s)

    def potential_derivative(self, u):
        """``q(u) = Q'(u)``."""
        if self.q is not None:
            return np.asarray(self.q(np.asarray(u, float)), dtype=float)
        return central_difference(self.Q, u)

    def Lambda(self, s):
        s = np.asarray(s, dtype=float)
        if self.Lam is not None:
            return np.asarray(self.Lam(s), dtype=float)
        return 2.0 * self.d2phi(s) * s + self.dphi(s)

    def potential(self, u):
        return np.asarray(self.Q(np.asarray(u, float)), dtype=float)


def coefficients_from_profile(profile: VariationalProfile) -> IsotropicCoefficients:
    """Isotropic coefficients of ``div(Phi'(|Du|^2) Du) + q(u) = 0``."""

    def alpha(u, t):
        t = np.asarray(t, dtype=float)
        return _finite("Lambda(t^2)", profile.Lambda(t * t), t) + 0.0 * np.asarray(u, float)

    def beta(u, t):
        t = np.asarray(t, dtype=float)
        return _finite("Phi'(t^2)", profile.dphi(t * t), t) + 0.0 * np.asarray(u, float)

    def q(u, t):
        return profile.potential_derivative(u) + 0.0 * np.asarray(t, float)

    return IsotropicCoefficients(alpha=alpha, beta=beta, q=q, name=profile.name)


def eval_K(profile: VariationalProfile, s):
    """``K(s) = Phi'(s) s - Phi(s)/2`` for ``s >= 0``."""
    s = np.asarray(s, dtype=float)
    if np.any(s < 0):
        raise DomainError("K is defined for s >= 0 only")
    with np.errstate(invalid="ignore", divide="ignore"):
        out = profile.dphi(s) * s - 0.5 * np.asarray(profile.Phi(s), dtype=float)
    out = np.where(s == 0.0, 0.0, out)
    return out if out.ndim else float(out)


def invert_K(profile: VariationalProfile, t, rtol: float = 1e-12, method: str = "auto"):
    """Solve ``K(s) = t`` for ``s >= 0``, elementwise on arrays.

    ``method="auto"`` uses the profile's closed-form ``K_inverse`` when it has
    one and bracketing plus bisection with a secant polish otherwise;
    ``"bisect"`` always takes the numerical route. Either way the result
    satisfies ``|K(s) - t| <= rtol * max(1, |t|)``.
    """
    if method not in {"auto", "bisect"}:
        raise ParameterError(f"unknown K inversion method {method!r}")
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(~np.isfinite(t_arr)) or np.any(t_arr < 0):
        raise RangeError("K^{-1} needs finite t >= 0")
    K = lambda s: np.asarray(eval_K(profile, s), dtype=float)  # noqa: E731
    if method == "auto" and profile.K_inverse is not None:
        s = np.asarray(profile.K_inverse(t_arr), dtype=float)
    else:
        s = _bisect_K(K, t_arr)
    resid = np.abs(K(s) - t_arr)
    if np.any(resid > rtol * np.maximum(1.0, t_arr)):
        raise RangeError(f"K^{{-1}} residual {resid.max():.3e} above tolerance")
    return s if np.ndim(t) else float(s[0])


def _bisect_K(K, t_arr):
    lo = np.zeros_like(t_arr)
    hi = np.ones_like(t_arr)
    for _ in range(2100):
        short = K(hi) < t_arr
        if not short.any():
            break
        lo = np.where(short, hi, lo)
        hi = np.where(short, hi * 2.0, hi)
        if np.any(~np.isfinite(hi)):
            raise RangeError("t lies beyond the range of K")
    else:  # pragma: no cover
        raise RangeError("could not bracket K^{-1}(t)")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        below = K(mid) < t_arr
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
        if np.all(hi - lo <= 2.0 * _EPS * np.maximum(hi, np.finfo(float).tiny)):
            break
    k_lo, k_hi = K(lo), K(hi)
    span = k_hi - k_lo
    with np.errstate(invalid="ignore", divide="ignore"):
        frac = np.where(span > 0, (t_arr - k_lo) / span, 0.0)
    s = lo + np.clip(frac, 0.0, 1.0) * (hi - lo)
    return np.where(t_arr == 0.0, 0.0, s)


def _golden_max(f, a, b, tol=1e-12, maxiter=200):
    inv_phi = (np.sqrt(5.0) - 1.0) / 2.0
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(maxiter):
        if abs(b - a) <= tol * max(1.0, abs(a) + abs(b)):
            break
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


def c_sup_argmax(profile: VariationalProfile, value_range=None, samples: int = 4097, top: int = 5):
    """Return ``(c_u, u_star)``: the supremum of ``Q`` on the range and a maximiser."""
    m, M = value_range if value_range is not None else profile.value_range
    m, M = float(m), float(M)
    if M == m:
        return float(profile.potential(m)), m
    grid = np.linspace(m, M, samples)
    vals = profile.potential(grid)
    best_u = grid[int(np.argmax(vals))]
    best = float(vals.max())
    Qs = lambda x: float(profile.potential(x))  # noqa: E731
    for k in np.argsort(vals)[::-1][:top]:
        lo, hi = grid[max(k - 1, 0)], grid[min(k + 1, samples - 1)]
        x, fx = _golden_max(Qs, lo, hi)
        if fx > best:
            best, best_u = fx, x
    for end in (m, M):
        fe = Qs(end)
        if fe >= best:
            best, best_u = fe, end
    return best, float(best_u)


def c_sup(profile: VariationalProfile, value_range=None) -> float:
    """``c_u = sup Q`` over the value range (dense scan plus golden-section refinement)."""
    return c_sup_argmax(profile, value_range)[0]


@dataclass
class StructureReport:
    t: np.ndarray
    phi_lower: np.ndarray
    phi_upper: np.ndarray
    lam_lower: np.ndarray
    lam_upper: np.ndarray
    tol: float

    @property
    def ok_growth(self) -> bool:
        return bool(min(self.phi_lower.min(), self.phi_upper.min()) >= -self.tol)

    @property
    def ok_ellipticity(self) -> bool:
        return bool(min(self.lam_lower.min(), self.lam_upper.min()) >= -self.tol)

    @property
    def ok(self) -> bool:
        return self.ok_growth and self.ok_ellipticity

    def violations(self):
        """Sample norms ``t`` where any margin is below ``-tol``."""
        worst = np.minimum.reduce([self.phi_lower, self.phi_upper, self.lam_lower, self.lam_upper])
        return self.t[worst < -self.tol]


def check_structure(profile: VariationalProfile, t_samples, rtol: float = 1e-12) -> StructureReport:
    """Margins of the two-sided growth bounds on ``Phi'(t^2)`` and ``Lambda(t^2)``.

    Each margin is ``value - c1 (tau+t)^(p-2)`` (lower) or
    ``c2 (tau+t)^(p-2) - value`` (upper); negative margins are violations.
    """
    t = np.asarray(t_samples, dtype=float)
    if np.any(t <= 0):
        raise DomainError("structure check needs t > 0")
    weight = (profile.tau + t) ** (profile.p - 2.0)
    dphi = profile.dphi(t * t)
    lam = profile.Lambda(t * t)
    scale = np.maximum(1.0, np.abs(weight) * max(profile.c1, profile.c2))
    tol = rtol * float(scale.max())
    return StructureReport(
        t=t,
        phi_lower=dphi - profile.c1 * weight,
        phi_upper=profile.c2 * weight - dphi,
        lam_lower=lam - profile.c1 * weight,
        lam_upper=profile.c2 * weight - lam,
        tol=tol,
    )


# --- built-ins ---------------------------------------------------------------

def _phi_linear():
    return dict(
        Phi=lambda s: np.asarray(s, float) * 1.0,
        dPhi=lambda s: np.ones_like(np.asarray(s, float)),
        d2Phi=lambda s: np.zeros_like(np.asarray(s, float)),
        Lam=lambda s: np.ones_like(np.asarray(s, float)),
        K_inverse=lambda t: 2.0 * np.asarray(t, float),
        p=2.0,
    )


def _phi_plaplace(p):
    p = float(p)
    if not p > 1:
        raise ParameterError("p-Laplace exponent must exceed 1")
    e = p / 2.0

    def dPhi(s):
        s = np.asarray(s, float)
        with np.errstate(divide="ignore"):
            return np.where(s > 0, np.abs(s) ** (e - 1.0), 0.0 if p > 2 else (1.0 if p == 2 else np.inf))

    def d2Phi(s):
        s = np.asarray(s, float)
        if p == 2:
            return np.zeros_like(s)
        with np.errstate(divide="ignore"):
            return np.where(s > 0, (e - 1.0) * np.abs(s) ** (e - 2.0), 0.0 if p >= 4 else np.inf)

    def Lam(s):
        return (p - 1.0) * dPhi(s)

    return dict(
        Phi=lambda s: (2.0 / p) * np.abs(np.asarray(s, float)) ** e,
        dPhi=dPhi,
        d2Phi=d2Phi,
        Lam=Lam,
        K_inverse=lambda t: (np.asarray(t, float) / (1.0 - 1.0 / p)) ** (2.0 / p),
        p=p,
    )


def _phi_polynomial(coefficients):
    poly = Polynomial(np.asarray(coefficients, float))
    if abs(poly(0.0)) > 0:
        raise ParameterError("Phi(0) must vanish")
    d1, d2 = poly.deriv(1), poly.deriv(2)
    return dict(Phi=poly, dPhi=d1, d2Phi=d2, p=2.0)


def _potential(kind, **params):
    kind = kind.replace("_", "-")
    if kind == "zero":
        return lambda u: 0.0 * np.asarray(u, float), lambda u: 0.0 * np.asarray(u, float)
    if kind == "constant":
        v = float(params.get("value", 0.0))
        return lambda u: v + 0.0 * np.asarray(u, float), lambda u: 0.0 * np.asarray(u, float)
    if kind == "linear":
        a = float(params.get("slope", 1.0))
        return lambda u: a * np.asarray(u, float), lambda u: a + 0.0 * np.asarray(u, float)
    if kind == "allen-cahn-well":
        # q = Q' = u - u^3: Delta u + u - u^3 = 0
        return (lambda u: -0.25 * (1.0 - np.asarray(u, float) ** 2) ** 2,
                lambda u: np.asarray(u, float) - np.asarray(u, float) ** 3)
    if kind == "double-well":
        return (lambda u: 0.25 * (1.0 - np.asarray(u, float) ** 2) ** 2,
                lambda u: np.asarray(u, float) ** 3 - np.asarray(u, float))
    if kind == "sine":
        return lambda u: np.sin(np.asarray(u, float)), lambda u: np.cos(np.asarray(u, float))
    if kind == "polynomial":
        poly = Polynomial(np.asarray(params["coefficients"], float))
        return poly, poly.deriv()
    if kind == "table":
        spline = CubicSpline(np.asarray(params["u"], float), np.asarray(params["Q"], float))
        return spline, spline.derivative()
    raise ParameterError(f"unknown potential kind {kind!r}")


def build_profile(phi: dict | str = "linear", potential: dict | str = "zero", *, p=None, tau=0.0,
                  c1=None, c2=None, value_range=(-1.0, 1.0), name=None) -> VariationalProfile:
    """Assemble a profile from named built-ins.

    ``phi`` kinds: ``linear`` (``Phi(s)=s``), ``p-laplace`` (``Phi(s)=(2/p)s^(p/2)``,
    parameter ``p``), ``polynomial`` (``coefficients``, low order first).
    ``potential`` kinds: ``zero``, ``constant``, ``linear``, ``allen-cahn-well``,
    ``double-well``, ``sine``, ``polynomial``, ``table``.
    Missing structure constants default to the exact p-Laplace pair
    ``c1 = min(1, p-1)``, ``c2 = max(1, p-1)``.
    """
    phi = {"kind": phi} if isinstance(phi, str) else dict(phi)
    potential = {"kind": potential} if isinstance(potential, str) else dict(potential)
    phi_kind = phi.pop("kind").replace("_", "-")
    if phi_kind == "linear":
        parts = _phi_linear()
    elif phi_kind == "p-laplace":
        parts = _phi_plaplace(phi.get("p", p if p is not None else 2.0))
    elif phi_kind == "polynomial":
        parts = _phi_polynomial(phi["coefficients"])
    else:
        raise ParameterError(f"unknown Phi kind {phi_kind!r}")
    pot_kind = potential.pop("kind")
    Q, q = _potential(pot_kind, **potential)
    p_val = float(p if p is not None else parts.pop("p"))
    parts.pop("p", None)
    lo1, hi1 = min(1.0, p_val - 1.0), max(1.0, p_val - 1.0)
    return VariationalProfile(
        Q=Q,
        q=q,
        p=p_val,
        tau=float(tau),
        c1=float(c1 if c1 is not None else lo1),
        c2=float(c2 if c2 is not None else hi1),
        value_range=(float(value_range[0]), float(value_range[1])),
        name=name or f"{phi_kind}/{pot_kind}",
        **parts,
    )
