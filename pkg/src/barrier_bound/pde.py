"""Solution fields: symmetric ODE reductions, periodic relaxation and manufactured data.

The torus solver discretises ``div(Phi'(H(du)^2) grad(H^2/2)(du)) + q(u) + f = 0``
in conservative form. ``H`` is the covector norm of the torus model (the
Euclidean norm unless the torus carries a Minkowski norm). Fluxes live on cell
faces: the normal derivative across a face is a two-point difference and the
tangential one is the average of the two adjacent central differences.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.integrate import solve_ivp
from scipy.optimize import brentq, root
from scipy.sparse.linalg import splu

from . import kernels
from .barriers import RTOL, ATOL, BarrierCurve, fd4
from .errors import (ConstructionError, ConvergenceError, DomainError, EllipticityError,
                     ParameterError)
from .geometry import (Circle, FlatTorus, Line, LpNorm, ModelManifold, RadialBall, SphereRadial,
                       WarpedProduct)
from .profiles import IsotropicCoefficients, VariationalProfile, central_difference

REG_EPS = 1e-10


@dataclass(frozen=True)
class ScalarField:
    """Values of ``u`` on a tensor grid of ``model`` with gradient norms and a certified residual.

    ``coords`` holds one coordinate array per grid axis: ``(x,)`` for one-variable
    fields (arc length, ``s``, ``r`` or a line coordinate) and ``(x, y)`` for torus
    grids, where ``values[i, j] = u(x[i], y[j])``.
    """

    model: ModelManifold
    coords: tuple
    values: np.ndarray
    gradient_norm: np.ndarray | None = None
    residual_norm: float = 0.0
    tolerance: float = 1e-8
    provenance: str = "analytic"
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def certified(self) -> bool:
        return bool(self.residual_norm <= self.tolerance)

    @property
    def ndim(self) -> int:
        return len(self.coords)

    @property
    def spacing(self) -> float:
        return float(max(np.max(np.diff(c)) if c.size > 1 else 0.0 for c in self.coords))

    @property
    def range(self) -> tuple[float, float]:
        return float(np.min(self.values)), float(np.max(self.values))

    @property
    def is_constant(self) -> bool:
        """Oscillation below the certification tolerance (or round-off) counts as constant."""
        lo, hi = self.range
        return hi - lo <= max(1e-14 * max(1.0, abs(lo), abs(hi)), self.tolerance)

    def points(self) -> np.ndarray:
        """Sample coordinates, shape ``(N,)`` for one axis and ``(N, d)`` otherwise."""
        if self.ndim == 1:
            return np.asarray(self.coords[0], dtype=float)
        mesh = np.meshgrid(*self.coords, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)

    def with_gradient(self, gradient_norm) -> "ScalarField":
        from dataclasses import replace

        return replace(self, gradient_norm=np.asarray(gradient_norm, dtype=float))


# --- grids and seeds ----------------------------------------------------------


def _is_pow2(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


def torus_axes(model: FlatTorus, shape) -> tuple[np.ndarray, ...]:
    if len(shape) != model.dim:
        raise ParameterError(f"grid shape {shape} does not match torus dimension {model.dim}")
    if not all(_is_pow2(int(n)) for n in shape):
        raise ParameterError(f"torus resolutions must be powers of two, got {tuple(shape)}")
    return tuple(np.arange(n) * (P / n) for n, P in zip(shape, model.periods))


def make_seed(model: FlatTorus, shape, kind: str = "stripe", amplitude: float = 0.5, offset: float = 0.0,
              wavenumber: int = 1, direction=(1, 0), seed: int = 42) -> np.ndarray:
    """Initial data for relaxation: ``stripe``, ``checkerboard`` or seeded ``random``."""
    axes = torus_axes(model, shape)
    mesh = np.meshgrid(*axes, indexing="ij")
    phase = [2.0 * np.pi * wavenumber * m / P for m, P in zip(mesh, model.periods)]
    if kind == "stripe":
        d = np.asarray(direction, dtype=float)
        w = sum(di * ph for di, ph in zip(d, phase))
        return offset + amplitude * np.cos(w)
    if kind == "checkerboard":
        return offset + amplitude * np.prod([np.cos(ph) for ph in phase], axis=0)
    if kind == "random":
        rng = np.random.default_rng(seed)
        return offset + amplitude * rng.uniform(-1.0, 1.0, size=tuple(shape))
    raise ParameterError(f"unknown seed kind {kind!r}")


def prolong(u: np.ndarray, shape) -> np.ndarray:
    """Trigonometric interpolation of periodic samples onto a finer grid."""
    u = np.asarray(u, dtype=float)
    if tuple(shape) == u.shape:
        return u.copy()
    U = np.fft.fftshift(np.fft.fftn(u))
    out = np.zeros(shape, dtype=complex)
    sl = []
    for n, N in zip(u.shape, shape):
        start = N // 2 - n // 2
        sl.append(slice(start, start + n))
    out[tuple(sl)] = U
    scale = np.prod(shape) / np.prod(u.shape)
    return np.real(np.fft.ifftn(np.fft.ifftshift(out))) * scale


# --- discrete operator on the torus --------------------------------------------


def _shift(n, k):
    """Periodic shift ``(S v)[i] = v[i + k]`` as a sparse matrix."""
    rows = np.arange(n)
    return sp.csr_matrix((np.ones(n), (rows, (rows + k) % n)), shape=(n, n))


class TorusOperator:
    """Residual ``div(flux) + q(u) + source`` and its Jacobian on a periodic 2-D grid."""

    def __init__(self, model: FlatTorus, profile: VariationalProfile, shape, source=None,
                 regularize: bool | None = None):
        if model.dim != 2:
            raise ParameterError("torus relaxation is implemented for two-dimensional tori")
        self.model = model
        self.profile = profile
        self.shape = tuple(int(n) for n in shape)
        self.axes = torus_axes(model, self.shape)
        self.hx, self.hy = (P / n for P, n in zip(model.periods, self.shape))
        self.cov = None if model.is_euclidean else model.covector_norm
        if regularize is None:
            regularize = profile.p != 2.0 and profile.tau == 0.0
        self.reg = REG_EPS if regularize else 0.0
        self.source = None if source is None else np.asarray(source, dtype=float).reshape(self.shape)
        self._mats = None

    # fluxes
    def _half_sq(self, V):
        if self.cov is None:
            return np.sum(V * V, axis=-1), V
        H = self.cov(V)
        return H * H, self.cov.grad_half_sq(V)

    def face_fluxes(self, u, reg=None):
        reg = self.reg if reg is None else reg
        xx, xy, yx, yy = kernels.face_gradients(u, self.hx, self.hy)
        X = np.stack([xx, xy], axis=-1)
        Y = np.stack([yx, yy], axis=-1)
        sX, GX = self._half_sq(X)
        sY, GY = self._half_sq(Y)
        with np.errstate(divide="ignore", invalid="ignore"):
            dX = self.profile.dphi(sX + reg)
            dY = self.profile.dphi(sY + reg)
        return dX * GX[..., 0], dY * GY[..., 1], (X, sX, GX, dX), (Y, sY, GY, dY)

    def residual(self, u, reg=None):
        fx, fy, _, _ = self.face_fluxes(u, reg)
        r = kernels.divergence(fx, fy, self.hx, self.hy) + self.profile.potential_derivative(u)
        if self.source is not None:
            r = r + self.source
        return r

    def max_alpha(self, u):
        """Largest eigenvalue of the face flux Jacobian; the explicit step scales with its inverse."""
        _, _, fX, fY = self.face_fluxes(u)
        best = 0.0
        for A in (self._flux_jacobian(*fX), self._flux_jacobian(*fY)):
            tr = A[..., 0, 0] + A[..., 1, 1]
            det = A[..., 0, 0] * A[..., 1, 1] - A[..., 0, 1] * A[..., 1, 0]
            lam = 0.5 * tr + np.sqrt(np.maximum(0.25 * tr * tr - det, 0.0))
            best = max(best, float(np.max(lam)))
        return best

    def _flux_jacobian(self, V, s, G, d1):
        """``d flux / d xi = 2 Phi''(s) G G^T + Phi'(s) D^2(H^2/2)``."""
        d2 = self.profile.d2phi(s + self.reg)
        if self.cov is None:
            hess = np.broadcast_to(np.eye(2), V.shape + (2,))
        else:
            hess = self.cov.hess_half_sq(V)
            hess = np.where(np.isfinite(hess), hess, 0.0)
        A = 2.0 * d2[..., None, None] * G[..., :, None] * G[..., None, :] + d1[..., None, None] * hess
        lam = self.profile.Lambda(s + self.reg)
        if np.any(~np.isfinite(A)) or np.any(lam <= 0):
            raise EllipticityError("Lambda <= 0 or non-finite flux Jacobian encountered")
        return A

    def _matrices(self):
        if self._mats is None:
            nx, ny = self.shape
            Ix, Iy = sp.identity(nx, format="csr"), sp.identity(ny, format="csr")
            Xp, Xm = sp.kron(_shift(nx, 1), Iy), sp.kron(_shift(nx, -1), Iy)
            Yp, Ym = sp.kron(Ix, _shift(ny, 1)), sp.kron(Ix, _shift(ny, -1))
            I = sp.identity(nx * ny, format="csr")
            hx, hy = self.hx, self.hy
            self._mats = dict(
                xn=(Xp - I) / hx,
                xt=((Yp - Ym) + Xp @ (Yp - Ym)) / (4 * hy),
                yn=(Yp - I) / hy,
                yt=((Xp - Xm) + Yp @ (Xp - Xm)) / (4 * hx),
                dx=(I - Xm) / hx,
                dy=(I - Ym) / hy,
            )
        return self._mats

    def jacobian(self, u):
        M = self._matrices()
        _, _, fX, fY = self.face_fluxes(u)
        AX = self._flux_jacobian(*fX)
        AY = self._flux_jacobian(*fY)
        diag = sp.diags
        JX = diag(AX[..., 0, 0].ravel()) @ M["xn"] + diag(AX[..., 0, 1].ravel()) @ M["xt"]
        JY = diag(AY[..., 1, 1].ravel()) @ M["yn"] + diag(AY[..., 1, 0].ravel()) @ M["yt"]
        dq = central_difference(self.profile.potential_derivative, u.ravel())
        return (M["dx"] @ JX + M["dy"] @ JY + diag(dq)).tocsc()

    # consistency
    def spectral_residual(self, u):
        """Residual of the grid function with exact (spectral) derivatives."""
        return spectral_residual(self.model, self.profile, u, self.source, self.reg)


def _spectral_derivatives(u, periods):
    U = np.fft.fftn(u)
    ks = [2j * np.pi * np.fft.fftfreq(n, d=P / n) for n, P in zip(u.shape, periods)]
    out = []
    for ax, k in enumerate(ks):
        shape = [1] * u.ndim
        shape[ax] = -1
        kk = k.reshape(shape)
        if u.shape[ax] % 2 == 0:
            kk = kk.copy()
            idx = [0] * u.ndim
            idx[ax] = u.shape[ax] // 2
            kk[tuple(idx)] = 0.0
        out.append(np.real(np.fft.ifftn(U * kk)))
    return out


def spectral_residual(model: FlatTorus, profile: VariationalProfile, u, source=None, reg: float = 0.0):
    u = np.asarray(u, dtype=float)
    grad = np.stack(_spectral_derivatives(u, model.periods), axis=-1)
    if model.is_euclidean:
        s, G = np.sum(grad * grad, axis=-1), grad
    else:
        cov = model.covector_norm
        H = cov(grad)
        s, G = H * H, cov.grad_half_sq(grad)
    flux = profile.dphi(s + reg)[..., None] * G
    div = sum(_spectral_derivatives(flux[..., k], model.periods)[k] for k in range(u.ndim))
    r = div + profile.potential_derivative(u)
    return r if source is None else r + source


# --- relaxation ---------------------------------------------------------------


def relax_to_steady(model: FlatTorus, profile: VariationalProfile, seed_field, tol: float = 1e-9,
                    source=None, max_explicit: int = 20000, stall_window: int = 500,
                    max_newton: int = 60, cfl: float = 0.2, method: str = "auto") -> ScalarField:
    """Steady state of the divergence-form equation on a periodic grid.

    Explicit pseudo-time steps ``u += dt * R(u)`` with ``dt = cfl h^2 / max alpha`` run
    until the sup-residual reaches ``tol``. If a window of ``stall_window`` steps
    fails to halve the residual, Newton's method with a backtracking line search
    takes over. ``method="newton"`` skips the explicit phase, which is needed for
    steady states that are unstable under the pseudo-time flow.
    """
    if method not in {"auto", "newton"}:
        raise ParameterError(f"unknown relaxation method {method!r}")
    if not isinstance(model, FlatTorus):
        raise ParameterError("relaxation needs a flat torus model")
    u = np.array(seed_field.values if isinstance(seed_field, ScalarField) else seed_field, dtype=float)
    op = TorusOperator(model, profile, u.shape, source=source)
    h2 = min(op.hx, op.hy) ** 2
    history = []
    r = op.residual(u)
    res = float(np.max(np.abs(r)))
    history.append(("explicit", 0, res))
    steps = 0
    window_start = res
    used = "explicit"
    while method == "auto" and res > tol and steps < max_explicit:
        amax = op.max_alpha(u) if steps % 50 == 0 else amax  # noqa: F821 - set on first pass
        dt = cfl * h2 / max(amax, 1e-300)
        u = u + dt * r
        r = op.residual(u)
        res = float(np.max(np.abs(r)))
        steps += 1
        if not np.isfinite(res):
            raise ConvergenceError("explicit relaxation diverged", history)
        if steps % stall_window == 0:
            history.append(("explicit", steps, res))
            if res > 0.5 * window_start:
                break
            window_start = res
    if res > tol:
        used = "newton"
        u, res = _newton(op, u, tol, max_newton, history)
    field_ = _torus_field(model, profile, op, u, tol, "relaxed")
    field_.meta.update(method=used, explicit_steps=steps, history=[list(h) for h in history])
    if not field_.certified:
        raise ConvergenceError(f"relaxation stopped at residual {field_.residual_norm:.3g} > {tol:.3g}",
                               history)
    return field_


def _newton(op: TorusOperator, u, tol, max_newton, history):
    r = op.residual(u)
    res = float(np.max(np.abs(r)))
    for it in range(1, max_newton + 1):
        J = op.jacobian(u)
        scale = float(np.max(np.abs(J.diagonal()))) or 1.0
        J = J - (1e-12 * scale) * sp.identity(J.shape[0], format="csc")
        try:
            step = splu(J).solve(-r.ravel()).reshape(u.shape)
        except RuntimeError as exc:
            raise ConvergenceError(f"Newton linear solve failed: {exc}", history) from exc
        lam = 1.0
        while True:
            trial = u + lam * step
            rt = op.residual(trial)
            rest = float(np.max(np.abs(rt)))
            if np.isfinite(rest) and rest <= (1.0 - 1e-4 * lam) * res:
                break
            lam *= 0.5
            if lam < 2.0 ** -20:
                history.append(("newton", it, res))
                raise ConvergenceError(f"line search failed at residual {res:.3g}", history)
        u, r, res = trial, rt, rest
        history.append(("newton", it, res))
        if res <= tol:
            return u, res
    raise ConvergenceError(f"Newton did not reach {tol:.3g} (residual {res:.3g})", history)


def _torus_field(model, profile, op: TorusOperator, u, tol, provenance) -> ScalarField:
    res_reg = float(np.max(np.abs(op.residual(u))))
    with np.errstate(all="ignore"):
        res_raw = float(np.max(np.abs(op.residual(u, reg=0.0))))
    spec = float(np.max(np.abs(op.spectral_residual(u))))
    field_ = ScalarField(model=model, coords=op.axes, values=u, residual_norm=res_reg, tolerance=tol,
                         provenance=provenance)
    field_ = field_gradient_norms(field_)
    field_.meta.update(h=max(op.hx, op.hy), resolution=list(op.shape), residual_regularized=res_reg,
                       residual_unregularized=res_raw if np.isfinite(res_raw) else math.inf,
                       regularization=op.reg, consistency_residual=spec)
    return field_


def torus_field(model: FlatTorus, profile: VariationalProfile, u, tol: float = 1e-9, source=None,
                provenance: str = "analytic") -> ScalarField:
    """Wrap grid values as a field, computing residuals with the same operator as the solver."""
    op = TorusOperator(model, profile, np.shape(u), source=source)
    return _torus_field(model, profile, op, np.asarray(u, float), tol, provenance)


# --- gradient norms -----------------------------------------------------------


def _periodic_fd4(y, h):
    return (8.0 * (np.roll(y, -1) - np.roll(y, 1)) - (np.roll(y, -2) - np.roll(y, 2))) / (12.0 * h)


def field_gradient_norms(field_: ScalarField) -> ScalarField:
    """Fill ``gradient_norm`` with fourth-order differences.

    Periodic models use centred stencils; bounded 1-D models use one-sided
    stencils at the ends. On Minkowski tori the norm of ``du`` is the dual of
    the displacement norm.
    """
    u = np.asarray(field_.values, dtype=float)
    model = field_.model
    if field_.ndim == 1:
        x = field_.coords[0]
        h = float(x[1] - x[0]) if x.size > 1 else 1.0
        if x.size < 2:
            return field_.with_gradient(np.zeros_like(u))
        g = _periodic_fd4(u, h) if isinstance(model, Circle) else fd4(u, h)
        return field_.with_gradient(np.abs(g))
    hx, hy = (float(c[1] - c[0]) for c in field_.coords)
    gx, gy = kernels.gradient4(u, hx, hy)
    grad = np.stack([gx, gy], axis=-1)
    if isinstance(model, FlatTorus) and not model.is_euclidean:
        return field_.with_gradient(model.covector_norm(grad))
    return field_.with_gradient(np.sqrt(gx * gx + gy * gy))


# --- manufactured and analytic fields -----------------------------------------


def manufactured_forcing(model: ModelManifold, u_analytic, coeffs, resolution=None, derivatives=None,
                         discrete: bool | None = None):
    """Forcing table ``q`` such that ``u_analytic`` solves the equation on the model's grid.

    ``coeffs`` is a :class:`VariationalProfile` or :class:`IsotropicCoefficients`
    (its ``q`` is ignored). On tori with a variational profile the table is the
    negative of the discrete divergence, so the solver sees ``u_analytic`` as an
    exact grid solution; otherwise the pointwise isotropic split
    ``q = -(alpha u_nn + beta (Delta u - u_nn))`` is used, with ``-alpha Delta u``
    where ``|Du| < 1e-12``. ``derivatives(*coords)`` may return analytic
    ``(gradient, hessian)`` arrays; spectral derivatives are used otherwise.

    Returns ``(q_table, mask)`` with ``mask`` marking degenerate-gradient points.
    """
    if isinstance(model, FlatTorus):
        axes = torus_axes(model, resolution)
        mesh = np.meshgrid(*axes, indexing="ij")
        u = np.asarray(u_analytic(*mesh), dtype=float)
        if discrete is None:
            discrete = isinstance(coeffs, VariationalProfile)
        if discrete:
            zero_q = VariationalProfile(**{**_profile_fields(coeffs), "Q": lambda v: 0.0 * np.asarray(v),
                                           "q": lambda v: 0.0 * np.asarray(v)})
            op = TorusOperator(model, zero_q, u.shape)
            q = -op.residual(u)
            return q, np.zeros(u.shape, dtype=bool)
        if derivatives is not None:
            grad, hess = derivatives(*mesh)
        else:
            grad = np.stack(_spectral_derivatives(u, model.periods), axis=-1)
            hess = np.stack([np.stack(_spectral_derivatives(grad[..., k], model.periods), axis=-1)
                             for k in range(model.dim)], axis=-2)
        return _pointwise_forcing(model, u, grad, hess, coeffs)
    if isinstance(model, Circle):
        n = int(resolution if resolution is not None else 1024)
        x = np.arange(n) * (model.length / n)
        u = np.asarray(u_analytic(x), dtype=float)
        if derivatives is not None:
            g, h = derivatives(x)
        else:
            g = _spectral_derivatives(u, (model.length,))[0]
            h = _spectral_derivatives(g, (model.length,))[0]
        return _pointwise_forcing(model, u, np.asarray(g)[..., None], np.asarray(h)[..., None, None], coeffs)
    raise ParameterError(f"manufactured forcing is not implemented on {model.kind}")


def _profile_fields(profile: VariationalProfile) -> dict:
    from dataclasses import fields

    return {f.name: getattr(profile, f.name) for f in fields(profile)}


def _pointwise_forcing(model, u, grad, hess, coeffs):
    if isinstance(coeffs, VariationalProfile) and isinstance(model, FlatTorus) and not model.is_euclidean:
        cov = model.covector_norm
        H = cov(grad)
        s = H * H
        G = cov.grad_half_sq(grad)
        A = (2.0 * coeffs.d2phi(s)[..., None, None] * G[..., :, None] * G[..., None, :]
             + coeffs.dphi(s)[..., None, None] * np.nan_to_num(cov.hess_half_sq(grad)))
        return -np.einsum("...ij,...ij->...", A, hess), H < 1e-12
    if isinstance(coeffs, VariationalProfile):
        from .profiles import coefficients_from_profile

        coeffs = coefficients_from_profile(coeffs)
    t = np.sqrt(np.sum(grad * grad, axis=-1))
    lap = np.trace(hess, axis1=-2, axis2=-1)
    mask = t < 1e-12
    safe = np.where(mask, 1.0, t)
    nvec = grad / safe[..., None]
    unn = np.einsum("...i,...ij,...j->...", nvec, hess, nvec)
    a, b, _ = coeffs.evaluate(u, t)
    q = -(a * unn + b * (lap - unn))
    q = np.where(mask, -a * lap, q)
    return q, mask


def analytic_field(model: ModelManifold, func, coords, gradient=None, coeffs: IsotropicCoefficients | None = None,
                   tolerance: float = 1e-9, provenance: str = "analytic") -> ScalarField:
    """Field from a closed form on a one-variable grid.

    With ``coeffs`` the residual ``alpha u'' + drift beta u' + q`` is evaluated
    (``u''`` by fourth-order differences of the gradient); otherwise the field is
    declared exact.
    """
    x = np.asarray(coords, dtype=float)
    u = np.asarray(func(x), dtype=float)
    f = ScalarField(model=model, coords=(x,), values=u, tolerance=tolerance, provenance=provenance)
    if gradient is not None:
        g = np.asarray(gradient(x), dtype=float)
        f = f.with_gradient(np.abs(g))
    else:
        f = field_gradient_norms(f)
        g = None
    if coeffs is not None:
        gg = g if g is not None else fd4(u, x[1] - x[0])
        res = _reduced_residual(model, coeffs, x, u, gg)
        from dataclasses import replace

        f = replace(f, residual_norm=float(np.max(np.abs(res))), meta=f.meta)
    return f


# --- symmetric reductions -----------------------------------------------------


def _drift(model: ModelManifold):
    if isinstance(model, (WarpedProduct, SphereRadial, RadialBall)):
        return model.drift
    return lambda s: 0.0 * np.asarray(s, dtype=float)


def _reduced_residual(model, coeffs, x, u, du, ddu=None):
    """``alpha u'' + q + drift beta u'``; at a radial centre the drift term becomes ``(n-1) beta u''``."""
    h = x[1] - x[0]
    ddu = fd4(du, h) if ddu is None else ddu
    t = np.abs(du)
    a, b, qv = coeffs.evaluate(u, t)
    with np.errstate(divide="ignore", invalid="ignore"):
        drift = np.asarray(_drift(model)(x), dtype=float) * np.ones_like(x)
    res = a * ddu + qv
    centre = ~np.isfinite(drift)
    res = res + np.where(centre, 0.0, np.where(centre, 0.0, drift) * b * du)
    if centre.any():
        n = getattr(model, "n", 1)
        res = np.where(centre, res + (n - 1) * b * ddu, res)
    return res


def _reduced_rhs(coeffs, drift):
    def rhs(z, y):
        u, du = y
        t = abs(du)
        a = float(coeffs.alpha(u, t))
        b = float(coeffs.beta(u, t))
        return [du, -(float(coeffs.q(u, t)) + float(drift(z)) * b * du) / a]
    return rhs


def _bracket_root(f, lo, hi, grow=40):
    flo, fhi = f(lo), f(hi)
    k = 0
    while flo * fhi > 0 and k < grow:
        w = hi - lo
        lo, hi = lo - w, hi + w
        flo, fhi = f(lo), f(hi)
        k += 1
    if flo * fhi > 0:
        raise ConstructionError(f"shooting bracket [{lo:.3g}, {hi:.3g}] does not change sign")
    return brentq(f, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)


def _integrate(rhs, span, y0, grid):
    sol = solve_ivp(rhs, span, y0, method="RK45", rtol=RTOL, atol=ATOL, dense_output=True)
    if not sol.success:
        raise ConstructionError(f"integration failed: {sol.message}")
    return sol


def solve_symmetric(model: ModelManifold, coeffs: IsotropicCoefficients, bc: dict, n_points: int = 1025,
                    tol: float = 1e-8) -> ScalarField:
    """Solve the one-variable reduction of the equation on a symmetric model.

    ``bc`` is ``{"type": "dirichlet", "values": [u_a, u_b]}`` on warped products
    and lines, ``{"type": "dirichlet", "value": u_R}`` on balls (with the centre
    condition ``u'(0) = 0``), or ``{"type": "neumann", "bracket": [lo, hi]}`` for
    zero slopes at both ends with the left value found by shooting inside the
    bracket. On circles the Neumann problem on half the circumference is solved
    and reflected evenly. Sphere-radial models take
    ``{"type": "regular", "guess": [u_north, u_south]}``.
    """
    kind = bc.get("type", "dirichlet")
    drift = _drift(model)
    if isinstance(model, RadialBall):
        return _solve_ball(model, coeffs, bc, n_points, tol)
    if isinstance(model, SphereRadial):
        return _solve_sphere(model, coeffs, bc, n_points, tol)
    if isinstance(model, WarpedProduct):
        a, b = model.interval
    elif isinstance(model, Circle):
        a, b = 0.0, 0.5 * model.length
        if kind != "neumann":
            raise ParameterError("circle reductions use the even (neumann) half-period problem")
    elif isinstance(model, Line):
        a, b = model.interval
    else:
        raise ParameterError(f"no one-variable reduction for {model.kind}")
    rhs = _reduced_rhs(coeffs, drift)

    def end_state(y0):
        sol = solve_ivp(rhs, (a, b), y0, method="RK45", rtol=RTOL, atol=ATOL)
        if sol.status != 0:
            return np.array([np.nan, np.nan])
        return sol.y[:, -1]

    if kind == "dirichlet":
        ua, ub = map(float, bc["values"])
        lo, hi = bc.get("bracket", ((ub - ua) / (b - a) - 1.0, (ub - ua) / (b - a) + 1.0))
        s0 = _bracket_root(lambda s: end_state([ua, s])[0] - ub, float(lo), float(hi))
        y0 = [ua, s0]
    elif kind == "neumann":
        lo, hi = bc["bracket"]
        v0 = _bracket_root(lambda v: end_state([v, 0.0])[1], float(lo), float(hi), grow=0)
        y0 = [v0, 0.0]
    else:
        raise ParameterError(f"unknown boundary condition {kind!r}")
    sol = _integrate(rhs, (a, b), y0, None)
    if isinstance(model, Circle):
        half = n_points // 2
        x = np.arange(2 * half) * (model.length / (2 * half))
        xr = np.where(x <= b, x, model.length - x)
        y = sol.sol(xr)
        u, du = y[0], np.where(x <= b, y[1], -y[1])
        res = _reduced_residual(model, coeffs, xr[: half + 1], y[0][: half + 1], y[1][: half + 1])
    else:
        x = np.linspace(a, b, n_points)
        u, du = sol.sol(x)
        res = _reduced_residual(model, coeffs, x, u, du)
    res_norm = float(np.max(np.abs(res[2:-2]))) if res.size > 4 else float(np.max(np.abs(res)))
    f = ScalarField(model=model, coords=(x,), values=u, gradient_norm=np.abs(du), residual_norm=res_norm,
                    tolerance=tol, provenance="symmetric-ode")
    f.meta.update(initial_state=[float(y0[0]), float(y0[1])], bc=dict(bc))
    if not f.certified:
        raise ConvergenceError(f"symmetric solve residual {res_norm:.3g} exceeds {tol:.3g}")
    return f


def _centre_series(coeffs, n, u0, r0):
    a, b, qv = (float(v) for v in coeffs.evaluate(u0, 0.0))
    c2 = -qv / (2.0 * (a + (n - 1) * b))
    return [u0 + c2 * r0 * r0, 2.0 * c2 * r0]


def _solve_ball(model: RadialBall, coeffs, bc, n_points, tol):
    R = model.radius
    r0 = 1e-6 * R
    rhs = _reduced_rhs(coeffs, model.drift)
    uR = float(bc.get("value", bc.get("values", [0.0])[-1]))

    def edge(u0):
        sol = solve_ivp(rhs, (r0, R), _centre_series(coeffs, model.n, u0, r0), method="RK45",
                        rtol=RTOL, atol=ATOL)
        if sol.status != 0:
            raise ConstructionError(f"radial integration failed (smallest r reached {sol.t[-1]:.3g})")
        return sol.y[0, -1] - uR

    lo, hi = bc.get("bracket", (uR - 1.0, uR + 1.0))
    u0 = _bracket_root(edge, float(lo), float(hi))
    sol = _integrate(rhs, (r0, R), _centre_series(coeffs, model.n, u0, r0), None)
    r = np.linspace(0.0, R, n_points)
    y = sol.sol(np.maximum(r, r0))
    u, du = y
    u[0], du[0] = u0, 0.0
    res = _reduced_residual(model, coeffs, r, u, du)
    res_norm = float(np.max(np.abs(res[2:-2])))
    f = ScalarField(model=model, coords=(r,), values=u, gradient_norm=np.abs(du), residual_norm=res_norm,
                    tolerance=tol, provenance="symmetric-ode")
    f.meta.update(centre_value=float(u0), boundary_value=uR, bc=dict(bc))
    if not f.certified:
        raise ConvergenceError(f"radial solve residual {res_norm:.3g} exceeds {tol:.3g}")
    return f


def _solve_sphere(model: SphereRadial, coeffs, bc, n_points, tol):
    R = model.radius
    s0 = 1e-6 * R
    mid = 0.5 * math.pi * R
    rhs = _reduced_rhs(coeffs, model.drift)

    def from_pole(v, start, end):
        sol = solve_ivp(rhs, (start, end), _pole_state(v, start), method="RK45", rtol=RTOL, atol=ATOL,
                        dense_output=True)
        if sol.status != 0:
            raise ConstructionError(f"sphere integration failed: {sol.message}")
        return sol

    def _pole_state(v, start):
        y = _centre_series(coeffs, model.n, v, s0)
        return y if start < mid else [y[0], -y[1]]

    def mismatch(p):
        north = from_pole(p[0], s0, mid).y[:, -1]
        south = from_pole(p[1], math.pi * R - s0, mid).y[:, -1]
        return north - south

    sol = root(mismatch, np.asarray(bc.get("guess", (0.0, 0.0)), dtype=float), tol=1e-14)
    # a singular Jacobian (a family of solutions) is fine as long as the match is achieved
    if np.max(np.abs(mismatch(sol.x))) > 1e-9:
        raise ConstructionError(f"sphere matching failed: {sol.message}")
    north = from_pole(sol.x[0], s0, mid)
    south = from_pole(sol.x[1], math.pi * R - s0, mid)
    s = np.linspace(0.0, math.pi * R, n_points)
    sc = np.clip(s, s0, math.pi * R - s0)
    y = np.where(sc <= mid, north.sol(np.minimum(sc, mid)), south.sol(np.maximum(sc, mid)))
    u, du = y
    u[0], u[-1], du[0], du[-1] = sol.x[0], sol.x[1], 0.0, 0.0
    res = _reduced_residual(model, coeffs, s[1:-1], u[1:-1], du[1:-1])
    res_norm = float(np.max(np.abs(res[2:-2])))
    f = ScalarField(model=model, coords=(s,), values=u, gradient_norm=np.abs(du), residual_norm=res_norm,
                    tolerance=tol, provenance="symmetric-ode")
    f.meta.update(pole_values=[float(v) for v in sol.x], bc=dict(bc))
    if not f.certified:
        raise ConvergenceError(f"sphere solve residual {res_norm:.3g} exceeds {tol:.3g}")
    return f


def lift_barrier(curve: BarrierCurve, model: ModelManifold, coeffs: IsotropicCoefficients,
                 tol: float = 1e-8) -> ScalarField:
    """The field ``u(x, s) = phi(s)`` on a one-variable model, with its equation residual."""
    x = curve.grid
    res = _reduced_residual(model, coeffs, x, curve.phi, curve.dphi)
    f = ScalarField(model=model, coords=(x,), values=curve.phi.copy(), gradient_norm=curve.dphi.copy(),
                    residual_norm=float(np.max(np.abs(res[2:-2]))), tolerance=tol, provenance="symmetric-ode")
    f.meta.update(barrier_kind=curve.kind)
    return f


__all__ = [
    "ScalarField", "TorusOperator", "analytic_field", "field_gradient_norms", "lift_barrier", "make_seed",
    "manufactured_forcing", "prolong", "relax_to_steady", "solve_symmetric", "spectral_residual",
    "torus_axes", "torus_field", "LpNorm", "DomainError",
]
