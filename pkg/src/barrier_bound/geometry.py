"""Model manifolds, warp factors, distances and Minkowski dual norms.

Only geometries with closed-form distances are modelled. Fields on the
one-dimensional reductions (warped products, radial balls, sphere latitudes)
are parametrised by a single coordinate ``s``; distances between such points
are the coordinate differences, which are the infimum of the true distance
over the fibres.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize, minimize_scalar

from .errors import ConvexityError, DomainError, InvalidWarpError, ParameterError

# --- warp ---------------------------------------------------------------------


@dataclass(frozen=True)
class Warp:
    """``rho(z) = cosh(sqrt(-kappa) (z0 + z))`` with ``rho'' + kappa rho = 0``."""

    kappa: float
    z0: float = 0.0

    @property
    def k(self) -> float:
        return float(np.sqrt(-self.kappa))

    def rho(self, z):
        return np.cosh(self.k * (self.z0 + np.asarray(z, float)))

    def drho(self, z):
        return self.k * np.sinh(self.k * (self.z0 + np.asarray(z, float)))

    def d2rho(self, z):
        return self.k ** 2 * np.cosh(self.k * (self.z0 + np.asarray(z, float)))

    def log_derivative(self, z):
        """``rho'/rho``."""
        return self.k * np.tanh(self.k * (self.z0 + np.asarray(z, float)))

    def d_log_derivative(self, z):
        """``(rho'/rho)' = -kappa / cosh^2``; strictly positive."""
        return self.k ** 2 / np.cosh(self.k * (self.z0 + np.asarray(z, float))) ** 2

    def residual(self, z):
        """``rho'' + kappa rho`` evaluated in floating point."""
        return self.d2rho(z) + self.kappa * self.rho(z)

    def check(self, a, b, samples: int = 1001):
        z = np.linspace(a, b, samples)
        if np.any(self.rho(z) <= 0):
            raise InvalidWarpError("warp must be positive")
        bad = self.d_log_derivative(z) <= 0
        if bad.any():
            raise InvalidWarpError(f"(rho'/rho)' <= 0 at z = {z[bad][0]:.6g}")
        return True


def warp_factor(kappa: float, z0: float = 0.0) -> Warp:
    if not kappa < 0:
        raise ParameterError("a warp with (rho'/rho)' > 0 and rho'' + kappa rho = 0 needs kappa < 0")
    return Warp(float(kappa), float(z0))


# --- Minkowski norms ----------------------------------------------------------


class MinkowskiNorm:
    """Positively 1-homogeneous convex function on R^n, evaluated along the last axis.

    Subclasses provide the gradient and Hessian of ``H^2/2``, which is what the
    anisotropic flux needs, and an analytic dual when one exists.
    """

    dim: int = 2
    reversible: bool = True

    def __call__(self, xi):
        raise NotImplementedError

    def grad_half_sq(self, xi):
        raise NotImplementedError

    def hess_half_sq(self, xi):
        raise NotImplementedError

    def dual(self) -> "MinkowskiNorm":
        raise NotImplementedError

    def check_convexity(self, directions: int = 64, tol: float = 1e-12):
        """Homogeneity and positive-definite ``D^2(H^2/2)`` at offset sample directions.

        Directions are offset by half a step so that sampled angles avoid the
        coordinate axes, where ``l^p`` norms with ``p != 2`` are only weakly convex.
        """
        if self.dim != 2:
            dirs = np.random.default_rng(0).normal(size=(directions, self.dim))
        else:
            theta = (np.arange(directions) + 0.5) * 2.0 * np.pi / directions
            dirs = np.stack([np.cos(theta), np.sin(theta)], axis=-1)
        vals = self(dirs)
        if np.any(~np.isfinite(vals)) or np.any(vals <= 0):
            raise ConvexityError("norm vanishes or is not finite along a sampled direction")
        for c in (0.5, 3.0):
            if not np.allclose(self(c * dirs), c * vals, rtol=1e-12, atol=0):
                raise ConvexityError("norm is not positively 1-homogeneous")
        eig = np.linalg.eigvalsh(self.hess_half_sq(dirs))
        if np.any(eig.min(axis=-1) <= tol):
            raise ConvexityError("Hessian of H^2/2 is not positive definite at a sampled direction")
        return True


@dataclass(frozen=True, eq=True)
class LpNorm(MinkowskiNorm):
    """``(sum |xi_k|^p)^(1/p)``; the dual is the ``l^(p/(p-1))`` norm."""

    p: float = 2.0
    dim: int = 2

    def __post_init__(self):
        if not self.p > 1:
            raise ParameterError("l^p norm needs p > 1")

    def __call__(self, xi):
        xi = np.asarray(xi, float)
        if self.p == 2.0:
            return np.sqrt(np.sum(xi * xi, axis=-1))
        return np.sum(np.abs(xi) ** self.p, axis=-1) ** (1.0 / self.p)

    def grad_half_sq(self, xi):
        xi = np.asarray(xi, float)
        if self.p == 2.0:
            return xi.copy()
        H = self(xi)[..., None]
        with np.errstate(invalid="ignore", divide="ignore"):
            g = np.sign(xi) * np.abs(xi) ** (self.p - 1.0) * H ** (2.0 - self.p)
        return np.where(H > 0, g, 0.0)

    def hess_half_sq(self, xi):
        xi = np.asarray(xi, float)
        n = xi.shape[-1]
        eye = np.eye(n)
        if self.p == 2.0:
            return np.broadcast_to(eye, xi.shape + (n,)).copy()
        p = self.p
        H = self(xi)[..., None]
        safe = np.where(H > 0, H, 1.0)
        a = np.abs(xi) ** (p - 2.0) if p >= 2 else np.abs(np.where(xi == 0, np.finfo(float).tiny, xi)) ** (p - 2.0)
        w = np.sign(xi) * np.abs(xi) ** (p - 1.0)
        diag = (p - 1.0) * a * safe ** (2.0 - p)
        out = diag[..., :, None] * eye + (2.0 - p) * safe[..., None] ** (2.0 - 2.0 * p) * w[..., :, None] * w[..., None, :]
        zero = (H[..., 0] == 0)
        if np.any(zero):
            out[zero] = eye
        return out

    def dual(self) -> "LpNorm":
        return LpNorm(p=self.p / (self.p - 1.0), dim=self.dim)


@dataclass(frozen=True, eq=False)
class QuadraticNorm(MinkowskiNorm):
    """``sqrt(xi^T A xi)`` for a symmetric positive-definite coefficient table ``A``."""

    A: np.ndarray = field(default_factory=lambda: np.eye(2))

    def __post_init__(self):
        A = np.asarray(self.A, float)
        if A.ndim != 2 or A.shape[0] != A.shape[1] or not np.allclose(A, A.T):
            raise ParameterError("coefficient table must be a symmetric matrix")
        if np.linalg.eigvalsh(A).min() <= 0:
            raise ConvexityError("coefficient table must be positive definite")
        object.__setattr__(self, "A", A)

    @property
    def dim(self):
        return self.A.shape[0]

    def __call__(self, xi):
        xi = np.asarray(xi, float)
        return np.sqrt(np.einsum("...i,ij,...j->...", xi, self.A, xi))

    def grad_half_sq(self, xi):
        return np.asarray(xi, float) @ self.A

    def hess_half_sq(self, xi):
        xi = np.asarray(xi, float)
        return np.broadcast_to(self.A, xi.shape + (self.dim,)).copy()

    def dual(self) -> "QuadraticNorm":
        return QuadraticNorm(np.linalg.inv(self.A))


def euclidean(dim: int = 2) -> LpNorm:
    return LpNorm(2.0, dim)


def dual_norm(H, v, starts: int = 64) -> float:
    """``H*(v) = sup_{H(Y)=1} <v, Y>`` by multistart maximisation.

    In two dimensions the unit sphere is parametrised by angle: the best of
    ``starts`` uniformly spread angles is polished with a bounded Brent
    search. In higher dimensions each start is polished with BFGS on the
    scale-invariant quotient ``<v, Y>/H(Y)``.
    """
    v = np.asarray(v, float)
    if not np.all(np.isfinite(v)):
        raise DomainError("dual norm needs a finite covector")
    if not np.any(v):
        return 0.0
    n = v.shape[-1]
    if n == 1:
        return float(abs(v[0]) / H(np.array([1.0 if v[0] > 0 else -1.0])))

    if n == 2:
        def ratio(theta):
            w = np.stack([np.cos(theta), np.sin(theta)], axis=-1)
            h = H(w)
            if np.any(~np.isfinite(h)) or np.any(h <= 0):
                raise ConvexityError("norm is degenerate along a sampled direction")
            return (w @ v) / h

        theta = np.arange(starts) * 2.0 * np.pi / starts
        vals = ratio(theta)
        k = int(np.argmax(vals))
        step = 2.0 * np.pi / starts
        res = minimize_scalar(lambda t: -float(ratio(np.array(t))), bounds=(theta[k] - step, theta[k] + step),
                              method="bounded", options={"xatol": 1e-13, "maxiter": 500})
        return float(max(vals[k], -res.fun))

    rng = np.random.default_rng(0)
    dirs = rng.normal(size=(starts, n))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)

    def neg_ratio(w):
        h = float(H(w))
        if not np.isfinite(h) or h <= 0:
            raise ConvexityError("norm is degenerate along a sampled direction")
        return -float(w @ v) / h

    best = max(-neg_ratio(w) for w in dirs)
    w0 = dirs[int(np.argmax([-neg_ratio(w) for w in dirs]))]
    res = minimize(neg_ratio, w0, method="BFGS", options={"gtol": 1e-12})
    return float(max(best, -res.fun))


# --- models -------------------------------------------------------------------


@dataclass(frozen=True)
class RicciBound:
    """A certified lower Ricci bound and the comparison regimes the model qualifies for.

    Regimes: ``flat-barrier`` (Ric >= 0, barrier solves the unperturbed ODE),
    ``warped-barrier`` (Ric >= (n-1) kappa with kappa < 0, barrier solves the
    warped ODE), ``barrier-family`` (continuity family for any sign of kappa),
    ``flat-barrier-dirichlet`` (Ric >= 0 with mean-convex boundary and constant
    Dirichlet data).
    """

    value: float
    kappa: float
    regimes: tuple[str, ...]


class ModelManifold:
    kind: str = "abstract"
    dim: int = 1
    has_boundary: bool = False

    def distance(self, x, y):
        raise NotImplementedError

    def ricci_lower_bound(self) -> RicciBound:
        raise NotImplementedError

    def describe(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class Line(ModelManifold):
    """A window ``[a, b]`` of the real line; used for whole-line analytic profiles."""

    interval: tuple[float, float] = (-1.0, 1.0)
    kind: str = "line"
    dim: int = 1

    def distance(self, x, y):
        return np.abs(np.asarray(y, float) - np.asarray(x, float))

    def ricci_lower_bound(self):
        return RicciBound(0.0, 0.0, ("flat-barrier",))

    def describe(self):
        return {"kind": self.kind, "interval": list(self.interval)}


@dataclass(frozen=True)
class Circle(ModelManifold):
    """Circle of the given radius; points are arc-length coordinates."""

    radius: float = 1.0
    kind: str = "circle"
    dim: int = 1

    def __post_init__(self):
        if not self.radius > 0:
            raise ParameterError("circle radius must be positive")

    @property
    def length(self):
        return 2.0 * np.pi * self.radius

    def distance(self, x, y):
        d = np.mod(np.asarray(y, float) - np.asarray(x, float), self.length)
        return np.minimum(d, self.length - d)

    def ricci_lower_bound(self):
        return RicciBound(0.0, 0.0, ("flat-barrier", "barrier-family"))

    def describe(self):
        return {"kind": self.kind, "radius": self.radius}


@dataclass(frozen=True, eq=False)
class FlatTorus(ModelManifold):
    """``R^n / (periods Z^n)`` with a Euclidean or Minkowski distance.

    ``norm`` measures displacement vectors. Gradient norms of fields are the
    dual norm of the differential, ``norm.dual()(du)``.
    """

    periods: tuple[float, ...] = (1.0, 1.0)
    norm: MinkowskiNorm | None = None
    kind: str = "flat-torus"

    def __post_init__(self):
        P = tuple(float(p) for p in self.periods)
        if any(not p > 0 for p in P):
            raise ParameterError("torus periods must be positive")
        object.__setattr__(self, "periods", P)
        if self.norm is None:
            object.__setattr__(self, "norm", LpNorm(2.0, len(P)))
        if not getattr(self.norm, "reversible", True):
            raise ParameterError("only reversible norms are supported on tori")

    @property
    def dim(self):
        return len(self.periods)

    @property
    def is_euclidean(self):
        return isinstance(self.norm, LpNorm) and self.norm.p == 2.0

    @property
    def covector_norm(self) -> MinkowskiNorm:
        return self.norm.dual()

    def reduce(self, delta):
        P = np.asarray(self.periods)
        return delta - P * np.round(delta / P)

    def distance(self, x, y):
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        if x.shape[-1] != self.dim or y.shape[-1] != self.dim:
            raise DomainError(f"points must have {self.dim} coordinates")
        delta = self.reduce(y - x)
        if self.is_euclidean:
            return self.norm(delta)
        P = np.asarray(self.periods)
        best = None
        for k in itertools.product((-1, 0, 1), repeat=self.dim):
            d = self.norm(delta + np.asarray(k) * P)
            best = d if best is None else np.minimum(best, d)
        return best

    def ricci_lower_bound(self):
        return RicciBound(0.0, 0.0, ("flat-barrier", "barrier-family"))

    def describe(self):
        d = {"kind": self.kind, "periods": list(self.periods)}
        if isinstance(self.norm, LpNorm):
            d["norm"] = {"kind": "lp", "p": self.norm.p}
        else:
            d["norm"] = {"kind": "quadratic", "A": np.asarray(self.norm.A).tolist()}
        return d


@dataclass(frozen=True)
class SphereRadial(ModelManifold):
    """Round ``n``-sphere of given radius; radial points are polar arc lengths ``s in [0, pi R]``."""

    n: int = 2
    radius: float = 1.0
    kind: str = "sphere-radial"

    def __post_init__(self):
        if self.n < 2 or not self.radius > 0:
            raise ParameterError("sphere needs n >= 2 and positive radius")

    @property
    def dim(self):
        return self.n

    def drift(self, s):
        """``(n-1) rho'/rho`` with ``rho = R sin(s/R)``."""
        s = np.asarray(s, float)
        return (self.n - 1) / (self.radius * np.tan(s / self.radius))

    def distance(self, x, y):
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        if x.ndim == 0 or x.shape[-1:] != (self.n + 1,):
            if np.any((x < -1e-12) | (x > np.pi * self.radius + 1e-12)):
                raise DomainError("polar coordinate outside [0, pi R]")
            return np.abs(y - x)
        R = self.radius
        c = np.clip(np.sum(x * y, axis=-1) / R ** 2, -1.0, 1.0)
        return R * np.arccos(c)

    def ricci_lower_bound(self):
        v = (self.n - 1) / self.radius ** 2
        return RicciBound(v, 1.0 / self.radius ** 2, ("barrier-family", "flat-barrier"))

    def describe(self):
        return {"kind": self.kind, "n": self.n, "radius": self.radius}


@dataclass(frozen=True)
class WarpedProduct(ModelManifold):
    """``N x [a, b]`` with metric ``ds^2 + rho(s)^2 g_N``; fields depend on ``s`` only."""

    n: int = 2
    interval: tuple[float, float] = (0.0, 1.0)
    warp: Warp = field(default_factory=lambda: Warp(-1.0))
    kind: str = "warped-product"

    def __post_init__(self):
        if self.n < 2:
            raise ParameterError("warped product needs n >= 2")
        a, b = self.interval
        if not b > a:
            raise ParameterError("empty warp interval")

    @property
    def dim(self):
        return self.n

    def drift(self, s):
        return (self.n - 1) * self.warp.log_derivative(s)

    def distance(self, x, y):
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        a, b = self.interval
        tol = 1e-12 * max(1.0, abs(a), abs(b))
        if np.any((x < a - tol) | (x > b + tol)) or np.any((y < a - tol) | (y > b + tol)):
            raise DomainError("s-coordinate outside the warp interval")
        return np.abs(y - x)

    def ricci_lower_bound(self):
        a, b = self.interval
        z = np.linspace(a, b, 257)
        kappa = float(np.mean(-self.warp.d2rho(z) / self.warp.rho(z)))
        regimes = ("warped-barrier", "barrier-family") if kappa < 0 else ("barrier-family",)
        return RicciBound((self.n - 1) * kappa, kappa, regimes)

    def describe(self):
        return {"kind": self.kind, "n": self.n, "interval": list(self.interval),
                "warp": {"kappa": self.warp.kappa, "z0": self.warp.z0}}


@dataclass(frozen=True)
class RadialBall(ModelManifold):
    """Euclidean ball of radius ``R`` in R^n with Dirichlet boundary."""

    n: int = 3
    radius: float = 1.0
    kind: str = "radial-ball"
    has_boundary: bool = True

    def __post_init__(self):
        if self.n < 1 or not self.radius > 0:
            raise ParameterError("ball needs n >= 1 and positive radius")

    @property
    def dim(self):
        return self.n

    def drift(self, r):
        return (self.n - 1) / np.asarray(r, float)

    def _check(self, pts, radial):
        tol = 1e-12 * self.radius
        if radial:
            if np.any((pts < -tol) | (pts > self.radius + tol)):
                raise DomainError("radial coordinate outside [0, R]")
        elif np.any(np.linalg.norm(pts, axis=-1) > self.radius + tol):
            raise DomainError("point outside the ball")

    def distance(self, x, y):
        """Generalised (inner) distance; the ball is convex so it is the chord length.

        Scalar arguments are radii and give ``|r_y - r_x|``, the smallest
        distance between points on the two spheres.
        """
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        radial = x.ndim == 0 or x.shape[-1:] != (self.n,) or self.n == 1
        self._check(x, radial)
        self._check(y, radial)
        if radial:
            return np.abs(y - x)
        return np.linalg.norm(y - x, axis=-1)

    def ricci_lower_bound(self):
        return RicciBound(0.0, 0.0, ("flat-barrier-dirichlet",))

    def describe(self):
        return {"kind": self.kind, "n": self.n, "radius": self.radius, "boundary": "dirichlet"}


def distance(model: ModelManifold, x, y):
    return model.distance(x, y)


def ricci_lower_bound(model: ModelManifold) -> RicciBound:
    return model.ricci_lower_bound()
