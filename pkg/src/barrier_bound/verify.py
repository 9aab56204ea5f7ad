"""Audits of the two-point, gradient, Modica, rigidity and Dirichlet-ball estimates.

Every audit returns a :class:`VerificationReport` whose ``max_defect`` is the
worst signed violation (negative means the inequality holds with room to spare)
and whose verdict compares it with a :class:`ToleranceModel`.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import kernels
from .barriers import BarrierCurve, InverseBarrier
from .errors import DomainError
from .geometry import (Circle, FlatTorus, Line, LpNorm, ModelManifold, QuadraticNorm, RadialBall,
                       SphereRadial, WarpedProduct)
from .pde import ScalarField, field_gradient_norms
from .profiles import VariationalProfile, c_sup, eval_K

PAIR_SAMPLE = 2048
FULL_SCAN_LIMIT = 4096
SHARP_TOL = 1e-8


@dataclass(frozen=True)
class ToleranceModel:
    """Pass threshold ``max(floor, C * h^2)``.

    With ``calibrate=True`` the constant is fitted from a refinement history
    instead (``safety`` times the largest ``defect / h^2``) and the fitted order
    must reach ``min_order``.
    """

    floor: float = 1e-9
    C: float = 0.0
    calibrate: bool = False
    safety: float = 2.0
    min_order: float = 1.8

    def threshold(self, h: float | None) -> float:
        h = 0.0 if h is None else float(h)
        return max(self.floor, self.C * h * h)

    def describe(self) -> dict:
        return asdict(self)


@dataclass
class VerificationReport:
    check_kind: str
    max_defect: float
    tolerance: float
    tolerance_model: dict
    verdict: str
    witness: dict = field(default_factory=dict)
    refinement_history: list = field(default_factory=list)
    flags: list = field(default_factory=list)
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def to_dict(self) -> dict:
        return {
            "check_kind": self.check_kind,
            "max_defect": _num(self.max_defect),
            "tolerance": _num(self.tolerance),
            "tolerance_model": self.tolerance_model,
            "verdict": self.verdict,
            "witness": _jsonable(self.witness),
            "refinement_history": [[_num(h), _num(d)] for h, d in self.refinement_history],
            "flags": list(self.flags),
            "details": _jsonable(self.details),
        }


def _num(x):
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else ("inf" if x > 0 else "-inf" if x < 0 else "nan")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _num(obj)
    return obj


def observed_order(hs, defects) -> float:
    """Least-squares slope of ``log|defect|`` against ``log h``."""
    hs = np.asarray(hs, dtype=float)
    d = np.abs(np.asarray(defects, dtype=float))
    ok = (hs > 0) & (d > 0)
    if ok.sum() < 2:
        return math.nan
    return float(np.polyfit(np.log(hs[ok]), np.log(d[ok]), 1)[0])


def _judge(kind, defect, h, tol_model: ToleranceModel, **kw) -> VerificationReport:
    history = kw.pop("history", None) or ([(h, defect)] if h is not None else [])
    tol = tol_model.threshold(h)
    verdict = "pass" if defect <= tol else "fail"
    if tol_model.calibrate and defect > tol:
        verdict = "inconclusive" if len(history) < 2 else verdict
    return VerificationReport(check_kind=kind, max_defect=float(defect), tolerance=tol,
                              tolerance_model=tol_model.describe(), verdict=verdict,
                              refinement_history=list(history), **kw)


def combine_refinement(reports, tol_model: ToleranceModel | None = None) -> VerificationReport:
    """Merge single-level reports of one audit into a report judged at the finest level.

    In calibration mode the constant ``C`` is fitted from all levels and the
    observed order must reach ``min_order``.
    """
    reports = sorted(reports, key=lambda r: -r.refinement_history[0][0])
    history = [r.refinement_history[0] for r in reports]
    finest = reports[-1]
    tm = tol_model or ToleranceModel(**finest.tolerance_model)
    hs, ds = zip(*history)
    order = observed_order(hs, ds)
    if tm.calibrate and len(history) >= 2:
        C = tm.safety * max(max(d, 0.0) / (h * h) for h, d in history if h > 0)
        tm = ToleranceModel(floor=tm.floor, C=C, calibrate=True, safety=tm.safety, min_order=tm.min_order)
    out = _judge(finest.check_kind, finest.max_defect, hs[-1], tm, history=history,
                 witness=finest.witness, flags=list(finest.flags), details=dict(finest.details))
    out.details["observed_order"] = order
    if tm.calibrate and len(history) >= 2 and finest.max_defect > tm.floor:
        if not (order >= tm.min_order):
            out.verdict = "fail"
            out.flags.append("order-below-threshold")
    return out


# --- helpers ------------------------------------------------------------------


def _require_certified(field_: ScalarField):
    if not field_.certified:
        raise DomainError(f"field residual {field_.residual_norm:.3g} exceeds its tolerance "
                          f"{field_.tolerance:.3g}; refusing to audit")


def _psi_values(field_: ScalarField, inverse: InverseBarrier):
    return np.asarray(inverse.psi(field_.values), dtype=float)


def _norm_spec(model: FlatTorus):
    norm = model.norm
    if isinstance(norm, LpNorm):
        return 0, float(norm.p), None
    if isinstance(norm, QuadraticNorm):
        return 1, 2.0, np.asarray(norm.A, dtype=float)
    raise DomainError(f"pair scans support lp and quadratic norms, not {type(norm).__name__}")


def sample_indices(field_: ScalarField, size: int = PAIR_SAMPLE, seed: int = 0) -> np.ndarray:
    """Stratified flat indices of a 2-D field plus its extremal and steepest points."""
    shape = field_.values.shape
    n = int(np.prod(shape))
    if n <= FULL_SCAN_LIMIT:
        return np.arange(n)
    nx, ny = shape
    sx = int(np.clip(round(math.sqrt(size * nx / ny)), 1, nx))
    sy = int(np.clip(size // sx, 1, ny))
    rng = np.random.default_rng(seed)
    ex = np.linspace(0, nx, sx + 1).astype(int)
    ey = np.linspace(0, ny, sy + 1).astype(int)
    ix = rng.integers(ex[:-1][:, None], ex[1:][:, None], size=(sx, sy))
    iy = rng.integers(ey[:-1][None, :], ey[1:][None, :], size=(sx, sy))
    picks = list(np.ravel_multi_index((ix.ravel(), iy.ravel()), shape))
    vals = field_.values.ravel()
    picks += [int(np.argmin(vals)), int(np.argmax(vals))]
    if field_.gradient_norm is not None:
        picks.append(int(np.argmax(field_.gradient_norm.ravel())))
    return np.unique(np.asarray(picks, dtype=np.int64))


def _one_dim_circumference(model: ModelManifold) -> float:
    if isinstance(model, Circle):
        return float(model.length)
    if isinstance(model, (Line, WarpedProduct, RadialBall, SphereRadial)):
        return 0.0
    raise DomainError(f"no one-variable distance for {model.kind}")


def two_point_values(field_: ScalarField, inverse: InverseBarrier, i, j, model: ModelManifold | None = None):
    """``Z(x_i, x_j) = psi(u(x_j)) - psi(u(x_i)) - d(x_i, x_j)`` for flat sample indices."""
    model = model or field_.model
    psi = _psi_values(field_, inverse).ravel()
    pts = field_.points()
    d = model.distance(pts[i], pts[j])
    return psi[j] - psi[i] - d


# --- audits -------------------------------------------------------------------


def two_point_audit(field_: ScalarField, inverse: InverseBarrier, model: ModelManifold | None = None,
                    tolerance: ToleranceModel | None = None, sample_size: int = PAIR_SAMPLE,
                    seed: int = 0, kind: str = "two-point") -> VerificationReport:
    """Largest ``psi(u(y)) - psi(u(x)) - d(x, y)`` over distinct sample pairs."""
    _require_certified(field_)
    model = model or field_.model
    tm = tolerance or ToleranceModel()
    psi = _psi_values(field_, inverse)
    details = {"barrier": inverse.curve.summary()}
    if field_.ndim == 1:
        x = field_.coords[0]
        best, i, j = kernels.pair_max_1d(x, psi, _one_dim_circumference(model))
        witness = {"x": float(x[i]), "y": float(x[j])}
        details["pairs"] = int(x.size * (x.size - 1))
        if not isinstance(model, Circle) and x.size <= FULL_SCAN_LIMIT:
            z = psi[None, :] - psi[:, None] - np.abs(x[None, :] - x[:, None])
            upper = np.triu_indices(x.size, 1)
            details["forward_pair_max_abs"] = float(np.max(np.abs(z[upper])))
    else:
        idx = sample_indices(field_, sample_size, seed)
        pts = field_.points()[idx]
        code, p, A = _norm_spec(model)
        best, i, j = kernels.pair_max_torus(pts, psi.ravel()[idx], model.periods, code, p, A)
        witness = {"x": pts[i].tolist(), "y": pts[j].tolist()}
        details["pairs"] = int(idx.size * (idx.size - 1))
        details["sampled_points"] = int(idx.size)
    return _judge(kind, best, field_.spacing, tm, witness=witness, details=details)


def gradient_audit(field_: ScalarField, curve: BarrierCurve, inverse: InverseBarrier,
                   tolerance: ToleranceModel | None = None) -> VerificationReport:
    """Largest ``|Du|(x) - phi'(psi(u(x)))``; a defect within ``1e-8`` of zero is flagged ``sharp``."""
    _require_certified(field_)
    tm = tolerance or ToleranceModel()
    f = field_ if field_.gradient_norm is not None else field_gradient_norms(field_)
    bound = np.asarray(inverse.dphi_of(f.values), dtype=float)
    defect = np.asarray(f.gradient_norm, dtype=float) - bound
    k = int(np.argmax(defect))
    pts = f.points()
    pt = pts[k] if pts.ndim > 1 else pts[k]
    flags = ["sharp"] if abs(defect.flat[k]) <= SHARP_TOL else []
    return _judge("gradient", float(defect.flat[k]), f.spacing, tm, flags=flags,
                  witness={"x": np.asarray(pt).tolist(), "u": float(f.values.flat[k])},
                  details={"barrier": curve.summary(), "min_margin": float(-np.max(defect))})


def modica_audit(field_: ScalarField, profile: VariationalProfile, c_u: float | None = None,
                 tolerance: ToleranceModel | None = None) -> VerificationReport:
    """Largest ``K(|Du|^2) + Q(u) - c_u`` with ``c_u`` the sup of ``Q`` over the field's range."""
    _require_certified(field_)
    tm = tolerance or ToleranceModel()
    f = field_ if field_.gradient_norm is not None else field_gradient_norms(field_)
    cu = c_sup(profile, f.range) if c_u is None else float(c_u)
    g = np.asarray(f.gradient_norm, dtype=float)
    P = eval_K(profile, g * g) + profile.potential(f.values) - cu
    P = np.asarray(P, dtype=float)
    k = int(np.argmax(P))
    pts = f.points()
    flags = ["sharp"] if abs(P.flat[k]) <= SHARP_TOL else []
    return _judge("modica", float(P.flat[k]), f.spacing, tm, flags=flags,
                  witness={"x": np.asarray(pts[k]).tolist(), "u": float(f.values.flat[k])},
                  details={"c_u": cu, "abs_max": float(np.max(np.abs(P))), "min": float(np.min(P))})


def rigidity_audit(field_: ScalarField, profile: VariationalProfile, tolerance: ToleranceModel | None = None,
                   edge_fraction: float = 1e-3) -> VerificationReport:
    """Endpoint characterisation of ``c_u`` and absence of interior critical maxima of ``Q``.

    The defect is ``|c_u - max(Q(inf u), Q(sup u))|``. Any sample strictly inside
    the range with ``Q(u) >= c_u - tol`` and ``|Q'(u)| <= tol`` fails the audit.
    Constant fields pass vacuously.
    """
    _require_certified(field_)
    tm = tolerance or ToleranceModel()
    tol = tm.threshold(field_.spacing)
    if field_.is_constant:
        rep = _judge("rigidity", -math.inf, field_.spacing, tm, flags=["constant"])
        rep.verdict = "pass"
        return rep
    lo, hi = field_.range
    cu = c_sup(profile, (lo, hi))
    ends = max(float(profile.potential(lo)), float(profile.potential(hi)))
    gap = abs(cu - ends)
    v = field_.values.ravel()
    edge = edge_fraction * (hi - lo)
    inner = (v > lo + edge) & (v < hi - edge)
    crit = inner & (profile.potential(v) >= cu - tol) & (np.abs(profile.potential_derivative(v)) <= tol)
    details = {"c_u": cu, "endpoint_max": ends, "range": [lo, hi], "interior_critical_points": int(crit.sum())}
    rep = _judge("rigidity", gap, field_.spacing, tm, details=details)
    if crit.any():
        k = int(np.argmax(crit))
        rep.verdict = "fail"
        rep.flags.append("interior-maximum-of-Q")
        rep.witness = {"u": float(v[k])}
    return rep


def dirichlet_boundary_audit(field_: ScalarField, inverse: InverseBarrier, model: RadialBall | None = None,
                             tolerance: ToleranceModel | None = None) -> VerificationReport:
    """Two-point audit on a radial ball field with constant boundary data.

    For radial fields the inner distance between points at radii ``r_x``,
    ``r_y`` is at least ``|r_y - r_x|`` with equality on a common ray, so the
    radial pair scan (which includes the boundary radius) is exact.
    """
    model = model or field_.model
    if not isinstance(model, RadialBall):
        raise DomainError("Dirichlet audit needs a radial-ball model")
    r = field_.coords[0]
    if abs(r[-1] - model.radius) > 1e-12 * model.radius:
        raise DomainError("radial samples must include the boundary sphere")
    rep = two_point_audit(field_, inverse, model, tolerance, kind="dirichlet-two-point")
    rep.details["boundary_value"] = float(field_.values[-1])
    return rep


__all__ = [
    "ToleranceModel", "VerificationReport", "combine_refinement", "dirichlet_boundary_audit",
    "gradient_audit", "modica_audit", "observed_order", "rigidity_audit", "sample_indices",
    "two_point_audit", "two_point_values",
]
