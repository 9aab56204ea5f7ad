"""CSV and JSON writers for barrier curves, fields and audit reports, plus optional SVG plots.

JSON output is deterministic: keys are sorted, floats are written with
``repr`` precision and non-finite values become the strings ``"inf"``,
``"-inf"`` and ``"nan"``.
"""
from __future__ import annotations

import csv
import json
import logging
from pathlib import Path

import numpy as np

from .barriers import BarrierCurve, InverseBarrier
from .pde import ScalarField
from .verify import _jsonable

log = logging.getLogger(__name__)


def dumps(obj) -> str:
    return json.dumps(_jsonable(obj), sort_keys=True, indent=2) + "\n"


def write_json(path, obj) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(obj), encoding="utf-8")
    return path


def _write_rows(path, header, rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return path


# --- barrier curves -----------------------------------------------------------


def curve_metadata(curve: BarrierCurve) -> dict:
    meta = curve.summary()
    residual = curve.meta.get("residual")
    if residual is not None:
        meta["residual"] = float(residual)
    return meta


def write_curve(curve: BarrierCurve, stem) -> tuple[Path, Path]:
    """Write ``<stem>.csv`` (columns ``z, phi, dphi``) and ``<stem>.json`` metadata."""
    stem = Path(stem)
    rows = zip(curve.grid, curve.phi, curve.dphi)
    return (_write_rows(stem.with_suffix(".csv"), ["z", "phi", "dphi"], rows),
            write_json(stem.with_suffix(".json"), curve_metadata(curve)))


def read_curve(stem) -> BarrierCurve:
    stem = Path(stem)
    data = np.loadtxt(stem.with_suffix(".csv"), delimiter=",", skiprows=1, ndmin=2)
    meta = json.loads(stem.with_suffix(".json").read_text(encoding="utf-8"))
    delta = meta.get("delta") or 0.0
    return BarrierCurve(data[:, 0], data[:, 1], data[:, 2], kind=meta["kind"], delta=float(delta),
                        c=meta.get("c"), meta={"loaded_from": str(stem)})


# --- fields -------------------------------------------------------------------


def field_metadata(field_: ScalarField) -> dict:
    lo, hi = field_.range
    meta = {
        "model": field_.model.describe(),
        "provenance": field_.provenance,
        "shape": list(np.shape(field_.values)),
        "spacing": field_.spacing,
        "residual_norm": field_.residual_norm,
        "tolerance": field_.tolerance,
        "certified": field_.certified,
        "range": [lo, hi],
    }
    meta.update({k: v for k, v in field_.meta.items()
                 if isinstance(v, (int, float, str, bool)) or k in ("resolution",)})
    return meta


def write_field(field_: ScalarField, stem) -> tuple[Path, Path]:
    """Write ``<stem>.csv`` (coordinates, ``u``, ``|grad u|``) and a ``<stem>.json`` sidecar."""
    stem = Path(stem)
    pts = field_.points()
    pts = pts[:, None] if pts.ndim == 1 else pts
    names = ["x"] if pts.shape[1] == 1 else ["x", "y", "z", "w"][: pts.shape[1]]
    u = np.ravel(field_.values)
    g = np.full(u.shape, np.nan) if field_.gradient_norm is None else np.ravel(field_.gradient_norm)
    rows = (list(p) + [a, b] for p, a, b in zip(pts, u, g))
    return (_write_rows(stem.with_suffix(".csv"), names + ["u", "grad_norm"], rows),
            write_json(stem.with_suffix(".json"), field_metadata(field_)))


# --- summary tables -----------------------------------------------------------

SUMMARY_COLUMNS = ["scenario", "audit", "resolution", "sweep", "max_defect", "tolerance", "verdict"]


def write_summary(path, rows) -> Path:
    return _write_rows(path, SUMMARY_COLUMNS, ([r.get(c, "") for c in SUMMARY_COLUMNS] for r in rows))


# --- plots --------------------------------------------------------------------


def _pyplot():
    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        log.warning("matplotlib is not installed; skipping plots")
        return None
    return plt


def plot_field(field_: ScalarField, inverse: InverseBarrier | None, path) -> Path | None:
    """SVG of ``u`` and of ``|grad u|`` against the barrier slope ``phi'(psi(u))``."""
    plt = _pyplot()
    if plt is None:
        return None
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig, (ax0, ax1) = plt.subplots(1, 2, figsize=(10, 4))
    if field_.ndim == 1:
        ax0.plot(field_.coords[0], field_.values)
        ax0.set_xlabel("x")
        ax0.set_ylabel("u")
    else:
        im = ax0.imshow(field_.values.T, origin="lower", aspect="auto",
                        extent=[0, field_.model.periods[0], 0, field_.model.periods[1]])
        fig.colorbar(im, ax=ax0, label="u")
    u = np.ravel(field_.values)
    order = np.argsort(u)
    if field_.gradient_norm is not None:
        ax1.plot(u[order], np.ravel(field_.gradient_norm)[order], ".", ms=2, label="|grad u|")
    if inverse is not None and not inverse.is_constant:
        lo, hi = inverse.domain
        vv = np.linspace(max(lo, u.min()), min(hi, u.max()), 400)
        ax1.plot(vv, inverse.dphi_of(vv), "-", label="phi'(psi(u))")
    ax1.set_xlabel("u")
    ax1.legend()
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)
    return path


def plot_z_slice(field_: ScalarField, inverse: InverseBarrier, witness_index: int, path) -> Path | None:
    """SVG heat summary of ``y -> Z(x*, y)`` for the witness base point ``x*``."""
    plt = _pyplot()
    if plt is None:
        return None
    from .verify import two_point_values

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    n = np.size(field_.values)
    j = np.arange(n)
    z = two_point_values(field_, inverse, np.full(n, int(witness_index)), j)
    fig, ax = plt.subplots(figsize=(5, 4))
    if field_.ndim == 1:
        ax.plot(field_.coords[0], z)
        ax.set_xlabel("y")
        ax.set_ylabel("Z(x*, y)")
    else:
        im = ax.imshow(z.reshape(field_.values.shape).T, origin="lower", aspect="auto",
                       extent=[0, field_.model.periods[0], 0, field_.model.periods[1]])
        fig.colorbar(im, ax=ax, label="Z(x*, y)")
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)
    return path
