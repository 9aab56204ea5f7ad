"""Declarative scenarios: YAML configs, validation and the profile -> barrier -> field -> audit pipeline.

A scenario file is a mapping with ``spec_version: 1`` and the sections
``profile``, ``model``, ``barrier``, ``field``, ``audits``, optional
``sweep`` (dotted config paths mapped to value lists) and ``outputs``.
Oracle scenarios use ``kind: oracles`` and an ``oracles`` list instead of the
pipeline sections. Numbers may be written as arithmetic in ``pi``, e.g.
``3*pi``.

Running a scenario expands the sweep into points (cartesian product), runs the
field at each resolution in order (relaxations are seeded by prolonging the
previous level), audits every level, combines per-level reports into a
refinement report, and finally evaluates the cross-level and cross-sweep
audits. The report bundle is deterministic apart from its ``timestamp``.
"""
from __future__ import annotations

import ast
import copy
import datetime as _dt
import hashlib
import itertools
import json
import logging
import math
import operator
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from . import serialize
from .barriers import (BarrierCurve, invert_barrier, modica_barrier, modica_crosscheck, solve_flat_barrier,
                       solve_sphere_family, solve_warped_barrier)
from .errors import BarrierBoundError, ConfigError, ParameterError
from .geometry import (Circle, FlatTorus, Line, LpNorm, QuadraticNorm, RadialBall, SphereRadial, WarpedProduct,
                       warp_factor)
from .oracles import ORACLES
from .pde import (ScalarField, analytic_field, lift_barrier, make_seed, manufactured_forcing, prolong,
                  relax_to_steady, solve_symmetric, torus_axes)
from .profiles import VariationalProfile, build_profile, c_sup, coefficients_from_profile
from .verify import (ToleranceModel, VerificationReport, _judge, combine_refinement, dirichlet_boundary_audit,
                     gradient_audit, modica_audit, observed_order, rigidity_audit, two_point_audit)

log = logging.getLogger(__name__)

SPEC_VERSION = 1
BUILTIN_DIR = Path(__file__).with_name("scenarios")

EXIT_OK, EXIT_FAIL, EXIT_CONSTRUCTION, EXIT_CONFIG = 0, 2, 3, 4

MODEL_KINDS = {"line", "circle", "flat-torus", "sphere-radial", "warped-product", "radial-ball"}
BARRIER_KINDS = {"none", "flat", "warped", "sphere-family", "modica"}
FIELD_KINDS = {"none", "analytic", "symmetric", "lifted-barrier", "relax", "manufactured"}
LEVEL_AUDITS = {"two-point", "gradient", "modica", "rigidity", "dirichlet", "solution-error"}
BARRIER_AUDITS = {"barrier-crosscheck", "barrier-residual", "sphere-lower-bound", "monotonicity"}
POST_AUDITS = {"residual-order", "coverage-trend"}
AUDIT_KINDS = LEVEL_AUDITS | BARRIER_AUDITS | POST_AUDITS
TOP_KEYS = {"spec_version", "name", "description", "kind", "profile", "model", "barrier", "field", "audits",
            "sweep", "outputs", "oracles"}
TOLERANCE_KEYS = {"floor", "C", "calibrate", "safety", "min_order"}
OUTPUT_KEYS = {"plots", "fields", "curves"}

# --- safe arithmetic for numeric entries ---------------------------------------

_OPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul, ast.Div: operator.truediv,
        ast.Pow: operator.pow, ast.USub: operator.neg, ast.UAdd: operator.pos}
_NAMES = {"pi": math.pi, "e": math.e}
_FUNCS = {"sqrt": math.sqrt}


def _eval_node(node):
    if isinstance(node, ast.Expression):
        return _eval_node(node.body)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
        return float(node.value)
    if isinstance(node, ast.Name) and node.id in _NAMES:
        return _NAMES[node.id]
    if isinstance(node, ast.BinOp) and type(node.op) in _OPS:
        return _OPS[type(node.op)](_eval_node(node.left), _eval_node(node.right))
    if isinstance(node, ast.UnaryOp) and type(node.op) in _OPS:
        return _OPS[type(node.op)](_eval_node(node.operand))
    if (isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and node.func.id in _FUNCS
            and len(node.args) == 1 and not node.keywords):
        return _FUNCS[node.func.id](_eval_node(node.args[0]))
    raise ValueError("unsupported expression")


def number(value) -> float:
    """A float from a YAML scalar; strings may be arithmetic in ``pi``, ``e`` and ``sqrt``."""
    if isinstance(value, bool):
        raise ValueError("booleans are not numbers")
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        return float(_eval_node(ast.parse(value.strip(), mode="eval")))
    raise ValueError(f"expected a number, got {type(value).__name__}")


# --- loading and validation ----------------------------------------------------


def _node_lines(node, path=(), out=None):
    """Map config paths to 1-based source lines using the YAML node tree."""
    out = {} if out is None else out
    out[path] = node.start_mark.line + 1
    if isinstance(node, yaml.MappingNode):
        for k, v in node.value:
            out[path + (k.value,)] = k.start_mark.line + 1
            _node_lines(v, path + (k.value,), out)
    elif isinstance(node, yaml.SequenceNode):
        for i, v in enumerate(node.value):
            _node_lines(v, path + (i,), out)
    return out


class _Validator:
    def __init__(self, source: str, lines: dict):
        self.source = source
        self.lines = lines

    def fail(self, path, message):
        path = tuple(path)
        line = None
        for k in range(len(path), -1, -1):
            if path[:k] in self.lines:
                line = self.lines[path[:k]]
                break
        where = ".".join(str(p) for p in path) or "<root>"
        loc = f"{self.source}:{line}" if line else self.source
        raise ConfigError(f"{loc}: {where}: {message}")

    def mapping(self, cfg, path, required=False):
        node = _get(cfg, path)
        if node is None:
            if required:
                self.fail(path, "missing required section")
            return {}
        if not isinstance(node, dict):
            self.fail(path, "expected a mapping")
        return node

    def num(self, cfg, path, required=True, positive=False):
        node = _get(cfg, path)
        if node is None:
            if required:
                self.fail(path, "missing required number")
            return None
        try:
            v = number(node)
        except (ValueError, SyntaxError, ZeroDivisionError) as exc:
            self.fail(path, f"not a number ({exc})")
        if positive and not v > 0:
            self.fail(path, "must be positive")
        return v

    def numbers(self, cfg, path, length=None, required=True):
        node = _get(cfg, path)
        if node is None:
            if required:
                self.fail(path, "missing required list")
            return None
        if not isinstance(node, list) or (length is not None and len(node) != length):
            self.fail(path, f"expected a list of {length or 'some'} numbers")
        return [self.num(cfg, tuple(path) + (i,)) for i in range(len(node))]

    def choice(self, cfg, path, options, default=None):
        node = _get(cfg, path)
        if node is None:
            if default is None:
                self.fail(path, f"missing; expected one of {sorted(options)}")
            return default
        if node not in options:
            self.fail(path, f"unknown value {node!r}; expected one of {sorted(options)}")
        return node


def _get(cfg, path):
    node = cfg
    for p in path:
        if isinstance(node, dict) and p in node:
            node = node[p]
        elif isinstance(node, list) and isinstance(p, int) and 0 <= p < len(node):
            node = node[p]
        else:
            return None
    return node


def _set(cfg, dotted: str, value):
    keys = dotted.split(".")
    node = cfg
    for k in keys[:-1]:
        node = node.setdefault(k, {})
    node[keys[-1]] = value


def _is_pow2(n) -> bool:
    return isinstance(n, int) and n > 0 and (n & (n - 1)) == 0


def validate(cfg, source: str = "<config>", lines: dict | None = None) -> dict:
    """Check a parsed config; raises :class:`ConfigError` naming the file, line and field."""
    v = _Validator(source, lines or {})
    if not isinstance(cfg, dict):
        v.fail((), "a scenario must be a mapping")
    for key in cfg:
        if key not in TOP_KEYS:
            v.fail((key,), f"unknown top-level key; allowed: {sorted(TOP_KEYS)}")
    if cfg.get("spec_version") != SPEC_VERSION:
        v.fail(("spec_version",), f"must be {SPEC_VERSION}")
    if not isinstance(cfg.get("name"), str) or not cfg["name"].strip():
        v.fail(("name",), "a nonempty string is required")
    kind = v.choice(cfg, ("kind",), {"pipeline", "oracles"}, default="pipeline")
    outputs = v.mapping(cfg, ("outputs",))
    for key, val in outputs.items():
        if key not in OUTPUT_KEYS or not isinstance(val, bool):
            v.fail(("outputs", key), f"expected a boolean toggle among {sorted(OUTPUT_KEYS)}")
    if kind == "oracles":
        names = cfg.get("oracles")
        if not isinstance(names, list) or not names:
            v.fail(("oracles",), "a nonempty list of oracle names is required")
        for i, name in enumerate(names):
            if name not in ORACLES:
                v.fail(("oracles", i), f"unknown oracle {name!r}; expected one of {sorted(ORACLES)}")
        return cfg

    sweep = v.mapping(cfg, ("sweep",))
    for key, values in sweep.items():
        if not isinstance(values, list) or not values:
            v.fail(("sweep", key), "sweep lists must be nonempty")
        head = key.split(".")[0]
        if head not in {"profile", "model", "barrier", "field"}:
            v.fail(("sweep", key), "sweeps may vary profile, model, barrier or field entries only")
    for point in _sweep_points(cfg):
        _validate_point(v, point)
    return cfg


def _validate_point(v: _Validator, cfg):
    prof = v.mapping(cfg, ("profile",), required=True)
    for key in ("tau", "c1", "c2", "p"):
        if key in prof:
            v.num(cfg, ("profile", key))
    if "value_range" in prof:
        v.numbers(cfg, ("profile", "value_range"), 2)
    try:
        _build_profile(cfg["profile"])
    except (BarrierBoundError, KeyError, TypeError, ValueError) as exc:
        v.fail(("profile",), f"does not resolve: {exc}")

    model = v.mapping(cfg, ("model",), required=True)
    mk = v.choice(cfg, ("model", "kind"), MODEL_KINDS)
    if mk == "line" or mk == "warped-product":
        v.numbers(cfg, ("model", "interval"), 2)
    if mk == "circle" and "radius" not in model and "length" not in model:
        v.fail(("model",), "circle needs radius or length")
    if mk == "flat-torus":
        v.numbers(cfg, ("model", "periods"))
        norm = model.get("norm", "euclidean")
        if isinstance(norm, dict):
            nk = v.choice(cfg, ("model", "norm", "kind"), {"euclidean", "lp", "quadratic"})
            if nk == "lp":
                v.num(cfg, ("model", "norm", "p"))
            if nk == "quadratic" and not isinstance(norm.get("A"), list):
                v.fail(("model", "norm", "A"), "quadratic norms need a coefficient table A")
        elif norm != "euclidean":
            v.fail(("model", "norm"), "expected 'euclidean' or a mapping with kind lp | quadratic")
    if mk in {"sphere-radial", "warped-product", "radial-ball"}:
        n = model.get("n")
        if not isinstance(n, int) or n < 2:
            v.fail(("model", "n"), "dimension n must be an integer >= 2")
    if mk == "warped-product":
        v.num(cfg, ("model", "kappa"))
    try:
        built = _build_model(model)
    except (BarrierBoundError, KeyError, TypeError, ValueError) as exc:
        v.fail(("model",), f"does not resolve: {exc}")

    bar = v.mapping(cfg, ("barrier",))
    bk = v.choice(cfg, ("barrier", "kind"), BARRIER_KINDS, default="none")
    for key in ("a", "b", "delta", "c", "c_offset", "s0", "u0", "kappa", "z0"):
        if key in bar:
            v.num(cfg, ("barrier", key))
    rng = bar.get("range", "field")
    if rng != "field":
        v.numbers(cfg, ("barrier", "range"), 2)
    if bk == "flat":
        v.num(cfg, ("barrier", "a"))
        v.num(cfg, ("barrier", "b"))
    if bk in {"sphere-family", "modica"} and "c" not in bar and "c_offset" not in bar:
        v.fail(("barrier",), f"{bk} barriers need c or c_offset")
    if bk == "warped" and not isinstance(built, WarpedProduct) and "kappa" not in bar:
        v.fail(("barrier", "kappa"), "warped barriers off a warped-product model need kappa")

    fld = v.mapping(cfg, ("field",))
    fk = v.choice(cfg, ("field", "kind"), FIELD_KINDS, default="none")
    if fk != "none":
        res = fld.get("resolutions")
        if not isinstance(res, list) or not res:
            v.fail(("field", "resolutions"), "a nonempty list of resolutions is required")
        for i, n in enumerate(res):
            ok = _is_pow2(n) if fk in {"relax", "manufactured"} else (_is_pow2(n) or _is_pow2(n - 1)
                                                                       if isinstance(n, int) else False)
            if not ok:
                v.fail(("field", "resolutions", i), "resolutions must be powers of two (2^k + 1 allowed "
                                                    "for one-variable grids)")
        if "tol" in fld:
            v.num(cfg, ("field", "tol"), positive=True)
    if fk == "relax":
        v.choice(cfg, ("field", "method"), {"auto", "newton"}, default="auto")
    if fk in {"relax", "manufactured"} and mk != "flat-torus":
        v.fail(("field", "kind"), f"{fk} fields need a flat-torus model")
    if fk == "analytic" and fld.get("expression") not in ANALYTIC_1D:
        v.fail(("field", "expression"), f"expected one of {sorted(ANALYTIC_1D)}")
    if fk == "manufactured" and fld.get("expression") not in ANALYTIC_TORUS:
        v.fail(("field", "expression"), f"expected one of {sorted(ANALYTIC_TORUS)}")
    if fk == "symmetric" and not isinstance(fld.get("bc"), dict):
        v.fail(("field", "bc"), "symmetric fields need a bc mapping")
    if fk == "lifted-barrier" and bk not in {"flat", "warped"}:
        v.fail(("field", "kind"), "lifted-barrier fields need a flat or warped barrier")

    audits = cfg.get("audits")
    if not isinstance(audits, list) or not audits:
        v.fail(("audits",), "a nonempty list of audits is required")
    for i, audit in enumerate(audits):
        if not isinstance(audit, dict):
            v.fail(("audits", i), "each audit is a mapping with a kind")
        ak = v.choice(cfg, ("audits", i, "kind"), AUDIT_KINDS)
        tol = v.mapping(cfg, ("audits", i, "tolerance"))
        for key in tol:
            if key not in TOLERANCE_KEYS:
                v.fail(("audits", i, "tolerance", key), f"unknown tolerance key; allowed {sorted(TOLERANCE_KEYS)}")
            if key != "calibrate":
                v.num(cfg, ("audits", i, "tolerance", key))
        if ak in LEVEL_AUDITS and fk == "none":
            v.fail(("audits", i, "kind"), f"{ak} audits need a field")
        if ak in {"two-point", "gradient", "dirichlet"} and bk == "none":
            v.fail(("audits", i, "kind"), f"{ak} audits need a barrier")
        if ak in BARRIER_AUDITS and bk == "none":
            v.fail(("audits", i, "kind"), f"{ak} audits need a barrier")
        if ak == "dirichlet" and mk != "radial-ball":
            v.fail(("audits", i, "kind"), "dirichlet audits need a radial-ball model")
        if ak == "solution-error" and fk != "manufactured":
            v.fail(("audits", i, "kind"), "solution-error audits need a manufactured field")


def load_config(source) -> dict:
    """Parse and validate a scenario from a path or a built-in name."""
    path = resolve_path(source)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"{source}: cannot read scenario ({exc})") from exc
    return parse_config(text, str(path))


def parse_config(text: str, source: str = "<config>") -> dict:
    try:
        node = yaml.compose(text)
        cfg = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        loc = f"{source}:{mark.line + 1}" if mark is not None else source
        raise ConfigError(f"{loc}: YAML syntax error: {getattr(exc, 'problem', exc)}") from exc
    lines = _node_lines(node) if node is not None else {}
    return validate(cfg, source, lines)


def builtin_names() -> list[str]:
    return sorted(p.stem for p in BUILTIN_DIR.glob("*.yaml"))


def resolve_path(source) -> Path:
    path = Path(source)
    if path.exists() or path.suffix:
        return path
    builtin = BUILTIN_DIR / f"{source}.yaml"
    return builtin if builtin.exists() else path


# --- sweeps ---------------------------------------------------------------------


def _sweep_points(cfg, only=None):
    """Resolved configs for the cartesian product of the sweep lists.

    With ``only`` (a collection of sweep keys) the other lists are frozen at
    their first value.
    """
    sweep = cfg.get("sweep") or {}
    keys = list(sweep)
    lists = [sweep[k] if only is None or k in only else sweep[k][:1] for k in keys]
    for combo in itertools.product(*lists):
        point = copy.deepcopy({k: v for k, v in cfg.items() if k != "sweep"})
        for k, val in zip(keys, combo):
            _set(point, k, val)
        point["_sweep"] = dict(zip(keys, combo))
        yield point


# --- builders -------------------------------------------------------------------


def _build_profile(spec: dict) -> VariationalProfile:
    spec = dict(spec)
    kw = {}
    for key in ("p", "tau", "c1", "c2"):
        if key in spec:
            kw[key] = number(spec[key])
    if "value_range" in spec:
        kw["value_range"] = tuple(number(x) for x in spec["value_range"])
    return build_profile(spec.get("phi", "linear"), spec.get("potential", "zero"), name=spec.get("name"), **kw)


def _build_model(spec: dict):
    kind = spec["kind"]
    if kind == "line":
        return Line(tuple(number(x) for x in spec["interval"]))
    if kind == "circle":
        radius = number(spec["radius"]) if "radius" in spec else number(spec["length"]) / (2.0 * math.pi)
        return Circle(radius)
    if kind == "flat-torus":
        periods = tuple(number(x) for x in spec["periods"])
        norm = spec.get("norm", "euclidean")
        H = None
        if isinstance(norm, dict) and norm["kind"] == "lp":
            H = LpNorm(number(norm["p"]), len(periods))
        elif isinstance(norm, dict) and norm["kind"] == "quadratic":
            H = QuadraticNorm(np.array([[number(x) for x in row] for row in norm["A"]]))
        return FlatTorus(periods, H)
    if kind == "sphere-radial":
        return SphereRadial(int(spec["n"]), number(spec.get("radius", 1.0)))
    if kind == "warped-product":
        warp = warp_factor(number(spec["kappa"]), number(spec.get("z0", 0.0)))
        return WarpedProduct(int(spec["n"]), tuple(number(x) for x in spec["interval"]), warp)
    if kind == "radial-ball":
        return RadialBall(int(spec["n"]), number(spec.get("radius", 1.0)))
    raise ParameterError(f"unknown model kind {kind!r}")


def _kink(x, center=0.0, width=math.sqrt(2.0)):
    return np.tanh((x - center) / width)


def _kink_gradient(x, center=0.0, width=math.sqrt(2.0)):
    return 1.0 / (width * np.cosh((x - center) / width) ** 2)


ANALYTIC_1D = {
    "kink": (_kink, _kink_gradient),
    "constant": (lambda x, value=0.0: value + 0.0 * x, lambda x, value=0.0: 0.0 * x),
}


def _trig(x, y, periods, amplitude=0.5):
    kx, ky = (2.0 * math.pi / P for P in periods)
    return amplitude * (np.sin(kx * x) + 0.5 * np.cos(ky * y))


ANALYTIC_TORUS = {"trig": _trig}


def _params(spec, key="params"):
    return {k: number(v) for k, v in (spec.get(key) or {}).items()}


def _barrier_range(spec, field_: ScalarField | None, profile: VariationalProfile):
    rng = spec.get("range", "field")
    if rng == "field":
        return field_.range if field_ is not None else profile.value_range
    return tuple(number(x) for x in rng)


def _barrier_level(spec, profile, rng):
    prof = profile.with_range(*rng)
    cu = c_sup(prof)
    if "c" in spec:
        c = number(spec["c"])
    else:
        c = cu + number(spec["c_offset"])
    if not c > cu:
        raise ParameterError(f"barrier level c = {c:.12g} must exceed c_u = {cu:.12g} "
                             f"(precondition c > c_u on the range [{rng[0]:.6g}, {rng[1]:.6g}])")
    return prof, c, cu


def build_barrier(spec: dict, profile: VariationalProfile, model, field_: ScalarField | None = None,
                  n_points: int | None = None) -> BarrierCurve | None:
    kind = spec.get("kind", "none")
    if kind == "none":
        return None
    rng = _barrier_range(spec, field_, profile)
    coeffs = coefficients_from_profile(profile)
    npts = int(spec.get("n_points", n_points or 1025))
    bracket = spec.get("slope_bracket")
    bracket = None if bracket is None else tuple(number(x) for x in bracket)
    if kind == "flat":
        return solve_flat_barrier(coeffs, number(spec["a"]), number(spec["b"]), rng,
                                  delta=number(spec.get("delta", 0.0)), slope_bracket=bracket, n_points=npts)
    if kind == "warped":
        warped = model if isinstance(model, WarpedProduct) else None
        kappa = number(spec["kappa"]) if "kappa" in spec else warped.warp.kappa
        z0 = number(spec["z0"]) if "z0" in spec else (warped.warp.z0 if warped else 0.0)
        n = int(spec.get("n", warped.n if warped else 2))
        a, b = (number(spec["a"]), number(spec["b"])) if "a" in spec else warped.interval
        return solve_warped_barrier(coeffs, kappa, n, z0, a, b, rng, slope_bracket=bracket, n_points=npts)
    prof, c, _ = _barrier_level(spec, profile, rng)
    if kind == "sphere-family":
        n = int(spec.get("n", getattr(model, "n", 2)))
        u0 = number(spec["u0"]) if "u0" in spec else None
        return solve_sphere_family(prof, c, u0=u0, n=n, n_points=npts)
    if kind == "modica":
        return modica_barrier(prof, c, s0=number(spec.get("s0", 0.0)), n_points=npts)
    raise ParameterError(f"unknown barrier kind {kind!r}")


def build_field(spec: dict, profile: VariationalProfile, model, resolution, previous: ScalarField | None,
                curve: BarrierCurve | None, seed: int = 42) -> ScalarField:
    kind = spec["kind"]
    coeffs = coefficients_from_profile(profile)
    tol = number(spec.get("tol", 1e-9))
    if kind == "analytic":
        func, grad = ANALYTIC_1D[spec["expression"]]
        params = _params(spec)
        if isinstance(model, Circle):
            x = np.arange(resolution) * (model.length / resolution)
        else:
            a, b = model.interval if hasattr(model, "interval") else (0.0, model.radius)
            x = np.linspace(a, b, resolution)
        f = analytic_field(model, lambda t: func(t, **params), x, gradient=lambda t: grad(t, **params),
                           coeffs=coeffs if spec.get("check_residual", True) else None, tolerance=tol)
    elif kind == "symmetric":
        bc = {k: (v if k == "type" else _num_tree(v)) for k, v in spec["bc"].items()}
        f = solve_symmetric(model, coeffs, bc, n_points=resolution, tol=tol)
    elif kind == "lifted-barrier":
        f = lift_barrier(curve, model, coeffs, tol=tol)
    elif kind == "relax":
        shape = (resolution,) * model.dim
        if previous is not None:
            start = prolong(previous.values, shape)
        else:
            start = make_seed(model, shape, seed=seed, **_seed_kwargs(spec.get("seed")))
        f = relax_to_steady(model, profile, start, tol=tol, method=spec.get("method", "auto"))
    elif kind == "manufactured":
        f = _manufactured(spec, profile, model, resolution, tol, seed)
    else:
        raise ParameterError(f"unknown field kind {kind!r}")
    f.meta.setdefault("resolution", resolution)
    return f


def _seed_kwargs(spec) -> dict:
    out = {}
    for k, v in (spec or {}).items():
        if k == "kind":
            out[k] = str(v)
        elif k == "wavenumber":
            out[k] = int(v)
        else:
            out[k] = tuple(number(x) for x in v) if isinstance(v, list) else number(v)
    return out


def _num_tree(v):
    if isinstance(v, list):
        return [_num_tree(x) for x in v]
    return number(v)


def _manufactured(spec, profile, model, resolution, tol, seed):
    shape = (resolution,) * model.dim
    params = _params(spec)
    func = lambda x, y: ANALYTIC_TORUS[spec["expression"]](x, y, model.periods, **params)  # noqa: E731
    q_table, _ = manufactured_forcing(model, func, profile, resolution=shape)
    mesh = np.meshgrid(*torus_axes(model, shape), indexing="ij")
    exact = func(*mesh)
    source = q_table - profile.potential_derivative(exact)
    bump = make_seed(model, shape, seed=seed, **_seed_kwargs(spec.get("seed") or {"amplitude": 0.05}))
    f = relax_to_steady(model, profile, exact + bump, tol=tol, source=source)
    f.meta["solution_error"] = float(np.max(np.abs(f.values - exact)))
    return f


# --- audits ----------------------------------------------------------------------


def tolerance_model(audit: dict) -> ToleranceModel:
    spec = dict(audit.get("tolerance") or {})
    kw = {k: (bool(v) if k == "calibrate" else number(v)) for k, v in spec.items()}
    return ToleranceModel(**kw)


def _barrier_audit(kind, curve: BarrierCurve, profile, tm: ToleranceModel) -> VerificationReport:
    meta = curve.meta
    if kind == "barrier-crosscheck":
        prof = profile.with_range(*curve.range)
        err = modica_crosscheck(prof, curve)
        return _judge(kind, err, None, tm, details={"barrier": curve.summary()})
    if kind == "barrier-residual":
        key = next(k for k in ("residual", "first_integral_residual", "identity_error") if k in meta)
        return _judge(kind, float(meta[key]), None, tm, details={"quantity": key, "barrier": curve.summary()})
    if kind == "sphere-lower-bound":
        margin = float(meta["lower_bound_margin"])
        return _judge(kind, 0.0 - margin, None, tm, details={"barrier": curve.summary()})
    if kind == "monotonicity":
        return _judge(kind, float(meta["monotonicity_max_slope"]), None, tm, details={"barrier": curve.summary()})
    raise ParameterError(f"unknown barrier audit {kind!r}")


def _level_audit(kind, audit, field_, curve, inverse, profile, tm) -> VerificationReport:
    if kind == "two-point":
        return two_point_audit(field_, inverse, tolerance=tm, sample_size=int(audit.get("sample_size", 2048)),
                               seed=int(audit.get("seed", 0)))
    if kind == "gradient":
        return gradient_audit(field_, curve, inverse, tolerance=tm)
    if kind == "modica":
        cu = number(audit["c_u"]) if "c_u" in audit else None
        return modica_audit(field_, profile, c_u=cu, tolerance=tm)
    if kind == "rigidity":
        return rigidity_audit(field_, profile, tolerance=tm)
    if kind == "dirichlet":
        return dirichlet_boundary_audit(field_, inverse, tolerance=tm)
    if kind == "solution-error":
        return _judge(kind, field_.meta["solution_error"], field_.spacing, tm)
    raise ParameterError(f"unknown field audit {kind!r}")


def _residual_order(fields, tm: ToleranceModel) -> VerificationReport:
    """Observed order of the consistency residual of the discrete solutions under refinement."""
    hs = [f.spacing for f in fields]
    res = [float(f.meta.get("consistency_residual", f.residual_norm)) for f in fields]
    order = observed_order(hs, res)
    target = tm.min_order
    defect = target - order if math.isfinite(order) else math.inf
    rep = _judge("residual-order", defect, None, ToleranceModel(floor=0.0, min_order=target),
                 history=list(zip(hs, res)), details={"observed_order": order, "min_order": target})
    if len(fields) < 2:
        rep.verdict = "inconclusive"
    return rep


def _coverage_trend(points) -> VerificationReport:
    """Covered length of the barrier family must grow as ``c`` decreases towards ``c_u``."""
    pairs = sorted((p["curve"].c, p["curve"].meta["covered_length"]) for p in points if p.get("curve") is not None)
    cs = [c for c, _ in pairs]
    lengths = [length for _, length in pairs]
    # pairs are sorted by increasing c, so lengths must be strictly decreasing
    diffs = [lengths[k + 1] - lengths[k] for k in range(len(lengths) - 1)]
    defect = max(diffs) if diffs else math.inf
    rep = _judge("coverage-trend", defect, None, ToleranceModel(floor=0.0),
                 details={"c": cs, "covered_length": lengths})
    if len(pairs) < 2:
        rep.verdict = "inconclusive"
    elif not defect < 0:
        rep.verdict = "fail"
    return rep


# --- running ---------------------------------------------------------------------


@dataclass
class ScenarioResult:
    name: str
    exit_code: int
    report: dict
    out_dir: Path | None = None
    runtime: float = 0.0
    artifacts: list = field(default_factory=list)


def _entry(audit_kind, label, sweep, resolution, report: VerificationReport) -> dict:
    return {"audit": audit_kind, "label": label, "sweep": sweep, "resolution": resolution,
            "report": report.to_dict()}


def _verdict_code(entries) -> int:
    verdicts = {e["report"]["verdict"] for e in entries}
    return EXIT_OK if verdicts <= {"pass"} else EXIT_FAIL


def config_digest(cfg) -> str:
    return hashlib.sha256(json.dumps(cfg, sort_keys=True, default=str).encode()).hexdigest()


def run_scenario(cfg: dict, out_dir=None, resolution_override=None, sweep_only=None,
                 timestamp: str | None = None) -> ScenarioResult:
    """Run a validated config; writes the report bundle under ``out_dir/<name>`` when given."""
    t0 = time.perf_counter()
    name = cfg["name"]
    if sweep_only:
        unknown = [k for k in sweep_only if k not in (cfg.get("sweep") or {})]
        if unknown:
            raise ConfigError(f"{name}: --sweep-only names {unknown} are not sweep keys "
                              f"(available: {sorted(cfg.get('sweep') or {})})")
    if resolution_override:
        bad = [n for n in resolution_override if not (_is_pow2(n) or _is_pow2(n - 1))]
        if bad:
            raise ConfigError(f"{name}: resolution override {bad} is not a power of two")
        cfg = copy.deepcopy(cfg)
        if (cfg.get("field") or {}).get("kind", "none") != "none":
            cfg["field"]["resolutions"] = list(resolution_override)
    bundle = Path(out_dir) / name if out_dir is not None else None
    outputs = {"fields": True, "curves": True, "plots": False, **(cfg.get("outputs") or {})}
    entries, fields_meta, curves_meta, artifacts, errors = [], [], [], [], []
    if cfg.get("kind") == "oracles":
        for oracle in cfg["oracles"]:
            try:
                entries.append(_entry(f"oracle-{oracle}", oracle, {}, None, ORACLES[oracle]()))
            except BarrierBoundError as exc:
                errors.append(_error({"oracle": oracle}, exc))
    else:
        _run_pipeline(cfg, sweep_only, bundle, outputs, entries, fields_meta, curves_meta, artifacts, errors)
    code = EXIT_CONSTRUCTION if errors else _verdict_code(entries)
    report = {
        "spec_version": SPEC_VERSION,
        "scenario": name,
        "description": cfg.get("description", ""),
        "package_version": __version__,
        "config_sha256": config_digest(cfg),
        "timestamp": timestamp or _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        "status": "error" if errors else ("pass" if code == EXIT_OK else "fail"),
        "exit_code": code,
        "errors": errors,
        "results": entries,
        "fields": fields_meta,
        "barriers": curves_meta,
    }
    if bundle is not None:
        artifacts.append(serialize.write_json(bundle / "report.json", report))
        artifacts.append(serialize.write_summary(bundle / "summary.csv", summary_rows(report)))
    return ScenarioResult(name, code, report, bundle, time.perf_counter() - t0, artifacts)


def _error(sweep, exc) -> dict:
    log.info("%s: %s", type(exc).__name__, exc)
    return {"sweep": sweep, "type": type(exc).__name__, "message": str(exc)}


def _run_pipeline(cfg, sweep_only, bundle, outputs, entries, fields_meta, curves_meta, artifacts, errors):
    """Run every sweep point; a construction error aborts only its own point."""
    points_done = []
    audits = cfg["audits"]
    for p_idx, point in enumerate(_sweep_points(cfg, sweep_only)):
        sweep = point.pop("_sweep")
        try:
            curve = _run_point(point, sweep, p_idx, audits, bundle, outputs, entries, fields_meta, curves_meta,
                               artifacts)
        except BarrierBoundError as exc:
            errors.append(_error(sweep, exc))
            continue
        points_done.append({"sweep": sweep, "curve": curve})
    for audit in audits:
        if audit["kind"] == "coverage-trend":
            entries.append(_entry("coverage-trend", audit.get("label", "coverage-trend"), {}, None,
                                  _coverage_trend(points_done)))


def _run_point(point, sweep, p_idx, audits, bundle, outputs, entries, fields_meta, curves_meta, artifacts):
    profile = _build_profile(point["profile"])
    model = _build_model(point["model"])
    bspec = point.get("barrier") or {"kind": "none"}
    fspec = point.get("field") or {"kind": "none"}
    has_field = fspec.get("kind", "none") != "none"
    resolutions = fspec.get("resolutions") if has_field else [None]
    per_audit = {i: [] for i, a in enumerate(audits) if a["kind"] in LEVEL_AUDITS}
    fields, previous, curve = [], None, None
    for level, res in enumerate(resolutions):
        tag = f"p{p_idx:03d}" + (f"_n{res}" if res is not None else "")
        if fspec.get("kind") == "lifted-barrier":
            curve = build_barrier(bspec, profile, model, None, n_points=res)
            f = build_field(fspec, profile, model, res, previous, curve)
        else:
            f = build_field(fspec, profile, model, res, previous, None) if has_field else None
            curve = build_barrier(bspec, profile, model, f)
        inverse = invert_barrier(curve) if curve is not None else None
        if f is not None:
            fields.append(f)
            fields_meta.append({"sweep": sweep, "resolution": res, **serialize.field_metadata(f)})
            if bundle is not None and outputs["fields"]:
                artifacts.extend(serialize.write_field(f, bundle / "fields" / tag))
        if curve is not None:
            curves_meta.append({"sweep": sweep, "resolution": res, **serialize.curve_metadata(curve)})
            if bundle is not None and outputs["curves"]:
                artifacts.extend(serialize.write_curve(curve, bundle / "curves" / tag))
        for i, audit in enumerate(audits):
            kind = audit["kind"]
            label = audit.get("label", kind)
            tm = tolerance_model(audit)
            if kind in LEVEL_AUDITS:
                rep = _level_audit(kind, audit, f, curve, inverse, profile, tm)
                per_audit[i].append(rep)
                entries.append(_entry(kind, label, sweep, res, rep))
                if (bundle is not None and outputs["plots"] and kind == "two-point"
                        and inverse is not None):
                    _plots(f, inverse, rep, bundle / "plots" / tag, artifacts)
            elif kind in BARRIER_AUDITS and level == len(resolutions) - 1:
                entries.append(_entry(kind, label, sweep, res, _barrier_audit(kind, curve, profile, tm)))
        previous = f
    for i, reps in per_audit.items():
        if len(reps) > 1:
            audit = audits[i]
            combined = combine_refinement(reps, tolerance_model(audit))
            entries.append(_entry(audit["kind"], audit.get("label", audit["kind"]), sweep, "refined", combined))
    for audit in audits:
        if audit["kind"] == "residual-order":
            entries.append(_entry("residual-order", audit.get("label", "residual-order"), sweep, "refined",
                                  _residual_order(fields, tolerance_model(audit))))
    return curve


def _plots(field_, inverse, rep, stem, artifacts):
    paths = [serialize.plot_field(field_, inverse, stem.with_name(stem.name + "_profile.svg"))]
    x = rep.witness.get("x")
    if x is not None:
        pts = field_.points()
        pts = pts[:, None] if pts.ndim == 1 else pts
        k = int(np.argmin(np.sum((pts - np.atleast_1d(x)) ** 2, axis=1)))
        paths.append(serialize.plot_z_slice(field_, inverse, k, stem.with_name(stem.name + "_z.svg")))
    artifacts.extend(p for p in paths if p is not None)


# --- summaries -----------------------------------------------------------------------


def summary_rows(report: dict, scenario: str | None = None) -> list[dict]:
    rows = []
    for e in report.get("results", []):
        r = e["report"]
        rows.append({
            "scenario": scenario or report["scenario"],
            "audit": e.get("label", e["audit"]),
            "resolution": "" if e["resolution"] is None else e["resolution"],
            "sweep": ";".join(f"{k}={v}" for k, v in sorted(e["sweep"].items())),
            "max_defect": r["max_defect"],
            "tolerance": r["tolerance"],
            "verdict": r["verdict"],
        })
    for err in report.get("errors", []):
        rows.append({"scenario": scenario or report["scenario"], "audit": "construction", "resolution": "",
                     "sweep": ";".join(f"{k}={v}" for k, v in sorted(err["sweep"].items())),
                     "max_defect": "", "tolerance": "", "verdict": "error"})
    return rows


def merge_reports(paths) -> tuple[list[dict], int]:
    """Summary rows of several report bundles; duplicate scenario names get ``#2``, ``#3`` suffixes.

    Returns ``(rows, skipped)``; unreadable reports are skipped with a warning.
    """
    rows, seen, skipped = [], {}, 0
    for p in paths:
        path = Path(p)
        if path.is_dir():
            path = path / "report.json"
        try:
            report = json.loads(path.read_text(encoding="utf-8"))
            name = report["scenario"]
            report["results"]
        except (OSError, ValueError, KeyError, TypeError) as exc:
            log.warning("skipping unreadable report %s (%s)", p, exc)
            skipped += 1
            continue
        seen[name] = seen.get(name, 0) + 1
        label = name if seen[name] == 1 else f"{name}#{seen[name]}"
        rows.extend(summary_rows(report, label))
    return rows, skipped
