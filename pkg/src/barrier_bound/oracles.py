"""Independent cross-checks between closed forms and the numerical machinery.

Each oracle returns a :class:`~barrier_bound.verify.VerificationReport` whose
defect is an absolute (or stated relative) discrepancy and whose tolerance is
the fixed acceptance bound of that check.
"""
from __future__ import annotations

import numpy as np
from scipy.integrate import solve_ivp

from .geometry import Circle, FlatTorus, LpNorm, dual_norm, warp_factor
from .pde import make_seed, relax_to_steady, solve_symmetric
from .profiles import build_profile, coefficients_from_profile, eval_K, invert_K
from .verify import ToleranceModel, _judge

INVERT_K_TOL = 1e-10
DUAL_NORM_TOL = 1e-8
THIN_TORUS_TOL = 1e-5
WARP_TOL = 1e-14


def _report(kind, defect, tol, **kw):
    return _judge(kind, float(defect), None, ToleranceModel(floor=tol), **kw)


def invert_k_oracle(samples: int = 200, seed: int = 0):
    """Relative error of the bisection ``K^{-1}`` against closed forms and of ``K^{-1}(K(s))``.

    Linear and p-Laplace profiles carry an analytic inverse, which the
    numerical root finder is checked against; the polynomial profile has none
    and is checked by the round trip only.
    """
    rng = np.random.default_rng(seed)
    s = np.concatenate([[0.0, 1e-8, 1.0], 10.0 ** rng.uniform(-6, 3, samples)])
    profiles = [build_profile("linear"), build_profile({"kind": "p-laplace", "p": 3.0}),
                build_profile({"kind": "p-laplace", "p": 1.5}),
                build_profile({"kind": "polynomial", "coefficients": [0.0, 1.0, 0.25]})]
    worst, where = 0.0, {}
    for prof in profiles:
        t = eval_K(prof, s)
        pairs = [("roundtrip", invert_K(prof, t, method="bisect"), s)]
        if prof.K_inverse is not None:
            pairs.append(("closed-form", invert_K(prof, t, method="bisect"), invert_K(prof, t)))
        for label, got, want in pairs:
            err = np.abs(got - want) / np.maximum(1.0, want)
            k = int(np.argmax(err))
            if err[k] > worst:
                worst, where = float(err[k]), {"profile": prof.name, "check": label, "s": float(s[k])}
    return _report("oracle-invert-K", worst, INVERT_K_TOL, witness=where,
                   details={"profiles": [p.name for p in profiles], "samples": int(s.size)})


def dual_norm_oracle(p: float = 4.0 / 3.0, samples: int = 40, seed: int = 1):
    """Numerical dual of an ``l^p`` norm against the Hoelder conjugate ``l^q`` norm."""
    rng = np.random.default_rng(seed)
    H = LpNorm(p, 2)
    q = p / (p - 1.0)
    worst, where = 0.0, {}
    for v in rng.normal(size=(samples, 2)):
        exact = float(np.sum(np.abs(v) ** q) ** (1.0 / q))
        err = abs(dual_norm(H, v) - exact) / exact
        if err > worst:
            worst, where = err, {"v": v.tolist()}
    return _report("oracle-dual-norm", worst, DUAL_NORM_TOL, witness=where,
                   details={"p": p, "q": q, "samples": samples, "relative": True})


def thin_torus_oracle(length: float = 3.0 * np.pi, width: float = 0.1, nx: int = 1024):
    """A 2-D relaxation on a thin torus against the 1-D periodic reduction.

    Allen-Cahn stripe on ``length x width``; the 1-D reference is the even
    periodic solution on a circle of the same length, integrated with a tight
    adaptive Runge-Kutta from the shooting datum.
    """
    prof = build_profile("linear", "allen-cahn-well")
    ref = solve_symmetric(Circle(length / (2.0 * np.pi)), coefficients_from_profile(prof),
                          {"type": "neumann", "bracket": [0.5, 0.99]}, n_points=4097)
    tor = FlatTorus((length, width))
    field_ = relax_to_steady(tor, prof, make_seed(tor, (nx, 4), "stripe", 0.8), tol=1e-11)
    x = field_.coords[0]
    v0 = ref.meta["initial_state"][0]
    sol = solve_ivp(lambda z, y: [y[1], y[0] ** 3 - y[0]], (0.0, length), [v0, 0.0],
                    rtol=1e-12, atol=1e-12, dense_output=True)
    err = np.abs(field_.values - sol.sol(x)[0][:, None])
    k = np.unravel_index(int(np.argmax(err)), err.shape)
    return _report("oracle-thin-torus", float(err[k]), THIN_TORUS_TOL,
                   witness={"x": float(x[k[0]])},
                   details={"resolution": [nx, 4], "u0": float(v0), "method": field_.meta.get("method"),
                            "field_residual": field_.residual_norm})


def warp_residual_oracle(kappas=(-4.0, -1.0, -0.25), z0: float = 0.0, samples: int = 1001):
    """``|rho'' + kappa rho|`` of the closed-form warp over ``[0, 1]``."""
    z = np.linspace(0.0, 1.0, samples)
    worst, where = 0.0, {}
    for kappa in kappas:
        res = np.abs(warp_factor(kappa, z0).residual(z))
        k = int(np.argmax(res))
        if res[k] > worst:
            worst, where = float(res[k]), {"kappa": kappa, "z": float(z[k])}
    return _report("oracle-warp-residual", worst, WARP_TOL, witness=where, details={"kappas": list(kappas)})


ORACLES = {
    "invert-K": invert_k_oracle,
    "dual-norm": dual_norm_oracle,
    "thin-torus": thin_torus_oracle,
    "warp-residual": warp_residual_oracle,
}
