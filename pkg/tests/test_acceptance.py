"""Acceptance suite: one printed pass/fail line per criterion.

Each criterion runs the matching built-in scenario through the scenario runner
(the same path as ``barrier-bound run``) and checks the report against the
stated tolerance and runtime budget.
"""
from __future__ import annotations

import math


from barrier_bound import scenario as sc
from barrier_bound.profiles import c_sup

_RUNS: dict = {}


def run(name):
    if name not in _RUNS:
        _RUNS[name] = sc.run_scenario(sc.load_config(name))
    return _RUNS[name]


def entries(res, audit, resolution="any"):
    out = [e for e in res.report["results"] if e["audit"] == audit]
    if resolution != "any":
        out = [e for e in out if e["resolution"] == resolution]
    return out


def defect(e):
    return float(e["report"]["max_defect"])


def record(log, number, title, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] {number}. {title}: {detail}"
    print(line)
    log.append(line)
    assert ok, line


def test_1_modica_equality_on_kink(acceptance_log):
    res = run("allen-cahn-kink-1d")
    worst = max(abs(defect(e)) for e in entries(res, "modica"))
    ok = res.exit_code == 0 and worst <= 1e-9 and res.runtime < 1.0
    record(acceptance_log, 1, "Modica equality, 1-D kink", ok,
           f"max |P| = {worst:.2e} (<= 1e-9), {res.runtime:.2f} s (< 1 s)")


def test_2_two_point_sharpness_warped(acceptance_log):
    worst_all, worst_line, runtime, ok = -math.inf, 0.0, 0.0, True
    for name in ("warped-sharpness-n2", "warped-sharpness-n3"):
        res = run(name)
        runtime += res.runtime
        for e in entries(res, "two-point"):
            worst_all = max(worst_all, defect(e))
            worst_line = max(worst_line, float(e["report"]["details"]["forward_pair_max_abs"]))
        ok &= res.exit_code == 0
    ok &= worst_all <= 1e-9 and worst_line <= 1e-9 and runtime < 5.0
    record(acceptance_log, 2, "two-point sharpness, warped n=2,3", ok,
           f"max Z = {worst_all:.2e}, max |Z| along s = {worst_line:.2e} (<= 1e-9), {runtime:.2f} s (< 5 s)")


def test_3_strict_estimate_on_torus(acceptance_log):
    res = run("torus-stripe")
    levels = [64, 128, 256]
    gaps = {k: max(defect(e) for e in entries(res, k) if e["resolution"] in levels) for k in ("two-point", "gradient")}
    have = {e["resolution"] for e in entries(res, "gradient")}
    order = float(entries(res, "residual-order")[0]["report"]["details"]["observed_order"])
    ok = (set(levels) <= have and gaps["two-point"] < 0 and gaps["gradient"] < 0 and order >= 1.8
          and res.runtime < 120.0)
    record(acceptance_log, 3, "strict estimate, torus stripe 64/128/256", ok,
           f"max Z = {gaps['two-point']:.2e} < 0, max gradient defect = {gaps['gradient']:.2e} < 0, "
           f"residual order {order:.3f} (>= 1.8), {res.runtime:.1f} s (< 120 s)")


def test_4_barrier_cross_validation(acceptance_log):
    res = run("modica-crossval")
    cross = entries(res, "barrier-crosscheck")
    combos = {(e["sweep"]["profile.phi.p"], e["sweep"]["profile.potential"]) for e in cross}
    worst = max(defect(e) for e in cross)
    ok = res.exit_code == 0 and len(combos) == 4 and worst <= 1e-6 and res.runtime < 5.0
    record(acceptance_log, 4, "Modica quadrature vs ODE, p in {2,3} x 2 potentials", ok,
           f"sup-norm gap {worst:.2e} (<= 1e-6) over {len(combos)} cases, {res.runtime:.2f} s (< 5 s)")


def test_5_sphere_family_lower_bound(acceptance_log):
    res = run("sphere-family")
    bound = entries(res, "sphere-lower-bound")
    margin = min(-defect(e) for e in bound) + 0.0
    trend = entries(res, "coverage-trend")[0]["report"]
    lengths = trend["details"]["covered_length"]
    ok = (res.exit_code == 0 and len(bound) == 3 and margin >= -1e-10 and trend["verdict"] == "pass"
          and res.runtime < 5.0)
    record(acceptance_log, 5, "sphere-family lower bound and coverage trend", ok,
           f"min(phi' - sqrt(K^-1(c-c_u))) = {margin:.2e} (>= -1e-10), covered lengths "
           f"{', '.join(f'{v:.3f}' for v in lengths)} grow as c decreases, {res.runtime:.2f} s (< 5 s)")


def test_6_rigidity_on_suite_fields(acceptance_log):
    checked, worst, failed = 0, 0.0, []
    for name in sc.builtin_names():
        res = run(name)
        for e in entries(res, "rigidity"):
            if e["report"]["verdict"] != "pass":
                failed.append(f"{name}:{e['resolution']}")
        cfg = sc.load_config(name)
        for meta in res.report["fields"]:
            lo, hi = meta["range"]
            if not meta["certified"] or hi - lo <= meta["tolerance"]:
                continue
            point = {k: v for k, v in cfg.items() if k != "sweep"}
            for key, value in meta["sweep"].items():
                sc._set(point, key, value)
            prof = sc._build_profile(point["profile"])
            gap = abs(c_sup(prof, (lo, hi)) - max(float(prof.potential(lo)), float(prof.potential(hi))))
            slack = max((sc.tolerance_model(a).threshold(meta["spacing"]) for a in cfg["audits"]
                         if a["kind"] == "rigidity"), default=sc.ToleranceModel().floor)
            if gap > slack:
                failed.append(f"{name}:{meta['resolution']}")
            worst = max(worst, gap)
            checked += 1
    ok = not failed and checked > 0
    record(acceptance_log, 6, "rigidity c_u = max(Q(inf u), Q(sup u))", ok,
           f"{checked} certified nonconstant fields, max gap {worst:.2e}"
           + (f", failures {failed}" if failed else ""))


def test_7_anisotropic_audit(acceptance_log):
    res = run("minkowski-stripe")
    modica = entries(res, "modica", 128)[0]["report"]
    tp = entries(res, "two-point", 128)[0]["report"]
    ok = (res.exit_code == 0 and modica["max_defect"] <= modica["tolerance"] and tp["verdict"] == "pass"
          and res.runtime < 120.0)
    record(acceptance_log, 7, "anisotropic l^4 / l^(4/3) torus at 128^2", ok,
           f"Modica defect {modica['max_defect']:.2e} (<= C h^2 = {modica['tolerance']:.2e}), "
           f"max Z = {tp['max_defect']:.2e}, {res.runtime:.1f} s (< 120 s)")


def test_8_dirichlet_ball(acceptance_log):
    res = run("dirichlet-ball")
    rep = entries(res, "dirichlet")[0]["report"]
    ok = res.exit_code == 0 and rep["max_defect"] <= rep["tolerance"] and res.runtime < 5.0
    record(acceptance_log, 8, "Dirichlet ball, n=3", ok,
           f"max Z = {rep['max_defect']:.2e} (<= {rep['tolerance']:.0e}), {res.runtime:.2f} s (< 5 s)")


def test_9_oracle_equivalences(acceptance_log):
    res = run("oracle-checks")
    parts, ok = [], res.exit_code == 0
    for e in res.report["results"]:
        r = e["report"]
        ok &= r["verdict"] == "pass"
        parts.append(f"{e['label']} {r['max_defect']:.1e}/{r['tolerance']:.0e}")
    ok &= len(parts) == 4 and res.runtime < 10.0
    record(acceptance_log, 9, "oracle equivalences", ok, f"{'; '.join(parts)}, {res.runtime:.2f} s (< 10 s)")
