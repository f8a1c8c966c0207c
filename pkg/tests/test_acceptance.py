"""Acceptance suite: one check per criterion, each printing a PASS/FAIL line.

Run under pytest (lines are collected into the terminal summary) or
directly with ``python tests/test_acceptance.py``.
"""

import functools
import math
import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from levspin import magnetolev as ml, models  # noqa: E402
from levspin.dynamics import displacement_path, gate_time, geometric_phase  # noqa: E402
from levspin.scenarios import run_scenario  # noqa: E402

# pinned tolerances
LAMBDA_TARGET_HZ, LAMBDA_REL = 2900.0, 0.10
ENHANCE_R, ENHANCE_N, ENHANCE_REL = (0.5, 1.0, 2.0, 3.0), 100, 1e-6
CONTRAST_MIN, FLAT_MAX = 0.5, 0.05
PHASE_REL, CLOSURE_REL = 1e-8, 1e-10
CAT_TARGETS, CAT_ABS, FRAME_GAP = {0.001: 0.997, 0.01: 0.983, 0.05: 0.928}, 0.005, 0.01
TRUTH_PHASE_ABS, GATE_FID_MIN = 1e-6, 0.999
ISING_FACTOR, ISING_ETAS = 5.0, (0.05, 0.1)
TRACE_TOL, EIG_MIN = 1e-8, -1e-6
STIFF_REL = 1e-6
G_CU_TARGET_HZ, G_CU_FACTOR = 10e6, 3.0
LEFF_TARGET_HZ, LEFF_FACTOR = 1.2e6, 2.0

try:
    from conftest import ACCEPTANCE_LINES
except ImportError:
    ACCEPTANCE_LINES = []


@functools.lru_cache(maxsize=None)
def scenario(sid):
    return run_scenario(sid, ml.preset("sec5"))


def report(n, ok, detail):
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'} - {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def within_factor(x, target, factor):
    return target / factor <= x <= target * factor


def test_criterion_01_coupling_magnitude():
    p = ml.preset("sec5")
    lam = ml.spin_magnet_coupling(p).hz
    ok = p.d == pytest.approx(2 * p.a) and abs(lam / LAMBDA_TARGET_HZ - 1) <= LAMBDA_REL
    report(1, ok, f"lambda/2pi = {lam:.1f} Hz at d = 2a (target {LAMBDA_TARGET_HZ:g} Hz +/- {LAMBDA_REL:.0%})")


def test_criterion_02_enhancement_law():
    worst = 0.0
    for r in ENHANCE_R:
        fr = models.frame_from_r(r, 1.0, delta_m=10.0)
        got = models.squeezed_couplings(fr, ENHANCE_N)["Lambda_eff"]
        worst = max(worst, abs(got / (math.exp(r) / 2) - 1))
    report(2, worst < ENHANCE_REL, f"max relative error of extracted Lambda_eff vs Lambda e^r/2 = {worst:.2e} "
                                   f"(tol {ENHANCE_REL:g}, N={ENHANCE_N})")


def test_criterion_03_rabi_contrast():
    m = scenario("fig4").metrics
    c3, c0 = m["contrast_r=3"], m["contrast_r=0"]
    ok = c3 >= CONTRAST_MIN and c0 <= FLAT_MAX
    report(3, ok, f"peak-to-peak excited population {c3:.5f} at r=3 (need >= {CONTRAST_MIN}), "
                  f"{c0:.4f} at r=0 (need <= {FLAT_MAX})")


def test_criterion_04_geometric_phase():
    worst_phase = worst_close = 0.0
    for r in (0.0, 0.5, 1.0, 1.5, 3.0):
        fr = models.frame_from_r(r, 1.0, delta_m=10.0)
        tau = gate_time(fr)
        path = displacement_path(fr, np.linspace(0, tau, 401))
        phi = geometric_phase(path)
        worst_phase = max(worst_phase, abs(phi / (2 * math.pi * fr.eta**2) - 1))
        worst_close = max(worst_close, abs(path.alpha[-1]) / fr.eta)
    ok = worst_phase < PHASE_REL and worst_close < CLOSURE_REL and scenario("fig5").flags["c4_geometric_phase"]
    report(4, ok, f"phase relative error {worst_phase:.1e} (tol {PHASE_REL:g}), "
                  f"closure {worst_close:.1e} eta (tol {CLOSURE_REL:g})")


def test_criterion_05_cat_fidelity():
    m = scenario("fig6").metrics
    parts, ok = [], True
    for g, target in CAT_TARGETS.items():
        f = m[f"fidelity_RO_gamma={g:g}"]
        ok &= abs(f - target) <= CAT_ABS
        parts.append(f"F({g:g}) = {f:.4f} vs {target}")
    gap = m["ro_full_gap"]
    ok &= gap < FRAME_GAP
    report(5, ok, ", ".join(parts) + f"; frame gap {gap:.4f} (tol {FRAME_GAP})")


def test_criterion_06_gate():
    m = scenario("fig7").metrics
    err, fid = m["truth_table_phase_err"], m["fidelity_top_r"]
    ok = err < TRUTH_PHASE_ABS and fid > GATE_FID_MIN
    report(6, ok, f"truth-table phase error {err:.1e} rad (tol {TRUTH_PHASE_ABS:g}); "
                  f"open-system fidelity {fid:.6f} at r=3 (need > {GATE_FID_MIN})")


def test_criterion_07_ising_reduction():
    m = scenario("fig7").metrics
    parts, ok = [], True
    for eta in ISING_ETAS:
        dev = m[f"sw_deviation_eta={eta:g}"]
        ok &= dev < ISING_FACTOR * eta**2
        parts.append(f"eta={eta:g}: {dev / eta**2:.2f} eta^2")
    report(7, ok, "sup population gap " + ", ".join(parts) + f" (limit {ISING_FACTOR:g} eta^2)")


def test_criterion_08_trace_and_positivity():
    trace = max(scenario(s).metrics["max_trace_deviation"] for s in ("fig4", "fig6", "fig7"))
    eig = min(scenario(s).metrics["min_eigenvalue"] for s in ("fig4", "fig6", "fig7"))
    ok = trace < TRACE_TOL and eig >= EIG_MIN
    report(8, ok, f"max |Tr rho - 1| = {trace:.1e} (tol {TRACE_TOL:g}), min eigenvalue {eig:.1e} "
                  f"(floor {EIG_MIN:g})")


def test_criterion_09_magnetostatics():
    rel = {}
    for name in ml.PRESETS:
        p = ml.preset(name)
        rel[name] = abs(ml.z_line_stiffness(p) / ml.trap_summary(p).k_ma - 1)
    orient = scenario("fig2").flags["c9_orientation_minimum"]
    ok = max(rel.values()) < STIFF_REL and orient
    report(9, ok, "stiffness formula vs finite-difference curvature: "
           + ", ".join(f"{k} rel err {v:.3g}" for k, v in rel.items())
           + f" (tol {STIFF_REL:g}); orientation minimum at cooling orientation: {orient}")


def test_criterion_10_feasibility():
    m = scenario("fig8").metrics
    g, leff = m["g_cu_hz_probe"], m["Lambda_eff_hz_probe"]
    ok = within_factor(g, G_CU_TARGET_HZ, G_CU_FACTOR) and within_factor(leff, LEFF_TARGET_HZ, LEFF_FACTOR)
    report(10, ok, f"g_cu/2pi = {g:.3g} Hz ({g / G_CU_TARGET_HZ:.3f}x target, factor {G_CU_FACTOR:g} allowed); "
                   f"Lambda_eff/2pi = {leff:.3g} Hz ({leff / LEFF_TARGET_HZ:.3f}x, factor {LEFF_FACTOR:g})")


if __name__ == "__main__":
    failures = 0
    for name, fn in sorted(globals().items()):
        if name.startswith("test_criterion_"):
            try:
                fn()
            except AssertionError:
                failures += 1
    sys.exit(1 if failures else 0)
