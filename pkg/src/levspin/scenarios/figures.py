"""Figure scenarios.

Quantum scenarios work in units of the bare coupling (Lambda = 1, time in
1/Lambda, rates in Lambda). Only ``fig2`` and ``fig8`` touch SI values.
Every scenario takes (physical, settings, **options); unknown options are
rejected so that config typos fail loudly.
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict

import numpy as np
from scipy import optimize

from .. import magnetolev as ml
from .. import models
from ..dynamics import (CollapseChannel, bare_loop, cat_displacement, cat_target, displacement_path, enhancement_report,
                        evolve_master, gate_channels, gate_unitary, geometric_phase, run_gate, truth_table,
                        wigner, wigner_grid, x_basis_states)
from ..errors import ConfigError
from ..qops import (DensityMatrix, basis, embed, fock_annihilation, ket_kron, partial_trace,
                    spin_half_paulis)
from .convergence import SimulationSettings, converge, initial_truncation
from .result import ScenarioResult, Table

log = logging.getLogger("levspin.scenarios")

TRACE_TOL = 1e-8
POSITIVITY_TOL = 1e-6

DEFAULTS: dict[str, dict] = {
    "fig2": {
        "preset": "fig2",
        "points": 61,
        "zy_range": [-1.5, 1.5],
        "x_range": [1.5, 4.5],
        "zline_half_width": 0.5,
        "zline_points": 201,
        "fit_half_width": 0.1,
        "fit_tol": 1e-3,
        "stiffness_tol": 1e-6,
    },
    "fig3": {
        "alpha_points": 61,
        "B0_points": 61,
        "B0_max": 0.1,
    },
    "fig4": {
        "Delta_m": 10.0,
        "r_values": [0.0, 3.0],
        "gamma": 0.01,
        "kappa": 0.01,
        "t_final": 20.0,
        "samples": 2001,
        "min_extrema": 3,
        "contrast_min": 0.5,
        "flat_max": 0.05,
        "energy_tol": 1e-6,
        "extract_r": [0.5, 1.0, 2.0, 3.0],
        "extract_N": 100,
        "extract_tol": 1e-6,
        "curve_points": 61,
        "curve_r_max": 3.0,
    },
    "fig5": {
        "delta_m": 10.0,
        "loop_r": [0.0, 0.5, 1.0, 1.5],
        "loop_samples": 401,
        "curve_points": 61,
        "curve_r_max": 3.0,
        "inset_points": 100,
        "phase_rtol": 1e-8,
        "closure_tol": 1e-10,
    },
    "fig6": {
        "delta_m": 21.0,
        "r_max": 1.25,
        "t_final": 4.5,
        "dt": 0.05,
        "gammas": [0.001, 0.01, 0.05],
        "kappa": None,
        "snapshots": [0.0, 1.5, 3.0, 4.5],
        "wigner_points": 121,
        "fidelity_targets": [0.997, 0.983, 0.928],
        "fidelity_tol": 0.005,
        "gap_tol": 0.01,
        "separation_widths": 4.0,
    },
    "fig7": {
        "r_values": [0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0],
        "Delta_factor": 4.0,
        "kappa": 0.01,
        "gamma": 0.01,
        "initial": "+-",
        "t_final_factor": 1.25,
        "samples": 201,
        "phase_tol": 1e-6,
        "infidelity_max": 1e-3,
        "sw_etas": [0.05, 0.1],
        "sw_r": 1.0,
        "sw_samples": 201,
        "sw_factor": 5.0,
        "sw_initial": ["uu", "ud"],
    },
    "fig8": {
        "d_cu_range": [0.1e-6, 1.0e-6],
        "d_cu_points": 91,
        "d_nv_range": [0.3e-6, 1.0e-6],
        "d_nv_points": 71,
        "r_max": 5.0,
        "r_points": 51,
        "probe_distance": 0.3e-6,
        "probe_r": 5.0,
        "lambda_target_hz": 2.9e3,
        "lambda_rel_tol": 0.1,
        "g_target_hz": 10e6,
        "g_factor": 3.0,
        "Lambda_target_hz": 1.2e6,
        "Lambda_factor": 2.0,
    },
}


def merge_options(scenario: str, options: dict) -> dict:
    base = DEFAULTS[scenario]
    unknown = sorted(set(options) - set(base))
    if unknown:
        raise ConfigError(f"unknown option(s) for scenario {scenario}: {', '.join(unknown)}; "
                          f"allowed: {', '.join(sorted(base))}")
    merged = dict(base)
    merged.update(options)
    return merged


def _record(scenario, physical, settings, opts) -> dict:
    return {"scenario": scenario, "options": opts, "settings": settings.as_dict(),
            "physical": None if physical is None else asdict(physical)}


def _integrity_flag(res: ScenarioResult, trajs, name="c8_trace_positivity"):
    dev = max((t.max_trace_deviation for t in trajs), default=0.0)
    eig = min((t.min_eig for t in trajs), default=0.0)
    res.metrics["max_trace_deviation"] = dev
    res.metrics["min_eigenvalue"] = eig
    res.flag(name, dev < TRACE_TOL and eig >= -POSITIVITY_TOL,
             f"|Tr rho - 1| < {TRACE_TOL:g} and min eigenvalue >= -{POSITIVITY_TOL:g}")


def _convergence_flag(res: ScenarioResult):
    ok = all(rep["satisfied"] for rep in res.convergence.values())
    res.flag("truncation_converged", ok, "observable shift < simulation.convergence_tol between N and N + n_step")


def _local_extrema(y: np.ndarray) -> int:
    d = np.diff(y)
    d = d[d != 0]
    return int(np.sum(np.sign(d[1:]) != np.sign(d[:-1])))


# -- potential maps -----------------------------------------------------------------

def fig2_potential(physical=None, settings: SimulationSettings | None = None, **options) -> ScenarioResult:
    """Levitation potential on the zy, zx and theta-phi planes and along z, plus the stiffness oracle."""
    settings = settings or SimulationSettings()
    opts = merge_options("fig2", options)
    params = ml.preset(opts["preset"])
    res = ScenarioResult("fig2", _record("fig2", params, settings, opts))
    n = opts["points"]
    yz = np.linspace(*opts["zy_range"], n)
    xs = np.linspace(*opts["x_range"], n)
    th = np.linspace(0.0, math.pi, n)
    ph = np.linspace(0.0, 2 * math.pi, n)
    zl = np.linspace(-opts["zline_half_width"], opts["zline_half_width"], opts["zline_points"])

    units = {"z_s": "a", "y_s": "a", "x_s": "a", "theta": "rad", "phi": "rad"}
    maps = {}
    for plane, grid in (("zy", (yz, yz)), ("zx", (yz, xs)), ("thetaphi", (th, ph)), ("z-line", zl)):
        pm = ml.potential_map(params, plane, grid)
        maps[plane] = pm
        t = Table(plane.replace("-", "_"))
        for k, v in pm.columns().items():
            t.add("u_s" if k == "u_s" else k, "U_s" if k == "u_s" else units.get(k, "1"), v)
        res.tables.append(t)

    # y -> -y symmetry of the zy map
    zy = maps["zy"].values
    sym = float(np.nanmax(np.abs(zy - zy[::-1, :])))
    res.metrics["zy_mirror_asymmetry"] = sym
    res.flag("fig2_y_symmetry", sym == 0.0, "u_s(z, y) == u_s(z, -y) exactly")

    # theta-phi minimum at the cooling orientation
    tp = maps["thetaphi"]
    u_cool = ml.dimensionless_potential(params, (params.h_eq / params.a, 0.0, 0.0),
                                        params.theta_cool, params.phi_cool)
    grid_min = float(np.nanmin(tp.values))
    scale = float(np.nanmax(tp.values) - grid_min)
    h = params.h_eq / params.a
    # continuous refinement from the best grid cell away from the theta = 0 pole
    i, j = np.unravel_index(np.nanargmin(np.where(tp.flagged, np.inf, tp.values)), tp.values.shape)
    start = np.array([max(tp.x[j], 0.05), tp.y[i]])
    fit = optimize.minimize(lambda v: ml.dimensionless_potential(params, (h, 0.0, 0.0), v[0], v[1]),
                            start, method="Nelder-Mead", options={"xatol": 1e-9, "fatol": 1e-15})
    res.metrics.update(u_at_cool_orientation=u_cool, thetaphi_grid_min=grid_min,
                       thetaphi_refined_theta=float(fit.x[0]), thetaphi_refined_u=float(fit.fun))
    min_ok = (u_cool - grid_min <= 1e-12 * max(scale, 1e-300)) and abs(fit.x[0] - params.theta_cool) < 1e-3 \
        and fit.fun >= u_cool - 1e-12 * max(scale, 1e-300)
    res.flag("c9_orientation_minimum", min_ok, "theta-phi minimum at (theta_cool, phi_cool)")

    # quadratic fit of the z-line near the equilibrium
    zc = maps["z-line"].x
    u = maps["z-line"].values[0]
    win = np.abs(zc) <= opts["fit_half_width"] + 1e-12
    coef = np.polyfit(zc[win], u[win], 2)
    resid = u[win] - np.polyval(coef, zc[win])
    rel = float(np.max(np.abs(resid)) / max(np.ptp(u[win]), 1e-300))
    res.metrics["zline_parabolic_residual"] = rel
    res.flag("fig2_zline_parabolic", rel < opts["fit_tol"], f"relative parabolic residual < {opts['fit_tol']:g}")

    # stiffness formula vs finite-difference curvature, both presets
    rows = []
    for name in ml.PRESETS:
        p = ml.preset(name)
        k = ml.trap_summary(p).k_ma
        k_fd = ml.z_line_stiffness(p)
        rows.append((name, k, k_fd, abs(k_fd / k - 1)))
    t = Table("stiffness")
    t.add("preset", "-", [r[0] for r in rows]).add("k_ma", "N/m", [r[1] for r in rows])
    t.add("k_fd", "N/m", [r[2] for r in rows]).add("rel_err", "1", [r[3] for r in rows])
    res.tables.append(t)
    worst = max(r[3] for r in rows)
    res.metrics["stiffness_rel_err"] = worst
    res.flag("c9_stiffness_oracle", worst < opts["stiffness_tol"],
             f"closed-form k_ma vs finite-difference curvature within {opts['stiffness_tol']:g} relative")
    s = ml.trap_summary(params)
    res.metrics.update(k_ma=s.k_ma, f_ma=s.f_ma, z0=s.z0)
    return res


# -- coupling map -------------------------------------------------------------------

def fig3_coupling_map(physical=None, settings: SimulationSettings | None = None, **options) -> ScenarioResult:
    """Spin-phonon coupling Lambda over the dressing angle alpha and bias field B_0."""
    settings = settings or SimulationSettings()
    opts = merge_options("fig3", options)
    params = physical or ml.preset("sec5")
    res = ScenarioResult("fig3", _record("fig3", params, settings, opts))
    lam = float(ml.spin_magnet_coupling(params))
    alphas = np.linspace(0.0, math.pi / 2, opts["alpha_points"])
    B0s = np.linspace(0.0, opts["B0_max"], opts["B0_points"])
    L = models.coupling_map(lam, alphas, B0s, params.D, params.gamma_e)
    A, B = np.meshgrid(alphas, B0s)
    t = Table("coupling_map")
    t.add("alpha", "rad", A.ravel()).add("B_0", "T", B.ravel())
    t.add("Lambda/2pi", "Hz", L.ravel() / (2 * math.pi)).add("Lambda/lambda", "1", L.ravel() / lam)
    res.tables.append(t)
    d_alpha = np.diff(L, axis=1)
    d_B = np.diff(L, axis=0)
    tol = 1e-12 * lam
    res.flag("fig3_monotone", bool(np.all(d_alpha <= tol) and np.all(d_B <= tol)),
             "Lambda non-increasing in alpha and in B_0")
    res.metrics.update(lambda_hz=lam / (2 * math.pi), Lambda_00_over_lambda=float(L[0, 0] / lam),
                       Lambda_max_at_right_angle=float(np.max(np.abs(L[:, -1])) / lam))
    res.flag("fig3_corner_values", abs(L[0, 0] / lam - 1) < 1e-12 and np.max(np.abs(L[:, -1])) < 1e-12 * lam,
             "Lambda(0, 0) = lambda and Lambda(pi/2, B_0) = 0")
    return res


# -- single-NV Rabi dynamics ------------------------------------------------------

def _single_ops(N):
    lay = models.single_layout(N)
    P = spin_half_paulis("spin")
    return lay, embed(P.sz, lay, "spin"), embed(fock_annihilation(N), lay, "fock")


def _rabi_run(frame, N, gamma, kappa, grid, settings, energy=False):
    lay, sz, b = _single_ops(N)
    H = models.build_H_RO(frame, N)
    rho0 = DensityMatrix.from_ket(ket_kron([1.0, 0.0], basis(0, N)), lay)
    e_ops = {"sz": sz}
    if energy:
        e_ops["energy"] = H
    channels = [CollapseChannel(b, kappa, "kappa"), CollapseChannel(sz, gamma, "gamma")]
    traj = evolve_master(rho0, H, channels, grid, rtol=settings.rtol, atol=settings.atol, e_ops=e_ops,
                         store_states=False, meta={"N": N, "r": frame.r})
    return traj, (1 + traj.expect["sz"]) / 2


def fig4_rabi(physical=None, settings: SimulationSettings | None = None, **options) -> ScenarioResult:
    """Excited-state population with and without squeezing, plus the coupling enhancement."""
    settings = settings or SimulationSettings()
    opts = merge_options("fig4", options)
    res = ScenarioResult("fig4", _record("fig4", None, settings, opts))
    grid = np.linspace(0.0, opts["t_final"], opts["samples"])
    trajs = []
    t = Table("rabi").add("t", "1/Lambda", grid)
    amps = {}
    for r in opts["r_values"]:
        frame = models.frame_from_r(r, 1.0, Delta_m=opts["Delta_m"])
        N0 = initial_truncation(2 * frame.eta)

        def run(N, frame=frame):
            traj, pe = _rabi_run(frame, N, opts["gamma"], opts["kappa"], grid, settings)
            return (traj, pe), pe

        (traj, pe), rep = converge(run, N0, settings, f"fig4 r={r:g}")
        res.convergence[f"r={r:g}"] = rep
        trajs.append(traj)
        t.add(f"P_e(r={r:g})", "1", pe)
        amp = float(np.max(pe) - np.min(pe))
        amps[r] = amp
        res.metrics[f"contrast_r={r:g}"] = amp
        res.metrics[f"extrema_r={r:g}"] = _local_extrema(np.round(pe, 12))
    res.tables.append(t)

    r_hi, r_lo = max(opts["r_values"]), min(opts["r_values"])
    res.flag("c3_contrast_squeezed", amps[r_hi] >= opts["contrast_min"],
             f"peak-to-peak P_e >= {opts['contrast_min']:g} at r={r_hi:g}")
    res.flag("c3_flat_unsqueezed", amps[r_lo] <= opts["flat_max"],
             f"peak-to-peak P_e <= {opts['flat_max']:g} at r={r_lo:g}")
    res.flag("fig4_oscillation_count", res.metrics[f"extrema_r={r_hi:g}"] >= opts["min_extrema"],
             f">= {opts['min_extrema']} extrema at r={r_hi:g}")

    # closed system conserves <H>
    frame = models.frame_from_r(r_hi, 1.0, Delta_m=opts["Delta_m"])
    N = res.convergence[f"r={r_hi:g}"]["N_used"]
    traj, _ = _rabi_run(frame, N, 0.0, 0.0, grid, settings, energy=True)
    trajs.append(traj)
    drift = float(np.max(np.abs(traj.expect["energy"] - traj.expect["energy"][0])))
    res.metrics["closed_energy_drift"] = drift
    res.flag("fig4_energy_conservation", drift < opts["energy_tol"],
             f"closed-system |<H>(t) - <H>(0)| < {opts['energy_tol']:g} Lambda")
    _integrity_flag(res, trajs)
    _convergence_flag(res)

    # enhancement curve; both normalisations of the effective coupling
    rc = np.linspace(0.0, opts["curve_r_max"], opts["curve_points"])
    reps = [enhancement_report(models.frame_from_r(r, 1.0, Delta_m=opts["Delta_m"]), opts["kappa"], opts["gamma"])
            for r in rc]
    t = Table("enhancement").add("r", "1", rc)
    t.add("Lambda_eff/Lambda", "1", np.exp(rc) / 2).add("2Lambda_eff/Lambda", "1", np.exp(rc))
    t.add("C_d/C_nd", "1", [e.ratio for e in reps]).add("C_d/C_nd_exact", "1", [e.ratio_exact for e in reps])
    t.add("e^2r", "1", [e.ratio_asymptotic for e in reps])
    res.tables.append(t)

    # numerically extracted squeezed-frame coupling
    rows = []
    for r in opts["extract_r"]:
        frame = models.frame_from_r(r, 1.0, Delta_m=opts["Delta_m"])
        c = models.squeezed_couplings(frame, opts["extract_N"])
        rows.append((r, c["Lambda_eff"], frame.Lambda_eff, abs(c["Lambda_eff"] / frame.Lambda_eff - 1),
                     c["Delta_m"], frame.Delta_m, c["residual"]))
    cols = list(zip(*rows))
    t = Table("extraction")
    for (sym, unit), col in zip((("r", "1"), ("Lambda_eff_extracted", "Lambda"), ("Lambda_eff_closed", "Lambda"),
                                 ("rel_err", "1"), ("Delta_m_extracted", "Lambda"), ("Delta_m_closed", "Lambda"),
                                 ("fit_residual", "Lambda")), cols):
        t.add(sym, unit, col)
    res.tables.append(t)
    worst = max(cols[3])
    res.metrics["extraction_rel_err"] = worst
    res.flag("c2_enhancement_law", worst < opts["extract_tol"],
             f"extracted Lambda_eff = Lambda e^r / 2 within {opts['extract_tol']:g} relative at N={opts['extract_N']}")
    return res


# -- phase-space loops -------------------------------------------------------------

def fig5_phase_geometry(physical=None, settings: SimulationSettings | None = None, **options) -> ScenarioResult:
    """Phonon loops, geometric phase and gate-time ratios, Ising strength and the r(g/delta_m) inset."""
    settings = settings or SimulationSettings()
    opts = merge_options("fig5", options)
    res = ScenarioResult("fig5", _record("fig5", None, settings, opts))
    dm = opts["delta_m"]
    cols = {k: [] for k in ("r", "t", "re", "im", "re_lab", "im_lab")}
    worst_phase = worst_close = 0.0
    for r in opts["loop_r"]:
        frame = models.frame_from_r(r, 1.0, delta_m=dm)
        tau = 2 * math.pi / frame.Delta_m
        path = displacement_path(frame, np.linspace(0.0, tau, opts["loop_samples"]))
        phi = geometric_phase(path, rtol=opts["phase_rtol"] / 10)
        exact = 2 * math.pi * frame.eta**2
        worst_phase = max(worst_phase, abs(phi / exact - 1))
        worst_close = max(worst_close, abs(path.alpha[-1]) / frame.eta)
        res.metrics[f"phase_r={r:g}"] = phi
        n = path.times.size
        cols["r"].append(np.full(n, r))
        cols["t"].append(path.times)
        cols["re"].append(path.alpha.real)
        cols["im"].append(path.alpha.imag)
        cols["re_lab"].append(path.alpha_lab.real)
        cols["im_lab"].append(path.alpha_lab.imag)
    t = Table("loops")
    for (sym, unit), key in zip((("r", "1"), ("t", "1/Lambda"), ("Re alpha", "1"), ("Im alpha", "1"),
                                 ("Re alpha_lab", "1"), ("Im alpha_lab", "1")), cols):
        t.add(sym, unit, np.concatenate(cols[key]))
    res.tables.append(t)
    res.metrics.update(phase_rel_err=worst_phase, closure_over_eta=worst_close)
    res.flag("c4_geometric_phase", worst_phase < opts["phase_rtol"],
             f"loop phase = 2 pi (Lambda_eff/Delta_m)^2 within {opts['phase_rtol']:g} relative")
    res.flag("c4_loop_closure", worst_close < opts["closure_tol"],
             f"|alpha(2 pi / Delta_m)| < {opts['closure_tol']:g} Lambda_eff/Delta_m")

    rc = np.linspace(0.0, opts["curve_r_max"], opts["curve_points"])
    phi0 = geometric_phase(bare_loop(1.0, dm, [0.0, 2 * math.pi / dm]), opts["phase_rtol"] / 10)
    ratio_num, tau_ratio = [], []
    for r in rc:
        fr = models.frame_from_r(r, 1.0, delta_m=dm)
        ratio_num.append(geometric_phase(displacement_path(fr, [0.0, 2 * math.pi / fr.Delta_m]),
                                         opts["phase_rtol"] / 10) / phi0)
        # time for a fixed total phase: loops needed times loop duration
        tau_ratio.append(dm / fr.Delta_m / ratio_num[-1])
    e2c = np.exp(2 * rc) * np.cosh(2 * rc)
    t = Table("ratios").add("r", "1", rc)
    t.add("Phi_d/Phi_nd", "1", ratio_num).add("Phi_d/Phi_nd_closed", "1", (np.exp(rc) * np.cosh(2 * rc)) ** 2 / 4)
    t.add("t_d/t_nd", "1", tau_ratio).add("t_d/t_nd_closed", "1", 4 / e2c)
    t.add("xi/xi_0", "1", e2c / 4).add("(e^2r cosh2r)^2", "1", e2c**2)
    res.tables.append(t)
    i1 = int(np.argmin(np.abs(rc - 1.0)))
    closed1 = (math.e * math.cosh(2.0)) ** 2 / 4
    err1 = abs(ratio_num[i1] / closed1 - 1) if abs(rc[i1] - 1.0) < 1e-12 else float("nan")
    res.metrics["phase_ratio_r1_rel_err"] = err1
    res.flag("fig5_phase_ratio_r1", err1 < opts["phase_rtol"],
             "Phi_d/Phi_nd at r=1 matches (e cosh 2)^2 / 4")

    g = np.linspace(0.0, 0.99, opts["inset_points"])
    rg = 0.5 * np.arctanh(g)
    res.tables.append(Table("inset").add("g_cu/delta_m", "1", g).add("r", "1", rg))
    res.flag("fig5_inset_origin", rg[0] == 0.0, "r(g_cu/delta_m = 0) = 0")
    return res


# -- cat-state preparation ---------------------------------------------------------

def fig6_cat(physical=None, settings: SimulationSettings | None = None, **options) -> ScenarioResult:
    """Spin-entangled cat state under a tanh squeezing ramp: fidelities, frame check and Wigner snapshots."""
    settings = settings or SimulationSettings()
    opts = merge_options("fig6", options)
    res = ScenarioResult("fig6", _record("fig6", None, settings, opts))
    dm, tf = opts["delta_m"], opts["t_final"]
    grid = np.linspace(0.0, tf, int(round(tf / opts["dt"])) + 1)
    ramp = models.tanh_ramp(opts["r_max"], 1.0)
    alpha = cat_displacement(ramp, dm, 1.0, grid).alpha
    frame = models.TimeDependentFrame(ramp, dm, 1.0)
    gammas = list(opts["gammas"])
    snap_idx = [int(np.argmin(np.abs(grid - s))) for s in opts["snapshots"]]
    index = {float(t): k for k, t in enumerate(grid)}

    def run(N):
        lay, sz, b = _single_ops(N)
        rho0 = DensityMatrix.from_ket(ket_kron([0.0, 1.0], basis(0, N)), lay)
        targets = [cat_target(a, N) for a in alpha]

        def fid(t, rho):
            psi = targets[index[t]]
            return np.real(np.vdot(psi, rho @ psi))

        out = {}
        for g in gammas:
            k = g if opts["kappa"] is None else opts["kappa"]
            channels = [CollapseChannel(b, k, "kappa"), CollapseChannel(sz, g, "gamma")]
            for tag, H in (("RO", frame.H_RO(N)), ("full", frame.H_full(N))):
                keep = tag == "RO" and g == gammas[0]
                out[(g, tag)] = evolve_master(rho0, H, channels, grid, rtol=settings.rtol, atol=settings.atol,
                                              e_ops={"fidelity": fid}, store_states=keep,
                                              meta={"N": N, "gamma": g, "hamiltonian": tag})
        obs = np.concatenate([out[k].expect["fidelity"] for k in sorted(out)])
        return out, obs

    out, rep = converge(run, initial_truncation(float(np.max(np.abs(alpha)))), settings, "fig6")
    res.convergence["cat"] = rep

    t = Table("displacement").add("t", "1/Lambda", grid).add("r", "1", [ramp(x) for x in grid])
    t.add("Re alpha", "1", alpha.real).add("Im alpha", "1", alpha.imag)
    res.tables.append(t)
    t = Table("fidelity").add("t", "1/Lambda", grid)
    for g in gammas:
        for tag in ("RO", "full"):
            t.add(f"F_{tag}(gamma={g:g})", "1", out[(g, tag)].expect["fidelity"])
    res.tables.append(t)

    gap = 0.0
    for g, target in zip(gammas, opts["fidelity_targets"]):
        f_ro = float(out[(g, "RO")].expect["fidelity"][-1])
        f_full = float(out[(g, "full")].expect["fidelity"][-1])
        gap = max(gap, abs(f_ro - f_full))
        res.metrics[f"fidelity_RO_gamma={g:g}"] = f_ro
        res.metrics[f"fidelity_full_gamma={g:g}"] = f_full
        res.flag(f"c5_fidelity_gamma={g:g}", abs(f_ro - target) <= opts["fidelity_tol"],
                 f"final fidelity {target:g} +/- {opts['fidelity_tol']:g}")
    res.metrics["ro_full_gap"] = gap
    res.flag("c5_frame_gap", gap < opts["gap_tol"], f"|F_RO - F_full| < {opts['gap_tol']:g} at the final time")

    amax = float(np.max(np.abs(alpha)))
    res.metrics["alpha_final_abs"] = float(abs(alpha[-1]))
    sep = 2 * abs(alpha[-1]) / 0.5
    res.metrics["separation_in_zero_point_widths"] = sep
    res.flag("c5_peak_separation", sep > opts["separation_widths"],
             f"coherent peaks separated by > {opts['separation_widths']:g} zero-point widths (1/2 each)",
             informational=True)

    axis = wigner_grid(amax, opts["wigner_points"])
    dx = axis[1] - axis[0]
    X, Y = np.meshgrid(axis, axis)
    traj = out[(gammas[0], "RO")]
    cols = {k: [] for k in ("t", "x", "y", "W")}
    for s, k in zip(opts["snapshots"], snap_idx):
        W = wigner(partial_trace(traj.state(k), "fock"), axis, axis)
        res.metrics[f"wigner_norm_t={s:g}"] = float(W.sum() * dx * dx)
        if k == 0:
            vac = (2 / math.pi) * np.exp(-2 * (X**2 + Y**2))
            res.metrics["wigner_vacuum_err"] = float(np.max(np.abs(W - vac)))
        cols["t"].append(np.full(W.size, grid[k]))
        cols["x"].append(X.ravel())
        cols["y"].append(Y.ravel())
        cols["W"].append(W.ravel())
    t = Table("wigner")
    for (sym, unit), key in zip((("t", "1/Lambda"), ("Re beta", "1"), ("Im beta", "1"), ("W", "1")), cols):
        t.add(sym, unit, np.concatenate(cols[key]))
    res.tables.append(t)
    if 0 in snap_idx:
        res.flag("fig6_vacuum_wigner", res.metrics["wigner_vacuum_err"] < 1e-10,
                 "W at t=0 equals the vacuum Gaussian (2/pi) exp(-2|beta|^2)")
    _integrity_flag(res, out.values())
    _convergence_flag(res)
    return res


# -- two-qubit gate ------------------------------------------------------------------

_SPIN_KETS = {"u": np.array([1.0, 0.0]), "d": np.array([0.0, 1.0])}


def _sw_deviation(eta, opts, settings, res):
    """Worst population gap between the two-NV model and the Ising model over one loop."""
    r = opts["sw_r"]
    L_eff = math.exp(r) / 2
    frame = models.frame_from_r(r, 1.0, Delta_m=L_eff / eta)
    tau = 2 * math.pi / frame.Delta_m
    times = np.linspace(0.0, tau, opts["sw_samples"])
    U = models.ising(frame).data
    wI, VI = np.linalg.eigh(U)
    kets = {lab: np.kron(_SPIN_KETS[lab[0]], _SPIN_KETS[lab[1]]) for lab in opts["sw_initial"]}

    def run(N):
        H = models.build_two_nv(frame, N).data
        w, V = np.linalg.eigh(H)
        pops = {}
        for lab, s in kets.items():
            psi0 = np.kron(s, basis(0, N))
            c = V.conj().T @ psi0
            psi_t = V @ (np.exp(-1j * np.outer(w, times)) * c[:, None])
            pops[lab] = np.sum(np.abs(psi_t.reshape(4, N, -1)) ** 2, axis=1).T
        return pops, np.concatenate([p.ravel() for p in pops.values()])

    pops, rep = converge(run, initial_truncation(4 * eta), settings, f"fig7 sw eta={eta:g}")
    res.convergence[f"sw_eta={eta:g}"] = rep
    worst, at_tau = 0.0, 0.0
    rows = []
    for lab, s in kets.items():
        pI = np.abs(VI @ (np.exp(-1j * np.outer(wI, times)) * (VI.conj().T @ s)[:, None])).T ** 2
        diff = np.abs(pops[lab] - pI)
        worst = max(worst, float(diff.max()))
        at_tau = max(at_tau, float(diff[-1].max()))
        rows.append((lab, pops[lab], pI))
    return worst, at_tau, times, rows


def fig7_gate(physical=None, settings: SimulationSettings | None = None, **options) -> ScenarioResult:
    """Geometric phase gate: truth table, open-system fidelity and gate time against r, and the Ising check."""
    settings = settings or SimulationSettings()
    opts = merge_options("fig7", options)
    res = ScenarioResult("fig7", _record("fig7", None, settings, opts))
    psi_spin = x_basis_states()[opts["initial"]]
    trajs, rows, traj_cols = [], [], {k: [] for k in ("r", "t", "F", "vac")}
    returned = True
    for r in opts["r_values"]:
        frame = models.frame_from_r(r, 1.0, Delta_m=opts["Delta_factor"] * math.exp(r) / 2)

        def run(N, frame=frame):
            lay = models.two_nv_layout(N)
            rho0 = DensityMatrix.from_ket(np.kron(psi_spin, basis(0, N)), lay)
            ch = gate_channels(N, opts["kappa"], opts["gamma"], opts["gamma"])
            traj, F, tau = run_gate(rho0, frame, ch, n_samples=opts["samples"],
                                    t_final_factor=opts["t_final_factor"], rtol=settings.rtol, atol=settings.atol)
            return (traj, F, tau), np.concatenate([traj.expect["spin_fidelity"], traj.expect["phonon_vacuum"]])

        (traj, F, tau), rep = converge(run, initial_truncation(4 * frame.eta), settings, f"fig7 r={r:g}")
        res.convergence[f"r={r:g}"] = rep
        trajs.append(traj)
        rows.append((r, frame.Delta_m, tau, F, 1 - F))
        n = traj.times.size
        traj_cols["r"].append(np.full(n, r))
        traj_cols["t"].append(traj.times)
        traj_cols["F"].append(traj.expect["spin_fidelity"])
        traj_cols["vac"].append(traj.expect["phonon_vacuum"])
        late = traj.times >= tau / 2
        t_peak = float(traj.times[late][np.argmax(traj.expect["phonon_vacuum"][late])])
        step = float(traj.times[1] - traj.times[0])
        res.metrics[f"phonon_return_offset_r={r:g}"] = t_peak - tau
        returned &= abs(t_peak - tau) <= step * (1 + 1e-9)

    cols = list(zip(*rows))
    t = Table("gate")
    for (sym, unit), col in zip((("r", "1"), ("Delta_m", "Lambda"), ("tau", "1/Lambda"), ("F", "1"),
                                 ("1-F", "1")), cols):
        t.add(sym, unit, col)
    res.tables.append(t)
    t = Table("gate_dynamics")
    for (sym, unit), key in zip((("r", "1"), ("t", "1/Lambda"), ("F_spin", "1"), ("P_vac", "1")), traj_cols):
        t.add(sym, unit, np.concatenate(traj_cols[key]))
    res.tables.append(t)

    taus = np.array(cols[2])
    res.flag("fig7_gate_time_decreasing", bool(np.all(np.diff(taus) < 0)), "tau = 2 pi / Delta_m falls as r grows")
    res.flag("fig7_phonon_return", bool(returned), "phonon-vacuum maximum within one sample of tau")
    r_top = max(opts["r_values"])
    F_top = rows[opts["r_values"].index(r_top)][3]
    res.metrics["fidelity_top_r"] = F_top
    res.metrics["infidelity_top_r"] = 1 - F_top
    res.flag("c6_open_fidelity", 1 - F_top < opts["infidelity_max"],
             f"infidelity < {opts['infidelity_max']:g} at r={r_top:g}")

    # analytic truth table
    frame = models.frame_from_r(r_top, 1.0, Delta_m=opts["Delta_factor"] * math.exp(r_top) / 2)
    table = truth_table(gate_unitary(frame))
    expected = {"++": 0.0, "+-": -math.pi / 2, "-+": -math.pi / 2, "--": 0.0}
    errs = {k: abs(math.remainder(table[k][1] - expected[k], 2 * math.pi)) for k in table}
    amp_err = max(abs(v[0] - 1) for v in table.values())
    t = Table("truth_table").add("input", "-", list(table))
    t.add("|amplitude|", "1", [v[0] for v in table.values()]).add("phase", "rad", [v[1] for v in table.values()])
    t.add("expected_phase", "rad", [expected[k] for k in table])
    res.tables.append(t)
    res.metrics["truth_table_phase_err"] = max(errs.values())
    res.flag("c6_truth_table", max(errs.values()) < opts["phase_tol"] and amp_err < opts["phase_tol"],
             f"sigma_x product states pick up phases (0, -pi/2, -pi/2, 0) within {opts['phase_tol']:g} rad")

    # phonon elimination vs the full model
    sw_rows = []
    sw_ok = True
    cols = {k: [] for k in ("eta", "init", "t", "full", "ising")}
    for eta in opts["sw_etas"]:
        worst, at_tau, times, prs = _sw_deviation(eta, opts, settings, res)
        res.metrics[f"sw_deviation_eta={eta:g}"] = worst
        res.metrics[f"sw_deviation_over_eta2_eta={eta:g}"] = worst / eta**2
        res.metrics[f"sw_deviation_at_tau_eta={eta:g}"] = at_tau
        sw_ok &= worst < opts["sw_factor"] * eta**2
        sw_rows.append((eta, worst, worst / eta**2, at_tau))
        for lab, pf, pi in prs:
            for j, basis_lab in enumerate(("uu", "ud", "du", "dd")):
                cols["eta"].append(np.full(times.size, eta))
                cols["init"].append(np.full(times.size, f"{lab}->{basis_lab}"))
                cols["t"].append(times)
                cols["full"].append(pf[:, j])
                cols["ising"].append(pi[:, j])
    t = Table("ising_check")
    for (sym, unit), key in zip((("eta", "1"), ("transition", "-"), ("t", "1/Lambda"), ("P_full", "1"),
                                 ("P_ising", "1")), cols):
        t.add(sym, unit, np.concatenate(cols[key]))
    res.tables.append(t)
    res.flag("c7_ising_reduction", bool(sw_ok),
             f"sup_t |P_full - P_ising| < {opts['sw_factor']:g} eta^2 over one loop")
    _integrity_flag(res, trajs)
    _convergence_flag(res)
    return res


# -- feasibility ---------------------------------------------------------------------

def fig8_feasibility(physical=None, settings: SimulationSettings | None = None, **options) -> ScenarioResult:
    """Drive coupling against wire distance and effective spin-phonon coupling against NV distance and r."""
    settings = settings or SimulationSettings()
    opts = merge_options("fig8", options)
    params = physical or ml.preset("sec5")
    res = ScenarioResult("fig8", _record("fig8", params, settings, opts))

    dcu = np.linspace(*opts["d_cu_range"], opts["d_cu_points"])
    kg = [ml.current_drive_coupling(params.with_(h_cu=params.h_eq + d)) for d in dcu]
    g = np.array([float(x[1]) for x in kg])
    t = Table("drive_coupling").add("d_CU-MA", "m", dcu).add("k_cu", "N/m", [x[0] for x in kg])
    t.add("g_cu/2pi", "Hz", g / (2 * math.pi))
    res.tables.append(t)
    res.flag("fig8_g_monotone", bool(np.all(np.diff(g) < 0)), "g_cu strictly decreasing with wire distance")

    dnv = np.linspace(*opts["d_nv_range"], opts["d_nv_points"])
    rs = np.linspace(0.0, opts["r_max"], opts["r_points"])
    chains = [models.coupling_chain(params.with_(d=d)) for d in dnv]
    D, R = np.meshgrid(dnv, rs, indexing="ij")
    lam = np.array([c.lam for c in chains])[:, None] * np.ones_like(R)
    Lam = np.array([c.Lambda for c in chains])[:, None] * np.ones_like(R)
    t = Table("coupling_surface").add("d_NV-MA", "m", D.ravel()).add("r", "1", R.ravel())
    t.add("lambda/2pi", "Hz", lam.ravel() / (2 * math.pi)).add("Lambda/2pi", "Hz", Lam.ravel() / (2 * math.pi))
    t.add("Lambda_eff/2pi", "Hz", (Lam * np.exp(R) / 2).ravel() / (2 * math.pi))
    res.tables.append(t)

    lam0 = ml.spin_magnet_coupling(params.with_(d=2 * params.a)).hz
    res.metrics["lambda_hz_d2a"] = lam0
    res.flag("c1_coupling_magnitude", abs(lam0 / opts["lambda_target_hz"] - 1) <= opts["lambda_rel_tol"],
             f"lambda/2pi at d = 2a within {opts['lambda_rel_tol']:.0%} of {opts['lambda_target_hz']:g} Hz")

    d0 = opts["probe_distance"]
    g0 = ml.current_drive_coupling(params.with_(h_cu=params.h_eq + d0))[1].hz
    ratio_g = g0 / opts["g_target_hz"]
    res.metrics.update(g_cu_hz_probe=g0, g_cu_ratio=ratio_g)
    res.flag("c10_drive_coupling", 1 / opts["g_factor"] <= ratio_g <= opts["g_factor"],
             f"g_cu/2pi at {d0:g} m within a factor {opts['g_factor']:g} of {opts['g_target_hz']:g} Hz")
    chain = models.coupling_chain(params.with_(d=d0))
    L0 = chain.Lambda_eff(opts["probe_r"]) / (2 * math.pi)
    ratio_L = L0 / opts["Lambda_target_hz"]
    res.metrics.update(Lambda_eff_hz_probe=L0, Lambda_eff_ratio=ratio_L, theta=chain.theta, alpha=chain.alpha)
    res.flag("c10_effective_coupling", 1 / opts["Lambda_factor"] <= ratio_L <= opts["Lambda_factor"],
             f"Lambda_eff/2pi at d = {d0:g} m, r = {opts['probe_r']:g} within a factor "
             f"{opts['Lambda_factor']:g} of {opts['Lambda_target_hz']:g} Hz")

    cf = ml.current_field_at_nv(params)
    res.metrics.update(current_field_origin_T=cf.origin, current_field_image_T=cf.image,
                       current_field_total_T=cf.total, bias_field_T=params.B_0)
    res.flag("fig8_bias_dominates_wire_field", cf.total < params.B_0,
             "wire field at the NV below the bias field B_0", informational=True)
    s = ml.trap_summary(params)
    res.metrics.update(k_ma=s.k_ma, f_ma=s.f_ma, z0=s.z0)
    return res


SCENARIOS = {
    "fig2": fig2_potential,
    "fig3": fig3_coupling_map,
    "fig4": fig4_rabi,
    "fig5": fig5_phase_geometry,
    "fig6": fig6_cat,
    "fig7": fig7_gate,
    "fig8": fig8_feasibility,
}
