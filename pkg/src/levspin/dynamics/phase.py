"""Phonon displacement paths and geometric phases.

For the static squeezed frame with delta0 = 0, the Magnus expansion of H_RO
is exact: the sigma_x = +1 branch is displaced by
alpha(t) = eta (1 - exp(i Delta_m t)) in the interaction picture, with
eta = Lambda_eff / Delta_m.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate

from ..errors import DomainError, QuadratureError
from ..models import FrameSpec


@dataclass(frozen=True)
class PhaseSpacePath:
    times: np.ndarray
    alpha: np.ndarray
    phase: np.ndarray
    alpha_lab: np.ndarray | None = None
    sampler: Callable[[np.ndarray], np.ndarray] | None = None

    def __post_init__(self):
        if self.phase.size and self.phase[0] != 0:
            raise ValueError("accumulated phase must start at zero")


def _accumulated_phase(alpha: np.ndarray) -> np.ndarray:
    """Trapezoidal Im int alpha^* d alpha; each step contributes Im(conj(a_k) a_{k+1})."""
    if alpha.size < 2:
        return np.zeros(alpha.size)
    inc = np.imag(np.conj(alpha[:-1]) * alpha[1:])
    return np.concatenate([[0.0], np.cumsum(inc)])


def static_loop(frame: FrameSpec) -> Callable[[np.ndarray], np.ndarray]:
    Delta = frame.Delta_m
    if Delta == 0:
        raise DomainError("Delta_m = 0: resonant drive gives an unbounded displacement")
    eta = frame.Lambda_eff / Delta
    return lambda t: eta * (1 - np.exp(1j * Delta * np.asarray(t, dtype=float)))


def displacement_path(frame: FrameSpec, t_grid) -> PhaseSpacePath:
    """Closed-form phonon loop in the squeezed interaction picture.

    ``alpha_lab`` is the loop seen by the unsqueezed mode,
    Lambda/(2 Delta_m) [(cos Delta_m t - 1) e^{2r} - i sin Delta_m t].
    """
    t = np.asarray(t_grid, dtype=float)
    f = static_loop(frame)
    alpha = f(t)
    Delta = frame.Delta_m
    lab = frame.Lambda / (2 * Delta) * ((np.cos(Delta * t) - 1) * math.exp(2 * frame.r) - 1j * np.sin(Delta * t))
    return PhaseSpacePath(t, alpha, _accumulated_phase(alpha), lab, f)


def bare_loop(Lambda: float, delta_m: float, t_grid) -> PhaseSpacePath:
    """Reference loop without the drive: amplitude Lambda/delta_m at frequency delta_m."""
    if delta_m == 0:
        raise DomainError("delta_m = 0: resonant drive gives an unbounded displacement")
    eta = Lambda / delta_m
    f = lambda t: eta * (1 - np.exp(1j * delta_m * np.asarray(t, dtype=float)))
    t = np.asarray(t_grid, dtype=float)
    alpha = f(t)
    return PhaseSpacePath(t, alpha, _accumulated_phase(alpha), None, f)


def geometric_phase(path: PhaseSpacePath, rtol: float = 1e-8, max_points: int = 2**24) -> float:
    """Im of the loop integral of alpha^* d alpha.

    Paths carrying a ``sampler`` are refined by doubling the number of
    uniformly spaced samples until the phase changes by less than ``rtol``
    (relative); otherwise the stored samples are used as given.
    """
    if path.times.size < 2 or path.times[-1] == path.times[0]:
        return 0.0
    if path.sampler is None:
        return float(_accumulated_phase(path.alpha)[-1])
    t0, t1 = float(path.times[0]), float(path.times[-1])
    n = max(64, path.times.size)
    prev = float(_accumulated_phase(path.sampler(np.linspace(t0, t1, n + 1)))[-1])
    while n < max_points:
        n *= 2
        cur = float(_accumulated_phase(path.sampler(np.linspace(t0, t1, n + 1)))[-1])
        if abs(cur - prev) <= rtol * max(abs(cur), 1e-300):
            # trapezoid error falls 4x per doubling; remove the leading term
            return cur + (cur - prev) / 3
        prev = cur
    raise QuadratureError(f"geometric phase did not converge to rtol={rtol} with {n} samples")


def cat_displacement(r_schedule: Callable[[float], float], delta_m: float, Lambda: float, t_grid,
                     rtol: float = 1e-8) -> PhaseSpacePath:
    """Displacement of the sigma_x = +1 branch under a slowly varying squeezing r(t).

    alpha(t) = -i (Lambda/2) int_0^t exp[r(t') - i chi(t, t')] dt' with
    chi(t, t') = int_{t'}^t Delta_m(s) ds and Delta_m = delta_m / cosh 2r, by
    nested adaptive quadrature.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if np.any(t_grid < 0):
        raise DomainError("cat_displacement integrates from t = 0; t_grid must be non-negative")

    def Delta(s):
        return delta_m / math.cosh(2 * r_schedule(s))

    def X(s):
        if s == 0:
            return 0.0
        val, err = _checked_quad(Delta, 0.0, s, rtol)
        return val

    alpha = np.zeros(t_grid.size, dtype=complex)
    if Lambda != 0:
        for k, t in enumerate(t_grid):
            if t == 0:
                continue
            Xt = X(t)
            integrand = lambda s: math.exp(r_schedule(s)) * np.exp(-1j * (Xt - X(s)))
            val, _ = _checked_quad(integrand, 0.0, float(t), rtol, complex_func=True)
            alpha[k] = -0.5j * Lambda * val
    return PhaseSpacePath(t_grid, alpha, _accumulated_phase(alpha))


def _checked_quad(f, a, b, rtol, complex_func=False):
    out = integrate.quad(f, a, b, epsrel=rtol, epsabs=1e-13, limit=500,
                         complex_func=complex_func, full_output=True)
    val, err = out[0], out[1]
    infos = out[2]
    msgs = [m for m in out[3:] if isinstance(m, str)] if len(out) > 3 else []
    if complex_func:
        for part in ("real", "imag"):
            p = infos.get(part) if isinstance(infos, dict) else None
            if isinstance(p, tuple):
                msgs.extend(m for m in p[1:] if isinstance(m, str))
    if msgs:
        raise QuadratureError(f"quadrature did not converge on [{a}, {b}]: {msgs[0]}")
    return val, err


def cat_displacement_ode(r_schedule, delta_m: float, Lambda: float, t_grid, rtol=1e-11, atol=1e-13):
    """Same displacement from d alpha/dt = -i Delta_m(t) alpha - i Lambda e^{r(t)}/2 (independent check)."""
    def rhs(t, y):
        a = y[0] + 1j * y[1]
        da = -1j * delta_m / math.cosh(2 * r_schedule(t)) * a - 0.5j * Lambda * math.exp(r_schedule(t))
        return [da.real, da.imag]

    t_grid = np.asarray(t_grid, dtype=float)
    sol = integrate.solve_ivp(rhs, (0.0, float(t_grid[-1])), [0.0, 0.0], t_eval=t_grid,
                              method="DOP853", rtol=rtol, atol=atol)
    return sol.y[0] + 1j * sol.y[1]
