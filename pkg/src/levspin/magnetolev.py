"""Classical magnetostatics of a micromagnet levitated above a superconductor.

The superconductor is described by a frozen image dipole (flux pinned at the
cooling position) plus a mirror dipole (Meissner response). Lengths passed to
the dimensionless potential are in units of the magnet radius ``a``; everything
else in this module is SI. The vertical levitation axis is ``x`` and the
spin-coupling axis is ``z``.

Rates crossing into the quantum modules are returned as
:class:`~levspin.constants.AngularFrequency` values (rad/s with a ``.hz``
accessor).
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, replace

import numpy as np
from scipy import optimize

from .constants import D_ZFS, G_ACCEL, GAMMA_E, HBAR, MU_0, AngularFrequency
from .errors import DomainError, GeometryError, NoTrapError

_SINGULAR_EPS = 1e-12


@dataclass(frozen=True)
class PhysicalParams:
    """Magnet, NV, trap and drive parameters in SI units.

    Frequencies (``D``, ``Omega_p``, ``mw_detuning``) are angular, in rad/s.
    ``mw_detuning`` is the microwave detuning from the |g>-|d> transition;
    zero means resonant driving.
    """

    a: float
    rho: float
    B_r: float
    h_cool: float
    h_eq: float
    theta_cool: float = 0.0
    phi_cool: float = math.pi / 2
    theta: float = 0.0
    phi: float = math.pi / 2
    d: float = 0.0
    I_0: float = 0.0
    h_cu: float = 0.0
    B_0: float = 0.0
    Omega_p: float = 2 * math.pi * 10e6
    mw_detuning: float = 0.0
    D: float = D_ZFS
    gamma_e: float = GAMMA_E
    g: float = G_ACCEL

    def __post_init__(self):
        for name, value in asdict(self).items():
            if not math.isfinite(value):
                raise DomainError(f"{name} must be finite, got {value!r}")
        if self.a <= 0:
            raise DomainError(f"a must be > 0 m, got {self.a!r}")
        if self.rho <= 0:
            raise DomainError(f"rho must be > 0 kg/m^3, got {self.rho!r}")
        if self.B_r < 0:
            raise DomainError(f"B_r must be >= 0 T, got {self.B_r!r}")
        if self.h_cool < self.a or self.h_eq < self.a:
            raise GeometryError("h_cool and h_eq must be >= a (magnet above the surface)")

    def check(self) -> "PhysicalParams":
        """Enforce the full invariants needed by every operation; return self."""
        if self.B_r <= 0:
            raise DomainError("B_r must be > 0 T")
        if self.d <= self.a:
            raise GeometryError(f"d must exceed a (d={self.d!r} m, a={self.a!r} m)")
        if self.h_cu <= self.h_eq:
            raise GeometryError(f"h_cu must exceed h_eq (h_cu={self.h_cu!r} m, h_eq={self.h_eq!r} m)")
        return self

    @property
    def mass(self) -> float:
        return self.rho * 4.0 / 3.0 * math.pi * self.a**3

    @property
    def mu_m(self) -> float:
        """Dipole moment of a uniformly magnetised sphere (A m^2)."""
        return 4.0 * math.pi * self.B_r * self.a**3 / (3.0 * MU_0)

    @property
    def alpha_crit(self) -> float:
        return self.B_r**2 / (16.0 * self.g * self.rho * MU_0)

    @property
    def alpha_s(self) -> float:
        return self.a / self.alpha_crit if self.B_r > 0 else math.inf

    @property
    def U_s(self) -> float:
        return self.mass * self.g * self.alpha_crit

    def with_(self, **changes) -> "PhysicalParams":
        return replace(self, **changes)


def preset(name: str) -> PhysicalParams:
    """Named parameter sets: ``sec5`` (sub-micron magnet) and ``fig2`` (22.4 um magnet)."""
    if name == "sec5":
        a = 0.25e-6
    elif name == "fig2":
        a = 22.4e-6
    else:
        raise KeyError(f"unknown preset {name!r}; choose 'sec5' or 'fig2'")
    h = 3 * a
    return PhysicalParams(
        a=a, rho=7430.0, B_r=0.75, h_cool=h, h_eq=h,
        d=2 * a, I_0=10e-3, h_cu=2 * h, B_0=20e-3,
    )


PRESETS = ("sec5", "fig2")


@dataclass(frozen=True)
class TrapSummary:
    k_ma: float
    omega_ma: AngularFrequency
    z0: float
    alpha_crit: float
    U_s: float
    mass: float
    mu_m: float

    @property
    def f_ma(self) -> float:
        return self.omega_ma.hz


# -- levitation potential -----------------------------------------------------

def image_potential(pos_s, theta, phi, h_cool_s, theta_cool=0.0, phi_cool=math.pi / 2):
    """Magnetic part g_u of the dimensionless potential.

    ``pos_s`` and ``h_cool_s`` are in units of the magnet radius.
    """
    x, y, z = (float(c) for c in pos_s)
    xh = x + h_cool_s
    R2 = xh * xh + y * y + z * z
    if abs(x) < _SINGULAR_EPS or R2 < _SINGULAR_EPS:
        raise DomainError(f"potential is singular at position {pos_s!r}")
    ct, st = math.cos(theta), math.sin(theta)
    cp, sp = math.cos(phi), math.sin(phi)
    ctc, stc = math.cos(theta_cool), math.sin(theta_cool)
    g_c = (xh * xh + y * y - 2 * z * z) * ctc + 3 * z * xh * stc
    g_s = (-3 * z * xh * cp - 3 * z * y * sp) * ctc + (
        (2 * xh * xh - y * y - z * z) * cp + 3 * y * xh * sp
    ) * stc
    mirror = (1 + (cp * st) ** 2) / (3 * x**3)
    frozen = (16.0 / 3.0) * (g_c * ct + g_s * st) / R2**2.5
    return mirror - frozen


def dimensionless_potential(params: PhysicalParams, pos_s, theta=None, phi=None) -> float:
    """u_s = alpha_s x_s + g_u at a position given in units of a."""
    if pos_s[0] < 1:
        raise DomainError(f"x_s must be >= 1 (magnet above the surface), got {pos_s[0]!r}")
    theta = params.theta if theta is None else theta
    phi = params.phi if phi is None else phi
    g_u = image_potential(pos_s, theta, phi, params.h_cool / params.a,
                          params.theta_cool, params.phi_cool)
    return params.alpha_s * pos_s[0] + g_u


def z_line_potential(params: PhysicalParams, z_s):
    """Closed-form u_s along z through the equilibrium point (theta = theta_cool = 0)."""
    z_s = np.asarray(z_s, dtype=float)
    H = (params.h_eq + params.h_cool) / params.a
    h = params.h_eq / params.a
    return (16.0 / 3.0) * (2 * z_s**2 - H**2) / (H**2 + z_s**2) ** 2.5 + 1 / (3 * h**3) + params.alpha_s * h


def z_line_stiffness(params: PhysicalParams, step_s: float = 1e-3) -> float:
    """Curvature of the z-line potential at z = 0 in N/m, by Richardson-extrapolated central differences."""
    def d2(h):
        f = z_line_potential(params, [-h, 0.0, h])
        return (f[0] - 2 * f[1] + f[2]) / h**2

    curv = (4 * d2(step_s / 2) - d2(step_s)) / 3
    return params.U_s * curv / params.a**2


def axial_equilibrium(params: PhysicalParams, tol: float = 1e-10) -> float:
    """Height (m) minimising the axial potential, by golden-section search."""
    h = params.h_cool / params.a

    def u(x):
        return params.alpha_s * x + image_potential((x, 0.0, 0.0), params.theta, params.phi, h,
                                                    params.theta_cool, params.phi_cool)

    res = optimize.minimize_scalar(u, bracket=(max(1.0, 0.5 * h), h, 2.0 * h), method="golden",
                                   tol=tol)
    return float(res.x) * params.a


def equilibrium_height(params: PhysicalParams, rel_tol: float = 0.01) -> float:
    """Return h_eq, keeping the configured value when it is within ``rel_tol`` of the numeric minimum."""
    x_num = axial_equilibrium(params)
    if abs(x_num - params.h_eq) <= rel_tol * params.h_eq:
        return params.h_eq
    return x_num


@dataclass(frozen=True)
class PotentialMap:
    """Row-major grid of u_s values; ``flagged`` marks cells where the potential is undefined."""

    plane: str
    axes: tuple[str, str]
    x: np.ndarray
    y: np.ndarray
    values: np.ndarray
    flagged: np.ndarray

    def columns(self) -> dict[str, np.ndarray]:
        if self.plane == "z-line":
            return {"z_s": self.x, "u_s": self.values[0], "flagged": self.flagged[0]}
        X, Y = np.meshgrid(self.x, self.y)
        return {self.axes[0]: X.ravel(), self.axes[1]: Y.ravel(),
                "u_s": self.values.ravel(), "flagged": self.flagged.ravel()}


_PLANES = {
    "zy": ("z_s", "y_s"),
    "zx": ("z_s", "x_s"),
    "thetaphi": ("theta", "phi"),
    "z-line": ("z_s", ""),
}


def potential_map(params: PhysicalParams, plane: str, grid) -> PotentialMap:
    """Evaluate u_s on a grid.

    ``grid`` is a pair of 1-D coordinate arrays (a single array for ``z-line``).
    In-plane positions are in units of a; the out-of-plane coordinate sits at
    the equilibrium point. Singular cells are NaN and flagged.
    """
    if plane not in _PLANES:
        raise ValueError(f"plane must be one of {sorted(_PLANES)}, got {plane!r}")
    if plane == "z-line":
        xs, ys = np.atleast_1d(np.asarray(grid, dtype=float)), np.zeros(1)
    else:
        xs, ys = (np.atleast_1d(np.asarray(g, dtype=float)) for g in grid)
    if xs.size == 0 or ys.size == 0:
        raise ValueError("potential_map grid must be nonempty")
    h_eq = params.h_eq / params.a
    values = np.full((ys.size, xs.size), np.nan)
    flagged = np.zeros(values.shape, dtype=bool)
    for i, v in enumerate(ys):
        for j, u in enumerate(xs):
            theta, phi = params.theta, params.phi
            if plane == "zy":
                pos = (h_eq, v, u)
            elif plane == "zx":
                pos = (v, 0.0, u)
            elif plane == "thetaphi":
                pos, theta, phi = (h_eq, 0.0, 0.0), u, v
            else:
                pos = (h_eq, 0.0, u)
            try:
                values[i, j] = dimensionless_potential(params, pos, theta, phi)
            except DomainError:
                flagged[i, j] = True
    return PotentialMap(plane, _PLANES[plane], xs, ys, values, flagged)


# -- trap and couplings -------------------------------------------------------

def trap_summary(params: PhysicalParams) -> TrapSummary:
    """Stiffness, frequency and zero-point fluctuation of the levitated mode."""
    H = params.h_eq + params.h_cool
    k_ma = 3 * MU_0 * params.mu_m**2 / (4 * math.pi * H**5)
    if k_ma <= 0:
        raise NoTrapError(f"no trap: k_ma = {k_ma!r} N/m (B_r = {params.B_r!r} T)")
    m = params.mass
    omega = math.sqrt(k_ma / m)
    z0 = math.sqrt(HBAR / (2 * m * omega))
    return TrapSummary(k_ma=k_ma, omega_ma=AngularFrequency(omega), z0=z0,
                       alpha_crit=params.alpha_crit, U_s=params.U_s, mass=m, mu_m=params.mu_m)


def field_gradient_at_nv(params: PhysicalParams) -> float:
    """dB_z/dz of the magnet's dipole field at the NV (T/m), in the convention fixed by lambda."""
    if params.d <= params.a:
        raise GeometryError(f"NV inside the magnet: d={params.d!r} m <= a={params.a!r} m")
    return 3 * MU_0 * params.mu_m / (4 * math.pi * params.d**4)


def spin_magnet_coupling(params: PhysicalParams) -> AngularFrequency:
    """Bare NV spin-phonon coupling lambda = gamma_e B_r a^3 z0 / d^4."""
    if params.d <= params.a:
        raise GeometryError(f"NV inside the magnet: d={params.d!r} m <= a={params.a!r} m")
    z0 = trap_summary(params).z0
    return AngularFrequency(params.gamma_e * params.B_r * params.a**3 * z0 / params.d**4)


def current_drive_coupling(params: PhysicalParams) -> tuple[float, AngularFrequency]:
    """Return (k_cu in N/m, g_cu in rad/s) for the wire drive, including its image."""
    D = params.h_cu - params.h_eq
    if abs(D) < _SINGULAR_EPS * params.a:
        raise GeometryError("wire at the magnet height (h_cu == h_eq)")
    S = params.h_cu + params.h_eq
    k_cu = MU_0 * params.mu_m * params.I_0 / (2 * math.pi) * (1 / abs(D) ** 3 + 1 / S**3)
    z0 = trap_summary(params).z0
    return k_cu, AngularFrequency(k_cu * z0**2 / (2 * HBAR))


def wire_field(I_0: float, r: float) -> float:
    """Field magnitude of an infinite straight wire (T)."""
    if r <= 0:
        raise DomainError("field point lies on the wire")
    return MU_0 * I_0 / (2 * math.pi * r)


@dataclass(frozen=True)
class CurrentField:
    origin: float
    image: float

    @property
    def total(self) -> float:
        return self.origin + self.image


def current_field_at_nv(params: PhysicalParams) -> CurrentField:
    """Field of the drive wire and its image at the NV (NV at height h_eq, offset d along z)."""
    r_or = math.hypot(params.h_eq - params.h_cu, params.d)
    r_im = math.hypot(params.h_eq + params.h_cu, params.d)
    if r_or < _SINGULAR_EPS * params.a:
        raise DomainError("NV sits on the drive wire")
    return CurrentField(wire_field(params.I_0, r_or), wire_field(params.I_0, r_im))


def mixing_angle(params: PhysicalParams) -> float:
    """NV level-mixing angle from the transverse field: tan 2 theta = 2 gamma_e B_0 / D."""
    return 0.5 * math.atan(2 * params.gamma_e * params.B_0 / params.D)
