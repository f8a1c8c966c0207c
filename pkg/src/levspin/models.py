"""Hamiltonians for one and two NV spins coupled to a parametrically driven phonon.

All quantum Hamiltonians are in angular-frequency units (hbar = 1). The
single-NV layout is spin (x) Fock, the two-NV layout is spin1 (x) spin2 (x)
Fock. The squeezed frame uses the canonical mode b = S^dag a S with
S = exp(r (a^2 - a^dag^2) / 2) and tanh 2r = g_cu / delta_m, which gives

    S H_TO S^dag = H_RO + H_Sq + delta_m sinh^2 r - (g_cu / 2) sinh 2r

with H_Sq = (Lambda e^{-r} / 2) (b - b^dag)(sigma_+ - sigma_-).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from . import qops
from .constants import D_ZFS
from .errors import DegenerateBasisError, DomainError, InstabilityError, SWValidityError
from .qops import Operator, SpaceLayout, embed, fock_annihilation, kron, spin_half_paulis

SW_WARN_ETA = 0.3


class SWValidityWarning(UserWarning):
    pass


# -- NV level structure -------------------------------------------------------

@dataclass(frozen=True)
class NvBasis:
    """Eigenbasis of D S_z^2 + delta S_x in the (|+1>, |0>, |-1>) basis.

    Rows of ``vectors`` are |e>, |d>, |g>.
    """

    theta: float
    omega_e: float
    omega_g: float
    omega_d: float
    vectors: np.ndarray

    @property
    def e(self):
        return self.vectors[0]

    @property
    def d(self):
        return self.vectors[1]

    @property
    def g(self):
        return self.vectors[2]


def nv_mixed_basis(D: float = D_ZFS, delta: float = 0.0) -> NvBasis:
    if D <= 0:
        raise DomainError(f"zero-field splitting must be positive, got {D!r}")
    theta = 0.5 * math.atan(2 * delta / D)
    root = math.sqrt(1 + (2 * delta / D) ** 2)
    omega_e = D * (1 + root) / 2
    omega_g = D * (1 - root) / 2
    s2 = 1 / math.sqrt(2)
    zero = np.array([0.0, 1.0, 0.0])
    bright = np.array([s2, 0.0, s2])
    dark = np.array([s2, 0.0, -s2])
    e = math.sin(theta) * zero + math.cos(theta) * bright
    g = math.cos(theta) * zero - math.sin(theta) * bright
    return NvBasis(theta, omega_e, omega_g, D, np.array([e, dark, g]))


def nv_hamiltonian(D: float, delta: float) -> Operator:
    """D S_z^2 + delta S_x."""
    S = qops.spin1_operators()
    return (D * (S.Sz @ S.Sz) + delta * S.Sx).as_hermitian()


def dressed_basis(Delta: float, Omega_p_prime: float) -> tuple[float, float, float]:
    """(alpha, omega_plus, omega_minus) of the microwave-dressed |d>, |g> pair."""
    if Delta == 0 and Omega_p_prime == 0:
        raise DegenerateBasisError("dressed basis undefined for Delta = Omega_p' = 0")
    alpha = 0.5 * math.atan2(Omega_p_prime, Delta)
    w = 0.5 * math.hypot(Delta, Omega_p_prime)
    return alpha, w, -w


def dressed_block(Delta: float, Omega_p_prime: float) -> np.ndarray:
    """2x2 rotating-frame block of the driven |d>, |g> pair."""
    return np.array([[-Delta / 2, 1j * Omega_p_prime / 2], [-1j * Omega_p_prime / 2, Delta / 2]])


def effective_coupling(lam: float, theta: float, alpha: float) -> float:
    """Lambda = lambda cos(theta) cos(alpha)."""
    return lam * math.cos(theta) * math.cos(alpha)


def coupling_map(lam: float, alphas, B0s, D: float, gamma_e: float) -> np.ndarray:
    """Lambda over an (alpha, B_0) grid, shape (len(B0s), len(alphas))."""
    alphas = np.asarray(alphas, dtype=float)
    B0s = np.asarray(B0s, dtype=float)
    theta = 0.5 * np.arctan(2 * gamma_e * B0s / D)
    return lam * np.cos(theta)[:, None] * np.cos(alphas)[None, :]


# -- frames -------------------------------------------------------------------

@dataclass(frozen=True)
class FrameSpec:
    """Derived frame parameters; rates in units chosen by the caller (usually Lambda = 1)."""

    Lambda: float
    delta_m: float
    g_cu: float = 0.0
    delta0: float = 0.0
    alpha: float = 0.0
    theta: float = 0.0
    tag: str = "squeezed"

    def __post_init__(self):
        if self.delta_m <= 0 or abs(self.g_cu) >= self.delta_m:
            raise InstabilityError(
                f"|g_cu| = {abs(self.g_cu)!r} must be below delta_m = {self.delta_m!r}; squeezed frame undefined")

    @property
    def r(self) -> float:
        return 0.5 * math.atanh(self.g_cu / self.delta_m)

    @property
    def Lambda_eff(self) -> float:
        return self.Lambda * math.exp(self.r) / 2

    @property
    def Delta_m(self) -> float:
        return self.delta_m / math.cosh(2 * self.r)

    @property
    def xi(self) -> float:
        return self.Lambda_eff**2 / self.Delta_m

    @property
    def eta(self) -> float:
        return self.Lambda_eff / self.Delta_m

    @property
    def squeeze_constant(self) -> float:
        """Energy offset dropped when moving from H_TO to the squeezed frame."""
        r = self.r
        return self.delta_m * math.sinh(r) ** 2 - 0.5 * self.g_cu * math.sinh(2 * r)

    def as_tag(self, tag: str) -> "FrameSpec":
        return replace(self, tag=tag)


def bogoliubov_frame(delta_m: float, g_cu: float, Lambda: float, delta0: float = 0.0) -> FrameSpec:
    return FrameSpec(Lambda=Lambda, delta_m=delta_m, g_cu=g_cu, delta0=delta0)


def frame_from_r(r: float, Lambda: float = 1.0, *, delta_m: float | None = None,
                 Delta_m: float | None = None, delta0: float = 0.0) -> FrameSpec:
    """Frame with squeezing r and either the lab detuning delta_m or the squeezed-frame detuning Delta_m."""
    if (delta_m is None) == (Delta_m is None):
        raise ValueError("give exactly one of delta_m, Delta_m")
    if delta_m is None:
        delta_m = Delta_m * math.cosh(2 * r)
    return FrameSpec(Lambda=Lambda, delta_m=delta_m, g_cu=delta_m * math.tanh(2 * r), delta0=delta0)


# -- single NV ------------------------------------------------------------------

def single_layout(N: int) -> SpaceLayout:
    return qops.spin_layout() + qops.fock_layout(N)


def _single_ops(N: int):
    lay = single_layout(N)
    P = spin_half_paulis()
    a = embed(fock_annihilation(N), lay, "fock")
    return lay, {k: embed(getattr(P, k), lay, "spin") for k in P._fields}, a


def build_H_TO(frame: FrameSpec, N: int) -> Operator:
    """(delta0/2) sz + delta_m a^dag a + Lambda (a s+ + a^dag s-) - (g_cu/2)(a^2 + a^dag^2)."""
    _, s, a = _single_ops(N)
    ad = a.dag()
    H = (0.5 * frame.delta0) * s["sz"] + frame.delta_m * (ad @ a) \
        + frame.Lambda * (a @ s["sp"] + ad @ s["sm"]) - (0.5 * frame.g_cu) * (a @ a + ad @ ad)
    return H.as_hermitian()


def build_H_RO(frame: FrameSpec, N: int) -> Operator:
    """(delta0/2) sz + Delta_m b^dag b + Lambda_eff (b + b^dag) sx."""
    _, s, b = _single_ops(N)
    bd = b.dag()
    H = (0.5 * frame.delta0) * s["sz"] + frame.Delta_m * (bd @ b) + frame.Lambda_eff * ((b + bd) @ s["sx"])
    return H.as_hermitian()


def build_H_Sq(frame: FrameSpec, N: int) -> Operator:
    """Counter-rotating remainder (Lambda e^{-r}/2)(b - b^dag)(s+ - s-)."""
    _, s, b = _single_ops(N)
    c = frame.Lambda * math.exp(-frame.r) / 2
    return (c * ((b - b.dag()) @ (s["sp"] - s["sm"]))).as_hermitian()


def squeeze_conjugate(op: Operator, r: float, label: str = "fock") -> Operator:
    """S(r) op S(r)^dag with S acting on the Fock factor ``label``."""
    N = op.layout.dim(label)
    S = embed(qops.squeeze(r, N, label), op.layout, label)
    return Operator(S.data @ op.data @ S.data.conj().T, op.layout, op.hermitian)


def restrict_fock(op: Operator, n_keep: int, label: str = "fock") -> np.ndarray:
    """Matrix elements of ``op`` between states with Fock index < n_keep."""
    lay = op.layout
    dims = list(lay.dims)
    k = lay.index(label)
    t = op.data.reshape(dims + dims)
    sl = [slice(None)] * (2 * len(dims))
    sl[k] = sl[k + len(dims)] = slice(0, n_keep)
    sub = t[tuple(sl)]
    d = math.prod(dims) // dims[k] * n_keep
    return sub.reshape(d, d)


# -- operator-level squeezing ----------------------------------------------------

def squeeze_adjoint_matrix(r: float, N: int, margin: int = 3) -> np.ndarray:
    """Matrix of ad_G on span{a, a^dag} for G = r (a^2 - a^dag^2)/2, fitted on the truncation-safe block."""
    a = fock_annihilation(N).data
    ad = a.conj().T
    G = 0.5 * r * (a @ a - ad @ ad)
    keep = N - margin
    basis = np.stack([a[:keep, :keep].ravel(), ad[:keep, :keep].ravel()], axis=1)
    cols = []
    for X in (a, ad):
        comm = (G @ X - X @ G)[:keep, :keep].ravel()
        coef, *_ = np.linalg.lstsq(basis, comm, rcond=None)
        cols.append(coef)
    return np.array(cols).T


def squeezed_couplings(frame: FrameSpec, N: int = 100, margin: int = 4) -> dict[str, float]:
    """Extract squeezed-frame coefficients of S H_TO S^dag at truncation N.

    The Bogoliubov map is obtained from the adjoint action of the squeeze
    generator (exponentiated as a 2x2 matrix), substituted into H_TO and
    projected onto the operator monomials on the truncation-safe block.
    """
    K = squeeze_adjoint_matrix(frame.r, N)
    M = qops.expm(Operator(K)).data
    lay, s, b = _single_ops(N)
    bd = b.dag()
    a_new = M[0, 0] * b + M[1, 0] * bd
    ad_new = a_new.dag()
    H = (0.5 * frame.delta0) * s["sz"] + frame.delta_m * (ad_new @ a_new) \
        + frame.Lambda * (a_new @ s["sp"] + ad_new @ s["sm"]) \
        - (0.5 * frame.g_cu) * (a_new @ a_new + ad_new @ ad_new)
    keep = N - margin
    terms = {
        "Lambda_eff": (b + bd) @ s["sx"],
        "Lambda_sq": (b - bd) @ (s["sp"] - s["sm"]),
        "Delta_m": bd @ b,
        "pair_sum": b @ b + bd @ bd,
        "pair_diff": b @ b - bd @ bd,
        "delta0_half": s["sz"],
        "constant": qops.identity(lay),
    }
    A = np.stack([restrict_fock(T, keep).ravel() for T in terms.values()], axis=1)
    coef, *_ = np.linalg.lstsq(A, restrict_fock(H, keep).ravel(), rcond=None)
    out = dict(zip(terms, coef))
    resid = restrict_fock(H, keep).ravel() - A @ coef
    return {
        "Lambda_eff": out["Lambda_eff"].real,
        "Lambda_sq": out["Lambda_sq"].real,
        "Delta_m": out["Delta_m"].real,
        "pair": abs(out["pair_sum"]) + abs(out["pair_diff"]),
        "delta0": 2 * out["delta0_half"].real,
        "constant": out["constant"].real,
        "residual": float(np.max(np.abs(resid))),
    }


# -- time-dependent squeezing ----------------------------------------------------

class TimeDependentHamiltonian:
    """H(t) = sum_k c_k(t) H_k with fixed operators H_k and scalar coefficient callables."""

    def __init__(self, terms: list[tuple[Operator, Callable[[float], complex]]]):
        if not terms:
            raise ValueError("need at least one term")
        self.terms = terms
        self.layout = terms[0][0].layout

    def coefficients(self, t: float) -> list[complex]:
        return [c(t) for _, c in self.terms]

    def __call__(self, t: float) -> Operator:
        data = sum(c * op.data for (op, _), c in zip(self.terms, self.coefficients(t)))
        return Operator(data, self.layout, hermitian=True)

    def __add__(self, other: "TimeDependentHamiltonian") -> "TimeDependentHamiltonian":
        return TimeDependentHamiltonian(self.terms + other.terms)


@dataclass(frozen=True)
class TimeDependentFrame:
    r_schedule: Callable[[float], float]
    delta_m: float
    Lambda: float
    delta0: float = 0.0
    fd_step: float = 1e-5

    def r(self, t: float) -> float:
        return float(self.r_schedule(t))

    def rdot(self, t: float) -> float:
        h = self.fd_step * max(1.0, abs(t))
        return (self.r(t + h) - self.r(t - h)) / (2 * h)

    def Lambda_eff(self, t: float) -> float:
        return self.Lambda * math.exp(self.r(t)) / 2

    def Delta_m(self, t: float) -> float:
        return self.delta_m / math.cosh(2 * self.r(t))

    def Lambda_sq(self, t: float) -> float:
        return self.Lambda * math.exp(-self.r(t)) / 2

    def g_cu(self, t: float) -> float:
        return self.delta_m * math.tanh(2 * self.r(t))

    def H_TO(self, N: int) -> TimeDependentHamiltonian:
        """Lab-frame Hamiltonian with pump g_cu(t) = delta_m tanh 2r(t)."""
        _, s, a = _single_ops(N)
        ad = a.dag()
        terms = [(((ad @ a) * self.delta_m + (a @ s["sp"] + ad @ s["sm"]) * self.Lambda).as_hermitian(),
                  lambda t: 1.0),
                 ((-0.5 * (a @ a + ad @ ad)).as_hermitian(), self.g_cu)]
        if self.delta0:
            terms.append(((0.5 * self.delta0) * s["sz"], lambda t: 1.0))
        return TimeDependentHamiltonian(terms)

    def H_RO(self, N: int) -> TimeDependentHamiltonian:
        _, s, b = _single_ops(N)
        bd = b.dag()
        terms = [((bd @ b).as_hermitian(), self.Delta_m),
                 (((b + bd) @ s["sx"]).as_hermitian(), self.Lambda_eff)]
        if self.delta0:
            terms.append(((0.5 * self.delta0) * s["sz"], lambda t: 1.0))
        return TimeDependentHamiltonian(terms)

    def H_Sq(self, N: int) -> TimeDependentHamiltonian:
        _, s, b = _single_ops(N)
        return TimeDependentHamiltonian([(((b - b.dag()) @ (s["sp"] - s["sm"])).as_hermitian(), self.Lambda_sq)])

    def H_Err(self, N: int) -> TimeDependentHamiltonian:
        """Frame-motion term i (rdot/2)(b^2 - b^dag^2) of the moving squeezed frame."""
        _, _, b = _single_ops(N)
        bd = b.dag()
        gen = (1j * 0.5 * (b @ b - bd @ bd)).as_hermitian()
        return TimeDependentHamiltonian([(gen, self.rdot)])

    def H_full(self, N: int) -> TimeDependentHamiltonian:
        return self.H_RO(N) + self.H_Sq(N) + self.H_Err(N)


def build_time_dependent_frame(r_schedule, delta_m: float, Lambda: float, delta0: float = 0.0):
    """Return (H_RO, H_Sq, H_Err) builders: each maps N to a time-dependent Hamiltonian."""
    fr = TimeDependentFrame(r_schedule, delta_m, Lambda, delta0)
    return fr.H_RO, fr.H_Sq, fr.H_Err


def tanh_ramp(r_max: float, Lambda: float = 1.0) -> Callable[[float], float]:
    """r(t) = r_max tanh(Lambda t / 2)."""
    def r(t):
        return r_max * math.tanh(Lambda * t / 2)
    return r


# -- two NVs --------------------------------------------------------------------

def two_nv_layout(N: int) -> SpaceLayout:
    return qops.spin_layout("spin1") + qops.spin_layout("spin2") + qops.fock_layout(N)


def _two_ops(N: int):
    lay = two_nv_layout(N)
    P1 = spin_half_paulis("spin1")
    P2 = spin_half_paulis("spin2")
    b = embed(fock_annihilation(N), lay, "fock")
    s1 = {k: embed(getattr(P1, k), lay, "spin1") for k in P1._fields}
    s2 = {k: embed(getattr(P2, k), lay, "spin2") for k in P2._fields}
    return lay, s1, s2, b


def _check_eta(frame: FrameSpec):
    eta = frame.eta
    if eta >= 1:
        raise SWValidityError(f"Lamb-Dicke parameter eta = {eta:.3g} >= 1")
    if eta >= SW_WARN_ETA:
        warnings.warn(f"eta = {eta:.3g} >= {SW_WARN_ETA}: phonon elimination is not accurate",
                      SWValidityWarning, stacklevel=3)


def build_two_nv(frame: FrameSpec, N: int) -> Operator:
    """(delta0/2)(sz1 + sz2) + Delta_m b^dag b + Lambda_eff (b + b^dag)(sx1 - sx2)."""
    _, s1, s2, b = _two_ops(N)
    bd = b.dag()
    H = (0.5 * frame.delta0) * (s1["sz"] + s2["sz"]) + frame.Delta_m * (bd @ b) \
        + frame.Lambda_eff * ((b + bd) @ (s1["sx"] - s2["sx"]))
    return H.as_hermitian()


def sw_generator(frame: FrameSpec, N: int) -> Operator:
    """S = eta (b^dag - b)(sx1 - sx2); exp(S) H exp(-S) removes the linear coupling."""
    _, s1, s2, b = _two_ops(N)
    return frame.eta * ((b.dag() - b) @ (s1["sx"] - s2["sx"]))


def sw_effective(frame: FrameSpec, N: int) -> Operator:
    """Phonon-eliminated Hamiltonian Delta_m b^dag b - xi (sx1 - sx2)^2 (+ detuning terms)."""
    _check_eta(frame)
    _, s1, s2, b = _two_ops(N)
    X = s1["sx"] - s2["sx"]
    H = (0.5 * frame.delta0) * (s1["sz"] + s2["sz"]) + frame.Delta_m * (b.dag() @ b) - frame.xi * (X @ X)
    return H.as_hermitian()


def ising(frame: FrameSpec) -> Operator:
    """xi (sx1 - sx2)^2 on the two spins."""
    _check_eta(frame)
    P1 = spin_half_paulis("spin1")
    P2 = spin_half_paulis("spin2")
    lay = SpaceLayout.of(("spin1", 2), ("spin2", 2))
    X = embed(P1.sx, lay, "spin1") - embed(P2.sx, lay, "spin2")
    return (frame.xi * (X @ X)).as_hermitian()


def swap_parity(N: int) -> Operator:
    """Exchange of the two NVs combined with b -> -b; a symmetry of the two-NV Hamiltonian."""
    swap = np.zeros((4, 4))
    for i in range(2):
        for j in range(2):
            swap[2 * j + i, 2 * i + j] = 1
    return Operator(np.kron(swap, qops.parity(N).data), two_nv_layout(N))


def flip_parity(N: int) -> Operator:
    """sigma_x sign flip on both NVs (conjugation by sz1 sz2) combined with b -> -b."""
    sz = np.diag([1.0, -1.0])
    return Operator(np.kron(np.kron(sz, sz), qops.parity(N).data), two_nv_layout(N))


# -- cooperativity ----------------------------------------------------------------

def enhancement_factor(r) -> np.ndarray:
    """Lambda_eff / Lambda = e^r / 2."""
    return np.exp(np.asarray(r, dtype=float)) / 2


# -- parameter chain from SI inputs ----------------------------------------------

@dataclass(frozen=True)
class CouplingChain:
    """NV mixing angle, dressing angle and the resulting spin-phonon couplings (rad/s)."""

    theta: float
    alpha: float
    lam: float
    Lambda: float

    def Lambda_eff(self, r: float) -> float:
        return self.Lambda * math.exp(r) / 2


def coupling_chain(params) -> CouplingChain:
    """Evaluate theta(B_0), alpha(Delta, Omega_p cos theta), lambda and Lambda for SI ``params``."""
    from .magnetolev import mixing_angle, spin_magnet_coupling

    theta = mixing_angle(params)
    alpha, _, _ = dressed_basis(params.mw_detuning, params.Omega_p * math.cos(theta))
    lam = float(spin_magnet_coupling(params))
    return CouplingChain(theta, alpha, lam, effective_coupling(lam, theta, alpha))
