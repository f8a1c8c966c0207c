"""Geometric two-qubit phase gate mediated by the squeezed phonon."""

from __future__ import annotations

import math

import numpy as np

from ..errors import DomainError
from ..models import FrameSpec, build_two_nv, two_nv_layout
from ..qops import DensityMatrix, Operator, SpaceLayout, embed, fock_annihilation, partial_trace, spin_half_paulis
from .master import CollapseChannel, Trajectory, evolve_master

# Ising couplings eta_ij of (sx1 - sx2)^2 = sum_ij eta_ij sx_i sx_j.
ETA_IJ = np.array([[1.0, -1.0], [-1.0, 1.0]])

SPIN_LAYOUT = SpaceLayout.of(("spin1", 2), ("spin2", 2))


def gate_time(frame: FrameSpec) -> float:
    """One phonon loop, tau = 2 pi / Delta_m."""
    if frame.Delta_m <= 0:
        raise DomainError("gate needs Delta_m > 0")
    return 2 * math.pi / frame.Delta_m


def gate_phase(frame: FrameSpec) -> float:
    """Geometric phase per loop, 2 pi (Lambda_eff / Delta_m)^2."""
    return 2 * math.pi * frame.eta**2


def gate_unitary(frame: FrameSpec, sign: int = -1) -> Operator:
    """exp(sign i 2 pi eta^2 sum_ij eta_ij sx_i sx_j) on the two spins.

    The default sign is the nominal gate. The two-NV Hamiltonian itself
    realises ``sign=+1``: eliminating the phonon leaves -xi (sx1 - sx2)^2.
    """
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    P1, P2 = spin_half_paulis("spin1"), spin_half_paulis("spin2")
    sx = [embed(P1.sx, SPIN_LAYOUT, "spin1").data, embed(P2.sx, SPIN_LAYOUT, "spin2").data]
    G = sum(ETA_IJ[i, j] * sx[i] @ sx[j] for i in range(2) for j in range(2))
    w, V = np.linalg.eigh(G)
    U = (V * np.exp(sign * 1j * gate_phase(frame) * w)) @ V.conj().T
    return Operator(U, SPIN_LAYOUT)


def x_basis_states() -> dict[str, np.ndarray]:
    p = np.array([1.0, 1.0]) / math.sqrt(2)
    m = np.array([1.0, -1.0]) / math.sqrt(2)
    return {"++": np.kron(p, p), "+-": np.kron(p, m), "-+": np.kron(m, p), "--": np.kron(m, m)}


def truth_table(U: Operator) -> dict[str, tuple[float, float]]:
    """For each sigma_x product input: (|overlap| with the input, phase relative to the |++> row)."""
    rows = {}
    states = x_basis_states()
    ref = np.vdot(states["++"], U.data @ states["++"])
    for k, psi in states.items():
        amp = np.vdot(psi, U.data @ psi)
        rows[k] = (float(abs(amp)), float(np.angle(amp / ref)))
    return rows


def gate_channels(N: int, kappa: float, gamma1: float, gamma2: float) -> list[CollapseChannel]:
    lay = two_nv_layout(N)
    P1, P2 = spin_half_paulis("spin1"), spin_half_paulis("spin2")
    return [
        CollapseChannel(embed(fock_annihilation(N), lay, "fock"), kappa, "kappa"),
        CollapseChannel(embed(P1.sz, lay, "spin1"), gamma1, "gamma1"),
        CollapseChannel(embed(P2.sz, lay, "spin2"), gamma2, "gamma2"),
    ]


def run_gate(rho0: DensityMatrix, frame: FrameSpec, channels=(), *, n_samples: int = 201,
             t_final_factor: float = 1.0, rtol: float = 1e-8, atol: float = 1e-10) -> tuple[Trajectory, float, float]:
    """Integrate the two-NV master equation and score the gate at tau = 2 pi / Delta_m.

    The initial spin state (phonon traced out) must be pure; the target is
    the unitary the Hamiltonian realises at tau applied to it. The
    trajectory records ``spin_fidelity`` (to that target) and
    ``phonon_vacuum`` populations; the returned fidelity is evaluated
    exactly at tau.
    """
    N = rho0.layout.dim("fock")
    tau = gate_time(frame)
    spin0 = partial_trace(rho0, ["spin1", "spin2"]).data
    w, V = np.linalg.eigh(spin0)
    if w[-1] < 1 - 1e-9:
        raise DomainError("run_gate needs a pure initial spin state")
    target = gate_unitary(frame, sign=+1).data @ V[:, -1]

    def spin_fid(t, rho):
        red = np.einsum("ikjk->ij", rho.reshape(4, N, 4, N))
        return np.real(np.vdot(target, red @ target))

    def vac(t, rho):
        r4 = rho.reshape(4, N, 4, N)
        return np.real(np.einsum("iaia->a", r4)[0])

    t_end = tau * t_final_factor
    grid = np.linspace(0.0, t_end, n_samples)
    if not np.any(np.isclose(grid, tau, rtol=0, atol=1e-14 * tau)):
        grid = np.unique(np.append(grid, tau))
    H = build_two_nv(frame, N)
    traj = evolve_master(rho0, H, channels, grid, rtol=rtol, atol=atol,
                         e_ops={"spin_fidelity": spin_fid, "phonon_vacuum": vac}, store_states=False,
                         meta={"N": N, "frame": frame.tag, "tau": tau})
    k = int(np.argmin(np.abs(grid - tau)))
    return traj, float(traj.expect["spin_fidelity"][k]), tau
