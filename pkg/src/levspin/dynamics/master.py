"""Lindblad master-equation integration with per-sample diagnostics."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np
from scipy.integrate import DOP853, RK45

from ..errors import DomainError, IntegrationError
from ..models import TimeDependentHamiltonian
from ..qops import DensityMatrix, Operator, SpaceLayout

log = logging.getLogger(__name__)

TRACE_TOL = 1e-8
POSITIVITY_TOL = 1e-6

_METHODS = {"DOP853": DOP853, "RK45": RK45}


@dataclass(frozen=True)
class CollapseChannel:
    """Lindblad channel rate * D[operator]."""

    operator: Operator
    rate: float
    label: str = ""

    def __post_init__(self):
        if not self.rate >= 0:
            raise DomainError(f"collapse rate must be >= 0, got {self.rate!r}")


@dataclass
class Trajectory:
    times: np.ndarray
    layout: SpaceLayout
    states: np.ndarray | None
    expect: dict[str, np.ndarray]
    trace_deviation: np.ndarray
    min_eigenvalue: np.ndarray
    meta: dict = field(default_factory=dict)

    @property
    def max_trace_deviation(self) -> float:
        return float(np.max(self.trace_deviation)) if self.trace_deviation.size else 0.0

    @property
    def min_eig(self) -> float:
        finite = self.min_eigenvalue[np.isfinite(self.min_eigenvalue)]
        return float(np.min(finite)) if finite.size else 0.0

    @property
    def flagged(self) -> bool:
        return self.max_trace_deviation >= TRACE_TOL or self.min_eig < -POSITIVITY_TOL

    def state(self, i: int) -> DensityMatrix:
        if self.states is None:
            raise ValueError("trajectory was run with store_states=False")
        return DensityMatrix(self.states[i], self.layout, validate=False)

    @property
    def final(self) -> DensityMatrix:
        return self.state(-1)


Observable = Operator | Callable[[float, np.ndarray], float]


def _hamiltonian_evaluator(H, dim):
    """Return (static_data or None, callable t -> data)."""
    if isinstance(H, Operator):
        return H.data, None
    if isinstance(H, TimeDependentHamiltonian):
        mats = [op.data for op, _ in H.terms]
        coeffs = [c for _, c in H.terms]

        def h_of_t(t):
            out = np.zeros((dim, dim), dtype=complex)
            for m, c in zip(mats, coeffs):
                out += c(t) * m
            return out
        return None, h_of_t
    if callable(H):
        def h_of_t(t):
            h = H(t)
            return h.data if isinstance(h, Operator) else np.asarray(h)
        return None, h_of_t
    raise TypeError(f"unsupported Hamiltonian type {type(H).__name__}")


def evolve_master(rho0: DensityMatrix, H, channels=(), t_grid=None, *, rtol: float = 1e-8,
                  atol: float = 1e-10, e_ops: Mapping[str, Observable] | None = None,
                  store_states: bool = True, check_positivity: bool = True, method: str = "DOP853",
                  max_step: float = np.inf, meta: dict | None = None) -> Trajectory:
    """Integrate d rho/dt = -i[H, rho] + sum_k rate_k (L rho L^dag - {L^dag L, rho}/2).

    ``H`` is a static :class:`Operator`, a :class:`TimeDependentHamiltonian`
    or any callable ``t -> Operator``. States are sampled on ``t_grid`` from
    the integrator's dense output, so the step size is chosen by the error
    control alone.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or t_grid.size < 1 or np.any(np.diff(t_grid) <= 0):
        raise ValueError("t_grid must be a strictly increasing 1-D array")
    d = rho0.dim
    e_ops = dict(e_ops or {})
    static_H, h_of_t = _hamiltonian_evaluator(H, d)

    nonherm = np.zeros((d, d), dtype=complex)
    jumps_diag, jumps_full = [], []
    for ch in channels:
        if ch.operator.dim != d:
            raise DomainError(f"channel {ch.label!r} dimension {ch.operator.dim} != {d}")
        if ch.rate == 0:
            continue
        L = ch.operator.data
        nonherm += ch.rate * (L.conj().T @ L)
        if np.count_nonzero(L - np.diag(np.diag(L))) == 0:
            l = np.diag(L)
            jumps_diag.append(ch.rate * np.outer(l, l.conj()))
        else:
            jumps_full.append((ch.rate, L, L.conj().T))
    jump_diag = sum(jumps_diag) if jumps_diag else None
    heff_static = None if static_H is None else static_H - 0.5j * nonherm

    def rhs(t, y):
        rho = y.reshape(d, d)
        Heff = heff_static if heff_static is not None else h_of_t(t) - 0.5j * nonherm
        A = -1j * (Heff @ rho)
        out = A + A.conj().T
        if jump_diag is not None:
            out += jump_diag * rho
        for rate, L, Ld in jumps_full:
            out += rate * (L @ rho @ Ld)
        return out.ravel()

    op_data = {k: v.data for k, v in e_ops.items() if isinstance(v, Operator)}
    n = t_grid.size
    states = np.empty((n, d, d), dtype=complex) if store_states else None
    expect = {k: np.empty(n) for k in e_ops}
    tr_dev = np.empty(n)
    min_eig = np.full(n, np.nan)

    def record(i, t, y):
        rho = y.reshape(d, d)
        if store_states:
            states[i] = rho
        tr_dev[i] = abs(np.trace(rho).real - 1)
        if check_positivity:
            min_eig[i] = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))[0]
        for k, obs in e_ops.items():
            if k in op_data:
                expect[k][i] = np.einsum("ij,ji->", rho, op_data[k]).real
            else:
                expect[k][i] = float(obs(t, rho))

    t0 = float(t_grid[0])
    y0 = np.array(rho0.data, dtype=complex).ravel()
    record(0, t0, y0)
    nfev = nsteps = 0
    if n > 1:
        solver_cls = _METHODS[method]
        solver = solver_cls(rhs, t0, y0, float(t_grid[-1]), rtol=rtol, atol=atol, max_step=max_step)
        i = 1
        while i < n:
            msg = solver.step()
            nsteps += 1
            if solver.status == "failed":
                raise IntegrationError(f"integration failed at t={solver.t!r}: {msg}")
            interp = None
            while i < n and t_grid[i] <= solver.t:
                if t_grid[i] == solver.t:
                    y = solver.y
                else:
                    if interp is None:
                        interp = solver.dense_output()
                    y = interp(t_grid[i])
                record(i, float(t_grid[i]), y)
                i += 1
        nfev = solver.nfev
    info = dict(meta or {})
    info.update(rtol=rtol, atol=atol, method=method, nfev=int(nfev), nsteps=int(nsteps),
                dims=list(rho0.layout.dims))
    traj = Trajectory(t_grid, rho0.layout, states, expect, tr_dev, min_eig, info)
    if traj.flagged:
        log.warning("master-equation run flagged: trace deviation %.3g, min eigenvalue %.3g",
                    traj.max_trace_deviation, traj.min_eig)
    return traj


def unitary_evolve(psi0, H: Operator, t: float) -> np.ndarray:
    """exp(-i H t) psi0 for a static Hamiltonian (closed-system oracle)."""
    w, V = np.linalg.eigh(H.data)
    return V @ (np.exp(-1j * w * t) * (V.conj().T @ np.asarray(psi0, dtype=complex)))
