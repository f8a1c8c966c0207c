"""Simulation settings and Fock-truncation escalation."""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass
from typing import Any, Callable

import numpy as np

from ..errors import ConfigError

log = logging.getLogger("levspin.scenarios")


@dataclass(frozen=True)
class SimulationSettings:
    rtol: float = 1e-8
    atol: float = 1e-10
    convergence_tol: float = 1e-4
    n_step: int = 10
    max_fock: int = 120
    parallelism: int = 1

    def __post_init__(self):
        for k in ("rtol", "atol", "convergence_tol"):
            v = getattr(self, k)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise ConfigError(f"simulation.{k} must be a positive number, got {v!r}")
        for k in ("n_step", "max_fock", "parallelism"):
            v = getattr(self, k)
            if not isinstance(v, int) or isinstance(v, bool) or v < 1:
                raise ConfigError(f"simulation.{k} must be a positive integer, got {v!r}")

    def as_dict(self) -> dict:
        return asdict(self)


def initial_truncation(max_abs_alpha: float) -> int:
    """Starting Fock dimension that holds a coherent state of amplitude ``max_abs_alpha`` with margin."""
    return int(math.ceil(4 * max_abs_alpha**2 + 20))


def converge(run: Callable[[int], tuple[Any, np.ndarray]], N0: int, settings: SimulationSettings,
             label: str = "") -> tuple[Any, dict]:
    """Raise N until the observable moves by less than the tolerance between N and N + n_step.

    ``run(N)`` returns (payload, observable). The payload of the larger
    truncation is returned together with a report; when ``max_fock`` is
    reached first the report says so and ``satisfied`` is false.
    """
    N = min(N0, settings.max_fock - settings.n_step)
    _, prev_obs = run(N)
    history = []
    while True:
        M = N + settings.n_step
        payload, obs = run(M)
        shift = float(np.max(np.abs(np.asarray(obs) - np.asarray(prev_obs))))
        history.append({"N": N, "N_check": M, "shift": shift})
        if shift < settings.convergence_tol:
            return payload, _report(M, N, shift, settings, True, history)
        if M + settings.n_step > settings.max_fock:
            log.warning("%s: truncation not converged at N=%d (shift %.3g)", label, M, shift)
            return payload, _report(M, N, shift, settings, False, history)
        log.info("%s: escalating truncation %d -> %d (shift %.3g)", label, M, M + settings.n_step, shift)
        N, prev_obs = M, obs


def _report(N_used, N_prev, shift, settings, ok, history) -> dict:
    return {"N_used": N_used, "N_compared": N_prev, "shift": shift,
            "tolerance": settings.convergence_tol, "satisfied": ok, "history": history}
