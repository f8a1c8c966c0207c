"""Master-equation dynamics, phase-space propagators and observables."""

from .gate import gate_channels, gate_phase, gate_time, gate_unitary, run_gate, truth_table, x_basis_states
from .master import CollapseChannel, Trajectory, evolve_master, unitary_evolve
from .observables import (EnhancementReport, cat_fidelity, cat_target, cooperativity, enhancement_report,
                          phonon_vacuum_fidelity, wigner, wigner_grid)
from .phase import (PhaseSpacePath, bare_loop, cat_displacement, cat_displacement_ode, displacement_path,
                    geometric_phase, static_loop)

__all__ = [
    "CollapseChannel", "Trajectory", "evolve_master", "unitary_evolve",
    "PhaseSpacePath", "bare_loop", "displacement_path", "geometric_phase", "cat_displacement", "cat_displacement_ode",
    "static_loop", "wigner", "wigner_grid", "cat_target", "cat_fidelity", "cooperativity",
    "enhancement_report", "EnhancementReport", "phonon_vacuum_fidelity",
    "gate_unitary", "gate_time", "gate_phase", "run_gate", "gate_channels", "truth_table", "x_basis_states",
]
