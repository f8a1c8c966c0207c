"""Figure reproductions as named, parameterised scenarios with tabular output."""

from .convergence import SimulationSettings, converge, initial_truncation
from .figures import (DEFAULTS, SCENARIOS, fig2_potential, fig3_coupling_map, fig4_rabi, fig5_phase_geometry,
                      fig6_cat, fig7_gate, fig8_feasibility)
from .result import Column, ScenarioResult, Table
from .runner import replay, run_all, run_scenario

__all__ = [
    "SimulationSettings", "converge", "initial_truncation", "DEFAULTS", "SCENARIOS",
    "fig2_potential", "fig3_coupling_map", "fig4_rabi", "fig5_phase_geometry", "fig6_cat", "fig7_gate",
    "fig8_feasibility", "Column", "ScenarioResult", "Table", "replay", "run_all", "run_scenario",
]
