"""Scenario dispatch, parallel execution and replay from a stored parameter record."""

from __future__ import annotations

import logging
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from ..errors import ConfigError
from ..magnetolev import PhysicalParams
from .convergence import SimulationSettings
from .figures import SCENARIOS
from .result import ScenarioResult

log = logging.getLogger("levspin.scenarios")


def run_scenario(scenario: str, physical: PhysicalParams | None = None,
                 settings: SimulationSettings | None = None, options: dict | None = None) -> ScenarioResult:
    if scenario not in SCENARIOS:
        raise ConfigError(f"unknown scenario {scenario!r}; choose from {', '.join(sorted(SCENARIOS))}")
    settings = settings or SimulationSettings()
    t0 = time.perf_counter()
    log.info("running %s", scenario)
    res = SCENARIOS[scenario](physical, settings, **(options or {}))
    log.info("%s finished in %.1f s (%s)", scenario, time.perf_counter() - t0, "pass" if res.passed else "FAIL")
    return res


def _job(args):
    scenario, physical, settings, options = args
    return run_scenario(scenario, physical, settings, options)


def run_all(physical: PhysicalParams | None = None, settings: SimulationSettings | None = None,
            options: dict | None = None, scenarios=None, outdir=None) -> list[ScenarioResult]:
    """Run the selected scenarios (all by default), in parallel when ``settings.parallelism`` > 1.

    Results come back sorted by scenario id whatever the completion order;
    with ``outdir`` each result is written to ``outdir/<id>/``.
    """
    settings = settings or SimulationSettings()
    options = options or {}
    ids = sorted(scenarios or SCENARIOS)
    for s in ids:
        if s not in SCENARIOS:
            raise ConfigError(f"unknown scenario {s!r}")
    jobs = [(s, physical, settings, options.get(s, {})) for s in ids]
    if settings.parallelism > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=min(settings.parallelism, len(jobs))) as pool:
            results = list(pool.map(_job, jobs))
    else:
        results = [_job(j) for j in jobs]
    results.sort(key=lambda r: r.id)
    if outdir is not None:
        for r in results:
            r.write(Path(outdir))
    return results


def replay(record: dict) -> ScenarioResult:
    """Re-run a scenario from the ``params.json`` record it wrote."""
    physical = None if record.get("physical") is None else PhysicalParams(**record["physical"])
    return run_scenario(record["scenario"], physical, SimulationSettings(**record["settings"]),
                        record.get("options", {}))
