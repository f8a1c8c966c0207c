"""Strict TOML run configuration.

Physical inputs are SI; frequencies are given in Hz and converted to rad/s
here. Unknown sections or keys, wrong types and missing required keys all
raise :class:`ConfigError` naming the key and its unit.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field, fields
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .errors import ConfigError, LevSpinError
from .magnetolev import PRESETS, PhysicalParams, preset
from .scenarios import DEFAULTS, SimulationSettings

ENV_OUT = "LEVSPIN_OUT"
ENV_PARALLELISM = "LEVSPIN_PARALLELISM"

# key -> (PhysicalParams field, unit, scale to SI/angular)
PHYSICAL_KEYS = {
    "magnet": {
        "a": ("a", "m", 1.0),
        "rho": ("rho", "kg/m^3", 1.0),
        "Br": ("B_r", "T", 1.0),
        "h_cool": ("h_cool", "m", 1.0),
        "h_eq": ("h_eq", "m", 1.0),
        "theta_cool": ("theta_cool", "rad", 1.0),
        "phi_cool": ("phi_cool", "rad", 1.0),
        "theta": ("theta", "rad", 1.0),
        "phi": ("phi", "rad", 1.0),
        "g": ("g", "m/s^2", 1.0),
    },
    "nv": {
        "d": ("d", "m", 1.0),
        "B0": ("B_0", "T", 1.0),
        "D": ("D", "Hz", 2 * math.pi),
        "gamma_e": ("gamma_e", "Hz/T", 2 * math.pi),
    },
    "drive": {
        "I0": ("I_0", "A", 1.0),
        "h_cu": ("h_cu", "m", 1.0),
        "Omega_p": ("Omega_p", "Hz", 2 * math.pi),
        "mw_detuning": ("mw_detuning", "Hz", 2 * math.pi),
    },
}

REQUIRED = {"magnet": ("a", "rho", "Br", "h_cool", "h_eq"), "nv": ("d", "B0"), "drive": ("I0", "h_cu")}

SIMULATION_KEYS = {f.name: f.type for f in fields(SimulationSettings)}
SIM_UNITS = {"rtol": "1", "atol": "1", "convergence_tol": "1", "n_step": "Fock levels",
             "max_fock": "Fock levels", "parallelism": "processes"}


@dataclass(frozen=True)
class RunConfig:
    physical: PhysicalParams
    preset: str | None = None
    scenarios: tuple[str, ...] = tuple(sorted(DEFAULTS))
    scenario_options: dict = field(default_factory=dict)
    settings: SimulationSettings = field(default_factory=SimulationSettings)
    outdir: Path = Path("results")


def required_keys() -> list[str]:
    return [f"{sec}.{k} [{PHYSICAL_KEYS[sec][k][1]}]" for sec, keys in REQUIRED.items() for k in keys]


def _number(section, key, value, unit):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{section}.{key} must be a number in {unit}, got {value!r}")
    if not math.isfinite(value):
        raise ConfigError(f"{section}.{key} must be finite ({unit}), got {value!r}")
    return float(value)


def parse_config(path=None, *, text: str | None = None, preset_name: str | None = None,
                 outdir=None, parallelism: int | None = None, env=None) -> RunConfig:
    """Build a RunConfig from a TOML file (or text), then apply env vars and explicit overrides.

    Precedence, lowest first: built-in preset, file values, environment
    variables, keyword overrides (the CLI flags).
    """
    env = os.environ if env is None else env
    data = {}
    if path is not None and text is not None:
        raise ValueError("give either path or text")
    if path is not None:
        try:
            with open(path, "rb") as fh:
                data = tomllib.load(fh)
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}") from None
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"malformed config {path}: {exc}") from None
    elif text is not None:
        try:
            data = tomllib.loads(text)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"malformed config: {exc}") from None

    allowed_top = {"preset", "magnet", "nv", "drive", "simulation", "output", "scenarios"}
    unknown = sorted(set(data) - allowed_top)
    if unknown:
        raise ConfigError(f"unknown top-level key(s): {', '.join(unknown)}; allowed: {', '.join(sorted(allowed_top))}")

    name = preset_name if preset_name is not None else data.get("preset")
    if name is not None and not isinstance(name, str):
        raise ConfigError(f"preset must be a string ({' or '.join(PRESETS)}), got {name!r}")
    if name is not None and name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")

    values = {}
    for section, keys in PHYSICAL_KEYS.items():
        sec = data.get(section, {})
        if not isinstance(sec, dict):
            raise ConfigError(f"[{section}] must be a table")
        for key, value in sec.items():
            if key not in keys:
                allowed = ", ".join(f"{k} [{u}]" for k, (_, u, _) in keys.items())
                raise ConfigError(f"unknown key {section}.{key}; allowed: {allowed}")
            fname, unit, scale = keys[key]
            values[fname] = _number(section, key, value, unit) * scale

    if name is None:
        missing = [f"{sec}.{k} [{PHYSICAL_KEYS[sec][k][1]}]" for sec, ks in REQUIRED.items() for k in ks
                   if PHYSICAL_KEYS[sec][k][0] not in values]
        if missing:
            raise ConfigError("missing required key(s) (or set preset = \"sec5\" / \"fig2\"): " + ", ".join(missing))
        base = None
    else:
        base = preset(name)
    try:
        physical = PhysicalParams(**values) if base is None else base.with_(**values)
    except (TypeError, LevSpinError) as exc:
        raise ConfigError(f"invalid physical parameters: {exc}") from None

    sim = data.get("simulation", {})
    if not isinstance(sim, dict):
        raise ConfigError("[simulation] must be a table")
    sim_values = {}
    for key, value in sim.items():
        if key not in SIMULATION_KEYS:
            raise ConfigError(f"unknown key simulation.{key}; allowed: {', '.join(SIMULATION_KEYS)}")
        want_int = key in ("n_step", "max_fock", "parallelism")
        if want_int and (isinstance(value, bool) or not isinstance(value, int)):
            raise ConfigError(f"simulation.{key} must be an integer ({SIM_UNITS[key]}), got {value!r}")
        sim_values[key] = value if want_int else _number("simulation", key, value, SIM_UNITS[key])

    out = data.get("output", {})
    if not isinstance(out, dict):
        raise ConfigError("[output] must be a table")
    for key in out:
        if key != "dir":
            raise ConfigError(f"unknown key output.{key}; allowed: dir [path]")
    out_dir = out.get("dir", "results")
    if not isinstance(out_dir, str):
        raise ConfigError(f"output.dir must be a path string, got {out_dir!r}")

    if env.get(ENV_OUT):
        out_dir = env[ENV_OUT]
    if env.get(ENV_PARALLELISM):
        try:
            sim_values["parallelism"] = int(env[ENV_PARALLELISM])
        except ValueError:
            raise ConfigError(f"{ENV_PARALLELISM} must be an integer, got {env[ENV_PARALLELISM]!r}") from None
    if outdir is not None:
        out_dir = str(outdir)
    if parallelism is not None:
        sim_values["parallelism"] = parallelism
    settings = SimulationSettings(**sim_values)

    scen = data.get("scenarios", {})
    if not isinstance(scen, dict):
        raise ConfigError("[scenarios] must be a table")
    selected = tuple(sorted(DEFAULTS))
    options = {}
    for key, value in scen.items():
        if key == "select":
            if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
                raise ConfigError("scenarios.select must be a list of scenario ids")
            bad = [v for v in value if v not in DEFAULTS]
            if bad:
                raise ConfigError(f"unknown scenario(s) in scenarios.select: {', '.join(bad)}")
            selected = tuple(sorted(set(value)))
        elif key in DEFAULTS:
            if not isinstance(value, dict):
                raise ConfigError(f"[scenarios.{key}] must be a table")
            extra = sorted(set(value) - set(DEFAULTS[key]))
            if extra:
                raise ConfigError(f"unknown key(s) in [scenarios.{key}]: {', '.join(extra)}; "
                                  f"allowed: {', '.join(sorted(DEFAULTS[key]))}")
            options[key] = dict(value)
        else:
            raise ConfigError(f"unknown key scenarios.{key}; expected 'select' or a scenario id "
                              f"({', '.join(sorted(DEFAULTS))})")

    return RunConfig(physical=physical, preset=name, scenarios=selected, scenario_options=options,
                     settings=settings, outdir=Path(out_dir))


def check_output_dir(path: Path) -> None:
    """Raise ConfigError unless ``path`` exists writable or could be created; never creates it."""
    p = Path(path).resolve()
    probe = p
    while not probe.exists():
        if probe.parent == probe:
            break
        probe = probe.parent
    if probe.exists() and not probe.is_dir():
        raise ConfigError(f"output path {p} is blocked by a file at {probe}")
    if not os.access(probe, os.W_OK):
        raise ConfigError(f"output directory {p} is not writable")
