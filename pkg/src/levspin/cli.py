"""Command-line front end.

Exit codes: 0 success with every acceptance flag true, 1 when any flag is
false, 2 for usage or configuration errors.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys

import numpy as np

from . import __version__
from .config import PHYSICAL_KEYS, ENV_OUT, ENV_PARALLELISM, check_output_dir, parse_config
from .errors import ConfigError, LevSpinError
from .magnetolev import PRESETS, current_drive_coupling, spin_magnet_coupling, trap_summary
from .models import coupling_chain
from .scenarios import SCENARIOS, Table, run_all

log = logging.getLogger("levspin")

UNITS_HELP = """
config keys (SI, frequencies in Hz):
  [magnet]     a [m], rho [kg/m^3], Br [T], h_cool [m], h_eq [m],
               theta_cool, phi_cool, theta, phi [rad], g [m/s^2]
  [nv]         d [m], B0 [T], D [Hz], gamma_e [Hz/T]
  [drive]      I0 [A], h_cu [m], Omega_p [Hz], mw_detuning [Hz]
  [simulation] rtol, atol, convergence_tol, n_step, max_fock, parallelism
  [output]     dir
  [scenarios]  select = [...]; [scenarios.<id>] per-scenario options
environment: {out} overrides the output directory, {par} the parallelism.
""".format(out=ENV_OUT, par=ENV_PARALLELISM)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="FILE", help="TOML run configuration")
    common.add_argument("--preset", choices=PRESETS, help="built-in parameter set")
    common.add_argument("--out", metavar="DIR", help="output directory (default: results)")
    common.add_argument("--parallelism", type=int, metavar="N", help="worker processes for scenarios")
    common.add_argument("-q", "--quiet", action="store_true", help="only log warnings")

    p = _Parser(prog="levspin", description="Levitated-micromagnet spin-phonon simulations.",
                epilog=UNITS_HELP, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--version", action="version", version=f"levspin {__version__}")
    sub = p.add_subparsers(dest="command", metavar="command", parser_class=_Parser)
    sub.required = True

    r = sub.add_parser("run", parents=[common], help="run one scenario or all of them")
    r.add_argument("scenario", choices=sorted(SCENARIOS) + ["all"])
    sub.add_parser("trap-summary", parents=[common], help="print stiffness, trap frequency and z0")
    c = sub.add_parser("coupling", parents=[common], help="print the coupling chain")
    c.add_argument("--r", type=float, default=0.0, help="squeezing parameter for Lambda_eff (default 0)")
    s = sub.add_parser("sweep", parents=[common], help="sweep one physical key and tabulate trap and couplings")
    s.add_argument("--param", required=True, metavar="SECTION.KEY", help="e.g. nv.d or magnet.Br")
    s.add_argument("--start", type=float, required=True, help="first value, in the key's config unit")
    s.add_argument("--stop", type=float, required=True, help="last value, in the key's config unit")
    s.add_argument("--num", type=int, default=11, help="number of points (default 11)")
    sub.add_parser("validate-config", parents=[common], help="parse and check a configuration; writes nothing")
    return p


def _config(args):
    return parse_config(args.config, preset_name=args.preset, outdir=args.out, parallelism=args.parallelism)


def _print_table(header, row):
    print(",".join(header))
    print(",".join(repr(float(v)) for v in row))


def _cmd_run(args) -> int:
    cfg = _config(args)
    check_output_dir(cfg.outdir)
    ids = list(cfg.scenarios) if args.scenario == "all" else [args.scenario]
    results = run_all(cfg.physical, cfg.settings, cfg.scenario_options, ids, cfg.outdir)
    ok = True
    for res in results:
        failed = [k for k, v in res.flags.items() if not v and k not in res.informational]
        log.info("%s: %s%s", res.id, "pass" if res.passed else "FAIL",
                 "" if not failed else " (" + ", ".join(failed) + ")")
        ok &= res.passed
    log.info("outputs written to %s", cfg.outdir)
    return 0 if ok else 1


def _cmd_trap(args) -> int:
    cfg = _config(args)
    s = trap_summary(cfg.physical)
    _print_table(["k_ma[N/m]", "f_ma[Hz]", "z0[m]"], [s.k_ma, s.f_ma, s.z0])
    return 0


def _cmd_coupling(args) -> int:
    cfg = _config(args)
    p = cfg.physical.check()
    ch = coupling_chain(p)
    g = current_drive_coupling(p)[1]
    _print_table(["lambda/2pi[Hz]", "theta[rad]", "alpha[rad]", "Lambda/2pi[Hz]", "r[1]", "Lambda_eff/2pi[Hz]",
                  "g_cu/2pi[Hz]"],
                 [ch.lam / (2 * math.pi), ch.theta, ch.alpha, ch.Lambda / (2 * math.pi), args.r,
                  ch.Lambda_eff(args.r) / (2 * math.pi), g.hz])
    return 0


def _cmd_sweep(args) -> int:
    cfg = _config(args)
    try:
        section, key = args.param.split(".")
        fname, unit, scale = PHYSICAL_KEYS[section][key]
    except (ValueError, KeyError):
        raise ConfigError(f"--param must be SECTION.KEY from the config schema, got {args.param!r}") from None
    if args.num < 1:
        raise ConfigError("--num must be >= 1")
    check_output_dir(cfg.outdir)
    xs = np.linspace(args.start, args.stop, args.num)
    rows = []
    for x in xs:
        p = cfg.physical.with_(**{fname: float(x) * scale}).check()
        s = trap_summary(p)
        ch = coupling_chain(p)
        rows.append((x, s.k_ma, s.f_ma, s.z0, spin_magnet_coupling(p).hz, ch.Lambda / (2 * math.pi),
                     current_drive_coupling(p)[1].hz))
    cols = list(zip(*rows))
    t = Table(f"sweep_{section}_{key}")
    for (sym, u), col in zip(((args.param, unit), ("k_ma", "N/m"), ("f_ma", "Hz"), ("z0", "m"),
                              ("lambda/2pi", "Hz"), ("Lambda/2pi", "Hz"), ("g_cu/2pi", "Hz")), cols):
        t.add(sym, u, col)
    out = cfg.outdir / "sweep"
    out.mkdir(parents=True, exist_ok=True)
    t.write_csv(out / f"{t.name}.csv")
    log.info("wrote %s", out / f"{t.name}.csv")
    return 0


def _cmd_validate(args) -> int:
    cfg = _config(args)
    check_output_dir(cfg.outdir)
    log.info("config ok: preset=%s, scenarios=%s, output=%s", cfg.preset, ",".join(cfg.scenarios), cfg.outdir)
    return 0


COMMANDS = {"run": _cmd_run, "trap-summary": _cmd_trap, "coupling": _cmd_coupling, "sweep": _cmd_sweep,
            "validate-config": _cmd_validate}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except LevSpinError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
