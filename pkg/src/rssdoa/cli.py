"""Bounds and Monte Carlo sweeps for joint RSS/DoA transmitter localization.

Exit codes: 0 success, 2 usage or input errors, 3 when the requested quantity
cannot be computed (singular information, failed sweep tables).
"""
from __future__ import annotations

import argparse
import configparser
import dataclasses
import logging
import math
import re
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__, asymptotic
from .channel import ChannelParams, dbm_to_watts
from .doa import ArrayParams
from .errors import LocalizationError, UnlocalizableError
from .experiments import Params, run_figure_suite
from .fim import bound_fim, crb_from_fim
from .scenario import (PlacementDistribution, ScenarioParseError, format_scenario, read_scenario,
                       sample_uniform_placement)

EXIT_OK, EXIT_USAGE, EXIT_INFEASIBLE = 0, 2, 3

_ANGLE = re.compile(r"^\s*([0-9.eE+-]*)\s*\*?\s*pi\s*(?:/\s*([0-9.eE+]+))?\s*$")


def parse_angle(text: str) -> float:
    """Radians from ``"1.047"``, ``"pi/3"``, ``"5*pi/12"`` or ``"2pi"``."""
    m = _ANGLE.match(text)
    if m is None:
        return float(text)
    num = float(m.group(1)) if m.group(1) not in ("", "+", "-") else float(m.group(1) + "1")
    den = float(m.group(2)) if m.group(2) else 1.0
    return num * math.pi / den


# section -> key -> (field name, converter)
_KEYS = {
    "channel": {"p_t_dbm": ("p_t", lambda s: float(dbm_to_watts(float(s)))),
                "c0": ("c0", float), "gamma": ("gamma", float),
                "sigma_s_db": ("sigma_s", float), "x_c_m": ("x_c", float)},
    "array": {"n_s": ("n_s", int), "n_a": ("n_a", int), "kappa": ("kappa", parse_angle),
              "p_m_dbm": ("p_m", lambda s: float(dbm_to_watts(float(s))))},
    "placement": {"radius_m": ("radius", float), "guard_radius_m": ("guard_radius", float),
                  "theta_t_rad": ("theta_t", parse_angle), "n_sensors": ("n_sensors", int)},
    "sweep": {"placements": ("placements", int), "trials": ("trials", int),
              "seed": ("seed", int), "jobs": ("jobs", int)},
}


class ConfigError(ValueError):
    pass


@dataclasses.dataclass(frozen=True)
class Config:
    params: Params = dataclasses.field(default_factory=Params)
    placements: int = 100
    trials: int = 200
    seed: int = 0
    jobs: int = 1


def load_config(path=None) -> Config:
    """Read an INI config; no path gives the defaults."""
    if path is None:
        return Config()
    cp = configparser.ConfigParser(interpolation=None)
    try:
        with open(path) as fh:
            cp.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from exc
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    values = {s: {} for s in _KEYS}
    for section in cp.sections():
        if section not in _KEYS:
            raise ConfigError(f"{path}: unknown section [{section}]")
        for key, raw in cp.items(section):
            if key not in _KEYS[section]:
                raise ConfigError(f"{path}: unknown key {key!r} in [{section}]")
            target, conv = _KEYS[section][key]
            try:
                values[section][target] = conv(raw)
            except ValueError as exc:
                raise ConfigError(f"{path}: bad value for {section}.{key}: {raw!r}") from exc
    n = values["placement"].pop("n_sensors", Params().n_sensors)
    try:
        params = Params(ChannelParams(**values["channel"]), ArrayParams(**values["array"]),
                        PlacementDistribution(**values["placement"]), n)
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return Config(params, **values["sweep"])


# -- commands -----------------------------------------------------------------

def _print_matrix(name, m, out):
    print(f"{name} =", file=out)
    for row in np.atleast_2d(m):
        print("  " + "  ".join(f"{v: .6e}" for v in row), file=out)


def cmd_bound(args, cfg: Config, out) -> int:
    scenario = read_scenario(args.scenario)
    p = cfg.params
    res = crb_from_fim(bound_fim(args.model, p.channel, p.array, scenario))
    print(f"model = {args.model}", file=out)
    print(f"sensors = {scenario.n}", file=out)
    _print_matrix("fim_per_m2", res.fim, out)
    _print_matrix("covariance_bound_m2", res.covariance_bound, out)
    print(f"condition_number = {res.condition_number:.4g}", file=out)
    print(f"rmse_bound_m = {res.rmse_bound:.4g}", file=out)
    return EXIT_OK


def cmd_asymptotic(args, cfg: Config, out) -> int:
    p = cfg.params
    dist, ch, arr = p.placement, p.channel, p.array
    m = asymptotic.moments(dist, ch, arr)
    print(f"n = {args.n}", file=out)
    print(f"rss_rmse_m = {asymptotic.asymptotic_rmse_rss(dist, ch, args.n):.4g}", file=out)
    print(f"joint_rmse_m = {asymptotic.asymptotic_rmse_joint(dist, ch, arr, args.n):.4g}",
          file=out)
    print(f"f_phi_per_m2 = {m.f_phi:.6e}", file=out)
    print(f"f_theta_phi_per_m2 = {m.f_theta_phi:.6e}", file=out)
    print(f"e_fn_per_m2 = {m.e_fn:.6e}", file=out)
    print(f"e_fn2_per_m4 = {m.e_fn2:.6e}", file=out)
    return EXIT_OK


def cmd_required_n(args, cfg: Config, out) -> int:
    p = cfg.params
    dist, ch, arr = p.placement, p.channel, p.array
    if args.delta0 is not None:
        d_rss = d_joint = args.delta0
    else:
        d_rss = args.rss_mult * asymptotic.mean_fim_norm("rss", dist, ch)
        d_joint = args.joint_mult * asymptotic.mean_fim_norm("joint", dist, ch, arr)
    rss = asymptotic.required_n_rss(dist, ch, d_rss, args.eta)
    joint = asymptotic.required_n_joint(dist, ch, arr, d_joint, args.eta)
    print(f"eta = {args.eta:g}", file=out)
    print(f"rss_delta0_per_m2 = {d_rss:.6e}", file=out)
    print(f"rss_required_n = {rss.count}", file=out)
    print(f"rss_required_n_raw = {rss.raw:.6g}", file=out)
    print(f"joint_delta0_per_m2 = {d_joint:.6e}", file=out)
    print(f"joint_required_n = {joint.count}", file=out)
    print(f"joint_required_n_raw = {joint.raw:.6g}", file=out)
    return EXIT_OK


def cmd_sweep(args, cfg: Config, out) -> int:
    placements = args.placements or cfg.placements
    trials = args.trials or cfg.trials
    seed = cfg.seed if args.seed is None else args.seed
    jobs = args.jobs or cfg.jobs
    try:
        Path(args.out_dir).mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        print(f"error: cannot create {args.out_dir}: {exc.strerror}", file=sys.stderr)
        return EXIT_USAGE
    man = run_figure_suite(args.out_dir, seed, placements, trials, jobs,
                           base=cfg.params, only=args.only)
    for name, path in sorted(man.files.items()):
        print(f"{name}: ok {path}", file=out)
    for name, err in sorted(man.errors.items()):
        print(f"{name}: FAILED {err}", file=out)
    print(f"manifest: {man.path}", file=out)
    return EXIT_OK if man.ok else EXIT_INFEASIBLE


def cmd_gen_scenario(args, cfg: Config, out) -> int:
    n = args.n or cfg.params.n_sensors
    seed = cfg.seed if args.seed is None else args.seed
    scenario = sample_uniform_placement(cfg.params.placement, n, np.random.default_rng(seed))
    text = format_scenario(scenario)
    if args.output:
        Path(args.output).write_text(text)
    else:
        out.write(text)
    return EXIT_OK


# -- parser -------------------------------------------------------------------

def _positive_int(s):
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rssdoa", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-c", "--config", help="INI configuration file")
    common.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bound", parents=[common],
                       help="CRB of a fixed placement read from a scenario file")
    p.add_argument("scenario")
    p.add_argument("--model", choices=("rss", "optimal", "music"), default="rss",
                   help="rss only, or joint with the optimal or MUSIC DoA variance")
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("asymptotic", parents=[common],
                       help="closed-form bounds for uniform random placement")
    p.add_argument("--n", type=_positive_int)
    p.set_defaults(func=cmd_asymptotic)

    p = sub.add_parser("required-n", parents=[common],
                       help="node count for the asymptotic bound to hold")
    p.add_argument("--eta", type=float, default=0.15,
                   help="allowed deviation probability in (0, 1]")
    p.add_argument("--delta0", type=float,
                   help="absolute deviation threshold (1/m^2); overrides the multipliers")
    p.add_argument("--rss-mult", type=float, default=1.0,
                   help="delta0 as a multiple of the mean RSS information norm")
    p.add_argument("--joint-mult", type=float, default=2.0,
                   help="delta0 as a multiple of the mean joint information norm")
    p.set_defaults(func=cmd_required_n)

    p = sub.add_parser("sweep", parents=[common], help="write all figure tables")
    p.add_argument("out_dir")
    p.add_argument("--placements", type=_positive_int)
    p.add_argument("--trials", type=_positive_int)
    p.add_argument("--seed", type=int)
    p.add_argument("--jobs", type=_positive_int)
    p.add_argument("--only", nargs="+", metavar="TABLE", help="e.g. fig01 fig04")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("gen-scenario", parents=[common],
                       help="draw a random placement and write it as a scenario file")
    p.add_argument("--n", type=_positive_int)
    p.add_argument("--seed", type=int)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_gen_scenario)
    return ap


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.command == "asymptotic" and args.n is None:
        ap.exit(EXIT_USAGE, "rssdoa asymptotic: error: missing --n\n")
    if args.command == "required-n":
        if not 0.0 < args.eta <= 1.0:
            ap.exit(EXIT_USAGE, "rssdoa required-n: error: --eta must lie in (0, 1]\n")
        if args.delta0 is not None and not args.delta0 > 0:
            ap.exit(EXIT_USAGE, "rssdoa required-n: error: --delta0 must be positive\n")
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config)
        with warnings.catch_warnings():
            if not args.verbose:
                warnings.simplefilter("ignore", UserWarning)
            return args.func(args, cfg, out)
    except ScenarioParseError as exc:
        print(f"error: {args.scenario}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ConfigError, FileNotFoundError, IsADirectoryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except UnlocalizableError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except LocalizationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE


if __name__ == "__main__":
    sys.exit(main())
