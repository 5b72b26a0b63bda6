"""Seeded parameter sweeps over random placements, written out as CSV tables.

Each sweep point averages over ``placements`` uniform placements. Placement
``i`` is drawn from ``default_rng([master_seed, i])`` and its measurement noise
from ``default_rng([master_seed, i, 1])``, so results do not depend on how
work is split across processes, and every curve at every sweep value sees the
same placements and the same underlying noise draws.
"""
from __future__ import annotations

import dataclasses
import enum
import logging
import math
import subprocess
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, asymptotic
from .channel import ChannelParams
from .doa import ArrayParams
from .errors import LocalizationError
from .fim import bound_fim, crb_from_fim
from .localizers import FAILURE_BUDGET, batch_errors
from .scenario import PlacementDistribution, sample_uniform_placement

log = logging.getLogger(__name__)

CSV_HEADER = "sweep_value,curve,rmse_m,stderr_m,n_ok,n_fail"
_CHUNK = 10


class Parameter(str, enum.Enum):
    N_SENSORS = "n_sensors"
    SIGMA_S = "sigma_s"
    X_C = "x_c"
    N_A = "n_a"
    N_S = "n_s"
    THETA_T = "theta_t"
    R0 = "r0"


BOUND_CURVES = {"rss_crb": "rss", "joint_crb_opt": "optimal", "joint_crb_music": "music"}
ASYMPTOTIC_CURVES = ("asym_rss", "asym_joint")
ALGORITHM_CURVES = ("wcl", "stansfield_opt", "stansfield_music")
CURVES = tuple(BOUND_CURVES) + ASYMPTOTIC_CURVES + ALGORITHM_CURVES


@dataclass(frozen=True)
class Params:
    """Everything needed to simulate one sweep point."""

    channel: ChannelParams = field(default_factory=ChannelParams)
    array: ArrayParams = field(default_factory=ArrayParams)
    placement: PlacementDistribution = field(default_factory=PlacementDistribution)
    n_sensors: int = 15

    def with_value(self, param, value) -> "Params":
        p = Parameter(param)
        if p is Parameter.N_SENSORS:
            return dataclasses.replace(self, n_sensors=int(value))
        if p in (Parameter.SIGMA_S, Parameter.X_C):
            ch = dataclasses.replace(self.channel, **{p.value: float(value)})
            return dataclasses.replace(self, channel=ch)
        if p in (Parameter.N_A, Parameter.N_S):
            arr = dataclasses.replace(self.array, **{p.value: int(value)})
            return dataclasses.replace(self, array=arr)
        key = "theta_t" if p is Parameter.THETA_T else "guard_radius"
        pl = dataclasses.replace(self.placement, **{key: float(value)})
        return dataclasses.replace(self, placement=pl)

    def items(self):
        """Flat ``(key, value)`` pairs for manifests."""
        yield "n_sensors", self.n_sensors
        for prefix, obj in (("channel", self.channel), ("array", self.array),
                            ("placement", self.placement)):
            for f in dataclasses.fields(obj):
                yield f"{prefix}.{f.name}", getattr(obj, f.name)


@dataclass(frozen=True)
class SweepSpec:
    parameter: Parameter
    values: tuple
    curves: tuple
    fixed: Params = field(default_factory=Params)
    placements: int = 100
    noise_trials: int = 200
    master_seed: int = 0
    failure_budget: float = FAILURE_BUDGET

    def __post_init__(self):
        object.__setattr__(self, "parameter", Parameter(self.parameter))
        object.__setattr__(self, "values", tuple(self.values))
        object.__setattr__(self, "curves", tuple(self.curves))
        if not self.values:
            raise ValueError("sweep needs at least one value")
        if list(self.values) != sorted(self.values):
            raise ValueError("sweep values must be sorted")
        unknown = set(self.curves) - set(CURVES)
        if unknown or not self.curves:
            raise ValueError(f"unknown or empty curve set: {sorted(unknown)}")
        if self.placements < 1 or self.noise_trials < 1:
            raise ValueError("placements and noise_trials must be >= 1")
        if self.master_seed < 0:
            raise ValueError("master_seed must be non-negative")


@dataclass(frozen=True)
class SweepRow:
    sweep_value: float
    curve: str
    rmse: float
    stderr: float
    n_ok: int
    n_fail: int
    flagged: bool = False


@dataclass(frozen=True)
class SweepResult:
    spec: SweepSpec
    rows: tuple

    def get(self, value, curve) -> SweepRow:
        for r in self.rows:
            if r.curve == curve and r.sweep_value == value:
                return r
        raise KeyError((value, curve))

    def series(self, curve):
        """``(values, rmse, stderr)`` arrays for one curve."""
        rows = [r for r in self.rows if r.curve == curve]
        return (np.array([r.sweep_value for r in rows]),
                np.array([r.rmse for r in rows]),
                np.array([r.stderr for r in rows]))

    def csv_lines(self, suffix=""):
        for r in self.rows:
            yield (f"{_fmt(r.sweep_value)},{r.curve}{suffix},{_fmt(r.rmse)},"
                   f"{_fmt(r.stderr)},{r.n_ok},{r.n_fail}")

    def to_csv(self) -> str:
        return "\n".join([CSV_HEADER, *self.csv_lines()]) + "\n"


def _fmt(x) -> str:
    x = float(x)
    if x.is_integer() and abs(x) < 1e15:
        return str(int(x))
    return f"{x:.10g}"


# -- per-placement work ------------------------------------------------------

def _placement_values(params: Params, curves, trials, master_seed, index):
    """Per-curve ``(rmse, n_ok, n_fail)`` for placement ``index``."""
    scenario = sample_uniform_placement(params.placement, params.n_sensors,
                                        np.random.default_rng([master_seed, index]))
    out = {}
    for c in curves:
        if c in BOUND_CURVES:
            try:
                val = crb_from_fim(bound_fim(BOUND_CURVES[c], params.channel,
                                             params.array, scenario)).rmse_bound
                out[c] = (val, 1, 0)
            except LocalizationError:
                out[c] = (math.nan, 0, 1)
        elif c in ALGORITHM_CURVES:
            # same stream for every estimator: common random numbers
            rng = np.random.default_rng([master_seed, index, 1])
            try:
                err2 = batch_errors(c, scenario, params.channel, params.array, trials, rng)
            except LocalizationError:
                out[c] = (math.nan, 0, trials)
                continue
            ok = np.isfinite(err2)
            n_ok = int(ok.sum())
            val = float(np.sqrt(err2[ok].mean())) if n_ok else math.nan
            out[c] = (val, n_ok, trials - n_ok)
    return out


def _chunk_worker(task):
    params, curves, trials, master_seed, start, stop = task
    return [_placement_values(params, curves, trials, master_seed, i)
            for i in range(start, stop)]


def _asymptotic_row(value, curve, params: Params) -> SweepRow:
    dist, ch, arr, n = params.placement, params.channel, params.array, params.n_sensors
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            if curve == "asym_rss":
                v = asymptotic.asymptotic_rmse_rss(dist, ch, n)
            else:
                v = asymptotic.asymptotic_rmse_joint(dist, ch, arr, n)
    except (LocalizationError, ValueError, ZeroDivisionError) as exc:
        log.warning("asymptotic curve %s failed at %s: %s", curve, value, exc)
        return SweepRow(value, curve, math.nan, math.nan, 0, 1, True)
    return SweepRow(value, curve, v, 0.0, 1, 0)


def _reduce(value, curve, per_placement, budget) -> SweepRow:
    vals = np.array([p[curve][0] for p in per_placement])
    n_ok = sum(p[curve][1] for p in per_placement)
    n_fail = sum(p[curve][2] for p in per_placement)
    good = vals[np.isfinite(vals)]
    if good.size == 0:
        return SweepRow(value, curve, math.nan, math.nan, n_ok, n_fail, True)
    se = float(good.std(ddof=1) / math.sqrt(good.size)) if good.size > 1 else 0.0
    flagged = n_fail > budget * (n_ok + n_fail)
    if flagged:
        log.warning("%s at %s: %d of %d draws failed", curve, value, n_fail, n_ok + n_fail)
    return SweepRow(value, curve, float(good.mean()), se, n_ok, n_fail, flagged)


def run_sweep(spec: SweepSpec, jobs: int = 1) -> SweepResult:
    """Evaluate every requested curve at every sweep value.

    Failures (unlocalizable placements, failed trials) are counted per point
    and never abort the sweep. Output is identical for any ``jobs``.
    """
    mc_curves = tuple(c for c in spec.curves if c not in ASYMPTOTIC_CURVES)
    points = [spec.fixed.with_value(spec.parameter, v) for v in spec.values]
    tasks = []
    for params in points:
        for start in range(0, spec.placements, _CHUNK):
            tasks.append((params, mc_curves, spec.noise_trials, spec.master_seed,
                          start, min(start + _CHUNK, spec.placements)))
    if not mc_curves:
        chunks = [[] for _ in tasks]
    elif jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            chunks = list(ex.map(_chunk_worker, tasks))
    else:
        chunks = [_chunk_worker(t) for t in tasks]

    per_point = len(range(0, spec.placements, _CHUNK))
    rows = []
    for k, (value, params) in enumerate(zip(spec.values, points)):
        per_placement = [v for ch in chunks[k * per_point:(k + 1) * per_point] for v in ch]
        for curve in spec.curves:
            if curve in ASYMPTOTIC_CURVES:
                rows.append(_asymptotic_row(value, curve, params))
            else:
                rows.append(_reduce(value, curve, per_placement, spec.failure_budget))
    return SweepResult(spec, tuple(rows))


# -- figure suite ------------------------------------------------------------

N_GRID = (10, 20, 30, 40, 50, 60)
N_GRID_LONG = (10, 20, 30, 40, 50, 60, 70, 80, 90, 100)
SIGMA_GRID = (4.0, 6.0, 8.0, 10.0)
XC_GRID = (0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0)
GUARD_RATIOS = (0.1, 0.3, 0.5)
REQUIRED_N_RATIOS = (0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5)
JOINT = ("joint_crb_opt", "stansfield_opt")


def figure_sweeps(base: Params, placements: int, trials: int, seed: int):
    """``{name: [(suffix, SweepSpec), ...]}`` for every Monte Carlo table."""
    def spec(param, values, curves, fixed=base):
        return SweepSpec(param, values, curves, fixed, placements, trials, seed)

    R = base.placement.radius
    figs = {
        "fig01": [("", spec("n_sensors", N_GRID, ("rss_crb", "wcl")))],
        "fig02": [("", spec("n_sensors", N_GRID, JOINT))],
        "fig03": [("", spec("sigma_s", SIGMA_GRID, ("rss_crb", "wcl")))],
        "fig03_xc": [
            ("", spec("x_c", XC_GRID, ("rss_crb", "wcl"),
                      base.with_value("sigma_s", 10.0)))],
        "fig04": [("", spec("sigma_s", SIGMA_GRID,
                            ("joint_crb_opt", "joint_crb_music",
                             "stansfield_opt", "stansfield_music")))],
        "fig05": [("", spec("x_c", XC_GRID, JOINT))],
        "fig06": [("", spec("n_a", (2, 3, 4, 5), JOINT))],
        "fig07": [(f"@n_a={na}", spec("n_s", (25, 50, 100, 150), JOINT,
                                      base.with_value("n_a", na)))
                  for na in (2, 3)],
        "fig_orientation": [("", spec("theta_t", tuple(k * np.pi / 12 for k in range(6)),
                                      JOINT))],
    }
    for name, curves in (("fig08", ("rss_crb", "asym_rss")),
                         ("fig09", ("joint_crb_opt", "asym_joint"))):
        figs[name] = [(f"@r0={_fmt(q * R)}",
                       spec("n_sensors", N_GRID_LONG, curves,
                            base.with_value("r0", q * R)))
                      for q in GUARD_RATIOS]
    return figs


def required_n_table(base: Params, ratios=REQUIRED_N_RATIOS, eta=0.15,
                     rss_mult=1.0, joint_mult=2.0) -> str:
    """Required node counts against guard radius, as CSV.

    ``delta0`` is a multiple of the Frobenius norm of the mean per-sensor
    information. Columns: ``sweep_value`` (R0 in m), ``curve``, ``value``
    (count, or the real-valued bound for ``*_raw`` curves).
    """
    lines = ["sweep_value,curve,value"]
    R = base.placement.radius
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for q in ratios:
            p = base.with_value("r0", q * R)
            dist, ch, arr = p.placement, p.channel, p.array
            rss = asymptotic.required_n_rss(
                dist, ch, rss_mult * asymptotic.mean_fim_norm("rss", dist, ch), eta)
            joint = asymptotic.required_n_joint(
                dist, ch, arr, joint_mult * asymptotic.mean_fim_norm("joint", dist, ch, arr),
                eta)
            r0 = _fmt(q * R)
            lines += [f"{r0},req_n_rss,{rss.count}", f"{r0},req_n_rss_raw,{_fmt(rss.raw)}",
                      f"{r0},req_n_joint,{joint.count}",
                      f"{r0},req_n_joint_raw,{_fmt(joint.raw)}"]
    return "\n".join(lines) + "\n"


def _describe_version() -> str:
    """``git describe`` output when run from a checkout, else the package version."""
    try:
        res = subprocess.run(["git", "describe", "--always", "--dirty", "--tags"],
                             cwd=Path(__file__).parent, capture_output=True,
                             text=True, timeout=5)
    except (OSError, subprocess.SubprocessError):
        return __version__
    tag = res.stdout.strip()
    return f"{__version__}+g{tag}" if res.returncode == 0 and tag else __version__


@dataclass
class SuiteManifest:
    path: Path
    files: dict
    errors: dict

    @property
    def ok(self) -> bool:
        return not self.errors


def run_figure_suite(out_dir, master_seed: int = 0, placements: int = 100,
                     trials: int = 200, jobs: int = 1, base: Params | None = None,
                     only=None) -> SuiteManifest:
    """Write one CSV per figure table plus ``manifest.txt`` into ``out_dir``.

    Failures are reported per file in the manifest; the remaining tables are
    still produced.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    base = base or Params()
    figs = figure_sweeps(base, placements, trials, master_seed)
    names = sorted([*figs, "fig10"])
    if only:
        names = [n for n in names if n in set(only)]
    files, errors, timings = {}, {}, {}
    for name in names:
        t0 = time.perf_counter()
        try:
            if name == "fig10":
                text = required_n_table(base)
            else:
                lines = [CSV_HEADER]
                for suffix, spec in figs[name]:
                    lines.extend(run_sweep(spec, jobs).csv_lines(suffix))
                text = "\n".join(lines) + "\n"
            path = out / f"{name}.csv"
            path.write_text(text)
            files[name] = path
        except Exception as exc:  # report and carry on with the other tables
            log.error("table %s failed: %s", name, exc)
            errors[name] = f"{type(exc).__name__}: {exc}"
        timings[name] = time.perf_counter() - t0

    lines = [f"version={_describe_version()}", f"master_seed={master_seed}",
             f"placements={placements}", f"noise_trials={trials}",
             f"jobs={jobs}"]
    lines += [f"param.{k}={_fmt(v) if isinstance(v, (int, float)) else v}"
              for k, v in base.items()]
    for name in names:
        status = "ok" if name in files else f"error {errors[name]}"
        lines.append(f"table.{name}={status}")
        lines.append(f"seconds.{name}={timings[name]:.3f}")
    mpath = out / "manifest.txt"
    mpath.write_text("\n".join(lines) + "\n")
    return SuiteManifest(mpath, files, errors)
