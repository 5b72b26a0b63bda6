"""Practical estimators: weighted centroid (RSS) and weighted Stansfield (RSS + DoA)."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .channel import ChannelParams, RssVector, sample_rss, shadowing_factor
from .doa import ArrayParams, DoaModel, DoaVector, sample_doa
from .errors import UnlocalizableError
from .scenario import (PlacementDistribution, Point2, Scenario, compute_geometry,
                       sample_uniform_placement)

ORIENTATION_CLAMP = 1e-3
COND_MAX = 1e12
FAILURE_BUDGET = 0.05


@dataclass(frozen=True, eq=False)
class MeasurementSet:
    rss: RssVector
    doa: DoaVector | None = None

    def __post_init__(self):
        if self.doa is not None and np.shape(self.doa.theta_hat) != np.shape(self.rss.psi):
            raise ValueError("RSS and DoA vectors must have equal length")


@dataclass(frozen=True)
class Estimate:
    location: Point2
    condition_number: float = 1.0
    weight_spread: float = 1.0


def wcl(scenario: Scenario, rss: RssVector) -> Estimate:
    psi = np.asarray(rss.psi, dtype=float)
    if psi.shape != (scenario.n,):
        raise ValueError("one RSS value per sensor is required")
    if np.any(psi <= 0):
        raise ValueError("RSS weights must be positive")
    (x, y), = kernels.wcl_batch(scenario.positions, psi)
    return Estimate(Point2(float(x), float(y)), weight_spread=float(psi.max() / psi.min()))


def weighted_stansfield(scenario: Scenario, meas: MeasurementSet, model: DoaModel,
                        arr: ArrayParams) -> Estimate:
    """Bearing-line intersection weighted by the estimated inverse DoA variances.

    The weights use the measured RSS and the estimated orientation error
    ``theta_hat - orientation``; sensors within ``ORIENTATION_CLAMP`` of
    broadside get the variance at that clamp instead of failing the fit.

    Raises
    ------
    UnlocalizableError
        When the normal equations are singular or ill-conditioned, e.g. all
        bearing lines parallel.
    """
    if meas.doa is None:
        raise ValueError("weighted Stansfield needs DoA measurements")
    if scenario.n < 2:
        raise UnlocalizableError(np.inf, "bearing geometry")
    psi = np.asarray(meas.rss.psi, dtype=float)
    est, cond, spread = kernels.stansfield_batch(
        scenario.positions, scenario.orientations, psi, meas.doa.theta_hat,
        DoaModel(model) is DoaModel.MUSIC, arr.p_m / arr.n_a,
        ORIENTATION_CLAMP, COND_MAX,
    )
    if not np.all(np.isfinite(est[0])):
        raise UnlocalizableError(cond[0], "bearing geometry")
    return Estimate(Point2(float(est[0, 0]), float(est[0, 1])),
                    condition_number=float(cond[0]), weight_spread=float(spread[0]))


@dataclass(frozen=True)
class McResult:
    rmse: float
    n_ok: int
    n_fail: int

    @property
    def flagged(self) -> bool:
        total = self.n_ok + self.n_fail
        return total > 0 and self.n_fail > FAILURE_BUDGET * total


def batch_errors(estimator: str, scenario: Scenario, ch: ChannelParams,
                 arr: ArrayParams, trials: int, rng: np.random.Generator):
    """Squared location errors of ``trials`` independent measurement draws.

    ``estimator`` is ``"wcl"``, ``"stansfield_opt"`` or ``"stansfield_music"``.
    Failed trials come back as NaN.
    """
    rss = sample_rss(ch, scenario, rng, size=trials, factor=shadowing_factor(ch, scenario))
    if estimator == "wcl":
        est = kernels.wcl_batch(scenario.positions, rss.psi)
    else:
        model = {"stansfield_opt": DoaModel.OPTIMAL,
                 "stansfield_music": DoaModel.MUSIC}[estimator]
        geom = compute_geometry(scenario)
        doa = sample_doa(model, arr, geom, rss, rng)
        est, _, _ = kernels.stansfield_batch(
            scenario.positions, scenario.orientations, rss.psi, doa.theta_hat,
            model is DoaModel.MUSIC, arr.p_m / arr.n_a, ORIENTATION_CLAMP, COND_MAX)
    return ((est - scenario.pu) ** 2).sum(axis=1)


def monte_carlo_rmse(estimator: str, target, ch: ChannelParams, arr: ArrayParams,
                     trials: int, rng: np.random.Generator, n: int | None = None) -> McResult:
    """Root-mean-square location error over ``trials`` measurement draws.

    ``target`` is a fixed :class:`Scenario`, or a :class:`PlacementDistribution`
    (with ``n`` sensors) from which a fresh placement is drawn per trial.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if isinstance(target, Scenario):
        err2 = batch_errors(estimator, target, ch, arr, trials, rng)
    elif isinstance(target, PlacementDistribution):
        if n is None:
            raise ValueError("n is required with a placement distribution")
        err2 = np.array([
            batch_errors(estimator, sample_uniform_placement(target, n, rng),
                         ch, arr, 1, rng)[0]
            for _ in range(trials)
        ])
    else:
        raise TypeError("target must be a Scenario or PlacementDistribution")
    ok = np.isfinite(err2)
    n_ok = int(ok.sum())
    rmse = float(np.sqrt(err2[ok].mean())) if n_ok else float("nan")
    return McResult(rmse, n_ok, trials - n_ok)
