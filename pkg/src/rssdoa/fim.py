"""Fisher information and RMSE bounds for a fixed sensor placement.

Three information matrices are provided, all 2x2 in units of 1/m^2:

* :func:`rss_fim` - RSS readings only, arbitrary shadowing correlation;
* :func:`doa_fim_optimal` - bearings given RSS, DoA variance at its lower bound;
* :func:`doa_fim_music` - bearings given RSS, MUSIC variance.

The joint matrix is the sum of the RSS matrix and one of the bearing matrices.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial.hermite import hermgauss
from scipy.linalg import cho_factor, cho_solve

from .channel import EPSILON, ChannelParams, mean_rss_watts, shadowing_covariance
from .doa import ArrayParams, DoaModel, _check_broadside, beta_const
from .errors import CovarianceError, QuadratureError, UnlocalizableError
from .scenario import PlacementDistribution, Scenario, compute_geometry, sample_uniform_placement

log = logging.getLogger(__name__)

COND_MAX = 1e12
QUAD_ORDER = 40
QUAD_MAX_ORDER = 640
QUAD_RTOL = 1e-8


@dataclass(frozen=True, eq=False)
class CrbResult:
    fim: np.ndarray
    covariance_bound: np.ndarray
    rmse_bound: float
    condition_number: float


def alpha_const(ch: ChannelParams, arr: ArrayParams) -> float:
    return ch.c0 * ch.p_t * ch.lognormal_gain / beta_const(arr)


def rss_fim(ch: ChannelParams, scenario: Scenario) -> np.ndarray:
    geom = compute_geometry(scenario)
    # rows: d(phi_hat - phi_bar)/d(x_P, y_P) up to the factor sqrt(eps) gamma
    J = np.column_stack((geom.dx, geom.dy)) / (geom.d ** 2)[:, None]
    scale = EPSILON * ch.gamma ** 2
    if ch.sigma_s == 0.0:
        raise CovarianceError("covariance not invertible (sigma_s = 0)")
    if ch.x_c == 0.0:
        F = scale / ch.sigma_s ** 2 * (J.T @ J)
    else:
        cov = shadowing_covariance(ch, scenario)
        try:
            cf = cho_factor(cov, lower=True)
        except np.linalg.LinAlgError:
            raise CovarianceError("covariance not invertible") from None
        F = scale * (J.T @ cho_solve(cf, J))
    return 0.5 * (F + F.T)


def _bearing_fim(geom, weights) -> np.ndarray:
    # sum_n w_n p_n p_n^T with p_n = [dy_n, -dx_n]
    P = np.column_stack((geom.dy, -geom.dx))
    F = (P * weights[:, None]).T @ P
    return 0.5 * (F + F.T)


def doa_fim_optimal(ch: ChannelParams, arr: ArrayParams, scenario: Scenario) -> np.ndarray:
    geom = compute_geometry(scenario)
    _check_broadside(geom.theta_tilde)
    alpha = alpha_const(ch, arr)
    cos2 = np.cos(geom.theta_tilde) ** 2
    tan2 = np.tan(geom.theta_tilde) ** 2
    w = (alpha * cos2 / geom.d ** ch.gamma + 2.0 * tan2) / geom.d ** 4
    return _bearing_fim(geom, w)


@lru_cache(maxsize=16)
def _gh_rule(order):
    x, w = hermgauss(order)
    return x, w / np.sqrt(np.pi)


def expected_inverse_shifted_lognormal(psi_bar, sigma_s: float, shift: float,
                                       order: int = QUAD_ORDER) -> np.ndarray:
    """``E[1 / (psi + shift)]`` with ``psi = psi_bar 10^(-s/10)``, ``s ~ N(0, sigma_s^2)``.

    Gauss-Hermite quadrature over ``s``. The node count starts at ``order`` and
    doubles until two successive results agree to ``QUAD_RTOL``.
    """
    psi_bar = np.asarray(psi_bar, dtype=float)
    if sigma_s == 0.0:
        return 1.0 / (psi_bar + shift)

    def rule(n):
        x, w = _gh_rule(n)
        gain = 10.0 ** (-np.sqrt(2.0) * sigma_s * x / 10.0)
        return (w / (psi_bar[..., None] * gain + shift)).sum(axis=-1)

    prev = rule(order)
    n = order
    while n < QUAD_MAX_ORDER:
        n *= 2
        cur = rule(n)
        if np.all(np.abs(cur - prev) <= QUAD_RTOL * np.abs(cur)):
            return cur
        prev = cur
    raise QuadratureError(f"no convergence with {n} Gauss-Hermite nodes")


def music_information_weights(ch: ChannelParams, arr: ArrayParams, geom) -> np.ndarray:
    """Per-sensor scalars ``delta_n`` of the MUSIC bearing information."""
    _check_broadside(geom.theta_tilde)
    beta = beta_const(arr)
    c = arr.p_m / arr.n_a
    psi_bar = mean_rss_watts(ch, geom.d)
    e_inv = expected_inverse_shifted_lognormal(psi_bar, ch.sigma_s, c)
    # E[psi^2 / (psi + c)] = E[psi] - c + c^2 E[1 / (psi + c)]
    e_quality = psi_bar * ch.lognormal_gain - c + c * c * e_inv
    cos2 = np.cos(geom.theta_tilde) ** 2
    tan2 = np.tan(geom.theta_tilde) ** 2
    return (cos2 / beta * e_quality + 2.0 * tan2) / geom.d ** 4


def doa_fim_music(ch: ChannelParams, arr: ArrayParams, scenario: Scenario) -> np.ndarray:
    geom = compute_geometry(scenario)
    return _bearing_fim(geom, music_information_weights(ch, arr, geom))


def doa_fim(model: DoaModel, ch: ChannelParams, arr: ArrayParams,
            scenario: Scenario) -> np.ndarray:
    if DoaModel(model) is DoaModel.OPTIMAL:
        return doa_fim_optimal(ch, arr, scenario)
    return doa_fim_music(ch, arr, scenario)


def joint_fim(model: DoaModel, ch: ChannelParams, arr: ArrayParams,
              scenario: Scenario) -> np.ndarray:
    return rss_fim(ch, scenario) + doa_fim(model, ch, arr, scenario)


def bound_fim(kind: str, ch: ChannelParams, arr: ArrayParams, scenario: Scenario):
    """FIM by name: ``"rss"``, ``"optimal"`` or ``"music"`` (the last two joint)."""
    if kind == "rss":
        return rss_fim(ch, scenario)
    return joint_fim(DoaModel(kind), ch, arr, scenario)


def condition_number(F) -> float:
    lo, hi = np.linalg.eigvalsh(F)
    if lo <= 0.0:
        return np.inf
    return hi / lo


def crb_from_fim(F) -> CrbResult:
    F = np.asarray(F, dtype=float)
    cond = condition_number(F)
    if not cond < COND_MAX:
        raise UnlocalizableError(cond)
    cov = np.linalg.inv(F)
    cov = 0.5 * (cov + cov.T)
    return CrbResult(fim=F, covariance_bound=cov,
                     rmse_bound=float(np.sqrt(np.trace(cov))), condition_number=cond)


@dataclass(frozen=True)
class EnsembleResult:
    mean: float
    stderr: float
    n_ok: int
    n_fail: int
    warning: str | None = None


def _placement_bound(args):
    kind, ch, arr, dist, n, master_seed, index = args
    rng = np.random.default_rng([master_seed, index])
    scenario = sample_uniform_placement(dist, n, rng)
    try:
        return crb_from_fim(bound_fim(kind, ch, arr, scenario)).rmse_bound
    except UnlocalizableError:
        return np.nan


def ensemble_average_crb(dist: PlacementDistribution, n: int, trials: int,
                         ch: ChannelParams, arr: ArrayParams | None = None,
                         kind: str = "rss", master_seed: int = 0,
                         jobs: int = 1) -> EnsembleResult:
    """Average the RMSE bound over ``trials`` random placements.

    Placement ``i`` is drawn from a generator seeded with ``[master_seed, i]``,
    so the result does not depend on ``jobs``.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    arr = arr or ArrayParams()
    tasks = [(kind, ch, arr, dist, n, master_seed, i) for i in range(trials)]
    if jobs > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            vals = np.fromiter(ex.map(_placement_bound, tasks, chunksize=64), float, trials)
    else:
        vals = np.fromiter(map(_placement_bound, tasks), float, trials)
    ok = vals[np.isfinite(vals)]
    n_fail = trials - ok.size
    warning = None
    if n_fail > 0.01 * trials:
        warning = f"{n_fail} of {trials} placements unlocalizable"
        log.warning(warning)
    if ok.size == 0:
        return EnsembleResult(np.nan, np.nan, 0, n_fail, warning)
    se = float(ok.std(ddof=1) / np.sqrt(ok.size)) if ok.size > 1 else 0.0
    return EnsembleResult(float(ok.mean()), se, int(ok.size), int(n_fail), warning)
