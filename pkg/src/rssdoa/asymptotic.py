"""Closed-form bounds for uniform random placement with i.i.d. shadowing.

For sensors uniform on the annulus ``R0 <= r <= R`` with orientation errors
uniform on ``(-theta_T, theta_T)``, the per-sensor mean information is
isotropic: ``E[F] / N = (f_phi + f_theta_phi) I``. The RMSE bound then has a
closed form, and Chebyshev's inequality on the Frobenius deviation of
``F / N`` gives the node count needed for that approximation to hold.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .channel import EPSILON, ChannelParams
from .doa import ArrayParams
from .errors import SpecialFunctionError
from .fim import alpha_const
from .scenario import PlacementDistribution

_SERIES_MAX_TERMS = 10_000_000


def _check_iid(ch: ChannelParams):
    if ch.x_c != 0.0:
        warnings.warn("asymptotic bounds assume i.i.d. shadowing; x_c is ignored",
                      stacklevel=3)


def _inv_distance_moment(dist: PlacementDistribution, k: float) -> float:
    """``E[d^-k]`` under the density ``2r / (R^2 - R0^2)``."""
    R, R0 = dist.radius, dist.guard_radius
    area = R * R - R0 * R0
    if k == 2:
        return 2.0 * math.log(R / R0) / area
    return 2.0 * (R0 ** (2 - k) - R ** (2 - k)) / ((k - 2) * area)


def _sinc2(theta_t):
    """``sin(2 t) / (2 t)`` with its limit 1 at 0."""
    return 1.0 if theta_t == 0 else math.sin(2 * theta_t) / (2 * theta_t)


def _tan_ratio(theta_t):
    return 1.0 if theta_t == 0 else math.tan(theta_t) / theta_t


def f_phi(dist: PlacementDistribution, ch: ChannelParams) -> float:
    _check_iid(ch)
    R, R0 = dist.radius, dist.guard_radius
    return (EPSILON * ch.gamma ** 2 * math.log(R / R0)
            / (ch.sigma_s ** 2 * (R * R - R0 * R0)))


def f_theta_phi(dist: PlacementDistribution, ch: ChannelParams, arr: ArrayParams) -> float:
    _check_iid(ch)
    R, R0, tt = dist.radius, dist.guard_radius, dist.theta_t
    g = ch.gamma
    alpha = alpha_const(ch, arr)
    orient = 2.0 * math.log(R / R0) * (_tan_ratio(tt) - 1.0)
    power = -(alpha / (2.0 * g)) * (R ** -g - R0 ** -g) * (_sinc2(tt) + 1.0)
    return (orient + power) / (R * R - R0 * R0)


def hyp2f1_negative(a: float, b: float, c: float, z: float) -> float:
    """Gauss hypergeometric function for ``z <= 0``.

    Uses ``2F1(a, b; c; z) = (1 - z)^-a 2F1(a, c - b; c; z / (z - 1))``, which
    maps the argument into ``[0, 1)``, then sums the power series.
    """
    if z > 0:
        raise ValueError("argument must be <= 0")
    if z == 0:
        return 1.0
    w = z / (z - 1.0)
    b2 = c - b
    term = 1.0
    total = 1.0
    for k in range(_SERIES_MAX_TERMS):
        term *= (a + k) * (b2 + k) / ((c + k) * (k + 1)) * w
        total += term
        # past the peak the ratio decreases monotonically, so the remaining
        # tail is below a geometric series with the current ratio
        ratio = (a + k + 1) * (b2 + k + 1) / ((c + k + 1) * (k + 2)) * w
        if ratio < 1.0 and abs(term) * ratio / (1.0 - ratio) < 1e-16 * abs(total):
            return total * (1.0 - z) ** (-a)
    raise SpecialFunctionError(f"2F1 series did not converge at z={z}")


def hyp2f1_term(theta_t: float) -> float:
    """``2F1(5/2, 1; 7/2; -tan^2 theta_T)``."""
    if not (0.0 <= theta_t < math.pi / 2):
        raise ValueError("theta_t must lie in [0, pi/2)")
    return hyp2f1_negative(2.5, 1.0, 3.5, -math.tan(theta_t) ** 2)


def tan4_mean(theta_t: float) -> float:
    """``E[tan^4 u]`` for ``u ~ U(-theta_T, theta_T)``."""
    if theta_t == 0:
        return 0.0
    return math.tan(theta_t) ** 5 / (5.0 * theta_t) * hyp2f1_term(theta_t)


def cos4_mean(theta_t: float) -> float:
    """``E[cos^4 u]`` for ``u ~ U(-theta_T, theta_T)``."""
    if theta_t == 0:
        return 1.0
    t = theta_t
    return (math.sin(4 * t) + 8 * math.sin(2 * t) + 12 * t) / (32 * t)


def e_fn(dist, ch, arr) -> float:
    """Mean of the per-sensor bearing information scalar ``f_n``."""
    return 2.0 * f_theta_phi(dist, ch, arr)


def e_fn2(dist: PlacementDistribution, ch: ChannelParams, arr: ArrayParams) -> float:
    """Second moment of ``f_n = alpha d^-(g+2) cos^2 u + 2 d^-2 tan^2 u``."""
    _check_iid(ch)
    R, R0, tt = dist.radius, dist.guard_radius, dist.theta_t
    g = ch.gamma
    alpha = alpha_const(ch, arr)
    area = R * R - R0 * R0
    orient = 4.0 * tan4_mean(tt) / (R * R * R0 * R0)
    sin2_mean = 0.5 * (1.0 - _sinc2(tt))
    cross = (4.0 * alpha * (R0 ** -(g + 2) - R ** -(g + 2)) / ((g + 2) * area)
             * 2.0 * sin2_mean)
    power = (alpha ** 2 * cos4_mean(tt) * (R0 ** (-2 * (g + 1)) - R ** (-2 * (g + 1)))
             / ((g + 1) * area))
    return orient + cross + power


@dataclass(frozen=True)
class MomentSet:
    f_phi: float
    f_theta_phi: float
    e_fn: float
    e_fn2: float


def moments(dist, ch, arr) -> MomentSet:
    ftp = f_theta_phi(dist, ch, arr)
    return MomentSet(f_phi(dist, ch), ftp, 2.0 * ftp, e_fn2(dist, ch, arr))


def rss_deviation_moment(dist: PlacementDistribution, ch: ChannelParams) -> float:
    """``N E||F_rss/N - E[F_rss]/N||_F^2``, independent of ``N``."""
    _check_iid(ch)
    R, R0 = dist.radius, dist.guard_radius
    bracket = 1.0 / (2 * R * R * R0 * R0) - math.log(R / R0) ** 2 / (R * R - R0 * R0) ** 2
    return 2.0 * EPSILON ** 2 * ch.gamma ** 4 / ch.sigma_s ** 4 * bracket


def joint_deviation_moment(dist, ch, arr) -> float:
    """``N E||F/N - E[F]/N||_F^2`` for the joint information, independent of ``N``."""
    R, R0 = dist.radius, dist.guard_radius
    k = EPSILON * ch.gamma ** 2 / ch.sigma_s ** 2
    rss_mean = 2.0 * k * math.log(R / R0) / (R * R - R0 * R0)
    return (k * k / (R * R * R0 * R0) + e_fn2(dist, ch, arr)
            - 0.5 * (e_fn(dist, ch, arr) + rss_mean) ** 2)


def mean_fim_norm(kind: str, dist, ch, arr=None) -> float:
    """Frobenius norm of ``E[F] / N``: ``sqrt(2)`` times the isotropic scalar."""
    s = f_phi(dist, ch)
    if kind == "joint":
        s += f_theta_phi(dist, ch, arr)
    elif kind != "rss":
        raise ValueError(f"unknown kind {kind!r}")
    return math.sqrt(2.0) * s


def asymptotic_rmse_rss(dist, ch, n: int) -> float:
    if n < 1:
        raise ValueError("n must be >= 1")
    return math.sqrt(2.0 / (n * f_phi(dist, ch)))


def asymptotic_rmse_joint(dist, ch, arr, n: int) -> float:
    if n < 1:
        raise ValueError("n must be >= 1")
    return math.sqrt(2.0 / (n * (f_phi(dist, ch) + f_theta_phi(dist, ch, arr))))


@dataclass(frozen=True)
class RequiredN:
    count: int
    raw: float


def _required(moment, delta0, eta) -> RequiredN:
    if delta0 <= 0:
        raise ValueError("delta0 must be positive")
    if not (0.0 < eta <= 1.0):
        raise ValueError("eta must lie in (0, 1]")
    raw = float(moment / (eta * delta0 ** 2))
    return RequiredN(max(1, math.ceil(raw)), raw)


def required_n_rss(dist, ch, delta0: float, eta: float) -> RequiredN:
    return _required(rss_deviation_moment(dist, ch), delta0, eta)


def required_n_joint(dist, ch, arr, delta0: float, eta: float) -> RequiredN:
    return _required(joint_deviation_moment(dist, ch, arr), delta0, eta)


def deviation_bound(kind: str, dist, ch, arr, n: int, delta0: float) -> float:
    """Chebyshev bound on ``P(||F/N - E[F]/N||_F > delta0)``, clamped to [0, 1]."""
    if n < 1 or delta0 <= 0:
        raise ValueError("need n >= 1 and delta0 > 0")
    if kind == "rss":
        m = rss_deviation_moment(dist, ch)
    elif kind == "joint":
        m = joint_deviation_moment(dist, ch, arr)
    else:
        raise ValueError(f"unknown kind {kind!r}")
    return float(min(1.0, max(0.0, m / (n * delta0 ** 2))))
