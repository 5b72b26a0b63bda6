"""Log-distance path loss with exponentially correlated log-normal shadowing."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CovarianceError, DegenerateGeometryError
from .scenario import Scenario, compute_geometry

# dB <-> natural-log scale factor; sigma_s^2 / (2 * EPSILON) is the log-normal
# mean exponent for 10^(-s/10).
EPSILON = 100.0 / np.log(10.0) ** 2


def dbm_to_watts(dbm):
    return 10.0 ** ((np.asarray(dbm, dtype=float) - 30.0) / 10.0)


def watts_to_dbm(w):
    return 10.0 * np.log10(1000.0 * np.asarray(w, dtype=float))


@dataclass(frozen=True)
class ChannelParams:
    """Transmit power and propagation settings.

    Attributes
    ----------
    p_t : float
        PU transmit power in Watts.
    c0 : float
        Gain at the 1 m reference distance.
    gamma : float
        Path-loss exponent.
    sigma_s : float
        Shadowing standard deviation in dB.
    x_c : float
        Shadowing correlation distance in meters; 0 means i.i.d.
    """

    p_t: float = 0.1
    c0: float = 1.0
    gamma: float = 5.0
    sigma_s: float = 6.0
    x_c: float = 0.0

    def __post_init__(self):
        if not (self.p_t > 0 and self.c0 > 0 and self.gamma > 0):
            raise ValueError("p_t, c0 and gamma must be positive")
        if self.sigma_s < 0 or self.x_c < 0:
            raise ValueError("sigma_s and x_c must be non-negative")

    @property
    def lognormal_gain(self) -> float:
        """``E[10^(-s/10)] = exp(sigma_s^2 / (2 eps))``."""
        return float(np.exp(self.sigma_s ** 2 / (2.0 * EPSILON)))


@dataclass(frozen=True, eq=False)
class RssVector:
    """RSS readings, in dBm (``phi``) and Watts (``psi``).

    Either 1-D (one measurement per sensor) or 2-D with trials along axis 0.
    """

    phi: np.ndarray
    psi: np.ndarray

    @classmethod
    def from_dbm(cls, phi) -> "RssVector":
        phi = np.asarray(phi, dtype=float)
        return cls(phi=phi, psi=dbm_to_watts(phi))

    @classmethod
    def from_watts(cls, psi) -> "RssVector":
        psi = np.asarray(psi, dtype=float)
        if np.any(psi <= 0):
            raise ValueError("RSS in Watts must be positive")
        return cls(phi=watts_to_dbm(psi), psi=psi)


def mean_rss_dbm(params: ChannelParams, d):
    d = np.asarray(d, dtype=float)
    if np.any(d <= 0):
        raise DegenerateGeometryError("distance must be positive")
    return (10.0 * np.log10(1000.0 * params.p_t * params.c0)
            - 10.0 * params.gamma * np.log10(d))


def mean_rss_watts(params: ChannelParams, d):
    """Shadowing-free received power ``c0 P_T d^-gamma``."""
    d = np.asarray(d, dtype=float)
    return params.c0 * params.p_t * d ** (-params.gamma)


def shadowing_covariance(params: ChannelParams, scenario: Scenario) -> np.ndarray:
    """``sigma_s^2 exp(-|l_m - l_n| / X_c)``; ``X_c = 0`` gives ``sigma_s^2 I``."""
    n = scenario.n
    var = params.sigma_s ** 2
    if params.x_c == 0.0:
        return var * np.eye(n)
    pos = scenario.positions
    sep = np.hypot(pos[:, None, 0] - pos[None, :, 0], pos[:, None, 1] - pos[None, :, 1])
    # a tiny X_c overflows sep / X_c to inf, whose exp(-inf) = 0 is the right limit
    with np.errstate(over="ignore"):
        return var * np.exp(-sep / params.x_c)


def shadowing_factor(params: ChannelParams, scenario: Scenario) -> np.ndarray:
    """Lower Cholesky factor of the shadowing covariance.

    One retry with ``1e-10 sigma_s^2`` added to the diagonal.
    """
    n = scenario.n
    if params.sigma_s == 0.0:
        return np.zeros((n, n))
    if params.x_c == 0.0:
        return params.sigma_s * np.eye(n)
    cov = shadowing_covariance(params, scenario)
    try:
        return np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        pass
    try:
        return np.linalg.cholesky(cov + 1e-10 * params.sigma_s ** 2 * np.eye(n))
    except np.linalg.LinAlgError:
        raise CovarianceError("covariance not PSD") from None


def sample_rss(params: ChannelParams, scenario: Scenario, rng: np.random.Generator,
               size: int | None = None, factor: np.ndarray | None = None) -> RssVector:
    """Draw ``phi_hat = phi_bar - s`` with ``s ~ N(0, Omega_s)``.

    Parameters
    ----------
    size : int, optional
        Number of independent trials; the result is then ``(size, N)``.
    factor : ndarray, optional
        Precomputed :func:`shadowing_factor` for this scenario.
    """
    geom = compute_geometry(scenario)
    phi_bar = mean_rss_dbm(params, geom.d)
    if factor is None:
        factor = shadowing_factor(params, scenario)
    shape = (scenario.n,) if size is None else (size, scenario.n)
    z = rng.standard_normal(shape)
    s = z @ factor.T
    return RssVector.from_dbm(phi_bar - s)
