"""RSS-dependent DoA error variance and noisy bearing generation."""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .channel import RssVector
from .errors import BroadsideSingularityError
from .scenario import GeometryCache


class DoaModel(str, enum.Enum):
    OPTIMAL = "optimal"  # estimation-theoretic bound on the DoA variance
    MUSIC = "music"


@dataclass(frozen=True)
class ArrayParams:
    """ULA settings shared by every sensor.

    Attributes
    ----------
    n_s : int
        Snapshots per localization period.
    n_a : int
        Antennas, at least 2.
    kappa : float
        Array constant. Defaults to 1, i.e. the spacing/wavelength factor is
        folded into the variance model; use ``pi`` for the phase-slope
        convention of a half-wavelength ULA.
    p_m : float
        Measurement noise power in Watts.
    """

    n_s: int = 50
    n_a: int = 2
    kappa: float = 1.0
    p_m: float = 1e-11

    def __post_init__(self):
        if self.n_s < 1:
            raise ValueError("n_s must be >= 1")
        if self.n_a < 2:
            raise ValueError("n_a must be >= 2")
        if not (self.kappa > 0 and self.p_m > 0):
            raise ValueError("kappa and p_m must be positive")


@dataclass(frozen=True, eq=False)
class DoaVector:
    theta_hat: np.ndarray
    sigma2: np.ndarray


def beta_const(arr: ArrayParams) -> float:
    return 6.0 * arr.p_m / (arr.kappa ** 2 * arr.n_s * arr.n_a * (arr.n_a ** 2 - 1))


def _check_broadside(theta_tilde):
    bad = np.abs(theta_tilde) >= np.pi / 2
    if np.any(bad):
        raise BroadsideSingularityError(float(np.asarray(theta_tilde)[bad].flat[0]))


def variance(model: DoaModel, arr: ArrayParams, psi, theta_tilde):
    """DoA error variance in rad^2 for received power ``psi`` (Watts)."""
    psi = np.asarray(psi, dtype=float)
    theta_tilde = np.asarray(theta_tilde, dtype=float)
    _check_broadside(theta_tilde)
    beta = beta_const(arr)
    cos2 = np.cos(theta_tilde) ** 2
    if DoaModel(model) is DoaModel.OPTIMAL:
        return beta / (psi * cos2)
    return beta * (psi + arr.p_m / arr.n_a) / (psi * psi * cos2)


def sample_doa(model: DoaModel, arr: ArrayParams, geom: GeometryCache,
               rss: RssVector, rng: np.random.Generator) -> DoaVector:
    """Add zero-mean Gaussian errors to the true bearings.

    The variance of each error uses the instantaneous RSS; errors are
    independent across sensors and trials. ``rss`` may be 1-D or batched
    ``(T, N)``. Bearings are not wrapped.
    """
    sigma2 = variance(model, arr, rss.psi, geom.theta_tilde)
    v = np.sqrt(sigma2) * rng.standard_normal(sigma2.shape)
    return DoaVector(theta_hat=geom.theta + v, sigma2=sigma2)
