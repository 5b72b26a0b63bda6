"""Vectorized numpy implementations of the batched estimator kernels.

These are the reference behaviour for ``_ckernels.pyx``; both must agree to
rounding. Inputs are float64 C-contiguous arrays with trials along axis 0.
"""
import numpy as np

HALF_PI = 0.5 * np.pi


def wcl_batch(positions, psi):
    """RSS-weighted centroid per trial. Returns ``(T, 2)``."""
    w = psi / psi.sum(axis=1, keepdims=True)
    return w @ positions


def stansfield_batch(positions, orientations, psi, theta_hat, music, shift,
                     clamp_margin, cond_max):
    """Weighted least-squares intersection of bearing lines for each trial.

    Returns
    -------
    est : ndarray, shape (T, 2)
        NaN rows for trials whose normal matrix is singular or has condition
        number above ``cond_max``.
    cond : ndarray, shape (T,)
    spread : ndarray, shape (T,)
        Ratio of the largest to the smallest fusion weight.
    """
    limit = HALF_PI - clamp_margin
    tilde = (theta_hat - orientations + np.pi) % (2.0 * np.pi) - np.pi
    tilde = np.clip(tilde, -limit, limit)
    if music:
        quality = psi * psi / (psi + shift)
    else:
        quality = psi
    # inverse of the estimated variance up to a common factor
    w = quality * np.cos(tilde) ** 2
    spread = w.max(axis=1) / w.min(axis=1)
    w = w / w.max(axis=1, keepdims=True)

    center = positions.mean(axis=0)
    x = positions[:, 0] - center[0]
    y = positions[:, 1] - center[1]
    s = np.sin(theta_hat)
    c = np.cos(theta_hat)
    b = x * s - y * c
    m00 = (w * s * s).sum(axis=1)
    m01 = -(w * s * c).sum(axis=1)
    m11 = (w * c * c).sum(axis=1)
    r0 = (w * s * b).sum(axis=1)
    r1 = -(w * c * b).sum(axis=1)

    half_tr = 0.5 * (m00 + m11)
    rad = np.sqrt(0.25 * (m00 - m11) ** 2 + m01 * m01)
    lam_hi = half_tr + rad
    lam_lo = half_tr - rad
    with np.errstate(divide="ignore", invalid="ignore"):
        cond = np.where(lam_lo > 0.0, lam_hi / lam_lo, np.inf)
        det = m00 * m11 - m01 * m01
        ex = (m11 * r0 - m01 * r1) / det
        ey = (m00 * r1 - m01 * r0) / det
    est = np.column_stack((ex + center[0], ey + center[1]))
    est[~(cond < cond_max)] = np.nan
    return est, cond, spread
