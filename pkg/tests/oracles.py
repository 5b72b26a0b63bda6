"""Independent reference computations used by the tests.

Nothing here imports the package. Information matrices are estimated as the
Monte Carlo average of the negative finite-difference Hessian of the
log-likelihood, written directly from the measurement model.
"""
import numpy as np
from scipy import integrate

EPS = 100.0 / np.log(10.0) ** 2


def _wrap(a):
    return (a + np.pi) % (2 * np.pi) - np.pi


def rss_mean_dbm(pu, pos, p_t, c0, gamma):
    d = np.hypot(pos[:, 0] - pu[0], pos[:, 1] - pu[1])
    return 10 * np.log10(1000 * c0 * p_t) - 10 * gamma * np.log10(d)


def bearings(pu, pos):
    return np.arctan2(pu[1] - pos[:, 1], pu[0] - pos[:, 0])


def doa_variance(psi, tilde, beta, music, shift):
    q = psi * psi / (psi + shift) if music else psi
    return beta / (q * np.cos(tilde) ** 2)


def _fd_hessian(loglik, pu, h):
    """Central-difference Hessian of ``loglik(pu) -> (M,)`` per draw."""
    pu = np.asarray(pu, dtype=float)
    ex, ey = np.array([h, 0.0]), np.array([0.0, h])
    f0 = loglik(pu)
    fxx = (loglik(pu + ex) - 2 * f0 + loglik(pu - ex)) / h ** 2
    fyy = (loglik(pu + ey) - 2 * f0 + loglik(pu - ey)) / h ** 2
    fxy = (loglik(pu + ex + ey) - loglik(pu + ex - ey)
           - loglik(pu - ex + ey) + loglik(pu - ex - ey)) / (4 * h * h)
    return np.array([[fxx, fxy], [fxy, fyy]])  # (2, 2, M)


def mc_hessian_fim(pu, pos, orient, *, p_t, c0, gamma, sigma_s, x_c=0.0,
                   part="rss", beta=None, shift=0.0, draws=100_000, seed=0, h=1e-2):
    """FIM estimate ``-E[d^2 log p / d pu^2]`` by simulation.

    ``part`` is ``"rss"`` (RSS likelihood), ``"optimal"`` or ``"music"``
    (bearing likelihood conditional on the observed RSS).
    """
    rng = np.random.default_rng(seed)
    n = len(pos)
    d_all = np.hypot(pos[:, None, 0] - pos[None, :, 0], pos[:, None, 1] - pos[None, :, 1])
    if x_c > 0:
        cov = sigma_s ** 2 * np.exp(-d_all / x_c)
    else:
        cov = sigma_s ** 2 * np.eye(n)
    L = np.linalg.cholesky(cov)
    s = rng.standard_normal((draws, n)) @ L.T
    phi = rss_mean_dbm(pu, pos, p_t, c0, gamma) - s
    psi = 10 ** (phi / 10) / 1000
    if part == "rss":
        prec = np.linalg.inv(cov)

        def loglik(q):
            r = phi - rss_mean_dbm(q, pos, p_t, c0, gamma)
            return -0.5 * np.einsum("mi,ij,mj->m", r, prec, r)
    else:
        music = part == "music"
        theta = bearings(pu, pos)
        var0 = doa_variance(psi, _wrap(theta - orient), beta, music, shift)
        theta_hat = theta + np.sqrt(var0) * rng.standard_normal((draws, n))

        def loglik(q):
            th = bearings(q, pos)
            var = doa_variance(psi, _wrap(th - orient), beta, music, shift)
            r = _wrap(theta_hat - th)
            return (-0.5 * np.log(var) - 0.5 * r * r / var).sum(axis=1)
    H = _fd_hessian(loglik, pu, h)
    return -H.mean(axis=2)


def f_n_samples(rng, size, R, R0, theta_t, alpha, gamma):
    """Draws of the per-sensor bearing information scalar under uniform placement."""
    r = np.sqrt(R0 ** 2 + rng.uniform(size=size) * (R ** 2 - R0 ** 2))
    u = rng.uniform(-theta_t, theta_t, size)
    return alpha * np.cos(u) ** 2 / r ** (gamma + 2) + 2 * np.tan(u) ** 2 / r ** 2


def e_fn2_quadrature(R, R0, theta_t, alpha, gamma):
    """Second moment of the bearing scalar by 2-D adaptive quadrature."""
    area = R ** 2 - R0 ** 2

    def f(u, r):
        fn = alpha * np.cos(u) ** 2 / r ** (gamma + 2) + 2 * np.tan(u) ** 2 / r ** 2
        return fn * fn * 2 * r / area / (2 * theta_t)

    # the integrand is sharply peaked at r = R0; split the radial range
    knots = np.geomspace(R0, R, 8)
    total = 0.0
    for a, b in zip(knots[:-1], knots[1:]):
        val, _ = integrate.dblquad(f, a, b, -theta_t, theta_t, epsabs=0, epsrel=1e-11)
        total += val
    return total
