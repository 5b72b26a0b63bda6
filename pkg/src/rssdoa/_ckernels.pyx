# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of the functions in ``_pykernels``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sin, cos, sqrt, fmod, M_PI, INFINITY, NAN

cnp.import_array()


def wcl_batch(const double[:, ::1] positions, const double[:, ::1] psi):
    cdef Py_ssize_t T = psi.shape[0], N = psi.shape[1], t, n
    cdef double sw, sx, sy, w
    out = np.empty((T, 2), dtype=np.float64)
    cdef double[:, ::1] o = out
    for t in range(T):
        sw = 0.0
        sx = 0.0
        sy = 0.0
        for n in range(N):
            w = psi[t, n]
            sw += w
            sx += w * positions[n, 0]
            sy += w * positions[n, 1]
        o[t, 0] = sx / sw
        o[t, 1] = sy / sw
    return out


cdef inline double _wrap(double a) nogil:
    cdef double r = fmod(a + M_PI, 2.0 * M_PI)
    if r < 0.0:
        r += 2.0 * M_PI
    return r - M_PI


def stansfield_batch(const double[:, ::1] positions, const double[::1] orientations,
                     const double[:, ::1] psi, const double[:, ::1] theta_hat,
                     bint music, double shift, double clamp_margin,
                     double cond_max):
    cdef Py_ssize_t T = psi.shape[0], N = psi.shape[1], t, n
    cdef double limit = 0.5 * M_PI - clamp_margin
    cdef double cx = 0.0, cy = 0.0
    cdef double tilde, q, ct, w, wmax, wmin, s, c, b, x, y
    cdef double m00, m01, m11, r0, r1, half_tr, rad, lo, hi, det
    est_arr = np.empty((T, 2), dtype=np.float64)
    cond_arr = np.empty(T, dtype=np.float64)
    spread_arr = np.empty(T, dtype=np.float64)
    w_arr = np.empty(N, dtype=np.float64)
    cdef double[:, ::1] est = est_arr
    cdef double[::1] cond = cond_arr
    cdef double[::1] spread = spread_arr
    cdef double[::1] wv = w_arr

    for n in range(N):
        cx += positions[n, 0]
        cy += positions[n, 1]
    cx /= N
    cy /= N

    with nogil:
        for t in range(T):
            wmax = 0.0
            wmin = INFINITY
            for n in range(N):
                tilde = _wrap(theta_hat[t, n] - orientations[n])
                if tilde > limit:
                    tilde = limit
                elif tilde < -limit:
                    tilde = -limit
                q = psi[t, n]
                if music:
                    q = q * q / (q + shift)
                ct = cos(tilde)
                w = q * ct * ct
                wv[n] = w
                if w > wmax:
                    wmax = w
                if w < wmin:
                    wmin = w
            spread[t] = wmax / wmin
            m00 = 0.0
            m01 = 0.0
            m11 = 0.0
            r0 = 0.0
            r1 = 0.0
            for n in range(N):
                w = wv[n] / wmax
                s = sin(theta_hat[t, n])
                c = cos(theta_hat[t, n])
                x = positions[n, 0] - cx
                y = positions[n, 1] - cy
                b = x * s - y * c
                m00 += w * s * s
                m01 -= w * s * c
                m11 += w * c * c
                r0 += w * s * b
                r1 -= w * c * b
            half_tr = 0.5 * (m00 + m11)
            rad = sqrt(0.25 * (m00 - m11) * (m00 - m11) + m01 * m01)
            hi = half_tr + rad
            lo = half_tr - rad
            if lo > 0.0:
                cond[t] = hi / lo
            else:
                cond[t] = INFINITY
            if cond[t] < cond_max:
                det = m00 * m11 - m01 * m01
                est[t, 0] = (m11 * r0 - m01 * r1) / det + cx
                est[t, 1] = (m00 * r1 - m01 * r0) / det + cy
            else:
                est[t, 0] = NAN
                est[t, 1] = NAN
    return est_arr, cond_arr, spread_arr
