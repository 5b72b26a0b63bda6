"""Backend selection for the batched estimator kernels.

The compiled extension is used when it imports; otherwise, or when the
environment variable ``RSSDOA_PURE_PYTHON`` is set to a non-empty value other
than ``0``, the numpy implementation is used. ``BACKEND`` names the choice.
"""
import os

import numpy as np

from . import _pykernels

_force_py = os.environ.get("RSSDOA_PURE_PYTHON", "") not in ("", "0")

if _force_py:
    _impl = _pykernels
    BACKEND = "python"
else:
    try:
        from . import _ckernels as _impl
        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels
        BACKEND = "python"


def _c(a):
    return np.ascontiguousarray(a, dtype=np.float64)


def wcl_batch(positions, psi, impl=None):
    impl = impl or _impl
    return impl.wcl_batch(_c(positions), _c(np.atleast_2d(psi)))


def stansfield_batch(positions, orientations, psi, theta_hat, music, shift,
                     clamp_margin=1e-3, cond_max=1e12, impl=None):
    impl = impl or _impl
    return impl.stansfield_batch(
        _c(positions), _c(orientations), _c(np.atleast_2d(psi)),
        _c(np.atleast_2d(theta_hat)), bool(music), float(shift),
        float(clamp_margin), float(cond_max),
    )
