"""Kernel backend selection.

The compiled extension is used when it has been built; set
``ORBITDENS_PURE_PYTHON=1`` to force the NumPy fallback.
"""
import os

import numpy as np

from . import _pykernels

BACKEND = "python"
_impl = _pykernels
if os.environ.get("ORBITDENS_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _impl  # noqa: F811

        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels


def orbit_sum(theta0, tau0, dtheta, dtau, k_max, backend=None):
    impl = _select(backend)
    theta0 = np.ascontiguousarray(np.atleast_2d(theta0), dtype=np.float64)
    tau0 = np.ascontiguousarray(np.atleast_2d(tau0), dtype=np.float64)
    return impl.orbit_sum(theta0, tau0, float(dtheta), float(dtau), int(k_max))


def stencil_densities(padded, weights, c1, c2, backend=None):
    impl = _select(backend)
    return impl.stencil_densities(
        np.ascontiguousarray(padded, dtype=np.float64),
        np.ascontiguousarray(weights, dtype=np.float64),
        np.ascontiguousarray(c1, dtype=np.float64),
        np.ascontiguousarray(c2, dtype=np.float64),
    )


def _select(backend):
    if backend is None:
        return _impl
    if backend == "python":
        return _pykernels
    if backend == "cython":
        from . import _ckernels

        return _ckernels
    raise ValueError(f"unknown backend {backend!r}")
