"""Field comparison metrics: RMS, max-abs, amplitude ratio, zero-crossing wavelength."""
from __future__ import annotations

import numpy as np

from .errors import AlignmentError


def zero_crossings(x, y) -> np.ndarray:
    """Linearly interpolated sign changes of y(x), ignoring NaNs."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    ok = np.isfinite(y)
    x, y = x[ok], y[ok]
    s = np.nonzero(np.signbit(y[1:]) != np.signbit(y[:-1]))[0]
    return x[s] - y[s] * (x[s + 1] - x[s]) / (y[s + 1] - y[s])


def wavelength(x, y) -> float:
    """Twice the mean spacing of zero crossings; NaN with fewer than two crossings."""
    z = zero_crossings(x, y)
    if z.size < 2:
        return float("nan")
    return float(2.0 * (z[-1] - z[0]) / (z.size - 1))


def _rms(f):
    return float(np.sqrt(np.mean(f * f))) if f.size else float("nan")


def compare(grid_a, a, grid_b, b, window=None) -> dict:
    """Metrics of a relative to b on a shared grid, restricted to the boolean ``window``.

    ``rms`` and ``max_abs`` are of a - b; ``rel_rms`` divides by max|b|;
    ``amplitude_ratio`` is RMS(a)/RMS(b).
    """
    grid_a = np.asarray(grid_a, dtype=float)
    grid_b = np.asarray(grid_b, dtype=float)
    if grid_a.shape != grid_b.shape or not np.array_equal(grid_a, grid_b):
        raise AlignmentError("fields are sampled on different grids")
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != grid_a.shape or b.shape != grid_b.shape:
        raise AlignmentError("field length does not match its grid")
    mask = np.ones(grid_a.shape, bool) if window is None else np.asarray(window, bool)
    mask = mask & np.isfinite(a) & np.isfinite(b)
    x, fa, fb = grid_a[mask], a[mask], b[mask]
    d = fa - fb
    scale = float(np.max(np.abs(fb))) if fb.size else float("nan")
    rb = _rms(fb)
    return {
        "rms": _rms(d),
        "max_abs": float(np.max(np.abs(d))) if d.size else float("nan"),
        "rel_rms": _rms(d) / scale if scale else float("nan"),
        "amplitude_ratio": _rms(fa) / rb if rb else float("nan"),
        "wavelength_a": wavelength(x, fa),
        "wavelength_b": wavelength(x, fb),
        "points": int(mask.sum()),
    }
