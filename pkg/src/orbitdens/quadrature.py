"""Gauss-Legendre panels with the square-root substitution at turning points.

Near a smooth turning point x_t the momentum behaves like sqrt(|x - x_t|), so
both the action integrand p and the time integrand m/p have singular
derivatives there. Substituting x = x_t -/+ t**2 makes p*dx ~ t**2 dt and
(m/p)*dx ~ const*dt, both analytic in t, and plain Gauss-Legendre converges
geometrically.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np

from .errors import AccuracyError


@lru_cache(maxsize=None)
def gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights on [0, 1]."""
    u, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (u + 1.0), 0.5 * w


def composite(f, a, b, panels: int, order: int = 24):
    """Composite Gauss-Legendre of ``f`` on [a, b], vectorized over the arrays a, b.

    ``f`` receives an array of shape ``a.shape + (panels*order,)``.
    """
    a = np.asarray(a, dtype=float)[..., None]
    b = np.asarray(b, dtype=float)[..., None]
    u, w = gauss_legendre(order)
    j = np.arange(panels)[:, None]
    s = ((j + u[None, :]) / panels).ravel()
    ws = np.tile(w, panels) / panels
    pts = a + (b - a) * s
    return ((b - a)[..., 0]) * np.sum(f(pts) * ws, axis=-1)


def adaptive(f, a, b, rtol=1e-13, atol=0.0, order=24, start=2, max_panels=1024):
    """Double the panel count until every interval in (a, b) agrees between refinements."""
    panels = start
    prev = composite(f, a, b, panels, order)
    while True:
        panels *= 2
        cur = composite(f, a, b, panels, order)
        err = np.abs(cur - prev)
        if np.all(err <= rtol * np.abs(cur) + atol):
            return cur
        if panels >= max_panels:
            raise AccuracyError("quadrature did not converge", deltas=float(np.max(err)))
        prev = cur


def endpoint_substituted(g, a, b, x_turn, side, **kw):
    """∫_a^b g(x) dx where ``x_turn`` is a square-root endpoint singularity of g.

    ``g`` is called as ``g(x, x_turn, s)`` with s = |x - x_turn| = t² passed
    exactly, since reconstructing it from x loses all precision as t → 0.

    ``side=+1``: the turning point lies to the right (a ≤ b ≤ x_turn) and
    x = x_turn - t²; ``side=-1``: x_turn ≤ a ≤ b and x = x_turn + t².
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if side > 0:
        t0 = np.sqrt(np.clip(x_turn - b, 0.0, None))
        t1 = np.sqrt(np.clip(x_turn - a, 0.0, None))

        def h(t):
            return g(x_turn - t * t, x_turn, t * t) * 2.0 * t
    else:
        t0 = np.sqrt(np.clip(a - x_turn, 0.0, None))
        t1 = np.sqrt(np.clip(b - x_turn, 0.0, None))

        def h(t):
            return g(x_turn + t * t, x_turn, t * t) * 2.0 * t
    return adaptive(h, t0, t1, **kw)
