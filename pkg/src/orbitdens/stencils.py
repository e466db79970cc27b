"""Central finite-difference weights and ghost-point padding."""
from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import factorial

import numpy as np


@lru_cache(maxsize=None)
def central_weights(deriv: int, half: int) -> np.ndarray:
    """Weights c_s, s = -half..half, of the order-2*half central stencil for d^deriv/dx^deriv.

    Solved exactly in rationals from the Taylor conditions Σ c_s s^k/k! = δ_{k,deriv}.
    """
    offsets = list(range(-half, half + 1))
    n = len(offsets)
    a = [[Fraction(s) ** k / factorial(k) for s in offsets] + [Fraction(int(k == deriv))] for k in range(n)]
    for col in range(n):
        piv = next(r for r in range(col, n) if a[r][col] != 0)
        a[col], a[piv] = a[piv], a[col]
        pivot = a[col][col]
        a[col] = [v / pivot for v in a[col]]
        for r in range(n):
            if r != col and a[r][col] != 0:
                f = a[r][col]
                a[r] = [vr - f * vc for vr, vc in zip(a[r], a[col])]
    return np.array([float(row[-1]) for row in a])


def pad(values: np.ndarray, half: int, left: float, right: float) -> np.ndarray:
    """Extend samples on a grid whose end points are boundary nodes.

    Ghost values mirror through each end node with the given parity
    (``-1`` odd, ``+1`` even, ``0`` zero). Works on the leading axis.
    """
    v = np.asarray(values, dtype=float)
    lo = v[1:half + 1][::-1] * left
    hi = v[-half - 1:-1][::-1] * right
    return np.concatenate([lo, v, hi], axis=0)


def apply(values: np.ndarray, deriv: int, half: int, h: float, left: float, right: float) -> np.ndarray:
    """d^deriv/dx^deriv at every node by the central stencil, ghosts from :func:`pad`."""
    c = central_weights(deriv, half)
    p = pad(values, half, left, right)
    n = np.shape(values)[0]
    out = np.zeros(np.shape(values))
    for s in range(2 * half + 1):
        out = out + c[s] * p[s:s + n]
    return out / h**deriv
