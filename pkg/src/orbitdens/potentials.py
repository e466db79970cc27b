"""Confining potentials and their classical turning points.

All potentials have a single minimum. For one-dimensional kinds the minimum
sits at ``x = 0`` (the box is flat and its reference point is its centre).
Radial kinds (``dimension > 1``) are evaluated on the even extension
``V(|r|)``, so the l = 0 radial libration becomes an ordinary 1D orbit that
passes through the origin.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.optimize import brentq

from .errors import DomainError, NoClassicalMotionError

KINDS = ("box", "harmonic", "quartic", "power_law", "two_sided_harmonic", "tabulated")

_DEFAULTS = {
    "box": {"L": 1.0, "x_left": 0.0},
    "harmonic": {"omega": 1.0},
    "quartic": {"c": 0.25},
    "power_law": {"c": 1.0, "alpha": 2.0},
    "two_sided_harmonic": {"omega_minus": 1.0, "omega_plus": 2.0},
    "tabulated": {},
}

SMOOTH = "smooth"
WALL = "wall"


@dataclass(frozen=True)
class PotentialSpec:
    """A confining potential.

    Use :func:`make_potential` to build one with validated parameters.
    ``walls`` is derived from the kind: only the box has hard walls.
    """

    kind: str
    params: Mapping[str, object] = field(default_factory=dict)
    dimension: int = 1
    walls: tuple = field(default=(False, False))

    def __post_init__(self):
        object.__setattr__(self, "walls", (True, True) if self.kind == "box" else (False, False))
        if self.kind == "tabulated":
            xs = np.asarray(self.params["x"], dtype=float)
            vs = np.asarray(self.params["V"], dtype=float)
            object.__setattr__(self, "_interp", PchipInterpolator(xs, vs, extrapolate=False))
            object.__setattr__(self, "_dinterp", self._interp.derivative())

    # -- geometry -----------------------------------------------------------------

    @property
    def radial(self) -> bool:
        return self.dimension > 1

    @property
    def domain(self) -> tuple[float, float]:
        p = self.params
        if self.kind == "box":
            if self.radial:
                return (-float(p["R"]), float(p["R"]))
            lo = float(p["x_left"])
            return (lo, lo + float(p["L"]))
        if self.kind == "tabulated":
            xs = np.asarray(p["x"], dtype=float)
            if self.radial:
                return (-xs[-1], xs[-1])
            return (xs[0], xs[-1])
        return (-np.inf, np.inf)

    @property
    def center(self) -> float:
        """Reference point of the actions: the position of the minimum."""
        if self.kind == "box":
            lo, hi = self.domain
            return 0.5 * (lo + hi)
        if self.kind == "tabulated" and not self.radial:
            xs = np.asarray(self.params["x"], dtype=float)
            return float(xs[np.argmin(self.params["V"])])
        return 0.0

    @property
    def v_min(self) -> float:
        return float(self.value(self.center))

    @property
    def symmetric(self) -> bool:
        if self.radial:
            return True
        if self.kind == "two_sided_harmonic":
            return self.params["omega_minus"] == self.params["omega_plus"]
        if self.kind == "tabulated":
            return False
        return True

    # -- evaluation ---------------------------------------------------------------

    def _check_domain(self, x):
        lo, hi = self.domain
        if np.isfinite(lo):
            tol = 1e-12 * max(1.0, hi - lo)
            if np.any(x < lo - tol) or np.any(x > hi + tol):
                raise DomainError(f"position outside potential domain [{lo}, {hi}]")

    def value(self, x):
        x = np.asarray(x, dtype=float)
        self._check_domain(x)
        p = self.params
        k = self.kind
        if self.radial:
            x = np.abs(x)
        if k == "box":
            out = np.zeros_like(x)
        elif k == "harmonic":
            out = 0.5 * p["omega"] ** 2 * x * x
        elif k == "quartic":
            out = p["c"] * x**4
        elif k == "power_law":
            out = p["c"] * np.abs(x) ** p["alpha"]
        elif k == "two_sided_harmonic":
            w = np.where(x < 0.0, p["omega_minus"], p["omega_plus"])
            out = 0.5 * w * w * x * x
        else:
            out = self._interp(np.clip(x, *self._interp.x[[0, -1]]))
        return out[()] if out.ndim == 0 else out

    __call__ = value

    def derivative(self, x):
        """dV/dx. Analytic for every closed-form kind, PCHIP derivative for tables."""
        x = np.asarray(x, dtype=float)
        self._check_domain(x)
        p = self.params
        k = self.kind
        sign = np.sign(x) if self.radial else 1.0
        if self.radial:
            x = np.abs(x)
        if k == "box":
            out = np.zeros_like(x)
        elif k == "harmonic":
            out = p["omega"] ** 2 * x
        elif k == "quartic":
            out = 4.0 * p["c"] * x**3
        elif k == "power_law":
            a = p["alpha"]
            out = a * p["c"] * np.sign(x) * np.abs(x) ** (a - 1.0)
        elif k == "two_sided_harmonic":
            w = np.where(x < 0.0, p["omega_minus"], p["omega_plus"])
            out = w * w * x
        else:
            out = self._dinterp(np.clip(x, *self._interp.x[[0, -1]]))
        out = out * sign
        return out[()] if np.ndim(out) == 0 else out

    def drop(self, x_turn: float, x, s=None):
        """V(x_turn) - V(x) for x between the centre and x_turn, without cancellation.

        ``s`` is the distance |x_turn - x| if the caller knows it exactly.

        Near a turning point E - V(x) is a small difference of two large numbers;
        power-law kinds rewrite it as -|x_t|^α·expm1(α·log1p(-s/|x_t|)).
        """
        x = np.asarray(x, dtype=float)
        k = self.kind
        p = self.params
        if k in ("harmonic", "quartic", "power_law", "two_sided_harmonic"):
            if k == "harmonic":
                coef, alpha = 0.5 * p["omega"] ** 2, 2.0
            elif k == "quartic":
                coef, alpha = p["c"], 4.0
            elif k == "power_law":
                coef, alpha = p["c"], p["alpha"]
            else:
                w = p["omega_minus"] if x_turn < 0 else p["omega_plus"]
                coef, alpha = 0.5 * w * w, 2.0
            at = abs(x_turn)
            if at == 0.0:
                return np.zeros_like(x)
            with np.errstate(divide="ignore"):
                s = np.abs(x_turn - x) if s is None else np.asarray(s, dtype=float)
                s = np.clip(s, 0.0, at)
                return -coef * at**alpha * np.expm1(alpha * np.log1p(-s / at))
        return self.value(x_turn) - self.value(x)

    def to_dict(self) -> dict:
        params = {}
        for key, val in self.params.items():
            params[key] = list(map(float, val)) if np.ndim(val) else float(val)
        return {"kind": self.kind, "params": params, "D": self.dimension}


def make_potential(kind: str, dimension: int = 1, **params) -> PotentialSpec:
    """Build a validated :class:`PotentialSpec`, filling in default parameters."""
    if kind not in KINDS:
        raise ValueError(f"unknown potential kind {kind!r}; expected one of {KINDS}")
    if dimension < 1:
        raise ValueError("dimension must be >= 1")
    full = dict(_DEFAULTS[kind])
    if kind == "box" and dimension > 1:
        full = {"R": 1.0}
    unknown = set(params) - set(full) - ({"x", "V"} if kind == "tabulated" else set())
    if unknown:
        raise ValueError(f"unknown parameters for {kind}: {sorted(unknown)}")
    full.update(params)

    if kind == "two_sided_harmonic" and dimension > 1:
        raise ValueError("two_sided_harmonic has no radial variant")
    if kind == "tabulated":
        xs = np.asarray(full["x"], dtype=float)
        vs = np.asarray(full["V"], dtype=float)
        if xs.ndim != 1 or xs.shape != vs.shape or xs.size < 4:
            raise ValueError("tabulated potential needs matching 1D arrays x, V with >= 4 samples")
        if np.any(np.diff(xs) <= 0):
            raise ValueError("tabulated x samples must be strictly increasing")
        imin = int(np.argmin(vs))
        if np.any(np.diff(vs[: imin + 1]) > 0) or np.any(np.diff(vs[imin:]) < 0):
            raise ValueError("tabulated V must decrease to a single minimum and increase after it")
        if dimension > 1 and (xs[0] != 0.0 or imin != 0):
            raise ValueError("radial tabulated potential must start at r = 0 with its minimum there")
        full["x"] = tuple(xs)
        full["V"] = tuple(vs)
    else:
        for key, val in full.items():
            full[key] = float(val)
        positive = {"box": ("R",) if dimension > 1 else ("L",), "harmonic": ("omega",), "quartic": ("c",),
                    "power_law": ("c", "alpha"), "two_sided_harmonic": ("omega_minus", "omega_plus")}[kind]
        for key in positive:
            if not full[key] > 0:
                raise ValueError(f"parameter {key} must be positive")
        if kind == "power_law" and full["alpha"] <= 1.0:
            # the turning-point Morse rule needs a continuous first derivative at the minimum
            raise ValueError("power_law alpha must be > 1")
    return PotentialSpec(kind=kind, params=full, dimension=int(dimension))


def evaluate(pot: PotentialSpec, x):
    """V(x); raises :class:`DomainError` outside a bounded domain."""
    return pot.value(x)


def evaluate_derivative(pot: PotentialSpec, x):
    return pot.derivative(x)


@dataclass(frozen=True)
class TurningPoints:
    x_minus: float
    x_plus: float
    left: str = SMOOTH
    right: str = SMOOTH

    @property
    def walls(self) -> tuple[bool, bool]:
        return (self.left == WALL, self.right == WALL)


def _outer_root(pot: PotentialSpec, E: float, direction: int) -> float:
    c = pot.center
    lo, hi = pot.domain
    limit = hi if direction > 0 else lo
    step = 1.0
    inner = c
    while True:
        outer = c + direction * step
        if np.isfinite(limit) and direction * (outer - limit) >= 0:
            outer = limit
            if pot.value(outer) < E:
                raise DomainError("classically allowed region extends past the tabulated domain")
        if pot.value(outer) >= E:
            break
        inner = outer
        step *= 2.0
        if step > 1e12:
            raise DomainError("potential does not confine at this energy")
    a, b = sorted((inner, outer))
    return brentq(lambda s: float(pot.value(s)) - E, a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)


def turning_points(pot: PotentialSpec, E: float) -> TurningPoints:
    """Classical turning points x₋(E) ≤ center ≤ x₊(E).

    Hard walls are returned at the wall position with classification ``wall``.
    """
    E = float(E)
    if not E > pot.v_min:
        raise NoClassicalMotionError(f"E={E} does not exceed min V={pot.v_min}")
    if pot.kind == "box":
        lo, hi = pot.domain
        return TurningPoints(lo, hi, WALL, WALL)
    xp = _outer_root(pot, E, +1)
    xm = -xp if pot.symmetric and pot.center == 0.0 else _outer_root(pot, E, -1)
    return TurningPoints(xm, xp, SMOOTH, SMOOTH)
