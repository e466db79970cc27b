"""Classical actions, periods and the closed-orbit bookkeeping of 1D motion.

Every quantity here is a quadrature of p(x) = sqrt(2m[E - V(x)]) or of the
transit-time density m/p(x) between two points of the classically allowed
interval. Intervals are split at the potential centre and each half is
integrated in the square-root variable of its own turning point, so the
integrands are analytic up to the endpoints. Times (T1 and the orbit times
R'±) are integrated directly rather than by differentiating actions.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import quadrature
from .errors import DomainError, NoClassicalMotionError
from .potentials import PotentialSpec, TurningPoints, turning_points

QUAD_RTOL = 1e-13


def _inside_tol(tp: TurningPoints) -> float:
    return 1e-11 * max(1.0, tp.x_plus - tp.x_minus)


def _kinetic(pot, E, x, x_turn, s):
    if x_turn is None:
        return E - pot.value(x)
    # V(x_turn) = E by definition; adding the root-finder residual E - V(x_turn)
    # would turn the square-root zero into a true singularity.
    return pot.drop(x_turn, x, s)


def _integrand(pot, E, m, what):
    if what == "action":
        def g(x, x_turn=None, s=None):
            return np.sqrt(2.0 * m * np.clip(_kinetic(pot, E, x, x_turn, s), 0.0, None))
    elif what == "time":
        def g(x, x_turn=None, s=None):
            kin = np.maximum(_kinetic(pot, E, x, x_turn, s), 1e-300)
            return m / np.sqrt(2.0 * m * kin)
    else:
        g = what
    return g


def _side_integral(pot, E, tp, a, b, side, g):
    """∫_a^b g over an interval lying entirely on one side of the centre."""
    wall = tp.walls[1] if side > 0 else tp.walls[0]
    if wall:
        return quadrature.adaptive(g, a, b, rtol=QUAD_RTOL, atol=1e-300)
    x_turn = tp.x_plus if side > 0 else tp.x_minus
    return quadrature.endpoint_substituted(g, a, b, x_turn, side, rtol=QUAD_RTOL, atol=1e-300)


def integrate(pot: PotentialSpec, E: float, a, b, what="action", m: float = 1.0, tp: TurningPoints | None = None):
    """∫_a^b of the chosen integrand along the allowed interval, vectorized over a, b.

    ``what`` is ``"action"`` (p), ``"time"`` (m/p), or a callable
    ``g(x, x_turn, s)`` (``x_turn`` and ``s`` are None on wall sides). Requires x₋(E) ≤ a ≤ b ≤ x₊(E).
    """
    tp = tp or turning_points(pot, E)
    a, b = np.broadcast_arrays(np.asarray(a, dtype=float), np.asarray(b, dtype=float))
    tol = _inside_tol(tp)
    if np.any(a > b + tol):
        raise DomainError("integration limits must satisfy a <= b")
    if np.any(a < tp.x_minus - tol) or np.any(b > tp.x_plus + tol):
        raise DomainError("interval leaves the classically allowed region")
    a = np.clip(a, tp.x_minus, tp.x_plus)
    b = np.clip(np.maximum(a, b), tp.x_minus, tp.x_plus)
    g = _integrand(pot, E, m, what)
    c = pot.center
    left = _side_integral(pot, E, tp, np.minimum(a, c), np.minimum(b, c), -1, g)
    right = _side_integral(pot, E, tp, np.maximum(a, c), np.maximum(b, c), +1, g)
    out = left + right
    return out[()] if out.ndim == 0 else out


def action_partial(pot: PotentialSpec, E: float, a, b, m: float = 1.0):
    """S(E, a, b) = ∫_a^b sqrt(2m[E - V]) dx."""
    return integrate(pot, E, a, b, "action", m)


def traversal_time(pot: PotentialSpec, E: float, a, b, m: float = 1.0):
    """Classical time to go from a to b: ∫_a^b m/p dx."""
    return integrate(pot, E, a, b, "time", m)


def primitive_orbit(pot: PotentialSpec, E: float, m: float = 1.0) -> tuple[float, float]:
    """(S₁, T₁) of the primitive periodic libration between the turning points."""
    tp = turning_points(pot, E)
    s = integrate(pot, E, tp.x_minus, tp.x_plus, "action", m, tp)
    t = integrate(pot, E, tp.x_minus, tp.x_plus, "time", m, tp)
    return 2.0 * float(s), 2.0 * float(t)


def morse_weight(wall: bool) -> int:
    """Morse index contribution of one reflection: 1 at a smooth turning point, 2 at a hard wall."""
    return 2 if wall else 1


@dataclass(frozen=True)
class OrbitTerm:
    """One closed non-periodic orbit through x: k extra bounces, starting toward side sigma."""

    k: int
    sigma: int
    action: float
    time: float
    morse: int


@dataclass(frozen=True)
class ClassicalActions:
    pot: PotentialSpec
    energy: float
    turning: TurningPoints
    S_minus: float
    S_plus: float
    t_minus: float
    t_plus: float
    m: float = 1.0
    hbar: float = 1.0

    @property
    def S1(self) -> float:
        return 2.0 * (self.S_minus + self.S_plus)

    @property
    def T1(self) -> float:
        return 2.0 * (self.t_minus + self.t_plus)

    @property
    def delta_phi(self) -> float:
        return (self.S_minus - self.S_plus) / self.hbar

    @property
    def morse_minus(self) -> int:
        return morse_weight(self.turning.walls[0])

    @property
    def morse_plus(self) -> int:
        return morse_weight(self.turning.walls[1])

    @property
    def morse_period(self) -> int:
        """Morse index gained per full libration."""
        return self.morse_minus + self.morse_plus

    def S_partial(self, a, b):
        return integrate(self.pot, self.energy, a, b, "action", self.m, self.turning)

    def time_partial(self, a, b):
        return integrate(self.pot, self.energy, a, b, "time", self.m, self.turning)

    def geometry(self, x):
        """R±(x) and R'±(x) for every x strictly inside the allowed interval.

        R₊ = 2S(x, x₊) and R₋ = 2S(x₋, x), i.e. 2S± ∓ 2S(center, x).
        """
        x = np.asarray(x, dtype=float)
        tp = self.turning
        if np.any(x <= tp.x_minus) or np.any(x >= tp.x_plus):
            raise DomainError("orbit data requires x strictly between the turning points")
        r_plus = 2.0 * self.S_partial(x, tp.x_plus)
        r_minus = 2.0 * self.S_partial(tp.x_minus, x)
        rp_plus = 2.0 * self.time_partial(x, tp.x_plus)
        rp_minus = 2.0 * self.time_partial(tp.x_minus, x)
        return r_plus, r_minus, rp_plus, rp_minus


def classical_actions(pot: PotentialSpec, E: float, m: float = 1.0, hbar: float = 1.0) -> ClassicalActions:
    tp = turning_points(pot, E)
    c = pot.center
    s_minus = float(integrate(pot, E, tp.x_minus, c, "action", m, tp))
    s_plus = float(integrate(pot, E, c, tp.x_plus, "action", m, tp))
    t_minus = float(integrate(pot, E, tp.x_minus, c, "time", m, tp))
    t_plus = float(integrate(pot, E, c, tp.x_plus, "time", m, tp))
    return ClassicalActions(pot, float(E), tp, s_minus, s_plus, t_minus, t_plus, m, hbar)


def orbit_terms(actions: ClassicalActions, x: float, k_max: int) -> list[OrbitTerm]:
    """The 2(k_max+1) type-2 orbits closing at x, ordered by k then sigma (+ first).

    Orbit (k, +) reflects k+1 times at x₊ and k times at x₋; (k, -) the reverse.
    """
    if k_max < 0:
        raise ValueError("k_max must be >= 0")
    r_plus, r_minus, rp_plus, rp_minus = (float(v) for v in actions.geometry(x))
    mp, mm = actions.morse_plus, actions.morse_minus
    S1, T1 = actions.S1, actions.T1
    out = []
    for k in range(k_max + 1):
        out.append(OrbitTerm(k, +1, k * S1 + r_plus, k * T1 + rp_plus, (k + 1) * mp + k * mm))
        out.append(OrbitTerm(k, -1, k * S1 + r_minus, k * T1 + rp_minus, (k + 1) * mm + k * mp))
    return out


def energy_for_action(pot: PotentialSpec, target: float, m: float = 1.0, rtol: float = 1e-13) -> float:
    """Energy E with S₁(E) = target: bracketing plus safeguarded Newton (dS₁/dE = T₁)."""
    if not target > 0:
        raise ValueError("target action must be positive")
    e0 = pot.v_min
    lo, hi = e0, e0 + 1.0
    while primitive_orbit(pot, hi, m)[0] < target:
        lo, hi = hi, e0 + 2.0 * (hi - e0)
        if hi - e0 > 1e15:
            raise NoClassicalMotionError("could not bracket the requested action")
    E = 0.5 * (lo + hi)
    for _ in range(200):
        S, T = primitive_orbit(pot, E, m)
        f = S - target
        if f > 0:
            hi = E
        else:
            lo = E
        step = E - f / T
        E_new = step if lo < step < hi else 0.5 * (lo + hi)
        if abs(E_new - E) <= rtol * max(abs(E_new - e0), 1e-300) or hi - lo <= rtol * abs(hi - e0):
            return E_new
        E = E_new
    return E


def actions_table(actions: ClassicalActions, x) -> dict[str, np.ndarray]:
    """Per-position orbit data for the CSV diagnostic dump."""
    x = np.asarray(x, dtype=float)
    r_plus, r_minus, rp_plus, rp_minus = actions.geometry(x)
    return {
        "x": x,
        "S_center_x": actions.S_partial(np.minimum(x, actions.pot.center), np.maximum(x, actions.pot.center))
        * np.sign(x - actions.pot.center),
        "R_plus": r_plus,
        "R_minus": r_minus,
        "Rp_plus": rp_plus,
        "Rp_minus": rp_minus,
    }

