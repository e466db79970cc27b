"""Smooth Thomas-Fermi reference: λ̃, ρ_TF, τ_TF and the periodic-orbit cancellation check."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from . import kernels
from ._pykernels import orbit_terms_matrix
from .classical import classical_actions, energy_for_action, integrate
from .errors import ConfigError, NoClassicalMotionError
from .potentials import PotentialSpec, turning_points
from .quantum import EigenSolution, Occupation, sphere_area

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SmoothReference:
    lam_tilde: float
    p_lambda: float
    grid: np.ndarray
    rho_tf: np.ndarray
    tau_tf: np.ndarray
    dimension: int = 1


def local_momentum(pot: PotentialSpec, lam: float, x, m: float = 1.0):
    """p_F(x) = sqrt(2m[λ - V(x)]), zero in the forbidden region."""
    return np.sqrt(2 * m * np.clip(lam - pot.value(x), 0.0, None))


def tf_density_from_momentum(p, D: int, hbar: float = 1.0, m: float = 1.0):
    """(ρ_TF, τ_TF) of a filled Fermi sphere of radius p in D dimensions, no spin."""
    omega = sphere_area(D)
    rho = omega * p**D / (D * (2 * math.pi * hbar) ** D)
    tau = omega * p ** (D + 2) / ((D + 2) * (2 * math.pi * hbar) ** D * 2 * m)
    return rho, tau


def tf_count(pot: PotentialSpec, lam: float, hbar: float = 1.0, m: float = 1.0) -> float:
    """∫ρ_TF d^D r at Fermi energy λ."""
    D = pot.dimension
    if D == 1:
        tp = turning_points(pot, lam)

        def g(x, x_turn=None, s=None):
            kin = pot.drop(x_turn, x, s) if x_turn is not None else lam - pot.value(x)
            return tf_density_from_momentum(np.sqrt(2 * m * np.clip(kin, 0, None)), 1, hbar, m)[0]

        return float(integrate(pot, lam, tp.x_minus, tp.x_plus, g, m, tp))
    tp = turning_points(pot, lam)
    omega = sphere_area(D)

    def g(x, x_turn=None, s=None):
        kin = pot.drop(x_turn, x, s) if x_turn is not None else lam - pot.value(x)
        rho = tf_density_from_momentum(np.sqrt(2 * m * np.clip(kin, 0, None)), D, hbar, m)[0]
        return omega * np.abs(x) ** (D - 1) * rho

    return float(integrate(pot, lam, 0.0, tp.x_plus, g, m, tp))


def smooth_action_target(pot: PotentialSpec, N: int, hbar: float = 1.0) -> float:
    """S₁(λ̃) fixed by smooth level counting, 2πħ(N + μ/4 - 1/2) with μ the Morse index per period.

    For two smooth turning points μ = 2 and this is the plain Bohr-Sommerfeld
    rule S₁ = 2πħN; a hard wall adds a quarter per side.
    """
    mu = (2 if pot.walls[0] else 1) + (2 if pot.walls[1] else 1)
    return 2 * math.pi * hbar * (N + mu / 4 - 0.5)


def fermi_energy_smooth(pot: PotentialSpec, N: int, hbar: float = 1.0, m: float = 1.0) -> float:
    """Smooth Fermi energy: Bohr-Sommerfeld in 1D, Thomas-Fermi particle count for radial D."""
    if N < 1:
        raise ConfigError("must be >= 1", "N")
    if pot.dimension == 1:
        try:
            return energy_for_action(pot, smooth_action_target(pot, N, hbar), m)
        except NoClassicalMotionError as exc:
            raise ConfigError(f"smooth Fermi energy not bracketed: {exc}", "N") from exc
    e0 = pot.v_min
    hi = e0 + 1.0
    while tf_count(pot, hi, hbar, m) < N:
        hi = e0 + 2 * (hi - e0)
        if hi - e0 > 1e12:
            raise ConfigError("smooth Fermi energy not bracketed", "N")
    return brentq(lambda lam: tf_count(pot, lam, hbar, m) - N, e0 + 1e-12 * (hi - e0), hi, xtol=1e-15,
                  rtol=1e-14, maxiter=200)


def tf_densities(pot: PotentialSpec, lam_tilde: float, grid, hbar: float = 1.0, m: float = 1.0) -> SmoothReference:
    """ρ_TF and τ_TF on ``grid``; both vanish where V ≥ λ̃."""
    grid = np.asarray(grid, dtype=float)
    lo, hi = pot.domain
    inside = (grid >= lo) & (grid <= hi)
    p = np.zeros_like(grid)
    p[inside] = local_momentum(pot, lam_tilde, grid[inside], m)
    rho, tau = tf_density_from_momentum(p, pot.dimension, hbar, m)
    p_lam = math.sqrt(2 * m * (lam_tilde - pot.v_min))
    return SmoothReference(float(lam_tilde), p_lam, grid, rho, tau, pot.dimension)


@dataclass
class CancellationReport:
    x: np.ndarray
    rho1: np.ndarray
    delta: np.ndarray
    residual: float
    rho1_norm: float
    alternation: float
    j_max: int

    def as_metrics(self) -> dict:
        return {"po_residual": self.residual, "po_rho1_norm": self.rho1_norm,
                "po_alternation": self.alternation, "po_j_max": self.j_max}


def rho_periodic(pot: PotentialSpec, lam_tilde: float, x, j_max: int = 2000, hbar: float = 1.0, m: float = 1.0,
                 backend=None):
    """Periodic-orbit term ρ₁(x) = (2m/π) Σ_j sin(jS₁/ħ - jμπ/2) / (p jT₁)."""
    ca = classical_actions(pot, lam_tilde, m, hbar)
    dth = ca.S1 / hbar - ca.morse_period * math.pi / 2
    x = np.asarray(x, dtype=float)
    theta0 = np.array([[dth]])
    tau0 = np.array([[ca.T1]])
    total, _ = kernels.orbit_sum(theta0, tau0, dth, ca.T1, j_max - 1, backend=backend)
    p = local_momentum(pot, lam_tilde, x, m)
    with np.errstate(divide="ignore"):
        return np.where(p > 0, 2 * m / (math.pi * p) * total[0], 0.0), ca, (theta0, tau0, dth)


def po_cancellation_diagnostic(pot: PotentialSpec, N: int, sol: EigenSolution, occ: Occupation,
                               window: float = 0.8, j_max: int = 2000, hbar: float = 1.0,
                               m: float = 1.0) -> CancellationReport:
    """Compare ρ₁ with the first-order shift ρ₀(λ_QM) - ρ₀(λ̃) over the interior window.

    Informational only: the residual ‖Δ + ρ₁‖/‖ρ₁‖ is reported, not asserted.
    """
    lam = fermi_energy_smooth(pot, N, hbar, m)
    tp = turning_points(pot, lam)
    c = pot.center
    x = sol.grid
    mask = (x >= c - window * (c - tp.x_minus)) & (x <= c + window * (tp.x_plus - c))
    xs = x[mask]
    rho1, ca, (theta0, tau0, dth) = rho_periodic(pot, lam, xs, j_max, hbar, m)
    rho0 = lambda e: tf_density_from_momentum(local_momentum(pot, e, xs, m), 1, hbar, m)[0]  # noqa: E731
    delta = rho0(occ.lam_qm) - rho0(lam)
    n1 = float(np.sqrt(np.mean(rho1**2)))
    nres = float(np.sqrt(np.mean((delta + rho1) ** 2)))
    if n1 > 1e-12 * float(np.max(rho0(lam))):
        residual = nres / n1
    else:
        residual = nres / float(np.max(rho0(lam)))
        log.info("rho_1 vanishes (S1/hbar on a multiple of 2pi); residual taken relative to rho_TF")
    partial = np.cumsum(orbit_terms_matrix(theta0, tau0, dth, ca.T1, min(j_max, 200) - 1)[0])
    dev = np.sign(partial - partial[-1])[:-1]
    alternation = float(np.mean(dev[1:] * dev[:-1] < 0)) if dev.size > 2 else 0.0
    log.info("periodic-orbit series: residual %.3e, sign alternation fraction %.2f", residual, alternation)
    return CancellationReport(xs, rho1, delta, residual, n1, alternation, j_max)


def fermi_offset(pot: PotentialSpec, N: int, occ: Occupation, hbar: float = 1.0, m: float = 1.0) -> float:
    """(λ_QM - λ̃) in units of the local level spacing LUMO - HOMO."""
    lam = fermi_energy_smooth(pot, N, hbar, m)
    return (occ.lam_qm - lam) / (occ.lumo - occ.homo)
