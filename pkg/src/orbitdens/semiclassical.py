"""Oscillating densities from closed non-periodic orbits and the relations they obey.

In 1D the orbits closing at x are labelled by the number k of extra full
librations and the turning point σ = ± visited first. Each contributes

    (m / π p(x)) sin((kS₁ + R_σ)/ħ - μ_{k,σ} π/2) / (kT₁ + R'_σ)

with μ counting reflections (1 per smooth turning point, 2 per hard wall).
For two smooth turning points the Morse phase reproduces the familiar
-(m/π p)(-1)^k cos(...) form.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.special import gamma, jv

from . import kernels
from .classical import ClassicalActions, classical_actions, primitive_orbit
from .errors import DomainError, ResolutionError, WindowError
from .potentials import PotentialSpec, turning_points
from .quantum import DensityProfile, HALF, radial_laplacian

FULL_SUM = "full-sum"
CENTRAL = "central-approx"
BESSEL = "bessel"
QM_SUBTRACTED = "qm-subtracted"


@dataclass(frozen=True)
class OscillationField:
    grid: np.ndarray
    drho: np.ndarray
    provenance: str
    dtau: np.ndarray | None = None
    dtau1: np.ndarray | None = None
    k_max: int = 0
    error: np.ndarray | None = None
    flagged: np.ndarray | None = None  # True where the value is excluded from metrics
    lam_tilde: float = float("nan")


def interior_mask(actions: ClassicalActions, x, fraction: float) -> np.ndarray:
    """Points within ``fraction`` of the distance from the centre to each turning point."""
    x = np.asarray(x, dtype=float)
    c = actions.pot.center
    tp = actions.turning
    return (x >= c - fraction * (c - tp.x_minus)) & (x <= c + fraction * (tp.x_plus - c))


def _phases(actions: ClassicalActions):
    """Morse index of the k = 0 orbit per branch (σ = +, -) and its increment per libration."""
    return (actions.morse_plus, actions.morse_minus), actions.morse_period


def _orbit_sum(actions: ClassicalActions, r, rp, k_max: int, backend=None):
    """Accelerated Σ_{k,σ} sin(...)/(...) and |last term|, for branch data r, rp of shape (n, 2)."""
    hb = actions.hbar
    mu0, dmu = _phases(actions)
    theta0 = r / hb - np.asarray(mu0, dtype=float)[None, :] * math.pi / 2
    dtheta = actions.S1 / hb - dmu * math.pi / 2
    return kernels.orbit_sum(theta0, rp, dtheta, actions.T1, k_max, backend=backend)


def delta_rho_1d(pot: PotentialSpec, lam_tilde: float, x, k_max: int = 200, turning_zone: float = 0.95,
                 hbar: float = 1.0, m: float = 1.0, backend=None, actions: ClassicalActions | None = None
                 ) -> OscillationField:
    """Full closed-orbit sum for δρ(x), k = 0..k_max, averaged over the last two partial sums.

    Points outside the allowed interval get NaN; points outside ``turning_zone``
    (fraction of the centre-to-turning-point distance) are computed but flagged.
    """
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    ca = actions or classical_actions(pot, lam_tilde, m, hbar)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    tp = ca.turning
    inside = (x > tp.x_minus) & (x < tp.x_plus)
    drho = np.full(x.shape, np.nan)
    err = np.full(x.shape, np.nan)
    if np.any(inside):
        xi = x[inside]
        r_plus, r_minus, rp_plus, rp_minus = ca.geometry(xi)
        total, last = _orbit_sum(ca, np.stack([r_plus, r_minus], 1), np.stack([rp_plus, rp_minus], 1), k_max,
                                 backend)
        pref = m / (math.pi * np.sqrt(2 * m * (lam_tilde - pot.value(xi))))
        drho[inside] = pref * total
        err[inside] = 0.5 * pref * last
    flagged = ~interior_mask(ca, x, turning_zone) | ~inside
    return OscillationField(x, drho, FULL_SUM, k_max=k_max, error=err, flagged=flagged, lam_tilde=float(lam_tilde))


def delta_kinetic_1d(field: OscillationField, pot: PotentialSpec, lam_tilde: float) -> OscillationField:
    """Local virial theorem δτ = (λ̃ - V)δρ and δτ₁ = -δτ."""
    dtau = (lam_tilde - pot.value(field.grid)) * field.drho
    return replace(field, dtau=dtau, dtau1=-dtau)


def central_orbit_sum(s1_over_hbar: float, k_max: int = 200, backend=None) -> float:
    """C = Σ_k (-1)^k cos((k + 1/2) S₁/ħ) / (k + 1/2), accelerated like the full sum."""
    theta0 = np.array([[0.5 * s1_over_hbar + math.pi / 2]])
    tau0 = np.array([[0.5]])
    total, _ = kernels.orbit_sum(theta0, tau0, s1_over_hbar + math.pi, 1.0, k_max, backend=backend)
    return float(total[0])


def delta_rho_central_1d(pot: PotentialSpec, lam_tilde: float, N: int, x, mode: str = "closed",
                         k_max: int = 200, window: float = 0.1, hbar: float = 1.0, m: float = 1.0,
                         backend=None, actions: ClassicalActions | None = None):
    """Central-region δρ where V ≪ λ̃: S(λ̃, c, x) ≈ (x - c)p_λ and R'_σ ≈ T₁/2.

    ``closed``: (-1)^(N+1) m/(p_λT₁) cos(2(x - c)p_λ/ħ + δΦ).
    ``series``: the same orbit sum as the full form with the linearized actions,
    which for two smooth turning points is -2m cos(2xp_λ/ħ + δΦ) C/(π p_λ T₁).
    Raises :class:`WindowError` where V(x) - V_min ≥ window·(λ̃ - V_min).
    """
    ca = actions or classical_actions(pot, lam_tilde, m, hbar)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    v0 = pot.v_min
    lo, hi = pot.domain
    if np.any(x < lo) or np.any(x > hi) or np.any(pot.value(np.clip(x, lo, hi)) - v0 >= window * (lam_tilde - v0)):
        raise WindowError(f"central formula needs V(x) < {window}·λ̃")
    p_lam = math.sqrt(2 * m * (lam_tilde - v0))
    d = x - pot.center
    if mode == "closed":
        sign = -1.0 if N % 2 == 0 else 1.0
        return sign * m / (p_lam * ca.T1) * np.cos(2 * d * p_lam / hbar + ca.delta_phi)
    if mode != "series":
        raise ValueError("mode must be 'closed' or 'series'")
    r = np.stack([2 * ca.S_plus - 2 * d * p_lam, 2 * ca.S_minus + 2 * d * p_lam], 1)
    rp = np.full_like(r, 0.5 * ca.T1)
    total, _ = _orbit_sum(ca, r, rp, k_max, backend)
    return m / (math.pi * p_lam) * total


# -- radial ----------------------------------------------------------------------


def scaled_bessel(nu: float, z):
    """(z/2)^(-ν) J_ν(z), finite at z = 0 where it equals 1/Γ(ν+1)."""
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    small = np.abs(z) < 1.0
    zs = z[small]
    q = -0.25 * zs * zs
    term = np.full(zs.shape, 1.0 / gamma(nu + 1.0))
    acc = term.copy()
    for k in range(1, 30):
        term = term * q / (k * (k + nu))
        acc = acc + term
    out[small] = acc
    zl = z[~small]
    out[~small] = jv(nu, zl) / (0.5 * zl) ** nu
    return out


def radial_period(pot: PotentialSpec, lam_tilde: float, m: float = 1.0) -> float:
    """T_r1: the full period of the linear l = 0 orbit through the origin, r₊ → -r₊ → r₊."""
    return primitive_orbit(pot, lam_tilde, m)[1]


def delta_rho_radial_central(pot: PotentialSpec, lam_tilde: float, M: int, r, T_r1: float | None = None,
                             hbar: float = 1.0, m: float = 1.0) -> OscillationField:
    """δρ(r) = (-1)^(M-1) (m / 2ħT_r1) (p_λ/4πħr)^ν J_ν(2rp_λ/ħ), ν = D/2 - 1."""
    D = pot.dimension
    if D not in (1, 2, 3):
        raise ValueError("radial Bessel law implemented for D = 1, 2, 3")
    r = np.asarray(r, dtype=float)
    if np.any(r < 0) and D > 1:
        raise DomainError("radius must be non-negative")
    if T_r1 is None:
        T_r1 = radial_period(pot, lam_tilde, m)
    nu = 0.5 * D - 1.0
    p_lam = math.sqrt(2 * m * (lam_tilde - pot.v_min))
    z = 2 * np.abs(r) * p_lam / hbar
    # (p/4πħr)^ν J_ν(z) = (p²/4πħ²)^ν (z/2)^(-ν) J_ν(z)
    val = (-1.0) ** (M - 1) * m / (2 * hbar * T_r1) * (p_lam**2 / (4 * math.pi * hbar**2)) ** nu
    drho = val * scaled_bessel(nu, z)
    return OscillationField(r, drho, BESSEL, lam_tilde=float(lam_tilde))


# -- relation validators -----------------------------------------------------------


def _window_for(profile: DensityProfile, pot: PotentialSpec, lam_tilde: float, fraction: float, m: float):
    x = profile.grid
    if profile.dimension > 1:
        return np.abs(x) <= fraction * turning_points(pot, lam_tilde).x_plus
    return interior_mask(classical_actions(pot, lam_tilde, m), x, fraction)


def local_virial_residual(profile: DensityProfile, pot: PotentialSpec, lam_tilde: float | None = None,
                          window: float = 0.8, m: float = 1.0) -> dict:
    """Normalized residuals of δτ = (λ̃ - V)δρ and δτ₁ = -δτ on the QM-subtracted fields."""
    lam = profile.lam_tilde if lam_tilde is None else lam_tilde
    if profile.rho_tf is None:
        raise ValueError("profile carries no smooth reference; call with_smooth first")
    mask = _window_for(profile, pot, lam, window, m)
    v = pot.value(profile.grid)
    virial = profile.dtau - (lam - v) * profile.drho
    tautau = profile.dtau1 + profile.dtau
    scale = float(np.max(np.abs(profile.dtau[mask])))
    if scale == 0.0:
        scale = 1.0
    rms = lambda f: float(np.sqrt(np.mean(f[mask] ** 2))) / scale  # noqa: E731
    return {
        "virial_rms": rms(virial),
        "virial_max": float(np.max(np.abs(virial[mask]))) / scale,
        "tautau_rms": rms(tautau),
        "tautau_max": float(np.max(np.abs(tautau[mask]))) / scale,
        "residual": virial,
        "mask": mask,
    }


def laplace_relation_residual(r, drho, pot: PotentialSpec | None, lam_tilde: float, D: int,
                              window: float = 0.1, hbar: float = 1.0, m: float = 1.0, half: int = HALF,
                              r_max: float | None = None) -> dict:
    """Normalized RMS of -(ħ²/8m)∇²δρ - (λ̃ - V)δρ where V(r) < window·λ̃.

    ``pot=None`` means V ≡ 0, for which the Bessel law is an exact solution.
    ``r_max`` further restricts the window. The stencil needs at least ten
    points per wavelength πħ/p_λ.
    """
    r = np.asarray(r, dtype=float)
    drho = np.asarray(drho, dtype=float)
    h = r[1] - r[0]
    v = np.zeros_like(r) if pot is None else pot.value(r)
    v0 = 0.0 if pot is None else pot.v_min
    p_lam = math.sqrt(2 * m * (lam_tilde - v0))
    wavelength = math.pi * hbar / p_lam
    if h > wavelength / 10:
        raise ResolutionError(f"grid spacing {h:.3g} too coarse for wavelength {wavelength:.3g}")
    lap = radial_laplacian(r, drho, D, half)
    resid = -(hbar**2 / (8 * m)) * lap - (lam_tilde - v) * drho
    mask = v - v0 < window * (lam_tilde - v0)
    # the far stencil end sees zero ghosts; keep away from it
    mask &= r <= r[-1] - (half + 1) * h
    if r_max is not None:
        mask &= r <= r_max
    ref = (lam_tilde - v[mask]) * drho[mask]
    norm = float(np.sqrt(np.mean(ref**2)))
    rms = float(np.sqrt(np.mean(resid[mask] ** 2)))
    return {"laplace_rms": rms / norm if norm > 0 else rms, "points": int(mask.sum()), "residual": resid}
