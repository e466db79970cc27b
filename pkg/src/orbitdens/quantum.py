"""Exact quantum reference: eigenstates and the densities ρ, τ, τ₁ of N fermions.

One-dimensional problems and D = 3 radial channels use an eighth-order
central difference Hamiltonian on a uniform grid that includes the boundary
nodes. At a hard wall the ghost values are the odd reflection of the
interior (exact for sine-like states); at r = 0 a radial u_l(r) has parity
(-1)^(l+1). Domains of smooth potentials are truncated far enough into the
forbidden region that a zero ghost is harmless. D = 2 channels have
u ~ r^(|m|+1/2), which no polynomial stencil resolves, so they are solved for
R(r) with a second-order finite-volume scheme on a finer grid.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import eigsh

from . import kernels, stencils
from .classical import energy_for_action
from .errors import AccuracyError, DomainError, OpenShellError
from .potentials import PotentialSpec, turning_points

HALF = 4
CONVERGENCE_TOL = 1e-6


@dataclass
class RadialChannel:
    l: int
    degeneracy: int
    energies: np.ndarray
    u: np.ndarray  # reduced radial functions on the grid, shape (n_grid, n)
    parity: int  # ghost parity of u at r = 0


@dataclass
class EigenSolution:
    potential: PotentialSpec
    grid: np.ndarray
    h: float
    energies: np.ndarray
    states: np.ndarray | None = None
    channels: list[RadialChannel] = field(default_factory=list)
    parity: tuple[float, float] = (0.0, 0.0)
    half: int = HALF
    hbar: float = 1.0
    m: float = 1.0
    convergence: float = 0.0

    @property
    def dimension(self) -> int:
        return self.potential.dimension

    def overlap_matrix(self) -> np.ndarray:
        """Trapezoid-rule Gram matrix of the 1D states (boundary nodes carry zeros)."""
        w = np.full(self.grid.size, self.h)
        w[[0, -1]] *= 0.5
        return self.states.T @ (self.states * w[:, None])

    def residual(self) -> np.ndarray:
        """‖Hψ_n - E_nψ_n‖ in the grid norm, per 1D state."""
        d2 = stencils.apply(self.states, 2, self.half, self.h, *self.parity)
        v = self.potential.value(self.grid)[:, None]
        r = -(self.hbar**2 / (2 * self.m)) * d2 + v * self.states - self.energies[None, :] * self.states
        r[[0, -1]] = 0.0
        return np.sqrt(self.h * np.sum(r * r, axis=0))


# -- discretization --------------------------------------------------------------


def _laplacian_band(n: int, h: float, half: int, left: float, right: float) -> sp.csr_matrix:
    """D2 on the interior nodes 1..n of a grid 0..n+1 with ghost parities at both ends."""
    c = stencils.central_weights(2, half) / h**2
    rows, cols, vals = [], [], []
    for i in range(n):
        g = i + 1
        for s in range(-half, half + 1):
            j = g + s
            if j <= 0:
                j, w = -j, left
            elif j >= n + 1:
                j, w = 2 * (n + 1) - j, right
            else:
                w = 1.0
            if w == 0.0 or j == 0 or j == n + 1:
                continue
            rows.append(i)
            cols.append(j - 1)
            vals.append(w * c[s + half])
    return sp.csr_matrix((vals, (rows, cols)), shape=(n, n))


def _lowest(H: sp.spmatrix, k: int, shift: float):
    k = min(k, H.shape[0] - 2)
    # fixed start vector: ARPACK's default is random, which breaks bitwise reruns
    v0 = np.random.default_rng(0).standard_normal(H.shape[0])
    vals, vecs = eigsh(H.tocsc(), k=k, sigma=shift, which="LM", tol=0.0, v0=v0)
    order = np.argsort(vals)
    return vals[order], vecs[:, order]


def _fix_sign(vecs: np.ndarray) -> np.ndarray:
    for j in range(vecs.shape[1]):
        col = vecs[:, j]
        idx = int(np.argmax(np.abs(col) > 1e-3 * np.max(np.abs(col))))
        if col[idx] < 0:
            vecs[:, j] = -col
    return vecs


def _solve_on_grid(v_int, h, n_states, left, right, hbar, m, half, shift):
    n = v_int.size
    H = -(hbar**2 / (2 * m)) * _laplacian_band(n, h, half, left, right) + sp.diags(v_int)
    H = 0.5 * (H + H.T)
    vals, vecs = _lowest(H, n_states, shift)
    vecs = _fix_sign(vecs / np.sqrt(h))
    return vals, vecs


def _check_shift(coarse, fine, what):
    scale = np.maximum(1.0, np.abs(fine))
    shifts = np.abs(coarse - fine) / scale
    worst = float(np.max(shifts))
    if worst >= CONVERGENCE_TOL:
        raise AccuracyError(f"{what}: eigenvalues moved by {worst:.3e} (relative) on grid halving", deltas=shifts)
    return worst


def _forbidden_extent(pot: PotentialSpec, E: float, x_turn: float, direction: int, hbar: float, m: float,
                      decay: float = 30.0) -> float:
    """Distance from the centre needed so that the WKB decay exponent past x_turn reaches ``decay``."""
    c = pot.center
    lo, hi = pot.domain
    limit = hi if direction > 0 else lo
    reach = 1.5 * abs(x_turn - c)
    while True:
        outer = c + direction * reach
        if np.isfinite(limit) and direction * (outer - limit) >= 0:
            return abs(limit - c)
        xs = np.linspace(x_turn, outer, 2001)
        kappa = np.sqrt(2 * m * np.clip(pot.value(xs) - E, 0.0, None)) / hbar
        if np.trapezoid(kappa, xs) * direction >= decay:
            return reach
        reach *= 1.25


def _grid_1d(pot: PotentialSpec, e_max: float, hbar: float, m: float, grid_hint):
    if pot.kind == "box":
        lo, hi = pot.domain
        walls = (-1.0, -1.0)
    else:
        tp = turning_points(pot, e_max)
        c = pot.center
        wl = _forbidden_extent(pot, e_max, tp.x_minus, -1, hbar, m)
        wr = _forbidden_extent(pot, e_max, tp.x_plus, +1, hbar, m)
        if pot.symmetric:
            wl = wr = max(wl, wr)
        lo, hi = c - wl, c + wr
        walls = (0.0, 0.0)
    width = hi - lo
    p_max = math.sqrt(2 * m * (e_max - pot.v_min))
    h_target = min(math.pi * hbar / (20 * p_max), width / 400)
    if grid_hint is not None:
        h_target = min(h_target, float(grid_hint))
    cells = int(math.ceil(width / h_target))
    cells += cells % 2  # even cell count puts the centre of a symmetric domain on a node
    return lo, hi, cells, walls


def _e_max_estimate(pot: PotentialSpec, n_levels: int, hbar: float, m: float) -> float:
    return energy_for_action(pot, 2 * math.pi * hbar * (n_levels + 1.0), m)


def solve_1d(pot: PotentialSpec, n_states: int, grid_hint: float | None = None, hbar: float = 1.0,
             m: float = 1.0, half: int = HALF) -> EigenSolution:
    """Lowest ``n_states`` eigenpairs of -ħ²/2m d²/dx² + V on an automatically sized grid.

    The spectrum is recomputed with the spacing halved; a relative eigenvalue
    shift above 1e-6 raises :class:`AccuracyError`. The finer solution is returned.
    """
    if n_states < 1:
        raise ValueError("n_states must be >= 1")
    if pot.radial:
        raise DomainError("solve_1d needs a one-dimensional potential")
    e_max = _e_max_estimate(pot, n_states, hbar, m)
    lo, hi, cells, walls = _grid_1d(pot, e_max, hbar, m, grid_hint)
    shift = pot.v_min - 1.0
    results = []
    for refine in (1, 2):
        nc = cells * refine
        x = np.linspace(lo, hi, nc + 1)
        h = (hi - lo) / nc
        vals, vecs = _solve_on_grid(pot.value(x[1:-1]), h, n_states, *walls, hbar, m, half, shift)
        results.append((x, h, vals, vecs))
    conv = _check_shift(results[0][2], results[1][2], "solve_1d")
    x, h, vals, vecs = results[1]
    if vals.size < n_states:
        raise AccuracyError("grid too small for the requested number of states")
    states = np.zeros((x.size, vals.size))
    states[1:-1] = vecs
    return EigenSolution(pot, x, h, vals, states=states, parity=walls, half=half, hbar=hbar, m=m, convergence=conv)


# -- radial channels ---------------------------------------------------------------


def angular_momentum_barrier(D: int, l: int) -> float:
    """Coefficient of ħ²/(2m r²) in the reduced radial equation."""
    if D == 3:
        return l * (l + 1)
    if D == 2:
        return l * l - 0.25
    raise DomainError("radial channels are implemented for D = 2 and 3")


def degeneracy(D: int, l: int) -> int:
    if D == 3:
        return 2 * l + 1
    if D == 2:
        return 1 if l == 0 else 2
    raise DomainError("radial channels are implemented for D = 2 and 3")


def _radial_grid(pot: PotentialSpec, e_max: float, hbar: float, m: float):
    if pot.kind == "box":
        r_out = pot.domain[1]
        outer = -1.0
    else:
        tp = turning_points(pot, e_max)
        r_out = _forbidden_extent(pot, e_max, tp.x_plus, +1, hbar, m)
        outer = 0.0
    p_max = math.sqrt(2 * m * (e_max - pot.v_min))
    if pot.dimension == 2:
        # second order: (p h)² must stay near 1e-5 for the halving test to pass
        h_target = min(3e-3 * hbar / p_max, r_out / 400)
    else:
        h_target = min(math.pi * hbar / (20 * p_max), r_out / 400)
    cells = int(math.ceil(r_out / h_target))
    return r_out, cells, outer


def _solve_channel_fd(pot, l, r_out, cells, outer, n_states, hbar, m, half):
    D = pot.dimension
    r = np.linspace(0.0, r_out, cells + 1)
    h = r_out / cells
    ri = r[1:-1]
    v = pot.value(ri) + hbar**2 * angular_momentum_barrier(D, l) / (2 * m * ri**2)
    parity = (-1.0) ** (l + 1)
    vals, vecs = _solve_on_grid(v, h, n_states, parity, outer, hbar, m, half, pot.v_min - 1.0)
    u = np.zeros((r.size, vals.size))
    u[1:-1] = vecs
    return r, h, vals, u, parity


def _solve_channel_fv2d(pot, l, r_out, cells, outer, n_states, hbar, m):
    """Finite-volume R(r) solve for D = 2: cells centred on r_j = j h, faces at (j ± 1/2) h."""
    r = np.linspace(0.0, r_out, cells + 1)
    h = r_out / cells
    first = 0 if l == 0 else 1
    idx = np.arange(first, cells)  # outer node is a Dirichlet boundary
    rj = r[idx]
    vol = np.where(idx == 0, h * h / 8.0, rj * h)
    face_hi = (idx + 0.5) * h
    face_lo = np.where(idx == 0, 0.0, (idx - 0.5) * h)
    k = hbar**2 / (2 * m)
    with np.errstate(divide="ignore", invalid="ignore"):
        cent = np.where(rj > 0, k * l * l / rj**2, 0.0)
    diag = k * (face_hi + face_lo) / h + vol * (pot.value(rj) + cent)
    off = -k * face_hi[:-1] / h
    s = 1.0 / np.sqrt(vol)
    A = sp.diags([off * s[:-1] * s[1:], diag * s * s, off * s[:-1] * s[1:]], [-1, 0, 1])
    vals, y = _lowest(A, n_states, pot.v_min - 1.0)
    R = y * s[:, None]
    R = _fix_sign(R)
    full = np.zeros((r.size, vals.size))
    full[idx] = R
    u = full * np.sqrt(r)[:, None]
    return r, h, vals, u, 0.0


def solve_radial(pot: PotentialSpec, l_max: int, n_states_per_l: int, hbar: float = 1.0, m: float = 1.0,
                 half: int = HALF, e_max: float | None = None) -> EigenSolution:
    """Reduced radial problems for l = 0..l_max in D = 2 or 3.

    u_{nl}(0) = 0 throughout; D = 3 uses V + ħ²l(l+1)/2mr², D = 2 uses
    V + ħ²(m²-1/4)/2mr² with l playing the role of |m|.
    """
    D = pot.dimension
    if D not in (2, 3):
        raise DomainError("solve_radial needs D = 2 or 3")
    if e_max is None:
        # 1D even-extension counting overestimates nothing we need; pad generously
        e_max = _e_max_estimate(pot, n_states_per_l * 2 + l_max + 2, hbar, m)
    r_out, cells, outer = _radial_grid(pot, e_max, hbar, m)
    runs = []
    for refine in (1, 2):
        chans = []
        for l in range(l_max + 1):
            if D == 3:
                r, h, vals, u, par = _solve_channel_fd(pot, l, r_out, cells * refine, outer, n_states_per_l,
                                                       hbar, m, half)
            else:
                r, h, vals, u, par = _solve_channel_fv2d(pot, l, r_out, cells * refine, outer, n_states_per_l,
                                                         hbar, m)
            chans.append(RadialChannel(l, degeneracy(D, l), vals, u, int(par)))
        runs.append((r, h, chans))
    conv = _check_shift(np.concatenate([c.energies for c in runs[0][2]]),
                        np.concatenate([c.energies for c in runs[1][2]]), "solve_radial")
    r, h, chans = runs[1]
    energies = np.sort(np.concatenate([c.energies for c in chans]))
    return EigenSolution(pot, r, h, energies, channels=chans, parity=(0.0, outer), half=half, hbar=hbar, m=m,
                         convergence=conv)


def solve_radial_below(pot: PotentialSpec, e_cut: float, hbar: float = 1.0, m: float = 1.0) -> EigenSolution:
    """All radial channels with states below ``e_cut`` plus at least one state above it per channel."""
    l_max = 0
    while True:
        rr = np.linspace(1e-3, 50.0, 20001)
        try:
            veff = pot.value(rr) + hbar**2 * angular_momentum_barrier(pot.dimension, l_max + 1) / (2 * m * rr**2)
        except DomainError:
            rr = np.linspace(1e-3, pot.domain[1], 20001)
            veff = pot.value(rr) + hbar**2 * angular_momentum_barrier(pot.dimension, l_max + 1) / (2 * m * rr**2)
        if veff.min() > e_cut:
            break
        l_max += 1
    n_per_l = 2
    while True:
        sol = solve_radial(pot, l_max, n_per_l, hbar, m, e_max=max(e_cut * 1.2, e_cut + 1.0))
        if all(c.energies[-1] > e_cut for c in sol.channels):
            return sol
        n_per_l *= 2


# -- occupation ----------------------------------------------------------------------


@dataclass(frozen=True)
class Occupation:
    N: int
    lam_qm: float
    homo: float
    lumo: float
    levels: tuple  # 1D: state indices; radial: (channel index, n) pairs
    shells: int = 0


def _shell_groups(sol: EigenSolution, tol: float = 1e-6):
    items = sorted(((float(e), ci, n) for ci, ch in enumerate(sol.channels) for n, e in enumerate(ch.energies)))
    groups = []
    for e, ci, n in items:
        if groups and abs(e - groups[-1][0]) <= tol * max(1.0, abs(e)):
            groups[-1][1].append((ci, n))
        else:
            groups.append([e, [(ci, n)]])
    return groups


def fill_levels(sol: EigenSolution, N: int) -> Occupation:
    """Occupy the N lowest single-particle levels (no spin factor).

    λ_QM is the midpoint of the gap between the last filled and first empty
    level. Radial solutions must be filled shell by shell.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    if not sol.channels:
        if sol.energies.size < N + 1:
            raise ValueError(f"need at least N+1 = {N + 1} states, have {sol.energies.size}")
        e = sol.energies
        return Occupation(N, 0.5 * (e[N - 1] + e[N]), float(e[N - 1]), float(e[N]), tuple(range(N)))
    groups = _shell_groups(sol)
    count = 0
    filled = []
    for gi, (e, members) in enumerate(groups):
        d = sum(sol.channels[ci].degeneracy for ci, _ in members)
        if count + d > N:
            raise OpenShellError(f"N={N} splits the shell at E={e:.6g} (closed shells at {count}, {count + d})")
        count += d
        filled.extend(members)
        if count == N:
            if gi + 1 >= len(groups):
                raise ValueError("no empty level above the Fermi level was solved")
            lumo = groups[gi + 1][0]
            # the solved top shell might be incomplete; every channel must reach above it
            if any(ch.energies[-1] < lumo - 1e-9 for ch in sol.channels):
                raise ValueError("radial channels do not reach above the Fermi level")
            return Occupation(N, 0.5 * (e + lumo), e, lumo, tuple(filled), shells=gi + 1)
    raise ValueError(f"solved states hold only {count} particles, fewer than N={N}")


# -- densities -----------------------------------------------------------------------


@dataclass
class DensityProfile:
    """Local densities on a grid. 1D: per unit length; radial: per unit D-volume at radius r."""

    grid: np.ndarray
    rho: np.ndarray
    tau: np.ndarray
    tau1: np.ndarray
    N: int
    dimension: int = 1
    lam_qm: float = float("nan")
    lam_tilde: float = float("nan")
    rho_tf: np.ndarray | None = None
    tau_tf: np.ndarray | None = None
    lap_rho: np.ndarray | None = None

    @property
    def drho(self):
        return None if self.rho_tf is None else self.rho - self.rho_tf

    @property
    def dtau(self):
        return None if self.tau_tf is None else self.tau - self.tau_tf

    @property
    def dtau1(self):
        return None if self.tau_tf is None else self.tau1 - self.tau_tf

    def measure(self) -> np.ndarray:
        """Trapezoid weights for ∫ d^D r on the grid."""
        h = self.grid[1] - self.grid[0]
        w = np.full(self.grid.size, h)
        w[[0, -1]] *= 0.5
        if self.dimension > 1:
            w = w * sphere_area(self.dimension) * self.grid ** (self.dimension - 1)
        return w

    def integral(self, f) -> float:
        return float(np.sum(self.measure() * f))

    def with_smooth(self, lam_tilde: float, rho_tf: np.ndarray, tau_tf: np.ndarray) -> "DensityProfile":
        return replace(self, lam_tilde=float(lam_tilde), rho_tf=np.asarray(rho_tf), tau_tf=np.asarray(tau_tf))


def sphere_area(D: int) -> float:
    """Ω_D, the surface of the unit sphere in D dimensions (Ω_1 = 2)."""
    return 2.0 * math.pi ** (D / 2) / math.gamma(D / 2)


def _even_extrapolate(r, f, npts=5):
    """f(0) for an even function from its first samples at r > 0 (polynomial in r²)."""
    coef = np.polyfit(r[:npts] ** 2, f[:npts], npts - 1)
    return float(np.polyval(coef, 0.0))


def densities_qm(sol: EigenSolution, occ: Occupation, backend: str | None = None) -> DensityProfile:
    """ρ = Σ|ψ|², τ = -(ħ²/2m)Σψ∇²ψ, τ₁ = (ħ²/2m)Σ|∇ψ|² over the occupied states."""
    k = sol.hbar**2 / (2 * sol.m)
    if not sol.channels:
        idx = np.array(occ.levels, dtype=int)
        psi = sol.states[:, idx]
        padded = stencils.pad(psi, sol.half, *sol.parity)
        c1 = stencils.central_weights(1, sol.half)
        c2 = stencils.central_weights(2, sol.half)
        rho, psi_lap, grad2 = kernels.stencil_densities(padded, np.ones(idx.size), c1, c2, backend=backend)
        tau = -k * psi_lap / sol.h**2
        tau1 = k * grad2 / sol.h**2
        lap_rho = stencils.apply(rho, 2, sol.half, sol.h, sol.parity[0] ** 2, sol.parity[1] ** 2)
        return DensityProfile(sol.grid.copy(), rho, tau, tau1, occ.N, 1, occ.lam_qm, lap_rho=lap_rho)
    return _radial_densities(sol, occ)


def _radial_densities(sol: EigenSolution, occ: Occupation) -> DensityProfile:
    D = sol.dimension
    r = sol.grid
    a = 0.5 * (D - 1)
    k = sol.hbar**2 / (2 * sol.m)
    omega = sphere_area(D)
    rho = np.zeros_like(r)
    tau = np.zeros_like(r)
    tau1 = np.zeros_like(r)
    by_channel: dict[int, list[int]] = {}
    for ci, n in occ.levels:
        by_channel.setdefault(ci, []).append(n)
    ri = r[1:]
    for ci, ns in by_channel.items():
        ch = sol.channels[ci]
        u = ch.u[:, ns]
        L2 = ch.l * (ch.l + D - 2)
        if D == 3:
            du = stencils.apply(u, 1, sol.half, sol.h, ch.parity, sol.parity[1])
            d2u = stencils.apply(u, 2, sol.half, sol.h, ch.parity, sol.parity[1])
        else:
            # second-order differences of R = u/sqrt(r), parity (-1)^|m| at the origin
            R = np.zeros_like(u)
            R[1:] = u[1:] / np.sqrt(ri)[:, None]
            if ch.l == 0:
                R[0] = [_even_extrapolate(ri, R[1:, j], 3) for j in range(R.shape[1])]
            dR = stencils.apply(R, 1, 1, sol.h, (-1.0) ** ch.l, sol.parity[1])
            d2R = stencils.apply(R, 2, 1, sol.h, (-1.0) ** ch.l, sol.parity[1])
        w = ch.degeneracy / omega
        uu = u[1:]
        if D == 3:
            Rv = uu / ri[:, None] ** a
            dRv = (du[1:] - a * uu / ri[:, None]) / ri[:, None] ** a
            d2Rv = (d2u[1:] - 2 * a * du[1:] / ri[:, None] + a * (a + 1) * uu / ri[:, None] ** 2) / ri[:, None] ** a
        else:
            Rv, dRv, d2Rv = R[1:], dR[1:], d2R[1:]
        lapR = d2Rv + (D - 1) * dRv / ri[:, None] - L2 * Rv / ri[:, None] ** 2
        rho[1:] += w * np.sum(Rv * Rv, axis=1)
        tau[1:] += -k * w * np.sum(Rv * lapR, axis=1)
        tau1[1:] += k * w * np.sum(dRv * dRv + L2 * Rv * Rv / ri[:, None] ** 2, axis=1)
    for f in (rho, tau, tau1):
        f[0] = _even_extrapolate(ri, f[1:])
    lap_rho = radial_laplacian(r, rho, D, sol.half, outer=sol.parity[1] ** 2)
    return DensityProfile(r.copy(), rho, tau, tau1, occ.N, D, occ.lam_qm, lap_rho=lap_rho)


def radial_laplacian(r: np.ndarray, f: np.ndarray, D: int, half: int = HALF, outer: float = 0.0) -> np.ndarray:
    """∇²f = f'' + (D-1) f'/r for a radial field sampled on r_j = j h, even at r = 0."""
    h = r[1] - r[0]
    d1 = stencils.apply(f, 1, half, h, 1.0, outer)
    d2 = stencils.apply(f, 2, half, h, 1.0, outer)
    out = np.empty_like(f)
    out[1:] = d2[1:] + (D - 1) * d1[1:] / r[1:]
    out[0] = D * d2[0]
    return out
