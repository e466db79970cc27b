"""Pure-NumPy implementations of the compiled kernels."""
import numpy as np


def orbit_terms_matrix(theta0, tau0, dtheta, dtau, k_max):
    """Per-k contributions a_k summed over branches, shape (n, k_max+1)."""
    k = np.arange(k_max + 1, dtype=np.float64)
    a = np.zeros((theta0.shape[0], k_max + 1))
    for b in range(theta0.shape[1]):
        a = a + np.sin(theta0[:, b, None] + k * dtheta) / (tau0[:, b, None] + k * dtau)
    return a


def orbit_sum(theta0, tau0, dtheta, dtau, k_max):
    """Σ_k Σ_b sin(θ_b + kΔθ)/(τ_b + kΔτ), averaged over the last two partial sums.

    Returns the accelerated sums and |a_kmax|.
    """
    a = orbit_terms_matrix(theta0, tau0, dtheta, dtau, k_max)
    partial = np.cumsum(a, axis=1)
    if k_max > 0:
        out = 0.5 * (partial[:, -1] + partial[:, -2])
    else:
        out = partial[:, -1].copy()
    return out, np.abs(a[:, -1])


def stencil_densities(padded, weights, c1, c2):
    """Σ_j w_j ψ_j², Σ_j w_j ψ_j (D2 ψ_j), Σ_j w_j (D1 ψ_j)² for ghost-padded columns."""
    half = (len(c2) - 1) // 2
    n = padded.shape[0] - 2 * half
    d1 = np.zeros((n, padded.shape[1]))
    d2 = np.zeros((n, padded.shape[1]))
    for s in range(2 * half + 1):
        block = padded[s:s + n]
        d1 += c1[s] * block
        d2 += c2[s] * block
    psi = padded[half:half + n]
    return (psi * psi) @ weights, (psi * d2) @ weights, (d1 * d1) @ weights
