import math

import numpy as np
import pytest

from orbitdens import quantum
from orbitdens.errors import OpenShellError
from orbitdens.potentials import make_potential

HARMONIC = make_potential("harmonic")
BOX = make_potential("box", L=1.0)
QUARTIC = make_potential("quartic")
HO3 = make_potential("harmonic", dimension=3)
HO2 = make_potential("harmonic", dimension=2)

# ground state of -ψ''/2 + x⁴ψ/4 from an adaptive shooting integrator (DOP853, rtol 1e-13)
QUARTIC_E0 = 0.42080497447545556


@pytest.fixture(scope="module")
def harmonic_sol():
    return quantum.solve_1d(HARMONIC, 12)


@pytest.fixture(scope="module")
def box_sol():
    return quantum.solve_1d(BOX, 12)


def test_harmonic_spectrum(harmonic_sol):
    np.testing.assert_allclose(harmonic_sol.energies[:5], np.arange(5) + 0.5, atol=1e-6)
    assert harmonic_sol.convergence < 1e-6


def test_box_spectrum(box_sol):
    n = np.arange(1, 13)
    np.testing.assert_allclose(box_sol.energies, n**2 * math.pi**2 / 2, rtol=1e-6)


def test_quartic_ground_state_against_shooting():
    sol = quantum.solve_1d(QUARTIC, 3)
    assert sol.energies[0] == pytest.approx(QUARTIC_E0, abs=1e-8)


@pytest.mark.parametrize("name", ["harmonic_sol", "box_sol"])
def test_orthonormal_and_residual(name, request):
    sol = request.getfixturevalue(name)
    np.testing.assert_allclose(sol.overlap_matrix(), np.eye(sol.energies.size), atol=1e-8)
    assert np.all(sol.residual() <= 1e-6 * np.abs(sol.energies))


def test_box_single_particle_densities(box_sol):
    occ = quantum.fill_levels(box_sol, 1)
    prof = quantum.densities_qm(box_sol, occ)
    x = prof.grid
    np.testing.assert_allclose(prof.rho, 2 * np.sin(math.pi * x) ** 2, atol=1e-8)
    np.testing.assert_allclose(prof.tau1, math.pi**2 * np.cos(math.pi * x) ** 2, atol=1e-6)


def test_harmonic_ground_density(harmonic_sol):
    prof = quantum.densities_qm(harmonic_sol, quantum.fill_levels(harmonic_sol, 1))
    i0 = np.argmin(np.abs(prof.grid))
    assert prof.grid[i0] == pytest.approx(0.0, abs=1e-12)
    assert prof.rho[i0] == pytest.approx(1 / math.sqrt(math.pi), rel=1e-8)


def test_fill_levels_1d(quartic40):
    occ = quartic40.occ
    assert occ.levels == tuple(range(40))
    e = quartic40.sol.energies
    assert e[39] < occ.lam_qm < e[40]


def test_density_invariants(quartic40):
    prof = quartic40.prof
    assert prof.integral(prof.rho) == pytest.approx(40, rel=1e-6)
    assert prof.integral(prof.tau) == pytest.approx(prof.integral(prof.tau1), rel=1e-6)
    assert np.all(prof.tau1 >= 0)
    rev = slice(None, None, -1)
    assert np.max(np.abs(prof.rho - prof.rho[rev])) < 1e-8
    assert np.max(np.abs(prof.tau - prof.tau[rev])) < 1e-8
    identity = prof.tau - prof.tau1 + 0.25 * prof.lap_rho
    assert np.max(np.abs(identity)) < 1e-8 * np.max(np.abs(prof.tau))


def test_3d_oscillator_spectrum_and_shells():
    sol = quantum.solve_radial(HO3, l_max=3, n_states_per_l=3)
    for ch in sol.channels:
        np.testing.assert_allclose(ch.energies, 2 * np.arange(3) + ch.l + 1.5, atol=1e-6)
        assert ch.degeneracy == 2 * ch.l + 1
    big = quantum.solve_radial_below(HO3, 10.0)
    occ = quantum.fill_levels(big, 120)
    assert occ.shells == 8
    assert occ.lam_qm == pytest.approx(9.0, abs=1e-6)
    assert sum((n + 1) * (n + 2) // 2 for n in range(8)) == 120
    with pytest.raises(OpenShellError):
        quantum.fill_levels(big, 100)


def test_3d_oscillator_density_closed_form():
    sol = quantum.solve_radial_below(HO3, 3.0)
    prof = quantum.densities_qm(sol, quantum.fill_levels(sol, 4))
    r = prof.grid
    exact = math.pi**-1.5 * np.exp(-r * r) * (1 + 2 * r * r)
    np.testing.assert_allclose(prof.rho, exact, atol=1e-9)
    assert prof.integral(prof.rho) == pytest.approx(4, rel=1e-6)
    assert prof.integral(prof.tau) == pytest.approx(prof.integral(prof.tau1), rel=1e-6)


def test_2d_oscillator():
    sol = quantum.solve_radial_below(HO2, 6.0)
    for ch in sol.channels:
        np.testing.assert_allclose(ch.energies[:2], 2 * np.arange(2) + ch.l + 1.0, atol=1e-6)
    occ = quantum.fill_levels(sol, 15)
    assert occ.shells == 5
    prof = quantum.densities_qm(sol, occ)
    assert prof.integral(prof.rho) == pytest.approx(15, rel=1e-6)
    assert prof.integral(prof.tau) == pytest.approx(prof.integral(prof.tau1), rel=1e-5)


def test_degeneracy_rules():
    assert [quantum.degeneracy(3, l) for l in range(4)] == [1, 3, 5, 7]
    assert [quantum.degeneracy(2, l) for l in range(3)] == [1, 2, 2]
    assert quantum.angular_momentum_barrier(2, 0) == -0.25
