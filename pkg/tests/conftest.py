import numpy as np
import pytest

from orbitdens import quantum, smooth
from orbitdens.classical import classical_actions
from orbitdens.potentials import make_potential


class System:
    """A solved 1D system with QM densities and their smooth reference attached."""

    def __init__(self, kind, N, **params):
        self.pot = make_potential(kind, **params)
        self.N = N
        self.lam = smooth.fermi_energy_smooth(self.pot, N)
        self.actions = classical_actions(self.pot, self.lam)
        self.sol = quantum.solve_1d(self.pot, N + 1)
        self.occ = quantum.fill_levels(self.sol, N)
        ref = smooth.tf_densities(self.pot, self.lam, self.sol.grid)
        self.prof = quantum.densities_qm(self.sol, self.occ).with_smooth(self.lam, ref.rho_tf, ref.tau_tf)
        self.x = self.sol.grid


_cache = {}


def system(kind, N, **params):
    key = (kind, N, tuple(sorted(params.items())))
    if key not in _cache:
        _cache[key] = System(kind, N, **params)
    return _cache[key]


@pytest.fixture(scope="session")
def quartic40():
    return system("quartic", 40)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("tests.test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(mod.RESULTS, key=lambda s: s.split("]")[0].split("[")[1].strip().zfill(2)):
        terminalreporter.write_line(line)
