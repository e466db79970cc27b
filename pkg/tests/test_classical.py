import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st
from scipy.special import beta

from orbitdens.classical import (action_partial, classical_actions, energy_for_action, orbit_terms,
                                 primitive_orbit, traversal_time)
from orbitdens.errors import DomainError
from orbitdens.potentials import make_potential, turning_points

HARMONIC = make_potential("harmonic")
QUARTIC = make_potential("quartic")
BOX = make_potential("box", L=1.0)
ASYM = make_potential("two_sided_harmonic", omega_minus=1.0, omega_plus=2.0)


def quartic_s1_coefficient():
    # S1 = 2∮ sqrt(2(E - x^4/4)) dx = 8 E^(3/4) ∫_0^1 sqrt(1 - u^4) du, and ∫ = B(1/4, 3/2)/4
    return 2.0 * beta(0.25, 1.5)


def test_harmonic_quarter_action():
    assert action_partial(HARMONIC, 2.0, 0.0, 2.0) == pytest.approx(math.pi, rel=1e-12)


def test_empty_interval():
    assert action_partial(QUARTIC, 3.0, 0.7, 0.7) == 0.0


def test_quartic_closed_form():
    S1, T1 = primitive_orbit(QUARTIC, 1.0)
    assert S1 == pytest.approx(quartic_s1_coefficient(), rel=1e-12)
    # reference value of 2B(1/4, 3/2), not the truncated constant 6.991626
    assert S1 == pytest.approx(6.992153478112318, rel=1e-12)
    assert T1 == pytest.approx(0.75 * quartic_s1_coefficient(), rel=1e-12)


@pytest.mark.parametrize("E", [0.3, 2.0, 17.0])
def test_harmonic_orbit(E):
    S1, T1 = primitive_orbit(HARMONIC, E)
    assert S1 == pytest.approx(2 * math.pi * E, rel=1e-12)
    assert T1 == pytest.approx(2 * math.pi, rel=1e-12)


def test_box_orbit():
    E = 3.0
    S1, T1 = primitive_orbit(BOX, E)
    assert S1 == pytest.approx(2 * math.sqrt(2 * E), rel=1e-13)
    assert T1 == pytest.approx(2 / math.sqrt(2 * E), rel=1e-13)


def test_quartic_period_at_fermi_energy():
    S1, T1 = primitive_orbit(QUARTIC, 118.65)
    assert T1 == pytest.approx(0.75 * quartic_s1_coefficient() * 118.65 ** -0.25, rel=1e-12)
    assert T1 == pytest.approx(1.589, abs=1e-3)


def test_asymmetric_phase():
    E = 2.0
    ca = classical_actions(ASYM, E)
    assert ca.delta_phi == pytest.approx(math.pi * E / 4, rel=1e-12)
    assert ca.T1 == pytest.approx(math.pi * (1 / 1.0 + 1 / 2.0), rel=1e-12)
    assert ca.S1 == pytest.approx(2 * (ca.S_minus + ca.S_plus))


def test_symmetric_centre_orbits():
    ca = classical_actions(QUARTIC, 10.0)
    r_plus, r_minus, rp_plus, rp_minus = ca.geometry(0.0)
    assert r_plus == pytest.approx(ca.S1 / 2, rel=1e-13) and r_minus == pytest.approx(ca.S1 / 2, rel=1e-13)
    assert rp_plus == pytest.approx(ca.T1 / 2, rel=1e-13) and rp_minus == pytest.approx(ca.T1 / 2, rel=1e-13)
    assert ca.delta_phi == 0.0


def test_shortest_orbit_shrinks_at_turning_point():
    ca = classical_actions(QUARTIC, 10.0)
    x = ca.turning.x_plus * (1 - np.array([1e-2, 1e-4, 1e-6]))
    r_plus = ca.geometry(x)[0]
    assert np.all(np.diff(r_plus) < 0) and r_plus[-1] < 1e-7


def test_orbit_terms_structure():
    ca = classical_actions(QUARTIC, 10.0)
    terms = orbit_terms(ca, 0.3, 4)
    assert len(terms) == 10
    assert [(t.k, t.sigma) for t in terms[:4]] == [(0, 1), (0, -1), (1, 1), (1, -1)]
    assert [t.morse for t in terms[:4]] == [1, 1, 3, 3]
    box_terms = orbit_terms(classical_actions(BOX, 5.0), 0.3, 2)
    assert [t.morse for t in box_terms] == [2, 2, 6, 6, 10, 10]


def test_orbit_terms_domain():
    ca = classical_actions(QUARTIC, 10.0)
    with pytest.raises(DomainError):
        orbit_terms(ca, ca.turning.x_plus, 3)
    with pytest.raises(DomainError):
        action_partial(QUARTIC, 10.0, 0.0, ca.turning.x_plus * 1.01)


@settings(max_examples=40, deadline=None)
@given(E=st.floats(0.5, 200.0), u=st.lists(st.floats(0.0, 1.0), min_size=3, max_size=3))
def test_additivity_and_positivity(E, u):
    tp = turning_points(ASYM, E)
    a, b, c = sorted(tp.x_minus + (tp.x_plus - tp.x_minus) * np.array(u))
    sab = action_partial(ASYM, E, a, b)
    sbc = action_partial(ASYM, E, b, c)
    sac = action_partial(ASYM, E, a, c)
    assert sab >= 0 and sbc >= 0
    assert sac == pytest.approx(sab + sbc, rel=1e-12, abs=1e-13)


@settings(max_examples=30, deadline=None)
@given(E=st.floats(1.0, 100.0), fa=st.floats(-0.9, 0.9), fb=st.floats(-0.9, 0.9))
def test_action_derivative_is_time(E, fa, fb):
    assume(abs(fa - fb) > 1e-3)
    tp = turning_points(QUARTIC, E)
    a, b = sorted((fa * tp.x_plus, fb * tp.x_plus))
    d = 1e-5 * E
    ds = (action_partial(QUARTIC, E + d, a, b) - action_partial(QUARTIC, E - d, a, b)) / (2 * d)
    assert ds == pytest.approx(traversal_time(QUARTIC, E, a, b), rel=1e-6)


@settings(max_examples=25, deadline=None)
@given(E=st.floats(0.5, 100.0))
def test_period_is_action_derivative(E):
    d = 1e-5 * E
    ds = (primitive_orbit(ASYM, E + d)[0] - primitive_orbit(ASYM, E - d)[0]) / (2 * d)
    assert primitive_orbit(ASYM, E)[1] == pytest.approx(ds, rel=1e-6)


@pytest.mark.parametrize("alpha", [1.5, 2.5, 3.0, 6.0])
def test_power_law_scaling_exponent(alpha):
    pot = make_potential("power_law", c=0.7, alpha=alpha)
    E = np.geomspace(0.1, 100.0, 9)
    S = np.array([primitive_orbit(pot, e)[0] for e in E])
    slope = np.polyfit(np.log(E), np.log(S), 1)[0]
    assert slope == pytest.approx(0.5 + 1 / alpha, abs=1e-4)
    assert np.all(np.diff(S) > 0)


@settings(max_examples=30, deadline=None)
@given(E=st.floats(0.5, 200.0), f=st.floats(-0.99, 0.99), k=st.integers(1, 50))
def test_phase_step_is_s1(E, f, k):
    ca = classical_actions(ASYM, E)
    x = f * (ca.turning.x_plus if f > 0 else -ca.turning.x_minus)
    terms = orbit_terms(ca, x, k)
    for sigma in (1, -1):
        t = [tt for tt in terms if tt.sigma == sigma]
        assert t[k].action - t[k - 1].action == pytest.approx(ca.S1, rel=1e-12)
        assert t[k].time - t[k - 1].time == pytest.approx(ca.T1, rel=1e-12)
        assert t[k].morse - t[k - 1].morse == ca.morse_period


def test_energy_for_action_inverts():
    E = energy_for_action(QUARTIC, 2 * math.pi * 40)
    assert E == pytest.approx((2 * math.pi * 40 / quartic_s1_coefficient()) ** (4 / 3), rel=1e-12)
