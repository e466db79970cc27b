import os
import subprocess
import sys

import numpy as np
import pytest

from orbitdens import _pykernels, kernels, stencils

cython = pytest.mark.skipif(kernels.BACKEND != "cython", reason="compiled extension not built")


def _orbit_inputs(rng, n=257, b=2):
    return rng.uniform(-50, 50, (n, b)), rng.uniform(0.1, 5.0, (n, b)), float(rng.uniform(0, 100)), 1.7


@cython
@pytest.mark.parametrize("k_max", [0, 1, 7, 200])
def test_orbit_sum_backends_agree(rng, k_max):
    th, ta, dth, dta = _orbit_inputs(rng)
    a, la = kernels.orbit_sum(th, ta, dth, dta, k_max, backend="python")
    b, lb = kernels.orbit_sum(th, ta, dth, dta, k_max, backend="cython")
    np.testing.assert_allclose(a, b, rtol=0, atol=1e-13 * max(1.0, np.max(np.abs(a))))
    np.testing.assert_allclose(la, lb, rtol=1e-13, atol=1e-15)


@cython
def test_stencil_densities_backends_agree(rng):
    half = 4
    padded = rng.normal(size=(300 + 2 * half, 9))
    w = rng.uniform(0, 3, 9)
    c1, c2 = stencils.central_weights(1, half), stencils.central_weights(2, half)
    for x, y in zip(kernels.stencil_densities(padded, w, c1, c2, backend="python"),
                    kernels.stencil_densities(padded, w, c1, c2, backend="cython")):
        np.testing.assert_allclose(x, y, rtol=1e-13, atol=1e-12)


def test_orbit_sum_matches_explicit_terms(rng):
    th, ta, dth, dta = _orbit_inputs(rng, n=5)
    total, last = kernels.orbit_sum(th, ta, dth, dta, 10)
    k = np.arange(11)
    terms = np.sum(np.sin(th[:, :, None] + k * dth) / (ta[:, :, None] + k * dta), axis=1)
    s = np.cumsum(terms, axis=1)
    np.testing.assert_allclose(total, 0.5 * (s[:, -1] + s[:, -2]), rtol=1e-12)
    np.testing.assert_allclose(last, np.abs(terms[:, -1]), rtol=1e-12)


def test_orbit_sum_is_deterministic(rng):
    th, ta, dth, dta = _orbit_inputs(rng)
    a = kernels.orbit_sum(th, ta, dth, dta, 50)[0]
    b = kernels.orbit_sum(th, ta, dth, dta, 50)[0]
    assert np.array_equal(a, b)


def test_pure_python_switch():
    env = dict(os.environ, ORBITDENS_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "from orbitdens import kernels; print(kernels.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


def test_unknown_backend():
    with pytest.raises(ValueError):
        kernels.orbit_sum(np.zeros((1, 1)), np.ones((1, 1)), 0.0, 1.0, 1, backend="fortran")


def test_stencil_weights_are_exact_for_polynomials():
    half = 4
    x = np.linspace(-1, 1, 41)
    h = x[1] - x[0]
    for deriv in (1, 2):
        c = stencils.central_weights(deriv, half)
        for p in range(2 * half + 1):
            f = lambda t: t**p  # noqa: E731
            got = sum(c[s] * f(x[20] + (s - half) * h) for s in range(2 * half + 1)) / h**deriv
            want = 0.0 if p < deriv else np.prod(range(p - deriv + 1, p + 1)) * x[20] ** (p - deriv)
            assert got == pytest.approx(want, abs=1e-8)


def test_python_module_exports_match():
    assert callable(_pykernels.orbit_sum) and callable(_pykernels.stencil_densities)
