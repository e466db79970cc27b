# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops. Same contracts and summation order as ``_pykernels``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sin, fabs

cnp.import_array()


def orbit_sum(double[:, ::1] theta0, double[:, ::1] tau0, double dtheta, double dtau, int k_max):
    cdef Py_ssize_t n = theta0.shape[0], nb = theta0.shape[1]
    cdef Py_ssize_t i, b
    cdef int k
    cdef double s, s_prev, a
    out = np.empty(n, dtype=np.float64)
    last = np.empty(n, dtype=np.float64)
    cdef double[::1] out_v = out
    cdef double[::1] last_v = last
    for i in range(n):
        s = 0.0
        s_prev = 0.0
        a = 0.0
        for k in range(k_max + 1):
            a = 0.0
            for b in range(nb):
                a = a + sin(theta0[i, b] + k * dtheta) / (tau0[i, b] + k * dtau)
            s_prev = s
            s = s + a
        out_v[i] = 0.5 * (s + s_prev) if k_max > 0 else s
        last_v[i] = fabs(a)
    return out, last


def stencil_densities(double[:, ::1] padded, double[::1] weights, double[::1] c1, double[::1] c2):
    cdef Py_ssize_t half = (c2.shape[0] - 1) // 2
    cdef Py_ssize_t n = padded.shape[0] - 2 * half, ns = padded.shape[1]
    cdef Py_ssize_t i, j, s
    cdef double psi, d1, d2, w
    rho = np.zeros(n, dtype=np.float64)
    lap = np.zeros(n, dtype=np.float64)
    grad = np.zeros(n, dtype=np.float64)
    cdef double[::1] rho_v = rho, lap_v = lap, grad_v = grad
    for i in range(n):
        for j in range(ns):
            w = weights[j]
            psi = padded[i + half, j]
            d1 = 0.0
            d2 = 0.0
            for s in range(2 * half + 1):
                d1 = d1 + c1[s] * padded[i + s, j]
                d2 = d2 + c2[s] * padded[i + s, j]
            rho_v[i] += w * psi * psi
            lap_v[i] += w * psi * d2
            grad_v[i] += w * d1 * d1
    return rho, lap, grad
