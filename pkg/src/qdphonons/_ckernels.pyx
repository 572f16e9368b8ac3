# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled mode sums for the phonon propagator.

Must stay operation-for-operation identical to ``_pykernels``: the mode
loop runs in the given order with Kahan compensation, per time point.
"""

from libc.math cimport sin

import numpy as np


cdef inline void _kahan_add(double *s, double *c, double x) noexcept nogil:
    cdef double y = x - c[0]
    cdef double t = s[0] + y
    c[0] = (t - s[0]) - y
    s[0] = t


def phase_real(const double[::1] t, const double[::1] omega, const double[::1] weight):
    """out[k] = -sum_m weight[m] * sin(omega[m] t[k] / 2)**2"""
    cdef Py_ssize_t nt = t.shape[0], nm = omega.shape[0]
    if weight.shape[0] != nm:
        raise ValueError("omega and weight must have the same length")
    out = np.empty(nt, dtype=np.float64)
    cdef double[::1] o = out
    cdef Py_ssize_t k, m
    cdef double s, c, x
    with nogil:
        for k in range(nt):
            s = 0.0
            c = 0.0
            for m in range(nm):
                x = sin(0.5 * omega[m] * t[k])
                _kahan_add(&s, &c, weight[m] * x * x)
            o[k] = -s
    return out


def phase_complex(const double[::1] t, const double[::1] omega,
                  const double[::1] weight, const double[::1] eta_sq):
    """Real part as in :func:`phase_real`; imaginary part -sum_m eta_sq[m] sin(omega[m] t[k])."""
    cdef Py_ssize_t nt = t.shape[0], nm = omega.shape[0]
    if weight.shape[0] != nm or eta_sq.shape[0] != nm:
        raise ValueError("omega, weight and eta_sq must have the same length")
    re = np.empty(nt, dtype=np.float64)
    im = np.empty(nt, dtype=np.float64)
    cdef double[::1] ore = re
    cdef double[::1] oim = im
    cdef Py_ssize_t k, m
    cdef double sr, cr, si, ci, x
    with nogil:
        for k in range(nt):
            sr = 0.0
            cr = 0.0
            si = 0.0
            ci = 0.0
            for m in range(nm):
                x = sin(0.5 * omega[m] * t[k])
                _kahan_add(&sr, &cr, weight[m] * x * x)
                _kahan_add(&si, &ci, eta_sq[m] * sin(omega[m] * t[k]))
            ore[k] = -sr
            oim[k] = -si
    return re, im
