"""Numpy fallback for the compiled mode sums in ``_ckernels``.

Vectorized over time points; the mode loop keeps the canonical order and
the same Kahan update so results track the compiled kernel to rounding
in ``sin``.
"""

import numpy as np


def _check(t, *arrays):
    t = np.ascontiguousarray(t, dtype=np.float64)
    arrays = [np.ascontiguousarray(a, dtype=np.float64) for a in arrays]
    n = arrays[0].shape[0]
    if any(a.shape[0] != n for a in arrays):
        raise ValueError("mode arrays must have the same length")
    return t, arrays


def phase_real(t, omega, weight):
    t, (omega, weight) = _check(t, omega, weight)
    s = np.zeros_like(t)
    c = np.zeros_like(t)
    for w, a in zip(omega.tolist(), weight.tolist()):
        x = np.sin(0.5 * w * t)
        y = a * x * x - c
        tot = s + y
        c = (tot - s) - y
        s = tot
    return -s


def phase_complex(t, omega, weight, eta_sq):
    t, (omega, weight, eta_sq) = _check(t, omega, weight, eta_sq)
    sr = np.zeros_like(t)
    cr = np.zeros_like(t)
    si = np.zeros_like(t)
    ci = np.zeros_like(t)
    for w, a, e in zip(omega.tolist(), weight.tolist(), eta_sq.tolist()):
        x = np.sin(0.5 * w * t)
        y = a * x * x - cr
        tot = sr + y
        cr = (tot - sr) - y
        sr = tot
        y = e * np.sin(w * t) - ci
        tot = si + y
        ci = (tot - si) - y
        si = tot
    return -sr, -si
