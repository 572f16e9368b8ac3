"""Backend selection for the propagator mode sums.

The compiled ``_ckernels`` module is used when it imports; otherwise the
numpy implementation. ``QDPHONONS_PURE_PYTHON=1`` forces the fallback.

Time grids can be split across threads (``workers``). Each time point's
mode sum is sequential, so the result does not depend on the split.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import _pykernels

try:
    if os.environ.get("QDPHONONS_PURE_PYTHON", "") not in ("", "0"):
        raise ImportError("pure-python backend requested")
    from . import _ckernels
except ImportError:
    _ckernels = None

BACKENDS = {"python": _pykernels}
if _ckernels is not None:
    BACKENDS["cython"] = _ckernels

BACKEND = "cython" if _ckernels is not None else "python"


def _impl(backend: str | None):
    name = backend or BACKEND
    try:
        return BACKENDS[name]
    except KeyError:
        raise ValueError(f"backend {name!r} unavailable; have {sorted(BACKENDS)}") from None


def _chunks(n: int, workers: int):
    bounds = np.linspace(0, n, workers + 1).astype(int)
    return [(a, b) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]


def phase_real(t, omega, weight, *, workers: int = 1, backend: str | None = None) -> np.ndarray:
    """-sum_m weight[m] sin^2(omega[m] t / 2) for every t."""
    mod = _impl(backend)
    t = np.ascontiguousarray(t, dtype=np.float64)
    omega = np.ascontiguousarray(omega, dtype=np.float64)
    weight = np.ascontiguousarray(weight, dtype=np.float64)
    if workers <= 1 or t.size < 2 * workers:
        return mod.phase_real(t, omega, weight)
    out = np.empty_like(t)
    with ThreadPoolExecutor(workers) as pool:
        parts = {pool.submit(mod.phase_real, t[a:b], omega, weight): (a, b) for a, b in _chunks(t.size, workers)}
        for fut, (a, b) in parts.items():
            out[a:b] = fut.result()
    return out


def phase_complex(t, omega, weight, eta_sq, *, workers: int = 1, backend: str | None = None):
    """Real part as :func:`phase_real`, imaginary part -sum_m eta_sq[m] sin(omega[m] t)."""
    mod = _impl(backend)
    t = np.ascontiguousarray(t, dtype=np.float64)
    args = [np.ascontiguousarray(a, dtype=np.float64) for a in (omega, weight, eta_sq)]
    if workers <= 1 or t.size < 2 * workers:
        return mod.phase_complex(t, *args)
    re = np.empty_like(t)
    im = np.empty_like(t)
    with ThreadPoolExecutor(workers) as pool:
        parts = {pool.submit(mod.phase_complex, t[a:b], *args): (a, b) for a, b in _chunks(t.size, workers)}
        for fut, (a, b) in parts.items():
            re[a:b], im[a:b] = fut.result()
    return re, im
