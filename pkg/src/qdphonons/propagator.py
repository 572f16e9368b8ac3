"""Independent-boson phonon propagator, coherence and emission spectrum.

With per-mode couplings (omega_m, eta_m^2, theta_m^2)::

    Phi(t) = sum_m -theta_m^2 sin^2(omega_m t / 2) - eta_m^2 (1 - exp(-i omega_m t))
    P(t)   = exp(Phi(t))
    S(w)   = Re int_0^inf P(t) exp(-Gamma t / 2) exp(-i w t) dt

The real part is evaluated as ``-sum (theta^2 + 2 eta^2) sin^2(omega t/2)``,
which is the same quantity without the 1 - cos cancellation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .coupling import CouplingSet
from .quadrature import integrate
from .units import HBAR, K_B


@dataclass(frozen=True)
class CoherenceSample:
    t: float
    phi_real: float
    phi_imag: float
    p_abs_sq: float

    @property
    def p(self) -> complex:
        r = math.exp(self.phi_real)
        return complex(r * math.cos(self.phi_imag), r * math.sin(self.phi_imag))


@dataclass(frozen=True)
class SpectrumSample:
    omega: float  # detuning from the zero-phonon line, rad/s
    s_value: float  # s


def _times(t) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(t, dtype=float))
    if arr.size and arr.min() < 0:
        raise ValueError("t must be non-negative")
    return arr


def phi_array(t, couplings: CouplingSet, *, workers: int = 1, backend: str | None = None):
    """Real and imaginary parts of Phi on an array of times."""
    ts = _times(t)
    if not couplings.active:
        z = np.zeros_like(ts)
        return z, z.copy()
    return _kernels.phase_complex(
        ts, couplings.omegas, couplings.dephasing_weights, couplings.eta_sq,
        workers=workers, backend=backend,
    )


def phi(t: float, couplings: CouplingSet) -> tuple[float, float]:
    re, im = phi_array([t], couplings)
    return float(re[0]), float(im[0])


def log_coherence_sq(t, couplings: CouplingSet, *, workers: int = 1, backend: str | None = None) -> np.ndarray:
    """ln |P(t)|^2 = 2 Re Phi(t); skips the imaginary sum."""
    ts = _times(t)
    if not couplings.active:
        return np.zeros_like(ts)
    return 2.0 * _kernels.phase_real(
        ts, couplings.omegas, couplings.dephasing_weights, workers=workers, backend=backend
    )


def phi_coth_form(t, couplings: CouplingSet, temperature: float):
    """Phi from g^2/omega^2 and coth(hbar omega / 2 k_B T).

    Independent of the theta/eta route: the thermal factor comes from coth
    rather than from the stored occupations. Plain numpy sums. Returns
    scalars for scalar ``t`` and arrays otherwise.
    """
    if not temperature > 0:
        raise ValueError("the coth form needs T > 0; use phi() at T = 0")
    scalar = np.ndim(t) == 0
    ts = _times(t)
    re = np.zeros_like(ts)
    im = np.zeros_like(ts)
    for e in couplings.entries:
        if e.eta_sq == 0:
            continue
        x = HBAR * e.omega / (2.0 * K_B * temperature)
        coth = 1.0 / math.tanh(x)
        # cos(wt) - 1 written as -2 sin^2(wt/2)
        re += e.eta_sq * coth * (-2.0 * np.sin(0.5 * e.omega * ts) ** 2)
        im -= e.eta_sq * np.sin(e.omega * ts)
    if scalar:
        return float(re[0]), float(im[0])
    return re, im


def coherence(t: float, couplings: CouplingSet) -> CoherenceSample:
    re, im = phi(t, couplings)
    # straight from 2 Re Phi, never via |exp(Phi)|^2; math.exp underflows to 0.0
    return CoherenceSample(float(t), re, im, math.exp(2.0 * re))


def decay_horizon(couplings: CouplingSet, rate: float, cutoff: float, power: float, collapse: bool = True) -> float:
    """Upper integration limit for ``exp(-rate t) |P(t)|^power``.

    Beyond ``-ln(cutoff)/rate`` the envelope alone is below ``cutoff``.
    With ``collapse``, the limit is pulled in to the first time one mode by
    itself pushes ``|P|^power`` below ``cutoff``, provided that mode cannot
    revive before the envelope limit. Each mode's contribution to
    ``Re Phi`` is non-positive, so one mode bounds the whole product.
    """
    L = -math.log(cutoff)
    t_env = L / rate
    if not collapse or not couplings.active:
        return t_env
    best = t_env
    for w, a in zip(couplings.omegas.tolist(), couplings.dephasing_weights.tolist()):
        ratio = L / (power * a)
        if ratio >= 1.0:
            continue
        t_star = 2.0 * math.asin(math.sqrt(ratio)) / w
        if t_env <= 2.0 * math.pi / w - t_star:
            best = min(best, t_star)
    return best


def spectrum(
    couplings: CouplingSet,
    gamma: float,
    omega_grid,
    *,
    rel_tol: float = 1e-8,
    envelope_cutoff: float = 1e-12,
    max_step_fraction: float = 1.0 / 32.0,
    max_depth: int = 40,
    backend: str | None = None,
) -> list[SpectrumSample]:
    """Emission spectrum on a grid of detunings (rad/s).

    Each value carries an estimated absolute error below
    ``rel_tol * 2 / gamma`` (the free-emitter peak height).
    """
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    grid = np.asarray(omega_grid, dtype=float).ravel()
    if grid.size == 0:
        return []
    if not np.all(np.isfinite(grid)):
        raise ValueError("omega grid must be finite")
    t_end = decay_horizon(couplings, 0.5 * gamma, envelope_cutoff, power=1.0)
    scales = [couplings.fastest_period(), couplings.collapse_time()]
    abs_tol = rel_tol * 2.0 / gamma

    # group detunings by magnitude so slow ones don't pay for fast oscillation
    order = np.argsort(np.abs(grid), kind="stable")
    values = np.empty_like(grid)
    chunk = 64
    for start in range(0, grid.size, chunk):
        idx = order[start:start + chunk]
        w = grid[idx]
        wmax = float(np.abs(w).max())
        h = max_step_fraction * min(scales)
        if wmax > 0:
            # a 15-point panel integrates half a period of cos(w t) to rounding
            h = min(h, math.pi / wmax)

        def f(t, w=w):
            if couplings.active:
                re, im = phi_array(t, couplings, backend=backend)
            else:
                re = np.zeros_like(t)
                im = np.zeros_like(t)
            amp = np.exp(re - 0.5 * gamma * t)
            return amp[:, None] * np.cos(im[:, None] - np.outer(t, w))

        res = integrate(
            f, 0.0, t_end, max_step=h, rel_tol=0.0, abs_tol=abs_tol,
            max_depth=max_depth, min_panels=16, n_components=w.size,
        )
        values[idx] = np.atleast_1d(res.value)
    return [SpectrumSample(float(o), float(s)) for o, s in zip(grid, values)]
