"""Thermal coupling parameters of each mechanical mode to the emitter.

For a mode of angular frequency ``omega`` and optomechanical coupling
``g`` (both rad/s) at temperature ``T``::

    N     = 1 / (exp(hbar omega / k_B T) - 1)
    eta^2 = (g / omega)^2
    theta^2 = 4 eta^2 N
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable

import numpy as np

from .catalog import ModeCatalog, ModeFamily
from .units import EV, HBAR, K_B, Dimension, magnitude


class Position(enum.Enum):
    ON_AXIS = "axis"
    ON_SIDEWALL = "sidewall"

    @classmethod
    def parse(cls, text) -> Position:
        if isinstance(text, Position):
            return text
        try:
            return cls(str(text).strip().lower())
        except ValueError:
            raise ValueError(f"position must be 'axis' or 'sidewall', got {text!r}") from None


@dataclass(frozen=True)
class DeformationPotentials:
    """Hydrostatic (a) and shear (b) deformation potentials in joules."""

    a: float = -7.5 * EV
    b: float = -1.9 * EV


@dataclass(frozen=True)
class StrainDerivatives:
    """Derivatives of eps_h = eps_xx+eps_yy+eps_zz and eps_sh = 2eps_zz-eps_xx-eps_yy
    with respect to the modal displacement amplitude, in 1/m."""

    d_eh_du: float
    d_esh_du: float

    def __post_init__(self):
        if not (math.isfinite(self.d_eh_du) and math.isfinite(self.d_esh_du)):
            raise ValueError("strain derivatives must be finite")


# past this, 1/expm1 is below 1e-304 and expm1 itself is about to overflow
_EXPONENT_CUTOFF = 700.0


def occupation(omega, temperature) -> float:
    """Bose-Einstein occupation of a mode; exactly 0 at T = 0."""
    w = magnitude(omega, Dimension.ANGULAR_FREQUENCY)
    T = magnitude(temperature, Dimension.TEMPERATURE)
    if not w > 0:
        raise ValueError(f"angular frequency must be positive, got {w}")
    if T < 0:
        raise ValueError(f"temperature must be non-negative, got {T}")
    if T == 0:
        return 0.0
    x = HBAR * w / (K_B * T)
    if x > _EXPONENT_CUTOFF:
        return 0.0
    # exp(x) - 1 cancels catastrophically for the kHz flexural modes (x ~ 1e-7)
    return 1.0 / math.expm1(x)


def eta_squared(g: float, omega: float) -> float:
    if not omega > 0:
        raise ValueError(f"angular frequency must be positive, got {omega}")
    if g < 0:
        raise ValueError(f"coupling must be non-negative, got {g}")
    return (g / omega) ** 2


def theta_squared(eta_sq: float, occ: float) -> float:
    if eta_sq < 0 or occ < 0:
        raise ValueError("eta^2 and occupation must be non-negative")
    return 4.0 * eta_sq * occ


def coupling_from_strain(
    sd: StrainDerivatives, dp: DeformationPotentials, u_zpf: float
) -> float:
    """Optomechanical coupling |g| in rad/s from strain derivatives.

    g = (a d(eps_h)/du + (b/2) d(eps_sh)/du) * u_zpf / hbar; the sign is
    dropped since only g^2 enters the propagator.
    """
    if not u_zpf > 0:
        raise ValueError(f"u_zpf must be positive, got {u_zpf}")
    shift = dp.a * sd.d_eh_du + 0.5 * dp.b * sd.d_esh_du  # J/m
    return abs(shift * u_zpf / HBAR)


def effective_mass(samples: Iterable[tuple[float, float, float]]) -> float:
    """Sum of rho |u|^2 dV over a discretized mode shape.

    ``samples`` holds ``(density, normalized_displacement, cell_volume)``
    triples; the displacement is normalized to max |u| = 1.
    """
    terms = []
    for rho, u, vol in samples:
        if abs(u) > 1.0:
            raise ValueError(f"normalized displacement {u} exceeds 1")
        if not vol > 0:
            raise ValueError(f"cell volume must be positive, got {vol}")
        if rho < 0:
            raise ValueError(f"density must be non-negative, got {rho}")
        terms.append(rho * u * u * vol)
    if not terms:
        warnings.warn("effective_mass called with no samples; returning 0", stacklevel=2)
        return 0.0
    return math.fsum(terms)


@dataclass(frozen=True)
class CouplingEntry:
    family: ModeFamily
    index: int
    omega: float
    g: float
    eta_sq: float
    theta_sq: float
    occupation: float

    @property
    def label(self) -> str:
        return f"{self.family.value}{self.index}"


@dataclass(frozen=True)
class CouplingSet:
    """Per-mode couplings at one temperature, in catalog order."""

    temperature: float
    entries: tuple[CouplingEntry, ...]

    def __iter__(self):
        return iter(self.entries)

    def __len__(self):
        return len(self.entries)

    def __getitem__(self, label: str) -> CouplingEntry:
        for e in self.entries:
            if e.label == label:
                return e
        raise KeyError(label)

    @cached_property
    def active(self) -> tuple[CouplingEntry, ...]:
        """Entries with non-zero coupling."""
        return tuple(e for e in self.entries if e.eta_sq > 0 or e.theta_sq > 0)

    @cached_property
    def omegas(self) -> np.ndarray:
        return np.array([e.omega for e in self.active], dtype=float)

    @cached_property
    def dephasing_weights(self) -> np.ndarray:
        """theta^2 + 2 eta^2 per active mode, so Re Phi = -sum w sin^2(omega t/2)."""
        return np.array([e.theta_sq + 2.0 * e.eta_sq for e in self.active], dtype=float)

    @cached_property
    def eta_sq(self) -> np.ndarray:
        return np.array([e.eta_sq for e in self.active], dtype=float)

    @cached_property
    def theta_sq(self) -> np.ndarray:
        return np.array([e.theta_sq for e in self.active], dtype=float)

    def fastest_period(self) -> float:
        """Shortest 2 pi / omega over coupled modes (inf when none couple)."""
        if not self.active:
            return math.inf
        return 2.0 * math.pi / float(self.omegas.max())

    def collapse_time(self) -> float:
        """Gaussian decay time of |P(t)|, 2 / sqrt(sum (theta^2 + 2 eta^2) omega^2)."""
        s = math.fsum(float(w) * float(o) ** 2 for w, o in zip(self.dephasing_weights, self.omegas))
        return math.inf if s == 0 else 2.0 / math.sqrt(s)


def build_coupling_set(
    catalog: ModeCatalog,
    temperature: float,
    position: Position | str,
    doublet_partners: bool = False,
) -> CouplingSet:
    """Couplings for a QD at ``position`` in ``catalog`` at ``temperature``.

    Flexural modes do not couple to a QD on the neutral axis, and couple
    with their tabulated sidewall maximum on the sidewall. Longitudinal
    modes keep their tabulated (on-axis) coupling in both positions.
    Torsional modes are carried with zero coupling. ``doublet_partners``
    counts each flexural mode twice on the sidewall, standing in for the
    untabulated orthogonal member of the doublet at equal strength.
    """
    T = magnitude(temperature, Dimension.TEMPERATURE)
    if T < 0:
        raise ValueError(f"temperature must be non-negative, got {T}")
    pos = Position.parse(position)
    entries = []
    for r in catalog.records:
        if r.family is ModeFamily.FLEXURAL:
            g = r.g_max if pos is Position.ON_SIDEWALL else 0.0
        elif r.family is ModeFamily.LONGITUDINAL:
            g = r.g_max
        else:
            g = 0.0
        e2 = eta_squared(g, r.omega)
        if doublet_partners and r.family is ModeFamily.FLEXURAL:
            e2 *= 2.0
        n = occupation(r.omega, T)
        entries.append(CouplingEntry(r.family, r.index, r.omega, g, e2, theta_squared(e2, n), n))
    return CouplingSet(T, tuple(entries))


def synthetic_coupling_set(modes: Iterable[tuple[float, float, float]], temperature: float = 0.0) -> CouplingSet:
    """Coupling set from explicit ``(omega, eta_sq, theta_sq)`` triples.

    Bypasses the Bose-Einstein relation; meant for tests and toy models.
    """
    entries = []
    for i, (w, e2, t2) in enumerate(modes, start=1):
        if not w > 0:
            raise ValueError("angular frequency must be positive")
        occ = t2 / (4.0 * e2) if e2 > 0 else 0.0
        entries.append(CouplingEntry(ModeFamily.LONGITUDINAL, i, float(w), float(w) * math.sqrt(e2), float(e2), float(t2), occ))
    return CouplingSet(float(temperature), tuple(entries))
