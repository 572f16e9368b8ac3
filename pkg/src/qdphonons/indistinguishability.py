"""Two-photon indistinguishability and single-mode figures of merit.

For an initially excited emitter with perfectly antibunched output::

    I = Gamma * int_0^inf exp(-Gamma t) |P(t)|^2 dt,   Gamma = F_p * Gamma_bulk

and the single-mode efficiency model ``eps = beta * gamma_overlap`` with
``beta = Gamma_C / (Gamma_C + Gamma_B)``.
"""

from __future__ import annotations

import dataclasses
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .catalog import ModeCatalog
from .coupling import CouplingSet, Position, build_coupling_set
from .propagator import decay_horizon, log_coherence_sq, phi_coth_form
from .quadrature import QuadratureResult, integrate, trapezoid

DEFAULT_GAMMA_BULK = 1e9  # 1/s
DEFAULT_BACKGROUND_FRACTION = 0.05


@dataclass(frozen=True)
class QuadratureConfig:
    """Accuracy knobs for the indistinguishability integral.

    ``envelope_cutoff`` fixes the truncation time through
    ``exp(-Gamma T_max) = envelope_cutoff``. No quadrature panel is wider
    than ``max_step_fraction`` times the shorter of the fastest coupled
    mode period and the coherence collapse time.
    """

    rel_tol: float = 1e-8
    envelope_cutoff: float = 1e-12
    max_step_fraction: float = 1.0 / 32.0
    max_depth: int = 40
    collapse_truncation: bool = True

    def __post_init__(self):
        if not 0 < self.rel_tol < 1:
            raise ValueError("rel_tol must lie in (0, 1)")
        if not 0 < self.envelope_cutoff < 1:
            raise ValueError("envelope_cutoff must lie in (0, 1)")
        if not self.max_step_fraction > 0:
            raise ValueError("max_step_fraction must be positive")
        if self.max_depth < 1:
            raise ValueError("max_depth must be at least 1")


@dataclass(frozen=True)
class Scenario:
    """One operating point of the source.

    At most one of ``overlap`` (Gaussian overlap gamma, an optics output)
    or ``efficiency`` (eps itself) may be given; with neither, the overlap
    is taken as 1. ``gamma_b`` defaults to ``0.05 * gamma_bulk``.
    """

    catalog_label: str
    temperature: float
    position: Position
    purcell: float
    gamma_bulk: float = DEFAULT_GAMMA_BULK
    gamma_b: float | None = None
    overlap: float | None = None
    efficiency: float | None = None
    doublet_partners: bool = False

    def __post_init__(self):
        object.__setattr__(self, "position", Position.parse(self.position))
        if self.gamma_b is None:
            object.__setattr__(self, "gamma_b", DEFAULT_BACKGROUND_FRACTION * self.gamma_bulk)
        if not self.purcell > 0:
            raise ValueError("purcell factor must be positive")
        if not self.temperature >= 0:
            raise ValueError("temperature must be non-negative")
        if not self.gamma_bulk > 0:
            raise ValueError("gamma_bulk must be positive")
        if not self.gamma_b >= 0:
            raise ValueError("gamma_b must be non-negative")
        if self.overlap is not None and self.efficiency is not None:
            raise ValueError("give at most one of overlap or efficiency")
        for name in ("overlap", "efficiency"):
            v = getattr(self, name)
            if v is not None and not 0 <= v <= 1:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")

    @property
    def gamma_c(self) -> float:
        return self.purcell * self.gamma_bulk


@dataclass(frozen=True)
class MeritReport:
    scenario: Scenario
    purcell: float
    beta: float
    efficiency: float
    indistinguishability: float
    product: float
    quad_error: float

    def as_dict(self) -> dict:
        return {
            "catalog": self.scenario.catalog_label,
            "position": self.scenario.position.value,
            "temperature_k": self.scenario.temperature,
            "purcell": self.purcell,
            "gamma_bulk_per_s": self.scenario.gamma_bulk,
            "gamma_b_per_s": self.scenario.gamma_b,
            "beta": self.beta,
            "efficiency": self.efficiency,
            "indistinguishability": self.indistinguishability,
            "product": self.product,
            "quad_error": self.quad_error,
        }


def _step_limit(couplings: CouplingSet, cfg: QuadratureConfig) -> float:
    return cfg.max_step_fraction * min(couplings.fastest_period(), couplings.collapse_time())


def integrate_indistinguishability(
    couplings: CouplingSet,
    gamma: float,
    cfg: QuadratureConfig = QuadratureConfig(),
    *,
    t_max: float | None = None,
    backend: str | None = None,
) -> QuadratureResult:
    """Adaptive evaluation of I with its error estimate.

    ``t_max`` overrides the truncation time (used to check the tail bound).
    """
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    if not couplings.active:
        return QuadratureResult(1.0, 0.0, 0, 0, 0)
    if t_max is None:
        t_max = decay_horizon(couplings, gamma, cfg.envelope_cutoff, power=2.0, collapse=cfg.collapse_truncation)

    def f(t):
        return gamma * np.exp(log_coherence_sq(t, couplings, backend=backend) - gamma * t)

    res = integrate(
        f, 0.0, t_max,
        max_step=_step_limit(couplings, cfg),
        rel_tol=cfg.rel_tol,
        max_depth=cfg.max_depth,
        min_panels=16,
    )
    return dataclasses.replace(res, value=min(max(res.value, 0.0), 1.0))


def indistinguishability(couplings: CouplingSet, gamma: float, cfg: QuadratureConfig = QuadratureConfig()) -> float:
    """I = Gamma int_0^inf exp(-Gamma t) |P(t)|^2 dt."""
    return integrate_indistinguishability(couplings, gamma, cfg).value


def shortest_timescale(couplings: CouplingSet, gamma: float) -> float:
    """min(1/Gamma, fastest coupled period, collapse time)."""
    return min(1.0 / gamma, couplings.fastest_period(), couplings.collapse_time())


def trapezoid_oracle(
    couplings: CouplingSet,
    gamma: float,
    *,
    envelope_cutoff: float = 1e-12,
    divisor: int = 1000,
    chunk: int = 200_000,
) -> float:
    """Brute-force I on a uniform grid, step = shortest timescale / divisor.

    Runs to the full envelope horizon and, for T > 0, builds |P|^2 from
    the coth form of the propagator rather than the compiled kernels.
    """
    t_max = -math.log(envelope_cutoff) / gamma
    h = shortest_timescale(couplings, gamma) / divisor
    n = int(math.ceil(t_max / h))
    h = t_max / n
    T = couplings.temperature
    total = 0.0
    ends = []
    for start in range(0, n + 1, chunk):
        t = np.arange(start, min(start + chunk, n + 1)) * h
        if T > 0:
            re, _ = phi_coth_form(t, couplings, T)
        else:
            re = np.zeros_like(t)
            for e in couplings.entries:
                re -= (e.theta_sq + 2.0 * e.eta_sq) * np.sin(0.5 * e.omega * t) ** 2
        y = gamma * np.exp(2.0 * re - gamma * t)
        total += float(y.sum())
        ends.append((y[0], y[-1]))
    total -= 0.5 * (ends[0][0] + ends[-1][1])
    return total * h


def beta_factor(gamma_c: float, gamma_b: float) -> float:
    if gamma_c < 0 or gamma_b < 0:
        raise ValueError("rates must be non-negative")
    if gamma_c == 0 and gamma_b == 0:
        raise ValueError("gamma_c and gamma_b cannot both be zero")
    if not gamma_c > 0:
        raise ValueError("gamma_c must be positive")
    return gamma_c / (gamma_c + gamma_b)


def efficiency(beta: float, overlap: float) -> float:
    for name, v in (("beta", beta), ("overlap", overlap)):
        if not 0 <= v <= 1:
            raise ValueError(f"{name} must lie in [0, 1], got {v}")
    return beta * overlap


def merit_report(
    scenario: Scenario,
    catalog: ModeCatalog,
    cfg: QuadratureConfig = QuadratureConfig(),
    *,
    backend: str | None = None,
) -> MeritReport:
    if catalog.structure_label != scenario.catalog_label:
        raise ValueError(
            f"scenario expects catalog {scenario.catalog_label!r}, got {catalog.structure_label!r}"
        )
    couplings = build_coupling_set(
        catalog, scenario.temperature, scenario.position, doublet_partners=scenario.doublet_partners
    )
    res = integrate_indistinguishability(couplings, scenario.gamma_c, cfg, backend=backend)
    beta = beta_factor(scenario.gamma_c, scenario.gamma_b)
    if scenario.efficiency is not None:
        eps = scenario.efficiency
    else:
        eps = efficiency(beta, 1.0 if scenario.overlap is None else scenario.overlap)
    return MeritReport(scenario, scenario.purcell, beta, eps, res.value, eps * res.value, res.error)


def temperature_sweep(
    scenario: Scenario,
    catalog: ModeCatalog,
    temperatures,
    cfg: QuadratureConfig = QuadratureConfig(),
    *,
    workers: int = 1,
) -> list[tuple[float, float]]:
    """(T, I) for each temperature, in input order."""
    temps = [float(T) for T in temperatures]
    if any(not T >= 0 for T in temps):
        raise ValueError("temperatures must be non-negative")

    def one(T):
        return merit_report(dataclasses.replace(scenario, temperature=T), catalog, cfg).indistinguishability

    if workers > 1 and len(temps) > 1:
        with ThreadPoolExecutor(workers) as pool:
            values = list(pool.map(one, temps))
    else:
        values = [one(T) for T in temps]
    return list(zip(temps, values))
