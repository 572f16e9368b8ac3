"""Phonon-induced decoherence of quantum-dot single-photon sources.

Mechanical mode tables go in, per-mode couplings, the independent-boson
propagator, the emission spectrum and the two-photon indistinguishability
come out.
"""

from ._kernels import BACKEND
from .catalog import (
    CatalogError,
    ModeCatalog,
    ModeFamily,
    ModeRecord,
    ReferenceCouplingTable,
    load_catalog,
    load_reference,
    parse_mode_table,
    parse_reference_couplings,
    serialize_mode_table,
    validate_zpf,
)
from .coupling import (
    CouplingSet,
    DeformationPotentials,
    Position,
    StrainDerivatives,
    build_coupling_set,
    coupling_from_strain,
    effective_mass,
    eta_squared,
    occupation,
    theta_squared,
)
from .indistinguishability import (
    MeritReport,
    QuadratureConfig,
    Scenario,
    beta_factor,
    efficiency,
    indistinguishability,
    merit_report,
    temperature_sweep,
)
from .propagator import coherence, phi, phi_coth_form, spectrum
from .quadrature import QuadratureError

__version__ = "0.1.0"
