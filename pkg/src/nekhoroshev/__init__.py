"""Explicit stability constants and resonance geometry for steep nearly-integrable Hamiltonians."""

__version__ = "0.1.0"

from .angles import Subspace, subspace_angle, vector_angle
from .atlas import Atlas, build_atlas
from .constants import (
    AnalyticityEnvelope,
    derived_constants,
    epsilon_scales,
    exponents,
    nekhoroshev_1977_exponents,
    scaled_geometry,
    verify_parameter_relations,
)
from .dynamics import confinement_report, drift_metrics, integrate, resonance_trace
from .lattices import Lattice, enumerate_maximal_lattices, saturate
from .model import DomainBall, HamiltonianModel, PolynomialH, TrigPolyF
from .reference import reference_envelope, reference_model, reference_profile
from .steepness import SteepnessProfile, check_steepness, steepness_measure

__all__ = [
    "__version__",
    "Subspace",
    "subspace_angle",
    "vector_angle",
    "Atlas",
    "build_atlas",
    "AnalyticityEnvelope",
    "derived_constants",
    "epsilon_scales",
    "exponents",
    "nekhoroshev_1977_exponents",
    "scaled_geometry",
    "verify_parameter_relations",
    "confinement_report",
    "drift_metrics",
    "integrate",
    "resonance_trace",
    "Lattice",
    "enumerate_maximal_lattices",
    "saturate",
    "DomainBall",
    "HamiltonianModel",
    "PolynomialH",
    "TrigPolyF",
    "reference_envelope",
    "reference_model",
    "reference_profile",
    "SteepnessProfile",
    "check_steepness",
    "steepness_measure",
]
