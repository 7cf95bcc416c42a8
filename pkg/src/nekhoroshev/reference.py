"""The bundled three-degree-of-freedom reference model.

``h = |I|^2 / 2`` (so ``omega(I) = I``, convex with ``C_j = 1``, ``alpha_j = 1``)
perturbed by ``f = e^-2/2 cos(phi1 - phi2) + e^-1/2 cos(phi3)``, whose Fourier
norm at ``sigma = 1`` is exactly 1. The domain is the ball of radius 1/2
around ``I0 = 1.5 (1, 1, 1) / sqrt 3``, on which ``1 <= |omega| <= 2``. The
envelope is the exact one ``(sigma, omega_min, omega_max, M, |f|) = (1, 1, 2, 1, 1)``.
"""

from __future__ import annotations

import json
from importlib import resources

import numpy as np

from .constants import AnalyticityEnvelope
from .model import DomainBall, HamiltonianModel, Polynomial, PolynomialH, TrigPolyF
from .steepness import SteepnessProfile

__all__ = [
    "reference_model",
    "reference_profile",
    "reference_envelope",
    "REFERENCE_CENTER",
    "load_data",
]

REFERENCE_CENTER = tuple(1.5 / np.sqrt(3.0) * np.ones(3))


def build_reference_model() -> HamiltonianModel:
    n = 3
    h = PolynomialH.quadratic(np.eye(n))
    one = Polynomial(n, [((0, 0, 0), 1.0)])
    f = TrigPolyF.cosine(n, (1, -1, 0), one.scaled(0.5 * np.exp(-2.0))) + TrigPolyF.cosine(
        n, (0, 0, 1), one.scaled(0.5 * np.exp(-1.0))
    )
    return HamiltonianModel(h, f, DomainBall(REFERENCE_CENTER, 0.5))


def load_data(name: str) -> dict:
    return json.loads(resources.files("nekhoroshev").joinpath("data").joinpath(name).read_text())


def reference_model() -> HamiltonianModel:
    return HamiltonianModel.from_json(load_data("reference_model.json"))


def reference_profile() -> SteepnessProfile:
    return SteepnessProfile.from_json(load_data("reference_profile.json"))


def reference_envelope() -> AnalyticityEnvelope:
    return AnalyticityEnvelope.from_json(load_data("reference_envelope.json"))
