"""Polynomial integrable part, trigonometric-polynomial perturbation.

``H(I, phi) = h(I) + eps f(I, phi)`` with ``h`` a real polynomial in the
actions and ``f = sum_k f_k(I) exp(i k.phi)`` a finite Fourier sum whose
coefficients are complex polynomials obeying ``f_{-k} = conj(f_k)``.
Derivatives are exact, and sup-norms over complex extensions of a ball are
bounded by coefficient sums.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np

from .constants import AnalyticityEnvelope
from .steepness import SteepnessProfile

__all__ = [
    "Polynomial",
    "PolynomialH",
    "TrigPolyF",
    "DomainBall",
    "HamiltonianModel",
    "fourier_norm",
    "envelope",
    "frequency",
]

REALITY_TOL = 1e-12


class Polynomial:
    """Sparse polynomial ``sum_t c_t I^{e_t}`` in ``n`` variables.

    Evaluation methods accept arrays of shape ``(..., n)``.
    """

    def __init__(self, n: int, terms: Iterable[tuple[Sequence[int], complex]] = ()):
        acc: dict[tuple[int, ...], complex] = {}
        for exps, coeff in terms:
            e = tuple(int(x) for x in exps)
            if len(e) != n or any(x < 0 for x in e):
                raise ValueError(f"bad exponent vector {exps} for n={n}")
            acc[e] = acc.get(e, 0) + coeff
        items = sorted((e, c) for e, c in acc.items() if c != 0)
        self.n = n
        self.exps = np.array([e for e, _ in items], dtype=np.int64).reshape(-1, n)
        coeffs = np.array([c for _, c in items], dtype=complex)
        self.is_real = bool(np.all(coeffs.imag == 0))
        self.coeffs = coeffs.real.copy() if self.is_real else coeffs

    @property
    def terms(self) -> list[tuple[tuple[int, ...], complex]]:
        return [(tuple(int(x) for x in e), c) for e, c in zip(self.exps, self.coeffs)]

    @property
    def degree(self) -> int:
        return int(self.exps.sum(axis=1).max()) if len(self.exps) else 0

    def __call__(self, I) -> np.ndarray:
        I = np.asarray(I, dtype=float)
        if len(self.coeffs) == 0:
            return np.zeros(I.shape[:-1], dtype=self.coeffs.dtype)
        mono = np.prod(I[..., None, :] ** self.exps, axis=-1)
        return mono @ self.coeffs

    def derivative(self, i: int) -> "Polynomial":
        mask = self.exps[:, i] > 0
        e = self.exps[mask].copy()
        c = self.coeffs[mask] * e[:, i]
        e[:, i] -= 1
        return Polynomial(self.n, zip(e.tolist(), c.tolist()))

    @cached_property
    def gradient_polys(self) -> tuple["Polynomial", ...]:
        return tuple(self.derivative(i) for i in range(self.n))

    @cached_property
    def hessian_polys(self) -> tuple[tuple["Polynomial", ...], ...]:
        return tuple(tuple(g.derivative(k) for k in range(self.n)) for g in self.gradient_polys)

    def gradient(self, I) -> np.ndarray:
        return np.stack([g(I) for g in self.gradient_polys], axis=-1)

    def hessian(self, I) -> np.ndarray:
        return np.stack([np.stack([p(I) for p in row], axis=-1) for row in self.hessian_polys], axis=-2)

    def sup_bound(self, radii) -> float:
        """Upper bound of ``|p|`` on the polydisc ``|z_i| <= radii[i]``."""
        if len(self.coeffs) == 0:
            return 0.0
        r = np.asarray(radii, dtype=float)
        return float(np.sum(np.abs(self.coeffs) * np.prod(r ** self.exps, axis=-1)))

    def scaled(self, c: complex) -> "Polynomial":
        return Polynomial(self.n, [(e, c * v) for e, v in self.terms])

    def conj(self) -> "Polynomial":
        return Polynomial(self.n, [(e, np.conj(v)) for e, v in self.terms])

    def allclose(self, other: "Polynomial", tol: float = REALITY_TOL) -> bool:
        a = dict(self.terms)
        b = dict(other.terms)
        keys = set(a) | set(b)
        return all(abs(a.get(k, 0) - b.get(k, 0)) <= tol * max(1.0, abs(a.get(k, 0))) for k in keys)

    def to_json(self) -> list[dict]:
        out = []
        for e, c in self.terms:
            c = complex(c)
            coeff = c.real if c.imag == 0 else [c.real, c.imag]
            out.append({"exponents": list(e), "coeff": coeff})
        return out

    @classmethod
    def from_json(cls, n: int, data: list[dict]) -> "Polynomial":
        return cls(n, [(t["exponents"], _parse_coeff(t["coeff"])) for t in data])


def _parse_coeff(c) -> complex:
    if isinstance(c, Mapping):
        return complex(float(c.get("re", 0.0)), float(c.get("im", 0.0)))
    if isinstance(c, (list, tuple)):
        return complex(float(c[0]), float(c[1]))
    return float(c)


class PolynomialH(Polynomial):
    """Real polynomial integrable Hamiltonian; ``frequency`` is its gradient."""

    def __init__(self, n: int, terms: Iterable[tuple[Sequence[int], float]] = ()):
        super().__init__(n, terms)
        if not self.is_real:
            raise ValueError("the integrable part must have real coefficients")

    @classmethod
    def quadratic(cls, hess, linear=None) -> "PolynomialH":
        """``h = 1/2 I.H.I + b.I``."""
        Hm = np.asarray(hess, dtype=float)
        n = Hm.shape[0]
        terms = []
        for i in range(n):
            for k in range(i, n):
                e = [0] * n
                e[i] += 1
                e[k] += 1
                terms.append((e, Hm[i, i] / 2 if i == k else Hm[i, k]))
        if linear is not None:
            for i, b in enumerate(linear):
                terms.append(([int(i == k) for k in range(n)], float(b)))
        return cls(n, terms)

    def frequency(self, I) -> np.ndarray:
        return self.gradient(I)


def frequency(h: PolynomialH, I) -> np.ndarray:
    return h.frequency(I)


class TrigPolyF:
    """Finite Fourier sum ``sum_k f_k(I) exp(i k.phi)`` with real values."""

    def __init__(self, n: int, harmonics: Mapping[Sequence[int], Polynomial]):
        self.n = n
        hs: dict[tuple[int, ...], Polynomial] = {}
        for k, p in harmonics.items():
            kk = tuple(int(x) for x in k)
            if len(kk) != n:
                raise ValueError(f"harmonic {k} is not an {n}-vector")
            if p.n != n:
                raise ValueError("coefficient polynomial has wrong arity")
            if len(p.coeffs):
                hs[kk] = p
        for k, p in hs.items():
            mk = tuple(-x for x in k)
            partner = hs.get(mk)
            if partner is None or not partner.allclose(p.conj()):
                raise ValueError(f"reality constraint f_(-k) = conj(f_k) fails at k={k}")
        self.harmonics = dict(sorted(hs.items()))

    @classmethod
    def cosine(cls, n: int, k: Sequence[int], amplitude: float | Polynomial = 1.0) -> "TrigPolyF":
        """``amplitude * cos(k.phi)``; ``amplitude`` may be a real polynomial in I."""
        if not isinstance(amplitude, Polynomial):
            amplitude = Polynomial(n, [((0,) * n, float(amplitude))])
        k = tuple(int(x) for x in k)
        if not any(k):
            return cls(n, {k: amplitude})
        half = amplitude.scaled(0.5)
        return cls(n, {k: half, tuple(-x for x in k): half})

    @classmethod
    def constant(cls, n: int, c: float) -> "TrigPolyF":
        return cls(n, {(0,) * n: Polynomial(n, [((0,) * n, float(c))])})

    def __add__(self, other: "TrigPolyF") -> "TrigPolyF":
        if other.n != self.n:
            raise ValueError("dimension mismatch")
        merged: dict = {}
        for src in (self.harmonics, other.harmonics):
            for k, p in src.items():
                merged[k] = Polynomial(self.n, (merged[k].terms if k in merged else []) + p.terms)
        return TrigPolyF(self.n, merged)

    def scaled(self, c: float) -> "TrigPolyF":
        return TrigPolyF(self.n, {k: p.scaled(c) for k, p in self.harmonics.items()})

    @cached_property
    def kvecs(self) -> np.ndarray:
        return np.array(list(self.harmonics), dtype=np.int64).reshape(-1, self.n)

    def _phases(self, phi) -> np.ndarray:
        phi = np.asarray(phi, dtype=float)
        return np.exp(1j * (phi @ self.kvecs.T))

    def evaluate_complex(self, I, phi) -> np.ndarray:
        I = np.asarray(I, dtype=float)
        if not self.harmonics:
            return np.zeros(I.shape[:-1], dtype=complex)
        vals = np.stack([p(I) for p in self.harmonics.values()], axis=-1)
        return np.sum(vals * self._phases(phi), axis=-1)

    def __call__(self, I, phi) -> np.ndarray:
        return self.evaluate_complex(I, phi).real

    def grad_phi(self, I, phi) -> np.ndarray:
        I = np.asarray(I, dtype=float)
        if not self.harmonics:
            return np.zeros(I.shape)
        vals = np.stack([p(I) for p in self.harmonics.values()], axis=-1) * self._phases(phi)
        return (1j * vals @ self.kvecs.astype(float)).real

    def grad_I(self, I, phi) -> np.ndarray:
        I = np.asarray(I, dtype=float)
        if not self.harmonics:
            return np.zeros(I.shape)
        ph = self._phases(phi)
        grads = np.stack([p.gradient(I) for p in self.harmonics.values()], axis=-2)
        return np.sum(grads * ph[..., None], axis=-2).real

    def flat_terms(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(harmonic, exponent, complex coefficient) arrays, one row per monomial."""
        ks, es, cs = [], [], []
        for k, p in self.harmonics.items():
            for e, c in zip(p.exps, p.coeffs):
                ks.append(k)
                es.append(e)
                cs.append(complex(c))
        return (
            np.array(ks, dtype=np.float64).reshape(-1, self.n),
            np.array(es, dtype=np.int64).reshape(-1, self.n),
            np.array(cs, dtype=complex),
        )

    def to_json(self) -> list[dict]:
        return [{"k": list(k), "poly": p.to_json()} for k, p in self.harmonics.items()]

    @classmethod
    def from_json(cls, n: int, data: list[dict]) -> "TrigPolyF":
        hs: dict = {}
        for item in data:
            k = tuple(int(x) for x in item["k"])
            p = Polynomial.from_json(n, item["poly"])
            hs[k] = Polynomial(n, (hs[k].terms if k in hs else []) + p.terms)
        return cls(n, hs)


@dataclass(frozen=True)
class DomainBall:
    center: tuple[float, ...]
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(x) for x in self.center))
        if not self.radius > 0:
            raise ValueError("domain radius must be positive")

    @property
    def n(self) -> int:
        return len(self.center)

    def polydisc_radii(self, delta: float) -> np.ndarray:
        """Per-variable radius of a polydisc containing the complex delta-extension."""
        return np.abs(np.array(self.center)) + self.radius + float(delta)

    def contains(self, I, margin: float = 0.0) -> np.ndarray:
        I = np.asarray(I, dtype=float)
        return np.linalg.norm(I - np.array(self.center), axis=-1) < self.radius - margin

    def grid(self, per_axis: int) -> np.ndarray:
        """Cartesian grid points inside the closed ball plus the axis extremes."""
        c = np.array(self.center)
        axis = np.linspace(-self.radius, self.radius, per_axis)
        pts = np.array(list(itertools.product(axis, repeat=self.n)))
        pts = pts[np.linalg.norm(pts, axis=1) <= self.radius * (1 + 1e-12)]
        extremes = np.concatenate([np.eye(self.n), -np.eye(self.n)]) * self.radius
        return np.unique(np.concatenate([pts, extremes]), axis=0) + c

    def to_json(self) -> dict:
        return {"center": list(self.center), "radius": self.radius}


def fourier_norm(f: TrigPolyF, domain: DomainBall, delta, sigma) -> float:
    """Coefficient bound of ``sum_k sup |f_k| exp(|k|_1 sigma)`` over the delta-extension.

    Each ``sup |f_k|`` is replaced by the sum of monomial magnitudes on a
    polydisc containing the extension, so the value is an upper bound for
    the true norm.
    """
    if not (float(delta) > 0 and float(sigma) > 0):
        raise ValueError("delta and sigma must be positive")
    radii = domain.polydisc_radii(float(delta))
    total = math.fsum(
        p.sup_bound(radii) * math.exp(sum(abs(x) for x in k) * float(sigma)) for k, p in f.harmonics.items()
    )
    return total


@dataclass
class HamiltonianModel:
    h: PolynomialH
    f: TrigPolyF
    domain: DomainBall

    def __post_init__(self):
        if not (self.h.n == self.f.n == self.domain.n):
            raise ValueError("h, f and the domain disagree on the dimension")

    @property
    def n(self) -> int:
        return self.h.n

    def frequency(self, I) -> np.ndarray:
        return self.h.frequency(I)

    def energy(self, I, phi, eps: float) -> np.ndarray:
        return self.h(I) + eps * self.f(I, phi)

    def to_json(self) -> dict:
        return {"n": self.n, "h": self.h.to_json(), "f": self.f.to_json(), "domain": self.domain.to_json()}

    @classmethod
    def from_json(cls, data: dict) -> "HamiltonianModel":
        n = int(data["n"])
        h = PolynomialH(n, [(t["exponents"], float(t["coeff"])) for t in data["h"]])
        f = TrigPolyF.from_json(n, data.get("f", []))
        dom = data["domain"]
        return cls(h, f, DomainBall(tuple(dom["center"]), float(dom["radius"])))

    @classmethod
    def load(cls, path) -> "HamiltonianModel":
        with open(path) as fh:
            return cls.from_json(json.load(fh))


def _lipschitz_bound(h: PolynomialH, domain: DomainBall, delta: float, mode: str, grid: np.ndarray):
    if h.degree <= 2:
        H = h.hessian(np.zeros(h.n))
        return float(np.linalg.norm(H, 2)), "exact (constant Hessian)"
    if mode == "bound":
        radii = domain.polydisc_radii(delta)
        B = np.array([[p.sup_bound(radii) for p in row] for row in h.hessian_polys])
        return float(np.linalg.norm(B, 2)), "coefficient bound on the delta-extension"
    # sample the real delta-extension: push the grid outwards by delta
    c = np.array(domain.center)
    scale = (domain.radius + delta) / domain.radius
    pts = c + (grid - c) * scale
    norms = np.linalg.norm(h.hessian(pts), ord=2, axis=(-2, -1))
    return float(norms.max()), "sampled spectral norm"


def envelope(
    h: PolynomialH,
    f: TrigPolyF,
    domain: DomainBall,
    profile: SteepnessProfile,
    sigma: float,
    per_axis: int | None = None,
    deflate: float = 0.99,
    inflate: float = 1.01,
    lipschitz_mode: str = "bound",
) -> AnalyticityEnvelope:
    """Frequency bounds, Lipschitz constant and Fourier norm for a model.

    ``omega_min`` and ``omega_max`` come from a grid over the domain, deflated
    and inflated by the safety factors, and are not rigorous. ``M`` is exact
    for quadratic ``h``; otherwise ``lipschitz_mode="bound"`` takes the
    spectral norm of the entrywise coefficient bound of the Hessian (rigorous)
    and ``"sample"`` the sampled maximum times ``inflate``.
    """
    if lipschitz_mode not in ("bound", "sample"):
        raise ValueError("lipschitz_mode must be 'bound' or 'sample'")
    delta = float(profile.delta)
    if per_axis is None:
        per_axis = max(3, int(20000 ** (1.0 / domain.n)))
    grid = domain.grid(per_axis)
    speeds = np.linalg.norm(h.frequency(grid), axis=-1)
    lo, hi = float(speeds.min()), float(speeds.max())
    if lo <= 1e-14 * max(hi, 1.0):
        raise ValueError("frequency vanishes in the domain; the model is not admissible")
    M, how = _lipschitz_bound(h, domain, delta, lipschitz_mode, grid)
    if how == "sampled spectral norm":
        M *= inflate
    fn = fourier_norm(f, domain, delta, sigma)
    notes = (
        f"omega bounds sampled on {len(grid)} points with factors {deflate}/{inflate}",
        f"M: {how}",
        "f_norm: coefficient upper bound",
    )
    return AnalyticityEnvelope(sigma, lo * deflate, hi * inflate, M, fn, rigorous=False, notes=notes)
