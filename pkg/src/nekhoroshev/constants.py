"""Stability exponents, explicit constants and the scales they induce.

Three layers:

* :func:`exponents` depends only on ``n`` and the steepness indices and is
  computed in exact rational arithmetic.
* :func:`derived_constants` combines the steepness profile with an
  :class:`AnalyticityEnvelope` into the perturbation threshold, the
  confinement coefficient and the time prefactor.
* :func:`epsilon_scales` and :func:`lattice_scales` evaluate the
  perturbation-dependent cutoffs, widths and radii, and
  :func:`verify_parameter_relations` checks the compatibility inequalities
  among them.

All real-valued constants are 50-digit mpmath floats (see
:mod:`nekhoroshev.numeric`).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .lattices import Lattice
from .numeric import MP, Real, as_fraction, mpf, power, snap_integer, to_json_number
from .steepness import SteepnessProfile

__all__ = [
    "AnalyticityEnvelope",
    "ExponentTable",
    "ConstantSet",
    "EpsilonScales",
    "LatticeScales",
    "RelationRecord",
    "RelationReport",
    "exponents",
    "derived_constants",
    "epsilon_scales",
    "scaled_geometry",
    "lattice_scales",
    "verify_parameter_relations",
    "nekhoroshev_1977_exponents",
    "RELATION_NAMES",
    "SLACK_RTOL",
]

SLACK_RTOL = 1e-10
SQRT2 = MP.sqrt(2)

RELATION_NAMES = (
    "conda1",
    "Ksigma",
    "conditionsin.1",
    "conditionsin.2",
    "conditionsin.3",
    "rhoLrho",
    "epsnonres",
    "rho est",
    "rho0",
    "rho0r",
    "rleqrho",
    "Texp",
)
# relations about the normal-form and time estimates rather than geometry;
# meaningless when the cutoff is chosen by hand
ANALYTIC_ONLY = frozenset({"Ksigma", "epsnonres", "Texp"})


@dataclass(frozen=True)
class AnalyticityEnvelope:
    """Bounds on the model needed by the constants.

    ``omega_min <= |omega| <= omega_max`` on the domain, ``lipschitz_M``
    bounds the Lipschitz constant of ``omega`` on its ``delta``-extension,
    ``sigma`` is the angular analyticity width and ``f_norm`` the Fourier
    norm of the perturbation.
    """

    sigma: Fraction
    omega_min: Fraction
    omega_max: Fraction
    lipschitz_M: Fraction
    f_norm: Fraction
    rigorous: bool = True
    notes: tuple[str, ...] = ()

    def __post_init__(self):
        for name in ("sigma", "omega_min", "omega_max", "lipschitz_M", "f_norm"):
            object.__setattr__(self, name, as_fraction(getattr(self, name)))
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")
        if not 0 < self.omega_min <= self.omega_max:
            raise ValueError("need 0 < omega_min <= omega_max")
        if self.lipschitz_M <= 0:
            raise ValueError("Lipschitz constant must be positive")
        if self.f_norm < 0:
            raise ValueError("Fourier norm cannot be negative")

    def to_json(self) -> dict:
        out = {k: to_json_number(getattr(self, k)) for k in ("sigma", "omega_min", "omega_max", "lipschitz_M", "f_norm")}
        out["rigorous"] = self.rigorous
        out["notes"] = list(self.notes)
        return out

    @classmethod
    def from_json(cls, data: dict) -> "AnalyticityEnvelope":
        return cls(
            data["sigma"],
            data["omega_min"],
            data["omega_max"],
            data["lipschitz_M"],
            data["f_norm"],
            data.get("rigorous", True),
            tuple(data.get("notes", ())),
        )


# ----------------------------------------------------------------------------
# exponents


@dataclass(frozen=True)
class ExponentTable:
    """Exact exponent data; tuples are indexed from j = 1.

    ``p`` has ``n - 2`` entries, ``q``, ``a_gaps`` and ``betas`` have ``n - 1``.
    """

    n: int
    alphas: tuple[Fraction, ...]
    p: tuple[Fraction, ...]
    q: tuple[Fraction, ...]
    a_gaps: tuple[Fraction, ...]
    betas: tuple[Fraction, ...]
    a: Fraction
    b: Fraction

    def to_json(self) -> dict:
        def exact(x: Fraction):
            return {"value": to_json_number(x), "exact": str(x)}

        return {
            "n": self.n,
            "alphas": [to_json_number(x) for x in self.alphas],
            "p": [to_json_number(x) for x in self.p],
            "q": [to_json_number(x) for x in self.q],
            "a_gaps": [to_json_number(x) for x in self.a_gaps],
            "betas": [to_json_number(x) for x in self.betas],
            "a": exact(self.a),
            "b": exact(self.b),
        }


def _check_alphas(n: int, alphas) -> tuple[Fraction, ...]:
    if n < 3:
        raise ValueError("need n >= 3")
    al = tuple(as_fraction(x) for x in alphas)
    if len(al) != n - 1:
        raise ValueError(f"expected {n - 1} steepness indices, got {len(al)}")
    if any(x < 1 for x in al):
        raise ValueError("steepness indices must be >= 1")
    return al


def exponents(n: int, alphas: Sequence) -> ExponentTable:
    """Products ``p_j``, exponents ``q_j``, gaps ``a_j``, ``beta_j`` and ``a``, ``b``.

    The exponents are computed twice, from the closed form ``q_j = n p_j - j``
    and from the gap recursion, and the two must agree exactly.
    """
    al = _check_alphas(n, alphas)
    # p_j = alpha_j ... alpha_{n-2}, j = 1..n-2
    p = [Fraction(1)] * (n - 2)
    acc = Fraction(1)
    for j in range(n - 2, 0, -1):
        acc *= al[j - 1]
        p[j - 1] = acc
    q_closed = [n * p[j - 1] - j for j in range(1, n - 1)] + [Fraction(1)]

    gaps = [Fraction(0)] * (n - 1)
    gaps[n - 2] = Fraction(1)
    for j in range(n - 2, 0, -1):
        p_next = p[j] if j + 1 <= n - 2 else Fraction(1)
        gaps[j - 1] = n * p_next * (al[j - 1] - 1) + 1
    q_rec = [Fraction(0)] * (n - 1)
    q_rec[n - 2] = Fraction(1)
    for j in range(n - 2, 0, -1):
        q_rec[j - 1] = q_rec[j] + gaps[j - 1]
    if q_rec != q_closed:
        raise AssertionError(f"exponent recursion {q_rec} disagrees with closed form {q_closed}")

    betas = tuple(al[j - 1] + j * (al[j - 1] - 1) for j in range(1, n))
    a = 1 / (2 * n * p[0])
    b = a / al[n - 2]
    return ExponentTable(n, al, tuple(p), tuple(q_closed), tuple(gaps), betas, a, b)


def nekhoroshev_1977_exponents(n: int, alphas: Sequence, strict: bool = False) -> dict:
    """Exponents of the original 1977 theorem, for comparison.

    The nested expression for ``zeta`` is written for ``n >= 5``; for
    ``n = 3, 4`` the uniform recursion ``t_k = alpha_k t_{k+1} + k`` with
    ``t_{n-1} = n`` is used unless ``strict`` is set.
    """
    al = _check_alphas(n, alphas)
    if strict and n < 5:
        raise ValueError("the nested formula for zeta needs n >= 5 in strict mode")
    t = Fraction(n)
    for k in range(n - 2, 0, -1):
        t = al[k - 1] * t + k
    zeta = t - 1
    a_old = Fraction(2) / (12 * zeta + 3 * n + 14)
    b_old = 3 * a_old / (2 * al[n - 2])
    table = exponents(n, al)
    return {
        "n": n,
        "zeta": zeta,
        "a_old": a_old,
        "b_old": b_old,
        "a_new": table.a,
        "b_new": table.b,
        "ratio": table.a / a_old,
        "convention": "nested" if n >= 5 else "uniform-recursion",
    }


# ----------------------------------------------------------------------------
# epsilon-independent constants


@dataclass(frozen=True)
class ConstantSet:
    """Explicit constants; ``l`` is indexed from j = 1 and has ``n - 1`` entries."""

    profile: SteepnessProfile
    env: AnalyticityEnvelope
    table: ExponentTable
    l: tuple[Real, ...]
    E: Real
    A: Real
    eps0: Real
    eps_star: Real
    c: Real
    R: Real
    T: Real
    mu0: Real

    def to_json(self) -> dict:
        return {
            "l": [to_json_number(x) for x in self.l],
            "E": to_json_number(self.E),
            "A": to_json_number(self.A),
            "eps0": to_json_number(self.eps0),
            "eps_star": to_json_number(self.eps_star),
            "c": to_json_number(self.c),
            "R": to_json_number(self.R),
            "T": to_json_number(self.T),
            "mu0": to_json_number(self.mu0),
        }


def derived_constants(profile: SteepnessProfile, env: AnalyticityEnvelope) -> ConstantSet:
    n = profile.n
    table = exponents(n, profile.alphas)
    al, C = profile.alphas, [mpf(c) for c in profile.coeffs]
    delta = mpf(profile.delta)
    w_lo, w_hi = mpf(env.omega_min), mpf(env.omega_max)
    M, sigma, fnorm = mpf(env.lipschitz_M), mpf(env.sigma), mpf(env.f_norm)
    a, b = table.a, table.b
    p1 = table.p[0]
    if fnorm == 0:
        raise ValueError("the constants need a nonzero perturbation norm")

    l = tuple(
        (w_lo / M) * power(C[j] / w_lo, 1 / al[j]) + 4 * power(2 * (2 * w_hi + M * delta) / w_lo, 1 / al[j])
        for j in range(n - 1)
    )
    E = mpf(4)
    for j in range(n - 2):
        num = power(4 * M * l[j], al[j]) * power(6, table.q[j] * (al[j] - 1))
        # (omega_min / (2 sqrt 2))**(alpha - 1), kept as an exact power of 2
        den = C[j] * power(w_lo, al[j] - 1) / power(2, Fraction(3, 2) * (al[j] - 1))
        E = max(E, power(num / den, 1 / table.betas[j]))
    E = snap_integer(E)
    A = 6 * E

    eps0 = power(2, -8) / (power(6, 4 * n * p1 - 5) * power(E, 2 * n * p1 - 1)) * w_lo**2 / (M * fnorm)
    inv_a, inv_b = 1 / a, 1 / b
    lc = l[n - 2]
    Cl = C[n - 2]
    factor = min(
        power(2, inv_b / 2) * power(6 * M * delta / (n * w_lo), inv_b),
        power(2, inv_b / 2) * power(Fraction(18, n), inv_b),
        power(delta / (4 * n * lc), inv_b) * power(2, inv_a / 2) * power(12 * E * Cl / w_lo, inv_a),
        power(sigma / 6, inv_a),
        mpf(1),
    )
    eps_star = eps0 * factor
    c = power(eps0, a) * sigma / 6
    mu0 = max(
        w_lo / (24 * SQRT2 * M * delta),
        1 / (72 * SQRT2),
        (lc / delta) * power(w_lo / (12 * SQRT2 * E * Cl), 1 / al[n - 2]),
    )
    R = delta * n * mu0 / power(eps0, b)
    T = sigma / (24 * SQRT2) * w_lo / (M * power(A, inv_a) * MP.sqrt(eps0) * fnorm)
    return ConstantSet(profile, env, table, l, E, A, eps0, eps_star, c, R, T, mu0)


# ----------------------------------------------------------------------------
# epsilon-dependent scales


@dataclass(frozen=True)
class EpsilonScales:
    """Perturbation-dependent cutoff, radii, widths and times.

    ``lam``, ``r_drift`` and ``T_dim`` are indexed from j = 1. ``mode`` is
    ``"analytic"`` when ``eps`` was given and ``"scaled"`` when the cutoff
    ``K`` was chosen directly and ``eps`` is the value it implies.
    """

    consts: ConstantSet = field(repr=False)
    eps: Real
    K: Real
    r: Real
    m: Real
    lambda_bar: Real
    lam: tuple[Real, ...]
    r_drift: tuple[Real, ...]
    rho0: Real
    T0: Real
    T_dim: tuple[Real, ...]
    T_exp: Real
    mode: str = "analytic"
    warnings: tuple[str, ...] = ()

    @property
    def n(self) -> int:
        return self.consts.profile.n

    @property
    def K_int(self) -> int:
        """Largest integer l1 cutoff not exceeding ``K``."""
        return int(MP.floor(self.K))

    @property
    def stability_time(self) -> Real:
        """Theorem time ``T / sqrt(eps) * exp(K sigma / 6)``."""
        return self.consts.T / MP.sqrt(self.eps) * MP.exp(self.K * mpf(self.consts.env.sigma) / 6)

    def lambda_ordered(self) -> bool:
        lam = self.lam
        return all(x < y for x, y in zip(lam, lam[1:])) and lam[-1] <= self.lambda_bar

    def to_json(self) -> dict:
        return {
            "mode": self.mode,
            "eps": to_json_number(self.eps),
            "K": to_json_number(self.K),
            "r": to_json_number(self.r),
            "m": to_json_number(self.m),
            "lambda_bar": to_json_number(self.lambda_bar),
            "lambda": [to_json_number(x) for x in self.lam],
            "r_drift": [to_json_number(x) for x in self.r_drift],
            "rho0": to_json_number(self.rho0),
            "T0": to_json_number(self.T0),
            "T_dim": [to_json_number(x) for x in self.T_dim],
            "T_exp": to_json_number(self.T_exp),
            "stability_time": to_json_number(self.stability_time),
            "warnings": list(self.warnings),
        }


@dataclass(frozen=True)
class LatticeScales:
    dim: int
    volume: Real
    delta_L: Real
    rho_L: Real
    alpha_L: Real
    d_L: Real
    T_L: Real
    label: str | None = None

    def floats(self) -> dict:
        return {k: float(getattr(self, k)) for k in ("volume", "delta_L", "rho_L", "alpha_L", "d_L")}

    def to_json(self) -> dict:
        return {
            "label": self.label,
            "dim": self.dim,
            **{k: to_json_number(getattr(self, k)) for k in ("volume", "delta_L", "rho_L", "alpha_L", "d_L", "T_L")},
        }


def _time_prefactor(consts: ConstantSet, eps: Real, K: Real) -> Real:
    fnorm = mpf(consts.env.f_norm)
    if fnorm == 0:
        return MP.inf
    return MP.exp(K * mpf(consts.env.sigma) / 6) / (eps * fnorm)


def _scales_from(consts: ConstantSet, eps: Real, K: Real, mode: str, notes: list[str]) -> EpsilonScales:
    prof, env, tab = consts.profile, consts.env, consts.table
    n = prof.n
    M, sigma = mpf(env.lipschitz_M), mpf(env.sigma)
    delta = mpf(prof.delta)
    # r = 2 R eps^b written through K to avoid forming eps^b twice
    r = 2 * delta * n * consts.mu0 * power(K, -tab.b / tab.a)
    m = r / (2 * n)
    lambda_bar = mpf(env.omega_min) / (2 * SQRT2)
    AK = consts.A * K
    lam = tuple(lambda_bar / power(AK, q) for q in tab.q)
    r_drift = tuple(
        consts.l[j] * power(lam[j] / mpf(prof.coeffs[j]), 1 / prof.alphas[j]) for j in range(n - 1)
    )
    rho0 = lam[0] / (2 * M * K)
    pref = _time_prefactor(consts, eps, K)
    T0 = sigma * rho0 / 5 * pref
    # T_Lambda decreases with the volume, so the minimum sits at |Lambda| = K^j
    T_dim = tuple(MP.e * sigma / 24 * (lam[j - 1] / power(K, j) / M) * pref for j in range(1, n))
    T_exp = min((T0,) + T_dim)
    out = EpsilonScales(consts, eps, K, r, m, lambda_bar, lam, r_drift, rho0, T0, T_dim, T_exp, mode)
    if not out.lambda_ordered():
        notes.append("lambda_1 < ... < lambda_{n-1} <= lambda_bar fails")
    return EpsilonScales(**{**out.__dict__, "warnings": tuple(notes)})


def epsilon_scales(consts: ConstantSet, eps) -> EpsilonScales:
    """Scales at perturbation size ``eps``; warns (not raises) above the threshold."""
    eps = mpf(as_fraction(eps) if not isinstance(eps, Real) else eps)
    if not eps > 0:
        raise ValueError("eps must be positive")
    notes = []
    if eps > consts.eps_star:
        msg = f"eps={MP.nstr(eps, 6)} exceeds eps*={MP.nstr(consts.eps_star, 6)}"
        warnings.warn(msg, stacklevel=2)
        notes.append(msg)
    K = snap_integer(power(consts.eps0 / eps, consts.table.a))
    return _scales_from(consts, eps, K, "analytic", notes)


def scaled_geometry(consts: ConstantSet, K) -> EpsilonScales:
    """Scales for a hand-picked cutoff ``K``, at the ``eps`` it implies.

    Used to exercise the geometric statements at desk-scale cutoffs, where
    the honest threshold would force ``K`` far beyond exhaustive enumeration.
    """
    K = mpf(K)
    if not K >= 1:
        raise ValueError("K must be >= 1")
    eps = consts.eps0 * power(K, -1 / consts.table.a)
    return _scales_from(consts, eps, K, "scaled", [])


def lattice_scales(scales: EpsilonScales, L: Lattice | tuple[int, float]) -> LatticeScales:
    """Zone width, disc radius, divisor floor and extension cap of a lattice.

    ``L`` is a :class:`Lattice` or a ``(dim, volume)`` pair, which allows
    evaluating extreme volumes without a concrete lattice.
    """
    if isinstance(L, Lattice):
        j, vol, label = L.dim, MP.sqrt(L.gram_det), L.label
        if L.ambient_dim != scales.n:
            raise ValueError("lattice lives in the wrong dimension")
    else:
        j, vol = L
        vol, label = mpf(vol), None
    if not 1 <= j <= scales.n - 1:
        raise ValueError(f"lattice dimension {j} outside [1, {scales.n - 1}]")
    consts = scales.consts
    M = mpf(consts.env.lipschitz_M)
    K = scales.K
    delta_L = scales.lam[j - 1] / vol
    rho_L = delta_L / M
    alpha_L = power(consts.E * K, consts.table.a_gaps[j - 1]) * delta_L
    d_L = alpha_L / (4 * M * K)
    T_L = MP.e * mpf(consts.env.sigma) / 24 * rho_L * _time_prefactor(consts, scales.eps, K)
    return LatticeScales(j, vol, delta_L, rho_L, alpha_L, d_L, T_L, label)


# ----------------------------------------------------------------------------
# compatibility relations


@dataclass
class RelationRecord:
    name: str
    lattice: str | None
    lhs: Real | None
    rhs: Real | None
    status: str  # "pass" | "fail" | "n/a"

    @property
    def slack(self):
        if self.lhs is None:
            return None
        if self.lhs == 0:
            return MP.inf
        return self.rhs / self.lhs

    def to_json(self) -> dict:
        return {
            "relation": self.name,
            "lattice": self.lattice,
            "lhs": to_json_number(self.lhs) if self.lhs is not None else None,
            "rhs": to_json_number(self.rhs) if self.rhs is not None else None,
            "slack": to_json_number(self.slack) if self.slack is not None else None,
            "status": self.status,
        }


@dataclass
class RelationReport:
    scales: EpsilonScales = field(repr=False)
    records: list[RelationRecord]

    @property
    def failures(self) -> list[RelationRecord]:
        return [r for r in self.records if r.status == "fail"]

    @property
    def passed(self) -> bool:
        return not self.failures

    def min_slack(self, name: str | None = None):
        vals = [r.slack for r in self.records if r.status != "n/a" and (name is None or r.name == name)]
        return min(vals) if vals else None

    def summary(self) -> dict:
        out = {}
        for name in RELATION_NAMES:
            recs = [r for r in self.records if r.name == name]
            if not recs:
                continue
            st = {r.status for r in recs}
            status = "fail" if "fail" in st else ("pass" if "pass" in st else "n/a")
            ms = self.min_slack(name)
            out[name] = {
                "status": status,
                "checks": len(recs),
                "min_slack": to_json_number(ms) if ms is not None else None,
            }
        return out

    def to_json(self, include_records: bool = True) -> dict:
        out = {"passed": self.passed, "scales": self.scales.to_json(), "summary": self.summary()}
        if include_records:
            out["records"] = [r.to_json() for r in self.records]
        return out


def _rec(name, lhs, rhs, label=None, skip=False) -> RelationRecord:
    if skip:
        return RelationRecord(name, label, None, None, "n/a")
    ok = lhs <= rhs * (1 + mpf(SLACK_RTOL))
    return RelationRecord(name, label, lhs, rhs, "pass" if ok else "fail")


def verify_parameter_relations(
    scales: EpsilonScales,
    lattice_sample: Iterable[Lattice] = (),
    include_extremes: bool = True,
) -> RelationReport:
    """Evaluate every compatibility relation at the given scales.

    Per-lattice relations run on each lattice of ``lattice_sample`` and, with
    ``include_extremes``, on the extreme volumes 1 and ``K^j`` of every
    dimension. Relations about the analytic part are marked ``n/a`` in
    scaled-geometry mode. The undefined radius ``r_0`` in the drift
    relations is read as ``rho0``.
    """
    c = scales.consts
    prof, env, tab = c.profile, c.env, c.table
    n = prof.n
    K, m = scales.K, scales.m
    M, sigma = mpf(env.lipschitz_M), mpf(env.sigma)
    delta = mpf(prof.delta)
    w_lo = mpf(env.omega_min)
    scaled = scales.mode == "scaled"
    eps_f = scales.eps * mpf(env.f_norm)
    recs: list[RelationRecord] = []

    bound = mpf(0)
    for j in range(n - 1):
        Ea = power(c.E, tab.a_gaps[j])
        bound = max(bound, power((Ea + 1) ** 2 + 1, 1 / (2 * tab.a_gaps[j])), power(4 / Ea + 2, 1 / tab.a_gaps[j]))
    recs.append(_rec("conda1", bound, c.A))
    recs.append(_rec("Ksigma", mpf(6), K * sigma, skip=scaled))

    items: list[tuple[LatticeScales, str]] = []
    for L in lattice_sample:
        items.append((lattice_scales(scales, L), L.label))
    if include_extremes:
        for j in range(1, n):
            items.append((lattice_scales(scales, (j, 1)), f"|L|=1,j={j}"))
            items.append((lattice_scales(scales, (j, power(K, j))), f"|L|=K^{j}"))

    eps_first = scales.lam[0] * scales.rho0 / (2**8 * K)
    recs.append(_rec("epsnonres", eps_f, eps_first, "lambda_1 rho0", skip=scaled))
    for ls, label in items:
        j = ls.dim
        recs.append(_rec("conditionsin.1", ls.rho_L, min(m / 2, ls.d_L), label))
        if j <= n - 2:
            rhs = min(w_lo * m / (4 * delta), w_lo * (m - ls.rho_L) / (2 * delta), scales.lambda_bar)
            recs.append(_rec("conditionsin.2", ls.delta_L, rhs, label))
            lhs = K * M * c.l[j - 1] * power(ls.delta_L / mpf(prof.coeffs[j - 1]), 1 / prof.alphas[j - 1])
            recs.append(_rec("conditionsin.3", lhs, ls.alpha_L / 4, label))
        recs.append(_rec("rhoLrho", ls.d_L, delta, label))
        rhs = min(ls.alpha_L * ls.rho_L, ls.alpha_L * ls.d_L) / (2**9 * K)
        recs.append(_rec("epsnonres", eps_f, rhs, label, skip=scaled))

    radii = (scales.rho0,) + scales.r_drift
    recs.append(_rec("rho est", max(radii), m))
    recs.append(_rec("rho0", scales.rho0, delta))
    recs.append(_rec("rho0r", MP.fsum(radii), scales.r / 2))
    recs.append(_rec("rleqrho", scales.r, delta / 2))
    recs.append(_rec("Texp", scales.stability_time, scales.T_exp, skip=scaled))
    return RelationReport(scales, recs)


def enumeration_cutoff(scales: EpsilonScales, cap: int = 5) -> int:
    """Integer cutoff for exhaustive lattice enumeration, clamped to ``cap``."""
    return max(1, min(scales.K_int, cap))
