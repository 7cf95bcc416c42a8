"""Sampled evaluation of the steepness condition for a frequency map.

For an action ``I``, a j-dimensional subspace ``L`` orthogonal to ``omega(I)``
and a radius ``xi``, the steepness measure is

    max_{0 <= eta <= xi}  min_{u in L, |u| = eta}  |pi_L omega(I + u)|,

and the map is steep with indices ``alpha_j`` and coefficients ``C_j`` if the
measure is at least ``C_j xi**alpha_j`` for every ``xi`` in ``(0, delta]``.

The outer maximum is taken over a finite eta grid and the inner minimum is
found by local search, so every number produced here is evidence, not proof:
a reported margin below one is a genuine counterexample only up to the
accuracy of the inner search, and a margin above one certifies nothing
beyond the sampled points. Reports carry the status ``"heuristic"``.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np
from scipy import optimize

from .angles import Subspace
from .numeric import as_fraction

__all__ = [
    "SteepnessProfile",
    "SamplingConfig",
    "MeasureResult",
    "SteepnessRecord",
    "SteepnessReport",
    "steepness_measure",
    "random_orthogonal_frames",
    "check_steepness",
]

FrequencyMap = Callable[[np.ndarray], np.ndarray]

ORTHOGONALITY_TOL = 1e-8
GOLDEN = 0.5 * (np.sqrt(5.0) - 1.0)


@dataclass(frozen=True)
class SteepnessProfile:
    """Steepness indices ``alphas``, coefficients ``coeffs`` and radius ``delta``.

    ``delta`` also serves as the width of the complex extension in action
    space used by the Fourier norm and the Lipschitz bound.
    """

    n: int
    alphas: tuple[Fraction, ...]
    coeffs: tuple[Fraction, ...]
    delta: Fraction

    def __post_init__(self):
        alphas = tuple(as_fraction(a) for a in self.alphas)
        coeffs = tuple(as_fraction(c) for c in self.coeffs)
        delta = as_fraction(self.delta)
        if self.n < 3:
            raise ValueError("steepness profiles need n >= 3 degrees of freedom")
        if len(alphas) != self.n - 1 or len(coeffs) != self.n - 1:
            raise ValueError(f"expected {self.n - 1} indices and coefficients")
        if any(a < 1 for a in alphas):
            raise ValueError("steepness indices must be >= 1")
        if any(c <= 0 for c in coeffs):
            raise ValueError("steepness coefficients must be positive")
        if delta <= 0:
            raise ValueError("steepness radius must be positive")
        object.__setattr__(self, "alphas", alphas)
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "delta", delta)

    @classmethod
    def convex(cls, n: int, coeff=1, delta=1) -> "SteepnessProfile":
        return cls(n, (1,) * (n - 1), (coeff,) * (n - 1), delta)

    def required(self, j: int, xi: float) -> float:
        """Lower bound ``C_j xi**alpha_j`` demanded of the measure."""
        return float(self.coeffs[j - 1]) * float(xi) ** float(self.alphas[j - 1])

    def to_json(self) -> dict:
        def num(x: Fraction):
            return int(x) if x.denominator == 1 else float(x)

        return {
            "n": self.n,
            "alphas": [num(a) for a in self.alphas],
            "coeffs": [num(c) for c in self.coeffs],
            "delta": num(self.delta),
        }

    @classmethod
    def from_json(cls, data: dict) -> "SteepnessProfile":
        return cls(int(data["n"]), tuple(data["alphas"]), tuple(data["coeffs"]), data["delta"])


@dataclass(frozen=True)
class SamplingConfig:
    n_eta: int = 32
    multistarts: int = 8
    descent_tol: float = 1e-10
    frames: int = 16
    angle_scan: int = 64
    golden_iters: int = 60
    seed: int = 0
    rtol: float = 1e-9

    def __post_init__(self):
        if self.n_eta < 2 or self.multistarts < 1 or self.frames < 1 or self.angle_scan < 8:
            raise ValueError("sampling sizes too small")


@dataclass
class MeasureResult:
    value: float
    eta_argmax: float
    u_argmin: np.ndarray
    eta_grid: np.ndarray
    inner_min: np.ndarray
    status: str = "heuristic"


def _check_inputs(omega: FrequencyMap, I: np.ndarray, L: Subspace, xi: float, delta):
    w = np.asarray(omega(I), dtype=float)
    nw = np.linalg.norm(w)
    if nw == 0.0:
        raise ValueError("frequency vanishes at the sample point")
    if np.linalg.norm(L.project(w)) > ORTHOGONALITY_TOL * nw:
        raise ValueError("subspace is not orthogonal to omega(I)")
    if not xi > 0 or (delta is not None and xi > float(delta)):
        raise ValueError(f"xi={xi} outside (0, delta]")
    return nw


def _inner_min_1d(omega, I, q, etas, scale):
    # the sphere in a line is the two points +-eta
    pts = I + np.concatenate([etas, -etas])[:, None] * q[:, 0][None, :]
    vals = np.abs(omega(pts) @ q[:, 0]) / scale
    k = etas.size
    plus, minus = vals[:k], vals[k:]
    sign = np.where(minus < plus, -1.0, 1.0)
    best = np.minimum(plus, minus)
    u = (sign * etas)[:, None] * q[:, 0][None, :]
    return best, u


def _inner_min_2d(omega, I, q, etas, scale, cfg: SamplingConfig):
    m = cfg.angle_scan
    theta = np.arange(m) * (2.0 * np.pi / m)
    dirs = np.stack([np.cos(theta), np.sin(theta)], axis=1) @ q.T  # (m, n)

    def g(eta, th):
        d = np.cos(th)[..., None] * q[:, 0] + np.sin(th)[..., None] * q[:, 1]
        vals = omega(I + eta[..., None] * d) @ q
        return np.linalg.norm(vals, axis=-1) / scale

    pts = I + etas[:, None, None] * dirs[None, :, :]
    vals = np.linalg.norm(omega(pts) @ q, axis=-1) / scale  # (k, m)
    i0 = np.argmin(vals, axis=1)
    h = 2.0 * np.pi / m
    lo = theta[i0] - h
    hi = theta[i0] + h
    x1 = hi - GOLDEN * (hi - lo)
    x2 = lo + GOLDEN * (hi - lo)
    f1 = g(etas, x1)
    f2 = g(etas, x2)
    for _ in range(cfg.golden_iters):
        left = f1 <= f2
        hi = np.where(left, x2, hi)
        lo = np.where(left, lo, x1)
        nx1 = hi - GOLDEN * (hi - lo)
        nx2 = lo + GOLDEN * (hi - lo)
        x2n = np.where(left, x1, nx2)
        x1n = np.where(left, nx1, x2)
        fnew = g(etas, np.where(left, x1n, x2n))
        f1, f2 = np.where(left, fnew, f2), np.where(left, f1, fnew)
        x1, x2 = x1n, x2n
    th_ref = np.where(f1 <= f2, x1, x2)
    f_ref = np.minimum(f1, f2)
    scan_best = vals[np.arange(etas.size), i0]
    use_scan = scan_best < f_ref
    th = np.where(use_scan, theta[i0], th_ref)
    best = np.where(use_scan, scan_best, f_ref)
    u = etas[:, None] * (np.cos(th)[:, None] * q[:, 0] + np.sin(th)[:, None] * q[:, 1])
    return best, u


def _inner_min_nd(omega, I, q, etas, scale, cfg: SamplingConfig, rng):
    j = q.shape[1]
    starts = rng.standard_normal((cfg.multistarts, j))
    best = np.empty(etas.size)
    u = np.zeros((etas.size, q.shape[0]))
    for i, eta in enumerate(etas):
        if eta == 0.0:
            best[i] = np.linalg.norm(omega(I) @ q) / scale
            continue

        def obj(z, eta=eta):
            y = eta * z / np.linalg.norm(z)
            r = omega(I + q @ y) @ q / scale
            return float(r @ r)

        fb, zb = np.inf, starts[0]
        for z0 in starts:
            res = optimize.minimize(obj, z0, method="BFGS", options={"gtol": cfg.descent_tol})
            if res.fun < fb:
                fb, zb = res.fun, res.x
        best[i] = np.sqrt(fb)
        u[i] = q @ (eta * zb / np.linalg.norm(zb))
    return best, u


def steepness_measure(
    omega: FrequencyMap,
    I,
    L: Subspace,
    xi: float,
    sampling: SamplingConfig | None = None,
    delta=None,
    rng: np.random.Generator | None = None,
) -> MeasureResult:
    """Sampled max-min of ``|pi_L omega(I + u)|`` over ``|u| = eta <= xi``.

    ``omega`` must accept arrays of shape ``(..., n)``. The inner minimum is
    exact for one-dimensional ``L``, an angle scan refined by golden-section
    search for planes, and multistart BFGS on the sphere otherwise.
    """
    cfg = sampling or SamplingConfig()
    I = np.asarray(I, dtype=float)
    scale = _check_inputs(omega, I, L, float(xi), delta)
    q = np.asarray(L.orthonormal_basis)
    etas = np.linspace(0.0, float(xi), cfg.n_eta)
    if L.dim == 1:
        best, u = _inner_min_1d(omega, I, q, etas, scale)
    elif L.dim == 2:
        best, u = _inner_min_2d(omega, I, q, etas, scale, cfg)
    else:
        rng = rng if rng is not None else np.random.default_rng(cfg.seed)
        best, u = _inner_min_nd(omega, I, q, etas, scale, cfg, rng)
    best = best * scale
    k = int(np.argmax(best))
    return MeasureResult(float(best[k]), float(etas[k]), u[k], etas, best)


def random_orthogonal_frames(w, j: int, count: int, rng: np.random.Generator) -> list[Subspace]:
    """``count`` random j-dimensional subspaces orthogonal to ``w``.

    For ``j = n - 1`` the orthogonal complement is the only candidate.
    """
    w = np.asarray(w, dtype=float)
    perp = Subspace(w[None, :]).complement().orthonormal_basis
    if j == perp.shape[1]:
        return [Subspace(perp.T)]
    frames = []
    for _ in range(count):
        g = rng.standard_normal((perp.shape[1], j))
        qg, _ = np.linalg.qr(g)
        frames.append(Subspace((perp @ qg).T))
    return frames


@dataclass
class SteepnessRecord:
    point: list[float]
    j: int
    frame: list[list[float]]
    xi: float
    measured: float
    required: float
    margin: float
    eta_argmax: float
    u_argmin: list[float]
    eta_grid: list[float] = field(default_factory=list)

    def to_json(self) -> dict:
        return asdict(self)


@dataclass
class SteepnessReport:
    records: list[SteepnessRecord]
    verdict: str
    min_margin: float
    counterexample: SteepnessRecord | None
    status: str = "heuristic"

    @property
    def holds(self) -> bool:
        return self.verdict == "holds-on-samples"

    def to_json(self, include_records: bool = False) -> dict:
        out = {
            "verdict": self.verdict,
            "status": self.status,
            "min_margin": self.min_margin,
            "evaluations": len(self.records),
            "counterexample": self.counterexample.to_json() if self.counterexample else None,
        }
        if include_records:
            out["records"] = [r.to_json() for r in self.records]
        return out


def check_steepness(
    omega: FrequencyMap,
    profile: SteepnessProfile,
    domain_samples: Sequence,
    xi_grid: Sequence[float] | None = None,
    sampling: SamplingConfig | None = None,
    stop_at_first: bool = False,
) -> SteepnessReport:
    """Test the steepness inequality on sampled points, subspaces and radii.

    A record counts as a violation when its margin (measured over required)
    falls below ``1 - sampling.rtol``; the tolerance absorbs rounding in the
    exactly-steep quadratic case.
    """
    cfg = sampling or SamplingConfig()
    rng = np.random.default_rng(cfg.seed)
    delta = float(profile.delta)
    xis = list(xi_grid) if xi_grid is not None else [delta / 4, delta / 2, delta]
    records: list[SteepnessRecord] = []
    counter = None
    for I in domain_samples:
        I = np.asarray(I, dtype=float)
        if I.shape != (profile.n,):
            raise ValueError(f"sample {I} is not a {profile.n}-vector")
        w = np.asarray(omega(I), dtype=float)
        if np.linalg.norm(w) == 0.0:
            raise ValueError(f"frequency vanishes at sample {I.tolist()}")
        for j in range(1, profile.n):
            for L in random_orthogonal_frames(w, j, cfg.frames, rng):
                for xi in xis:
                    res = steepness_measure(omega, I, L, xi, cfg, delta=profile.delta, rng=rng)
                    req = profile.required(j, xi)
                    rec = SteepnessRecord(
                        point=I.tolist(),
                        j=j,
                        frame=L.orthonormal_basis.T.tolist(),
                        xi=float(xi),
                        measured=res.value,
                        required=req,
                        margin=res.value / req,
                        eta_argmax=res.eta_argmax,
                        u_argmin=res.u_argmin.tolist(),
                        eta_grid=res.eta_grid.tolist(),
                    )
                    records.append(rec)
                    if counter is None and rec.margin < 1.0 - cfg.rtol:
                        counter = rec
                        if stop_at_first:
                            return SteepnessReport(records, "counterexample", rec.margin, rec)
    min_margin = min((r.margin for r in records), default=float("inf"))
    verdict = "counterexample" if counter is not None else "holds-on-samples"
    return SteepnessReport(records, verdict, min_margin, counter)
