"""Resonant zones, blocks and fast-drift discs over a ball of actions.

For a maximal K-lattice ``L`` of dimension j the resonant zone is the set of
actions with ``|pi_L omega(I)| < delta_L``; the block of ``L`` is its zone
minus every zone of higher dimension, and the nonresonant block collects the
points outside all zones. Fast-drift discs are connected components, inside
a zone, of the ``rho_L``-neighbourhood of the affine plane ``I + span(L)``.

Everything is sampled: zones are thin slabs, so block points are found on
*slab grids* aligned with each lattice, and connected components are grid
flood fills. The verification routines report what they measured together
with the sampling density, never a proof.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

from .constants import EpsilonScales, enumeration_cutoff, lattice_scales
from .lattices import DEFAULT_VECTOR_BUDGET, Lattice, all_maximal_lattices
from .model import HamiltonianModel

__all__ = [
    "Atlas",
    "BlockLabel",
    "Classification",
    "DiscSample",
    "build_atlas",
    "zone_membership",
    "in_zone",
    "slab_samples",
    "block_samples",
    "extended_block",
    "slice_grid",
    "fast_drift_disc",
    "verify_diameter_lemma",
    "verify_small_divisors",
    "verify_nonoverlap",
    "coverage_check",
    "naive_divisor_scan",
]


# Projections within this relative distance of a zone boundary, or of zero,
# count as inside: ties at rounding level resolve toward resonant.
TIE_RTOL = 1e-14


def in_zone(proj_norm, delta, omega_norm):
    """Strict zone test ``|pi_L omega| < delta`` with rounding-level ties counted inside."""
    return proj_norm < delta * (1 + TIE_RTOL) + TIE_RTOL * omega_norm


@dataclass
class BlockLabel:
    """Block of an action point: ``dim`` 0 means the nonresonant block."""

    dim: int
    lattices: list[Lattice]
    zone_memberships: list[tuple[str, float, float]] = field(default_factory=list)

    @property
    def kind(self) -> str:
        return "nonresonant" if self.dim == 0 else "resonant"

    @property
    def lattice(self) -> Lattice | None:
        return self.lattices[0] if len(self.lattices) == 1 else None

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "dim": self.dim,
            "lattices": [L.label for L in self.lattices],
            "zone_memberships": [
                {"lattice": lab, "proj_norm": pn, "delta_L": d} for lab, pn, d in self.zone_memberships
            ],
        }


@dataclass
class Classification:
    """Vectorized labels: ``inside[p, i]`` is zone membership of point p in lattice i."""

    points: np.ndarray
    jstar: np.ndarray
    inside: np.ndarray
    ratio: np.ndarray

    def members_at_jstar(self, dims: np.ndarray) -> np.ndarray:
        """Per point, the number of zones of the point's own block dimension containing it."""
        same = dims[None, :] == self.jstar[:, None]
        return np.sum(self.inside & same, axis=1)


class Atlas:
    """Lattices, their scales and the action ball ``D = B(I0, r)`` at one cutoff."""

    def __init__(
        self,
        model: HamiltonianModel,
        scales: EpsilonScales,
        lattices: Sequence[Lattice],
        K: int,
        center=None,
    ):
        self.model = model
        self.scales = scales
        self.n = model.n
        self.K = K
        self.lattices = list(lattices)
        self.center = np.array(model.domain.center if center is None else center, dtype=float)
        self.r = float(scales.r)
        self.m = float(scales.m)
        self.lambda1 = float(scales.lam[0])
        dist = np.linalg.norm(self.center - np.array(model.domain.center))
        self.warnings: list[str] = []
        if dist + self.r > model.domain.radius:
            msg = f"B(I0, r={self.r:.3g}) is not contained in the model domain"
            warnings.warn(msg, stacklevel=2)
            self.warnings.append(msg)
        self.index = {L.basis: i for i, L in enumerate(self.lattices)}
        self.dims = np.array([L.dim for L in self.lattices], dtype=int)
        self.lscales = [lattice_scales(scales, L) for L in self.lattices]
        self.delta_L = np.array([float(s.delta_L) for s in self.lscales])
        self.rho_L = np.array([float(s.rho_L) for s in self.lscales])
        self.alpha_L = np.array([float(s.alpha_L) for s in self.lscales])
        self.d_L = np.array([float(s.d_L) for s in self.lscales])
        nl = len(self.lattices)
        self.Q = np.zeros((nl, self.n, self.n - 1))
        for i, L in enumerate(self.lattices):
            self.Q[i, :, : L.dim] = L.orthonormal_basis

    # -- classification ------------------------------------------------------

    def proj_norms(self, omega: np.ndarray) -> np.ndarray:
        """``|pi_L omega|`` for every point (rows) and lattice (columns)."""
        return np.linalg.norm(np.einsum("pn,lnj->plj", omega, self.Q), axis=-1)

    def classify(self, points) -> Classification:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        w = self.model.frequency(pts)
        pn = self.proj_norms(w)
        ratio = pn / self.delta_L
        inside = in_zone(pn, self.delta_L, np.linalg.norm(w, axis=-1)[:, None])
        jstar = np.zeros(len(pts), dtype=int)
        for j in range(self.n - 1, 0, -1):
            hit = np.any(inside[:, self.dims == j], axis=1) & (jstar == 0)
            jstar[hit] = j
        return Classification(pts, jstar, inside, ratio)

    def classify_point(self, I) -> BlockLabel:
        c = self.classify(np.asarray(I, dtype=float)[None, :])
        j = int(c.jstar[0])
        lats = [L for i, L in enumerate(self.lattices) if c.inside[0, i] and L.dim == j] if j else []
        memberships = [
            (L.label, float(c.ratio[0, i] * self.delta_L[i]), float(self.delta_L[i]))
            for i, L in enumerate(self.lattices)
        ]
        return BlockLabel(j, lats, memberships)

    def in_block(self, points, L: Lattice) -> np.ndarray:
        c = self.classify(points)
        i = self.index[L.basis]
        return c.inside[:, i] & (c.jstar == L.dim)

    def in_core(self, points) -> np.ndarray:
        """Membership of ``D - m`` (the ball of radius ``r - m``)."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return np.linalg.norm(pts - self.center, axis=-1) < self.r - self.m

    def in_domain(self, points) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return np.linalg.norm(pts - self.center, axis=-1) < self.r

    def min_divisors(self, points) -> tuple[np.ndarray, np.ndarray]:
        """Smallest ``|k.omega|`` over ``0 < |k|_1 <= K`` and the k attaining it."""
        ks = _l1_vectors(self.n, self.K)
        vals = np.abs(self.model.frequency(np.atleast_2d(points)) @ ks.T)
        i = np.argmin(vals, axis=1)
        return vals[np.arange(len(i)), i], ks[i]

    def lattice(self, basis) -> Lattice:
        L = Lattice.from_basis(basis)
        if L.basis not in self.index:
            raise KeyError(f"{L.label} is not a maximal {self.K}-lattice of this atlas")
        return self.lattices[self.index[L.basis]]


def build_atlas(
    model: HamiltonianModel,
    scales: EpsilonScales,
    K_cap: int = 5,
    budget: int = DEFAULT_VECTOR_BUDGET,
    center=None,
) -> Atlas:
    """Enumerate every maximal lattice at the scales' cutoff (clamped to ``K_cap``)."""
    K = enumeration_cutoff(scales, K_cap)
    by_dim = all_maximal_lattices(model.n, K, budget=budget)
    lattices = [L for j in sorted(by_dim) for L in by_dim[j]]
    return Atlas(model, scales, lattices, K, center)


def zone_membership(I, L: Lattice, delta_L: float, model: HamiltonianModel) -> bool:
    w = model.frequency(np.asarray(I, dtype=float))
    return bool(in_zone(np.linalg.norm(L.orthonormal_basis.T @ w), float(delta_L), np.linalg.norm(w)))


def _l1_vectors(n: int, K: int) -> np.ndarray:
    rng = range(-K, K + 1)
    return np.array([k for k in itertools.product(rng, repeat=n) if 0 < sum(map(abs, k)) <= K], dtype=float)


# -- sampling ------------------------------------------------------------------


def _complement(Q: np.ndarray) -> np.ndarray:
    u, _, _ = np.linalg.svd(Q, full_matrices=True)
    return u[:, Q.shape[1]:]


def _newton_on_resonance(atlas: Atlas, p: np.ndarray, Q: np.ndarray, iters: int = 30):
    """Solve ``Q^T omega(p + Q u) = 0`` for u, row-wise; NaN rows did not converge."""
    h = atlas.model.h
    u = np.zeros((len(p), Q.shape[1]))
    for _ in range(iters):
        z = p + u @ Q.T
        g = atlas.model.frequency(z) @ Q
        J = np.einsum("ni,pnm,mj->pij", Q, h.hessian(z), Q)
        step = np.linalg.solve(J, g[..., None])[..., 0]
        u = u - step
        if np.all(np.abs(step) <= 1e-15 * (1 + np.abs(u))):
            break
    z = p + u @ Q.T
    res = np.linalg.norm(atlas.model.frequency(z) @ Q, axis=-1)
    ok = np.isfinite(res) & (res < 1e-12 * (1 + np.linalg.norm(atlas.model.frequency(z), axis=-1)))
    J = np.einsum("ni,pnm,mj->pij", Q, h.hessian(z), Q)
    sig = np.linalg.svd(J, compute_uv=False)[:, -1]
    return z, ok, sig


def slab_samples(atlas: Atlas, L: Lattice, coarse: int = 64, fine: int = 64, spread: float = 1.5) -> np.ndarray:
    """Grid points near the resonance ``pi_L omega = 0`` inside ``D - m``.

    A ``coarse``-per-axis grid across ``span(L)``'s complement is pushed onto
    the resonance by Newton's method along ``span(L)``; around each root a
    ``fine``-per-axis grid spans ``spread * delta_L / s`` along ``span(L)``,
    where ``s`` is the smallest singular value of the projected Hessian. For
    n = 3 either dimension gives ``64**3`` candidates with the defaults.
    """
    i = atlas.index[L.basis]
    Q = L.orthonormal_basis
    P = _complement(Q)
    R = atlas.r - atlas.m
    axis = np.linspace(-R, R, coarse)
    c = np.array(list(itertools.product(axis, repeat=P.shape[1])))
    c = c[np.linalg.norm(c, axis=1) < R]
    p = atlas.center + c @ P.T
    z, ok, sig = _newton_on_resonance(atlas, p, Q)
    z, sig = z[ok], sig[ok]
    keep = atlas.in_core(z) & (sig > 0)
    z, sig = z[keep], sig[keep]
    if len(z) == 0:
        return np.zeros((0, atlas.n))
    offs = np.linspace(-1.0, 1.0, fine)
    grid = np.array(list(itertools.product(offs, repeat=Q.shape[1])))  # (F, j)
    half = spread * atlas.delta_L[i] / sig  # (Z,)
    pts = z[:, None, :] + half[:, None, None] * (grid @ Q.T)[None, :, :]
    pts = pts.reshape(-1, atlas.n)
    return pts[atlas.in_core(pts)]


def block_samples(atlas: Atlas, L: Lattice, **kw) -> np.ndarray:
    """Slab samples lying in the block of ``L`` and in ``D - m``."""
    pts = slab_samples(atlas, L, **kw)
    if len(pts) == 0:
        return pts
    return pts[atlas.in_block(pts, L)]


# -- discs ---------------------------------------------------------------------


@dataclass
class DiscSample:
    anchor: np.ndarray
    lattice: Lattice
    grid_step: float
    members: np.ndarray  # (N, n) action points
    indices: np.ndarray  # (N, n) integer grid coordinates in the (span L, complement) frame
    frame: np.ndarray  # n x n, columns: span(L) basis then complement basis
    truncated: bool = False

    def points_of(self, idx: np.ndarray) -> np.ndarray:
        return self.anchor + self.grid_step * (idx @ self.frame.T)

    def dilation(self) -> np.ndarray:
        """Grid points within one face step of the disc (members included)."""
        n = self.indices.shape[1]
        steps = np.concatenate([np.zeros((1, n), int), np.eye(n, dtype=int), -np.eye(n, dtype=int)])
        idx = (self.indices[:, None, :] + steps[None, :, :]).reshape(-1, n)
        idx = np.unique(idx, axis=0)
        return self.points_of(idx)

    @property
    def diameter_from_anchor(self) -> float:
        return float(np.max(np.linalg.norm(self.members - self.anchor, axis=1)))


def _disc_predicate(atlas: Atlas, i: int, anchor: np.ndarray, frame: np.ndarray, j: int, h: float):
    Q = atlas.Q[i, :, :j]

    def pred(idx: np.ndarray) -> np.ndarray:
        pts = anchor + h * (idx @ frame.T)
        w = h * np.linalg.norm(idx[:, j:], axis=1)
        om = atlas.model.frequency(pts)
        zone = in_zone(np.linalg.norm(om @ Q, axis=1), atlas.delta_L[i], np.linalg.norm(om, axis=1))
        return (w < atlas.rho_L[i]) & zone & atlas.in_core(pts)

    return pred


def _flood_fill(pred, n: int, max_nodes: int) -> tuple[np.ndarray, bool]:
    """Face-connected component of ``pred`` containing the origin of Z^n."""
    steps = np.concatenate([np.eye(n, dtype=np.int64), -np.eye(n, dtype=np.int64)])
    origin = np.zeros((1, n), dtype=np.int64)
    seen = {tuple(origin[0])}
    members = [origin]
    frontier = origin
    total = 1
    truncated = False
    while len(frontier):
        cand = (frontier[:, None, :] + steps[None, :, :]).reshape(-1, n)
        cand = np.unique(cand, axis=0)
        fresh = [c for c in map(tuple, cand) if c not in seen]
        if not fresh:
            break
        seen.update(fresh)
        cand = np.array(fresh, dtype=np.int64)
        ok = pred(cand)
        frontier = cand[ok]
        members.append(frontier)
        total += len(frontier)
        if total > max_nodes:
            truncated = True
            break
    return np.concatenate(members), truncated


def fast_drift_disc(
    atlas: Atlas,
    anchor,
    L: Lattice,
    grid_step: float | None = None,
    max_nodes: int = 200_000,
) -> DiscSample:
    """Grid flood fill of the fast-drift disc of ``L`` through ``anchor``.

    Raises ``ValueError`` if the anchor is not in the block of ``L`` inside
    ``D - m`` or if the step exceeds ``rho_L / 4``.
    """
    anchor = np.asarray(anchor, dtype=float)
    i = atlas.index[L.basis]
    rho = atlas.rho_L[i]
    h = rho / 4 if grid_step is None else float(grid_step)
    if not 0 < h <= rho / 4 * (1 + 1e-12):
        raise ValueError(f"grid step {h:.3g} must lie in (0, rho_L/4 = {rho / 4:.3g}]")
    if not (atlas.in_block(anchor[None, :], L)[0] and atlas.in_core(anchor[None, :])[0]):
        raise ValueError("anchor is not in the block of the lattice inside D - m")
    j = L.dim
    Q = atlas.Q[i, :, :j]
    frame = np.concatenate([Q, _complement(Q)], axis=1)
    pred = _disc_predicate(atlas, i, anchor, frame, j, h)
    idx, truncated = _flood_fill(pred, atlas.n, max_nodes)
    members = anchor + h * (idx @ frame.T)
    return DiscSample(anchor, L, h, members, idx, frame, truncated)


# -- lemma checks ----------------------------------------------------------------


def verify_diameter_lemma(atlas: Atlas, disc: DiscSample) -> dict:
    """Compare the disc's reach from its anchor with ``l_j (delta_L / C_j)^(1/alpha_j)`` and ``r_j``."""
    i = atlas.index[disc.lattice.basis]
    j = disc.lattice.dim
    prof = atlas.scales.consts.profile
    lj = float(atlas.scales.consts.l[j - 1])
    bound = lj * (atlas.delta_L[i] / float(prof.coeffs[j - 1])) ** (1.0 / float(prof.alphas[j - 1]))
    r_j = float(atlas.scales.r_drift[j - 1])
    measured = disc.diameter_from_anchor
    ok = (measured + disc.grid_step <= bound) and bound <= r_j * (1 + 1e-12) and not disc.truncated
    return {
        "lattice": disc.lattice.label,
        "measured": measured,
        "honesty_band": disc.grid_step,
        "bound": bound,
        "r_j": r_j,
        "members": int(len(disc.members)),
        "truncated": disc.truncated,
        "status": "pass" if ok else "fail",
    }


@lru_cache(maxsize=256)
def _naive_candidates(n: int, K: int, exclude_basis) -> np.ndarray:
    """All k with ``0 < |k|_1 <= K`` outside the span of ``exclude_basis``.

    Deliberately simple: a plain loop over the cube with an exact rank test
    by rational elimination, independent of the lattice module.
    """
    B = [list(map(int, v)) for v in exclude_basis] if exclude_basis is not None else []
    out = []
    for k in itertools.product(range(-K, K + 1), repeat=n):
        s = sum(abs(x) for x in k)
        if s == 0 or s > K:
            continue
        if B and _rank(B + [list(k)]) == len(B):
            continue
        out.append(k)
    return np.array(out, dtype=float).reshape(-1, n)


def naive_divisor_scan(omega, K: int, exclude_basis=None) -> tuple[np.ndarray, np.ndarray]:
    """Smallest ``|k.omega|`` per row of ``omega`` over ``0 < |k|_1 <= K``, k outside the excluded span."""
    w = np.atleast_2d(np.asarray(omega, dtype=float))
    key = tuple(tuple(int(x) for x in v) for v in exclude_basis) if exclude_basis is not None else None
    ks = _naive_candidates(w.shape[1], int(K), key)
    if len(ks) == 0:
        return np.full(len(w), np.inf), np.zeros((len(w), w.shape[1]))
    vals = np.abs(w @ ks.T)
    i = np.argmin(vals, axis=1)
    return vals[np.arange(len(w)), i], ks[i]


def _rank(rows: list[list[int]]) -> int:
    m = [[Fraction(x) for x in r] for r in rows]
    rank, ncol = 0, len(m[0])
    for c in range(ncol):
        piv = next((i for i in range(rank, len(m)) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        for i in range(len(m)):
            if i != rank and m[i][c] != 0:
                f = m[i][c] / m[rank][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[rank])]
        rank += 1
    return rank


def verify_small_divisors(
    points, lattice: Lattice | None, K: int, floor: float, model: HamiltonianModel
) -> dict:
    """Check ``|k.omega(I)| >= floor`` for all ``k`` outside ``lattice`` with ``|k|_1 <= K``."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    basis = lattice.basis if lattice is not None else None
    if len(pts) == 0:
        d, k = np.zeros(0), np.zeros((0, model.n))
    else:
        d, k = naive_divisor_scan(model.frequency(pts), K, basis)
    violations = int(np.sum(d < floor))
    i = int(np.argmin(d)) if len(d) else None
    return {
        "lattice": lattice.label if lattice is not None else None,
        "points": int(len(pts)),
        "floor": float(floor),
        "min_divisor": float(d[i]) if i is not None else float("inf"),
        "argmin_k": [int(x) for x in k[i]] if i is not None else None,
        "min_ratio": float(d[i] / floor) if i is not None else float("inf"),
        "violations": violations,
        "status": "pass" if violations == 0 else "fail",
    }


def _disc_anchors(atlas: Atlas, L: Lattice, block: np.ndarray, max_anchors: int) -> np.ndarray:
    if len(block) <= max_anchors:
        return block
    sel = np.linspace(0, len(block) - 1, max_anchors).round().astype(int)
    return block[sel]


def extended_block(atlas: Atlas, L: Lattice, block: np.ndarray | None = None, max_anchors: int = 64, **kw):
    """Sampled extended block of ``L``: union of discs through block anchors.

    For ``dim L = n - 1`` the extended block is the block inside ``D - m``
    itself. Returns (member points, dilated closure points, discs).
    """
    if block is None:
        block = block_samples(atlas, L, **kw)
    if L.dim == atlas.n - 1 or len(block) == 0:
        return block, block, []
    discs = [fast_drift_disc(atlas, a, L) for a in _disc_anchors(atlas, L, block, max_anchors)]
    members = np.concatenate([block] + [d.members for d in discs])
    closure = np.concatenate([block] + [d.dilation() for d in discs])
    return members, closure, discs


def verify_nonoverlap(
    atlas: Atlas,
    L1: Lattice,
    rivals: Sequence[Lattice] | None = None,
    closure: np.ndarray | None = None,
    **kw,
) -> dict:
    """No point of the (dilated) extended block of ``L1`` may lie in a rival zone.

    Rivals default to every other lattice of the same dimension; the minimal
    ``|pi omega| / delta`` ratio over rivals is reported and must be >= 1.
    """
    if rivals is None:
        rivals = [L for L in atlas.lattices if L.dim == L1.dim and L.basis != L1.basis]
    for L2 in rivals:
        if L2.basis == L1.basis:
            raise ValueError("a lattice cannot be its own rival")
        if L2.dim != L1.dim:
            raise ValueError("rivals must have the same dimension")
    if closure is None:
        _, closure, _ = extended_block(atlas, L1, **kw)
    out = {"lattice": L1.label, "samples": int(len(closure)), "rivals": len(rivals), "min_ratio": float("inf")}
    if len(closure) and rivals:
        idx = [atlas.index[L.basis] for L in rivals]
        w = atlas.model.frequency(closure)
        pn = np.linalg.norm(np.einsum("pn,lnj->plj", w, atlas.Q[idx]), axis=-1)
        ratio = pn / atlas.delta_L[idx]
        hit = in_zone(pn, atlas.delta_L[idx], np.linalg.norm(w, axis=-1)[:, None])
        k = np.unravel_index(np.argmin(ratio), ratio.shape)
        out["min_ratio"] = float(ratio[k])
        out["closest_rival"] = rivals[k[1]].label
        out["violations"] = int(np.sum(hit))
    else:
        out["violations"] = 0
    out["status"] = "pass" if out["violations"] == 0 else "fail"
    return out


def slice_grid(atlas: Atlas, e1, e2, size: int = 64) -> tuple[np.ndarray, np.ndarray]:
    """``size x size`` grid on the plane through the center spanned by ``e1, e2``.

    Offsets are ``(i - size/2) * r / (size/2)``, so the center is a grid point.
    Returns (points inside D, (s, t) coordinates of those points).
    """
    e1 = np.asarray(e1, float) / np.linalg.norm(e1)
    e2 = np.asarray(e2, float)
    e2 = e2 - (e2 @ e1) * e1
    e2 /= np.linalg.norm(e2)
    half = size // 2
    ticks = (np.arange(size) - half) * (atlas.r / half)
    st = np.array(list(itertools.product(ticks, ticks)))
    pts = atlas.center + st[:, :1] * e1 + st[:, 1:] * e2
    keep = atlas.in_domain(pts)
    return pts[keep], st[keep]


def coverage_check(atlas: Atlas, points: np.ndarray) -> dict:
    """Label every point and count same-dimension zone overlaps inside ``D - m``."""
    c = atlas.classify(points)
    core = atlas.in_core(points)
    multi = c.members_at_jstar(atlas.dims)
    dup = (multi > 1) & core & (c.jstar > 0)
    mind, argk = atlas.min_divisors(points)
    rows = []
    for p, j, inside, d in zip(c.points, c.jstar, c.inside, mind):
        lab = ";".join(
            "[" + L.label + "]" for L, ok in zip(atlas.lattices, inside) if ok and L.dim == j
        ) if j else ""
        rows.append((p, int(j), lab, float(d)))
    counts = {int(j): int(np.sum(c.jstar == j)) for j in range(atlas.n)}
    return {
        "points": int(len(points)),
        "labelled": int(len(rows)),
        "coverage": len(rows) / max(1, len(points)),
        "counts_by_dim": counts,
        "uniqueness_violations": int(np.sum(dup)),
        "status": "pass" if not np.any(dup) and len(rows) == len(points) else "fail",
        "rows": rows,
    }
