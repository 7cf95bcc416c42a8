"""Verification suites shared by the command line and the acceptance tests.

Each suite returns a JSON-ready dict with a ``status`` of ``"pass"`` or
``"fail"`` and the sampling density it used.
"""

from __future__ import annotations

import time
import warnings
from typing import Sequence

import numpy as np

from .atlas import (
    Atlas,
    _disc_anchors,
    fast_drift_disc,
    block_samples,
    build_atlas,
    coverage_check,
    extended_block,
    slice_grid,
    verify_diameter_lemma,
    verify_nonoverlap,
    verify_small_divisors,
)
from .constants import (
    ConstantSet,
    RelationReport,
    enumeration_cutoff,
    epsilon_scales,
    scaled_geometry,
    verify_parameter_relations,
)
from .lattices import DEFAULT_VECTOR_BUDGET, all_maximal_lattices
from .model import HamiltonianModel
from .numeric import mpf

__all__ = [
    "default_eps_grid",
    "relation_suite",
    "lemma_atlas",
    "small_divisor_suite",
    "nonoverlap_suite",
    "diameter_suite",
    "coverage_suite",
    "REFERENCE_LEMMA_CENTERS",
]

# Extra ball centres inside the reference domain. The reference centre sits on
# the (1,1,1) double resonance; these two add a simple resonance (I1 = 2 I2)
# and a second double resonance (I1 = I3 = 2 I2).
REFERENCE_LEMMA_CENTERS = ((1.0, 0.5, 0.9), (1.0, 0.5, 1.0))


def default_eps_grid(consts: ConstantSet, count: int = 10) -> list:
    """``eps* 2^-k`` for ``k = 1..count``, descending."""
    return [consts.eps_star / mpf(2) ** k for k in range(1, count + 1)]


def relation_suite(
    consts: ConstantSet,
    eps_values: Sequence | None = None,
    K_cap: int = 5,
    budget: int = DEFAULT_VECTOR_BUDGET,
) -> dict:
    """Compatibility relations at each ``eps`` over every enumerable maximal lattice."""
    eps_values = default_eps_grid(consts) if eps_values is None else list(eps_values)
    cache: dict[int, list] = {}
    rows, reports = [], []
    t0 = time.perf_counter()
    for eps in eps_values:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            scales = epsilon_scales(consts, eps)
        K = enumeration_cutoff(scales, K_cap)
        if K not in cache:
            by_dim = all_maximal_lattices(consts.profile.n, K, budget=budget)
            cache[K] = [L for j in sorted(by_dim) for L in by_dim[j]]
        rep: RelationReport = verify_parameter_relations(scales, cache[K])
        reports.append(rep)
        slack = rep.min_slack()
        rows.append({
            "eps": scales.eps,
            "K": scales.K,
            "enumeration_K": K,
            "lattices": len(cache[K]),
            "checks": len(rep.records),
            "failures": len(rep.failures),
            "min_slack": slack,
            "status": "pass" if rep.passed else "fail",
        })
    return {
        "suite": "relations",
        "rows": rows,
        "reports": reports,
        "failures": sum(r["failures"] for r in rows),
        "seconds": time.perf_counter() - t0,
        "status": "pass" if all(r["status"] == "pass" for r in rows) else "fail",
    }


def lemma_atlas(model: HamiltonianModel, consts: ConstantSet, K: int, center=None) -> Atlas:
    """Atlas in scaled-geometry mode at integer cutoff ``K``.

    The scaled scales are checked against the relation suite first; the
    report is attached as ``atlas.relations``.
    """
    scales = scaled_geometry(consts, K)
    atlas = build_atlas(model, scales, K_cap=int(K), center=center)
    atlas.relations = verify_parameter_relations(scales, atlas.lattices)
    return atlas


def _uniform_ball(rng: np.random.Generator, center: np.ndarray, radius: float, count: int) -> np.ndarray:
    g = rng.standard_normal((count, len(center)))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    rad = radius * rng.random(count) ** (1.0 / len(center))
    return center + g * rad[:, None]


def small_divisor_suite(
    atlas: Atlas,
    n_points: int = 1000,
    seed: int = 0,
    slab: tuple[int, int] = (24, 24),
    max_anchors: int = 8,
) -> dict:
    """Small-divisor floors on block, extended-block and nonresonant samples.

    The budget is split evenly between the three kinds of points and, within
    a kind, between the lattices that have samples. Divisors are recomputed
    by an independent brute-force scan.
    """
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    share = n_points // 3
    records = []

    blocks = {}
    for L in atlas.lattices:
        pts = block_samples(atlas, L, coarse=slab[0], fine=slab[1])
        if len(pts):
            blocks[L.basis] = pts
    lats = [atlas.lattice(b) for b in blocks]

    per = max(1, share // max(1, len(lats)))
    for L in lats:
        pts = blocks[L.basis]
        pick = pts[rng.choice(len(pts), size=min(per, len(pts)), replace=False)]
        i = atlas.index[L.basis]
        rec = verify_small_divisors(pick, L, atlas.K, atlas.alpha_L[i], atlas.model)
        records.append({"kind": "block", **rec})

    ext = [L for L in lats if L.dim <= atlas.n - 2]
    per = max(1, share // max(1, len(ext)))
    for L in ext:
        members, _, discs = extended_block(atlas, L, block=blocks[L.basis], max_anchors=max_anchors)
        pick = members[rng.choice(len(members), size=min(per, len(members)), replace=False)]
        i = atlas.index[L.basis]
        rec = verify_small_divisors(pick, L, atlas.K, atlas.alpha_L[i] / 2, atlas.model)
        records.append({"kind": "extended-block", **rec})

    # nonresonant points: rejection sampling in D, topped up until the share is met
    need = n_points - sum(r["points"] for r in records)
    found = np.zeros((0, atlas.n))
    for _ in range(50):
        if len(found) >= need:
            break
        cand = _uniform_ball(rng, atlas.center, atlas.r, 4 * need)
        cand = cand[atlas.classify(cand).jstar == 0]
        found = np.concatenate([found, cand])
    found = found[:need]
    rec = verify_small_divisors(found, None, atlas.K, atlas.lambda1, atlas.model)
    records.append({"kind": "nonresonant", **rec})

    total = sum(r["points"] for r in records)
    violations = sum(r["violations"] for r in records)
    return {
        "suite": "small-divisors",
        "K": atlas.K,
        "center": atlas.center.tolist(),
        "points": total,
        "violations": violations,
        "records": records,
        "seconds": time.perf_counter() - t0,
        "status": "pass" if violations == 0 else "fail",
    }


def nonoverlap_suite(
    atlas: Atlas,
    slab: tuple[int, int] = (64, 64),
    max_anchors: int = 64,
) -> dict:
    """Every same-dimension pair: extended-block closure against rival zones."""
    t0 = time.perf_counter()
    records = []
    for L in atlas.lattices:
        block = block_samples(atlas, L, coarse=slab[0], fine=slab[1])
        if len(block) == 0:
            continue
        _, closure, discs = extended_block(atlas, L, block=block, max_anchors=max_anchors)
        rec = verify_nonoverlap(atlas, L, closure=closure)
        rec["block_samples"] = int(len(block))
        rec["discs"] = len(discs)
        records.append(rec)
    pairs = sum(r["rivals"] for r in records)
    violations = sum(r["violations"] for r in records)
    empty = sum(1 for L in atlas.lattices) - len(records)
    return {
        "suite": "non-overlap",
        "K": atlas.K,
        "center": atlas.center.tolist(),
        "slab_grid": list(slab),
        "lattices_with_blocks": len(records),
        "lattices_without_blocks": empty,
        "pairs": pairs,
        "violations": violations,
        "min_ratio": min((r["min_ratio"] for r in records), default=float("inf")),
        "records": records,
        "seconds": time.perf_counter() - t0,
        "status": "pass" if violations == 0 else "fail",
    }


def diameter_suite(
    atlas: Atlas,
    slab: tuple[int, int] = (24, 24),
    discs_per_lattice: int = 8,
) -> dict:
    """Fast-drift disc reach against the diameter bound for every lattice with a block."""
    t0 = time.perf_counter()
    records = []
    for L in atlas.lattices:
        block = block_samples(atlas, L, coarse=slab[0], fine=slab[1])
        if len(block) == 0:
            continue
        discs = [fast_drift_disc(atlas, a, L) for a in _disc_anchors(atlas, L, block, discs_per_lattice)]
        records.extend(verify_diameter_lemma(atlas, d) for d in discs)
    fails = sum(r["status"] == "fail" for r in records)
    return {
        "suite": "diameter",
        "K": atlas.K,
        "center": atlas.center.tolist(),
        "discs": len(records),
        "violations": fails,
        "max_fill": max((r["measured"] + r["honesty_band"]) / r["bound"] for r in records) if records else 0.0,
        "records": records,
        "seconds": time.perf_counter() - t0,
        "status": "pass" if fails == 0 and records else "fail",
    }


def coverage_suite(atlas: Atlas, e1=(1.0, 1.0, 1.0), e2=(1.0, -1.0, 0.0), size: int = 64) -> dict:
    """Label every point of a ``size x size`` slice through the centre."""
    t0 = time.perf_counter()
    pts, _ = slice_grid(atlas, e1, e2, size)
    rep = coverage_check(atlas, pts)
    rows = rep.pop("rows")
    rep.update({
        "suite": "coverage",
        "K": atlas.K,
        "center": atlas.center.tolist(),
        "grid": [size, size],
        "seconds": time.perf_counter() - t0,
    })
    rep["rows"] = rows
    return rep

