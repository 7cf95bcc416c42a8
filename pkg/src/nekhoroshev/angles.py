"""Angles between vectors and linear subspaces of R^n.

The angle between two subspaces used here is the *asymmetric* one

    L1 <) L2 = max over u in L1 \\ {0} of  u <) pi_{L2} u,

so that ``subspace_angle(L1, L2)`` equals the largest principal angle only
when ``dim L1 <= dim L2``; if ``dim L1 > dim L2`` some vector of ``L1`` is
orthogonal to ``L2`` and the angle is pi/2.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

__all__ = [
    "RANK_RTOL",
    "Subspace",
    "vector_angle",
    "project",
    "subspace_angle",
]

RANK_RTOL = 1e-10
HALF_PI = 0.5 * np.pi


def _orthonormal_columns(vectors: np.ndarray, rtol: float = RANK_RTOL) -> np.ndarray:
    """Orthonormal basis (as columns) of the row span of ``vectors``."""
    v = np.atleast_2d(vectors)
    # rescale rows so tiny entries do not underflow when squared; the span is unchanged
    peak = np.max(np.abs(v), axis=1, keepdims=True)
    v = v / np.where(peak == 0.0, 1.0, peak)
    u, s, _ = np.linalg.svd(v.T, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return u[:, :0]
    rank = int(np.sum(s > rtol * s[0]))
    return u[:, :rank]


@dataclass(frozen=True, eq=False)
class Subspace:
    """Linear subspace of R^n given by a spanning set (rows of ``basis``)."""

    basis: np.ndarray
    ambient_dim: int = field(init=False)

    def __post_init__(self):
        b = np.atleast_2d(np.asarray(self.basis, dtype=float))
        if b.ndim != 2 or b.shape[1] == 0:
            raise ValueError("basis must be a non-empty list of n-vectors")
        if not np.all(np.any(b != 0.0, axis=1)):
            raise ValueError("basis vectors must be nonzero")
        b.setflags(write=False)
        object.__setattr__(self, "basis", b)
        object.__setattr__(self, "ambient_dim", b.shape[1])
        if self.orthonormal_basis.shape[1] == 0:
            raise ValueError("basis spans the zero subspace")

    @classmethod
    def full(cls, n: int) -> "Subspace":
        return cls(np.eye(n))

    @cached_property
    def orthonormal_basis(self) -> np.ndarray:
        """n x m array whose columns are an orthonormal basis."""
        q = _orthonormal_columns(self.basis)
        q.setflags(write=False)
        return q

    @property
    def dim(self) -> int:
        return self.orthonormal_basis.shape[1]

    @cached_property
    def projector(self) -> np.ndarray:
        q = self.orthonormal_basis
        return q @ q.T

    def project(self, v) -> np.ndarray:
        q = self.orthonormal_basis
        return (np.asarray(v, dtype=float) @ q) @ q.T

    def complement(self) -> "Subspace":
        """Orthogonal complement; raises if the subspace is all of R^n."""
        n = self.ambient_dim
        if self.dim == n:
            raise ValueError("orthogonal complement of R^n is the zero subspace")
        u, _, _ = np.linalg.svd(self.orthonormal_basis, full_matrices=True)
        return Subspace(u[:, self.dim:].T)

    def contains(self, v, atol: float = 1e-10) -> bool:
        v = np.asarray(v, dtype=float)
        return bool(np.linalg.norm(v - self.project(v)) <= atol * max(1.0, np.linalg.norm(v)))


def vector_angle(u, v) -> float:
    """Angle in [0, pi] between two vectors; pi/2 if either vanishes.

    Evaluated with the half-angle form ``2 atan2(|a - b|, |a + b|)`` on the
    normalised vectors, which equals ``arccos(u.v / |u||v|)`` but stays
    accurate for nearly parallel or anti-parallel pairs.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        return HALF_PI
    a = u / nu
    b = v / nv
    return float(2.0 * np.arctan2(np.linalg.norm(a - b), np.linalg.norm(a + b)))


def project(L: Subspace, v) -> np.ndarray:
    """Orthogonal projection of ``v`` onto ``L``."""
    return L.project(v)


def subspace_angle(L1: Subspace, L2: Subspace) -> float:
    """Angle ``L1 <) L2`` in [0, pi/2].

    The cosine is the smallest singular value of the projection of an
    orthonormal ``L1`` basis onto ``L2`` (zero when ``dim L1 > dim L2``);
    the sine is the largest singular value of the residual. Returns exactly
    pi/2 whenever the cosine is below ``RANK_RTOL``.
    """
    if L1.ambient_dim != L2.ambient_dim:
        raise ValueError("subspaces live in different ambient spaces")
    q1 = L1.orthonormal_basis
    q2 = L2.orthonormal_basis
    cross = q2.T @ q1
    sv = np.linalg.svd(cross, compute_uv=False)
    cos_min = 0.0 if q1.shape[1] > q2.shape[1] else float(np.min(sv))
    if cos_min < RANK_RTOL:
        return HALF_PI
    residual = q1 - q2 @ cross
    sin_max = float(np.linalg.svd(residual, compute_uv=False)[0])
    return float(np.arctan2(sin_max, min(cos_min, 1.0)))
