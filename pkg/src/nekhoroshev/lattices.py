"""Maximal K-lattices over Z^n.

A lattice here is a sublattice of Z^n stored through its row Hermite normal
form (pivots positive, entries above each pivot reduced into ``[0, pivot)``),
which is unique per lattice, so two bases describe the same lattice iff their
canonical forms coincide.

A *maximal K-lattice* of dimension j is saturated (it contains every integer
point of its real span) and is generated by integer vectors of l1-norm at most
K. All normal-form work uses Python integers, so it is exact.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "BudgetExceededError",
    "Lattice",
    "DEFAULT_VECTOR_BUDGET",
    "DEFAULT_SPAN_BUDGET",
    "hermite_normal_form",
    "integer_kernel",
    "lattice_volume",
    "gram_determinant",
    "saturate",
    "is_maximal_k_lattice",
    "l1_ball",
    "primitive_vectors",
    "enumerate_maximal_lattices",
    "all_maximal_lattices",
]

DEFAULT_VECTOR_BUDGET = 50_000
DEFAULT_SPAN_BUDGET = 200_000

IntMatrix = list[list[int]]


class BudgetExceededError(RuntimeError):
    """Exhaustive enumeration would exceed the configured budget."""

    def __init__(self, what: str, count: int, budget: int):
        super().__init__(f"{what}: {count} candidates exceeds budget {budget}")
        self.what = what
        self.count = count
        self.budget = budget


def _as_int_rows(vectors) -> IntMatrix:
    rows = [[int(x) for x in v] for v in vectors]
    if not rows:
        raise ValueError("empty basis")
    n = len(rows[0])
    if n == 0 or any(len(r) != n for r in rows):
        raise ValueError("basis rows must share a positive length")
    for r, v in zip(rows, vectors):
        if any(float(a) != b for a, b in zip(v, r)):
            raise ValueError("basis entries must be integers")
    return rows


def hermite_normal_form(rows: Sequence[Sequence[int]]) -> IntMatrix:
    """Row-style Hermite normal form of the lattice generated by ``rows``.

    Zero rows are dropped; the result has one row per rank.
    """
    a = [list(map(int, r)) for r in rows]
    if not a:
        return []
    m, n = len(a), len(a[0])
    r = 0
    for c in range(n):
        if r == m:
            break
        # Euclid on column c among rows r..m-1
        while True:
            nz = [i for i in range(r, m) if a[i][c] != 0]
            if not nz:
                break
            piv = min(nz, key=lambda i: abs(a[i][c]))
            a[r], a[piv] = a[piv], a[r]
            done = True
            for i in range(r + 1, m):
                if a[i][c]:
                    q = a[i][c] // a[r][c]
                    a[i] = [x - q * y for x, y in zip(a[i], a[r])]
                    if a[i][c]:
                        done = False
            if done:
                break
        if a[r][c] == 0:
            continue
        if a[r][c] < 0:
            a[r] = [-x for x in a[r]]
        p = a[r][c]
        for i in range(r):
            q = a[i][c] // p
            if q:
                a[i] = [x - q * y for x, y in zip(a[i], a[r])]
        r += 1
    return [row for row in a[:r]]


def integer_kernel(rows: Sequence[Sequence[int]], n: int | None = None) -> IntMatrix:
    """Basis (as rows) of the integer vectors x with ``rows @ x == 0``.

    Column operations reduce ``B`` to ``[H | 0]`` while tracking a unimodular
    ``U``; the trailing columns of ``U`` generate the kernel, which is
    therefore saturated.
    """
    b = [list(map(int, r)) for r in rows]
    if n is None:
        n = len(b[0])
    u = [[int(i == j) for j in range(n)] for i in range(n)]

    def colop(target: int, src: int, q: int) -> None:
        # column target -= q * column src
        for row in b:
            row[target] -= q * row[src]
        for row in u:
            row[target] -= q * row[src]

    def swap(c1: int, c2: int) -> None:
        for row in b:
            row[c1], row[c2] = row[c2], row[c1]
        for row in u:
            row[c1], row[c2] = row[c2], row[c1]

    col = 0
    for row in b:
        if col == n:
            break
        while True:
            nz = [c for c in range(col, n) if row[c] != 0]
            if not nz:
                break
            piv = min(nz, key=lambda c: abs(row[c]))
            swap(col, piv)
            done = True
            for c in range(col + 1, n):
                if row[c]:
                    colop(c, col, row[c] // row[col])
                    if row[c]:
                        done = False
            if done:
                break
        if row[col] != 0:
            col += 1
    return [[u[i][c] for i in range(n)] for c in range(col, n)]


def _bareiss_det(m: IntMatrix) -> int:
    a = [row[:] for row in m]
    size = len(a)
    if size == 0:
        return 1
    sign = 1
    prev = 1
    for k in range(size - 1):
        if a[k][k] == 0:
            swap = next((i for i in range(k + 1, size) if a[i][k] != 0), None)
            if swap is None:
                return 0
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        for i in range(k + 1, size):
            for j in range(k + 1, size):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[-1][-1]


def gram_determinant(rows: Sequence[Sequence[int]]) -> int:
    b = [list(map(int, r)) for r in rows]
    gram = [[sum(x * y for x, y in zip(r1, r2)) for r2 in b] for r1 in b]
    return _bareiss_det(gram)


def lattice_volume(basis) -> float:
    """Euclidean volume sqrt(det(B B^T)) of the parallelepiped spanned by ``basis``."""
    g = gram_determinant(_as_int_rows(basis))
    if g <= 0:
        raise ValueError("basis is rank deficient")
    return math.sqrt(g)


@dataclass(frozen=True)
class Lattice:
    """Sublattice of Z^n in canonical (row Hermite normal form) shape."""

    basis: tuple[tuple[int, ...], ...]
    k_bound: int | None = field(default=None, compare=False)

    def __post_init__(self):
        if not self.basis:
            raise ValueError("lattice needs at least one basis vector")

    @classmethod
    def from_basis(cls, vectors, k_bound: int | None = None) -> "Lattice":
        rows = _as_int_rows(vectors)
        h = hermite_normal_form(rows)
        if len(h) != len(rows):
            raise ValueError("basis is rank deficient")
        return cls(tuple(tuple(r) for r in h), k_bound)

    @property
    def ambient_dim(self) -> int:
        return len(self.basis[0])

    @property
    def dim(self) -> int:
        return len(self.basis)

    @cached_property
    def gram_det(self) -> int:
        return gram_determinant(self.basis)

    @cached_property
    def volume(self) -> float:
        return math.sqrt(self.gram_det)

    @cached_property
    def normals(self) -> IntMatrix:
        """Integer basis of the orthogonal complement of the span."""
        return integer_kernel(self.basis, self.ambient_dim)

    @cached_property
    def orthonormal_basis(self) -> np.ndarray:
        q, _ = np.linalg.qr(np.array(self.basis, dtype=float).T)
        return q

    def in_span(self, k: Sequence[int]) -> bool:
        return all(sum(a * b for a, b in zip(nu, k)) == 0 for nu in self.normals)

    def is_saturated(self) -> bool:
        return saturate(self.basis).basis == self.basis

    @property
    def label(self) -> str:
        return ";".join(",".join(str(x) for x in row) for row in self.basis)

    def to_json(self) -> dict:
        return {
            "dim": self.dim,
            "basis": [list(r) for r in self.basis],
            "volume": self.volume,
            "k_bound": self.k_bound,
        }

    @classmethod
    def from_json(cls, data: dict) -> "Lattice":
        return cls.from_basis(data["basis"], data.get("k_bound"))


def saturate(basis, k_bound: int | None = None) -> Lattice:
    """The lattice of all integer points in the rational span of ``basis``."""
    rows = _as_int_rows(basis)
    n = len(rows[0])
    if len(hermite_normal_form(rows)) != len(rows):
        raise ValueError("basis is rank deficient")
    normals = integer_kernel(rows, n)
    if not normals:
        sat = [[int(i == j) for j in range(n)] for i in range(n)]
    else:
        sat = integer_kernel(normals, n)
    return Lattice(tuple(tuple(r) for r in hermite_normal_form(sat)), k_bound)


def l1_ball(n: int, K: int) -> Iterable[tuple[int, ...]]:
    """All nonzero integer vectors with l1-norm at most K."""
    if n == 1:
        for x in range(-K, K + 1):
            if x:
                yield (x,)
        return
    for first in range(-K, K + 1):
        rest = K - abs(first)
        if first == 0:
            yield from ((0,) + v for v in l1_ball(n - 1, rest))
        else:
            yield (first,) + (0,) * (n - 1)
            yield from ((first,) + v for v in l1_ball(n - 1, rest))


def l1_ball_size(n: int, K: int) -> int:
    """Number of nonzero integer points with l1-norm <= K (Delannoy-type count)."""
    total = sum(2 ** i * math.comb(n, i) * math.comb(K, i) for i in range(min(n, K) + 1))
    return total - 1


def _sign_normalized(v: tuple[int, ...]) -> bool:
    for x in v:
        if x:
            return x > 0
    return False


def primitive_vectors(n: int, K: int, budget: int = DEFAULT_VECTOR_BUDGET) -> list[tuple[int, ...]]:
    """Primitive integer vectors with l1-norm <= K, one per +- pair."""
    count = l1_ball_size(n, K)
    if count > budget:
        raise BudgetExceededError("l1-ball vectors", count, budget)
    out = [v for v in l1_ball(n, K) if _sign_normalized(v) and math.gcd(*v) == 1]
    out.sort(key=lambda v: (sum(map(abs, v)), tuple(-x for x in v)))
    return out


def is_maximal_k_lattice(L: Lattice, K: int, budget: int = DEFAULT_VECTOR_BUDGET) -> bool:
    """Saturated and generated by its own vectors of l1-norm <= K."""
    if not L.is_saturated():
        return False
    count = l1_ball_size(L.ambient_dim, K)
    if count > budget:
        raise BudgetExceededError("l1-ball vectors", count, budget)
    small = [v for v in l1_ball(L.ambient_dim, K) if L.in_span(v)]
    if not small:
        return False
    gen = hermite_normal_form(small)
    return len(gen) == L.dim and tuple(tuple(r) for r in gen) == L.basis


def _spans(n: int, K: int, j: int, vectors, span_budget: int) -> dict:
    """Saturated lattices of all rational spans of j vectors from ``vectors``."""
    level = {}
    for v in vectors:
        L = Lattice((v,), K)
        level[L.basis] = L
    work = 0
    for _ in range(j - 1):
        nxt = {}
        for L in level.values():
            for v in vectors:
                if L.in_span(v):
                    continue
                work += 1
                if work > span_budget:
                    raise BudgetExceededError("span extensions", work, span_budget)
                S = saturate(L.basis + (v,), K)
                nxt.setdefault(S.basis, S)
        level = nxt
    return level


def enumerate_maximal_lattices(
    n: int,
    K: int,
    j: int,
    budget: int = DEFAULT_VECTOR_BUDGET,
    span_budget: int = DEFAULT_SPAN_BUDGET,
) -> list[Lattice]:
    """All distinct maximal K-lattices of dimension j in Z^n.

    Spans of j primitive K-vectors are grown one vector at a time and
    identified by their saturation; a span contributes a lattice only if its
    K-vectors generate the whole saturated lattice.
    """
    if not 1 <= j <= n - 1:
        raise ValueError(f"lattice dimension must lie in [1, {n - 1}], got {j}")
    if K < 1:
        raise ValueError("K must be a positive integer")
    vectors = primitive_vectors(n, K, budget)
    spans = _spans(n, K, j, vectors, span_budget)
    out = []
    for L in spans.values():
        members = [v for v in vectors if L.in_span(v)]
        gen = hermite_normal_form(members)
        if tuple(tuple(r) for r in gen) == L.basis:
            out.append(L)
    out.sort(key=lambda L: (L.gram_det, L.basis))
    return out


def all_maximal_lattices(n: int, K: int, **kw) -> dict[int, list[Lattice]]:
    return {j: enumerate_maximal_lattices(n, K, j, **kw) for j in range(1, n)}
