"""Neighbor retrieval: table distance, cosine distance, top-k lists and k-means prototypes."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import CorpusTooSmall, DimensionMismatch, ZeroNorm

VALUE_WEIGHT = 0.1
OFFSET = 1.1


@dataclass(frozen=True)
class TableSource:
    """A source record: ``(field name, value token ids)`` pairs in table order.

    Raw-text sources are held as a single field named ``text``.
    """

    values: tuple[tuple[str, tuple[int, ...]], ...] = ()

    def __post_init__(self):
        vals = tuple((str(name), tuple(int(t) for t in toks)) for name, toks in self.values)
        if any(not name for name, _ in vals):
            raise ValueError("field names must be non-empty")
        object.__setattr__(self, "values", vals)

    @property
    def fields(self) -> tuple[str, ...]:
        seen = dict.fromkeys(name for name, _ in self.values)
        return tuple(seen)

    def unigrams(self) -> set[int]:
        out = set()
        for _, toks in self.values:
            out.update(toks)
        return out

    def segments(self) -> list[tuple[int, ...]]:
        """Linearized value token runs; matches never cross a field boundary."""
        return [toks for _, toks in self.values if toks]


def f1(a: set, b: set) -> float:
    """Set F1; two empty sets score 1, one empty set scores 0."""
    if not a and not b:
        return 1.0
    if not a or not b:
        return 0.0
    return 2 * len(a & b) / (len(a) + len(b))


def table_distance(a: TableSource, b: TableSource, offset: float = OFFSET,
                   value_weight: float = VALUE_WEIGHT) -> float:
    field_f1 = f1(set(a.fields), set(b.fields))
    value_f1 = f1(a.unigrams(), b.unigrams())
    # offset - F1_fields - w * F1_values, arranged so identical tables give exactly 0
    return (offset - (1.0 + value_weight)) + (1.0 - field_f1) + value_weight * (1.0 - value_f1)


def cosine_distance(u, v) -> float:
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise DimensionMismatch(f"dimensions differ: {u.shape} vs {v.shape}")
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0 or nv == 0:
        raise ZeroNorm("cosine distance undefined for a zero vector")
    return float(np.clip(1.0 - float(u @ v) / (nu * nv), 0.0, 2.0))


def _rank(row: Sequence[float], query: int, k: int) -> list[tuple[int, float]]:
    order = sorted((d, idx) for idx, d in enumerate(row) if idx != query)
    return [(idx, float(d)) for d, idx in order[:k]]


def cosine_matrix(vectors) -> np.ndarray:
    X = np.asarray(vectors, dtype=np.float64)
    if X.ndim != 2:
        raise DimensionMismatch("embeddings must all have the same dimension")
    norms = np.linalg.norm(X, axis=1)
    if np.any(norms == 0):
        raise ZeroNorm(f"zero-norm embedding at index {int(np.argmin(norms))}")
    U = X / norms[:, None]
    return np.clip(1.0 - U @ U.T, 0.0, 2.0)


def top_k_neighbors(items: Sequence, k: int, metric: str | Callable = "table") -> list[list[tuple[int, float]]]:
    """For each item, the ``k`` closest other items as ``(index, distance)``.

    Sorted by distance, ties by ascending index; an item is never its own
    neighbor, though exact duplicates of it are.
    """
    n = len(items)
    if k < 1:
        raise ValueError("k must be at least 1")
    if n < k + 1:
        raise CorpusTooSmall(f"need at least {k + 1} examples for k={k}, have {n}")
    if metric == "cosine":
        D = cosine_matrix(items)
        return [_rank(D[q], q, k) for q in range(n)]
    dist = table_distance if metric == "table" else metric
    if not callable(dist):
        raise ValueError(f"unknown metric {metric!r}")
    rows = [[0.0] * n for _ in range(n)]
    for q in range(n):
        for r in range(q + 1, n):
            rows[q][r] = rows[r][q] = dist(items[q], items[r])
    return [_rank(rows[q], q, k) for q in range(n)]


@dataclass
class KMeansResult:
    centroids: np.ndarray
    assignment: np.ndarray
    objective: list[float] = field(default_factory=list)


def _assign(X, centroids):
    d2 = ((X[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
    return d2.argmin(axis=1), d2


def _seed_centroids(X, K, rng, init):
    n = len(X)
    if init == "random":
        return X[rng.choice(n, size=K, replace=False)].copy()
    if init != "k-means++":
        raise ValueError(f"unknown init {init!r}")
    chosen = [int(rng.integers(n))]
    d2 = ((X - X[chosen[0]]) ** 2).sum(axis=1)
    for _ in range(1, K):
        total = d2.sum()
        if total == 0:
            rest = [i for i in range(n) if i not in chosen]
            nxt = int(rng.choice(rest))
        else:
            nxt = int(rng.choice(n, p=d2 / total))
        chosen.append(nxt)
        d2 = np.minimum(d2, ((X - X[nxt]) ** 2).sum(axis=1))
    return X[chosen].copy()


def kmeans(vectors, K: int, iters: int, seed: int, init: str = "k-means++") -> KMeansResult:
    """Lloyd iterations from ``K`` seeded data points.

    ``init="k-means++"`` draws each further start point with probability
    proportional to its squared distance from the points already drawn;
    ``init="random"`` draws ``K`` distinct points uniformly.
    """
    X = np.asarray(vectors, dtype=np.float64)
    n = len(X)
    if not 1 <= K <= n:
        raise ValueError(f"K must be in 1..{n}")
    if iters < 1:
        raise ValueError("iters must be at least 1")
    rng = np.random.default_rng(seed)
    centroids = _seed_centroids(X, K, rng, init)
    objective = []
    assign, d2 = _assign(X, centroids)
    objective.append(float(d2[np.arange(n), assign].sum()))
    for _ in range(iters):
        new = centroids.copy()
        for c in range(K):
            members = X[assign == c]
            if len(members):
                new[c] = members.mean(axis=0)
            else:
                # empty cluster: jump to the point farthest from where it was
                far = ((X - centroids[c]) ** 2).sum(axis=1).argmax()
                new[c] = X[far]
        centroids = new
        new_assign, d2 = _assign(X, centroids)
        objective.append(float(d2[np.arange(n), new_assign].sum()))
        if np.array_equal(new_assign, assign):
            assign = new_assign
            break
        assign = new_assign
    return KMeansResult(centroids, assign, objective)


def kmeans_prototypes(vectors, K: int, iters: int, seed: int, init: str = "k-means++") -> list[int]:
    """Index of the data vector nearest each final centroid."""
    X = np.asarray(vectors, dtype=np.float64)
    result = kmeans(X, K, iters, seed, init=init)
    d2 = ((X[:, None, :] - result.centroids[None, :, :]) ** 2).sum(axis=2)
    return [int(i) for i in d2.argmin(axis=0)]
