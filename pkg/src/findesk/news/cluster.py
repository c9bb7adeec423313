"""Seeded Lloyd k-means over sparse tf-idf vectors and the
largest-cluster representative-selection rule."""
from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Mapping, Sequence

from ..market_data import NewsArticle
from .cleaning import CleanArticle
from .vectorize import cosine, vectorize

MAX_ITERS = 100
SHIFT_TOL = 1e-9

Vector = Mapping[str, float]


@dataclass(frozen=True)
class KMeansResult:
    assignments: tuple[int, ...]
    centroids: tuple[dict, ...]
    objective_history: tuple[float, ...]  # sum of squared distances per iteration


def _sqdist(a: Vector, b: Vector) -> float:
    d = 0.0
    for term, w in a.items():
        d += (w - b.get(term, 0.0)) ** 2
    for term, w in b.items():
        if term not in a:
            d += w * w
    return d


def _mean(vectors: Sequence[Vector]) -> dict:
    out: dict[str, float] = {}
    for v in vectors:
        for term, w in v.items():
            out[term] = out.get(term, 0.0) + w
    n = len(vectors)
    return {term: w / n for term, w in out.items()}


def _init_plus_plus(points: Sequence[Vector], k: int, rng: random.Random) -> list[dict]:
    centroids = [dict(points[rng.randrange(len(points))])]
    while len(centroids) < k:
        d2 = [min(_sqdist(p, c) for c in centroids) for p in points]
        total = sum(d2)
        if total == 0.0:
            centroids.append(dict(points[rng.randrange(len(points))]))
            continue
        r = rng.random() * total
        acc = 0.0
        for i, d in enumerate(d2):
            acc += d
            if acc >= r:
                centroids.append(dict(points[i]))
                break
        else:
            centroids.append(dict(points[-1]))
    return centroids


def kmeans(points: Sequence[Vector], k: int, seed: int) -> KMeansResult:
    if k < 1:
        raise ValueError("k must be >= 1")
    k = min(k, len(points))
    rng = random.Random(seed)
    centroids = _init_plus_plus(points, k, rng)
    history: list[float] = []
    assignments = [0] * len(points)
    for _ in range(MAX_ITERS):
        objective = 0.0
        for i, p in enumerate(points):
            dists = [_sqdist(p, c) for c in centroids]
            best = min(range(k), key=lambda j: dists[j])
            assignments[i] = best
            objective += dists[best]
        history.append(objective)
        shift = 0.0
        new_centroids = []
        for j in range(k):
            members = [points[i] for i in range(len(points)) if assignments[i] == j]
            nc = _mean(members) if members else centroids[j]
            shift = max(shift, _sqdist(nc, centroids[j]))
            new_centroids.append(nc)
        centroids = new_centroids
        if shift < SHIFT_TOL:
            break
    return KMeansResult(assignments=tuple(assignments),
                        centroids=tuple(centroids),
                        objective_history=tuple(history))


def select_representative(articles: Sequence[CleanArticle | NewsArticle],
                          k: int = 2, seed: int = 0):
    """Pick the article nearest (cosine) to the centroid of the largest
    cluster; ties break to earliest file order."""
    if not articles:
        raise ValueError("need at least one article")
    if len(articles) == 1:
        return articles[0]
    texts = [a.cleaned_text if isinstance(a, CleanArticle) else a.text for a in articles]
    vectors = vectorize(texts)
    result = kmeans([v.weights for v in vectors], k=k, seed=seed)
    counts = [0] * (max(result.assignments) + 1)
    for a in result.assignments:
        counts[a] += 1
    # largest cluster; ties to the lower cluster index
    target = max(range(len(counts)), key=lambda j: (counts[j], -j))
    centroid = result.centroids[target]
    best_i, best_sim = None, float("-inf")
    for v in vectors:
        if result.assignments[v.article_id] != target:
            continue
        sim = cosine(v.weights, centroid)
        if sim > best_sim:
            best_i, best_sim = v.article_id, sim
    return articles[best_i]
