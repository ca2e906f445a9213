"""K-means over document embeddings.

The reported quantities are the within-cluster sums of squared Euclidean
distances to the centroid (one per cluster) and their total, which is
the objective the Lloyd iterations minimize.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from litclust.base import BaseEstimator, check_positive_int, check_vectors
from litclust.errors import ConfigError, EmptyCluster, KTooLarge

MAX_ITER = 300
# Documented bounds for the cluster count.
K_BOUNDS = (2, 20)
# Candidate draws per k-means++ center (greedy variant); 1 recovers the
# plain sampling rule.
INIT_CANDIDATES = 3


@dataclass(frozen=True, eq=False)
class Clustering:
    """Result of one k-means run (the best restart)."""

    k: int
    assignments: np.ndarray
    centroids: np.ndarray
    variabilities: np.ndarray
    dissimilarity: float
    iterations: int
    restarts_used: int
    objective_trace: tuple[float, ...]
    empty_clusters: tuple[int, ...] = ()


def variability(points) -> float:
    """Sum of squared Euclidean distances of the points from their mean."""
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim == 1:
        pts = pts.reshape(-1, 1)
    if pts.shape[0] == 0:
        raise EmptyCluster("variability of an empty point set is undefined")
    center = pts.mean(axis=0)
    return float(np.sum((pts - center) ** 2))


def dissimilarity(per_cluster_points) -> float:
    """Sum of the variabilities of a group of clusters."""
    return float(sum(variability(p) for p in per_cluster_points))


def kmeans(
    vectors,
    k: int,
    seed: int = 0,
    restarts: int = 1,
    max_iter: int = MAX_ITER,
    init_candidates: int = INIT_CANDIDATES,
) -> Clustering:
    """Lloyd's algorithm with k-means++ seeding, best of ``restarts`` runs.

    Deterministic for fixed (seed, restarts): restart ``i`` draws from an
    rng derived from (seed, i), so adding restarts never changes the
    earlier runs, and the minimum-dissimilarity result (ties to the
    earliest restart) is returned.
    """
    x = check_vectors(vectors, "vectors")
    check_positive_int(k, "k")
    check_positive_int(restarts, "restarts")
    check_positive_int(init_candidates, "init_candidates")
    n = x.shape[0]
    if k > n:
        raise KTooLarge(f"k={k} exceeds the number of points {n}")

    # Seeding happens against a canonically ordered copy of the points so
    # the chosen centers are a function of the point VALUES, never of the
    # input order; that is what makes the output permutation-invariant.
    canon = x[np.lexsort(x.T)]

    best: Clustering | None = None
    for restart in range(restarts):
        rng = np.random.default_rng([seed, restart])
        result = _lloyd(x, canon, k, rng, max_iter, restart_index=restart,
                        init_candidates=init_candidates)
        if best is None or result.dissimilarity < best.dissimilarity:
            best = result
    assert best is not None
    return Clustering(
        k=best.k,
        assignments=best.assignments,
        centroids=best.centroids,
        variabilities=best.variabilities,
        dissimilarity=best.dissimilarity,
        iterations=best.iterations,
        restarts_used=restarts,
        objective_trace=best.objective_trace,
        empty_clusters=best.empty_clusters,
    )


def _lloyd(
    x: np.ndarray,
    canon: np.ndarray,
    k: int,
    rng,
    max_iter: int,
    restart_index: int,
    init_candidates: int = INIT_CANDIDATES,
) -> Clustering:
    centers = _kmeanspp(canon, k, rng, init_candidates)
    labels = np.full(x.shape[0], -1, dtype=np.int64)
    trace: list[float] = []

    for iteration in range(1, max_iter + 1):
        new_labels = np.argmin(_sq_dists(x, centers), axis=1)
        new_labels = _repair_empty(x, new_labels, k)
        centers = _means(x, new_labels, k, fallback=centers)
        obj = float(np.sum((x - centers[new_labels]) ** 2))
        trace.append(obj)
        converged = bool(np.array_equal(new_labels, labels))
        labels = new_labels
        if converged:
            break

    # Lloyd's objective can never go up between iterations; tolerate only
    # float accumulation noise.
    diffs = np.diff(trace)
    assert np.all(diffs <= 1e-9 * (1.0 + trace[0])), "objective increased during Lloyd iterations"

    sizes = np.bincount(labels, minlength=k)
    empty = tuple(int(c) for c in np.flatnonzero(sizes == 0))
    variabilities = np.zeros(k)
    for c in range(k):
        members = x[labels == c]
        if len(members):
            variabilities[c] = np.sum((members - members.mean(axis=0)) ** 2)
    return Clustering(
        k=k,
        assignments=labels,
        centroids=centers,
        variabilities=variabilities,
        dissimilarity=float(variabilities.sum()),
        iterations=len(trace),
        restarts_used=restart_index + 1,
        objective_trace=tuple(trace),
        empty_clusters=empty,
    )


def _kmeanspp(x: np.ndarray, k: int, rng, n_candidates: int = INIT_CANDIDATES) -> np.ndarray:
    """k-means++ seeding, greedy variant.

    Each new center is the best of ``n_candidates`` draws made with
    probability proportional to squared distance from the nearest chosen
    center ("best" = smallest resulting potential).  One candidate is
    the plain k-means++ rule.
    """
    n = x.shape[0]
    chosen = np.empty(k, dtype=np.int64)
    chosen[0] = rng.integers(n)
    d2 = np.sum((x - x[chosen[0]]) ** 2, axis=1)
    for i in range(1, k):
        total = d2.sum()
        if total > 0:
            candidates = rng.choice(n, size=n_candidates, p=d2 / total)
            idx = -1
            best_d2 = None
            for cand in candidates:
                cand_d2 = np.minimum(d2, np.sum((x - x[cand]) ** 2, axis=1))
                if best_d2 is None or cand_d2.sum() < best_d2.sum():
                    idx, best_d2 = int(cand), cand_d2
            d2 = best_d2
        else:
            # All remaining mass is on duplicates of chosen centers; take
            # the first index not yet used to keep k centers distinct.
            used = set(chosen[:i].tolist())
            idx = next(j for j in range(n) if j not in used)
            d2 = np.minimum(d2, np.sum((x - x[idx]) ** 2, axis=1))
        chosen[i] = idx
    return x[chosen].copy()


def _sq_dists(x: np.ndarray, centers: np.ndarray) -> np.ndarray:
    d2 = (
        np.sum(x**2, axis=1)[:, None]
        - 2.0 * (x @ centers.T)
        + np.sum(centers**2, axis=1)[None, :]
    )
    np.maximum(d2, 0.0, out=d2)
    return d2


def _repair_empty(x: np.ndarray, labels: np.ndarray, k: int) -> np.ndarray:
    """Move the farthest point of the largest cluster into each empty one.

    Keeps k fixed.  If the largest cluster has a single member there is
    nothing left to split and the remaining empties are left flagged.
    """
    labels = labels.copy()
    while True:
        sizes = np.bincount(labels, minlength=k)
        empties = np.flatnonzero(sizes == 0)
        if len(empties) == 0:
            return labels
        largest = int(np.argmax(sizes))
        if sizes[largest] <= 1:
            return labels
        members = np.flatnonzero(labels == largest)
        centroid = x[members].mean(axis=0)
        farthest = members[int(np.argmax(np.sum((x[members] - centroid) ** 2, axis=1)))]
        labels[farthest] = empties[0]


def _means(x: np.ndarray, labels: np.ndarray, k: int, fallback: np.ndarray) -> np.ndarray:
    centers = fallback.copy()
    for c in range(k):
        members = x[labels == c]
        if len(members):
            centers[c] = members.mean(axis=0)
    return centers


class KMeans(BaseEstimator):
    """Estimator facade over :func:`kmeans` with predict for new points."""

    def __init__(
        self,
        k: int = 4,
        seed: int = 0,
        restarts: int = 4,
        max_iter: int = MAX_ITER,
        init_candidates: int = INIT_CANDIDATES,
    ):
        self.k = k
        self.seed = seed
        self.restarts = restarts
        self.max_iter = max_iter
        self.init_candidates = init_candidates

    def fit(self, x, y=None) -> "KMeans":
        self.clustering_ = kmeans(
            x,
            self.k,
            seed=self.seed,
            restarts=self.restarts,
            max_iter=self.max_iter,
            init_candidates=self.init_candidates,
        )
        self.labels_ = self.clustering_.assignments
        self.centroids_ = self.clustering_.centroids
        self.dissimilarity_ = self.clustering_.dissimilarity
        return self

    def predict(self, x) -> np.ndarray:
        if not hasattr(self, "clustering_"):
            raise ConfigError("KMeans is not fitted; call fit first")
        pts = check_vectors(x, "x")
        return np.argmin(_sq_dists(pts, self.centroids_), axis=1)

    def fit_predict(self, x, y=None) -> np.ndarray:
        return self.fit(x).labels_


def dump_assignments(clustering: Clustering, docs, path: str | Path) -> None:
    """TSV dump: doc id, cluster index."""
    with Path(path).open("w", encoding="utf-8") as fh:
        for doc_id, label in zip(docs, clustering.assignments):
            fh.write(f"{doc_id}\t{int(label)}\n")


def load_assignments(path: str | Path) -> dict[str, int]:
    out: dict[str, int] = {}
    with Path(path).open("r", encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            doc_id, label = line.split("\t")
            out[doc_id] = int(label)
    return out


def run_metadata(clustering: Clustering, seed: int) -> str:
    """JSON blob describing a clustering run."""
    return json.dumps(
        {
            "k": clustering.k,
            "seed": seed,
            "restarts": clustering.restarts_used,
            "dissimilarity": clustering.dissimilarity,
            "iterations": clustering.iterations,
            "empty_clusters": list(clustering.empty_clusters),
        },
        sort_keys=True,
        indent=2,
    )
