"""Truncated SVD document embeddings.

Documents are embedded as the document-side singular vectors scaled by
the singular values, so Euclidean distances between embedding rows
approximate distances between the weighted matrix's document columns,
which is what the downstream clustering objective measures.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import sparse

from litclust.base import BaseEstimator, check_positive_int
from litclust.errors import ConfigError, ConvergenceFailure, DimsTooLarge
from litclust.vectorize import WeightedMatrix

# Below this size an exact dense SVD is cheaper and unconditionally stable.
DENSE_CUTOFF = 64
OVERSAMPLE = 8
MIN_POWER_ITERS = 4
MAX_POWER_ITERS = 200
SV_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class EmbeddingMatrix:
    """Dense documents-by-dims coordinates plus the singular spectrum."""

    docs: tuple[str, ...]
    dims: int
    vectors: np.ndarray
    singular_values: np.ndarray


def reduce(w: WeightedMatrix, n_dims: int, seed: int = 0) -> EmbeddingMatrix:
    """Embed documents in ``n_dims`` dimensions via truncated SVD.

    Deterministic for a fixed seed; the sign of each singular vector is
    fixed by making its largest-magnitude coordinate positive.
    """
    check_positive_int(n_dims, "n_dims")
    n_terms, n_docs = w.shape
    bound = min(n_terms, n_docs)
    if n_dims > bound:
        raise DimsTooLarge(
            f"n_dims={n_dims} exceeds min(terms, docs)={bound} for this matrix"
        )
    _, s, vt = truncated_svd(w.weights, n_dims, seed=seed)
    vectors = vt.T * s  # row j = document j scaled by the singular values
    return EmbeddingMatrix(
        docs=w.docs,
        dims=n_dims,
        vectors=np.ascontiguousarray(vectors),
        singular_values=s,
    )


def truncated_svd(
    a, k: int, seed: int = 0
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Top-``k`` singular triplets of a sparse or dense matrix.

    Small problems go through an exact dense SVD; larger ones use seeded
    randomized subspace iteration with power steps repeated until the
    leading singular values stabilize.
    """
    m, n = a.shape
    if k > min(m, n):
        raise DimsTooLarge(f"k={k} exceeds min(shape)={min(m, n)}")
    if min(m, n) <= DENSE_CUTOFF or k + OVERSAMPLE >= min(m, n):
        dense = a.toarray() if sparse.issparse(a) else np.asarray(a, dtype=np.float64)
        u, s, vt = np.linalg.svd(dense, full_matrices=False)
        return _fix_signs(u[:, :k], s[:k].copy(), vt[:k].copy())
    return _randomized_svd(a, k, seed)


def _randomized_svd(a, k: int, seed: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    m, n = a.shape
    width = min(k + OVERSAMPLE, min(m, n))
    rng = np.random.default_rng(seed)
    q, _ = np.linalg.qr(a @ rng.standard_normal((n, width)))

    prev: np.ndarray | None = None
    for iteration in range(1, MAX_POWER_ITERS + 1):
        q, _ = np.linalg.qr(a.T @ q)
        q, _ = np.linalg.qr(a @ q)
        b = q.T @ a
        b = b.toarray() if sparse.issparse(b) else b
        u_small, s, vt = np.linalg.svd(b, full_matrices=False)
        current = s[:k]
        if prev is not None and iteration >= MIN_POWER_ITERS:
            scale = np.where(prev > 0, prev, 1.0)
            if np.max(np.abs(current - prev) / scale) <= SV_TOL:
                u = q @ u_small
                return _fix_signs(u[:, :k], current.copy(), vt[:k].copy())
        prev = current
    raise ConvergenceFailure(
        f"singular values did not stabilize within {MAX_POWER_ITERS} power iterations"
    )


def _fix_signs(
    u: np.ndarray, s: np.ndarray, vt: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Make the largest-magnitude coordinate of each right singular vector positive."""
    for i in range(vt.shape[0]):
        j = int(np.argmax(np.abs(vt[i])))
        if vt[i, j] < 0:
            vt[i] = -vt[i]
            u[:, i] = -u[:, i]
    return u, s, vt


class TruncatedLsa(BaseEstimator):
    """fit/transform wrapper around the truncated SVD embedding."""

    def __init__(self, n_dims: int = 15, seed: int = 0):
        self.n_dims = n_dims
        self.seed = seed

    def fit(self, w: WeightedMatrix, y=None) -> "TruncatedLsa":
        self.embedding_ = reduce(w, self.n_dims, seed=self.seed)
        self.singular_values_ = self.embedding_.singular_values
        return self

    def transform(self, w: WeightedMatrix | None = None) -> EmbeddingMatrix:
        if not hasattr(self, "embedding_"):
            raise ConfigError("TruncatedLsa is not fitted; call fit first")
        return self.embedding_

    def fit_transform(self, w: WeightedMatrix, y=None) -> EmbeddingMatrix:
        return self.fit(w).embedding_


def dump_embedding(emb: EmbeddingMatrix, path: str | Path) -> None:
    """TSV dump: doc id then the coordinates at 9 significant digits."""
    with Path(path).open("w", encoding="utf-8") as fh:
        for doc_id, row in zip(emb.docs, emb.vectors):
            cols = "\t".join(f"{v:.9g}" for v in row)
            fh.write(f"{doc_id}\t{cols}\n")
