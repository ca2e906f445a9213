"""Sparse term-document counts, tf-idf weighting, and the upstream
feature-selection controls.

The pipeline order is fixed: counts -> singleton ablation -> document
frequency floor -> tf-idf -> per-document rank cutoff -> L2
normalization.  ``CorpusVectorizer`` packages that order behind a
fit/transform surface; the individual steps are plain functions on the
matrix types.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Mapping

import numpy as np
from scipy import io as spio
from scipy import sparse

from litclust.base import BaseEstimator, check_bounds, check_positive_int
from litclust.corpus import Corpus, tokenize
from litclust.errors import AllTermsRemoved, ConfigError, EmptyCorpus

log = logging.getLogger(__name__)

# Documented bounds for the document-frequency floor (percent).
D_BOUNDS = (0.1, 1.0)
# Documented bounds for the per-document rank cutoff.
R_BOUNDS = (5, 14)


@dataclass(frozen=True, eq=False)
class TermDocMatrix:
    """Sparse nonnegative integer counts, terms on rows, documents on columns.

    ``doc_freq[t]`` is the number of documents containing term ``t``
    (the row's nonzero count).
    """

    terms: tuple[str, ...]
    docs: tuple[str, ...]
    counts: sparse.csr_array

    @property
    def doc_freq(self) -> np.ndarray:
        return np.diff(self.counts.indptr)

    @property
    def shape(self) -> tuple[int, int]:
        return self.counts.shape


@dataclass(frozen=True, eq=False)
class WeightedMatrix:
    """Sparse positive real weights with the filter trail that produced them."""

    terms: tuple[str, ...]
    docs: tuple[str, ...]
    weights: sparse.csr_array
    provenance: Mapping[str, object]

    @property
    def shape(self) -> tuple[int, int]:
        return self.weights.shape


def count_matrix(corpus: Corpus) -> TermDocMatrix:
    """Tokenize every document and tally term occurrences.

    Vocabulary is sorted lexicographically; the document axis follows
    corpus order (already sorted by id), so the result is independent of
    input record order.
    """
    if len(corpus) == 0:
        raise EmptyCorpus("cannot build a count matrix from an empty corpus")
    streams = [tokenize(doc) for doc in corpus]
    vocab = sorted({t for s in streams for t in s.tokens})
    if not vocab:
        log.warning("corpus produced an empty vocabulary (no tokens of length >= 2)")
    index = {t: i for i, t in enumerate(vocab)}

    rows: list[int] = []
    cols: list[int] = []
    data: list[int] = []
    for j, stream in enumerate(streams):
        seen: dict[int, int] = {}
        for tok in stream.tokens:
            i = index[tok]
            seen[i] = seen.get(i, 0) + 1
        rows.extend(seen.keys())
        cols.extend([j] * len(seen))
        data.extend(seen.values())

    counts = sparse.csr_array(
        (np.asarray(data, dtype=np.int64), (rows, cols)),
        shape=(len(vocab), len(corpus)),
    )
    return TermDocMatrix(terms=tuple(vocab), docs=corpus.doc_ids(), counts=counts)


def ablate_singletons(m: TermDocMatrix) -> TermDocMatrix:
    """Drop every term that occurs in exactly one document."""
    keep = m.doc_freq >= 2
    if not np.any(keep):
        raise AllTermsRemoved(
            "every term occurs in a single document; the corpus is too small or too diverse"
        )
    return _keep_terms(m, keep)


def apply_df_threshold(
    m: TermDocMatrix, d_percent: float, enforce_bounds: bool = True
) -> TermDocMatrix:
    """Keep terms whose document frequency is at least max(2, ceil(d% of docs)).

    The hard floor of 2 means the threshold can never readmit singleton
    terms, whatever ``d_percent`` is.
    """
    check_bounds(d_percent, "d_percent", *D_BOUNDS, enforce=enforce_bounds)
    n_docs = len(m.docs)
    threshold = max(2, math.ceil(d_percent / 100.0 * n_docs))
    keep = m.doc_freq >= threshold
    if not np.any(keep):
        raise AllTermsRemoved(
            f"document-frequency floor {d_percent}% (min {threshold} docs) removed all terms"
        )
    return _keep_terms(m, keep)


def tfidf(m: TermDocMatrix) -> WeightedMatrix:
    """Map each count c to c * ln(n_docs / doc_freq), natural log.

    Terms present in every document weigh exactly zero and their entries
    are removed from storage; all stored weights are positive.
    """
    if len(m.terms) == 0 or len(m.docs) == 0:
        raise EmptyCorpus("cannot weight an empty matrix")
    n_docs = len(m.docs)
    idf = np.log(n_docs / m.doc_freq.astype(np.float64))
    weights = m.counts.astype(np.float64).copy()
    # Scale row t by idf[t]: expand per stored entry via indptr.
    row_of_entry = np.repeat(np.arange(len(m.terms)), np.diff(weights.indptr))
    weights.data *= idf[row_of_entry]
    weights.eliminate_zeros()
    return WeightedMatrix(
        terms=m.terms,
        docs=m.docs,
        weights=weights,
        provenance={},
    )


def apply_rank_cutoff(w: WeightedMatrix, r: int) -> WeightedMatrix:
    """Per document, keep only the ``r`` highest-weight terms.

    Any r >= 1 is accepted (the documented sweep range is enforced by the
    sweep grid, not here).  Ties are broken by lexicographic term order
    (the smaller term wins), which is term-index order because the
    vocabulary is sorted.
    """
    check_positive_int(r, "r")
    csc = w.weights.tocsc()
    indptr, indices, data = csc.indptr, csc.indices, csc.data
    keep_mask = np.zeros(len(data), dtype=bool)
    for j in range(len(w.docs)):
        lo, hi = indptr[j], indptr[j + 1]
        if hi - lo <= r:
            keep_mask[lo:hi] = True
            continue
        # Primary key: weight descending; tiebreak: term index ascending.
        order = np.lexsort((indices[lo:hi], -data[lo:hi]))
        keep_mask[lo + order[:r]] = True
    col_of_entry = np.repeat(np.arange(len(w.docs)), np.diff(indptr))
    out = sparse.csr_array(
        (data[keep_mask], (indices[keep_mask], col_of_entry[keep_mask])),
        shape=csc.shape,
    )
    return WeightedMatrix(
        terms=w.terms,
        docs=w.docs,
        weights=out,
        provenance={**w.provenance, "r": r},
    )


def l2_normalize(w: WeightedMatrix) -> WeightedMatrix:
    """Scale each document column to unit Euclidean norm (empty columns stay empty)."""
    csc = w.weights.tocsc().copy()
    for j in range(len(w.docs)):
        lo, hi = csc.indptr[j], csc.indptr[j + 1]
        if hi > lo:
            norm = np.sqrt(np.sum(csc.data[lo:hi] ** 2))
            csc.data[lo:hi] /= norm
    return WeightedMatrix(
        terms=w.terms,
        docs=w.docs,
        weights=sparse.csr_array(csc),
        provenance={**w.provenance, "l2_normalized": True},
    )


def build_weighted_matrix(
    corpus: Corpus,
    d_percent: float = 0.5,
    rank_cutoff: int = 5,
    drop_singletons: bool = True,
    normalize: bool = True,
    enforce_bounds: bool = True,
) -> WeightedMatrix:
    """Run the fixed pipeline order on a corpus."""
    m = count_matrix(corpus)
    if drop_singletons:
        m = ablate_singletons(m)
    m = apply_df_threshold(m, d_percent, enforce_bounds=enforce_bounds)
    w = tfidf(m)
    w = apply_rank_cutoff(w, rank_cutoff)
    if normalize:
        w = l2_normalize(w)
    prov = dict(w.provenance)
    prov["d"] = d_percent
    prov["singletons_ablated"] = drop_singletons
    return replace(w, provenance=prov)


class CorpusVectorizer(BaseEstimator):
    """Corpus -> weighted matrix, as a fit/transform estimator.

    The document-frequency controls are corpus-global, so the vectorizer
    is fit and applied to the same corpus; transforming unseen documents
    against a fitted vocabulary is deliberately unsupported.
    """

    def __init__(
        self,
        d_percent: float = 0.5,
        rank_cutoff: int = 5,
        drop_singletons: bool = True,
        normalize: bool = True,
        enforce_bounds: bool = True,
    ):
        self.d_percent = d_percent
        self.rank_cutoff = rank_cutoff
        self.drop_singletons = drop_singletons
        self.normalize = normalize
        self.enforce_bounds = enforce_bounds

    def fit(self, corpus: Corpus, y=None) -> "CorpusVectorizer":
        self.weighted_ = build_weighted_matrix(
            corpus,
            d_percent=self.d_percent,
            rank_cutoff=self.rank_cutoff,
            drop_singletons=self.drop_singletons,
            normalize=self.normalize,
            enforce_bounds=self.enforce_bounds,
        )
        self.vocabulary_ = self.weighted_.terms
        self.doc_ids_ = self.weighted_.docs
        return self

    def transform(self, corpus: Corpus | None = None) -> WeightedMatrix:
        if not hasattr(self, "weighted_"):
            raise ConfigError("CorpusVectorizer is not fitted; call fit first")
        if corpus is not None and corpus.doc_ids() != self.doc_ids_:
            raise ConfigError(
                "CorpusVectorizer only transforms the corpus it was fit on"
            )
        return self.weighted_

    def fit_transform(self, corpus: Corpus, y=None) -> WeightedMatrix:
        return self.fit(corpus).weighted_


def _keep_terms(m: TermDocMatrix, keep: np.ndarray) -> TermDocMatrix:
    terms = tuple(t for t, k in zip(m.terms, keep) if k)
    counts = sparse.csr_array(m.counts[keep])
    return TermDocMatrix(terms=terms, docs=m.docs, counts=counts)


def dump_matrix_market(m: TermDocMatrix | WeightedMatrix, path: str | Path) -> None:
    """MatrixMarket coordinate dump of counts or weights."""
    mat = m.counts if isinstance(m, TermDocMatrix) else m.weights
    spio.mmwrite(str(path), sparse.coo_array(mat))


def dump_vocabulary(m: TermDocMatrix | WeightedMatrix, path: str | Path) -> None:
    """Two-column TSV: term, row index."""
    with Path(path).open("w", encoding="utf-8") as fh:
        for i, term in enumerate(m.terms):
            fh.write(f"{term}\t{i}\n")
