"""Randomized traversal of the (D, R, N, K) parameter grid.

The full Cartesian product is enumerated, shuffled deterministically by
seed, optionally truncated to a budget, and each combination runs the
whole pipeline.  Expensive shared prefixes (counting, singleton
ablation, per-D filtering, per-(D,R) weighting, per-(D,R,N) embeddings)
are computed once and reused; rows are checkpointed as they complete.
"""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from litclust import cluster as _cluster
from litclust import lsa as _lsa
from litclust import vectorize as _vec
from litclust.corpus import Corpus
from litclust.errors import (
    AllTermsRemoved,
    ConvergenceFailure,
    EmptySpec,
    NoLabeledDocuments,
)
from litclust.evaluate import score_clustering

DEFAULT_D_VALUES = tuple(round(i / 10, 1) for i in range(1, 11))
DEFAULT_R_VALUES = tuple(range(5, 15))
DEFAULT_N_VALUES = tuple(range(1, 21))
DEFAULT_K_VALUES = tuple(range(2, 21))

# Named baseline preset used as the default configuration everywhere.
BASELINE_PRESET = {"d": 0.5, "r": 5, "n_dims": 15, "k": 4}


@dataclass
class SweepSpec:
    """Grid definition; the defaults cover the documented bounds exactly."""

    d_values: Sequence[float] = DEFAULT_D_VALUES
    r_values: Sequence[int] = DEFAULT_R_VALUES
    n_values: Sequence[int] = DEFAULT_N_VALUES
    k_values: Sequence[int] = DEFAULT_K_VALUES
    seed: int = 0
    budget: int | None = None
    restarts: int = 1
    enforce_bounds: bool = True

    def validate(self) -> None:
        for name, values in (
            ("d_values", self.d_values),
            ("r_values", self.r_values),
            ("n_values", self.n_values),
            ("k_values", self.k_values),
        ):
            if len(values) == 0:
                raise EmptySpec(f"{name} is empty")
        if self.budget is not None and self.budget < 1:
            raise EmptySpec(f"budget must be positive, got {self.budget}")
        if self.enforce_bounds:
            self._check_range("d_values", self.d_values, *_vec.D_BOUNDS)
            self._check_range("r_values", self.r_values, *_vec.R_BOUNDS)
            self._check_range("n_values", self.n_values, 1, 20)
            self._check_range("k_values", self.k_values, *_cluster.K_BOUNDS)

    @staticmethod
    def _check_range(name: str, values, lo, hi) -> None:
        bad = [v for v in values if not (lo <= v <= hi)]
        if bad:
            raise EmptySpec(
                f"{name} contains values outside [{lo}, {hi}]: {bad}; "
                f"set enforce_bounds=False to allow them"
            )


@dataclass
class SweepRow:
    """One executed (or skipped) grid combination."""

    d: float
    r: int
    n: int
    k: int
    completeness: float | None = None
    homogeneity: float | None = None
    v_measure: float | None = None
    runtime_ms: int | None = None
    skip_reason: str | None = None

    @property
    def key(self) -> tuple:
        return (self.d, self.r, self.n, self.k)

    @property
    def ok(self) -> bool:
        return self.skip_reason is None

    def to_json(self) -> str:
        rec = {"d": self.d, "r": self.r, "n": self.n, "k": self.k}
        if self.ok:
            rec.update(
                completeness=self.completeness,
                homogeneity=self.homogeneity,
                v_measure=self.v_measure,
                runtime_ms=self.runtime_ms,
            )
        else:
            rec["skip_reason"] = self.skip_reason
        return json.dumps(rec, sort_keys=True)

    @classmethod
    def from_json(cls, line: str) -> "SweepRow":
        rec = json.loads(line)
        return cls(
            d=rec["d"],
            r=rec["r"],
            n=rec["n"],
            k=rec["k"],
            completeness=rec.get("completeness"),
            homogeneity=rec.get("homogeneity"),
            v_measure=rec.get("v_measure"),
            runtime_ms=rec.get("runtime_ms"),
            skip_reason=rec.get("skip_reason"),
        )


def derive_seed(*parts) -> int:
    """Stable sub-seed from arbitrary parameters, independent of call order."""
    blob = "\x1f".join(repr(p) for p in parts).encode()
    return int.from_bytes(hashlib.sha256(blob).digest()[:8], "little")


def enumerate_grid(spec: SweepSpec) -> list[tuple[float, int, int, int]]:
    """Full Cartesian product in seed-shuffled order, truncated to budget."""
    spec.validate()
    combos = [
        (float(d), int(r), int(n), int(k))
        for d in spec.d_values
        for r in spec.r_values
        for n in spec.n_values
        for k in spec.k_values
    ]
    rng = np.random.default_rng(spec.seed)
    order = rng.permutation(len(combos))
    shuffled = [combos[i] for i in order]
    if spec.budget is not None:
        shuffled = shuffled[: spec.budget]
    return shuffled


def run_sweep(
    corpus: Corpus,
    spec: SweepSpec,
    checkpoint_path: str | Path | None = None,
    use_cache: bool = True,
) -> list[SweepRow]:
    """Execute every enumerated combination and score it against the labels.

    Combinations that cannot run (the filters removed everything, the
    embedding dimensionality exceeds the matrix rank bound, more clusters
    than documents) become skip rows with a reason rather than errors.
    Completed rows are appended to ``checkpoint_path`` as they finish and
    are not recomputed on a rerun; a checkpoint is only meaningful for
    the same corpus and spec (rows are a pure function of those), which
    is the caller's responsibility to ensure.
    """
    spec.validate()
    if not corpus.label_set:
        raise NoLabeledDocuments("the sweep needs gold labels to score against")

    combos = enumerate_grid(spec)
    done: dict[tuple, SweepRow] = {}
    if checkpoint_path is not None and Path(checkpoint_path).exists():
        for row in read_rows(checkpoint_path):
            done[row.key] = row

    runner = _ComboRunner(corpus, spec, use_cache=use_cache)
    labels = corpus.labels()

    rows: list[SweepRow] = []
    out = None
    if checkpoint_path is not None:
        out = Path(checkpoint_path).open("a", encoding="utf-8")
    try:
        for d, r, n, k in combos:
            if (d, r, n, k) in done:
                rows.append(done[(d, r, n, k)])
                continue
            row = runner.run(d, r, n, k, labels)
            rows.append(row)
            if out is not None:
                out.write(row.to_json() + "\n")
                out.flush()
    finally:
        if out is not None:
            out.close()
    return rows


class _ComboRunner:
    """Pipeline execution with per-stage caches keyed by the parameters."""

    def __init__(self, corpus: Corpus, spec: SweepSpec, use_cache: bool = True):
        self.corpus = corpus
        self.spec = spec
        self.use_cache = use_cache
        self._ablated = None
        self._filtered: dict[float, object] = {}
        self._weighted: dict[tuple, object] = {}
        self._embedded: dict[tuple, object] = {}

    @property
    def ablated(self):
        # Built on first use so a fully checkpointed rerun touches nothing.
        # A corpus where every term is a singleton raises here, aborting
        # the sweep: that is a corpus-level failure, not a skippable combo.
        if self._ablated is None:
            self._ablated = _vec.ablate_singletons(_vec.count_matrix(self.corpus))
        return self._ablated

    def run(self, d: float, r: int, n: int, k: int, labels) -> SweepRow:
        start = time.perf_counter()
        row = SweepRow(d=d, r=r, n=n, k=k)

        filtered = self._get_filtered(d)
        if filtered is None:
            row.skip_reason = "all_terms_removed"
            return row
        weighted = self._get_weighted(d, r, filtered)
        n_terms, n_docs = weighted.shape
        if n > min(n_terms, n_docs):
            row.skip_reason = "n_dims_too_large"
            return row
        emb = self._get_embedded(d, r, n, weighted)
        if emb is None:
            row.skip_reason = "svd_convergence_failure"
            return row
        if k > n_docs:
            row.skip_reason = "k_too_large"
            return row

        clus = _cluster.kmeans(
            emb.vectors,
            k,
            seed=derive_seed(self.spec.seed, "kmeans", d, r, n, k),
            restarts=self.spec.restarts,
        )
        report = score_clustering(clus.assignments, labels)
        row.completeness = report.completeness
        row.homogeneity = report.homogeneity
        row.v_measure = report.v_measure
        row.runtime_ms = int((time.perf_counter() - start) * 1000)
        return row

    def _get_filtered(self, d: float):
        if self.use_cache and d in self._filtered:
            return self._filtered[d]
        ablated = self.ablated  # corpus-level failure propagates from here
        try:
            value = _vec.apply_df_threshold(
                ablated, d, enforce_bounds=self.spec.enforce_bounds
            )
        except AllTermsRemoved:
            value = None
        if self.use_cache:
            self._filtered[d] = value
        return value

    def _get_weighted(self, d: float, r: int, filtered):
        key = (d, r)
        if self.use_cache and key in self._weighted:
            return self._weighted[key]
        value = _vec.l2_normalize(_vec.apply_rank_cutoff(_vec.tfidf(filtered), r))
        if self.use_cache:
            self._weighted[key] = value
        return value

    def _get_embedded(self, d: float, r: int, n: int, weighted):
        key = (d, r, n)
        if self.use_cache and key in self._embedded:
            return self._embedded[key]
        try:
            value = _lsa.reduce(
                weighted, n, seed=derive_seed(self.spec.seed, "lsa", d, r, n)
            )
        except ConvergenceFailure:
            value = None
        if self.use_cache:
            self._embedded[key] = value
        return value


def render_report(rows: Iterable[SweepRow], top_n: int = 5, title: str | None = None) -> str:
    """Markdown table of the top rows ranked by v-measure.

    Ordering: v-measure descending, completeness descending, then
    (d, r, n, k) ascending; metrics printed at 3 decimals.
    """
    ok = [row for row in rows if row.ok]
    if not ok:
        raise EmptySpec("no successful rows to report")
    ok.sort(key=lambda w: (-w.v_measure, -w.completeness, w.d, w.r, w.n, w.k))
    lines = []
    if title:
        lines.append(f"## {title}")
        lines.append("")
    lines.append("| D | R | N | K | Completeness | Homogeneity | V-Measure |")
    lines.append("|---|---|---|---|---|---|---|")
    for row in ok[:top_n]:
        lines.append(
            f"| {row.d:.1f} | {row.r} | {row.n} | {row.k} "
            f"| {row.completeness:.3f} | {row.homogeneity:.3f} | {row.v_measure:.3f} |"
        )
    return "\n".join(lines) + "\n"


def v_curve(
    corpus: Corpus,
    k_values: Sequence[int] = DEFAULT_K_VALUES,
    d: float = BASELINE_PRESET["d"],
    r: int = BASELINE_PRESET["r"],
    n_dims: int = BASELINE_PRESET["n_dims"],
    seed: int = 0,
    restarts: int = 1,
) -> list[tuple[int, float]]:
    """V-measure as a function of K at fixed (d, r, n_dims)."""
    weighted = _vec.build_weighted_matrix(corpus, d_percent=d, rank_cutoff=r)
    emb = _lsa.reduce(weighted, n_dims, seed=derive_seed(seed, "lsa", d, r, n_dims))
    labels = corpus.labels()
    curve = []
    for k in k_values:
        clus = _cluster.kmeans(
            emb.vectors,
            int(k),
            seed=derive_seed(seed, "kmeans", d, r, n_dims, int(k)),
            restarts=restarts,
        )
        curve.append((int(k), score_clustering(clus.assignments, labels).v_measure))
    return curve


def write_v_curve(curve: Sequence[tuple[int, float]], path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        fh.write("k\tv_measure\n")
        for k, v in curve:
            fh.write(f"{k}\t{v:.6f}\n")


def write_rows(rows: Iterable[SweepRow], path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(row.to_json() + "\n")


def read_rows(path: str | Path) -> list[SweepRow]:
    rows = []
    with Path(path).open("r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                rows.append(SweepRow.from_json(line))
    return rows
