"""litclust: cluster labeled document corpora and score cluster informativeness.

Pipeline: corpus -> sparse tf-idf matrix (with singleton ablation, a
document-frequency floor D, and a per-document rank cutoff R) ->
truncated-SVD embedding (N dimensions) -> k-means (K clusters), scored
against gold-standard labels with homogeneity, completeness, and
v-measure.  A parameter sweep explores the (D, R, N, K) grid, and an
entity dictionary probes clusters for characteristic genes/descriptions,
exported as association networks.
"""

__version__ = "0.1.0"

from litclust.cluster import Clustering, KMeans, kmeans, variability
from litclust.corpus import Corpus, Document, TokenStream, load_corpus, tokenize
from litclust.evaluate import (
    ContingencyTable,
    MetricsReport,
    contingency,
    metrics,
    score_clustering,
)
from litclust.lsa import EmbeddingMatrix, TruncatedLsa
from litclust.ncbi import NcbiClient
from litclust.probe import (
    GeneDictionary,
    Network,
    ProbeReport,
    build_network,
    count_occurrences,
    export_network,
    load_dictionary,
    relative_weights,
)
from litclust.sweep import SweepSpec, enumerate_grid, render_report, run_sweep, v_curve
from litclust.vectorize import (
    CorpusVectorizer,
    TermDocMatrix,
    WeightedMatrix,
    ablate_singletons,
    apply_df_threshold,
    apply_rank_cutoff,
    build_weighted_matrix,
    count_matrix,
    tfidf,
)

__all__ = [
    "__version__",
    "Clustering",
    "ContingencyTable",
    "Corpus",
    "CorpusVectorizer",
    "Document",
    "EmbeddingMatrix",
    "GeneDictionary",
    "KMeans",
    "MetricsReport",
    "NcbiClient",
    "Network",
    "ProbeReport",
    "SweepSpec",
    "TermDocMatrix",
    "TokenStream",
    "TruncatedLsa",
    "WeightedMatrix",
    "ablate_singletons",
    "apply_df_threshold",
    "apply_rank_cutoff",
    "build_network",
    "build_weighted_matrix",
    "contingency",
    "count_matrix",
    "count_occurrences",
    "enumerate_grid",
    "export_network",
    "kmeans",
    "load_corpus",
    "load_dictionary",
    "metrics",
    "relative_weights",
    "render_report",
    "run_sweep",
    "score_clustering",
    "tfidf",
    "tokenize",
    "v_curve",
    "variability",
]
