"""Player-behavior segmentation engine.

Temporal and static k-means, graph embeddings (random-walk skip-gram and
edge-sampling proximity), PageRank influence mining, network cohesion
metrics, 2-D projections, and the radar-violin cluster report consumed by
the bundled web UI.
"""

from .accel import NUMBA_ACTIVE
from .clustering import (
    ClusterModel,
    KMeansOpts,
    adjusted_rand_index,
    init_centroids,
    kmeans,
    ts_kmeans,
)
from .dimred import PcaModel, Projection2D, pca_fit, pca_project, tsne
from .embeddings import (
    AliasTable,
    EmbeddingMatrix,
    EmbedOpts,
    WalkCorpus,
    build_alias_table,
    embed_and_cluster,
    embed_graph,
    line_train,
    random_walks,
    skipgram_train,
)
from .features import (
    FeatureScore,
    average_correlation,
    composite_score,
    min_max_normalize,
    pca_contribution,
    rank_features,
    vif,
)
from .graphstats import (
    NetworkStats,
    PageRankResult,
    avg_clustering_coefficient,
    cluster_subgraph_stats,
    connected_components,
    duration_histogram,
    pagerank,
    persistent_kols,
    top_k_influencers,
    triangle_count,
)
from .ingest import (
    PlayerSnapshot,
    SocialGraph,
    SyntheticSpec,
    TimeSeriesTensor,
    assemble_tensor,
    generate_synthetic,
    mode_choice_ratio,
    parse_edge_list,
    parse_snapshots,
)
from .report import ClusterReport, FeatureSummary, build_report, kde, summarize

__version__ = "0.1.0"
