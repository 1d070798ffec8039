"""Reciprocal recommendation for two-sided messaging networks.

Scores mutual compatibility between users of a bipartite messaging graph
from profile attributes and contact traces, generates top-K recommendation
lists under six algorithm presets, and evaluates them with a reproducible
train/test protocol. A seeded synthetic-dataset generator supports
end-to-end experiments without real data.
"""

from .engine import (
    AlgorithmConfig,
    CandidatePolicy,
    NeighborKind,
    PRESETS,
    RecommendationList,
    ScoredCandidate,
    Scorer,
    SimilarityKind,
    compatible_score,
    config_from_spec,
    get_preset,
    recommend_batch,
    recommend_top_k,
    reciprocal_score,
    reciprocal_score_parts,
    score_matrix,
)
from .evaluation import (
    DEFAULT_K_GRID,
    EvalReport,
    MetricSummary,
    SplitSpec,
    ObservedActivity,
    attribute_distribution,
    bhattacharyya_distance,
    build_test_activity,
    expected_random_precision,
    format_report,
    metrics_at_k,
    relevant_positions,
    run_evaluation,
    select_service_users,
    split_train_test,
)
from .model import (
    Gender,
    IngestError,
    InteractionGraph,
    MessageEvent,
    UserProfile,
    derive_contact_pairs,
    derive_replies,
    ingest_messages,
    ingest_profiles,
    read_snapshot,
    write_snapshot,
)
from .similarity import (
    AttributeSchema,
    Binning,
    ProjectionDirection,
    ProjectionNetwork,
    attractiveness_similarity,
    build_projection,
    build_schema,
    ccdf,
    content_similarity_a,
    content_similarity_b,
    interest_similarity,
    message_counts,
)
from .synthgen import GenConfig, SynthDataset, generate, generate_dataset, write_dataset

__version__ = "0.1.0"
