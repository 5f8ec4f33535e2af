"""openclass: weakly supervised open-world text classification.

Given a corpus where only some classes are known (each by a one-word name and
a handful of labeled documents), discover how many classes the corpus actually
contains, name them with indicative class-words, and label every document.
"""

from .corpus import (
    Corpus,
    Document,
    Supervision,
    VocabEntry,
    load_corpus,
    load_supervision,
    make_imbalanced,
    make_open_world_split,
    save_supervision,
    tokenize,
)
from .embedding import (
    ClassRep,
    DocRep,
    EmbeddingTable,
    average_contextual,
    class_representation,
    document_representation,
    fallback_embeddings,
    load_embedding_table,
    write_embedding_table,
)
from .candidates import (
    CandidateSet,
    RepWordScore,
    cluster_term_stats,
    expand_seeds,
    merge_candidates,
    representativeness,
    top_representative_words,
)
from .ranking import (
    Indicativeness,
    RankModel,
    WordClusterFeatures,
    build_training_pairs,
    features,
    generic_penalty,
    indicativeness_ranking,
    rank_all_clusters,
    train_rank_model,
)
from .mixture import (
    FinalClassifier,
    GmmModel,
    PseudoLabeling,
    cluster_documents,
    predict,
    read_predictions,
    train_final_classifier,
    write_predictions,
)
from .refine import (
    Cluster,
    ClusterState,
    RefineConfig,
    RefinementResult,
    coherence,
    remove_overlapping,
    run_refinement,
    select_class_words,
)
from .evaluation import (
    ClusterAssignment,
    EvalReport,
    OverlapMatrix,
    assign_clusters,
    f1_report,
    overlap_matrix,
)
from .estimator import OpenWorldTextClassifier

__version__ = "0.1.0"

__all__ = [
    "Corpus",
    "Document",
    "Supervision",
    "VocabEntry",
    "load_corpus",
    "load_supervision",
    "make_imbalanced",
    "make_open_world_split",
    "save_supervision",
    "tokenize",
    "ClassRep",
    "DocRep",
    "EmbeddingTable",
    "average_contextual",
    "class_representation",
    "document_representation",
    "fallback_embeddings",
    "load_embedding_table",
    "write_embedding_table",
    "CandidateSet",
    "RepWordScore",
    "cluster_term_stats",
    "expand_seeds",
    "merge_candidates",
    "representativeness",
    "top_representative_words",
    "Indicativeness",
    "RankModel",
    "WordClusterFeatures",
    "build_training_pairs",
    "features",
    "generic_penalty",
    "indicativeness_ranking",
    "rank_all_clusters",
    "train_rank_model",
    "FinalClassifier",
    "GmmModel",
    "PseudoLabeling",
    "cluster_documents",
    "predict",
    "read_predictions",
    "train_final_classifier",
    "write_predictions",
    "Cluster",
    "ClusterState",
    "RefineConfig",
    "RefinementResult",
    "coherence",
    "remove_overlapping",
    "run_refinement",
    "select_class_words",
    "OpenWorldTextClassifier",
    "ClusterAssignment",
    "EvalReport",
    "OverlapMatrix",
    "assign_clusters",
    "f1_report",
    "overlap_matrix",
    "__version__",
]
