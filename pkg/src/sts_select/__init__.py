"""Feature selection for small tabular datasets.

Scores features statistically (kNN mutual information against a discrete
target) and semantically (cosine similarity between feature-name and
target-name embeddings), selects via top-N, mean + k*std threshold, or greedy
mRMR over either score family or their alpha-weighted combination, and
evaluates selections with a cross-validated classifier harness.
"""

__version__ = "0.1.0"

from .embed import (
    EmbeddingStore,
    StsScoreConfig,
    WordVectorTable,
    cosine,
    load_embedding_store,
    load_word_vectors,
    pool_name,
    save_embedding_store,
    sts_redundancy,
    sts_relevance,
)
from .errors import StsSelectError
from .model_eval import (
    CvPlan,
    EvalReport,
    GnbModel,
    KnnModel,
    PipelineSpec,
    auprc,
    auroc,
    cross_validate,
    gnb_predict_proba,
    grid_search,
    knn_predict_proba,
    split_train_test,
    train_gnb,
    train_knn,
)
from .scoring import (
    CombinedScorer,
    MiConfig,
    MiScorer,
    ScoreSet,
    StsScorer,
    alpha_grid,
    mi_continuous,
    mi_discrete_target,
    redundancy_matrix,
    relevance_scores,
    score_features,
)
from .selection import (
    SelectionConfig,
    SelectionResult,
    select_mrmr,
    select_std_dev,
    select_top_n,
)
from .synthbench import SynthSpec, generate, planted_recovery
from .tabular import (
    ColumnFilterPolicy,
    ColumnKind,
    Dataset,
    FeatureMatrix,
    LabelRule,
    PreprocessPlan,
    Schema,
    apply_preprocess,
    collapse_responses,
    derive_label,
    filter_columns,
    fit_preprocess,
    load_csv,
)
