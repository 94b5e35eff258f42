"""Multi-class intrusion-detection pipeline on NSL-KDD-format data.

Stages: record ingestion and label granularities, supervised MDL
discretization, CFS/information-gain feature selection (including the
hybrid union selector), AdaBoost.M1 over discrete naive Bayes, and pooled
k-fold cross-validated per-class evaluation.
"""

from .config import (
    ClassifierConfig,
    CrossValConfig,
    DEFAULT_HYBRID_ALPHA,
    ExperimentConfig,
    PipelineConfig,
    SampleConfig,
    SelectionConfig,
)
from .classify import (
    EnsembleModel,
    NaiveBayesModel,
    ensemble_predict,
    nb_predict,
    train_adaboost_m1,
    train_naive_bayes,
)
from .data import (
    ATTACK23,
    CATEGORY5,
    Dataset,
    FeatureSchema,
    FoldPlan,
    NSLKDD_SCHEMA,
    Record,
    map_labels,
    match_distribution,
    parse_records,
    reference_sample_counts,
    stratified_folds,
)
from .discretize import (
    CutPointList,
    DiscretizationModel,
    apply_discretizer,
    entropy,
    fit_discretizer,
    mdlp_cuts,
)
from .evaluate import (
    ConfusionMatrix,
    EvaluationReport,
    aggregate,
    confusion,
    cross_validate,
    per_class_metrics,
)
from .pipeline import reproduce_tables, run_experiment
from .select import (
    CorrelationCache,
    FeatureSubset,
    RankedFeatures,
    best_first_search,
    cfs_merit,
    gain_ratio,
    greedy_forward_search,
    hybrid_select,
    info_gain,
    rank_threshold,
    symmetrical_uncertainty,
)

__version__ = "0.1.0"
