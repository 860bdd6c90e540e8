"""Self-paced regularized subspace learning for unsupervised feature selection."""
from .baselines import baseline_laplacian_score, baseline_variance_rank, laplacian_scores
from .clustering import Partition, kmeans, pam
from .data import DataError, DataMatrix, LabelVector, load_labels, load_matrix, scale_features
from .graphs import SampleGraph, build_feature_similarity, build_sample_graph
from .harness import (
    ConfigError, ExperimentConfig, RunRecord, compare_methods, emit_outputs, run_experiment,
)
from .metrics import MetricSummary, acc, evaluate_subset, match_labels, nmi
from .ranking import FeatureRanking, rank_by_scores
from .self_paced import PaceParams, update_weights
from .solver import SolverConfig, SolverState, fit, objective, rank_features
from .stats import wilcoxon_signed_rank

__version__ = "0.1.0"
