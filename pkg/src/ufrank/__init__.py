"""Unsupervised feature ranking.

Two method families score features without a target: ensemble scores read
importances off predictive clustering trees (genie3, symbolic, and the
out-of-bag permutation score), and URelief contrasts neighbor distances.
The evaluate module measures rankings by cross-validated 1NN regression
and compares methods across datasets by average rank.
"""

from .data import (AttributeKind, AttributeStats, ComputationError, Dataset,
                   IngestionError, Nominal, Numeric, compute_stats, load_csv,
                   summary, summary_json, write_csv)
from .evaluate import (ComparisonReport, CurveReport, FoldPlan,
                       adjusted_rand_index, clustering_hypothesis_ari,
                       compare_methods, comparison_to_csv, curve_points_csv,
                       cv_mse, error_curve, k_grid, kmeans, knn_predict,
                       nemenyi_cd, report_json)
from .forest import (BAGGING, EXTRA_TREES, RANDOM_FOREST, SUBSET_RULES,
                     Ensemble, EnsembleConfig, build, load_ensemble,
                     oob_error, save_ensemble, subset_size)
from .rankers import METHODS, make_ranker
from .scores import (Ranking, genie3, random_forest_score, ranking_rows,
                     ranking_to_csv, ranking_to_json, symbolic)
from .synth import SynthSpec, make_planted, write_planted
from .tree import (ALL_THRESHOLDS, ONE_RANDOM_THRESHOLD, FlatTree, Internal,
                   Leaf, SplitSearchPolicy, Test, TreeNode, best_test,
                   grow_tree, impurity, predict, tree_from_dict, tree_to_dict)
from .urelief import (UReliefConfig, UReliefState, attr_distance,
                      example_distance, urelief, urelief_state)

__version__ = "0.1.0"

__all__ = [
    "ALL_THRESHOLDS", "BAGGING", "EXTRA_TREES", "METHODS",
    "ONE_RANDOM_THRESHOLD", "RANDOM_FOREST", "SUBSET_RULES",
    "AttributeKind", "AttributeStats", "ComparisonReport", "ComputationError",
    "CurveReport", "Dataset", "Ensemble", "EnsembleConfig", "FlatTree",
    "FoldPlan", "IngestionError", "Internal", "Leaf", "Nominal", "Numeric",
    "Ranking", "SplitSearchPolicy", "SynthSpec", "Test", "TreeNode",
    "UReliefConfig", "UReliefState",
    "adjusted_rand_index", "attr_distance", "best_test", "build",
    "clustering_hypothesis_ari", "compare_methods", "comparison_to_csv",
    "compute_stats", "curve_points_csv", "cv_mse", "error_curve",
    "example_distance", "genie3", "grow_tree", "impurity", "k_grid", "kmeans",
    "knn_predict", "load_csv", "load_ensemble", "make_planted", "make_ranker",
    "nemenyi_cd", "oob_error", "predict", "random_forest_score",
    "ranking_rows", "ranking_to_csv", "ranking_to_json", "report_json",
    "save_ensemble", "subset_size", "summary", "summary_json", "symbolic",
    "tree_from_dict", "tree_to_dict", "urelief", "urelief_state", "write_csv",
    "write_planted",
]
