"""Evaluation harness for feature rankings.

The quality of a ranking is measured indirectly: keep the top-k attributes,
fit a 1-nearest-neighbor regressor on a training fold, and score its mean
squared error on the held-out fold, averaged over a seeded cross-validation
plan shared by every method under comparison (so curves for different
methods coincide at k = n). Error curves sweep k over the geometric grid
1, 2, 4, ... capped with n. Across datasets, methods are compared by
average rank with the Friedman chi-square test and the Nemenyi critical
distance. A separate check measures how well k-means cluster structure
matches the class labels via the adjusted Rand index.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import stats as sstats

from . import streams
from .data import Dataset


@dataclass(frozen=True, eq=False)
class FoldPlan:
    """Seeded partition of {0..m-1} into folds whose sizes differ by at
    most one."""

    folds: tuple[np.ndarray, ...]
    n_examples: int
    seed: int

    @classmethod
    def make(cls, m: int, n_folds: int = 10, seed: int = 0) -> "FoldPlan":
        if not 2 <= n_folds <= m:
            raise ValueError(f"fold count must be in [2, {m}], got {n_folds}")
        order = streams.stream(seed, streams.FOLDS).permutation(m)
        folds = tuple(np.sort(part) for part in np.array_split(order, n_folds))
        return cls(folds, m, seed)

    @property
    def n_folds(self) -> int:
        return len(self.folds)

    def test_rows(self, i: int) -> np.ndarray:
        return self.folds[i]

    def train_rows(self, i: int) -> np.ndarray:
        return np.setdiff1d(np.arange(self.n_examples), self.folds[i])


def _nn_targets(d: Dataset, train_rows: np.ndarray, queries: np.ndarray,
                attrs: np.ndarray, k_neighbors: int) -> np.ndarray:
    """Predicted target for each query row (a matrix of raw feature rows).

    Distances are squared Euclidean over the selected attributes, expanded
    as |a|^2 + |b|^2 - 2ab so the same arithmetic serves every query size;
    ties resolve to the smallest training row index (train_rows is kept
    sorted ascending).
    """
    A = queries[:, attrs]
    B = d.X[np.ix_(train_rows, attrs)]
    d2 = ((A * A).sum(axis=1)[:, None] + (B * B).sum(axis=1)[None, :]
          - 2.0 * (A @ B.T))
    targets = d.target[train_rows]
    if k_neighbors == 1:
        return targets[d2.argmin(axis=1)]
    nearest = np.argsort(d2, axis=1, kind="stable")[:, :k_neighbors]
    return targets[nearest].mean(axis=1)


def _check_selection(d: Dataset, selected_attrs) -> np.ndarray:
    attrs = np.unique(np.asarray(selected_attrs, dtype=np.intp))
    if attrs.size == 0:
        raise ValueError("attribute selection must be non-empty")
    if len(attrs) != len(np.asarray(selected_attrs).ravel()):
        raise ValueError("attribute selection contains duplicates")
    if attrs.min() < 0 or attrs.max() >= d.n:
        raise ValueError("attribute indices out of range")
    return attrs


def knn_predict(d: Dataset, train_rows, test_row, selected_attrs,
                k_neighbors: int = 1) -> float:
    """Predict one example's target from its nearest training rows over the
    selected attributes (unweighted Euclidean; distance ties go to the
    smallest row index)."""
    if d.target is None:
        raise ValueError("knn_predict needs a dataset with a target")
    train_rows = np.sort(np.asarray(train_rows, dtype=np.intp))
    if train_rows.size == 0:
        raise ValueError("training fold is empty")
    if not 1 <= k_neighbors <= train_rows.size:
        raise ValueError("k_neighbors out of range")
    attrs = _check_selection(d, selected_attrs)
    x = np.asarray(test_row, dtype=np.float64)
    if x.shape != (d.n,):
        raise ValueError(f"test row must have arity {d.n}")
    return float(_nn_targets(d, train_rows, x[None, :], attrs, k_neighbors)[0])


def _fold_rankings(d: Dataset, ranker, plan: FoldPlan) -> list:
    """One ranking per fold, each computed on a target-free view of the
    training rows only."""
    return [ranker(d.restrict_rows(plan.train_rows(i)).without_target())
            for i in range(plan.n_folds)]


def _fold_mse(d: Dataset, plan: FoldPlan, i: int, attrs: np.ndarray,
              k_neighbors: int = 1) -> float:
    train = plan.train_rows(i)
    test = plan.test_rows(i)
    preds = _nn_targets(d, train, d.X[test], attrs, k_neighbors)
    diff = preds - d.target[test]
    return float((diff * diff).mean())


def cv_mse(d: Dataset, ranker, k_features: int, plan: FoldPlan) -> float:
    """Mean over folds of the test-fold MSE of a 1NN regressor on the fold's
    top ``k_features`` attributes. The ranker sees only training-fold
    features; the target and the test fold stay hidden from it."""
    if d.target is None:
        raise ValueError("cv_mse needs a dataset with a target")
    if not 1 <= k_features <= d.n:
        raise ValueError(f"k_features must be in [1, {d.n}], got {k_features}")
    per_fold = []
    for i, ranking in enumerate(_fold_rankings(d, ranker, plan)):
        attrs = np.sort(ranking.top(k_features))
        per_fold.append(_fold_mse(d, plan, i, attrs))
    return float(np.mean(per_fold))


def k_grid(n: int) -> tuple[int, ...]:
    """1, 2, 4, ... up to the largest power of two not above n, then n."""
    ks = []
    k = 1
    while k <= n:
        ks.append(k)
        k *= 2
    if ks[-1] != n:
        ks.append(n)
    return tuple(ks)


@dataclass
class CurveReport:
    method: str
    dataset: str
    k_values: tuple[int, ...]
    fold_mse: np.ndarray  # folds x k grid
    mean_mse: tuple[float, ...]
    n_folds: int
    plan_seed: int

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "dataset": self.dataset,
            "k_values": list(self.k_values),
            "mean_mse": list(self.mean_mse),
            "fold_mse": [[float(v) for v in row] for row in self.fold_mse],
            "folds": self.n_folds,
            "plan_seed": self.plan_seed,
        }


def error_curve(d: Dataset, ranker, plan: FoldPlan) -> CurveReport:
    """cv_mse swept over the geometric k grid; each fold is ranked once and
    the ranking reused for every k."""
    if d.target is None:
        raise ValueError("error_curve needs a dataset with a target")
    ks = k_grid(d.n)
    rankings = _fold_rankings(d, ranker, plan)
    fold_mse = np.empty((plan.n_folds, len(ks)))
    for i, ranking in enumerate(rankings):
        for j, k in enumerate(ks):
            attrs = np.sort(ranking.top(k))
            fold_mse[i, j] = _fold_mse(d, plan, i, attrs)
    means = tuple(float(np.mean(fold_mse[:, j])) for j in range(len(ks)))
    return CurveReport(rankings[0].method, d.name, ks, fold_mse, means,
                       plan.n_folds, plan.seed)


def curve_points_csv(report: CurveReport, path) -> None:
    """Two-column plot-ready mirror: k, mean MSE."""
    with open(Path(path), "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["k", "mean_mse"])
        for k, mse in zip(report.k_values, report.mean_mse):
            writer.writerow([k, repr(mse)])


def kmeans(X: np.ndarray, k: int, rng: np.random.Generator,
           max_iter: int = 300, tol: float = 1e-6):
    """Lloyd iterations from a k-means++ start.

    Assignment ties go to the lowest center id; an emptied cluster is
    re-seeded on the point farthest from its current center. Stops when
    assignments repeat or the inertia improvement falls below ``tol``
    relative.
    """
    m = len(X)
    if not 1 <= k <= m:
        raise ValueError(f"k must be in [1, {m}], got {k}")
    centers = np.empty((k, X.shape[1]))
    centers[0] = X[int(rng.integers(m))]
    closest = ((X - centers[0]) ** 2).sum(axis=1)
    for j in range(1, k):
        total = closest.sum()
        if total > 0:
            idx = int(rng.choice(m, p=closest / total))
        else:
            idx = int(rng.integers(m))
        centers[j] = X[idx]
        closest = np.minimum(closest, ((X - centers[j]) ** 2).sum(axis=1))

    labels = np.full(m, -1, dtype=np.intp)
    inertia = np.inf
    for _ in range(max_iter):
        d2 = ((X * X).sum(axis=1)[:, None] + (centers * centers).sum(axis=1)[None, :]
              - 2.0 * X @ centers.T)
        new_labels = d2.argmin(axis=1)
        point_d2 = np.take_along_axis(d2, new_labels[:, None], axis=1).ravel()
        new_inertia = float(np.maximum(point_d2, 0).sum())
        for c in range(k):
            members = new_labels == c
            if members.any():
                centers[c] = X[members].mean(axis=0)
            else:
                far = int(np.argmax(point_d2))
                centers[c] = X[far]
                point_d2[far] = -1.0
        if (new_labels == labels).all():
            labels = new_labels
            inertia = new_inertia
            break
        converged = (np.isfinite(inertia)
                     and abs(inertia - new_inertia) <= tol * max(inertia, 1e-300))
        labels = new_labels
        inertia = new_inertia
        if converged:
            break
    return labels, centers, inertia


def adjusted_rand_index(a, b) -> float:
    """Chance-corrected pair-counting agreement of two labelings: 1 for
    identical partitions, about 0 for independent ones. When both labelings
    are trivial in the same way (the 0/0 case) the partitions are identical
    and the index is 1 by convention."""
    a = np.asarray(a).ravel()
    b = np.asarray(b).ravel()
    if a.shape != b.shape or a.size == 0:
        raise ValueError("labelings must be equal-length and non-empty")
    _, ai = np.unique(a, return_inverse=True)
    _, bi = np.unique(b, return_inverse=True)
    table = np.zeros((ai.max() + 1, bi.max() + 1))
    np.add.at(table, (ai, bi), 1.0)

    def comb2(x):
        return x * (x - 1.0) / 2.0

    index = comb2(table).sum()
    sum_a = comb2(table.sum(axis=1)).sum()
    sum_b = comb2(table.sum(axis=0)).sum()
    expected = sum_a * sum_b / comb2(float(a.size))
    max_index = (sum_a + sum_b) / 2.0
    if max_index == expected:
        return 1.0
    return float((index - expected) / (max_index - expected))


def clustering_hypothesis_ari(d: Dataset, class_count: int | None = None,
                              runs: int = 10, seed: int = 0) -> float:
    """Median over ``runs`` seeded k-means runs of the ARI between cluster
    assignments (k = the number of target classes unless overridden) and the
    class labels."""
    if d.target is None:
        raise ValueError("the clustering check needs a dataset with a target")
    classes = np.unique(d.target)
    if classes.size < 2:
        raise ValueError("the clustering check needs at least two classes")
    if runs < 1:
        raise ValueError("runs must be at least 1")
    k = class_count if class_count is not None else int(classes.size)
    aris = []
    for r in range(runs):
        labels, _, _ = kmeans(d.X, k, streams.stream(seed, streams.KMEANS, r))
        aris.append(adjusted_rand_index(labels, d.target))
    return float(np.median(aris))


# Two-sided studentized-range quantiles q_0.05(k) / sqrt(2) for the Nemenyi
# critical distance, methods k = 2..10.
_NEMENYI_Q_05 = {2: 1.959964, 3: 2.343701, 4: 2.569032, 5: 2.727774,
                 6: 2.849705, 7: 2.948320, 8: 3.030879, 9: 3.101730,
                 10: 3.163684}


def nemenyi_cd(n_methods: int, n_datasets: int, alpha: float = 0.05) -> float:
    """Minimum average-rank gap that separates two methods."""
    if alpha != 0.05:
        raise ValueError("critical distances are tabulated for alpha=0.05 only")
    if n_methods not in _NEMENYI_Q_05:
        raise ValueError(f"critical value table covers 2..10 methods, "
                         f"got {n_methods}")
    q = _NEMENYI_Q_05[n_methods]
    return q * np.sqrt(n_methods * (n_methods + 1) / (6.0 * n_datasets))


@dataclass
class ComparisonReport:
    method_names: tuple[str, ...]
    dataset_names: tuple[str, ...]
    mse: np.ndarray            # datasets x methods
    ranks: np.ndarray          # datasets x methods, average-rank ties
    average_ranks: tuple[float, ...]
    friedman_chi2: float
    p_value: float
    iman_davenport_f: float
    iman_davenport_p: float
    critical_difference: float
    alpha: float
    indistinguishable_pairs: tuple[tuple[int, int], ...]

    def to_dict(self) -> dict:
        return {
            "methods": list(self.method_names),
            "datasets": list(self.dataset_names),
            "mse": [[float(v) for v in row] for row in self.mse],
            "ranks": [[float(v) for v in row] for row in self.ranks],
            "average_ranks": list(self.average_ranks),
            "friedman_chi2": self.friedman_chi2,
            "p_value": self.p_value,
            "iman_davenport_f": self.iman_davenport_f,
            "iman_davenport_p": self.iman_davenport_p,
            "critical_difference": self.critical_difference,
            "alpha": self.alpha,
            "indistinguishable_pairs": [list(p) for p in
                                        self.indistinguishable_pairs],
        }


def compare_methods(results, method_names=None, dataset_names=None,
                    alpha: float = 0.05) -> ComparisonReport:
    """Rank methods per dataset (rank 1 = lowest error, ties share the
    average rank), then test whether the average ranks could be uniform.

    Reports the Friedman chi-square statistic with its p-value, plus the
    F-distributed refinement of that statistic (less conservative for few
    datasets) as supplementary fields, and the Nemenyi critical distance
    with the method pairs it fails to separate.
    """
    R = np.asarray(results, dtype=np.float64)
    if R.ndim != 2 or R.shape[0] < 2 or R.shape[1] < 2:
        raise ValueError("results must be a (datasets x methods) matrix, "
                         "at least 2x2")
    if not np.isfinite(R).all():
        raise ValueError("results contain non-finite values")
    n_data, n_methods = R.shape
    if method_names is None:
        method_names = tuple(f"method_{j}" for j in range(n_methods))
    if dataset_names is None:
        dataset_names = tuple(f"dataset_{i}" for i in range(n_data))
    if len(method_names) != n_methods or len(dataset_names) != n_data:
        raise ValueError("name lists do not match the matrix shape")

    ranks = np.vstack([sstats.rankdata(row) for row in R])
    avg = ranks.mean(axis=0)
    chi2 = (12.0 * n_data / (n_methods * (n_methods + 1))
            * (float(avg @ avg) - n_methods * (n_methods + 1) ** 2 / 4.0))
    p = float(sstats.chi2.sf(chi2, n_methods - 1))

    id_denom = n_data * (n_methods - 1) - chi2
    if id_denom <= 0:
        id_f, id_p = float("inf"), 0.0
    else:
        id_f = (n_data - 1) * chi2 / id_denom
        id_p = float(sstats.f.sf(id_f, n_methods - 1,
                                 (n_methods - 1) * (n_data - 1)))

    cd = float(nemenyi_cd(n_methods, n_data, alpha))
    pairs = tuple((i, j) for i in range(n_methods) for j in range(i + 1, n_methods)
                  if abs(avg[i] - avg[j]) < cd)
    return ComparisonReport(tuple(method_names), tuple(dataset_names), R, ranks,
                            tuple(float(v) for v in avg), float(chi2), p,
                            float(id_f), id_p, cd, alpha, pairs)


def comparison_to_csv(report: ComparisonReport, path) -> None:
    """Table mirror: one row per dataset, one column per method, with the
    average ranks appended."""
    with open(Path(path), "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["dataset", *report.method_names])
        for i, name in enumerate(report.dataset_names):
            writer.writerow([name, *(repr(float(v)) for v in report.mse[i])])
        writer.writerow(["average_rank",
                         *(repr(v) for v in report.average_ranks)])


def report_json(obj) -> str:
    payload = obj.to_dict() if hasattr(obj, "to_dict") else obj
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"
