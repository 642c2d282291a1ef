"""Classifier harness: Gaussian naive Bayes and kNN probability models,
ranking metrics, the stratified 80/20 split + flat 5-fold CV protocol, and
grid search over scorer/strategy configurations.

Inside cross-validation, scoring and selection are re-fit on each fold's
training rows only, so a feature that looks informative only on held-out rows
cannot leak into the selected set. The two protocol seeds split duties: the
first drives the train/test split and fold assignment, the second the MI
estimators' tie-breaking jitter.
"""
from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import cdist
from scipy.stats import rankdata

from .errors import (
    EmptyTrainingError,
    NoPositivesError,
    SingleClassError,
    SingleClassTrainingError,
    TooFewPerClassError,
)
from .scoring import CombinedScorer, MiScorer, ScorerKind, StsScorer, score_features
from .selection import SelectionConfig, SelectionResult, run_selection
from .tabular import FeatureMatrix


def _as_array(x) -> np.ndarray:
    if isinstance(x, FeatureMatrix):
        return x.values
    return np.asarray(x, dtype=np.float64)


# --- classifiers -----------------------------------------------------------------

@dataclass(frozen=True)
class GnbModel:
    """Per-class Gaussian likelihood parameters with a shared variance floor."""

    log_priors: np.ndarray  # (2,)
    means: np.ndarray  # (2, F)
    variances: np.ndarray  # (2, F), floored > 0


@dataclass(frozen=True)
class KnnModel:
    train: np.ndarray
    labels: np.ndarray
    n_neighbors: int = 5

    def __post_init__(self):
        if self.n_neighbors > self.train.shape[0]:
            raise ValueError("n_neighbors exceeds training rows")


def train_gnb(x, labels) -> GnbModel:
    """Fit class priors and per-class feature Gaussians.

    Class variances are floored at 1e-9 times the largest overall feature
    variance, so constant one-hot columns cannot produce zero variance.
    """
    x = _as_array(x)
    labels = np.asarray(labels)
    classes = np.unique(labels)
    if classes.size < 2:
        raise SingleClassTrainingError("training labels contain a single class")
    floor = 1e-9 * float(np.max(x.var(axis=0))) if x.size else 0.0
    if floor <= 0.0:
        floor = 1e-18
    means = np.stack([x[labels == c].mean(axis=0) for c in (0, 1)])
    variances = np.maximum(np.stack([x[labels == c].var(axis=0) for c in (0, 1)]), floor)
    priors = np.asarray([(labels == c).mean() for c in (0, 1)])
    return GnbModel(log_priors=np.log(priors), means=means, variances=variances)


def gnb_predict_proba(model: GnbModel, x) -> np.ndarray:
    """P(positive | x) from log-space class-conditional Gaussian likelihoods."""
    x = _as_array(x)
    joint = np.empty((x.shape[0], 2))
    for c in (0, 1):
        mu, var = model.means[c], model.variances[c]
        ll = -0.5 * np.log(2.0 * np.pi * var) - (x - mu) ** 2 / (2.0 * var)
        joint[:, c] = model.log_priors[c] + ll.sum(axis=1)
    m = joint.max(axis=1, keepdims=True)
    p = np.exp(joint - m)
    return p[:, 1] / p.sum(axis=1)


def train_knn(x, labels, n_neighbors: int = 5) -> KnnModel:
    x = _as_array(x)
    labels = np.asarray(labels)
    if x.shape[0] == 0:
        raise EmptyTrainingError("no training rows")
    return KnnModel(train=x, labels=labels, n_neighbors=n_neighbors)


def knn_predict_proba(model: KnnModel, x) -> np.ndarray:
    """Fraction of positive labels among the n nearest training rows.

    Euclidean distance; exact distance ties break toward the lower training
    row index (stable sort), keeping predictions reproducible.
    """
    x = _as_array(x)
    d = cdist(x, model.train)
    order = np.argsort(d, axis=1, kind="stable")[:, : model.n_neighbors]
    return model.labels[order].mean(axis=1)


# --- metrics ----------------------------------------------------------------------

def auroc(scores, labels) -> float:
    """Probability a random positive outscores a random negative; ties count 1/2."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    pos = labels == 1
    n_pos = int(pos.sum())
    n_neg = int(labels.size - n_pos)
    if n_pos == 0 or n_neg == 0:
        raise SingleClassError("AUROC needs both classes present")
    ranks = rankdata(scores)
    return float((ranks[pos].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def auprc(scores, labels) -> float:
    """Average precision: sum of (recall step) x precision over descending-score
    thresholds, tied scores grouped into a single threshold, no interpolation."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    n_pos = int((labels == 1).sum())
    if n_pos == 0:
        raise NoPositivesError("AUPRC needs at least one positive")
    order = np.argsort(-scores, kind="stable")
    sorted_scores = scores[order]
    sorted_labels = labels[order]
    tp = np.cumsum(sorted_labels == 1)
    fp = np.cumsum(sorted_labels != 1)
    # last index of each tied-score group = one threshold
    boundary = np.append(np.nonzero(np.diff(sorted_scores))[0], sorted_labels.size - 1)
    precision = tp[boundary] / (tp[boundary] + fp[boundary])
    recall = tp[boundary] / n_pos
    prev = np.concatenate([[0.0], recall[:-1]])
    return float(np.sum((recall - prev) * precision))


# --- split / folds ------------------------------------------------------------------

@dataclass(frozen=True)
class CvPlan:
    test_fraction: float = 0.2
    folds: int = 5
    seeds: tuple[int, int] = (278797835, 424989)
    stratified: bool = True

    def __post_init__(self):
        if not (0.0 < self.test_fraction < 1.0):
            raise ValueError("test_fraction must be in (0, 1)")
        if self.folds < 2:
            raise ValueError("folds must be >= 2")
        object.__setattr__(self, "seeds", tuple(self.seeds))


def _round_half_up(x: float) -> int:
    return int(np.floor(x + 0.5))


def split_indices(labels, plan: CvPlan) -> tuple[np.ndarray, np.ndarray]:
    """Seeded, stratified train/test row indices (both returned sorted)."""
    labels = np.asarray(labels)
    rng = np.random.default_rng(np.random.SeedSequence([plan.seeds[0], 0]))
    n = labels.size
    if plan.stratified:
        test_parts = []
        for cls in np.unique(labels):
            idx = np.flatnonzero(labels == cls)
            n_test = _round_half_up(idx.size * plan.test_fraction)
            test_parts.append(rng.permutation(idx)[:n_test])
        test = np.sort(np.concatenate(test_parts))
    else:
        perm = rng.permutation(n)
        test = np.sort(perm[: _round_half_up(n * plan.test_fraction)])
    train = np.setdiff1d(np.arange(n), test)
    # fold feasibility (>= folds members per class) is checked by fold_indices;
    # the split itself only insists that training keeps every class alive
    for cls in np.unique(labels):
        if int((labels[train] == cls).sum()) < 1:
            raise TooFewPerClassError(f"class {cls} has no training rows after the split")
    return train, test


def split_train_test(fm: FeatureMatrix, labels, plan: CvPlan):
    """Split a feature matrix into (train, test) FeatureMatrix pair."""
    labels = np.asarray(labels)
    train, test = split_indices(labels, plan)
    mk = lambda idx: FeatureMatrix(
        feature_names=fm.feature_names, values=fm.values[idx], labels=labels[idx]
    )
    return mk(train), mk(test)


def fold_indices(labels, plan: CvPlan) -> list[np.ndarray]:
    """Disjoint covering folds, stratified to within one example per class."""
    labels = np.asarray(labels)
    rng = np.random.default_rng(np.random.SeedSequence([plan.seeds[0], 1]))
    folds: list[list[int]] = [[] for _ in range(plan.folds)]
    if plan.stratified:
        for cls in np.unique(labels):
            idx = np.flatnonzero(labels == cls)
            if idx.size < plan.folds:
                raise TooFewPerClassError(f"class {cls} has fewer rows than folds")
            for f, chunk in enumerate(np.array_split(rng.permutation(idx), plan.folds)):
                folds[f].extend(chunk.tolist())
    else:
        for f, chunk in enumerate(np.array_split(rng.permutation(labels.size), plan.folds)):
            folds[f].extend(chunk.tolist())
    return [np.asarray(sorted(f), dtype=np.int64) for f in folds]


# --- pipeline evaluation --------------------------------------------------------------

@dataclass(frozen=True)
class PipelineSpec:
    """One grid point: a scorer, a selection strategy, and a classifier."""

    scorer: ScorerKind
    selection: SelectionConfig
    classifier: str = "gnb"
    knn_neighbors: int = 5

    def __post_init__(self):
        if self.classifier not in ("gnb", "knn"):
            raise ValueError(f"unknown classifier {self.classifier!r}")

    def descriptor(self) -> dict:
        d = {
            "scorer": self.scorer.descriptor(),
            "selection": self.selection.descriptor(),
            "classifier": self.classifier,
        }
        if self.classifier == "knn":
            d["knn_neighbors"] = self.knn_neighbors
        return d


@dataclass(frozen=True)
class FoldResult:
    fold: int
    auroc: float
    selection: SelectionResult


def _fit_predict(spec: PipelineSpec, x_train, y_train, x_eval) -> np.ndarray:
    if spec.classifier == "gnb":
        model = train_gnb(x_train, y_train)
        return gnb_predict_proba(model, x_eval)
    model = train_knn(x_train, y_train, n_neighbors=min(spec.knn_neighbors, x_train.shape[0]))
    return knn_predict_proba(model, x_eval)


def _select_on(fm: FeatureMatrix, labels, spec: PipelineSpec, n_jobs: int = 1) -> SelectionResult:
    needs_red = spec.selection.strategy == "mrmr"
    scores = score_features(fm, labels, spec.scorer, with_redundancy=needs_red, n_jobs=n_jobs)
    return run_selection(scores, spec.selection)


def cross_validate(fm: FeatureMatrix, labels, spec: PipelineSpec, plan: CvPlan) -> list[FoldResult]:
    """Flat k-fold CV; scoring and selection are re-fit per fold on fold-train rows only."""
    labels = np.asarray(labels)
    folds = fold_indices(labels, plan)
    all_idx = np.arange(labels.size)
    results = []
    for f, val_idx in enumerate(folds):
        train_idx = np.setdiff1d(all_idx, val_idx)
        sub = FeatureMatrix(feature_names=fm.feature_names, values=fm.values[train_idx])
        selection = _select_on(sub, labels[train_idx], spec)
        sel = list(selection.selected)
        if sel:
            proba = _fit_predict(
                spec, fm.values[np.ix_(train_idx, sel)], labels[train_idx],
                fm.values[np.ix_(val_idx, sel)],
            )
        else:
            # empty selection (possible under std_dev): uninformative constant score
            proba = np.full(val_idx.size, 0.5)
        results.append(FoldResult(fold=f, auroc=auroc(proba, labels[val_idx]), selection=selection))
    return results


@dataclass(frozen=True)
class EvalReport:
    test_auroc: float
    train_auroc: float
    test_auprc: float
    train_auprc: float
    fold_aurocs: tuple[float, ...]
    chosen: dict
    selection: SelectionResult
    runtime_seconds: float

    def __post_init__(self):
        for v in (self.test_auroc, self.train_auroc, self.test_auprc, self.train_auprc):
            if not (0.0 <= v <= 1.0):
                raise ValueError(f"metric {v} outside [0, 1]")

    def to_dict(self) -> dict:
        return {
            "test_auroc": self.test_auroc,
            "train_auroc": self.train_auroc,
            "delta_auroc": self.test_auroc - self.train_auroc,
            "test_auprc": self.test_auprc,
            "train_auprc": self.train_auprc,
            "delta_auprc": self.test_auprc - self.train_auprc,
            "fold_aurocs": list(self.fold_aurocs),
            "mean_fold_auroc": float(np.mean(self.fold_aurocs)),
            "chosen": self.chosen,
            "selected_features": [r.name for r in self.selection.trace],
            "selection_trace": self.selection.to_records(),
            "runtime_seconds": self.runtime_seconds,
        }


def grid_search(
    train_fm: FeatureMatrix,
    train_labels,
    test_fm: FeatureMatrix,
    test_labels,
    grid: list[PipelineSpec],
    plan: CvPlan,
    n_jobs: int = 1,
) -> tuple[PipelineSpec, EvalReport]:
    """Pick the grid point with the best mean validation AUROC (ties: first in
    grid order), refit it on the full training split, report train/test metrics."""
    if not grid:
        raise ValueError("grid must be non-empty")
    start = time.perf_counter()
    train_labels = np.asarray(train_labels)
    test_labels = np.asarray(test_labels)

    def evaluate(spec: PipelineSpec) -> list[FoldResult]:
        return cross_validate(train_fm, train_labels, spec, plan)

    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            fold_results = list(pool.map(evaluate, grid))
    else:
        fold_results = [evaluate(spec) for spec in grid]

    means = [float(np.mean([fr.auroc for fr in frs])) for frs in fold_results]
    best = 0
    for i in range(1, len(grid)):
        if means[i] > means[best]:
            best = i
    spec = grid[best]

    selection = _select_on(train_fm, train_labels, spec, n_jobs=n_jobs)
    sel = list(selection.selected)
    if sel:
        x_tr = train_fm.values[:, sel]
        x_te = test_fm.values[:, sel]
        p_tr = _fit_predict(spec, x_tr, train_labels, x_tr)
        p_te = _fit_predict(spec, x_tr, train_labels, x_te)
    else:
        p_tr = np.full(train_labels.size, 0.5)
        p_te = np.full(test_labels.size, 0.5)
    report = EvalReport(
        test_auroc=auroc(p_te, test_labels),
        train_auroc=auroc(p_tr, train_labels),
        test_auprc=auprc(p_te, test_labels),
        train_auprc=auprc(p_tr, train_labels),
        fold_aurocs=tuple(fr.auroc for fr in fold_results[best]),
        chosen=spec.descriptor(),
        selection=selection,
        runtime_seconds=time.perf_counter() - start,
    )
    return spec, report
