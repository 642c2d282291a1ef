"""Relevance and redundancy scoring: kNN mutual information, name similarity,
and their weighted combination.

The continuous-continuous estimator is the classic kNN one (variant #1,
Chebyshev metric in the joint space); the feature-label estimator is its
discrete-target counterpart where the k-th within-class neighbor distance
defines a counting radius over all points. Inputs are standardized (divided by
their population std) and perturbed with tiny deterministic noise before the
neighbor search: one-hot and integer-coded columns are full of ties, and tied
distances degenerate the neighbor counts. The noise stream is derived from the
standardized values themselves, so a vector gets the same jitter regardless of
argument position or thread, making mi_continuous(x, y) == mi_continuous(y, x)
exact and all score matrices independent of worker count.
"""
from __future__ import annotations

import hashlib
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree
from scipy.special import digamma

from .embed import EmbeddingStore, StsScoreConfig, WordVectorTable, sts_redundancy, sts_relevance
from .errors import (
    BadRangeError,
    DegenerateLabelsError,
    LengthMismatchError,
    TooFewSamplesError,
)
from .tabular import FeatureMatrix

__all__ = [
    "MiConfig",
    "MiScorer",
    "StsScorer",
    "CombinedScorer",
    "ScoreSet",
    "digamma",
    "mi_continuous",
    "mi_discrete_target",
    "relevance_scores",
    "redundancy_matrix",
    "alpha_grid",
]


@dataclass(frozen=True)
class MiConfig:
    n_neighbors: int = 3
    noise_scale: float = 1e-10
    seed: int = 424989

    def __post_init__(self):
        if self.n_neighbors < 1:
            raise ValueError("n_neighbors must be >= 1")
        if self.noise_scale < 0:
            raise ValueError("noise_scale must be >= 0")


@dataclass(frozen=True)
class MiScorer:
    config: MiConfig = MiConfig()

    def descriptor(self) -> dict:
        return {
            "kind": "mi",
            "n_neighbors": self.config.n_neighbors,
            "noise_scale": self.config.noise_scale,
            "seed": self.config.seed,
        }


@dataclass(frozen=True)
class StsScorer:
    source: EmbeddingStore | WordVectorTable
    config: StsScoreConfig

    def descriptor(self) -> dict:
        prov = self.source.provenance if isinstance(self.source, EmbeddingStore) else "word-vectors"
        return {
            "kind": "sts",
            "targets": list(self.config.target_names),
            "strip_onehot_suffix": self.config.strip_onehot_suffix,
            "provenance": prov,
        }


@dataclass(frozen=True)
class CombinedScorer:
    """Statistical + semantic: relevance/redundancy = MI + alpha * STS."""

    alpha: float
    mi: MiScorer = MiScorer()
    sts: StsScorer = None

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError("alpha must be > 0")
        if self.sts is None:
            raise ValueError("combined scorer needs an STS scorer")

    def descriptor(self) -> dict:
        return {
            "kind": "combined",
            "alpha": self.alpha,
            "mi": self.mi.descriptor(),
            "sts": self.sts.descriptor(),
        }


ScorerKind = MiScorer | StsScorer | CombinedScorer


@dataclass(frozen=True)
class ScoreSet:
    """Relevance vector plus optional symmetric redundancy matrix."""

    feature_names: tuple[str, ...]
    relevance: np.ndarray
    redundancy: np.ndarray | None = None
    scorer: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "feature_names", tuple(self.feature_names))
        rel = np.asarray(self.relevance, dtype=np.float64)
        if rel.shape != (len(self.feature_names),):
            raise ValueError("relevance length must equal feature count")
        object.__setattr__(self, "relevance", rel)
        if self.redundancy is not None:
            red = np.asarray(self.redundancy, dtype=np.float64)
            n = len(self.feature_names)
            if red.shape != (n, n):
                raise ValueError(f"redundancy shape {red.shape}, expected ({n}, {n})")
            if not np.array_equal(red, red.T):
                raise ValueError("redundancy matrix must be symmetric")
            object.__setattr__(self, "redundancy", red)
        kind = self.scorer.get("kind")
        if kind == "mi" and np.any(rel < 0):
            raise ValueError("MI relevance must be clamped to >= 0")
        if kind == "sts" and (np.any(rel < -1) or np.any(rel > 1)):
            raise ValueError("STS relevance must lie in [-1, 1]")

    def to_dict(self) -> dict:
        d = {
            "feature_names": list(self.feature_names),
            "relevance": [float(x) for x in self.relevance],
            "scorer": self.scorer,
        }
        if self.redundancy is not None:
            d["redundancy"] = [float(x) for x in self.redundancy.ravel()]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ScoreSet":
        names = tuple(d["feature_names"])
        red = None
        if "redundancy" in d and d["redundancy"] is not None:
            n = len(names)
            red = np.asarray(d["redundancy"], dtype=np.float64).reshape(n, n)
        return cls(
            feature_names=names,
            relevance=np.asarray(d["relevance"], dtype=np.float64),
            redundancy=red,
            scorer=dict(d.get("scorer", {})),
        )

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "ScoreSet":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


# --- kNN mutual information ----------------------------------------------------

def _standardize(v: np.ndarray) -> np.ndarray:
    sd = v.std()
    return v / sd if sd > 0 else v


def _jittered(v: np.ndarray, cfg: MiConfig) -> np.ndarray:
    """Add tiny tie-breaking noise seeded from the vector's own content."""
    scale = cfg.noise_scale * float(np.max(np.abs(v))) if v.size else 0.0
    if scale == 0.0:
        return v
    content = int.from_bytes(hashlib.blake2b(v.tobytes(), digest_size=8).digest(), "little")
    rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, content]))
    return v + scale * rng.standard_normal(v.shape)


def mi_continuous(x, y, cfg: MiConfig = MiConfig()) -> float:
    """kNN mutual information between two continuous vectors, in nats (>= 0).

    psi(k) + psi(N) - mean_i[psi(n_x(i)+1) + psi(n_y(i)+1)], where n_x, n_y
    count points strictly within the i-th point's k-th-neighbor Chebyshev
    distance in the joint space. Constant inputs short-circuit to 0.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise LengthMismatchError(f"shapes {x.shape} and {y.shape} must be equal 1-D")
    n = x.size
    k = cfg.n_neighbors
    if n < k + 1:
        raise TooFewSamplesError(f"need at least {k + 1} samples, got {n}")
    if np.ptp(x) == 0 or np.ptp(y) == 0:
        return 0.0
    x = _jittered(_standardize(x), cfg)
    y = _jittered(_standardize(y), cfg)
    joint = np.column_stack([x, y])
    dist, _ = cKDTree(joint).query(joint, k=k + 1, p=np.inf)
    radius = np.nextafter(dist[:, k], 0)
    nx = cKDTree(x[:, None]).query_ball_point(x[:, None], radius, p=np.inf, return_length=True) - 1
    ny = cKDTree(y[:, None]).query_ball_point(y[:, None], radius, p=np.inf, return_length=True) - 1
    mi = digamma(k) + digamma(n) - float(np.mean(digamma(nx + 1) + digamma(ny + 1)))
    return max(0.0, float(mi))


def mi_discrete_target(x, labels, cfg: MiConfig = MiConfig()) -> float:
    """kNN mutual information between a continuous vector and a discrete label.

    For each point, the k_i-th neighbor distance within its own class (with
    k_i = min(k, class size - 1)) defines a radius; m_i counts the points of
    any class strictly within it (the point itself included). Singleton-class
    points are skipped. Result in nats, clamped to >= 0.
    """
    x = np.asarray(x, dtype=np.float64)
    labels = np.asarray(labels)
    if x.shape != labels.shape or x.ndim != 1:
        raise LengthMismatchError(f"shapes {x.shape} and {labels.shape} must be equal 1-D")
    if x.size < 2:
        raise TooFewSamplesError(f"need at least 2 samples, got {x.size}")
    classes, counts = np.unique(labels, return_counts=True)
    usable = classes[counts > 1]
    if usable.size < 2:
        raise DegenerateLabelsError("labels must contain at least two classes of size >= 2")
    keep = np.isin(labels, usable)
    x, labels = x[keep], labels[keep]
    n = x.size
    if np.ptp(x) == 0:
        return 0.0
    x = _jittered(_standardize(x), cfg)

    radius = np.empty(n)
    class_size = np.empty(n)
    k_eff = np.empty(n)
    for cls in usable:
        mask = labels == cls
        cnt = int(mask.sum())
        kc = min(cfg.n_neighbors, cnt - 1)
        pts = x[mask, None]
        d, _ = cKDTree(pts).query(pts, k=kc + 1, p=np.inf)
        radius[mask] = np.nextafter(d[:, kc], 0)
        class_size[mask] = cnt
        k_eff[mask] = kc
    m = cKDTree(x[:, None]).query_ball_point(x[:, None], radius, p=np.inf, return_length=True)
    mi = (
        digamma(n)
        - float(np.mean(digamma(class_size)))
        + float(np.mean(digamma(k_eff)))
        - float(np.mean(digamma(m)))
    )
    return max(0.0, float(mi))


# --- score set construction ------------------------------------------------------

def relevance_scores(fm: FeatureMatrix, labels, scorer: ScorerKind) -> np.ndarray:
    """Feature-to-target scores under any scorer kind."""
    if isinstance(scorer, MiScorer):
        labels = np.asarray(labels)
        return np.asarray(
            [mi_discrete_target(fm.values[:, j], labels, scorer.config) for j in range(len(fm.feature_names))]
        )
    if isinstance(scorer, StsScorer):
        return sts_relevance(scorer.source, fm.feature_names, scorer.config)
    mi = relevance_scores(fm, labels, scorer.mi)
    sts = relevance_scores(fm, labels, scorer.sts)
    return mi + scorer.alpha * sts


def redundancy_matrix(fm: FeatureMatrix, scorer: ScorerKind, n_jobs: int = 1) -> np.ndarray:
    """Symmetric feature-to-feature scores; each unordered pair computed once.

    The MI diagonal holds each feature's self-estimate but selection never
    consults it. Pairs may evaluate in parallel: results land in disjoint
    cells and the jitter stream is content-derived, so the matrix is identical
    at any worker count.
    """
    if isinstance(scorer, StsScorer):
        return sts_redundancy(scorer.source, fm.feature_names, scorer.config)
    if isinstance(scorer, CombinedScorer):
        mi = redundancy_matrix(fm, scorer.mi, n_jobs=n_jobs)
        sts = redundancy_matrix(fm, scorer.sts)
        return mi + scorer.alpha * sts
    cols = fm.values
    n = len(fm.feature_names)
    out = np.zeros((n, n))
    pairs = [(i, j) for i in range(n) for j in range(i, n)]

    def compute(pair):
        i, j = pair
        return i, j, mi_continuous(cols[:, i], cols[:, j], scorer.config)

    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            results = list(pool.map(compute, pairs))
    else:
        results = [compute(p) for p in pairs]
    for i, j, v in results:
        out[i, j] = v
        out[j, i] = v
    return out


def score_features(
    fm: FeatureMatrix, labels, scorer: ScorerKind, with_redundancy: bool = False, n_jobs: int = 1
) -> ScoreSet:
    """Bundle relevance (and optionally redundancy) into a ScoreSet."""
    redundancy = redundancy_matrix(fm, scorer, n_jobs=n_jobs) if with_redundancy else None
    return ScoreSet(
        feature_names=fm.feature_names,
        relevance=relevance_scores(fm, labels, scorer),
        redundancy=redundancy,
        scorer=scorer.descriptor(),
    )


def alpha_grid(lo: float = 1e-2, hi: float = 1e2, n: int = 30) -> np.ndarray:
    """n geometrically spaced weights with exact endpoints lo and hi."""
    if not (0 < lo < hi):
        raise BadRangeError(f"need 0 < lo < hi, got lo={lo}, hi={hi}")
    if n < 2:
        raise BadRangeError(f"need n >= 2, got {n}")
    grid = np.geomspace(lo, hi, n)
    grid[0] = lo
    grid[-1] = hi
    return grid
