"""Feature selection strategies over a ScoreSet: top-N, mean + k*std threshold,
and greedy mRMR (relevance minus mean redundancy to the already-selected set).

All strategies are deterministic; score ties break toward the lower feature
index. Each emits a per-step trace mirroring the (score, relevance,
redundancy) breakdown of the greedy objective.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import MissingRedundancyError, NTooLargeError, TooFewFeaturesError
from .scoring import ScoreSet


@dataclass(frozen=True)
class SelectionConfig:
    """strategy: "top_n" | "std_dev" | "mrmr". n applies to top_n/mrmr, k to std_dev.

    Defaults follow the small-survey setting: n=20 (roughly an eighth of the
    features), k=1.0. Word-vector similarity scores have low variance; k=0.3
    is the sensible threshold there.
    """

    strategy: str
    n: int = 20
    k: float = 1.0

    def __post_init__(self):
        if self.strategy not in ("top_n", "std_dev", "mrmr"):
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if self.strategy in ("top_n", "mrmr") and self.n < 1:
            raise ValueError("n must be >= 1")

    def descriptor(self) -> dict:
        d = {"strategy": self.strategy}
        if self.strategy in ("top_n", "mrmr"):
            d["n"] = self.n
        else:
            d["k"] = self.k
        return d


@dataclass(frozen=True)
class StepRecord:
    step: int
    index: int
    name: str
    score: float
    relevance: float
    redundancy: float


@dataclass(frozen=True)
class SelectionResult:
    selected: tuple[int, ...]
    trace: tuple[StepRecord, ...]

    def __post_init__(self):
        if len(set(self.selected)) != len(self.selected):
            raise ValueError("selected indices must be unique")

    def to_records(self) -> list[dict]:
        return [
            {
                "step": r.step,
                "feature_name": r.name,
                "score": r.score,
                "relevance": r.relevance,
                "redundancy": r.redundancy,
            }
            for r in self.trace
        ]

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_records(), fh, indent=2, sort_keys=True)
            fh.write("\n")


def _name(names, idx: int) -> str:
    return names[idx] if names is not None else f"f{idx}"


def _ranked_indices(relevance: np.ndarray) -> np.ndarray:
    # descending relevance, ties toward the lower index
    return np.lexsort((np.arange(relevance.size), -relevance))


def select_top_n(relevance, n: int, names=None) -> SelectionResult:
    """The n largest relevance scores, descending, ties toward the lower index."""
    relevance = np.asarray(relevance, dtype=np.float64)
    if n > relevance.size:
        raise NTooLargeError(f"n={n} exceeds feature count {relevance.size}")
    order = _ranked_indices(relevance)[:n]
    trace = tuple(
        StepRecord(
            step=s + 1,
            index=int(i),
            name=_name(names, int(i)),
            score=float(relevance[i]),
            relevance=float(relevance[i]),
            redundancy=0.0,
        )
        for s, i in enumerate(order)
    )
    return SelectionResult(selected=tuple(int(i) for i in order), trace=trace)


def select_std_dev(relevance, k: float, names=None) -> SelectionResult:
    """All features whose relevance strictly exceeds mean + k * population std.

    An empty selection is a legitimate outcome (e.g. constant scores, where
    nothing strictly exceeds the mean).
    """
    relevance = np.asarray(relevance, dtype=np.float64)
    if relevance.size < 2:
        raise TooFewFeaturesError(f"need >= 2 features, got {relevance.size}")
    cut = float(np.mean(relevance)) + k * float(np.std(relevance))
    order = [int(i) for i in _ranked_indices(relevance) if relevance[i] > cut]
    trace = tuple(
        StepRecord(
            step=s + 1,
            index=i,
            name=_name(names, i),
            score=float(relevance[i]),
            relevance=float(relevance[i]),
            redundancy=0.0,
        )
        for s, i in enumerate(order)
    )
    return SelectionResult(selected=tuple(order), trace=trace)


def select_mrmr(scores: ScoreSet, n: int) -> SelectionResult:
    """Greedy: step 1 takes the max relevance; later steps maximize
    relevance(f) minus the mean redundancy of f to the selected set.

    Step scores can legitimately go negative (a candidate more redundant than
    relevant) and are never clamped. The redundancy diagonal is never read.
    """
    if scores.redundancy is None:
        raise MissingRedundancyError("mRMR requires a redundancy matrix")
    relevance = scores.relevance
    red = scores.redundancy
    count = relevance.size
    if n > count:
        raise NTooLargeError(f"n={n} exceeds feature count {count}")
    names = scores.feature_names
    selected: list[int] = []
    trace: list[StepRecord] = []
    remaining = list(range(count))
    for step in range(1, n + 1):
        best_idx = -1
        best_score = -np.inf
        best_red = 0.0
        for f in remaining:
            mean_red = float(red[f, selected].mean()) if selected else 0.0
            score = float(relevance[f]) - mean_red
            if score > best_score:
                best_idx, best_score, best_red = f, score, mean_red
        selected.append(best_idx)
        remaining.remove(best_idx)
        trace.append(
            StepRecord(
                step=step,
                index=best_idx,
                name=names[best_idx],
                score=best_score,
                relevance=float(relevance[best_idx]),
                redundancy=best_red,
            )
        )
    return SelectionResult(selected=tuple(selected), trace=tuple(trace))


def run_selection(scores: ScoreSet, config: SelectionConfig) -> SelectionResult:
    if config.strategy == "top_n":
        return select_top_n(scores.relevance, config.n, names=scores.feature_names)
    if config.strategy == "std_dev":
        return select_std_dev(scores.relevance, config.k, names=scores.feature_names)
    return select_mrmr(scores, config.n)
