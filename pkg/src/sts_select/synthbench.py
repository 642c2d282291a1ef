"""Synthetic survey-like benchmark with planted semantic structure.

A handful of "relevant" features get (a) values that shift with the label and
(b) names whose embeddings sit near the target-name embedding; the rest are
pure noise with isotropic random name embeddings. Selection quality is then
measurable as the fraction of planted features recovered, without any real
survey data. Small training sets with a large test pool make selection
overfitting visible.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .embed import EmbeddingStore, save_embedding_store
from .errors import BadSpecError
from .selection import SelectionResult
from .tabular import FeatureMatrix

TARGET_NAME = "target"


@dataclass(frozen=True)
class SynthSpec:
    dim: int = 32
    n_relevant: int = 10
    n_irrelevant: int = 150
    noise_epsilon: float = 0.3
    n_train: int = 100
    n_test: int = 2000
    effect_size: float = 1.0
    positive_rate: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.n_relevant < 1:
            raise BadSpecError("n_relevant must be >= 1")
        if self.n_irrelevant < 0:
            raise BadSpecError("n_irrelevant must be >= 0")
        if self.noise_epsilon < 0:
            raise BadSpecError("noise_epsilon must be >= 0")
        if self.dim < 1:
            raise BadSpecError("dim must be >= 1")
        if self.n_train < 1 or self.n_test < 1:
            raise BadSpecError("n_train and n_test must be >= 1")
        if not (0.0 < self.positive_rate < 1.0):
            raise BadSpecError("positive_rate must be in (0, 1)")

    @property
    def n_features(self) -> int:
        return self.n_relevant + self.n_irrelevant


def default_spec(seed: int = 0) -> SynthSpec:
    return SynthSpec(seed=seed)


def imbalanced_spec(seed: int = 0) -> SynthSpec:
    """Class skew preset mirroring rare-outcome survey data."""
    return SynthSpec(seed=seed, positive_rate=0.04)


@dataclass(frozen=True)
class SynthOutput:
    train: FeatureMatrix  # labels attached
    test: FeatureMatrix
    store: EmbeddingStore
    planted_indices: frozenset[int]
    target_name: str
    spec: SynthSpec


def _unit(v: np.ndarray) -> np.ndarray:
    return v / np.linalg.norm(v)


def generate(spec: SynthSpec) -> SynthOutput:
    """Deterministic per seed; train and test come from the same conditional model.

    Planted names embed as normalize(target + epsilon * u) with u a random unit
    direction, giving expected cosine ~ 1/sqrt(1 + epsilon^2) to the target.
    Planted feature values are standard Gaussians shifted by effect_size when
    the label is positive; labels are drawn Bernoulli(positive_rate) first.
    """
    rng = np.random.default_rng(spec.seed)
    d = spec.n_features
    names = tuple(f"f{j:03d}" for j in range(d))

    target = _unit(rng.standard_normal(spec.dim))
    planted = frozenset(int(i) for i in rng.permutation(d)[: spec.n_relevant])
    entries: dict[str, np.ndarray] = {}
    for j in range(d):
        if j in planted:
            u = _unit(rng.standard_normal(spec.dim))
            if spec.noise_epsilon == 0.0:
                entries[names[j]] = target.copy()
            else:
                entries[names[j]] = _unit(target + spec.noise_epsilon * u)
        else:
            entries[names[j]] = _unit(rng.standard_normal(spec.dim))
    entries[TARGET_NAME] = target
    store = EmbeddingStore(
        dim=spec.dim, entries=entries, provenance=f"synthbench seed={spec.seed}"
    )

    def draw(n: int) -> FeatureMatrix:
        labels = (rng.random(n) < spec.positive_rate).astype(np.int64)
        x = rng.standard_normal((n, d))
        for j in sorted(planted):
            x[:, j] += spec.effect_size * labels
        return FeatureMatrix(feature_names=names, values=x, labels=labels)

    train = draw(spec.n_train)
    test = draw(spec.n_test)
    return SynthOutput(
        train=train,
        test=test,
        store=store,
        planted_indices=planted,
        target_name=TARGET_NAME,
        spec=spec,
    )


def planted_recovery(selection: SelectionResult, planted) -> float:
    """Fraction of planted features present in the selection."""
    planted = set(planted)
    if not planted:
        return 0.0
    return len(set(selection.selected) & planted) / len(planted)


def write_bundle(out: SynthOutput, directory) -> dict[str, str]:
    """Export CSV + schema + embedding store + planted indices so the synthetic
    data flows through the ordinary ingest/score/select/eval commands.

    The binary label is carried by four synthetic outcome columns chosen so the
    standard label rule reproduces it exactly: q1=q2="Yes" and q3 = 10 * label,
    q4 = 0 make (q1 and q2) and (q3 >= 3 or q4 >= 3) equal the label.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    feature_names = list(out.train.feature_names)
    csv_path = directory / "synth.csv"
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(feature_names + ["pid", "q1", "q2", "q3", "q4"])
        row_id = 0
        for fm in (out.train, out.test):
            for i in range(fm.rows):
                label = int(fm.labels[i])
                writer.writerow(
                    [repr(float(v)) for v in fm.values[i]]
                    + [f"p{row_id:05d}", "Yes", "Yes", str(10 * label), "0"]
                )
                row_id += 1

    schema = {
        "participant_key": "pid",
        "columns": {
            **{name: "numeric" for name in feature_names},
            "pid": "categorical",
            "q1": "categorical",
            "q2": "categorical",
            "q3": "numeric",
            "q4": "numeric",
        },
        "label_rule": {"q1": "q1", "q2": "q2", "q3": "q3", "q4": "q4", "threshold": 3},
        "null_tokens": [""],
        "drop_name_patterns": [],
        "max_categorical_unique": 5,
    }
    schema_path = directory / "schema.json"
    with open(schema_path, "w", encoding="utf-8") as fh:
        json.dump(schema, fh, indent=2, sort_keys=True)
        fh.write("\n")

    store_path = directory / "embeddings.jsonl"
    save_embedding_store(out.store, store_path)

    planted_path = directory / "planted.json"
    with open(planted_path, "w", encoding="utf-8") as fh:
        json.dump(
            {
                "planted_indices": sorted(out.planted_indices),
                "planted_names": [feature_names[j] for j in sorted(out.planted_indices)],
                "target_name": out.target_name,
                "n_train": out.spec.n_train,
                "n_test": out.spec.n_test,
                "seed": out.spec.seed,
            },
            fh,
            indent=2,
            sort_keys=True,
        )
        fh.write("\n")
    return {
        "csv": str(csv_path),
        "schema": str(schema_path),
        "embeddings": str(store_path),
        "planted": str(planted_path),
    }
