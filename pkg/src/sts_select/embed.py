"""Name embeddings and semantic-similarity scores.

Two embedding sources are supported: a sentence-level store (JSONL file, one
vector per feature/target name) and a word-vector table (word2vec text format)
pooled by averaging token vectors. Both feed cosine-similarity relevance
(feature name vs. target name) and redundancy (feature name vs. feature name)
scores.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BadHeaderError,
    CountMismatchError,
    DimMismatchError,
    DuplicateNameError,
    EmptyNameError,
    LengthMismatchError,
    UnknownNameError,
    ZeroVectorError,
)

STORE_FORMAT = "sts-embed"
STORE_VERSION = 1

_TOKEN_SPLIT = re.compile(r"[^a-z0-9]+")


@dataclass(frozen=True)
class EmbeddingStore:
    """Map from feature/target name to a fixed-dimension vector."""

    dim: int
    entries: dict[str, np.ndarray]
    provenance: str = ""

    def __post_init__(self):
        for name, vec in self.entries.items():
            if vec.shape != (self.dim,):
                raise DimMismatchError(
                    f"entry {name!r} has length {vec.shape[0]}, expected {self.dim}"
                )
            if not np.any(vec):
                raise ZeroVectorError(f"entry {name!r} is the all-zero vector")

    def __contains__(self, name: str) -> bool:
        return name in self.entries

    def vector(self, name: str) -> np.ndarray:
        try:
            return self.entries[name]
        except KeyError:
            raise UnknownNameError(f"name {name!r} not in embedding store") from None


@dataclass(frozen=True)
class WordVectorTable:
    """Token-level vectors; names are embedded by mean-pooling their tokens."""

    dim: int
    entries: dict[str, np.ndarray]

    def __post_init__(self):
        for tok, vec in self.entries.items():
            if vec.shape != (self.dim,):
                raise DimMismatchError(
                    f"token {tok!r} has length {vec.shape[0]}, expected {self.dim}"
                )


@dataclass(frozen=True)
class StsScoreConfig:
    """How feature/target names resolve to similarity scores.

    ``target_names``: one or more target-question names; per-feature relevance
    is the mean cosine over all of them. ``strip_onehot_suffix``: when true,
    one-hot names "<question>_<category>" are looked up by the question part
    only (text after the last underscore is dropped).
    """

    target_names: tuple[str, ...] = ("target",)
    strip_onehot_suffix: bool = False

    def __post_init__(self):
        if not self.target_names:
            raise ValueError("target_names must be non-empty")
        object.__setattr__(self, "target_names", tuple(self.target_names))


def load_embedding_store(path) -> EmbeddingStore:
    """Read the JSONL store format (header line, then one record per name)."""
    with open(path, encoding="utf-8") as fh:
        first = fh.readline()
        if not first.strip():
            raise BadHeaderError(f"{path}: empty file, expected header line")
        try:
            header = json.loads(first)
        except json.JSONDecodeError as exc:
            raise BadHeaderError(f"{path}: line 1: invalid JSON header: {exc}") from exc
        if not isinstance(header, dict) or header.get("format") != STORE_FORMAT:
            raise BadHeaderError(f"{path}: line 1: not a {STORE_FORMAT!r} header")
        if header.get("version") != STORE_VERSION:
            raise BadHeaderError(f"{path}: line 1: unsupported version {header.get('version')!r}")
        dim = header.get("dim")
        if not isinstance(dim, int) or dim < 1:
            raise BadHeaderError(f"{path}: line 1: bad dim {dim!r}")

        entries: dict[str, np.ndarray] = {}
        for lineno, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise BadHeaderError(f"{path}: line {lineno}: invalid JSON: {exc}") from exc
            name = rec.get("name")
            vec = rec.get("vector")
            if not isinstance(name, str) or not isinstance(vec, list):
                raise BadHeaderError(f"{path}: line {lineno}: record needs 'name' and 'vector'")
            if name in entries:
                raise DuplicateNameError(f"{path}: line {lineno}: duplicate name {name!r}")
            arr = np.asarray(vec, dtype=np.float64)
            if arr.shape != (dim,):
                raise DimMismatchError(
                    f"{path}: line {lineno}: vector length {arr.shape[0]} != dim {dim}"
                )
            if not np.any(arr):
                raise ZeroVectorError(f"{path}: line {lineno}: all-zero vector for {name!r}")
            entries[name] = arr
    return EmbeddingStore(dim=dim, entries=entries, provenance=str(header.get("provenance", "")))


def save_embedding_store(store: EmbeddingStore, path) -> None:
    """Write the JSONL store format; floats round-trip exactly."""
    with open(path, "w", encoding="utf-8") as fh:
        header = {
            "format": STORE_FORMAT,
            "version": STORE_VERSION,
            "dim": store.dim,
            "provenance": store.provenance,
        }
        fh.write(json.dumps(header) + "\n")
        for name, vec in store.entries.items():
            fh.write(json.dumps({"name": name, "vector": [float(x) for x in vec]}) + "\n")


def load_word_vectors(path) -> WordVectorTable:
    """Read word2vec text format: "<count> <dim>" then one token + vector per line."""
    with open(path, encoding="utf-8") as fh:
        first = fh.readline().split()
        if len(first) != 2:
            raise BadHeaderError(f"{path}: first line must be '<count> <dim>'")
        try:
            count, dim = int(first[0]), int(first[1])
        except ValueError as exc:
            raise BadHeaderError(f"{path}: first line must be '<count> <dim>'") from exc
        entries: dict[str, np.ndarray] = {}
        for lineno, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            parts = line.rstrip("\n").split(" ")
            token = parts[0]
            vec = np.asarray([float(x) for x in parts[1:] if x != ""], dtype=np.float64)
            if vec.shape != (dim,):
                raise DimMismatchError(
                    f"{path}: line {lineno}: vector length {vec.shape[0]} != dim {dim}"
                )
            entries[token] = vec
    if len(entries) != count:
        raise CountMismatchError(f"{path}: declared {count} entries, found {len(entries)}")
    return WordVectorTable(dim=dim, entries=entries)


def tokenize(name: str) -> list[str]:
    """Lowercase and split on non-alphanumeric runs."""
    return [t for t in _TOKEN_SPLIT.split(name.lower()) if t]


def pool_name(table: WordVectorTable, name: str) -> np.ndarray:
    """Mean of in-vocabulary token vectors; all-OOV names give the zero sentinel."""
    tokens = tokenize(name)
    if not tokens:
        raise EmptyNameError(f"name {name!r} tokenizes to nothing")
    vecs = [table.entries[t] for t in tokens if t in table.entries]
    if not vecs:
        return np.zeros(table.dim)
    return np.mean(vecs, axis=0)


def cosine(u, v) -> float:
    """Cosine similarity in [-1, 1]; zero-norm inputs score 0 by convention."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise LengthMismatchError(f"vector lengths differ: {u.shape[0]} vs {v.shape[0]}")
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        return 0.0
    if np.array_equal(u, v):
        return 1.0
    return float(np.clip(np.dot(u, v) / (nu * nv), -1.0, 1.0))


def _lookup_name(source, name: str, strip_suffix: bool) -> np.ndarray:
    if strip_suffix and "_" in name:
        name = name.rsplit("_", 1)[0]
    if isinstance(source, EmbeddingStore):
        return source.vector(name)
    return pool_name(source, name)


def sts_relevance(source, feature_names, cfg: StsScoreConfig) -> np.ndarray:
    """Per-feature mean cosine to the target name(s)."""
    target_vecs = [_lookup_name(source, t, strip_suffix=False) for t in cfg.target_names]
    out = np.empty(len(feature_names))
    for i, fname in enumerate(feature_names):
        fv = _lookup_name(source, fname, cfg.strip_onehot_suffix)
        out[i] = float(np.mean([cosine(fv, tv) for tv in target_vecs]))
    return out


def sts_redundancy(source, feature_names, cfg: StsScoreConfig | None = None) -> np.ndarray:
    """Symmetric feature-name x feature-name cosine matrix, each pair computed once."""
    strip = cfg.strip_onehot_suffix if cfg is not None else False
    vecs = [_lookup_name(source, f, strip) for f in feature_names]
    n = len(vecs)
    m = np.zeros((n, n))
    for i in range(n):
        m[i, i] = 1.0 if np.any(vecs[i]) else 0.0
        for j in range(i + 1, n):
            c = cosine(vecs[i], vecs[j])
            m[i, j] = c
            m[j, i] = c
    return m
