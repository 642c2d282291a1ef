"""Survey-style tabular ingestion and preprocessing.

Pipeline order: load CSV -> collapse repeated responses per participant ->
derive the binary outcome label (dropping its source columns) -> drop the
participant key -> filter columns -> fit/apply imputation + encoding + scaling
to get a dense numeric feature matrix.

All values here are immutable after construction and safe to share. Fitted
statistics (means, norms, category lists) come from training data only.
"""
from __future__ import annotations

import csv
import enum
import re
import warnings
from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np

from .errors import (
    EmptyColumnError,
    MalformedCsvError,
    MissingLabelColumnError,
    MissingParticipantKeyError,
    NonBinaryAnswerError,
    PlanMismatchError,
    UnparseableCellError,
)

DEFAULT_NULL_TOKENS = frozenset({"", "NA", "null"})

_EPOCH = datetime(1970, 1, 1)


class UnseenCategoryWarning(UserWarning):
    """A test-time categorical value was absent from the fitted category list."""


class ColumnKind(enum.Enum):
    NUMERIC = "numeric"
    DATETIME = "datetime"
    CATEGORICAL = "categorical"


@dataclass(frozen=True)
class Column:
    name: str
    kind: ColumnKind
    values: tuple  # cells; None marks missing


@dataclass(frozen=True)
class Dataset:
    """Typed columnar table with a null mask and optional participant key.

    The participant key is consumed by the pipeline (used for collapsing, then
    dropped); a Dataset whose key has been dropped carries ``None``.
    """

    columns: tuple[Column, ...]
    participant_key: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "columns", tuple(self.columns))
        names = [c.name for c in self.columns]
        if len(set(names)) != len(names):
            dupes = sorted({n for n in names if names.count(n) > 1})
            raise MalformedCsvError(f"duplicate column names: {dupes}")
        lengths = {len(c.values) for c in self.columns}
        if len(lengths) > 1:
            raise MalformedCsvError(f"columns have unequal lengths: {sorted(lengths)}")
        if self.participant_key is not None:
            key = self.column(self.participant_key)
            if key is None:
                raise MissingParticipantKeyError(
                    f"participant key column {self.participant_key!r} not found"
                )
            for i, v in enumerate(key.values):
                if v is None:
                    raise MissingParticipantKeyError(
                        f"participant key {self.participant_key!r} is null at row {i}"
                    )

    @property
    def row_count(self) -> int:
        return len(self.columns[0].values) if self.columns else 0

    @property
    def column_names(self) -> list[str]:
        return [c.name for c in self.columns]

    def column(self, name: str) -> Column | None:
        for c in self.columns:
            if c.name == name:
                return c
        return None


@dataclass(frozen=True)
class LabelRule:
    """Binary outcome from four questions: (q1=Yes and q2=Yes) and (q3 >= t or q4 >= t)."""

    q1_name: str
    q2_name: str
    q3_name: str
    q4_name: str
    pain_threshold: int = 3


@dataclass(frozen=True)
class ColumnFilterPolicy:
    max_categorical_unique: int = 5
    drop_name_patterns: tuple[str, ...] = ()

    def __post_init__(self):
        if self.max_categorical_unique < 1:
            raise ValueError("max_categorical_unique must be >= 1")
        object.__setattr__(self, "drop_name_patterns", tuple(self.drop_name_patterns))


@dataclass(frozen=True)
class Schema:
    """Parsed schema file: column kinds, participant key, label rule, policies."""

    participant_key: str
    columns: dict[str, ColumnKind]
    label_rule: LabelRule | None = None
    null_tokens: frozenset[str] = DEFAULT_NULL_TOKENS
    filter_policy: ColumnFilterPolicy = ColumnFilterPolicy()
    default_kind: ColumnKind | None = None

    @classmethod
    def from_dict(cls, d: dict) -> "Schema":
        cols = {name: ColumnKind(kind) for name, kind in d["columns"].items()}
        rule = None
        if "label_rule" in d and d["label_rule"] is not None:
            lr = d["label_rule"]
            rule = LabelRule(
                q1_name=lr["q1"],
                q2_name=lr["q2"],
                q3_name=lr["q3"],
                q4_name=lr["q4"],
                pain_threshold=int(lr.get("threshold", 3)),
            )
        policy = ColumnFilterPolicy(
            max_categorical_unique=int(d.get("max_categorical_unique", 5)),
            drop_name_patterns=tuple(d.get("drop_name_patterns", ())),
        )
        tokens = frozenset(d["null_tokens"]) if "null_tokens" in d else DEFAULT_NULL_TOKENS
        default = ColumnKind(d["default_kind"]) if d.get("default_kind") else None
        return cls(
            participant_key=d["participant_key"],
            columns=cols,
            label_rule=rule,
            null_tokens=tokens,
            filter_policy=policy,
            default_kind=default,
        )


# --- fitted transforms -------------------------------------------------------

@dataclass(frozen=True)
class NumericTransform:
    impute_mean: float
    l2_norm: float  # 1.0 sentinel for all-zero imputed columns


@dataclass(frozen=True)
class DateTimeTransform:
    impute_median: datetime
    min: datetime
    max: datetime


@dataclass(frozen=True)
class CategoricalTransform:
    impute_mode: str
    categories: tuple[str, ...]  # sorted, unique


@dataclass(frozen=True)
class PreprocessPlan:
    transforms: tuple[tuple[str, ColumnKind, object], ...]

    @property
    def feature_names(self) -> list[str]:
        names = []
        for name, kind, tf in self.transforms:
            if kind is ColumnKind.CATEGORICAL:
                names.extend(f"{name}_{cat}" for cat in tf.categories)
            else:
                names.append(name)
        return names


@dataclass(frozen=True)
class FeatureMatrix:
    feature_names: tuple[str, ...]
    values: np.ndarray  # rows x features, float64, no NaN/inf
    labels: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "feature_names", tuple(self.feature_names))
        vals = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "values", vals)
        if vals.ndim != 2 or vals.shape[1] != len(self.feature_names):
            raise ValueError(f"values shape {vals.shape} vs {len(self.feature_names)} names")
        if not np.all(np.isfinite(vals)):
            raise ValueError("feature matrix contains NaN or infinite entries")
        if self.labels is not None:
            lab = np.asarray(self.labels, dtype=np.int64)
            if lab.shape != (vals.shape[0],):
                raise ValueError("labels length must equal row count")
            object.__setattr__(self, "labels", lab)

    @property
    def rows(self) -> int:
        return self.values.shape[0]


# --- operations ---------------------------------------------------------------

def _parse_cell(text: str, kind: ColumnKind, null_tokens, row: int, col: str):
    if text in null_tokens:
        return None
    if kind is ColumnKind.NUMERIC:
        try:
            return float(text)
        except ValueError:
            raise UnparseableCellError(
                f"row {row}, column {col!r}: {text!r} is not numeric"
            ) from None
    if kind is ColumnKind.DATETIME:
        try:
            return datetime.fromisoformat(text)
        except ValueError:
            raise UnparseableCellError(
                f"row {row}, column {col!r}: {text!r} is not ISO-8601"
            ) from None
    return text


def load_csv(path, schema: Schema) -> Dataset:
    """Parse a headered CSV into a typed Dataset per the schema's column kinds."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise MalformedCsvError(f"{path}: empty file, header row required") from None
        kinds = []
        for name in header:
            kind = schema.columns.get(name, schema.default_kind)
            if kind is None:
                raise MalformedCsvError(
                    f"{path}: header {name!r} not in schema and no default kind declared"
                )
            kinds.append(kind)
        if schema.participant_key not in header:
            raise MissingParticipantKeyError(
                f"{path}: participant key column {schema.participant_key!r} not in header"
            )
        cells: list[list] = [[] for _ in header]
        for rownum, row in enumerate(reader, start=1):
            if len(row) != len(header):
                raise MalformedCsvError(
                    f"{path}: row {rownum} has {len(row)} fields, expected {len(header)}"
                )
            for j, text in enumerate(row):
                cells[j].append(_parse_cell(text, kinds[j], schema.null_tokens, rownum, header[j]))
    columns = tuple(
        Column(name=h, kind=k, values=tuple(vals))
        for h, k, vals in zip(header, kinds, cells)
    )
    return Dataset(columns=columns, participant_key=schema.participant_key)


def collapse_responses(ds: Dataset) -> Dataset:
    """One row per participant: the last non-null value of each cell, in response order.

    Participants keep their order of first appearance. Idempotent.
    """
    if ds.participant_key is None:
        raise MissingParticipantKeyError("collapse requires a participant key")
    key = ds.column(ds.participant_key)
    order: list = []
    rows_of: dict = {}
    for i, k in enumerate(key.values):
        if k not in rows_of:
            rows_of[k] = []
            order.append(k)
        rows_of[k].append(i)
    new_cols = []
    for col in ds.columns:
        out = []
        for k in order:
            val = None
            for i in rows_of[k]:
                if col.values[i] is not None:
                    val = col.values[i]
            out.append(val)
        new_cols.append(Column(name=col.name, kind=col.kind, values=tuple(out)))
    return Dataset(columns=tuple(new_cols), participant_key=ds.participant_key)


def _yes_no(value, col_name: str) -> bool:
    if value == "Yes":
        return True
    if value == "No":
        return False
    raise NonBinaryAnswerError(f"column {col_name!r}: expected Yes/No, got {value!r}")


def derive_label(ds: Dataset, rule: LabelRule) -> tuple[Dataset, np.ndarray]:
    """Evaluate the outcome formula, drop its four source columns.

    Rows where any of the four answers is null are dropped (the label must be
    computable). Returns the reduced dataset and an aligned 0/1 label vector.
    """
    expect = {
        rule.q1_name: ColumnKind.CATEGORICAL,
        rule.q2_name: ColumnKind.CATEGORICAL,
        rule.q3_name: ColumnKind.NUMERIC,
        rule.q4_name: ColumnKind.NUMERIC,
    }
    cols = {}
    for name, kind in expect.items():
        col = ds.column(name)
        if col is None:
            raise MissingLabelColumnError(f"label column {name!r} not found")
        if col.kind is not kind:
            raise MissingLabelColumnError(
                f"label column {name!r} has kind {col.kind.value}, expected {kind.value}"
            )
        cols[name] = col
    keep_rows = []
    labels = []
    for i in range(ds.row_count):
        vals = [cols[n].values[i] for n in expect]
        if any(v is None for v in vals):
            continue
        q1, q2, q3, q4 = vals
        y = (_yes_no(q1, rule.q1_name) and _yes_no(q2, rule.q2_name)) and (
            q3 >= rule.pain_threshold or q4 >= rule.pain_threshold
        )
        keep_rows.append(i)
        labels.append(int(y))
    drop = set(expect)
    new_cols = tuple(
        Column(name=c.name, kind=c.kind, values=tuple(c.values[i] for i in keep_rows))
        for c in ds.columns
        if c.name not in drop
    )
    key = ds.participant_key if ds.participant_key not in drop else None
    return Dataset(columns=new_cols, participant_key=key), np.asarray(labels, dtype=np.int64)


def drop_columns(ds: Dataset, names) -> Dataset:
    """Remove columns by name; dropping the participant key clears it."""
    drop = set(names)
    new_cols = tuple(c for c in ds.columns if c.name not in drop)
    key = ds.participant_key if ds.participant_key not in drop else None
    return Dataset(columns=new_cols, participant_key=key)


def filter_columns(ds: Dataset, policy: ColumnFilterPolicy) -> Dataset:
    """Drop columns matching a name pattern or categorical columns with too many levels.

    Name patterns are regular expressions matched anywhere in the name
    (``re.search``). The participant key column, when present, is never
    dropped. Surviving columns keep their contents and relative order.
    """
    patterns = [re.compile(p) for p in policy.drop_name_patterns]
    kept = []
    for col in ds.columns:
        if col.name == ds.participant_key:
            kept.append(col)
            continue
        if any(p.search(col.name) for p in patterns):
            continue
        if col.kind is ColumnKind.CATEGORICAL:
            distinct = {v for v in col.values if v is not None}
            if len(distinct) > policy.max_categorical_unique:
                continue
        kept.append(col)
    return Dataset(columns=tuple(kept), participant_key=ds.participant_key)


def _to_seconds(dt: datetime) -> float:
    if dt.tzinfo is not None:
        dt = dt.astimezone(timezone.utc).replace(tzinfo=None)
    return (dt - _EPOCH).total_seconds()


def fit_preprocess(train: Dataset) -> PreprocessPlan:
    """Fit per-column imputation/scaling statistics on training data.

    Numeric: mean-impute, then L2 norm of the imputed column (1.0 sentinel for
    all-zero columns). DateTime: median-impute (lower-middle for even counts),
    min/max range. Categorical: mode-impute (lexicographic tie-break), sorted
    category list. All-null columns degrade to inert defaults (numeric 0.0,
    datetime epoch, categorical empty string) rather than failing.
    """
    transforms = []
    for col in train.columns:
        if len(col.values) == 0:
            raise EmptyColumnError(f"column {col.name!r} has zero rows")
        present = [v for v in col.values if v is not None]
        if col.kind is ColumnKind.NUMERIC:
            mean = float(np.mean(present)) if present else 0.0
            imputed = np.asarray([mean if v is None else v for v in col.values], dtype=np.float64)
            norm = float(np.linalg.norm(imputed))
            tf = NumericTransform(impute_mean=mean, l2_norm=norm if norm > 0 else 1.0)
        elif col.kind is ColumnKind.DATETIME:
            if present:
                ordered = sorted(present)
                median = ordered[(len(ordered) - 1) // 2]
                lo, hi = ordered[0], ordered[-1]
            else:
                median = lo = hi = _EPOCH
            tf = DateTimeTransform(impute_median=median, min=lo, max=hi)
        else:
            if present:
                counts: dict[str, int] = {}
                for v in present:
                    counts[v] = counts.get(v, 0) + 1
                top = max(counts.values())
                mode = min(v for v, c in counts.items() if c == top)
                cats = tuple(sorted(counts))
            else:
                mode = ""
                cats = ("",)
            tf = CategoricalTransform(impute_mode=mode, categories=cats)
        transforms.append((col.name, col.kind, tf))
    return PreprocessPlan(transforms=tuple(transforms))


def apply_preprocess(plan: PreprocessPlan, ds: Dataset, labels=None) -> FeatureMatrix:
    """Impute, scale, and one-hot encode per the fitted plan.

    Numeric columns divide by the fitted L2 norm; datetimes scale to [0, 1]
    (clamped for out-of-range test values, constant 0.5 for a degenerate
    fitted range); categoricals one-hot over the fitted category list, with
    unseen test values encoding to an all-zero block plus a warning.
    """
    plan_cols = [(name, kind) for name, kind, _ in plan.transforms]
    ds_cols = [(c.name, c.kind) for c in ds.columns]
    if plan_cols != ds_cols:
        raise PlanMismatchError(
            f"dataset columns {ds_cols} do not match plan columns {plan_cols}"
        )
    blocks = []
    names = []
    for col, (name, kind, tf) in zip(ds.columns, plan.transforms):
        if kind is ColumnKind.NUMERIC:
            vals = np.asarray(
                [tf.impute_mean if v is None else v for v in col.values], dtype=np.float64
            )
            blocks.append((vals / tf.l2_norm)[:, None])
            names.append(name)
        elif kind is ColumnKind.DATETIME:
            lo = _to_seconds(tf.min)
            hi = _to_seconds(tf.max)
            vals = np.asarray(
                [_to_seconds(tf.impute_median if v is None else v) for v in col.values]
            )
            if hi == lo:
                scaled = np.full(len(vals), 0.5)
            else:
                scaled = np.clip((vals - lo) / (hi - lo), 0.0, 1.0)
            blocks.append(scaled[:, None])
            names.append(name)
        else:
            index = {cat: j for j, cat in enumerate(tf.categories)}
            block = np.zeros((len(col.values), len(tf.categories)))
            for i, v in enumerate(col.values):
                v = tf.impute_mode if v is None else v
                j = index.get(v)
                if j is None:
                    warnings.warn(
                        f"column {name!r}: unseen category {v!r} encodes to all-zero",
                        UnseenCategoryWarning,
                        stacklevel=2,
                    )
                else:
                    block[i, j] = 1.0
            blocks.append(block)
            names.extend(f"{name}_{cat}" for cat in tf.categories)
    values = np.hstack(blocks) if blocks else np.zeros((ds.row_count, 0))
    return FeatureMatrix(feature_names=tuple(names), values=values, labels=labels)


def ingest(ds: Dataset, schema: Schema) -> FeatureMatrix:
    """Full single-table flow: collapse, label, drop key, filter, fit+apply.

    Fits preprocessing on all rows; use :func:`split_then_preprocess` flows in
    the evaluation harness when train/test leakage matters.
    """
    if schema.label_rule is None:
        raise MissingLabelColumnError("schema declares no label rule")
    collapsed = collapse_responses(ds)
    labeled, labels = derive_label(collapsed, schema.label_rule)
    labeled = drop_columns(labeled, [schema.participant_key])
    filtered = filter_columns(labeled, schema.filter_policy)
    plan = fit_preprocess(filtered)
    return apply_preprocess(plan, filtered, labels=labels)


def take_rows(ds: Dataset, indices) -> Dataset:
    """Row-subset a dataset (used for leakage-safe train/test preprocessing)."""
    new_cols = tuple(
        Column(name=c.name, kind=c.kind, values=tuple(c.values[i] for i in indices))
        for c in ds.columns
    )
    return Dataset(columns=new_cols, participant_key=ds.participant_key)
