"""Command-line pipeline driver.

Subcommands (each takes ``--config <json>`` plus optional ``--seed``,
``--seed2``, ``--threads`` overrides):

  ingest               CSV + schema -> preprocessed matrix.csv
  score                matrix -> ScoreSet JSON + relevance/redundancy CSVs
  select               ScoreSet JSON -> SelectionResult JSON
  eval                 CSV + schema -> grid-searched EvalReport JSON
  synth                synthetic benchmark bundle (CSV/schema/embeddings/planted)
  validate-embeddings  check an embedding store file

Exit codes: 0 success, 1 usage error, 2 data/config error. Structural choices
live in the JSON config so runs are reproducible from checked-in files; flags
only override seeds, worker count, and nothing else.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .embed import StsScoreConfig, load_embedding_store, load_word_vectors
from .errors import StsSelectError, UsageError
from .model_eval import CvPlan, PipelineSpec, grid_search, split_indices
from .scoring import (
    CombinedScorer,
    MiConfig,
    MiScorer,
    ScoreSet,
    StsScorer,
    alpha_grid,
    score_features,
)
from .selection import SelectionConfig, run_selection
from .synthbench import SynthSpec, default_spec, generate, imbalanced_spec, write_bundle
from .tabular import (
    FeatureMatrix,
    Schema,
    apply_preprocess,
    collapse_responses,
    derive_label,
    drop_columns,
    filter_columns,
    fit_preprocess,
    load_csv,
    take_rows,
)

LABEL_COLUMN = "__label__"


def _read_json(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise StsSelectError(f"file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise StsSelectError(f"{path}: invalid JSON: {exc}") from None


def _write_json(obj, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _require(cfg: dict, key: str, context: str):
    if key not in cfg:
        raise StsSelectError(f"{context}: missing required field {key!r}")
    return cfg[key]


def _out_dir(cfg: dict, context: str) -> Path:
    out = Path(_require(cfg, "output_dir", context))
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_matrix(fm: FeatureMatrix, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(fm.feature_names) + [LABEL_COLUMN])
        for i in range(fm.rows):
            writer.writerow([repr(float(v)) for v in fm.values[i]] + [str(int(fm.labels[i]))])


def _read_matrix(path) -> FeatureMatrix:
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            if not header or header[-1] != LABEL_COLUMN:
                raise StsSelectError(f"{path}: last column must be {LABEL_COLUMN}")
            rows = []
            labels = []
            for row in reader:
                rows.append([float(v) for v in row[:-1]])
                labels.append(int(row[-1]))
    except FileNotFoundError:
        raise StsSelectError(f"file not found: {path}") from None
    except (ValueError, StopIteration) as exc:
        raise StsSelectError(f"{path}: bad matrix file: {exc}") from None
    return FeatureMatrix(
        feature_names=tuple(header[:-1]),
        values=np.asarray(rows, dtype=np.float64),
        labels=np.asarray(labels, dtype=np.int64),
    )


def _load_source(cfg: dict):
    """Embedding store or word-vector table, whichever the config names."""
    if cfg.get("embeddings"):
        return load_embedding_store(cfg["embeddings"])
    if cfg.get("word_vectors"):
        return load_word_vectors(cfg["word_vectors"])
    raise StsSelectError("config needs 'embeddings' or 'word_vectors' for STS scoring")


def _sts_config(cfg: dict) -> StsScoreConfig:
    return StsScoreConfig(
        target_names=tuple(_require(cfg, "targets", "scorer config")),
        strip_onehot_suffix=bool(cfg.get("strip_onehot_suffix", False)),
    )


def _mi_config(cfg: dict, seed2: int | None) -> MiConfig:
    mi = cfg.get("mi", {})
    return MiConfig(
        n_neighbors=int(mi.get("n_neighbors", 3)),
        noise_scale=float(mi.get("noise_scale", 1e-10)),
        seed=int(seed2 if seed2 is not None else mi.get("seed", 424989)),
    )


def _build_scorer(kind: str, cfg: dict, seed2: int | None, alpha: float | None = None):
    if kind == "mi":
        return MiScorer(_mi_config(cfg, seed2))
    if kind == "sts":
        return StsScorer(source=_load_source(cfg), config=_sts_config(cfg))
    if kind == "combined":
        if alpha is None:
            raise StsSelectError("combined scorer needs an alpha value")
        return CombinedScorer(
            alpha=float(alpha),
            mi=MiScorer(_mi_config(cfg, seed2)),
            sts=StsScorer(source=_load_source(cfg), config=_sts_config(cfg)),
        )
    raise StsSelectError(f"unknown scorer kind {kind!r}")


def _selection_config(d: dict) -> SelectionConfig:
    kind = _require(d, "strategy", "selection config")
    try:
        return SelectionConfig(
            strategy=kind, n=int(d.get("n", 20)), k=float(d.get("k", 1.0))
        )
    except ValueError as exc:
        raise StsSelectError(str(exc)) from None


def _cv_plan(cfg: dict, seed: int | None, seed2: int | None) -> CvPlan:
    cv = cfg.get("cv", {})
    seeds = list(cv.get("seeds", (278797835, 424989)))
    if seed is not None:
        seeds[0] = seed
    if seed2 is not None:
        seeds[1] = seed2
    try:
        return CvPlan(
            test_fraction=float(cv.get("test_fraction", 0.2)),
            folds=int(cv.get("folds", 5)),
            seeds=(int(seeds[0]), int(seeds[1])),
            stratified=bool(cv.get("stratified", True)),
        )
    except ValueError as exc:
        raise StsSelectError(str(exc)) from None


def _prepare_dataset(cfg: dict):
    """load -> collapse -> label -> drop key -> filter; returns (Dataset, labels)."""
    schema = Schema.from_dict(_read_json(_require(cfg, "schema", "config")))
    ds = load_csv(_require(cfg, "data_csv", "config"), schema)
    ds = collapse_responses(ds)
    if schema.label_rule is None:
        raise StsSelectError("schema declares no label_rule; eval/ingest need one")
    ds, labels = derive_label(ds, schema.label_rule)
    ds = drop_columns(ds, [schema.participant_key])
    ds = filter_columns(ds, schema.filter_policy)
    return ds, labels


def cmd_ingest(cfg: dict, args) -> int:
    out = _out_dir(cfg, "ingest config")
    ds, labels = _prepare_dataset(cfg)
    plan = fit_preprocess(ds)
    fm = apply_preprocess(plan, ds, labels=labels)
    matrix_path = out / "matrix.csv"
    _write_matrix(fm, matrix_path)
    _write_json(
        {
            "rows": fm.rows,
            "features": len(fm.feature_names),
            "positives": int(np.sum(fm.labels)),
            "feature_names": list(fm.feature_names),
        },
        out / "ingest_meta.json",
    )
    print(f"wrote {matrix_path} ({fm.rows} rows x {len(fm.feature_names)} features)")
    return 0


def cmd_score(cfg: dict, args) -> int:
    out = _out_dir(cfg, "score config")
    fm = _read_matrix(_require(cfg, "matrix", "score config"))
    scorer_cfg = _require(cfg, "scorer", "score config")
    kind = _require(scorer_cfg, "kind", "scorer config")
    merged = {**cfg, **scorer_cfg}
    scorer = _build_scorer(kind, merged, args.seed2, alpha=scorer_cfg.get("alpha"))
    with_red = bool(cfg.get("with_redundancy", False))
    scores = score_features(fm, fm.labels, scorer, with_redundancy=with_red, n_jobs=args.threads)
    scores_path = out / "scores.json"
    scores.save(scores_path)
    with open(out / "relevance.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["feature_name", "relevance"])
        for name, r in zip(scores.feature_names, scores.relevance):
            writer.writerow([name, repr(float(r))])
    if scores.redundancy is not None:
        with open(out / "redundancy.csv", "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["feature_name"] + list(scores.feature_names))
            for name, row in zip(scores.feature_names, scores.redundancy):
                writer.writerow([name] + [repr(float(v)) for v in row])
    print(f"wrote {scores_path}")
    return 0


def cmd_select(cfg: dict, args) -> int:
    out = _out_dir(cfg, "select config")
    scores = ScoreSet.load(_require(cfg, "scores", "select config"))
    selection = run_selection(scores, _selection_config(_require(cfg, "selection", "select config")))
    path = out / "selection.json"
    selection.save(path)
    print(f"wrote {path} ({len(selection.selected)} features)")
    return 0


def cmd_eval(cfg: dict, args) -> int:
    out = _out_dir(cfg, "eval config")
    ds, labels = _prepare_dataset(cfg)
    plan = _cv_plan(cfg, args.seed, args.seed2)
    train_idx, test_idx = split_indices(labels, plan)
    pre = fit_preprocess(take_rows(ds, train_idx))
    train_fm = apply_preprocess(pre, take_rows(ds, train_idx), labels=labels[train_idx])
    test_fm = apply_preprocess(pre, take_rows(ds, test_idx), labels=labels[test_idx])

    strategies = [_selection_config(d) for d in _require(cfg, "strategies", "eval config")]
    classifier_cfg = cfg.get("classifier", {"kind": "gnb"})
    classifier = classifier_cfg.get("kind", "gnb")
    knn_neighbors = int(classifier_cfg.get("n_neighbors", 5))

    alphas_cfg = cfg.get("alphas")
    if alphas_cfg is None:
        alphas = alpha_grid()
    elif isinstance(alphas_cfg, dict):
        alphas = alpha_grid(
            lo=float(alphas_cfg.get("lo", 1e-2)),
            hi=float(alphas_cfg.get("hi", 1e2)),
            n=int(alphas_cfg.get("n", 30)),
        )
    else:
        alphas = [float(a) for a in alphas_cfg]

    grid: list[PipelineSpec] = []
    for kind in _require(cfg, "scorers", "eval config"):
        if kind == "combined":
            scorers = [_build_scorer(kind, cfg, args.seed2, alpha=a) for a in alphas]
        else:
            scorers = [_build_scorer(kind, cfg, args.seed2)]
        for scorer in scorers:
            for strat in strategies:
                grid.append(
                    PipelineSpec(
                        scorer=scorer,
                        selection=strat,
                        classifier=classifier,
                        knn_neighbors=knn_neighbors,
                    )
                )
    _, report = grid_search(
        train_fm, train_fm.labels, test_fm, test_fm.labels, grid, plan, n_jobs=args.threads
    )
    path = out / "report.json"
    _write_json(report.to_dict(), path)
    print(f"wrote {path} (test AUROC {report.test_auroc:.3f})")
    return 0


def cmd_synth(cfg: dict, args) -> int:
    out = _out_dir(cfg, "synth config")
    preset = cfg.get("preset", "default")
    seed = int(args.seed if args.seed is not None else cfg.get("seed", 0))
    if preset == "default":
        spec = default_spec(seed)
    elif preset == "imbalanced":
        spec = imbalanced_spec(seed)
    else:
        raise StsSelectError(f"unknown preset {preset!r}")
    overrides = {
        k: cfg[k]
        for k in (
            "dim",
            "n_relevant",
            "n_irrelevant",
            "noise_epsilon",
            "n_train",
            "n_test",
            "effect_size",
            "positive_rate",
        )
        if k in cfg
    }
    if overrides:
        spec = replace(spec, **overrides)
    paths = write_bundle(generate(spec), out)
    print(f"wrote {paths['csv']}")
    return 0


def cmd_validate_embeddings(cfg: dict, args) -> int:
    path = _require(cfg, "embeddings", "validate-embeddings config")
    try:
        store = load_embedding_store(path)
    except FileNotFoundError:
        raise StsSelectError(f"file not found: {path}") from None
    print(f"{path}: OK ({len(store.entries)} entries, dim {store.dim})")
    return 0


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


_COMMANDS = {
    "ingest": cmd_ingest,
    "score": cmd_score,
    "select": cmd_select,
    "eval": cmd_eval,
    "synth": cmd_synth,
    "validate-embeddings": cmd_validate_embeddings,
}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sts-select", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="JSON config path")
        p.add_argument("--seed", type=int, default=None, help="override primary seed")
        p.add_argument("--seed2", type=int, default=None, help="override estimator-jitter seed")
        p.add_argument("--threads", type=int, default=1, help="worker budget (never changes outputs)")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # --version / --help
        return int(exc.code or 0)
    try:
        cfg = _read_json(args.config)
        return _COMMANDS[args.command](cfg, args)
    except StsSelectError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
