#!/usr/bin/env python3
"""End-to-end walkthrough of the CLI on generated data.

Creates a working directory, generates a synthetic bundle, then drives
synth -> validate-embeddings -> ingest -> score -> select -> eval and prints
where each artifact landed.

Usage:
    python scripts/demo_pipeline.py [--workdir demo_run] [--seed 0]
"""
import argparse
import json
import sys
from pathlib import Path

from sts_select.cli import main as cli


def write(path: Path, cfg: dict) -> str:
    path.write_text(json.dumps(cfg, indent=2) + "\n")
    return str(path)


def run(argv) -> None:
    code = cli(argv)
    if code != 0:
        raise SystemExit(f"command {' '.join(argv)} exited {code}")


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--workdir", default="demo_run")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    work = Path(args.workdir)
    work.mkdir(parents=True, exist_ok=True)
    synth_dir = work / "synth"
    stage_dir = work / "stages"

    run(["synth", "--config", write(work / "synth.json", {
        "preset": "default",
        "seed": args.seed,
        "dim": 16,
        "n_relevant": 5,
        "n_irrelevant": 35,
        "n_train": 80,
        "n_test": 200,
        "output_dir": str(synth_dir),
    })])
    run(["validate-embeddings", "--config", write(work / "validate.json", {
        "embeddings": str(synth_dir / "embeddings.jsonl"),
    })])
    run(["ingest", "--config", write(work / "ingest.json", {
        "data_csv": str(synth_dir / "synth.csv"),
        "schema": str(synth_dir / "schema.json"),
        "output_dir": str(stage_dir),
    })])
    run(["score", "--config", write(work / "score.json", {
        "matrix": str(stage_dir / "matrix.csv"),
        "scorer": {"kind": "sts"},
        "targets": ["target"],
        "embeddings": str(synth_dir / "embeddings.jsonl"),
        "with_redundancy": True,
        "output_dir": str(stage_dir),
    })])
    run(["select", "--config", write(work / "select.json", {
        "scores": str(stage_dir / "scores.json"),
        "selection": {"strategy": "mrmr", "n": 10},
        "output_dir": str(stage_dir),
    })])
    run(["eval", "--config", write(work / "eval.json", {
        "data_csv": str(synth_dir / "synth.csv"),
        "schema": str(synth_dir / "schema.json"),
        "embeddings": str(synth_dir / "embeddings.jsonl"),
        "targets": ["target"],
        "scorers": ["mi", "sts", "combined"],
        "alphas": {"lo": 0.01, "hi": 100.0, "n": 5},
        "strategies": [{"strategy": "top_n", "n": 10}, {"strategy": "std_dev", "k": 1.0}],
        "classifier": {"kind": "gnb"},
        "cv": {"test_fraction": 0.2, "folds": 5, "seeds": [278797835, 424989]},
        "output_dir": str(stage_dir),
    })])

    report = json.loads((stage_dir / "report.json").read_text())
    print("\nartifacts in", work.resolve())
    print("chosen config:", json.dumps(report["chosen"]))
    print(f"test AUROC {report['test_auroc']:.3f}, train AUROC {report['train_auroc']:.3f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
