#!/usr/bin/env python3
"""Compare MI, name-similarity, and combined scoring on the synthetic benchmark.

For each seed: generate a small-n survey-like dataset with planted features,
select top-N under each scorer, fit Gaussian naive Bayes on the selection, and
report planted recovery plus train/test AUROC. The interesting regime is
n_train much smaller than the feature count, where MI estimates get noisy but
name similarity does not.

Usage:
    python scripts/run_synth_benchmark.py --seeds 10 --top-n 20
    python scripts/run_synth_benchmark.py --preset imbalanced --effect-size 0.7
"""
import argparse
import sys

import numpy as np

from sts_select.embed import StsScoreConfig
from sts_select.model_eval import auroc, gnb_predict_proba, train_gnb
from sts_select.scoring import CombinedScorer, MiConfig, MiScorer, StsScorer, relevance_scores
from sts_select.selection import select_top_n
from sts_select.synthbench import SynthSpec, default_spec, generate, imbalanced_spec, planted_recovery


def evaluate_scorer(out, scorer, top_n):
    rel = relevance_scores(out.train, out.train.labels, scorer)
    sel = select_top_n(rel, top_n, names=out.train.feature_names)
    cols = list(sel.selected)
    model = train_gnb(out.train.values[:, cols], out.train.labels)
    p_train = gnb_predict_proba(model, out.train.values[:, cols])
    p_test = gnb_predict_proba(model, out.test.values[:, cols])
    return {
        "recovery": planted_recovery(sel, out.planted_indices),
        "train": auroc(p_train, out.train.labels),
        "test": auroc(p_test, out.test.labels),
    }


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seeds", type=int, default=10, help="number of seeds to sweep")
    parser.add_argument("--top-n", type=int, default=20)
    parser.add_argument("--alpha", type=float, default=1.0, help="combined-scorer weight")
    parser.add_argument("--preset", choices=("default", "imbalanced"), default="default")
    parser.add_argument("--n-train", type=int, default=None)
    parser.add_argument("--effect-size", type=float, default=None)
    args = parser.parse_args(argv)

    rows = []
    header = f"{'seed':>4} | {'scorer':>8} | {'recovery':>8} | {'train':>6} | {'test':>6} | {'gap':>7}"
    print(header)
    print("-" * len(header))
    for seed in range(args.seeds):
        spec = default_spec(seed) if args.preset == "default" else imbalanced_spec(seed)
        overrides = {}
        if args.n_train is not None:
            overrides["n_train"] = args.n_train
        if args.effect_size is not None:
            overrides["effect_size"] = args.effect_size
        if overrides:
            from dataclasses import replace

            spec = replace(spec, **overrides)
        out = generate(spec)
        sts = StsScorer(source=out.store, config=StsScoreConfig(target_names=(out.target_name,)))
        mi = MiScorer(MiConfig(seed=424989))
        combined = CombinedScorer(alpha=args.alpha, mi=mi, sts=sts)
        per_seed = {}
        for tag, scorer in (("mi", mi), ("sts", sts), ("combined", combined)):
            r = evaluate_scorer(out, scorer, args.top_n)
            per_seed[tag] = r
            print(
                f"{seed:>4} | {tag:>8} | {r['recovery']:>8.2f} | {r['train']:>6.3f} "
                f"| {r['test']:>6.3f} | {r['train'] - r['test']:>7.3f}"
            )
        rows.append(per_seed)

    print()
    for tag in ("mi", "sts", "combined"):
        rec = np.mean([r[tag]["recovery"] for r in rows])
        test = np.mean([r[tag]["test"] for r in rows])
        gap = np.mean([r[tag]["train"] - r[tag]["test"] for r in rows])
        print(f"{tag:>8}: mean recovery {rec:.2f}, mean test AUROC {test:.3f}, mean gap {gap:+.3f}")
    sts_wins = sum(1 for r in rows if r["sts"]["test"] > r["mi"]["test"])
    print(f"\nSTS test-AUROC wins over MI: {sts_wins}/{len(rows)} seeds")
    return 0


if __name__ == "__main__":
    sys.exit(main())
