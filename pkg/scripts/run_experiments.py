#!/usr/bin/env python
"""Run the full evaluation battery and write every report to results/.

Steps (all seeded, so re-runs produce byte-identical artifacts):

  1. generate a sentence corpus and a binary-labeled corpus
  2. train the spelling-aware embedding and save it
  3. Levenshtein-vs-cosine correlation report
  4. perturbation distance ratios for all ten attack kinds
  5. character-bag collision census on the bundled english-words list
  6. defended vs undefended downstream AUC experiment (3x3 runs)
  7. optional hyperparameter sweep (pass --sweep; slow)

Everything goes through the cw2v CLI so the artifacts match what a user
would produce by hand; a fresh run takes a few minutes without --sweep.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

from cw2v.cli import main as cw2v

REPO = Path(__file__).resolve().parent.parent


def step(title: str, argv: list[str]) -> None:
    print(f"\n== {title}\n   cw2v {' '.join(argv)}")
    started = time.monotonic()
    code = cw2v(argv)
    if code != 0:
        sys.exit(f"step failed with exit code {code}")
    print(f"   done in {time.monotonic() - started:.1f}s")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--results", default=str(REPO / "results"), help="output directory")
    parser.add_argument("--seed", type=int, default=1)
    parser.add_argument("--sentences", type=int, default=2400)
    parser.add_argument("--docs", type=int, default=2000)
    parser.add_argument("--hidden", type=int, default=50)
    parser.add_argument("--index-size", type=int, default=500)
    parser.add_argument("--sweep", action="store_true", help="also run the hyperparameter sweep")
    args = parser.parse_args()

    results = Path(args.results)
    results.mkdir(parents=True, exist_ok=True)
    corpus = results / "corpus.txt"
    labeled = results / "labeled.tsv"
    model = results / "model.json"
    seed = str(args.seed)

    step("corpora", [
        "make-corpus",
        "--sentences-out", str(corpus), "--sentences", str(args.sentences),
        "--labeled-out", str(labeled), "--docs", str(args.docs),
        "--seed", seed,
    ])

    step("embedding", [
        "train-embed", "--input", str(corpus), "--model-out", str(model),
        "--index-size", str(args.index_size), "--hidden", str(args.hidden),
        "--max-epochs", "20", "--patience", "3", "--seed", seed,
    ])

    step("correlation", [
        "report-correlation", "--model", str(model), "--corpus", str(corpus),
        "--sample", "100", "--seed", seed,
        "--output-base", str(results / "correlation"),
    ])

    step("perturbation ratios", [
        "report-ratios", "--model", str(model), "--corpus", str(corpus),
        "--sample", "100", "--pairs", "500", "--seed", seed,
        "--output-base", str(results / "ratios"),
    ])

    step("collision census", [
        "report-collisions", "--words", str(REPO / "data" / "english-words.txt.gz"),
        "--output-base", str(results / "collisions"),
    ])

    common = [
        "--labeled", str(labeled), "--runs", "3x3",
        "--index-size", "100", "--hidden", "32", "--max-epochs", "8",
        "--clf-epochs", "300", "--seed", seed,
    ]
    step("pipeline (defended)", [
        "run-pipeline", *common, "--output-base", str(results / "pipeline_defended"),
    ])
    step("pipeline (undefended)", [
        "run-pipeline", *common, "--no-acd", "--no-uc",
        "--output-base", str(results / "pipeline_undefended"),
    ])

    if args.sweep:
        step("hyperparameter sweep", [
            "sweep", *common, "--runs", "1x2",
            "--grid-h", "16,32", "--grid-window", "2,3", "--grid-rho", "0.02,0.05",
            "--output-base", str(results / "sweep"),
        ])

    print(f"\nall reports under {results}")


if __name__ == "__main__":
    main()
