#!/usr/bin/env python3
"""Dual-path reconstruction comparison.

Trains two configurations on the same synthetic corpus - dual pitch paths
without style tokens, and with style tokens - then renders fresh scores via
the MIDI path, extracts f0, re-renders through the f0 path, and reports
MCD / f0-RMSE / V/UV between the two renders of each model.
"""

import argparse
import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from svslab import ModelConfig, generate_synthetic_corpus
from svslab.train import build_training_set, reconstruction_analysis, train_model


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--songs", type=int, default=5)
    ap.add_argument("--steps", type=int, default=500)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--corpus-seed", type=int, default=11)
    ap.add_argument("--recon-samples", type=int, default=3)
    ap.add_argument("--recon-seed", type=int, default=123)
    ap.add_argument("--gl-iters", type=int, default=40)
    args = ap.parse_args()

    songs = generate_synthetic_corpus(args.songs, seed=args.corpus_seed)
    examples = build_training_set(songs)

    rows = []
    for label, use_style in (("dual", False), ("dual+style-tokens", True)):
        config = ModelConfig(init_seed=args.seed, use_style_tokens=use_style)
        model, losses = train_model(examples, config, steps=args.steps,
                                    seed=args.seed)
        report = reconstruction_analysis(model, n_samples=args.recon_samples,
                                         seed=args.recon_seed,
                                         gl_iters=args.gl_iters)
        rows.append((label, losses[-1] / losses[0], report))

    print(f"{'model':20s} {'loss ratio':>10s} {'MCD (dB)':>9s} "
          f"{'f0 RMSE (Hz)':>13s} {'V/UV (%)':>9s}")
    for label, ratio, report in rows:
        print(f"{label:20s} {ratio:10.4f} {report.mcd_db:9.3f} "
              f"{report.f0_rmse_hz:13.2f} {report.vuv_pct:9.2f}")


if __name__ == "__main__":
    main()
