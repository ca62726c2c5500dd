#!/usr/bin/env python3
"""Train the toy model on the synthetic corpus and save a checkpoint.

Example:
    python scripts/train_toy.py --songs 5 --steps 500 --out toy.ckpt
"""

import argparse
import json
import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from svslab import ModelConfig, generate_synthetic_corpus, save_model
from svslab.train import build_training_set, train_model


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--songs", type=int, default=5)
    ap.add_argument("--steps", type=int, default=500)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--corpus-seed", type=int, default=11)
    ap.add_argument("--lr", type=float, default=5e-3)
    ap.add_argument("--no-style-tokens", action="store_true")
    ap.add_argument("--out", default="toy.ckpt")
    args = ap.parse_args()

    songs = generate_synthetic_corpus(args.songs, seed=args.corpus_seed)
    print(f"corpus: {args.songs} songs, "
          f"{sum(s.n_frames for s in songs)} frames total")
    examples = build_training_set(songs)
    config = ModelConfig(init_seed=args.seed,
                         use_style_tokens=not args.no_style_tokens)
    model, losses = train_model(examples, config, steps=args.steps,
                                seed=args.seed, lr=args.lr)
    save_model(args.out, model, training_step=args.steps)
    print(json.dumps({
        "initial_loss": losses[0],
        "final_loss": losses[-1],
        "ratio": losses[-1] / losses[0],
        "checkpoint": args.out,
    }, indent=1))


if __name__ == "__main__":
    main()
