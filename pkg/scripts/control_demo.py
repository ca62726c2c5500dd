#!/usr/bin/env python3
"""Render one score and demonstrate every control: style-token scaling,
crescendo ramping, pitch shift, flatten, and vibrato. Writes WAV files.

    python scripts/control_demo.py --ckpt toy.ckpt --out-dir demo/
"""

import argparse
import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

import numpy as np

from svslab import (
    PitchInput,
    PitchPath,
    expand_frames,
    extract_f0,
    load_model,
    synthesize,
    vocode,
    write_wav,
)
from svslab.corpus import random_scores
from svslab.f0_edit import FlattenEdit, RampEdit, ShiftEdit, VibratoEdit, apply_f0_edits
from svslab.style_tokens import StyleBundle, edit_ramp_token, edit_scale_token
from svslab.train import analyze_tokens


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--ckpt", required=True)
    ap.add_argument("--out-dir", default="demo")
    ap.add_argument("--seed", type=int, default=123)
    ap.add_argument("--gl-iters", type=int, default=60)
    args = ap.parse_args()

    out = pathlib.Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    model, _ = load_model(args.ckpt)
    score = random_scores(1, args.seed, model.config.n_singers)[0]
    fi = expand_frames(score)
    length = fi.n_frames

    base = synthesize(fi, PitchInput(PitchPath.MIDI), model, seed=args.seed)
    write_wav(out / "base.wav", vocode(base.mel, iterations=args.gl_iters))
    print(f"base render: {length} frames -> {out / 'base.wav'}")

    roles = analyze_tokens(model, n_songs=3, seed=args.seed)
    if roles["labels"]:
        breath = roles["labels"]["breath"]
        intensity = roles["labels"]["intensity"]
        print(f"token roles (by correlation): breath={breath}, "
              f"intensity={intensity}")
        doubled = edit_scale_token(base.style_scores.text, breath, 2.0,
                                   (0, length))
        louder = synthesize(fi, PitchInput(PitchPath.MIDI), model, seed=args.seed,
                            style_override=StyleBundle(
                                text=doubled, pitch=base.style_scores.pitch))
        write_wav(out / "breath_doubled.wav",
                  vocode(louder.mel, iterations=args.gl_iters))

        crescendo = edit_ramp_token(base.style_scores.text, intensity,
                                    0.5, 2.0, (0, length))
        swelled = synthesize(fi, PitchInput(PitchPath.MIDI), model, seed=args.seed,
                             style_override=StyleBundle(
                                 text=crescendo, pitch=base.style_scores.pitch))
        write_wav(out / "crescendo.wav",
                  vocode(swelled.mel, iterations=args.gl_iters))

    contour = extract_f0(vocode(base.mel, iterations=args.gl_iters))
    edits = {
        "shift_up2": [ShiftEdit(2.0, (0, length))],
        "shift_down2": [ShiftEdit(-2.0, (0, length))],
        "flattened": [FlattenEdit(0.2, (0, length))],
        "vibrato": [VibratoEdit(6.0, 0.5, (0, length))],
        "attack_release": [RampEdit(-2.0, 0.0, (0, max(2, length // 8))),
                           RampEdit(0.0, -2.0, (length - max(2, length // 8),
                                                length))],
    }
    for name, script in edits.items():
        edited = apply_f0_edits(contour, script)
        result = synthesize(fi, PitchInput(PitchPath.F0, contour=edited),
                            model, seed=args.seed,
                            style_override=base.style_scores)
        write_wav(out / f"{name}.wav",
                  vocode(result.mel, iterations=args.gl_iters))
        print(f"wrote {out / (name + '.wav')}")


if __name__ == "__main__":
    main()
