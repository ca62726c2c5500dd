"""Command-line interface.

Subcommands cover the whole control loop: synth/resynth render a score to a
mel file, extract-f0 pulls a contour out of a render, edit-f0 and edit-style
apply scripted edits, metrics compares renders, train fits a model on the
synthetic corpus, analyze-tokens reports what each style token learned, and
serve starts the HTTP session service.

Exit codes: 0 success, 1 validation error, 2 internal error. Errors are
single-line JSON on stderr.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .config import ConfigError, resolve_config
from .constants import N_MELS
from .corpus import generate_synthetic_corpus
from .dsp import AudioError, Waveform, extract_f0, mel_analyze, read_wav, vocode, write_wav
from .dual_pitch import PitchInput, PitchPath
from .f0 import ContourError, contour_from_dict, contour_to_dict
from .f0_edit import EditRangeError, apply_f0_edits, parse_edit_script
from .mel import MelFileError, load_mel, save_mel
from .metrics import f0_rmse_vuv, mcd
from .model import AcousticModel, ModelConfig, load_model, save_model, synthesize
from .nn.checkpoint import CheckpointError
from .score import ScoreError, expand_frames, parse_score
from .session import CurveValidationError, SessionService
from .style_tokens import (
    StyleEditError,
    bundle_from_dict,
    bundle_to_dict,
    edit_ramp_token,
    edit_scale_token,
    style_score_to_dict,
)
from .train import (
    TrainingError,
    analyze_tokens,
    build_training_set,
    reconstruction_analysis,
    train_model,
)

_VALIDATION_ERRORS = (
    ScoreError, ContourError, EditRangeError, StyleEditError, CheckpointError,
    MelFileError, AudioError, ConfigError, TrainingError, CurveValidationError,
    FileNotFoundError, IsADirectoryError, json.JSONDecodeError, KeyError,
    ValueError,
)


def _fail(kind: str, message: str) -> None:
    sys.stderr.write(json.dumps({"error": kind, "message": message}) + "\n")


def _read_json(path):
    with open(path, encoding="utf-8") as f:
        return json.load(f)


def _write_json(path, doc) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(doc, f)
        f.write("\n")


def _load_ckpt_model(args) -> AcousticModel:
    cfg = resolve_config({"ckpt": getattr(args, "ckpt", None)},
                         getattr(args, "config", None))
    path = cfg.get("ckpt")
    if not path:
        raise ValueError("no checkpoint given (flag --ckpt, env SVSLAB_CKPT, "
                         "or config file)")
    model, _ = load_model(path)
    return model


def _pitch_input(args, frames) -> PitchInput:
    if args.pitch_path == "midi":
        return PitchInput(PitchPath.MIDI)
    if not getattr(args, "f0", None):
        raise ValueError("--pitch-path f0 requires --f0 CONTOUR.json")
    contour = contour_from_dict(_read_json(args.f0))
    return PitchInput(PitchPath.F0, contour=contour)


def cmd_synth(args) -> int:
    model = _load_ckpt_model(args)
    score = parse_score(_read_json(args.score))
    fi = expand_frames(score)
    style = bundle_from_dict(_read_json(args.style)) if args.style else None
    result = synthesize(fi, _pitch_input(args, fi), model,
                        style_override=style, seed=args.seed)
    if args.out_mel:
        save_mel(args.out_mel, result.mel)
    if args.out_style:
        _write_json(args.out_style, bundle_to_dict(result.style_scores))
    if args.out_wav:
        write_wav(args.out_wav, vocode(result.mel, iterations=args.gl_iters))
    print(json.dumps({"frames": result.mel.n_frames,
                      "pitch_path": result.pitch_path.value,
                      "seed": result.seed}))
    return 0


def cmd_extract_f0(args) -> int:
    if bool(args.wav) == bool(args.mel):
        raise ValueError("give exactly one of --wav or --mel")
    if args.wav:
        wave = read_wav(args.wav)
    else:
        wave = vocode(load_mel(args.mel), iterations=args.gl_iters)
    contour = extract_f0(wave)
    _write_json(args.out, contour_to_dict(contour))
    print(json.dumps({"frames": contour.n_frames,
                      "voiced": int(contour.voiced.sum())}))
    return 0


def cmd_edit_f0(args) -> int:
    contour = contour_from_dict(_read_json(args.infile))
    edits = parse_edit_script(_read_json(args.script))
    edited = apply_f0_edits(contour, edits)
    _write_json(args.out, contour_to_dict(edited))
    print(json.dumps({"frames": edited.n_frames, "edits": len(edits)}))
    return 0


def cmd_edit_style(args) -> int:
    bundle = bundle_from_dict(_read_json(args.infile))
    side_score = getattr(bundle, args.side)
    if side_score is None:
        raise ValueError(f"bundle has no {args.side!r} side")
    frame_range = (args.range[0], args.range[1])
    if args.op == "scale":
        if args.factor is None:
            raise ValueError("--op scale requires --factor")
        edited = edit_scale_token(side_score, args.token, args.factor,
                                  frame_range, renormalize=args.renormalize)
    else:
        if args.factor_start is None or args.factor_end is None:
            raise ValueError("--op ramp requires --factor-start and --factor-end")
        edited = edit_ramp_token(side_score, args.token, args.factor_start,
                                 args.factor_end, frame_range,
                                 renormalize=args.renormalize)
    setattr(bundle, args.side, edited)
    _write_json(args.out, bundle_to_dict(bundle))
    print(json.dumps({"side": args.side, "token": args.token, "op": args.op}))
    return 0


def cmd_metrics(args) -> int:
    report = {}
    if args.ref and args.est:
        report["mcd_db"] = mcd(load_mel(args.ref), load_mel(args.est))
    if args.ref_f0 and args.est_f0:
        rmse, vuv = f0_rmse_vuv(contour_from_dict(_read_json(args.ref_f0)),
                                contour_from_dict(_read_json(args.est_f0)))
        report["f0_rmse_hz"] = rmse
        report["vuv_pct"] = vuv
    if not report:
        raise ValueError("give --ref/--est mel files and/or --ref-f0/--est-f0")
    print(json.dumps(report))
    return 0


def cmd_train(args) -> int:
    config = ModelConfig(
        n_singers=args.singers,
        d_text=args.dim, d_pitch=args.dim, d_style=args.dim,
        d_decoder=args.dim, d_singer=max(4, args.dim // 4),
        n_mels=args.mels,
        use_style_tokens=not args.no_style_tokens,
        use_pitch_style_tokens=not args.no_pitch_style_tokens,
        init_seed=args.seed)
    songs = generate_synthetic_corpus(args.songs, seed=args.seed,
                                      n_singers=args.singers)
    examples = build_training_set(songs, n_mels=args.mels)
    model, losses = train_model(examples, config, steps=args.steps,
                                seed=args.seed, lr=args.lr)
    save_model(args.out, model, training_step=args.steps)
    print(json.dumps({
        "steps": args.steps,
        "initial_loss": losses[0] if losses else None,
        "final_loss": losses[-1] if losses else None,
        "out": str(args.out)}))
    return 0


def cmd_analyze_tokens(args) -> int:
    model = _load_ckpt_model(args)
    report = analyze_tokens(model, n_songs=args.songs, seed=args.seed)
    print(json.dumps(report))
    return 0


def cmd_reconstruct(args) -> int:
    model = _load_ckpt_model(args)
    report = reconstruction_analysis(model, n_samples=args.samples,
                                     seed=args.seed, gl_iters=args.gl_iters)
    print(json.dumps({"mcd_db": report.mcd_db,
                      "f0_rmse_hz": report.f0_rmse_hz,
                      "vuv_pct": report.vuv_pct,
                      "per_sample": report.per_sample}))
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    cfg = resolve_config({"ckpt": args.ckpt, "data_dir": args.data_dir,
                          "port": args.port, "gl_iters": args.gl_iters},
                         args.config)
    if not cfg.get("ckpt"):
        raise ValueError("serve requires a checkpoint (--ckpt)")
    model, _ = load_model(cfg["ckpt"])
    service = SessionService(model, cfg["data_dir"], gl_iters=cfg["gl_iters"])
    app = create_app(service, ui_dir=args.ui_dir)
    uvicorn.run(app, host=args.host, port=int(cfg["port"]), log_level="warning")
    return 0


class _Parser(argparse.ArgumentParser):
    """argparse that raises instead of printing usage and exiting, so the
    CLI can emit single-line machine-parsable diagnostics."""

    def error(self, message):
        raise argparse.ArgumentError(None, message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="svslab")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="key=value config file")
        p.add_argument("--ckpt", help="model checkpoint path")

    for name in ("synth", "resynth"):
        p = sub.add_parser(name)
        common(p)
        p.add_argument("--score", required=True)
        p.add_argument("--pitch-path", choices=("midi", "f0"), default="midi")
        p.add_argument("--f0", help="contour JSON (required for --pitch-path f0)")
        p.add_argument("--style", help="style bundle JSON override")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out-mel")
        p.add_argument("--out-style")
        p.add_argument("--out-wav")
        p.add_argument("--gl-iters", type=int, default=40)
        p.set_defaults(func=cmd_synth)

    p = sub.add_parser("extract-f0")
    p.add_argument("--wav")
    p.add_argument("--mel")
    p.add_argument("--gl-iters", type=int, default=40)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_extract_f0)

    p = sub.add_parser("edit-f0")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--script", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_edit_f0)

    p = sub.add_parser("edit-style")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--side", choices=("text", "pitch"), default="text")
    p.add_argument("--op", choices=("scale", "ramp"), required=True)
    p.add_argument("--token", type=int, required=True)
    p.add_argument("--factor", type=float)
    p.add_argument("--factor-start", type=float)
    p.add_argument("--factor-end", type=float)
    p.add_argument("--range", type=int, nargs=2, required=True,
                   metavar=("A", "B"))
    p.add_argument("--renormalize", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_edit_style)

    p = sub.add_parser("metrics")
    p.add_argument("--ref", help="reference mel file")
    p.add_argument("--est", help="estimate mel file")
    p.add_argument("--ref-f0")
    p.add_argument("--est-f0")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("train")
    p.add_argument("--songs", type=int, default=5)
    p.add_argument("--steps", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--lr", type=float, default=5e-3)
    p.add_argument("--dim", type=int, default=64)
    p.add_argument("--mels", type=int, default=N_MELS)
    p.add_argument("--singers", type=int, default=4)
    p.add_argument("--no-style-tokens", action="store_true")
    p.add_argument("--no-pitch-style-tokens", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("analyze-tokens")
    common(p)
    p.add_argument("--songs", type=int, default=4)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_analyze_tokens)

    p = sub.add_parser("reconstruct")
    common(p)
    p.add_argument("--samples", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--gl-iters", type=int, default=40)
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("serve")
    common(p)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int)
    p.add_argument("--data-dir")
    p.add_argument("--gl-iters", type=int)
    p.add_argument("--ui-dir")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except argparse.ArgumentError as exc:
        _fail("usage", str(exc))
        return 1
    except SystemExit as exc:
        if exc.code in (0, None):
            return 0
        _fail("usage", "invalid arguments")
        return 1
    try:
        return args.func(args)
    except _VALIDATION_ERRORS as exc:
        _fail("validation", f"{type(exc).__name__}: {exc}")
        return 1
    except Exception as exc:  # anything unexpected is an internal error
        _fail("internal", f"{type(exc).__name__}: {exc}")
        return 2


if __name__ == "__main__":
    sys.exit(main())
