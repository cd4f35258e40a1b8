"""Command-line entry points: synth, extract, evaluate, report.

Every PipelineConfig key doubles as a command-line flag of the same name,
overriding the value read from --config.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import fields

import numpy as np

from . import evaluate as ev
from . import pipeline as pl
from .flow import estimate_flow, save_flow
from .imaging import load_sequence
from .lbptop import block_histograms, flatten_histograms, zero_noise_blocks
from .strain import save_strain_png, strain_sequence
from .synthetic import generate_synthetic

STAGES = ("flow", "strain", "osf", "lbptop", "osw", "all")


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    for f in fields(pl.PipelineConfig):
        parser.add_argument(f"--{f.name}", default=None, metavar="V")


def _build_config(args) -> pl.PipelineConfig:
    config = pl.PipelineConfig.load(args.config) if args.config else pl.PipelineConfig()
    overrides = {}
    for f in fields(pl.PipelineConfig):
        raw = getattr(args, f.name, None)
        if raw is not None:
            overrides[f.name] = pl._parse_value(str(raw), f.type)
    if overrides:
        values = {f.name: getattr(config, f.name) for f in fields(pl.PipelineConfig)}
        values.update(overrides)
        config = pl.PipelineConfig(**values)
    return config


def _cmd_synth(args) -> int:
    entries = generate_synthetic(
        out_dir=args.out,
        n_classes=args.classes,
        n_subjects=args.subjects,
        videos_per_subject=args.videos_per_subject,
        size=args.size,
        n_frames=args.frames,
        seed=args.seed,
        amplitude_range=(args.amplitude_min, args.amplitude_max),
        noise_sigma=args.noise_sigma,
    )
    print(f"wrote {len(entries)} videos under {args.out}")
    print(f"manifest: {os.path.join(args.out, 'manifest.json')}")
    return 0


def _dump_flow_stage(manifest, config, out_dir) -> None:
    for entry in manifest:
        seq = load_sequence(entry)
        if config.resample:
            seq = pl.resample_temporal(seq, config.resample_length)
        video_dir = os.path.join(out_dir, "flow", entry.video_id)
        os.makedirs(video_dir, exist_ok=True)
        for j, (f1, f2) in enumerate(zip(seq.frames[:-1], seq.frames[1:])):
            flow = estimate_flow(f1, f2, window=config.flow_window)
            save_flow(flow, os.path.join(video_dir, f"pair_{j:03d}.flow"))


def _dump_strain_stage(manifest, config, out_dir) -> None:
    for entry in manifest:
        seq = load_sequence(entry)
        if config.resample:
            seq = pl.resample_temporal(seq, config.resample_length)
        video_dir = os.path.join(out_dir, "strain", entry.video_id)
        os.makedirs(video_dir, exist_ok=True)
        for j, strain in enumerate(strain_sequence(seq, window=config.flow_window)):
            save_strain_png(strain, os.path.join(video_dir, f"pair_{j:03d}.png"))


def _dump_lbptop_stage(manifest, config, out_dir) -> None:
    from .imaging import gaussian_filter

    features = []
    params = config.lbptop_params()
    for entry in manifest:
        seq = load_sequence(entry)
        if config.resample:
            seq = pl.resample_temporal(seq, config.resample_length)
        frames = seq.frames
        if config.gaussian_osw:
            frames = [gaussian_filter(f, config.gaussian_size, config.gaussian_sigma) for f in frames]
        hists = block_histograms(np.stack(frames), params)
        hists = zero_noise_blocks(hists, enabled=config.zero_noise_blocks)
        features.append(
            ev.FeatureVector(
                values=flatten_histograms(hists),
                video_id=entry.video_id,
                subject_id=entry.subject_id,
                label=entry.label,
            )
        )
    os.makedirs(out_dir, exist_ok=True)
    pl.write_features_csv(features, os.path.join(out_dir, "lbptop.csv"))


def _cmd_extract(args) -> int:
    config = _build_config(args)
    manifest = pl.load_manifest(args.manifest)
    out_dir = args.out or config.out_dir
    os.makedirs(out_dir, exist_ok=True)
    if args.stage == "flow":
        _dump_flow_stage(manifest, config, out_dir)
    elif args.stage == "strain":
        _dump_strain_stage(manifest, config, out_dir)
    elif args.stage == "lbptop":
        _dump_lbptop_stage(manifest, config, out_dir)
    else:
        # osf / osw / all: full feature extraction without evaluation
        result = pl.run_pipeline(manifest, config, out_dir=out_dir, evaluate=False, log=print)
        if result.failures:
            print(f"{len(result.failures)} video(s) skipped")
    print(f"stage {args.stage!r} written to {out_dir}")
    return 0


def _cmd_evaluate(args) -> int:
    config = _build_config(args)
    manifest = pl.load_manifest(args.manifest)
    out_dir = args.out or config.out_dir
    result = pl.run_pipeline(manifest, config, out_dir=out_dir, evaluate=True, log=print)
    report = result.report
    print(f"protocol        : {report.protocol}")
    print(f"feature set     : {config.feature_set}")
    print(f"micro accuracy  : {report.micro_accuracy:.4f}")
    print(f"macro accuracy  : {report.macro_accuracy:.4f}")
    print(f"report          : {os.path.join(out_dir, 'report.json')}")
    return 0


def _cmd_report(args) -> int:
    with open(args.report) as fh:
        data = json.load(fh)
    print(f"protocol        : {data['protocol']}")
    print(f"samples         : {data['n_samples']}")
    print(f"classes         : {', '.join(data['classes'])}")
    print(f"micro accuracy  : {data['micro']['accuracy']:.4f}")
    print(f"macro accuracy  : {data['macro_by_subject']['accuracy']:.4f}")
    for name in ("micro", "macro_by_class", "macro_by_subject"):
        block = data[name]
        print(
            f"{name:16s}: "
            f"F1 {block['f1']:.4f}  precision {block['precision']:.4f}  "
            f"recall {block['recall']:.4f}"
        )
    print("confusion matrix (rows = true):")
    width = max(len(c) for c in data["classes"]) + 2
    header = " " * width + "".join(f"{c:>{width}}" for c in data["classes"])
    print(header)
    for cls, row in zip(data["classes"], data["confusion_matrix"]):
        print(f"{cls:<{width}}" + "".join(f"{v:>{width}}" for v in row))
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="optstrain",
        description="Optical-strain feature extraction and evaluation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_synth = sub.add_parser("synth", help="generate a synthetic micro-motion dataset")
    p_synth.add_argument("--out", required=True)
    p_synth.add_argument("--classes", type=int, default=3)
    p_synth.add_argument("--subjects", type=int, default=8)
    p_synth.add_argument("--videos-per-subject", type=int, default=5)
    p_synth.add_argument("--size", type=int, default=64)
    p_synth.add_argument("--frames", type=int, default=10)
    p_synth.add_argument("--seed", type=int, default=0)
    p_synth.add_argument("--amplitude-min", type=float, default=0.5)
    p_synth.add_argument("--amplitude-max", type=float, default=1.5)
    p_synth.add_argument("--noise-sigma", type=float, default=0.01)
    p_synth.set_defaults(func=_cmd_synth)

    p_extract = sub.add_parser("extract", help="run feature extraction stages")
    p_extract.add_argument("--manifest", required=True)
    p_extract.add_argument("--config", default=None)
    p_extract.add_argument("--out", default=None)
    p_extract.add_argument("--stage", choices=STAGES, default="all")
    _add_config_flags(p_extract)
    p_extract.set_defaults(func=_cmd_extract)

    p_eval = sub.add_parser("evaluate", help="extract features and cross-validate")
    p_eval.add_argument("--manifest", required=True)
    p_eval.add_argument("--config", default=None)
    p_eval.add_argument("--out", default=None)
    _add_config_flags(p_eval)
    p_eval.set_defaults(func=_cmd_evaluate)

    p_report = sub.add_parser("report", help="summarize a report.json")
    p_report.add_argument("--report", required=True)
    p_report.set_defaults(func=_cmd_report)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
