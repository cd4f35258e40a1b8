"""Pipeline driver: manifests, configuration, extraction and evaluation runs.

A dataset is described by a manifest (JSON array or CSV) of records
``video_id, subject_id, label, frame_dir[, onset, offset]``; frame
directories are resolved relative to the manifest file.  A PipelineConfig
bundles every tunable of the feature extractors and the evaluator, round
trips through a plain ``key = value`` text file, and hashes canonically so
cached features can be trusted.
"""

from __future__ import annotations

import concurrent.futures
import csv
import hashlib
import json
import math
import os
import time
from dataclasses import dataclass, fields

import numpy as np

from . import evaluate as ev
from .imaging import FrameSequence, load_sequence
from .lbptop import LbpTopParams
from .osf import osf_vector
from .osw import osw_vector

FEATURE_SETS = ("combined", "osf", "osw")


@dataclass
class ManifestEntry:
    video_id: str
    subject_id: str
    label: str
    frame_dir: str
    onset: int | None = None
    offset: int | None = None


def load_manifest(path) -> list[ManifestEntry]:
    """Read a JSON or CSV manifest; relative frame_dirs resolve against it."""
    base = os.path.dirname(os.path.abspath(path))
    entries = []
    if str(path).endswith(".json"):
        with open(path) as fh:
            records = json.load(fh)
        for rec in records:
            entries.append(
                ManifestEntry(
                    video_id=str(rec["video_id"]),
                    subject_id=str(rec["subject_id"]),
                    label=str(rec["label"]),
                    frame_dir=rec["frame_dir"],
                    onset=rec.get("onset"),
                    offset=rec.get("offset"),
                )
            )
    else:
        with open(path, newline="") as fh:
            for rec in csv.DictReader(fh):
                onset = rec.get("onset")
                offset = rec.get("offset")
                entries.append(
                    ManifestEntry(
                        video_id=rec["video_id"],
                        subject_id=rec["subject_id"],
                        label=rec["label"],
                        frame_dir=rec["frame_dir"],
                        onset=int(onset) if onset not in (None, "") else None,
                        offset=int(offset) if offset not in (None, "") else None,
                    )
                )
    for entry in entries:
        if not os.path.isabs(entry.frame_dir):
            entry.frame_dir = os.path.join(base, entry.frame_dir)
    _validate_manifest(entries)
    return entries


def save_manifest(entries: list[ManifestEntry], path) -> None:
    records = []
    for e in entries:
        rec = {
            "video_id": e.video_id,
            "subject_id": e.subject_id,
            "label": e.label,
            "frame_dir": e.frame_dir,
        }
        if e.onset is not None:
            rec["onset"] = e.onset
        if e.offset is not None:
            rec["offset"] = e.offset
        records.append(rec)
    with open(path, "w") as fh:
        json.dump(records, fh, indent=2)
        fh.write("\n")


def _validate_manifest(entries: list[ManifestEntry]) -> None:
    if not entries:
        raise ValueError("empty manifest")
    seen = set()
    for e in entries:
        if e.video_id in seen:
            raise ValueError(f"duplicate video_id in manifest: {e.video_id!r}")
        seen.add(e.video_id)
        if not e.label:
            raise ValueError(f"empty label for video {e.video_id!r}")


@dataclass
class PipelineConfig:
    """Every tunable of the extraction and evaluation pipeline.

    Fields serialize to a ``key = value`` text file and back without loss;
    each key is also exposed as a CLI flag of the same name.
    """

    # LBP-TOP
    p_xy: int = 4
    p_xt: int = 4
    p_yt: int = 4
    r_x: int = 1
    r_y: int = 1
    r_t: int = 4
    n_blocks: int = 5
    bins_per_plane: int = 15
    zero_noise_blocks: bool = False
    # strain pre-processing
    rho_l: float = 0.05
    rho_u: float = 0.05
    edge_quantile: float = 0.9
    osw_preprocess_weights: bool = False
    # smoothing (per feature path)
    gaussian_osf: bool = False
    gaussian_osw: bool = True
    gaussian_size: int = 5
    gaussian_sigma: float = 0.5
    # flow / OSF grid
    flow_window: int = 5
    osf_size: int = 50
    # temporal standardization
    resample: bool = True
    resample_length: int = 10
    # evaluation
    protocol: str = "LOSO"
    svm_c: float = 10000.0
    standardize: bool = False
    feature_set: str = "combined"
    # execution
    jobs: int = 1
    on_error: str = "skip"
    use_cache: bool = True
    out_dir: str = "runs/latest"

    # keys that change the extracted features (the cache identity)
    _FEATURE_KEYS = (
        "p_xy", "p_xt", "p_yt", "r_x", "r_y", "r_t", "n_blocks",
        "bins_per_plane", "zero_noise_blocks", "rho_l", "rho_u",
        "edge_quantile", "osw_preprocess_weights", "gaussian_osf",
        "gaussian_osw", "gaussian_size", "gaussian_sigma", "flow_window",
        "osf_size", "resample", "resample_length",
    )

    def __post_init__(self):
        if self.protocol not in ("LOSO", "LOVO"):
            raise ValueError(f"protocol must be LOSO or LOVO, got {self.protocol!r}")
        if self.feature_set not in FEATURE_SETS:
            raise ValueError(f"feature_set must be one of {FEATURE_SETS}")
        if self.on_error not in ("skip", "abort"):
            raise ValueError("on_error must be 'skip' or 'abort'")
        if self.jobs < 1:
            raise ValueError("jobs must be >= 1")
        if self.resample_length < 2:
            raise ValueError("resample_length must be >= 2")
        self.lbptop_params()  # validates the LBP-TOP block of fields

    def lbptop_params(self) -> LbpTopParams:
        return LbpTopParams(
            p_xy=self.p_xy, p_xt=self.p_xt, p_yt=self.p_yt,
            r_x=self.r_x, r_y=self.r_y, r_t=self.r_t,
            n_blocks=self.n_blocks, bins_per_plane=self.bins_per_plane,
        )

    def to_text(self) -> str:
        lines = []
        for f in fields(self):
            value = getattr(self, f.name)
            lines.append(f"{f.name} = {value}")
        return "\n".join(lines) + "\n"

    def save(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_text())

    @classmethod
    def from_text(cls, text: str) -> "PipelineConfig":
        known = {f.name: f.type for f in fields(cls)}
        overrides = {}
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"config line {lineno} is not 'key = value': {raw!r}")
            key, value = (part.strip() for part in line.split("=", 1))
            if key not in known:
                raise ValueError(f"unknown config key {key!r} on line {lineno}")
            overrides[key] = _parse_value(value, known[key])
        return cls(**overrides)

    @classmethod
    def load(cls, path) -> "PipelineConfig":
        with open(path) as fh:
            return cls.from_text(fh.read())

    def config_hash(self) -> str:
        return hashlib.sha256(self.to_text().encode()).hexdigest()

    def feature_hash(self) -> str:
        text = "\n".join(f"{k} = {getattr(self, k)}" for k in self._FEATURE_KEYS)
        return hashlib.sha256(text.encode()).hexdigest()


def _parse_value(value: str, type_name: str):
    type_name = str(type_name)
    if "bool" in type_name:
        if value in ("True", "true", "1", "yes", "on"):
            return True
        if value in ("False", "false", "0", "no", "off"):
            return False
        raise ValueError(f"not a boolean: {value!r}")
    if "int" in type_name:
        return int(value)
    if "float" in type_name:
        return float(value)
    return value


def resample_temporal(seq: FrameSequence, target_len: int = 10) -> FrameSequence:
    """Resample a sequence to a fixed frame count by linear blending.

    Frame k sits at source position k*(F-1)/(target_len-1) and is the
    weighted blend of its two nearest source frames; the endpoints map
    exactly onto the first and last source frames, and target_len == F
    reproduces the input frame-for-frame.
    """
    if target_len < 2:
        raise ValueError(f"target_len must be >= 2, got {target_len}")
    positions = np.linspace(0.0, len(seq) - 1.0, target_len)
    frames = []
    for pos in positions:
        lo = int(math.floor(pos))
        frac = pos - lo
        if frac == 0.0:
            frames.append(seq.frames[lo].copy())
        else:
            frames.append((1.0 - frac) * seq.frames[lo] + frac * seq.frames[lo + 1])
    return FrameSequence(seq.video_id, seq.subject_id, seq.label, frames, seq.fps)


def extract_features(seq: FrameSequence, config: PipelineConfig) -> dict:
    """OSF, OSW and concatenated feature vectors of one sequence."""
    if config.resample:
        seq = resample_temporal(seq, config.resample_length)
    osf_fv = osf_vector(
        seq,
        window=config.flow_window,
        edge_quantile=config.edge_quantile,
        rho_l=config.rho_l,
        rho_u=config.rho_u,
        out_size=config.osf_size,
        smooth=config.gaussian_osf,
        smooth_size=config.gaussian_size,
        smooth_sigma=config.gaussian_sigma,
    )
    osw_fv = osw_vector(
        seq,
        config.lbptop_params(),
        window=config.flow_window,
        smooth=config.gaussian_osw,
        smooth_size=config.gaussian_size,
        smooth_sigma=config.gaussian_sigma,
        zero_noise=config.zero_noise_blocks,
        preprocess_weights=config.osw_preprocess_weights,
        edge_quantile=config.edge_quantile,
        rho_l=config.rho_l,
        rho_u=config.rho_u,
    )
    return {"osf": osf_fv, "osw": osw_fv, "combined": ev.concat_features(osf_fv, osw_fv)}


def write_features_csv(features: list, path) -> None:
    """Write feature vectors as CSV rows: video_id, subject_id, label, values."""
    with open(path, "w", newline="") as fh:
        for fv in features:
            row = [fv.video_id, fv.subject_id, fv.label]
            row.extend(repr(float(v)) for v in fv.values)
            fh.write(",".join(row))
            fh.write("\n")


def read_features_csv(path) -> list:
    features = []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            features.append(
                ev.FeatureVector(
                    values=np.array([float(v) for v in row[3:]]),
                    video_id=row[0],
                    subject_id=row[1],
                    label=row[2],
                )
            )
    return features


@dataclass
class PipelineResult:
    features: dict
    report: ev.EvalReport | None
    failures: list
    timings: dict


def _cache_path(cache_dir: str, video_id: str, feature_hash: str) -> str:
    return os.path.join(cache_dir, f"{video_id}.{feature_hash[:16]}.npz")


def _extract_one(entry: ManifestEntry, config: PipelineConfig, cache_dir: str | None):
    if cache_dir:
        path = _cache_path(cache_dir, entry.video_id, config.feature_hash())
        if os.path.exists(path):
            with np.load(path) as data:
                osf_fv = ev.FeatureVector(data["osf"], entry.video_id, entry.subject_id, entry.label)
                osw_fv = ev.FeatureVector(data["osw"], entry.video_id, entry.subject_id, entry.label)
            return {"osf": osf_fv, "osw": osw_fv, "combined": ev.concat_features(osf_fv, osw_fv)}
    result = extract_features(load_sequence(entry), config)
    if cache_dir:
        path = _cache_path(cache_dir, entry.video_id, config.feature_hash())
        tmp = path + ".tmp.npz"
        np.savez(tmp, osf=result["osf"].values, osw=result["osw"].values)
        os.replace(tmp, path)
    return result


def run_pipeline(
    manifest: list[ManifestEntry],
    config: PipelineConfig,
    out_dir: str | None = None,
    evaluate: bool = True,
    log=None,
) -> PipelineResult:
    """Extract features for every manifest entry and cross-validate them.

    Videos are processed by a bounded worker pool of ``config.jobs``
    threads; outputs are assembled in manifest order, so results do not
    depend on scheduling.  Failing videos are skipped and logged, or abort
    the run, per ``config.on_error``.

    When ``out_dir`` is given, writes: osf.csv / osw.csv / combined.csv
    feature matrices, report.json, predictions.csv, confusion.csv, the
    effective config, and run_meta.json with the config hash and per-stage
    timings.
    """
    _validate_manifest(manifest)
    say = log if log is not None else (lambda msg: None)
    t_start = time.perf_counter()

    cache_dir = None
    if config.use_cache and out_dir is not None:
        cache_dir = os.path.join(out_dir, "feature_cache")
        os.makedirs(cache_dir, exist_ok=True)

    failures = []
    per_video = [None] * len(manifest)
    with concurrent.futures.ThreadPoolExecutor(max_workers=config.jobs) as pool:
        futures = [
            pool.submit(_extract_one, entry, config, cache_dir) for entry in manifest
        ]
        for i, (entry, future) in enumerate(zip(manifest, futures)):
            try:
                per_video[i] = future.result()
            except Exception as exc:
                if config.on_error == "abort":
                    raise
                failures.append({"video_id": entry.video_id, "error": str(exc)})
                say(f"skipping {entry.video_id}: {exc}")

    features = {
        name: [r[name] for r in per_video if r is not None]
        for name in FEATURE_SETS
    }
    if not features["combined"]:
        raise ValueError("no video produced features; nothing to evaluate")
    t_extracted = time.perf_counter()

    report = None
    if evaluate:
        report = ev.cross_validate(
            features[config.feature_set],
            protocol=config.protocol,
            c=config.svm_c,
            standardize=config.standardize,
        )
    t_done = time.perf_counter()
    timings = {
        "extract_s": t_extracted - t_start,
        "evaluate_s": t_done - t_extracted,
        "total_s": t_done - t_start,
    }

    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        for name in FEATURE_SETS:
            write_features_csv(features[name], os.path.join(out_dir, f"{name}.csv"))
        if report is not None:
            report.save_json(os.path.join(out_dir, "report.json"))
            report.save_predictions_csv(os.path.join(out_dir, "predictions.csv"))
            report.save_confusion_csv(os.path.join(out_dir, "confusion.csv"))
        config.save(os.path.join(out_dir, "config.txt"))
        meta = {
            "config_hash": config.config_hash(),
            "feature_hash": config.feature_hash(),
            "n_videos": len(manifest),
            "n_extracted": len(features["combined"]),
            "failures": failures,
            "timings": timings,
        }
        with open(os.path.join(out_dir, "run_meta.json"), "w") as fh:
            json.dump(meta, fh, indent=2, sort_keys=True)
            fh.write("\n")

    return PipelineResult(features=features, report=report, failures=failures, timings=timings)
