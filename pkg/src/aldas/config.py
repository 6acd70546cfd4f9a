"""Pipeline configuration: flat `section.key = value` documents.

Every key has a documented default; unknown keys are rejected. All
randomness funnels through the single root `seed`; per-stage seeds are
derived deterministically from it.
"""

from __future__ import annotations

import zlib
from pathlib import Path

from .errors import UsageError

# key -> (default, type, validator-or-None)
_POS = ("positive", lambda v: v > 0)
_FRAC_OPEN = ("in (0,1)", lambda v: 0.0 < v < 1.0)
_UNIT = ("in [0,1]", lambda v: 0.0 <= v <= 1.0)

DEFAULTS: dict[str, tuple] = {
    "seed": (0, int, None),
    "audio.sample_rate": (16000, int, _POS),
    "frontend.mel_bands": (64, int, _POS),
    "frontend.fmin": (125.0, float, _POS),
    "frontend.fmax": (7500.0, float, _POS),
    "frontend.log_offset": (0.01, float, _POS),
    "frontend.window_ms": (25.0, float, _POS),
    "frontend.hop_ms": (10.0, float, _POS),
    "frontend.patch_frames": (96, int, _POS),
    "embedding.dim": (128, int, _POS),
    "labeler.smote_k": (5, int, _POS),
    "labeler.cv_folds": (5, int, ("at least 2", lambda v: v >= 2)),
    "labeler.max_epochs": (60, int, _POS),
    "labeler.batch_size": (32, int, _POS),
    "labeler.patience": (8, int, _POS),
    "labeler.dropout_grid": ("0.2,0.3,0.5", str, None),
    "labeler.lr_grid": ("0.001,0.0003", str, None),
    "labeler.threshold": (0.5, float, _FRAC_OPEN),
    "detector.l2_alpha": (0.01, float, _UNIT),
    "detector.lr": (0.001, float, _POS),
    "detector.max_epochs": (150, int, _POS),
    "detector.patience": (15, int, _POS),
    "ensemble.weight_aldas": (0.6, float, _UNIT),
    "ensemble.decision_threshold": (0.5, float, _FRAC_OPEN),
    "split.holdout_fraction": (0.15, float, _FRAC_OPEN),
    "synth.n_clips": (840, int, ("at least 20", lambda v: v >= 20)),
    "synth.duration_s": (4.0, float, _POS),
    "synth.breath_rate": (0.5, float, _UNIT),
    "synth.pitch_anomaly_rate": (0.3, float, _UNIT),
    "synth.quality_anomaly_rate": (0.3, float, _UNIT),
}


class PipelineConfig:
    def __init__(self, values: dict | None = None):
        self.values = {k: spec[0] for k, spec in DEFAULTS.items()}
        for k, v in (values or {}).items():
            self.set(k, v)

    def set(self, key: str, raw) -> None:
        if key not in DEFAULTS:
            raise UsageError(f"unknown config key {key!r}")
        _, typ, validator = DEFAULTS[key]
        try:
            val = typ(raw)
        except (TypeError, ValueError):
            raise UsageError(f"config key {key}: cannot parse {raw!r} as {typ.__name__}") from None
        if validator is not None:
            desc, check = validator
            if not check(val):
                raise UsageError(f"config key {key}: {val!r} must be {desc}")
        self.values[key] = val

    def __getitem__(self, key: str):
        return self.values[key]

    def stage_seed(self, stage: str) -> int:
        """Deterministic per-stage seed derived from the root seed."""
        return (self.values["seed"] * 1000003 + zlib.crc32(stage.encode())) % (2 ** 31)

    def echo(self) -> dict:
        return dict(sorted(self.values.items()))

    def float_list(self, key: str) -> list[float]:
        try:
            return [float(p) for p in str(self.values[key]).split(",") if p.strip()]
        except ValueError:
            raise UsageError(f"config key {key}: not a comma-separated float list") from None


def load_config(path=None, overrides: list[str] | None = None) -> PipelineConfig:
    cfg = PipelineConfig()
    if path is not None:
        for line_no, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{line_no}: expected 'key = value'")
            key, _, val = line.partition("=")
            cfg.set(key.strip(), val.strip())
    for item in overrides or []:
        if "=" not in item:
            raise UsageError(f"--set expects key=value, got {item!r}")
        key, _, val = item.partition("=")
        cfg.set(key.strip(), val.strip())
    return cfg
