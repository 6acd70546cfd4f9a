"""Corpus manifest parsing and stratified splitting."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import (BadEnum, DuplicateUttId, HeaderMismatch,
                     LabelContradiction, StratumTooSmall, TooFewSamples)

HEADER = ["utt_id", "path", "spoof_label", "attack_type",
          "breath", "pitch_anomaly", "quality_anomaly", "split"]

SPOOF_LABELS = {"genuine", "spoofed"}
ATTACK_TYPES = {"bonafide", "replay", "tts", "vc", "mimicry"}
EDLF_NAMES = ("breath", "pitch_anomaly", "quality_anomaly")
SPLITS = {"train", "test", "NA"}


@dataclass(frozen=True)
class ManifestRow:
    utt_id: str
    path: str
    spoof_label: str       # genuine | spoofed
    attack_type: str       # bonafide | replay | tts | vc | mimicry
    breath: int | None     # 0 | 1 | None (NA)
    pitch_anomaly: int | None
    quality_anomaly: int | None
    split: str             # train | test | NA

    def edlf(self, name: str) -> int | None:
        return getattr(self, name)


@dataclass
class DatasetManifest:
    rows: list[ManifestRow] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    def __len__(self):
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)

    def by_split(self, split: str) -> list[ManifestRow]:
        return [r for r in self.rows if r.split == split]

    def utt_ids(self) -> set[str]:
        return {r.utt_id for r in self.rows}


def _parse_edlf(val: str, row_no: int, col: str) -> int | None:
    if val == "NA":
        return None
    if val in ("0", "1"):
        return int(val)
    raise BadEnum(f"row {row_no}, column {col}: {val!r} (expected 0, 1, or NA)")


def parse_manifest(path) -> DatasetManifest:
    text = Path(path).read_text(encoding="utf-8")
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise HeaderMismatch("empty manifest file") from None
    if header != HEADER:
        raise HeaderMismatch(f"expected header {','.join(HEADER)}, got {','.join(header)}")
    seen = set()
    rows = []
    for row_no, fields in enumerate(reader, start=2):
        if not fields:
            continue
        if len(fields) != len(HEADER):
            raise BadEnum(f"row {row_no}: expected {len(HEADER)} fields, got {len(fields)}")
        utt_id, p, spoof, attack, br, pi, qu, split = fields
        if utt_id in seen:
            raise DuplicateUttId(f"row {row_no}: duplicate utt_id {utt_id!r}")
        seen.add(utt_id)
        if spoof not in SPOOF_LABELS:
            raise BadEnum(f"row {row_no}, column spoof_label: {spoof!r}")
        if attack not in ATTACK_TYPES:
            raise BadEnum(f"row {row_no}, column attack_type: {attack!r}")
        if split not in SPLITS:
            raise BadEnum(f"row {row_no}, column split: {split!r}")
        if (spoof == "genuine") != (attack == "bonafide"):
            raise LabelContradiction(
                f"row {row_no} ({utt_id}): spoof_label {spoof!r} with attack_type {attack!r}")
        rows.append(ManifestRow(
            utt_id=utt_id, path=p, spoof_label=spoof, attack_type=attack,
            breath=_parse_edlf(br, row_no, "breath"),
            pitch_anomaly=_parse_edlf(pi, row_no, "pitch_anomaly"),
            quality_anomaly=_parse_edlf(qu, row_no, "quality_anomaly"),
            split=split))
    return DatasetManifest(rows=rows)


def serialize_manifest(m: DatasetManifest, path) -> None:
    """Rows in input order, LF endings, no quoting unless a field needs it."""
    def cell(v):
        return "NA" if v is None else str(v)
    lines = [",".join(HEADER)]
    for r in m.rows:
        fields = [r.utt_id, r.path, r.spoof_label, r.attack_type,
                  cell(r.breath), cell(r.pitch_anomaly), cell(r.quality_anomaly), r.split]
        lines.append(",".join(f'"{f}"' if "," in f else f for f in fields))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def split_holdout(m: DatasetManifest, fraction: float = 0.15, seed: int = 0) -> DatasetManifest:
    """Stratified holdout by (spoof_label, attack_type) with largest-remainder
    rounding so the global test fraction lands within one row of the target."""
    if not 0.0 < fraction < 1.0:
        raise ValueError("fraction must be in (0,1)")
    strata: dict[tuple[str, str], list[int]] = {}
    for i, r in enumerate(m.rows):
        strata.setdefault((r.spoof_label, r.attack_type), []).append(i)

    warnings = list(m.warnings)
    total_target = fraction * len(m.rows)
    # largest-remainder apportionment of the test quota across strata
    keys = sorted(strata)
    quotas = {k: fraction * len(strata[k]) for k in keys}
    counts = {k: int(np.floor(quotas[k])) for k in keys}
    shortfall = int(round(total_target)) - sum(counts.values())
    remainders = sorted(keys, key=lambda k: (-(quotas[k] - counts[k]), k))
    for k in remainders[:max(0, shortfall)]:
        counts[k] += 1

    rng = np.random.default_rng(seed)
    assignment = {}
    for k in keys:
        idxs = strata[k]
        if len(idxs) < 2:
            warnings.append(f"stratum {k} has {len(idxs)} row(s); assigned to train")
            for i in idxs:
                assignment[i] = "train"
            continue
        n_test = min(counts[k], len(idxs) - 1)
        order = rng.permutation(len(idxs))
        for j, pos in enumerate(order):
            assignment[idxs[pos]] = "test" if j < n_test else "train"

    rows = [replace(r, split=assignment[i]) for i, r in enumerate(m.rows)]
    return DatasetManifest(rows=rows, warnings=warnings)


def kfold(rows: list[ManifestRow], k: int = 5, seed: int = 0,
          stratify_by: str = "spoof_label") -> list[list[ManifestRow]]:
    """Disjoint stratified folds over the given rows.

    stratify_by is 'spoof_label' or an EDLF name; fold sizes within each
    stratum differ by at most one.
    """
    if k < 2:
        raise ValueError("k must be >= 2")
    strata: dict[object, list[ManifestRow]] = {}
    for r in rows:
        key = r.spoof_label if stratify_by == "spoof_label" else r.edlf(stratify_by)
        strata.setdefault(key, []).append(r)
    for key, members in strata.items():
        if len(members) < k:
            raise TooFewSamples(f"stratum {key!r} has {len(members)} rows < k={k}")
    rng = np.random.default_rng(seed)
    folds: list[list[ManifestRow]] = [[] for _ in range(k)]
    for key in sorted(strata, key=str):
        members = strata[key]
        order = rng.permutation(len(members))
        for j, pos in enumerate(order):
            folds[j % k].append(members[pos])
    return folds
