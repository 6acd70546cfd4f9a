"""Batch embedding export: manifest in, ALDE interchange file out."""

from __future__ import annotations

import csv
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch

from .audio import load_mono
from .errors import ManifestError
from .melspec import log_mel_patches
from .model import EMBEDDING_DIM, load_model

ALDE_MAGIC = b"ALDE"
ALDE_VERSION = 1


@dataclass(frozen=True)
class ExportJob:
    manifest_path: str
    out_path: str
    batch_size: int = 32
    weights_path: str | None = None

    def __post_init__(self):
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")


def read_manifest(path) -> dict[str, str]:
    """utt_id -> audio path, from the pipeline's manifest CSV."""
    try:
        with open(path, newline="", encoding="utf-8") as f:
            reader = csv.reader(f)
            header = next(reader, None)
            if header is None or header[:2] != ["utt_id", "path"]:
                raise ManifestError(f"{path}: expected a manifest CSV with "
                                    "utt_id,path,... columns")
            clips = {}
            for line_no, row in enumerate(reader, 2):
                if not row:
                    continue
                if len(row) < 2:
                    raise ManifestError(f"{path}:{line_no}: too few fields")
                utt_id, audio_path = row[0], row[1]
                if utt_id in clips:
                    raise ManifestError(f"{path}:{line_no}: duplicate utt_id {utt_id!r}")
                clips[utt_id] = audio_path
    except OSError as e:
        raise ManifestError(str(e)) from None
    if not clips:
        raise ManifestError(f"{path}: no clips")
    return clips


def write_alde(embeddings: dict[str, np.ndarray], path) -> None:
    """Records in lexicographic utt_id order, float32 little-endian."""
    with open(path, "wb") as f:
        f.write(ALDE_MAGIC)
        f.write(struct.pack("<III", ALDE_VERSION, EMBEDDING_DIM, len(embeddings)))
        for utt_id in sorted(embeddings):
            vecs = np.ascontiguousarray(embeddings[utt_id], dtype="<f4")
            ident = utt_id.encode("utf-8")
            f.write(struct.pack("<H", len(ident)))
            f.write(ident)
            f.write(struct.pack("<H", vecs.shape[0]))
            f.write(vecs.tobytes())


def embed_clips(job: ExportJob) -> dict[str, np.ndarray]:
    clips = read_manifest(job.manifest_path)
    model = load_model(job.weights_path)
    patches = []
    spans = {}  # utt_id -> (start, count) into the patch list
    for utt_id in sorted(clips):
        x = load_mono(clips[utt_id], utt_id)
        p = log_mel_patches(x, utt_id)
        spans[utt_id] = (len(patches), p.shape[0])
        patches.extend(p)
    stacked = torch.from_numpy(np.stack(patches)).float().unsqueeze(1)
    outs = []
    with torch.no_grad():
        for i in range(0, len(stacked), job.batch_size):
            outs.append(model(stacked[i : i + job.batch_size]).numpy())
    all_emb = np.concatenate(outs)
    return {u: all_emb[start : start + count] for u, (start, count) in spans.items()}


def export(job: ExportJob) -> int:
    """Run the model over every clip and write the ALDE file.

    Returns the number of clips exported.
    """
    embeddings = embed_clips(job)
    out = Path(job.out_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_alde(embeddings, out)
    return len(embeddings)
