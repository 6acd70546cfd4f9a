"""Orchestration helpers shared by the CLI and the evaluation harness."""

from __future__ import annotations

import numpy as np

from . import detector as detector_mod
from . import nn
from .audio_io import load_wav
from .config import PipelineConfig
from .dsp import FrontEndConfig, log_mel_patches
from .embeddings import EmbeddingStore, ProjectionSpec, embed_native
from .errors import MissingUtterances
from .fusion import BaselineScores, FusionConfig, fuse
from .labeler import (FEATURES, LabelerBundle, LabelerTrainOptions, Candidate,
                      EdlfVector, predict_hard, predict_soft, train_bundle)
from .manifest import DatasetManifest
from .metrics import ScoreSet, system_metrics


def frontend_from_cfg(cfg: PipelineConfig) -> FrontEndConfig:
    return FrontEndConfig(
        sample_rate=cfg["audio.sample_rate"],
        window_ms=cfg["frontend.window_ms"],
        hop_ms=cfg["frontend.hop_ms"],
        mel_bands=cfg["frontend.mel_bands"],
        fmin=cfg["frontend.fmin"],
        fmax=cfg["frontend.fmax"],
        log_offset=cfg["frontend.log_offset"],
        patch_frames=cfg["frontend.patch_frames"],
    )


def labeler_opts_from_cfg(cfg: PipelineConfig) -> LabelerTrainOptions:
    candidates = tuple(
        Candidate(dropout=d, lr=lr)
        for d in cfg.float_list("labeler.dropout_grid")
        for lr in cfg.float_list("labeler.lr_grid")
    )
    return LabelerTrainOptions(
        candidates=candidates,
        cv_folds=cfg["labeler.cv_folds"],
        smote_k=cfg["labeler.smote_k"],
        max_epochs=cfg["labeler.max_epochs"],
        batch_size=cfg["labeler.batch_size"],
        patience=cfg["labeler.patience"],
        seed=cfg.stage_seed("labelers"),
    )


def extract_native(manifest: DatasetManifest, cfg: PipelineConfig) -> EmbeddingStore:
    """Decode every manifest clip, compute log-mel patches, fit the seeded
    projection's standardization stats over the corpus, and embed."""
    fe = frontend_from_cfg(cfg)
    patch_sets = [log_mel_patches(load_wav(row.path), fe) for row in manifest]
    in_dim = fe.patch_frames * fe.mel_bands
    proj = ProjectionSpec(in_dim=in_dim, out_dim=cfg["embedding.dim"],
                          seed=cfg.stage_seed("projection"))
    proj.fit(patch_sets)
    store = EmbeddingStore(dim=cfg["embedding.dim"])
    for ps in patch_sets:
        store.add(embed_native(ps, proj))
    return store


def patch_sets_from_manifest(manifest: DatasetManifest, cfg: PipelineConfig):
    fe = frontend_from_cfg(cfg)
    return [log_mel_patches(load_wav(row.path), fe) for row in manifest]


def label_store(bundle: LabelerBundle, store: EmbeddingStore,
                hard: bool = False, threshold: float = 0.5) -> dict[str, EdlfVector]:
    if hard:
        return {u: predict_hard(bundle, emb, threshold) for u, emb in store.entries.items()}
    return {u: predict_soft(bundle, emb) for u, emb in store.entries.items()}


def train_full(store: EmbeddingStore, manifest: DatasetManifest, cfg: PipelineConfig):
    """Train the three labelers and the spoof detector on the train split.

    Returns (bundle, cv_reports, detector_model).
    """
    opts = labeler_opts_from_cfg(cfg)
    bundle, reports = train_bundle(store, manifest, opts)
    train_rows = manifest.by_split("train")
    vectors = {r.utt_id: predict_soft(bundle, store[r.utt_id]) for r in train_rows}
    labels = {r.utt_id: int(r.spoof_label == "spoofed") for r in train_rows}
    det_cfg = nn.TrainConfig(lr=cfg["detector.lr"], l2_alpha=cfg["detector.l2_alpha"],
                             max_epochs=cfg["detector.max_epochs"],
                             patience=cfg["detector.patience"],
                             seed=cfg.stage_seed("detector"))
    det = detector_mod.train_detector(vectors, labels, det_cfg)
    return bundle, reports, det


def score_split(bundle: LabelerBundle, det: nn.Model, store: EmbeddingStore,
                rows, hard: bool = False, threshold: float = 0.5) -> dict[str, float]:
    vectors = {r.utt_id: (predict_hard(bundle, store[r.utt_id], threshold) if hard
                          else predict_soft(bundle, store[r.utt_id])) for r in rows}
    return detector_mod.score_batch(det, vectors)


def evaluate_scores(scores: dict[str, float], manifest: DatasetManifest,
                    split: str = "test", threshold: float = 0.5) -> dict:
    rows = manifest.by_split(split) if split != "all" else list(manifest)
    missing = {r.utt_id for r in rows} - scores.keys()
    if missing:
        raise MissingUtterances("no scores for: " + ", ".join(sorted(missing)))
    utts = sorted(r.utt_id for r in rows)
    labels = {r.utt_id: int(r.spoof_label == "spoofed") for r in rows}
    s = ScoreSet(scores=np.array([scores[u] for u in utts]),
                 labels=np.array([labels[u] for u in utts]))
    return system_metrics(s, threshold)


def fused_scores(aldas: dict[str, float], baseline: BaselineScores,
                 weight: float, threshold: float = 0.5) -> dict[str, float]:
    fcfg = FusionConfig(weight_aldas=weight, decision_threshold=threshold)
    fused, _ = fuse(aldas, baseline, fcfg)
    return fused
