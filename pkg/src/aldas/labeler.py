"""Training and inference for the three linguistic-feature classifiers.

Each labeler is a small conv net over the per-clip patch sequence
(global average pooling makes it length-safe). Candidate hyperparameters
are selected by stratified 5-fold cross-validation on mean validation
AUC, then the winner is refit on all training data. SMOTE is applied
per fold, and only for breath and pitch_anomaly, never quality_anomaly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import nn
from .embeddings import EmbeddingStore, PatchEmbedding
from .errors import DimensionMismatch, MissingLabels
from .manifest import DatasetManifest, ManifestRow, kfold
from .metrics import ScoreSet, roc_auc, f1_accuracy
from .smote import LabeledVectors, smote

FEATURES = ("breath", "pitch_anomaly", "quality_anomaly")
SMOTE_FEATURES = ("breath", "pitch_anomaly")
PATCHES_PER_CLIP = 5
DEFAULT_THRESHOLD = 0.5
MIN_LABELED = 10


@dataclass(frozen=True)
class EdlfVector:
    breath: float
    pitch_anomaly: float
    quality_anomaly: float
    form: str  # soft | hard

    def as_array(self) -> np.ndarray:
        return np.array([self.breath, self.pitch_anomaly, self.quality_anomaly])


@dataclass(frozen=True)
class Candidate:
    dropout: float
    lr: float


DEFAULT_CANDIDATES = tuple(
    Candidate(dropout=d, lr=lr) for d in (0.2, 0.3, 0.5) for lr in (1e-3, 3e-4)
)


@dataclass
class LabelerTrainOptions:
    candidates: tuple[Candidate, ...] = DEFAULT_CANDIDATES
    cv_folds: int = 5
    smote_k: int = 5
    max_epochs: int = 60
    batch_size: int = 32
    patience: int = 8
    seed: int = 0


@dataclass
class LabelerBundle:
    models: dict[str, nn.Model]
    fingerprint: str
    threshold: float = DEFAULT_THRESHOLD

    def dim(self) -> int:
        return self.models["breath"].input_shape[0]


@dataclass
class CvReport:
    feature: str
    chosen: Candidate | None
    per_candidate: list[dict] = field(default_factory=list)
    fold_auc: list[float] = field(default_factory=list)
    fold_accuracy: list[float] = field(default_factory=list)


def clip_input(emb: PatchEmbedding, n_patches: int = PATCHES_PER_CLIP) -> np.ndarray:
    """Pad/truncate the patch sequence to a fixed length; (dim, n_patches).

    Padding vectors are embedding-space zeros; global average pooling in
    the model makes the truncation/padding choice benign.
    """
    v = emb.vectors[:n_patches]
    out = np.zeros((n_patches, emb.dim))
    out[: len(v)] = v
    return out.T  # channels x length


def build_labeler_model(dim: int, dropout: float, seed: int) -> nn.Model:
    layers = [
        nn.Conv1d(out_channels=64, kernel=3),
        nn.BatchNorm(),
        nn.Relu(),
        nn.Dropout(dropout),
        nn.Conv1d(out_channels=32, kernel=3),
        nn.LayerNorm(),
        nn.Relu(),
        nn.GlobalAvgPool(),
        nn.Dense(16),
        nn.Relu(),
        nn.Dense(1),
        nn.Sigmoid(),
    ]
    return nn.Model(layers, input_shape=(dim, PATCHES_PER_CLIP), seed=seed)


def _assemble(rows: list[ManifestRow], store: EmbeddingStore, feature: str):
    X = np.stack([clip_input(store[r.utt_id]) for r in rows])
    y = np.array([r.edlf(feature) for r in rows], dtype=np.float64)
    return X, y


def _fit_one(X, y, dim: int, cand: Candidate, opts: LabelerTrainOptions,
             apply_smote: bool, seed: int) -> nn.Model:
    if apply_smote:
        flat = LabeledVectors(vectors=X.reshape(len(X), -1), labels=y.astype(int))
        balanced = smote(flat, k=opts.smote_k, seed=seed)
        X = balanced.vectors.reshape(-1, dim, PATCHES_PER_CLIP)
        y = balanced.labels.astype(np.float64)
    model = build_labeler_model(dim, cand.dropout, seed=seed)
    cfg = nn.TrainConfig(lr=cand.lr, batch_size=opts.batch_size,
                         max_epochs=opts.max_epochs, patience=opts.patience,
                         seed=seed)
    nn.fit(model, X, y, cfg)
    return model


def train_labeler(feature: str, store: EmbeddingStore, manifest: DatasetManifest,
                  opts: LabelerTrainOptions | None = None) -> tuple[nn.Model, CvReport]:
    """Cross-validated training of one feature labeler on the train split."""
    if feature not in FEATURES:
        raise ValueError(f"unknown feature {feature!r}")
    opts = opts or LabelerTrainOptions()
    rows = [r for r in manifest.by_split("train") if r.edlf(feature) is not None]
    if len(rows) < MIN_LABELED:
        raise MissingLabels(
            f"{feature}: only {len(rows)} labeled training clips (need {MIN_LABELED})")
    apply_smote = feature in SMOTE_FEATURES
    dim = store.dim
    report = CvReport(feature=feature, chosen=None)

    if len(opts.candidates) == 1:
        chosen = opts.candidates[0]
    else:
        folds = kfold(rows, k=opts.cv_folds, seed=opts.seed, stratify_by=feature)
        best_auc = -1.0
        chosen = opts.candidates[0]
        for cand in opts.candidates:
            aucs, accs = [], []
            for i in range(opts.cv_folds):
                val_rows = folds[i]
                tr_rows = [r for j, f in enumerate(folds) if j != i for r in f]
                Xtr, ytr = _assemble(tr_rows, store, feature)
                Xval, yval = _assemble(val_rows, store, feature)
                model = _fit_one(Xtr, ytr, dim, cand, opts, apply_smote,
                                 seed=opts.seed + i)
                pval = model.forward(Xval, train=False).ravel()
                s = ScoreSet(scores=pval, labels=yval.astype(int))
                aucs.append(roc_auc(s))
                accs.append(f1_accuracy(s, DEFAULT_THRESHOLD)["accuracy"])
            mean_auc = float(np.mean(aucs))
            report.per_candidate.append(
                {"dropout": cand.dropout, "lr": cand.lr,
                 "mean_auc": mean_auc, "fold_auc": aucs, "fold_accuracy": accs})
            if mean_auc > best_auc:
                best_auc = mean_auc
                chosen = cand
                report.fold_auc = aucs
                report.fold_accuracy = accs

    report.chosen = chosen
    X, y = _assemble(rows, store, feature)
    final = _fit_one(X, y, dim, chosen, opts, apply_smote, seed=opts.seed)
    return final, report


def train_bundle(store: EmbeddingStore, manifest: DatasetManifest,
                 opts: LabelerTrainOptions | None = None,
                 fingerprint: str = "") -> tuple[LabelerBundle, dict[str, CvReport]]:
    models = {}
    reports = {}
    for feature in FEATURES:
        models[feature], reports[feature] = train_labeler(feature, store, manifest, opts)
    fp = fingerprint or f"dim={store.dim};patches={PATCHES_PER_CLIP}"
    return LabelerBundle(models=models, fingerprint=fp), reports


def predict_soft(bundle: LabelerBundle, emb: PatchEmbedding) -> EdlfVector:
    """Three sigmoid probabilities; deterministic eval-mode forward."""
    if emb.dim != bundle.dim():
        raise DimensionMismatch(f"embedding dim {emb.dim} != bundle dim {bundle.dim()}")
    x = clip_input(emb)[None]
    vals = {f: float(bundle.models[f].forward(x, train=False).ravel()[0])
            for f in FEATURES}
    return EdlfVector(form="soft", **vals)


def predict_hard(bundle: LabelerBundle, emb: PatchEmbedding,
                 threshold: float = DEFAULT_THRESHOLD) -> EdlfVector:
    """Elementwise soft >= threshold; ties classify as 1."""
    if not 0.0 < threshold < 1.0:
        raise ValueError("threshold must be in (0,1)")
    soft = predict_soft(bundle, emb)
    return EdlfVector(
        breath=float(soft.breath >= threshold),
        pitch_anomaly=float(soft.pitch_anomaly >= threshold),
        quality_anomaly=float(soft.quality_anomaly >= threshold),
        form="hard")


def write_edlf_csv(vectors: dict[str, EdlfVector], path) -> None:
    """Interchange CSV: utt_id,breath,pitch_anomaly,quality_anomaly,form."""
    lines = ["utt_id,breath,pitch_anomaly,quality_anomaly,form"]
    for u in sorted(vectors):
        v = vectors[u]
        lines.append(f"{u},{v.breath:.9g},{v.pitch_anomaly:.9g},{v.quality_anomaly:.9g},{v.form}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_edlf_csv(path) -> dict[str, EdlfVector]:
    from .errors import ParseError
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or lines[0] != "utt_id,breath,pitch_anomaly,quality_anomaly,form":
        raise ParseError(f"{path}: bad EDLF CSV header")
    out = {}
    for line_no, line in enumerate(lines[1:], 2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 5:
            raise ParseError(f"{path}:{line_no}: expected 5 fields")
        u, b, p, q, form = parts
        if form not in ("soft", "hard"):
            raise ParseError(f"{path}:{line_no}: bad form {form!r}")
        out[u] = EdlfVector(breath=float(b), pitch_anomaly=float(p),
                            quality_anomaly=float(q), form=form)
    return out


def save_bundle(bundle: LabelerBundle, out_dir) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for feature, model in bundle.models.items():
        nn.save_model(model, out / f"{feature}.alnn")
    lines = [f"fingerprint = {bundle.fingerprint}",
             f"threshold = {bundle.threshold}",
             "features = " + ",".join(FEATURES)]
    (out / "bundle.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_bundle(bundle_dir) -> LabelerBundle:
    d = Path(bundle_dir)
    meta = {}
    for line in (d / "bundle.txt").read_text(encoding="utf-8").splitlines():
        k, _, v = (p.strip() for p in line.partition("="))
        meta[k] = v
    models = {f: nn.load_model(d / f"{f}.alnn") for f in FEATURES}
    return LabelerBundle(models=models, fingerprint=meta.get("fingerprint", ""),
                         threshold=float(meta.get("threshold", DEFAULT_THRESHOLD)))
