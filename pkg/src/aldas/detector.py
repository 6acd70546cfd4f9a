"""MLP spoof detector over predicted linguistic-feature vectors.

Fixed shape 3 -> 32 -> 16 -> 1 (relu hidden, sigmoid output), L2 alpha
0.01, Adam with early stopping.
"""

from __future__ import annotations

import numpy as np

from . import nn
from .labeler import EdlfVector

HIDDEN_SIZES = (32, 16)
L2_ALPHA = 0.01


def build_detector(seed: int = 0) -> nn.Model:
    layers = []
    for units in HIDDEN_SIZES:
        layers += [nn.Dense(units), nn.Relu()]
    layers += [nn.Dense(1), nn.Sigmoid()]
    return nn.Model(layers, input_shape=(3,), seed=seed)


def train_detector(vectors: dict[str, EdlfVector], labels: dict[str, int],
                   cfg: nn.TrainConfig | None = None) -> nn.Model:
    """Train on (EdlfVector, spoof label) pairs; genuine=0, spoofed=1."""
    cfg = cfg or nn.TrainConfig(lr=1e-3, l2_alpha=L2_ALPHA, max_epochs=150,
                                patience=15)
    utts = sorted(vectors)
    X = np.stack([vectors[u].as_array() for u in utts])
    y = np.array([labels[u] for u in utts], dtype=np.float64)
    model = build_detector(seed=cfg.seed)
    nn.fit(model, X, y, cfg)
    return model


def score(detector: nn.Model, v: EdlfVector) -> float:
    return float(detector.forward(v.as_array()[None], train=False).ravel()[0])


def score_batch(detector: nn.Model, vectors: dict[str, EdlfVector]) -> dict[str, float]:
    utts = sorted(vectors)
    X = np.stack([vectors[u].as_array() for u in utts])
    out = detector.forward(X, train=False).ravel()
    return {u: float(p) for u, p in zip(utts, out)}
