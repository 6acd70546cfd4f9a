"""The VGG-style audio embedding network and checkpoint loading.

Input is a (batch, 1, 96, 64) log-mel patch tensor; output is a
128-dimensional embedding per patch. Weights are loaded from a local
state-dict checkpoint; there is no download path.
"""

from __future__ import annotations

import os
from pathlib import Path

import torch
from torch import nn

from .errors import ModelUnavailable

EMBEDDING_DIM = 128
WEIGHTS_ENV = "VGGISH_EXPORT_WEIGHTS"


class VggishNet(nn.Module):
    def __init__(self):
        super().__init__()
        self.features = nn.Sequential(
            nn.Conv2d(1, 64, 3, padding=1), nn.ReLU(inplace=True),
            nn.MaxPool2d(2, 2),
            nn.Conv2d(64, 128, 3, padding=1), nn.ReLU(inplace=True),
            nn.MaxPool2d(2, 2),
            nn.Conv2d(128, 256, 3, padding=1), nn.ReLU(inplace=True),
            nn.Conv2d(256, 256, 3, padding=1), nn.ReLU(inplace=True),
            nn.MaxPool2d(2, 2),
            nn.Conv2d(256, 512, 3, padding=1), nn.ReLU(inplace=True),
            nn.Conv2d(512, 512, 3, padding=1), nn.ReLU(inplace=True),
            nn.MaxPool2d(2, 2),
        )
        self.embeddings = nn.Sequential(
            nn.Linear(512 * 6 * 4, 4096), nn.ReLU(inplace=True),
            nn.Linear(4096, 4096), nn.ReLU(inplace=True),
            nn.Linear(4096, EMBEDDING_DIM), nn.ReLU(inplace=True),
        )

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        x = self.features(x)
        # (N, 512, 6, 4) -> time-major flatten, matching the published layout
        x = x.permute(0, 2, 3, 1).reshape(x.shape[0], -1)
        return self.embeddings(x)


def resolve_weights_path(explicit: str | None = None) -> Path:
    path = explicit or os.environ.get(WEIGHTS_ENV)
    if not path:
        raise ModelUnavailable(
            f"no weights path given (use --weights or ${WEIGHTS_ENV})")
    p = Path(path)
    if not p.is_file():
        raise ModelUnavailable(f"weights file not found: {p}")
    return p


def load_model(weights_path: str | None = None) -> VggishNet:
    path = resolve_weights_path(weights_path)
    model = VggishNet()
    try:
        state = torch.load(path, map_location="cpu", weights_only=True)
        model.load_state_dict(state)
    except Exception as e:
        raise ModelUnavailable(f"{path}: {e}") from None
    model.eval()
    return model


def save_random_checkpoint(path, seed: int = 0) -> None:
    """A seeded randomly initialized checkpoint, for tests and dry runs."""
    torch.manual_seed(seed)
    model = VggishNet()
    torch.save(model.state_dict(), path)
