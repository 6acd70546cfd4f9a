"""Log-mel patch extraction with the embedding model's input conventions.

Framing: 25 ms periodic-Hann windows, 10 ms hop, 512-point FFT, 64 mel
bands over 125-7500 Hz, log(mel + 0.01), 96-frame patches with the final
partial patch padded at the log floor. These conventions are mirrored by
the downstream feature pipeline, so per-clip patch counts agree exactly.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from .audio import MODEL_RATE
from .errors import DecodeFailure

WINDOW_S = 0.025
HOP_S = 0.010
N_FFT = 512
MEL_BANDS = 64
FMIN = 125.0
FMAX = 7500.0
LOG_OFFSET = 0.01
PATCH_FRAMES = 96


def _hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def _mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


@lru_cache(maxsize=4)
def _filterbank(rate: int) -> np.ndarray:
    n_bins = N_FFT // 2 + 1
    freqs = np.arange(n_bins) * rate / N_FFT
    edges = _mel_to_hz(np.linspace(_hz_to_mel(FMIN), _hz_to_mel(FMAX), MEL_BANDS + 2))
    fb = np.zeros((n_bins, MEL_BANDS))
    for i in range(MEL_BANDS):
        lo, center, hi = edges[i], edges[i + 1], edges[i + 2]
        up = (freqs - lo) / (center - lo)
        down = (hi - freqs) / (hi - center)
        fb[:, i] = np.maximum(0.0, np.minimum(up, down)) * 2.0 / (hi - lo)
    return fb


def log_mel_patches(x: np.ndarray, utt_id: str, rate: int = MODEL_RATE) -> np.ndarray:
    """(n_patches, 96, 64) log-mel patches for one mono clip."""
    win = int(round(rate * WINDOW_S))
    hop = int(round(rate * HOP_S))
    if len(x) < hop:
        raise DecodeFailure(utt_id, f"clip too short ({len(x)} samples)")
    if len(x) < win:
        x = np.pad(x, (0, win - len(x)))
    n_frames = 1 + (len(x) - win) // hop
    idx = np.arange(win)[None, :] + hop * np.arange(n_frames)[:, None]
    window = 0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(win) / win)
    spec = np.abs(np.fft.rfft(x[idx] * window, n=N_FFT)) ** 2
    mel = np.log(spec @ _filterbank(rate) + LOG_OFFSET)
    n_patches = math.ceil(n_frames / PATCH_FRAMES)
    out = np.full((n_patches * PATCH_FRAMES, MEL_BANDS), np.log(LOG_OFFSET))
    out[:n_frames] = mel
    return out.reshape(n_patches, PATCH_FRAMES, MEL_BANDS)
