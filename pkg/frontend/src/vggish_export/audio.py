"""Audio ingest for the exporter: WAV decode plus 16 kHz resampling.

Deliberately self-contained — the exporter shares no code with the
consumer of its output; the interchange file is the only contract.
"""

from __future__ import annotations

import wave

import numpy as np

from .errors import DecodeFailure

MODEL_RATE = 16000
_SINC_TAPS = 32


def load_mono(path, utt_id: str) -> np.ndarray:
    """Decode a WAV file to mono float64 in [-1, 1] at the model rate."""
    try:
        with wave.open(str(path), "rb") as w:
            n_channels = w.getnchannels()
            width = w.getsampwidth()
            rate = w.getframerate()
            raw = w.readframes(w.getnframes())
    except (wave.Error, EOFError, OSError) as e:
        raise DecodeFailure(utt_id, str(e)) from None
    if width == 1:
        x = (np.frombuffer(raw, dtype=np.uint8).astype(np.float64) - 128.0) / 128.0
    elif width == 2:
        x = np.frombuffer(raw, dtype="<i2").astype(np.float64) / 32768.0
    elif width == 4:
        x = np.frombuffer(raw, dtype="<i4").astype(np.float64) / 2147483648.0
    else:
        raise DecodeFailure(utt_id, f"unsupported sample width {width}")
    if n_channels > 1:
        x = x.reshape(-1, n_channels).mean(axis=1)
    if len(x) == 0:
        raise DecodeFailure(utt_id, "no audio frames")
    return resample(x, rate, MODEL_RATE)


def resample(x: np.ndarray, src: int, target: int) -> np.ndarray:
    """Band-limited windowed-sinc resampling, DC-exact."""
    if src == target:
        return x
    n_out = int(round(len(x) * target / src))
    ratio = src / target
    cutoff = min(1.0, target / src)
    half = _SINC_TAPS // 2
    t = np.arange(n_out) * ratio
    base = np.floor(t).astype(np.int64)
    frac = t - base
    offsets = np.arange(-half + 1, half + 1)
    idx = base[:, None] + offsets[None, :]
    dt = offsets[None, :] - frac[:, None]
    kern = cutoff * np.sinc(cutoff * dt)
    win = 0.5 + 0.5 * np.cos(np.pi * dt / half)
    kern *= np.where(np.abs(dt) <= half, win, 0.0)
    xp = np.pad(x, (half, half), mode="edge")
    y = np.einsum("nk,nk->n", kern, xp[idx + half])
    y /= kern.sum(axis=1)
    return np.clip(y, -1.0, 1.0)
