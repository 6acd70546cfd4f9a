"""Spectral front end: STFT power, log-mel patches, and LFCCs.

Defaults follow the published conventions of the pretrained audio
embedding model this pipeline feeds: 16 kHz, 25/10 ms window/hop,
64 mel bands over 125-7500 Hz, log offset 0.01, 0.96 s patches.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .audio_io import AudioClip
from .errors import ClipTooShort


@dataclass(frozen=True)
class FrontEndConfig:
    sample_rate: int = 16000
    window_ms: float = 25.0
    hop_ms: float = 10.0
    n_fft: int = 512
    mel_bands: int = 64
    fmin: float = 125.0
    fmax: float = 7500.0
    log_offset: float = 0.01
    patch_frames: int = 96

    @property
    def window_samples(self) -> int:
        return int(round(self.sample_rate * self.window_ms / 1000.0))

    @property
    def hop_samples(self) -> int:
        return int(round(self.sample_rate * self.hop_ms / 1000.0))


DEFAULT_FRONTEND = FrontEndConfig()


@dataclass(frozen=True)
class LogMelPatchSet:
    utt_id: str
    patches: np.ndarray  # (n_patches, patch_frames, mel_bands)


@dataclass(frozen=True)
class LfccVector:
    utt_id: str
    frames: np.ndarray  # (n_frames, n_coeffs)


def _hann(n: int) -> np.ndarray:
    # periodic Hann
    return 0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(n) / n)


def stft_power(clip: AudioClip, window_ms: float = 25.0, hop_ms: float = 10.0,
               n_fft: int = 512) -> np.ndarray:
    """Hann-windowed periodogram |FFT|^2; frames x (n_fft/2+1) bins."""
    win = int(round(clip.sample_rate * window_ms / 1000.0))
    hop = int(round(clip.sample_rate * hop_ms / 1000.0))
    x = clip.samples
    if len(x) < win:
        raise ClipTooShort(f"{clip.utt_id}: {len(x)} samples < one {win}-sample window")
    n_frames = 1 + (len(x) - win) // hop
    idx = np.arange(win)[None, :] + hop * np.arange(n_frames)[:, None]
    frames = x[idx] * _hann(win)[None, :]
    spec = np.fft.rfft(frames, n=n_fft, axis=1)
    return np.abs(spec) ** 2


def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


@lru_cache(maxsize=8)
def mel_filterbank(n_bands: int, n_fft: int, sample_rate: int,
                   fmin: float, fmax: float) -> np.ndarray:
    """Triangular mel filterbank, area-normalized; (n_bands, n_fft/2+1)."""
    edges_hz = mel_to_hz(np.linspace(hz_to_mel(fmin), hz_to_mel(fmax), n_bands + 2))
    bin_hz = np.arange(n_fft // 2 + 1) * sample_rate / n_fft
    fb = np.zeros((n_bands, n_fft // 2 + 1))
    for k in range(n_bands):
        lo, mid, hi = edges_hz[k], edges_hz[k + 1], edges_hz[k + 2]
        up = (bin_hz - lo) / (mid - lo)
        down = (hi - bin_hz) / (hi - mid)
        tri = np.maximum(0.0, np.minimum(up, down))
        fb[k] = tri * (2.0 / (hi - lo))
    return fb


@lru_cache(maxsize=8)
def linear_filterbank(n_filters: int, n_fft: int, sample_rate: int) -> np.ndarray:
    """Triangular filterbank on a linear frequency axis, 0 to Nyquist."""
    edges = np.linspace(0.0, sample_rate / 2.0, n_filters + 2)
    bin_hz = np.arange(n_fft // 2 + 1) * sample_rate / n_fft
    fb = np.zeros((n_filters, n_fft // 2 + 1))
    for k in range(n_filters):
        lo, mid, hi = edges[k], edges[k + 1], edges[k + 2]
        up = (bin_hz - lo) / (mid - lo)
        down = (hi - bin_hz) / (hi - mid)
        fb[k] = np.maximum(0.0, np.minimum(up, down))
    return fb


def _pad_to_window(clip: AudioClip, cfg: FrontEndConfig) -> AudioClip:
    win = cfg.window_samples
    n = len(clip.samples)
    if n >= win:
        return clip
    if n < cfg.hop_samples:
        raise ClipTooShort(f"{clip.utt_id}: {n} samples is shorter than one hop")
    padded = np.concatenate([clip.samples, np.zeros(win - n)])
    return AudioClip(clip.utt_id, padded, clip.sample_rate)


def log_mel_patches(clip: AudioClip, cfg: FrontEndConfig = DEFAULT_FRONTEND) -> LogMelPatchSet:
    """Log-mel spectrogram chopped into non-overlapping patch_frames patches.

    The final partial patch is padded at the log floor log(log_offset)
    so every clip yields at least one full patch.
    """
    clip = _pad_to_window(clip, cfg)
    power = stft_power(clip, cfg.window_ms, cfg.hop_ms, cfg.n_fft)
    fb = mel_filterbank(cfg.mel_bands, cfg.n_fft, cfg.sample_rate, cfg.fmin, cfg.fmax)
    mel = power @ fb.T
    logmel = np.log(mel + cfg.log_offset)
    n_frames = logmel.shape[0]
    n_patches = -(-n_frames // cfg.patch_frames)  # ceil
    floor = np.log(cfg.log_offset)
    full = np.full((n_patches * cfg.patch_frames, cfg.mel_bands), floor)
    full[:n_frames] = logmel
    patches = full.reshape(n_patches, cfg.patch_frames, cfg.mel_bands)
    return LogMelPatchSet(utt_id=clip.utt_id, patches=patches)


def lfcc(clip: AudioClip, n_coeffs: int = 20, n_filters: int = 40,
         cfg: FrontEndConfig = DEFAULT_FRONTEND) -> LfccVector:
    """Linear-frequency cepstral coefficients: DCT-II of log linear-filterbank energies."""
    clip = _pad_to_window(clip, cfg)
    power = stft_power(clip, cfg.window_ms, cfg.hop_ms, cfg.n_fft)
    fb = linear_filterbank(n_filters, cfg.n_fft, cfg.sample_rate)
    energies = np.log(power @ fb.T + cfg.log_offset)
    # DCT-II along the filter axis, first n_coeffs kept
    n = n_filters
    basis = np.cos(np.pi * np.arange(n_coeffs)[:, None] * (2 * np.arange(n)[None, :] + 1) / (2 * n))
    frames = energies @ basis.T
    return LfccVector(utt_id=clip.utt_id, frames=frames)
