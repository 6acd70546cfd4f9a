"""WAV decoding and resampling to the pipeline rate (16 kHz mono)."""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import EmptyAudio, MalformedWav, UnsupportedEncoding

PIPELINE_RATE = 16000

_FMT_PCM = 1
_FMT_FLOAT = 3
_FMT_EXTENSIBLE = 0xFFFE

_SINC_TAPS = 32


@dataclass(frozen=True)
class AudioClip:
    utt_id: str
    samples: np.ndarray  # float64 mono, values in [-1, 1]
    sample_rate: int

    def __post_init__(self):
        object.__setattr__(self, "samples", np.asarray(self.samples, dtype=np.float64))

    @property
    def duration_s(self) -> float:
        return len(self.samples) / self.sample_rate


def _read_chunks(data: bytes):
    """Yield (chunk_id, payload) for each top-level RIFF chunk."""
    if len(data) < 12 or data[0:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise MalformedWav("not a RIFF/WAVE file")
    pos = 12
    while pos + 8 <= len(data):
        cid = data[pos : pos + 4]
        (size,) = struct.unpack("<I", data[pos + 4 : pos + 8])
        payload = data[pos + 8 : pos + 8 + size]
        if len(payload) < size:
            raise MalformedWav(f"chunk {cid!r} truncated")
        yield cid, payload
        pos += 8 + size + (size & 1)  # chunks are word-aligned


def _decode_pcm(raw: bytes, bits: int, fmt: int) -> np.ndarray:
    if fmt == _FMT_FLOAT:
        if bits != 32:
            raise UnsupportedEncoding(f"float WAV must be 32-bit, got {bits}")
        return np.frombuffer(raw, dtype="<f4").astype(np.float64)
    if fmt != _FMT_PCM:
        raise UnsupportedEncoding(f"compressed WAV (format tag {fmt}) not supported")
    if bits == 8:
        # 8-bit WAV is unsigned
        x = np.frombuffer(raw, dtype=np.uint8).astype(np.float64)
        return (x - 128.0) / 128.0
    if bits == 16:
        return np.frombuffer(raw, dtype="<i2").astype(np.float64) / 32768.0
    if bits == 24:
        b = np.frombuffer(raw, dtype=np.uint8)
        if len(b) % 3:
            raise MalformedWav("24-bit data size not a multiple of 3")
        b = b.reshape(-1, 3).astype(np.int32)
        x = b[:, 0] | (b[:, 1] << 8) | (b[:, 2] << 16)
        x = np.where(x >= 1 << 23, x - (1 << 24), x)
        return x.astype(np.float64) / float(1 << 23)
    raise UnsupportedEncoding(f"unsupported sample width: {bits} bits")


def load_wav(path) -> AudioClip:
    """Decode a PCM WAV file to a mono AudioClip at the pipeline rate.

    Stereo is averaged to mono; integer samples are scaled by the type's
    max magnitude; any source rate is resampled to 16 kHz.
    """
    path = Path(path)
    data = path.read_bytes()
    fmt_chunk = None
    pcm = None
    for cid, payload in _read_chunks(data):
        if cid == b"fmt ":
            fmt_chunk = payload
        elif cid == b"data":
            pcm = payload
    if fmt_chunk is None or len(fmt_chunk) < 16:
        raise MalformedWav("missing or short fmt chunk")
    if pcm is None:
        raise MalformedWav("missing data chunk")
    fmt, channels, rate, _, _, bits = struct.unpack("<HHIIHH", fmt_chunk[:16])
    if fmt == _FMT_EXTENSIBLE:
        if len(fmt_chunk) < 40:
            raise MalformedWav("short WAVE_FORMAT_EXTENSIBLE fmt chunk")
        (fmt,) = struct.unpack("<H", fmt_chunk[24:26])
    if channels not in (1, 2):
        raise UnsupportedEncoding(f"{channels} channels not supported")
    x = _decode_pcm(pcm, bits, fmt)
    if x.size == 0:
        raise EmptyAudio(f"{path.name}: zero samples")
    if channels == 2:
        if len(x) % 2:
            raise MalformedWav("stereo data with odd sample count")
        x = x.reshape(-1, 2).mean(axis=1)
    x = np.clip(x, -1.0, 1.0)
    clip = AudioClip(utt_id=path.stem, samples=x, sample_rate=rate)
    return resample(clip, PIPELINE_RATE)


def resample(clip: AudioClip, target_rate: int) -> AudioClip:
    """Band-limited resampling via a 32-tap Hann-windowed sinc kernel."""
    if target_rate <= 0:
        raise ValueError("target_rate must be positive")
    src = clip.sample_rate
    if src == target_rate:
        return clip
    x = clip.samples
    n_out = int(round(len(x) * target_rate / src))
    ratio = src / target_rate
    # low-pass cutoff at the narrower Nyquist, as a fraction of source Nyquist
    cutoff = min(1.0, target_rate / src)
    half = _SINC_TAPS // 2
    t = np.arange(n_out) * ratio  # output positions in source-sample units
    base = np.floor(t).astype(np.int64)
    frac = t - base
    offsets = np.arange(-half + 1, half + 1)  # 32 taps around each position
    idx = base[:, None] + offsets[None, :]
    dt = offsets[None, :] - frac[:, None]
    kern = cutoff * np.sinc(cutoff * dt)
    win = 0.5 + 0.5 * np.cos(np.pi * dt / half)
    kern *= np.where(np.abs(dt) <= half, win, 0.0)
    xp = np.pad(x, (half, half), mode="edge")
    y = np.einsum("nk,nk->n", kern, xp[idx + half])
    # normalize by the kernel mass so DC is preserved exactly
    y /= kern.sum(axis=1)
    y = np.clip(y, -1.0, 1.0)
    return AudioClip(utt_id=clip.utt_id, samples=y, sample_rate=target_rate)


def write_wav(path, samples: np.ndarray, sample_rate: int = PIPELINE_RATE) -> None:
    """Write mono 16-bit PCM WAV."""
    x = np.clip(np.asarray(samples, dtype=np.float64), -1.0, 1.0)
    pcm = np.round(x * 32767.0).astype("<i2").tobytes()
    hdr = b"RIFF" + struct.pack("<I", 36 + len(pcm)) + b"WAVE"
    hdr += b"fmt " + struct.pack("<IHHIIHH", 16, _FMT_PCM, 1, sample_rate,
                                 sample_rate * 2, 2, 16)
    hdr += b"data" + struct.pack("<I", len(pcm))
    Path(path).write_bytes(hdr + pcm)
