"""Synthetic labeled corpus with injected linguistic artifacts.

Each clip is a harmonic "voice" carrier. Ground-truth labels are exact
because the artifacts are injected:

- breath: a 150 ms band-passed noise burst at the phrase boundary
  (a 200 ms silent gap around 2.0 s present in every clip);
- pitch_anomaly: the natural vibrato+drift pitch contour is replaced by
  an unnaturally flat or step-discontinuous one;
- quality_anomaly: band-limiting to 3.4 kHz, 6-bit quantization, and a
  light comb filter.

Spoof label defaults to pitch_anomaly OR quality_anomaly, leaving breath
distributed across both classes.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .audio_io import PIPELINE_RATE, write_wav
from .manifest import DatasetManifest, ManifestRow

GAP_CENTER_S = 2.0
GAP_HALF_S = 0.1          # 200 ms silent gap
BREATH_S = 0.15
BREATH_BAND = (300.0, 3000.0)
QUALITY_CUTOFF_HZ = 3400.0
QUALITY_BITS = 6

ATTACK_MIX = (("replay", 0.23), ("tts", 0.30), ("vc", 0.31), ("mimicry", 0.18))


@dataclass(frozen=True)
class SynthSpec:
    n_clips: int = 840
    duration_s: float = 4.0
    seed: int = 0
    breath_rate: float = 0.5
    pitch_anomaly_rate: float = 0.3
    quality_anomaly_rate: float = 0.3
    spoof_rule: str = "pitch_or_quality"

    def __post_init__(self):
        if self.n_clips < 20:
            raise ValueError("n_clips must be >= 20")
        for r in (self.breath_rate, self.pitch_anomaly_rate, self.quality_anomaly_rate):
            if not 0.0 <= r <= 1.0:
                raise ValueError("artifact rates must be in [0,1]")


def _clip_rng(seed: int, utt_id: str) -> np.random.Generator:
    # per-clip stream so parallel generation cannot change output
    return np.random.default_rng([seed, zlib.crc32(utt_id.encode())])


def _bandpass(x: np.ndarray, lo: float, hi: float, rate: int) -> np.ndarray:
    spec = np.fft.rfft(x)
    freqs = np.fft.rfftfreq(len(x), d=1.0 / rate)
    spec[(freqs < lo) | (freqs > hi)] = 0.0
    return np.fft.irfft(spec, n=len(x))


def _lowpass(x: np.ndarray, cutoff: float, rate: int) -> np.ndarray:
    spec = np.fft.rfft(x)
    freqs = np.fft.rfftfreq(len(x), d=1.0 / rate)
    spec[freqs > cutoff] = 0.0
    return np.fft.irfft(spec, n=len(x))


def synth_clip(utt_id: str, spec: SynthSpec,
               breath: int, pitch_anomaly: int, quality_anomaly: int,
               rate: int = PIPELINE_RATE) -> np.ndarray:
    rng = _clip_rng(spec.seed, utt_id)
    n = int(round(spec.duration_s * rate))
    t = np.arange(n) / rate
    f0 = rng.uniform(90.0, 250.0)

    if pitch_anomaly:
        if rng.random() < 0.5:
            contour = np.full(n, f0)  # unnaturally flat
        else:
            contour = np.full(n, f0)  # flat with one step discontinuity
            jump_at = int(rng.uniform(0.3, 0.7) * n)
            contour[jump_at:] *= rng.uniform(1.25, 1.5)
    else:
        vib = 0.06 * np.sin(2 * np.pi * rng.uniform(4.0, 6.5) * t + rng.uniform(0, 2 * np.pi))
        drift = 0.15 * np.sin(2 * np.pi * rng.uniform(0.15, 0.35) * t + rng.uniform(0, 2 * np.pi))
        contour = f0 * (1.0 + vib + drift)

    phase = 2 * np.pi * np.cumsum(contour) / rate
    x = np.zeros(n)
    n_harm = int(7500.0 / (contour.max()))
    for h in range(1, max(2, n_harm) + 1):
        if h * contour.max() >= rate / 2:
            break
        x += np.sin(h * phase + rng.uniform(0, 2 * np.pi)) / h
    x *= 0.25 / np.max(np.abs(x))
    # slow amplitude envelope plus fade in/out
    env = 0.75 + 0.25 * np.sin(2 * np.pi * rng.uniform(0.3, 0.8) * t + rng.uniform(0, 2 * np.pi))
    fade = np.minimum(1.0, np.minimum(t, t[::-1]) / 0.05)
    x *= env * fade
    # broadband aspiration floor: natural voices are not purely harmonic,
    # and it gives the band-limiting artifact something to remove up high
    x += 0.05 * rng.standard_normal(n) * env * fade

    # phrase boundary: silent gap around GAP_CENTER_S
    gap_lo = int((GAP_CENTER_S - GAP_HALF_S) * rate)
    gap_hi = int((GAP_CENTER_S + GAP_HALF_S) * rate)
    x[gap_lo:gap_hi] = 0.0

    if breath:
        blen = int(BREATH_S * rate)
        start = int(GAP_CENTER_S * rate) - blen // 2
        burst = _bandpass(rng.standard_normal(blen), *BREATH_BAND, rate)
        burst *= 0.15 / max(1e-9, np.max(np.abs(burst)))
        ramp = np.minimum(1.0, np.minimum(np.arange(blen), np.arange(blen)[::-1]) / (0.01 * rate))
        x[start : start + blen] += burst * ramp

    if quality_anomaly:
        x = _lowpass(x, QUALITY_CUTOFF_HZ, rate)
        step = 2.0 / (1 << QUALITY_BITS)
        x = np.round(x / step) * step
        delay = int(0.001 * rate)  # light comb-filter roboticization
        x[delay:] = x[delay:] + 0.4 * x[:-delay]
        x = _lowpass(x, QUALITY_CUTOFF_HZ, rate)

    peak = np.max(np.abs(x))
    if peak > 0.95:
        x *= 0.95 / peak
    return x


def _attack_type(rng: np.random.Generator) -> str:
    u = rng.random()
    acc = 0.0
    for name, p in ATTACK_MIX:
        acc += p
        if u < acc:
            return name
    return ATTACK_MIX[-1][0]


def generate(spec: SynthSpec, out_dir) -> DatasetManifest:
    """Write WAVs and return the ground-truth manifest (splits unassigned)."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    width = len(str(spec.n_clips - 1))
    rows = []
    for i in range(spec.n_clips):
        utt_id = f"synth{i:0{width}d}"
        rng = _clip_rng(spec.seed, utt_id + "/labels")
        breath = int(rng.random() < spec.breath_rate)
        pitch = int(rng.random() < spec.pitch_anomaly_rate)
        quality = int(rng.random() < spec.quality_anomaly_rate)
        if spec.spoof_rule == "pitch_or_quality":
            spoofed = bool(pitch or quality)
        else:
            raise ValueError(f"unknown spoof_rule {spec.spoof_rule!r}")
        attack = _attack_type(rng) if spoofed else "bonafide"
        samples = synth_clip(utt_id, spec, breath, pitch, quality)
        wav_path = out / f"{utt_id}.wav"
        write_wav(wav_path, samples)
        rows.append(ManifestRow(
            utt_id=utt_id, path=str(wav_path),
            spoof_label="spoofed" if spoofed else "genuine",
            attack_type=attack, breath=breath, pitch_anomaly=pitch,
            quality_anomaly=quality, split="NA"))
    return DatasetManifest(rows=rows)


def make_weak_baseline(manifest: DatasetManifest, seed: int = 0,
                       target_eer: tuple[float, float] = (0.25, 0.40)) -> dict[str, float]:
    """Simulated noisy baseline score file: label plus calibrated Gaussian
    noise, with the noise scale bisected until the test-split EER lands
    inside the target band."""
    from .metrics import ScoreSet, eer

    rng = np.random.default_rng(seed)
    rows = manifest.rows
    y = np.array([1 if r.spoof_label == "spoofed" else 0 for r in rows], dtype=float)
    z = rng.standard_normal(len(rows))
    test_mask = np.array([r.split == "test" for r in rows])
    eval_mask = test_mask if test_mask.any() else np.ones(len(rows), bool)

    def test_eer(sigma):
        s = y + sigma * z
        return eer(ScoreSet(scores=s[eval_mask], labels=y[eval_mask].astype(int)))[0]

    lo, hi = 0.05, 6.0
    mid_target = 0.5 * (target_eer[0] + target_eer[1])
    sigma = 1.0
    for _ in range(60):
        sigma = 0.5 * (lo + hi)
        e = test_eer(sigma)
        if target_eer[0] <= e <= target_eer[1]:
            break
        if e < mid_target:
            lo = sigma
        else:
            hi = sigma
    scores = y + sigma * z
    return {r.utt_id: float(s) for r, s in zip(rows, scores)}
