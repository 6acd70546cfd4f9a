"""Synthetic corpus generator: determinism, label fidelity, detectability."""

import numpy as np
import pytest

from aldas.audio_io import PIPELINE_RATE, load_wav
from aldas.dsp import FrontEndConfig, log_mel_patches
from aldas.manifest import split_holdout
from aldas.metrics import ScoreSet, eer, roc_auc
from aldas.synth import (GAP_CENTER_S, QUALITY_CUTOFF_HZ, SynthSpec, generate,
                         make_weak_baseline, synth_clip)

RATE = PIPELINE_RATE


def test_spec_validation(tmp_path):
    with pytest.raises(ValueError):
        SynthSpec(n_clips=5)
    with pytest.raises(ValueError):
        SynthSpec(breath_rate=1.5)
    with pytest.raises(ValueError):
        generate(SynthSpec(n_clips=20, spoof_rule="nonsense"), tmp_path)


def test_generate_is_deterministic(tmp_path):
    spec = SynthSpec(n_clips=20, seed=9)
    m1 = generate(spec, tmp_path / "a")
    m2 = generate(spec, tmp_path / "b")
    for r1, r2 in zip(m1, m2):
        assert r1.utt_id == r2.utt_id
        assert (r1.spoof_label, r1.attack_type, r1.breath, r1.pitch_anomaly,
                r1.quality_anomaly) == (r2.spoof_label, r2.attack_type,
                                        r2.breath, r2.pitch_anomaly,
                                        r2.quality_anomaly)
        b1 = (tmp_path / "a" / f"{r1.utt_id}.wav").read_bytes()
        b2 = (tmp_path / "b" / f"{r2.utt_id}.wav").read_bytes()
        assert b1 == b2


def test_labels_follow_spoof_rule(tmp_path):
    m = generate(SynthSpec(n_clips=40, seed=1), tmp_path)
    for r in m:
        assert (r.spoof_label == "spoofed") == bool(r.pitch_anomaly or r.quality_anomaly)
        assert (r.attack_type == "bonafide") == (r.spoof_label == "genuine")


def test_label_rates_are_plausible(tmp_path):
    spec = SynthSpec(n_clips=400, seed=2)
    m = generate(spec, tmp_path)
    rates = {
        "breath": (spec.breath_rate, np.mean([r.breath for r in m])),
        "pitch_anomaly": (spec.pitch_anomaly_rate, np.mean([r.pitch_anomaly for r in m])),
        "quality_anomaly": (spec.quality_anomaly_rate, np.mean([r.quality_anomaly for r in m])),
    }
    for name, (target, got) in rates.items():
        # 4-sigma binomial band
        band = 4 * np.sqrt(target * (1 - target) / len(m))
        assert abs(got - target) <= band, f"{name}: {got} vs {target} +- {band}"


def _gap_band_energy(x):
    """Energy inside the phrase-boundary gap, 300-3000 Hz band."""
    lo = int((GAP_CENTER_S - 0.075) * RATE)
    hi = int((GAP_CENTER_S + 0.075) * RATE)
    seg = x[lo:hi]
    spec = np.abs(np.fft.rfft(seg)) ** 2
    freqs = np.fft.rfftfreq(len(seg), d=1.0 / RATE)
    return float(spec[(freqs >= 300) & (freqs <= 3000)].sum())


def test_breath_burst_is_detectable_by_band_energy():
    spec = SynthSpec(n_clips=40, seed=3)
    scores, labels = [], []
    rng = np.random.default_rng(0)
    for i in range(120):
        b = int(rng.random() < 0.5)
        p = int(rng.random() < 0.3)
        q = int(rng.random() < 0.3)
        x = synth_clip(f"bd{i:03d}", spec, b, p, q)
        scores.append(_gap_band_energy(x))
        labels.append(b)
    auc = roc_auc(ScoreSet(scores=np.array(scores), labels=np.array(labels)))
    assert auc >= 0.95, f"gap band-energy AUC {auc}"


def test_quality_anomaly_empties_high_mel_bands():
    spec = SynthSpec(n_clips=20, seed=4)
    fe = FrontEndConfig()
    floor = np.log(fe.log_offset)
    for i in range(6):
        clean = synth_clip(f"qa{i}", spec, 0, 0, 0)
        degraded = synth_clip(f"qa{i}", spec, 0, 0, 1)  # same rng stream
        centers = _mel_centers(fe)
        hi_bands = centers > 1.25 * QUALITY_CUTOFF_HZ
        for x, is_degraded in ((clean, False), (degraded, True)):
            from aldas.audio_io import AudioClip
            ps = log_mel_patches(AudioClip(utt_id="q", samples=x, sample_rate=RATE), fe)
            n_real = 1 + (len(x) - fe.window_samples) // fe.hop_samples
            frames = np.vstack(ps.patches)[:n_real]
            hi = frames[:, hi_bands].ravel()
            if is_degraded:
                assert np.allclose(hi, floor, atol=1e-6), \
                    "band-limited clip must bottom out above the cutoff"
            else:
                assert np.median(hi) > floor + 0.3, \
                    "clean clip should carry energy above the cutoff"


def _mel_centers(fe):
    from aldas.dsp import hz_to_mel, mel_to_hz
    edges = mel_to_hz(np.linspace(hz_to_mel(fe.fmin), hz_to_mel(fe.fmax),
                                  fe.mel_bands + 2))
    return edges[1:-1]


def test_clips_reingest_through_the_front_end(tmp_path):
    m = generate(SynthSpec(n_clips=20, seed=5), tmp_path)
    fe = FrontEndConfig()
    for r in list(m)[:5]:
        clip = load_wav(r.path)
        assert clip.sample_rate == RATE
        assert len(clip.samples) == int(4.0 * RATE)
        ps = log_mel_patches(clip, fe)
        assert len(ps.patches) == 5
        assert all(p.shape == (96, 64) for p in ps.patches)


def test_weak_baseline_lands_in_target_band(tmp_path):
    m = generate(SynthSpec(n_clips=200, seed=6), tmp_path)
    m = split_holdout(m, 0.15, seed=0)
    scores = make_weak_baseline(m, seed=1)
    rows = m.by_split("test")
    s = ScoreSet(scores=np.array([scores[r.utt_id] for r in rows]),
                 labels=np.array([int(r.spoof_label == "spoofed") for r in rows]))
    val = eer(s)[0]
    assert 0.25 <= val <= 0.40, f"baseline test EER {val}"
    assert set(scores) == {r.utt_id for r in m}


def test_peak_level_is_safe():
    spec = SynthSpec(n_clips=20, seed=7)
    for i in range(8):
        x = synth_clip(f"pk{i}", spec, i % 2, (i // 2) % 2, (i // 4) % 2)
        assert np.max(np.abs(x)) <= 0.95 + 1e-9
