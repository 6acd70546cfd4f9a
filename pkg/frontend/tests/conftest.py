from pathlib import Path

import numpy as np
import pytest


@pytest.fixture(scope="session")
def checkpoint(tmp_path_factory):
    from vggish_export.model import save_random_checkpoint

    path = tmp_path_factory.mktemp("weights") / "vggish.pt"
    save_random_checkpoint(path, seed=1234)
    return str(path)


@pytest.fixture(scope="session")
def wav_corpus(tmp_path_factory):
    """A few deterministic 16 kHz WAVs of varying length, plus a manifest."""
    import struct
    import wave

    d = tmp_path_factory.mktemp("wavs")
    rng = np.random.default_rng(5)
    rows = ["utt_id,path,spoof_label,attack_type,breath,pitch_anomaly,"
            "quality_anomaly,split"]
    durations = {"clipA": 0.5, "clipB": 1.3, "clipC": 4.0}
    for utt, dur in durations.items():
        n = int(16000 * dur)
        t = np.arange(n) / 16000.0
        x = 0.4 * np.sin(2 * np.pi * rng.uniform(100, 400) * t)
        x += 0.05 * rng.standard_normal(n)
        pcm = np.clip(np.round(x * 32767), -32768, 32767).astype("<i2")
        path = d / f"{utt}.wav"
        with wave.open(str(path), "wb") as w:
            w.setnchannels(1)
            w.setsampwidth(2)
            w.setframerate(16000)
            w.writeframes(pcm.tobytes())
        rows.append(f"{utt},{path},genuine,bonafide,0,0,0,train")
    manifest = d / "manifest.csv"
    manifest.write_text("\n".join(rows) + "\n", encoding="utf-8")
    return d, str(manifest), durations
