import numpy as np
import pytest

from aldas.errors import (BadEnum, DuplicateUttId, HeaderMismatch,
                          LabelContradiction, TooFewSamples)
from aldas.manifest import (HEADER, DatasetManifest, ManifestRow, kfold,
                            parse_manifest, serialize_manifest, split_holdout)

HDR = ",".join(HEADER)


def write_manifest(path, rows):
    path.write_text("\n".join([HDR] + rows) + "\n", encoding="utf-8")


def make_rows(n_genuine, attack_counts, seed=0):
    """attack_counts: dict attack -> count for spoofed rows."""
    rows = []
    i = 0
    for _ in range(n_genuine):
        rows.append(ManifestRow(f"u{i:04d}", f"u{i:04d}.wav", "genuine", "bonafide",
                                0, 0, 0, "NA"))
        i += 1
    for attack, count in attack_counts.items():
        for _ in range(count):
            rows.append(ManifestRow(f"u{i:04d}", f"u{i:04d}.wav", "spoofed", attack,
                                    1, 1, 0, "NA"))
            i += 1
    return DatasetManifest(rows=rows)


def test_parse_minimal(tmp_path):
    p = tmp_path / "m.csv"
    write_manifest(p, ["a,x.wav,genuine,bonafide,0,1,NA,train",
                       "b,y.wav,spoofed,tts,1,0,1,test"])
    m = parse_manifest(p)
    assert len(m) == 2
    assert m.rows[0].pitch_anomaly == 1
    assert m.rows[0].quality_anomaly is None
    assert m.rows[1].attack_type == "tts"


def test_parse_header_mismatch(tmp_path):
    p = tmp_path / "m.csv"
    p.write_text("utt,stuff\n", encoding="utf-8")
    with pytest.raises(HeaderMismatch):
        parse_manifest(p)


def test_parse_label_contradiction(tmp_path):
    p = tmp_path / "m.csv"
    write_manifest(p, ["a,x.wav,genuine,tts,0,0,0,train"])
    with pytest.raises(LabelContradiction, match="row 2"):
        parse_manifest(p)
    write_manifest(p, ["a,x.wav,spoofed,bonafide,0,0,0,train"])
    with pytest.raises(LabelContradiction):
        parse_manifest(p)


def test_parse_bad_enum_and_duplicate(tmp_path):
    p = tmp_path / "m.csv"
    write_manifest(p, ["a,x.wav,genuine,bonafide,2,0,0,train"])
    with pytest.raises(BadEnum):
        parse_manifest(p)
    write_manifest(p, ["a,x.wav,genuine,bonafide,0,0,0,train",
                       "a,y.wav,genuine,bonafide,0,0,0,train"])
    with pytest.raises(DuplicateUttId):
        parse_manifest(p)


def test_round_trip_byte_identical(tmp_path):
    p = tmp_path / "m.csv"
    write_manifest(p, ["a,x.wav,genuine,bonafide,0,1,NA,train",
                       "b,y.wav,spoofed,vc,1,0,1,test",
                       "c,z.wav,spoofed,mimicry,NA,NA,NA,NA"])
    m = parse_manifest(p)
    out = tmp_path / "out.csv"
    serialize_manifest(m, out)
    assert out.read_bytes() == p.read_bytes()


def test_holdout_single_stratum_of_20():
    m = make_rows(20, {})
    out = split_holdout(m, fraction=0.15, seed=0)
    assert len(out.by_split("test")) == 3
    assert len(out.by_split("train")) == 17


def test_holdout_840_paper_mix():
    m = make_rows(420, {"replay": 97, "tts": 126, "vc": 130, "mimicry": 67})
    out = split_holdout(m, fraction=0.15, seed=1)
    n_test = len(out.by_split("test"))
    assert abs(n_test - 126) <= 1
    # per-stratum proportion within one row of 15%
    for attack, count in (("bonafide", 420), ("replay", 97), ("tts", 126),
                          ("vc", 130), ("mimicry", 67)):
        stratum_test = [r for r in out.by_split("test") if r.attack_type == attack]
        assert abs(len(stratum_test) - 0.15 * count) <= 1


def test_holdout_partition_and_determinism():
    m = make_rows(50, {"tts": 30, "vc": 20})
    a = split_holdout(m, seed=7)
    b = split_holdout(m, seed=7)
    assert [r.split for r in a] == [r.split for r in b]
    assert all(r.split in ("train", "test") for r in a)
    assert {r.utt_id for r in a.by_split("train")}.isdisjoint(
        {r.utt_id for r in a.by_split("test")})


def test_holdout_tiny_stratum_warned_to_train():
    m = make_rows(10, {"mimicry": 1})
    out = split_holdout(m, seed=0)
    mim = [r for r in out if r.attack_type == "mimicry"]
    assert mim[0].split == "train"
    assert any("mimicry" in w for w in out.warnings)


def test_holdout_spoof_fraction_preserved():
    m = make_rows(100, {"tts": 100})
    out = split_holdout(m, fraction=0.15, seed=3)
    test_rows = out.by_split("test")
    spoofed = sum(r.spoof_label == "spoofed" for r in test_rows)
    assert abs(spoofed - 0.5 * len(test_rows)) <= 1


def test_kfold_balanced_100():
    m = make_rows(50, {"tts": 50})
    folds = kfold(m.rows, k=5, seed=0)
    assert [len(f) for f in folds] == [20] * 5
    for f in folds:
        assert sum(r.spoof_label == "spoofed" for r in f) == 10
    # partition: union == all, pairwise disjoint
    all_ids = sorted(r.utt_id for f in folds for r in f)
    assert all_ids == sorted(r.utt_id for r in m.rows)


def test_kfold_stratified_proportions_random():
    rng = np.random.default_rng(5)
    for _ in range(5):
        n_g = int(rng.integers(20, 60))
        n_s = int(rng.integers(20, 60))
        m = make_rows(n_g, {"vc": n_s})
        k = 4
        folds = kfold(m.rows, k=k, seed=int(rng.integers(1000)))
        for f in folds:
            sp = sum(r.spoof_label == "spoofed" for r in f)
            assert abs(sp - n_s / k) <= 1


def test_kfold_too_few():
    m = make_rows(3, {"tts": 50})
    with pytest.raises(TooFewSamples):
        kfold(m.rows, k=5, seed=0)


def test_kfold_stratify_by_edlf():
    m = make_rows(40, {"tts": 40})
    folds = kfold(m.rows, k=5, seed=0, stratify_by="breath")
    for f in folds:
        assert abs(sum(r.breath for r in f) - 8) <= 1
