import numpy as np
import pytest

from aldas.errors import (DuplicateUttId, MissingUtterances, ParseError,
                          UtteranceSetMismatch)
from aldas.fusion import (BaselineScores, FusionConfig, fuse, load_scores,
                          read_score_file, restrict, sweep_weights,
                          write_score_file)
from aldas.metrics import ScoreSet, roc_auc


def write_tsv(path, scores):
    path.write_text("".join(f"{u}\t{v}\n" for u, v in scores.items()), encoding="utf-8")


def test_load_minmax(tmp_path):
    p = tmp_path / "s.tsv"
    write_tsv(p, {"a": -3, "b": 0, "c": 3})
    b = load_scores(p)
    assert b.normalized == {"a": 0.0, "b": 0.5, "c": 1.0}


def test_load_constant_scores(tmp_path):
    p = tmp_path / "s.tsv"
    write_tsv(p, {"a": 2.0, "b": 2.0})
    b = load_scores(p)
    assert b.normalized == {"a": 0.5, "b": 0.5}


def test_load_polarity_flip(tmp_path):
    p = tmp_path / "s.tsv"
    write_tsv(p, {"a": 1, "b": 2})
    b = load_scores(p, polarity="higher_is_genuine")
    assert b.normalized == {"a": 1.0, "b": 0.0}


def test_load_parse_error_line_number(tmp_path):
    p = tmp_path / "s.tsv"
    p.write_text("a\t0.5\nbad line without tab\n", encoding="utf-8")
    with pytest.raises(ParseError, match=":2"):
        load_scores(p)


def test_load_duplicate(tmp_path):
    p = tmp_path / "s.tsv"
    p.write_text("a\t0.5\na\t0.7\n", encoding="utf-8")
    with pytest.raises(DuplicateUttId):
        load_scores(p)


def test_load_missing_vs_manifest(tmp_path):
    p = tmp_path / "s.tsv"
    write_tsv(p, {"a": 1})
    with pytest.raises(MissingUtterances, match="b"):
        load_scores(p, expected_utts={"a", "b"})


def baseline_of(norm):
    return BaselineScores(name="bl", scores=dict(norm), normalized=dict(norm))


def test_fuse_endpoints():
    aldas = {"a": 0.9, "b": 0.2}
    bl = baseline_of({"a": 0.4, "b": 0.6})
    f1, _ = fuse(aldas, bl, FusionConfig(weight_aldas=1.0))
    assert f1 == aldas
    f0, _ = fuse(aldas, bl, FusionConfig(weight_aldas=0.0))
    assert f0 == bl.normalized


def test_fuse_paper_weight_arithmetic():
    fused, decisions = fuse({"a": 0.9}, baseline_of({"a": 0.4}),
                            FusionConfig(weight_aldas=0.6))
    assert fused["a"] == pytest.approx(0.6 * 0.9 + 0.4 * 0.4)
    assert fused["a"] == pytest.approx(0.70)
    assert decisions["a"] == "spoofed"


def test_fuse_set_mismatch():
    with pytest.raises(UtteranceSetMismatch):
        fuse({"a": 0.5}, baseline_of({"a": 0.5, "b": 0.1}))


def test_fuse_monotone_in_aldas():
    rng = np.random.default_rng(0)
    utts = [f"u{i}" for i in range(20)]
    aldas = {u: float(rng.random()) for u in utts}
    bl = baseline_of({u: float(rng.random()) for u in utts})
    cfg = FusionConfig(weight_aldas=0.6)
    f0, _ = fuse(aldas, bl, cfg)
    bumped = dict(aldas)
    bumped["u3"] = min(1.0, aldas["u3"] + 0.2)
    f1, _ = fuse(bumped, bl, cfg)
    assert f1["u3"] > f0["u3"]
    for u in utts:
        if u != "u3":
            assert f1[u] == f0[u]


def test_normalization_rank_preserving(tmp_path):
    rng = np.random.default_rng(1)
    utts = [f"u{i}" for i in range(50)]
    raw = {u: float(rng.standard_normal() * 10) for u in utts}
    labels = {u: int(rng.integers(0, 2)) for u in utts}
    labels[utts[0]], labels[utts[1]] = 0, 1
    p = tmp_path / "s.tsv"
    write_tsv(p, raw)
    b = load_scores(p)
    y = np.array([labels[u] for u in utts])
    auc_raw = roc_auc(ScoreSet(scores=np.array([raw[u] for u in utts]), labels=y))
    auc_norm = roc_auc(ScoreSet(scores=np.array([b.normalized[u] for u in utts]), labels=y))
    assert auc_raw == pytest.approx(auc_norm, abs=1e-12)


def test_sweep_perfect_aldas_prefers_weight_one():
    # aldas separates perfectly but with a tiny margin, so any admixture of
    # the random baseline breaks some pair: only weight 1.0 reaches AUC 1
    rng = np.random.default_rng(2)
    utts = [f"u{i}" for i in range(40)]
    labels = {u: int(i >= 20) for i, u in enumerate(utts)}
    aldas = {u: 0.505 if labels[u] else 0.495 for u in utts}
    bl = baseline_of({u: float(rng.random()) for u in utts})
    table, best = sweep_weights(aldas, bl, labels)
    assert best == 1.0
    assert table[-1]["roc_auc"] == 1.0


def test_sweep_identical_inputs_constant_metrics():
    utts = [f"u{i}" for i in range(20)]
    labels = {u: int(i % 2) for i, u in enumerate(utts)}
    vals = {u: 0.1 + 0.04 * i for i, u in enumerate(utts)}
    table, _ = sweep_weights(dict(vals), baseline_of(vals), labels)
    aucs = {round(row["roc_auc"], 12) for row in table}
    eers = {round(row["eer"], 9) for row in table}
    assert len(aucs) == 1 and len(eers) == 1


def test_sweep_interior_weight_can_win():
    # complementary errors: aldas separates group A, baseline separates group B
    utts = [f"u{i}" for i in range(40)]
    labels = {u: int(i % 2) for i, u in enumerate(utts)}
    # the system that is weak on a group is slightly WRONG there, so each
    # endpoint misorders pairs, while an even mix is dominated by whichever
    # system is strong on each clip
    aldas, bl = {}, {}
    for i, u in enumerate(utts):
        if i < 20:
            aldas[u] = 0.95 if labels[u] else 0.05
            bl[u] = 0.5 + (-0.01 if labels[u] else 0.01)
        else:
            aldas[u] = 0.5 + (-0.01 if labels[u] else 0.01)
            bl[u] = 0.95 if labels[u] else 0.05
    table, best = sweep_weights(aldas, baseline_of(bl), labels)
    by_w = {row["weight"]: row["roc_auc"] for row in table}
    assert by_w[best] > by_w[0.0] and by_w[best] > by_w[1.0]
    assert 0.0 < best < 1.0


def test_ties_resolve_to_smaller_weight():
    utts = ["a", "b"]
    labels = {"a": 0, "b": 1}
    vals = {"a": 0.1, "b": 0.9}
    _, best = sweep_weights(dict(vals), baseline_of(vals), labels)
    assert best == 0.0


def test_score_file_round_trip(tmp_path):
    scores = {"b": 0.25, "a": 0.75}
    p = tmp_path / "rt.tsv"
    write_score_file(scores, p)
    assert read_score_file(p) == scores
    assert p.read_text().splitlines()[0].startswith("a\t")


def test_restrict_renormalizes():
    bl = BaselineScores(name="x", scores={"a": 0.0, "b": 5.0, "c": 10.0},
                        normalized={"a": 0.0, "b": 0.5, "c": 1.0})
    sub = restrict(bl, {"a", "b"})
    assert sub.normalized == {"a": 0.0, "b": 1.0}
    with pytest.raises(MissingUtterances):
        restrict(bl, {"a", "zzz"})
