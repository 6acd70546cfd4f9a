"""Baseline score ingestion and weighted score-level fusion."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (DuplicateUttId, MissingUtterances, ParseError,
                     UtteranceSetMismatch)
from .metrics import ScoreSet, roc_auc, eer


@dataclass
class BaselineScores:
    name: str
    scores: dict[str, float]       # raw, as loaded (after polarity flip)
    normalized: dict[str, float]   # min-max mapped to [0,1]


@dataclass(frozen=True)
class FusionConfig:
    weight_aldas: float = 0.6
    decision_threshold: float = 0.5

    def __post_init__(self):
        if not 0.0 <= self.weight_aldas <= 1.0:
            raise ValueError("weight_aldas must be in [0,1]")
        if not 0.0 < self.decision_threshold < 1.0:
            raise ValueError("decision_threshold must be in (0,1)")

    @property
    def weight_baseline(self) -> float:
        return 1.0 - self.weight_aldas


def read_score_file(path) -> dict[str, float]:
    """Parse "utt_id<TAB>score" lines."""
    scores: dict[str, float] = {}
    for line_no, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise ParseError(f"{path}:{line_no}: expected 'utt_id<TAB>score'")
        utt_id, raw = parts
        try:
            val = float(raw)
        except ValueError:
            raise ParseError(f"{path}:{line_no}: bad score {raw!r}") from None
        if utt_id in scores:
            raise DuplicateUttId(f"{path}:{line_no}: duplicate utt_id {utt_id!r}")
        scores[utt_id] = val
    return scores


def write_score_file(scores: dict[str, float], path) -> None:
    lines = [f"{u}\t{scores[u]:.9g}" for u in sorted(scores)]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_scores(path, polarity: str = "higher_is_spoof", name: str | None = None,
                expected_utts: set[str] | None = None) -> BaselineScores:
    """Load a baseline score file, flip polarity to higher-is-spoof, min-max
    normalize to [0,1]. Constant score sets normalize to 0.5 everywhere."""
    if polarity not in ("higher_is_spoof", "higher_is_genuine"):
        raise ValueError(f"unknown polarity {polarity!r}")
    raw = read_score_file(path)
    if polarity == "higher_is_genuine":
        raw = {u: -v for u, v in raw.items()}
    if expected_utts is not None:
        missing = expected_utts - raw.keys()
        if missing:
            raise MissingUtterances("missing scores for: " + ", ".join(sorted(missing)))
    vals = np.array(list(raw.values()))
    lo, hi = vals.min(), vals.max()
    if hi == lo:
        normalized = {u: 0.5 for u in raw}
    else:
        normalized = {u: float((v - lo) / (hi - lo)) for u, v in raw.items()}
    return BaselineScores(name=name or Path(path).stem, scores=raw, normalized=normalized)


def restrict(baseline: BaselineScores, utts) -> BaselineScores:
    """Restrict to a subset of utterances, renormalizing over that subset."""
    utts = set(utts)
    missing = utts - baseline.scores.keys()
    if missing:
        raise MissingUtterances("missing scores for: " + ", ".join(sorted(missing)))
    raw = {u: baseline.scores[u] for u in utts}
    vals = np.array(list(raw.values()))
    lo, hi = vals.min(), vals.max()
    if hi == lo:
        normalized = {u: 0.5 for u in raw}
    else:
        normalized = {u: float((v - lo) / (hi - lo)) for u, v in raw.items()}
    return BaselineScores(name=baseline.name, scores=raw, normalized=normalized)


def fuse(aldas_scores: dict[str, float], baseline: BaselineScores,
         cfg: FusionConfig = FusionConfig()) -> tuple[dict[str, float], dict[str, str]]:
    """Convex combination w*aldas + (1-w)*baseline_norm, plus hard decisions."""
    if set(aldas_scores) != set(baseline.normalized):
        raise UtteranceSetMismatch(
            f"aldas has {len(aldas_scores)} utts, baseline has {len(baseline.normalized)}; "
            "sets differ")
    w = cfg.weight_aldas
    fused = {u: w * aldas_scores[u] + (1.0 - w) * baseline.normalized[u]
             for u in aldas_scores}
    decisions = {u: ("spoofed" if v >= cfg.decision_threshold else "genuine")
                 for u, v in fused.items()}
    return fused, decisions


def sweep_weights(aldas_scores: dict[str, float], baseline: BaselineScores,
                  labels: dict[str, int],
                  grid: list[float] | None = None) -> tuple[list[dict], float]:
    """EER and AUC at each candidate weight; returns (table, best AUC weight).

    Ties on AUC resolve to the smaller weight.
    """
    if grid is None:
        grid = [round(0.1 * i, 1) for i in range(11)]
    utts = sorted(labels)
    y = np.array([labels[u] for u in utts])
    table = []
    best_w, best_auc = None, -1.0
    for w in grid:
        fused, _ = fuse(aldas_scores, baseline, FusionConfig(weight_aldas=w))
        s = ScoreSet(scores=np.array([fused[u] for u in utts]), labels=y)
        auc = roc_auc(s)
        eer_value, _ = eer(s)
        table.append({"weight": w, "roc_auc": auc, "eer": eer_value})
        if auc > best_auc + 1e-12:
            best_auc, best_w = auc, w
    return table, best_w
