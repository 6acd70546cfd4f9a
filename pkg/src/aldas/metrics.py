"""Classification metrics (accuracy, F1, ROC AUC, EER) and evaluation reports.

Positive class is always "spoofed"; higher score means more likely spoofed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SingleClass


@dataclass(frozen=True)
class ScoreSet:
    scores: np.ndarray  # (N,)
    labels: np.ndarray  # (N,) 1 = spoofed (positive), 0 = genuine

    def __post_init__(self):
        object.__setattr__(self, "scores", np.asarray(self.scores, dtype=np.float64))
        object.__setattr__(self, "labels", np.asarray(self.labels).astype(int))
        if len(self.scores) != len(self.labels):
            raise ValueError("scores/labels length mismatch")

    def both_classes(self) -> bool:
        return 0 < self.labels.sum() < len(self.labels)


def roc_auc(s: ScoreSet) -> float:
    """AUC via the rank (Mann-Whitney) formula; ties count half."""
    if not s.both_classes():
        raise SingleClass("AUC needs both classes")
    order = np.argsort(s.scores, kind="mergesort")
    sorted_scores = s.scores[order]
    # midranks for tied scores
    ranks = np.empty(len(s.scores))
    i = 0
    while i < len(sorted_scores):
        j = i
        while j + 1 < len(sorted_scores) and sorted_scores[j + 1] == sorted_scores[i]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    pos = s.labels == 1
    n_pos, n_neg = int(pos.sum()), int((~pos).sum())
    return float((ranks[pos].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def roc_points(s: ScoreSet):
    """ROC sweep: thresholds descending; returns (thresholds, far, frr).

    At threshold t the decision is spoofed iff score >= t.
    FAR = spoofed accepted as genuine (miss rate of the positive class);
    FRR = genuine rejected as spoofed.
    """
    order = np.argsort(-s.scores, kind="mergesort")
    scores = s.scores[order]
    labels = s.labels[order]
    distinct = np.concatenate([[True], np.diff(scores) != 0])
    n_pos = labels.sum()
    n_neg = len(labels) - n_pos
    tp = np.cumsum(labels)
    fp = np.cumsum(1 - labels)
    idx = np.nonzero(np.concatenate([distinct[1:], [True]]))[0]  # last of each tie group
    far = 1.0 - tp[idx] / n_pos          # positives scored below threshold
    frr = fp[idx] / n_neg                # negatives scored at/above threshold
    thresholds = scores[idx]
    # prepend the "reject nothing as spoofed" endpoint
    far = np.concatenate([[1.0], far])
    frr = np.concatenate([[0.0], frr])
    thresholds = np.concatenate([[np.inf], thresholds])
    return thresholds, far, frr


def eer(s: ScoreSet) -> tuple[float, float]:
    """Equal error rate with linear interpolation between adjacent operating
    points when no exact FAR == FRR crossing exists. Returns (eer, threshold)."""
    if not s.both_classes():
        raise SingleClass("EER needs both classes")
    thresholds, far, frr = roc_points(s)
    diff = far - frr
    for i in range(len(diff)):
        if diff[i] == 0.0:
            return float(far[i]), float(thresholds[i])
        if i + 1 < len(diff) and diff[i] > 0 >= diff[i + 1]:
            # linear interpolation between operating points i and i+1
            d0, d1 = diff[i], diff[i + 1]
            w = d0 / (d0 - d1)
            value = float(far[i] + w * (far[i + 1] - far[i]))
            t0 = thresholds[i] if np.isfinite(thresholds[i]) else thresholds[i + 1]
            t1 = thresholds[i + 1]
            return value, float(t0 + w * (t1 - t0))
    # no crossing: fall back to the point minimizing |FAR - FRR|
    i = int(np.argmin(np.abs(diff)))
    return float((far[i] + frr[i]) / 2.0), float(thresholds[i])


def f1_accuracy(s: ScoreSet, threshold: float = 0.5) -> dict:
    """Threshold metrics; zero-division guards report 0 with a flag."""
    pred = (s.scores >= threshold).astype(int)
    y = s.labels
    tp = int(((pred == 1) & (y == 1)).sum())
    fp = int(((pred == 1) & (y == 0)).sum())
    tn = int(((pred == 0) & (y == 0)).sum())
    fn = int(((pred == 0) & (y == 1)).sum())
    undefined = []
    if tp + fp == 0:
        precision = 0.0
        undefined.append("precision")
    else:
        precision = tp / (tp + fp)
    if tp + fn == 0:
        recall = 0.0
        undefined.append("recall")
    else:
        recall = tp / (tp + fn)
    f1 = 0.0 if precision + recall == 0 else 2 * precision * recall / (precision + recall)
    return {
        "accuracy": (tp + tn) / len(y),
        "precision": precision,
        "recall": recall,
        "f1": f1,
        "tp": tp, "fp": fp, "tn": tn, "fn": fn,
        "undefined": undefined,
    }


def system_metrics(s: ScoreSet, threshold: float = 0.5) -> dict:
    out = f1_accuracy(s, threshold)
    out["roc_auc"] = roc_auc(s)
    eer_value, eer_threshold = eer(s)
    out["eer"] = eer_value
    out["eer_threshold"] = eer_threshold
    return out


def render_report(systems: dict[str, dict], config_echo: dict | None = None) -> str:
    """Stable nested key-value text report; byte-stable for fixed inputs."""
    lines = ["aldas evaluation report", ""]
    if config_echo:
        lines.append("[config]")
        for k in sorted(config_echo):
            lines.append(f"{k} = {config_echo[k]}")
        lines.append("")
    for name in systems:
        lines.append(f"[system {name}]")
        m = systems[name]
        for key in ("accuracy", "precision", "recall", "f1", "roc_auc", "eer",
                    "eer_threshold"):
            if key in m:
                lines.append(f"{key} = {m[key]:.6f}")
        for key in ("tp", "fp", "tn", "fn"):
            if key in m:
                lines.append(f"{key} = {m[key]}")
        if m.get("undefined"):
            lines.append("undefined = " + ",".join(m["undefined"]))
        lines.append("")
    return "\n".join(lines)


def roc_csv(s: ScoreSet) -> str:
    """ROC curve points as CSV for external plotting."""
    thresholds, far, frr = roc_points(s)
    lines = ["threshold,far,frr"]
    for t, a, r in zip(thresholds, far, frr):
        lines.append(f"{t:.9g},{a:.9g},{r:.9g}")
    return "\n".join(lines) + "\n"
