"""SMOTE oversampling of the minority class to exact parity."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import MinorityTooSmall


@dataclass(frozen=True)
class LabeledVectors:
    vectors: np.ndarray  # (N, D)
    labels: np.ndarray   # (N,) binary

    def __post_init__(self):
        if len(self.vectors) != len(self.labels):
            raise ValueError("vectors and labels length mismatch")


def smote(data: LabeledVectors, k: int = 5, seed: int = 0) -> LabeledVectors:
    """Balance classes by interpolating synthetic minority samples.

    Each synthetic point is x + lam * (x_nn - x) with lam ~ U[0,1] and
    x_nn one of the k nearest minority neighbors of x. Originals are
    preserved verbatim; synthetics are appended. Balanced input is
    returned unchanged. k is clipped to minority_size - 1.
    """
    X = np.asarray(data.vectors, dtype=np.float64)
    y = np.asarray(data.labels).astype(int)
    n0, n1 = int((y == 0).sum()), int((y == 1).sum())
    if n0 == n1:
        return data
    minority = 1 if n1 < n0 else 0
    need = abs(n0 - n1)
    Xmin = X[y == minority]
    if len(Xmin) < 2:
        raise MinorityTooSmall(f"minority class has {len(Xmin)} sample(s)")
    k_eff = min(k, len(Xmin) - 1)
    # pairwise distances among minority samples, self excluded
    d2 = ((Xmin[:, None, :] - Xmin[None, :, :]) ** 2).sum(axis=2)
    np.fill_diagonal(d2, np.inf)
    nn_idx = np.argsort(d2, axis=1)[:, :k_eff]

    rng = np.random.default_rng(seed)
    base = rng.integers(0, len(Xmin), size=need)
    pick = rng.integers(0, k_eff, size=need)
    lam = rng.random(need)
    xb = Xmin[base]
    xn = Xmin[nn_idx[base, pick]]
    synth = xb + lam[:, None] * (xn - xb)

    vectors = np.concatenate([X, synth])
    labels = np.concatenate([y, np.full(need, minority)])
    return LabeledVectors(vectors=vectors, labels=labels)
