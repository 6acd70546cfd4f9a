import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from aldas.errors import MinorityTooSmall
from aldas.smote import LabeledVectors, smote


def random_imbalanced(seed, n_min=3, n_maj=10, d=4):
    rng = np.random.default_rng(seed)
    X = np.concatenate([rng.standard_normal((n_maj, d)),
                        rng.standard_normal((n_min, d)) + 2])
    y = np.concatenate([np.zeros(n_maj, int), np.ones(n_min, int)])
    return LabeledVectors(vectors=X, labels=y)


def test_balanced_input_unchanged():
    rng = np.random.default_rng(0)
    data = LabeledVectors(vectors=rng.standard_normal((8, 3)),
                          labels=np.array([0, 0, 0, 0, 1, 1, 1, 1]))
    out = smote(data, seed=0)
    assert out is data


def test_two_point_minority_on_segment():
    X = np.array([[0.0, 0.0], [1.0, 1.0],
                  [5.0, 5.0], [6.0, 5.0], [5.0, 6.0], [6.0, 6.0]])
    y = np.array([1, 1, 0, 0, 0, 0])
    out = smote(LabeledVectors(vectors=X, labels=y), k=5, seed=1)
    synth = out.vectors[6:]
    assert len(synth) == 2
    for s in synth:
        # convex combination of (0,0) and (1,1): both coords equal, in [0,1]
        assert abs(s[0] - s[1]) < 1e-12
        assert -1e-12 <= s[0] <= 1 + 1e-12


def test_identical_minority_points():
    X = np.array([[2.0, 2.0], [2.0, 2.0], [0.0, 0.0], [0.1, 0.0], [0.0, 0.1], [0.1, 0.1]])
    y = np.array([1, 1, 0, 0, 0, 0])
    out = smote(LabeledVectors(vectors=X, labels=y), seed=3)
    np.testing.assert_array_equal(out.vectors[6:], np.full((2, 2), 2.0))


def test_minority_too_small():
    X = np.zeros((4, 2))
    y = np.array([1, 0, 0, 0])
    with pytest.raises(MinorityTooSmall):
        smote(LabeledVectors(vectors=X, labels=y), seed=0)


@pytest.mark.parametrize("seed", range(50))
def test_properties_random_datasets(seed):
    rng = np.random.default_rng(seed)
    n_min = int(rng.integers(2, 12))
    n_maj = n_min + int(rng.integers(1, 15))
    d = int(rng.integers(1, 6))
    data = random_imbalanced(seed, n_min=n_min, n_maj=n_maj, d=d)
    k = int(rng.integers(1, 8))
    out = smote(data, k=k, seed=seed)
    n = len(data.vectors)
    # originals preserved verbatim, byte-equal
    assert np.array_equal(out.vectors[:n], data.vectors)
    assert np.array_equal(out.labels[:n], data.labels)
    # exact parity
    assert (out.labels == 0).sum() == (out.labels == 1).sum()
    # synthetics lie between their endpoints componentwise: every synthetic
    # must be inside the bounding box of the minority class
    minority = data.vectors[data.labels == 1]
    lo = minority.min(axis=0) - 1e-12
    hi = minority.max(axis=0) + 1e-12
    synth = out.vectors[n:]
    assert np.all(synth >= lo) and np.all(synth <= hi)
    # determinism
    out2 = smote(data, k=k, seed=seed)
    assert np.array_equal(out.vectors, out2.vectors)


def test_synthetic_on_segment_to_some_neighbor():
    # stronger convex-hull check: each synthetic is on the segment between
    # some pair of minority points (collinearity within 1e-9)
    data = random_imbalanced(99, n_min=5, n_maj=12, d=3)
    out = smote(data, k=3, seed=99)
    minority = data.vectors[data.labels == 1]
    n = len(data.vectors)
    for s in out.vectors[n:]:
        on_segment = False
        for i in range(len(minority)):
            for j in range(len(minority)):
                if i == j:
                    continue
                a, b = minority[i], minority[j]
                ab = b - a
                denom = float(ab @ ab)
                if denom == 0:
                    continue
                lam = float((s - a) @ ab) / denom
                if -1e-9 <= lam <= 1 + 1e-9 and np.linalg.norm(a + lam * ab - s) < 1e-9:
                    on_segment = True
        assert on_segment


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=0, max_value=10000))
def test_hypothesis_parity_and_originals(seed):
    rng = np.random.default_rng(seed)
    n_min = int(rng.integers(2, 8))
    n_maj = n_min + int(rng.integers(1, 10))
    data = random_imbalanced(seed, n_min=n_min, n_maj=n_maj, d=2)
    out = smote(data, seed=seed)
    assert (out.labels == 0).sum() == (out.labels == 1).sum()
    assert np.array_equal(out.vectors[: len(data.vectors)], data.vectors)
