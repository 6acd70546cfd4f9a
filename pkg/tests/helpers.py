"""Shared test utilities: finite-difference gradient checking and oracles.

The oracles here are deliberately independent of the library code paths
they verify (direct-formula implementations, O(n^2) pairwise loops,
exhaustive threshold enumeration).
"""

import numpy as np

from aldas import nn


def gradcheck(model, X, y, l2_alpha=0.0, h=1e-4, rng_seed=777):
    """Compare analytic gradients to central finite differences.

    Returns the worst relative error over all parameters. Coordinates
    whose +/-h evaluations land on different sides of a relu kink (the
    loss is not differentiable there) are skipped; dropout masks are
    held fixed by reseeding the model rng before every forward.
    """

    def mask_signature():
        return tuple(
            layer._mask.tobytes()
            for layer in model.layers
            if isinstance(layer, nn.Relu)
        )

    def loss_at():
        model.rng = np.random.default_rng(rng_seed)
        out = model.forward(X, train=True)
        loss, _ = nn.bce_loss(out, y)
        for layer in model.layers:
            for name in layer.l2_params:
                loss += 0.5 * l2_alpha * float((layer.params[name] ** 2).sum())
        return loss, mask_signature()

    model.rng = np.random.default_rng(rng_seed)
    _, grads = nn.backward(model, X, y, l2_alpha)
    worst = 0.0
    for i, layer in enumerate(model.layers):
        for name, p in layer.params.items():
            g = grads[f"{i}.{name}"]
            it = np.nditer(p, flags=["multi_index"])
            for _ in it:
                ix = it.multi_index
                old = p[ix]
                p[ix] = old + h
                lp, sig_p = loss_at()
                p[ix] = old - h
                lm, sig_m = loss_at()
                p[ix] = old
                if sig_p != sig_m:
                    continue  # kink crossing: not differentiable here
                fd = (lp - lm) / (2 * h)
                denom = max(abs(fd), abs(g[ix]), 1e-6)
                worst = max(worst, abs(fd - g[ix]) / denom)
    return worst


def auc_bruteforce(scores, labels):
    """O(n^2) pairwise Mann-Whitney AUC."""
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels)
    pos = scores[labels == 1]
    neg = scores[labels == 0]
    total = 0.0
    for p in pos:
        for n in neg:
            if p > n:
                total += 1.0
            elif p == n:
                total += 0.5
    return total / (len(pos) * len(neg))


def eer_bruteforce(scores, labels):
    """Exhaustive threshold enumeration with linear interpolation between
    adjacent operating points, matching the documented EER definition."""
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels)
    n_pos = (labels == 1).sum()
    n_neg = (labels == 0).sum()
    thresholds = np.concatenate([[np.inf], np.unique(scores)[::-1]])
    points = []
    for t in thresholds:
        called_spoof = scores >= t
        far = ((labels == 1) & ~called_spoof).sum() / n_pos
        frr = ((labels == 0) & called_spoof).sum() / n_neg
        points.append((far, frr))
    for i, (far, frr) in enumerate(points):
        d = far - frr
        if d == 0:
            return far
        if i + 1 < len(points):
            d_next = points[i + 1][0] - points[i + 1][1]
            if d > 0 >= d_next:
                w = d / (d - d_next)
                return far + w * (points[i + 1][0] - far)
    diffs = [abs(f - r) for f, r in points]
    i = int(np.argmin(diffs))
    return (points[i][0] + points[i][1]) / 2.0


def sine_clip(freq, duration_s=1.0, rate=16000, amp=0.5, utt_id="sine"):
    from aldas.audio_io import AudioClip

    t = np.arange(int(duration_s * rate)) / rate
    return AudioClip(utt_id, amp * np.sin(2 * np.pi * freq * t), rate)
