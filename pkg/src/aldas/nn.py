"""Minimal sequential neural-network core with verifiable gradients.

Layers: dense, conv1d (same padding), batch_norm, layer_norm, dropout,
relu, sigmoid, global_avg_pool. Loss is binary cross-entropy with an
optional L2 penalty on weight matrices; the optimizer is Adam. No
autograd graph: each layer implements its own backward pass, which keeps
the whole thing checkable against finite differences.

Conventions: dense inputs are (N, D); conv inputs are (N, C, L).
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateData, ShapeMismatch

ALNN_MAGIC = b"ALNN"
ALNN_VERSION = 1

BCE_CLAMP = 1e-7


# ---------------------------------------------------------------------------
# layers


class Layer:
    kind = "base"

    def __init__(self):
        self.params: dict[str, np.ndarray] = {}
        self.grads: dict[str, np.ndarray] = {}

    def init(self, in_shape, rng):
        """Infer shapes/allocate params; returns the output shape (sans batch)."""
        return in_shape

    def forward(self, x, train, rng):
        raise NotImplementedError

    def backward(self, dy):
        raise NotImplementedError

    def spec_str(self) -> str:
        return self.kind

    # params that the L2 penalty applies to (weight matrices only)
    l2_params: tuple[str, ...] = ()


def _glorot(rng, shape, fan_in, fan_out):
    lim = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-lim, lim, size=shape)


class Dense(Layer):
    kind = "dense"
    l2_params = ("W",)

    def __init__(self, units: int):
        super().__init__()
        self.units = units

    def init(self, in_shape, rng):
        if len(in_shape) != 1:
            raise ShapeMismatch(f"dense expects flat input, got shape {in_shape}")
        d = in_shape[0]
        self.params["W"] = _glorot(rng, (d, self.units), d, self.units)
        self.params["b"] = np.zeros(self.units)
        return (self.units,)

    def forward(self, x, train, rng):
        self._x = x
        return x @ self.params["W"] + self.params["b"]

    def backward(self, dy):
        self.grads["W"] = self._x.T @ dy
        self.grads["b"] = dy.sum(axis=0)
        return dy @ self.params["W"].T

    def spec_str(self):
        return f"dense(units={self.units})"


class Conv1d(Layer):
    kind = "conv1d"
    l2_params = ("W",)

    def __init__(self, out_channels: int, kernel: int):
        super().__init__()
        self.out_channels = out_channels
        self.kernel = kernel

    def init(self, in_shape, rng):
        if len(in_shape) != 2:
            raise ShapeMismatch(f"conv1d expects (C, L) input, got {in_shape}")
        c, length = in_shape
        self.in_channels = c
        fan_in = c * self.kernel
        self.params["W"] = _glorot(rng, (self.out_channels, c, self.kernel),
                                   fan_in, self.out_channels)
        self.params["b"] = np.zeros(self.out_channels)
        return (self.out_channels, length)

    def _im2col(self, x):
        # x: (N, C, L) zero-padded to keep length ("same" padding)
        k = self.kernel
        pl, pr = (k - 1) // 2, k // 2
        xp = np.pad(x, ((0, 0), (0, 0), (pl, pr)))
        L = x.shape[2]
        idx = np.arange(L)[:, None] + np.arange(k)[None, :]
        return xp[:, :, idx]  # (N, C, L, k)

    def forward(self, x, train, rng):
        self._x = x
        cols = self._im2col(x)  # (N, C, L, k)
        n, c, length, k = cols.shape
        # flatten windows so the contraction runs as a BLAS matmul
        cols2 = cols.transpose(0, 2, 1, 3).reshape(n * length, c * k)
        self._cols2 = cols2
        w = self.params["W"].reshape(self.out_channels, c * k)
        y = (cols2 @ w.T).reshape(n, length, self.out_channels)
        return y.transpose(0, 2, 1) + self.params["b"][None, :, None]

    def backward(self, dy):
        n, o, length = dy.shape
        c = self.in_channels
        k = self.kernel
        dy2 = dy.transpose(0, 2, 1).reshape(n * length, o)
        self.grads["W"] = (dy2.T @ self._cols2).reshape(o, c, k)
        self.grads["b"] = dy.sum(axis=(0, 2))
        # scatter gradient back through the padded windows
        pl, pr = (k - 1) // 2, k // 2
        dcols = (dy2 @ self.params["W"].reshape(o, c * k)).reshape(n, length, c, k)
        dcols = dcols.transpose(0, 2, 1, 3)
        dxp = np.zeros((n, c, length + pl + pr))
        for j in range(k):
            dxp[:, :, j : j + length] += dcols[:, :, :, j]
        return dxp[:, :, pl : pl + length]

    def spec_str(self):
        return f"conv1d(out_channels={self.out_channels},kernel={self.kernel})"


class BatchNorm(Layer):
    """Per-feature (dense) or per-channel (conv) batch normalization."""

    kind = "batch_norm"

    def __init__(self, eps: float = 1e-5, momentum: float = 0.1):
        super().__init__()
        self.eps = eps
        self.momentum = momentum

    def init(self, in_shape, rng):
        n_feat = in_shape[0]
        self.params["gamma"] = np.ones(n_feat)
        self.params["beta"] = np.zeros(n_feat)
        self.running_mean = np.zeros(n_feat)
        self.running_var = np.ones(n_feat)
        self._conv = len(in_shape) == 2
        return in_shape

    def _axes(self):
        return (0, 2) if self._conv else (0,)

    def _bcast(self, v):
        return v[None, :, None] if self._conv else v[None, :]

    def forward(self, x, train, rng):
        axes = self._axes()
        if train:
            mean = x.mean(axis=axes)
            var = x.var(axis=axes)
            self.running_mean = (1 - self.momentum) * self.running_mean + self.momentum * mean
            self.running_var = (1 - self.momentum) * self.running_var + self.momentum * var
        else:
            mean, var = self.running_mean, self.running_var
        self._std = np.sqrt(var + self.eps)
        self._xhat = (x - self._bcast(mean)) / self._bcast(self._std)
        self._m = x.size // x.shape[1] if train else None
        return self._bcast(self.params["gamma"]) * self._xhat + self._bcast(self.params["beta"])

    def backward(self, dy):
        axes = self._axes()
        xhat, std = self._xhat, self._std
        self.grads["gamma"] = (dy * xhat).sum(axis=axes)
        self.grads["beta"] = dy.sum(axis=axes)
        g = self._bcast(self.params["gamma"])
        if self._m is None:  # eval mode: plain affine map
            return dy * g / self._bcast(std)
        m = self._m
        dxhat = dy * g
        dx = (dxhat - dxhat.mean(axis=axes, keepdims=True)
              - xhat * (dxhat * xhat).mean(axis=axes, keepdims=True)) / self._bcast(std)
        return dx

    def spec_str(self):
        return f"batch_norm(eps={self.eps},momentum={self.momentum})"


class LayerNorm(Layer):
    """Normalize each sample over all its feature axes."""

    kind = "layer_norm"

    def __init__(self, eps: float = 1e-5):
        super().__init__()
        self.eps = eps

    def init(self, in_shape, rng):
        self.shape = tuple(in_shape)
        self.params["gamma"] = np.ones(self.shape)
        self.params["beta"] = np.zeros(self.shape)
        return in_shape

    def forward(self, x, train, rng):
        axes = tuple(range(1, x.ndim))
        mean = x.mean(axis=axes, keepdims=True)
        var = x.var(axis=axes, keepdims=True)
        self._std = np.sqrt(var + self.eps)
        self._xhat = (x - mean) / self._std
        return self.params["gamma"][None] * self._xhat + self.params["beta"][None]

    def backward(self, dy):
        axes = tuple(range(1, dy.ndim))
        self.grads["gamma"] = (dy * self._xhat).sum(axis=0)
        self.grads["beta"] = dy.sum(axis=0)
        dxhat = dy * self.params["gamma"][None]
        return (dxhat - dxhat.mean(axis=axes, keepdims=True)
                - self._xhat * (dxhat * self._xhat).mean(axis=axes, keepdims=True)) / self._std

    def spec_str(self):
        return f"layer_norm(eps={self.eps})"


class Dropout(Layer):
    kind = "dropout"

    def __init__(self, rate: float):
        super().__init__()
        if not 0.0 <= rate < 1.0:
            raise ShapeMismatch(f"dropout rate must be in [0,1), got {rate}")
        self.rate = rate

    def forward(self, x, train, rng):
        if not train or self.rate == 0.0:
            self._mask = None
            return x
        self._mask = (rng.random(x.shape) >= self.rate) / (1.0 - self.rate)
        return x * self._mask

    def backward(self, dy):
        return dy if self._mask is None else dy * self._mask

    def spec_str(self):
        return f"dropout(rate={self.rate})"


class Relu(Layer):
    kind = "relu"

    def forward(self, x, train, rng):
        self._mask = x > 0
        return np.where(self._mask, x, 0.0)

    def backward(self, dy):
        return np.where(self._mask, dy, 0.0)


class Sigmoid(Layer):
    kind = "sigmoid"

    def forward(self, x, train, rng):
        self._y = np.where(x >= 0, 1.0 / (1.0 + np.exp(-np.abs(x))),
                           np.exp(-np.abs(x)) / (1.0 + np.exp(-np.abs(x))))
        return self._y

    def backward(self, dy):
        return dy * self._y * (1.0 - self._y)


class GlobalAvgPool(Layer):
    """(N, C, L) -> (N, C) average over the length axis."""

    kind = "global_avg_pool"

    def init(self, in_shape, rng):
        if len(in_shape) != 2:
            raise ShapeMismatch(f"global_avg_pool expects (C, L), got {in_shape}")
        self._L = in_shape[1]
        return (in_shape[0],)

    def forward(self, x, train, rng):
        self._L = x.shape[2]
        return x.mean(axis=2)

    def backward(self, dy):
        return np.repeat(dy[:, :, None], self._L, axis=2) / self._L


_LAYER_KINDS = {
    "dense": Dense,
    "conv1d": Conv1d,
    "batch_norm": BatchNorm,
    "layer_norm": LayerNorm,
    "dropout": Dropout,
    "relu": Relu,
    "sigmoid": Sigmoid,
    "global_avg_pool": GlobalAvgPool,
}


# ---------------------------------------------------------------------------
# model


class Model:
    def __init__(self, layers: list[Layer], input_shape: tuple[int, ...], seed: int = 0):
        self.layers = layers
        self.input_shape = tuple(input_shape)
        self.seed = seed
        rng = np.random.default_rng(seed)
        shape = self.input_shape
        for layer in layers:
            shape = layer.init(shape, rng)
        self.output_shape = shape
        self.rng = np.random.default_rng(seed + 1)  # dropout stream

    def forward(self, x, train: bool = False) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if tuple(x.shape[1:]) != self.input_shape:
            raise ShapeMismatch(f"input shape {x.shape[1:]} != expected {self.input_shape}")
        for layer in self.layers:
            x = layer.forward(x, train, self.rng)
        return x

    def backward(self, dy) -> None:
        for layer in reversed(self.layers):
            dy = layer.backward(dy)

    def parameters(self):
        for i, layer in enumerate(self.layers):
            for name in sorted(layer.params):
                yield f"{i}.{name}", layer.params[name]

    def gradients(self):
        for i, layer in enumerate(self.layers):
            for name in sorted(layer.params):
                yield f"{i}.{name}", layer.grads[name]

    def get_weights(self):
        return {k: v.copy() for k, v in self.parameters()}

    def set_weights(self, weights):
        for i, layer in enumerate(self.layers):
            for name in layer.params:
                layer.params[name][...] = weights[f"{i}.{name}"]


def param_count(model: Model) -> int:
    """Exact count of trainable scalars."""
    return sum(p.size for _, p in model.parameters())


# ---------------------------------------------------------------------------
# loss


def bce_loss(probs, targets):
    """Mean binary cross-entropy with probability clamp; returns (loss, dprobs)."""
    p = np.asarray(probs, dtype=np.float64)
    y = np.asarray(targets, dtype=np.float64).reshape(p.shape)
    pc = np.clip(p, BCE_CLAMP, 1.0 - BCE_CLAMP)
    n = p.shape[0]
    loss = -np.mean(y * np.log(pc) + (1.0 - y) * np.log(1.0 - pc))
    inside = (p > BCE_CLAMP) & (p < 1.0 - BCE_CLAMP)
    dp = np.where(inside, (pc - y) / (pc * (1.0 - pc)), 0.0) / p.size
    return loss, dp


def backward(model: Model, batch, targets, l2_alpha: float = 0.0):
    """Forward in train mode, BCE(+L2) loss, full backward pass.

    Returns (loss, grads dict keyed like model.parameters()).
    """
    out = model.forward(batch, train=True)
    loss, dout = bce_loss(out, targets)
    model.backward(dout)
    grads = {k: g.copy() for k, g in model.gradients()}
    if l2_alpha > 0.0:
        for i, layer in enumerate(model.layers):
            for name in layer.l2_params:
                w = layer.params[name]
                loss += 0.5 * l2_alpha * float((w ** 2).sum())
                grads[f"{i}.{name}"] += l2_alpha * w
    return loss, grads


# ---------------------------------------------------------------------------
# training


@dataclass
class TrainConfig:
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    batch_size: int = 32
    max_epochs: int = 100
    l2_alpha: float = 0.0
    early_stopping: bool = True
    validation_fraction: float = 0.1
    patience: int = 10
    seed: int = 0

    def __post_init__(self):
        if self.lr < 0:
            raise ValueError("lr must be >= 0")
        if not 0.0 < self.validation_fraction < 1.0:
            raise ValueError("validation_fraction must be in (0,1)")
        if self.patience < 1:
            raise ValueError("patience must be >= 1")


class Adam:
    def __init__(self, model: Model, cfg: TrainConfig):
        self.cfg = cfg
        self.m = {k: np.zeros_like(p) for k, p in model.parameters()}
        self.v = {k: np.zeros_like(p) for k, p in model.parameters()}
        self.t = 0

    def step(self, model: Model, grads) -> None:
        c = self.cfg
        self.t += 1
        for i, layer in enumerate(model.layers):
            for name in layer.params:
                k = f"{i}.{name}"
                g = grads[k]
                self.m[k] = c.beta1 * self.m[k] + (1 - c.beta1) * g
                self.v[k] = c.beta2 * self.v[k] + (1 - c.beta2) * g * g
                mhat = self.m[k] / (1 - c.beta1 ** self.t)
                vhat = self.v[k] / (1 - c.beta2 ** self.t)
                layer.params[name] -= c.lr * mhat / (np.sqrt(vhat) + c.adam_eps)


@dataclass
class FitHistory:
    train_loss: list = field(default_factory=list)
    val_loss: list = field(default_factory=list)
    best_epoch: int = -1


def fit(model: Model, X, y, cfg: TrainConfig) -> FitHistory:
    """Mini-batch Adam training with optional early stopping.

    Early stopping holds out validation_fraction of the data, tracks
    validation BCE, and restores the best weights after patience epochs
    without improvement.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64).reshape(len(X), -1)
    if len(X) == 0:
        raise DegenerateData("empty training data")
    rng = np.random.default_rng(cfg.seed)
    if cfg.early_stopping and len(X) >= 10:
        perm = rng.permutation(len(X))
        n_val = max(1, int(round(cfg.validation_fraction * len(X))))
        val_idx, tr_idx = perm[:n_val], perm[n_val:]
        Xtr, ytr = X[tr_idx], y[tr_idx]
        Xval, yval = X[val_idx], y[val_idx]
    else:
        Xtr, ytr = X, y
        Xval = yval = None
    if len(np.unique(ytr.round())) < 2:
        raise DegenerateData("training split contains a single class")

    opt = Adam(model, cfg)
    hist = FitHistory()
    best_val = np.inf
    best_weights = model.get_weights()
    since_best = 0
    for epoch in range(cfg.max_epochs):
        order = rng.permutation(len(Xtr))
        losses = []
        for start in range(0, len(Xtr), cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            loss, grads = backward(model, Xtr[idx], ytr[idx], cfg.l2_alpha)
            opt.step(model, grads)
            losses.append(loss)
        hist.train_loss.append(float(np.mean(losses)))
        if Xval is not None:
            pval = model.forward(Xval, train=False)
            vloss, _ = bce_loss(pval, yval)
            hist.val_loss.append(float(vloss))
            if vloss < best_val - 1e-12:
                best_val = vloss
                best_weights = model.get_weights()
                hist.best_epoch = epoch
                since_best = 0
            else:
                since_best += 1
                if since_best >= cfg.patience:
                    break
    if Xval is not None:
        model.set_weights(best_weights)
    return hist


# ---------------------------------------------------------------------------
# serialization (ALNN)


def _parse_spec_line(line: str) -> Layer:
    name, _, args = line.partition("(")
    args = args.rstrip(")")
    kwargs = {}
    if args:
        for part in args.split(","):
            k, _, v = part.partition("=")
            kwargs[k] = float(v) if "." in v or "e" in v else int(v)
    cls = _LAYER_KINDS[name]
    return cls(**kwargs) if kwargs else cls()


def save_model(model: Model, path) -> None:
    """ALNN format: magic, version, text spec block, float32 LE weight blobs."""
    lines = ["input_shape = " + ",".join(str(d) for d in model.input_shape),
             "seed = " + str(model.seed)]
    for i, layer in enumerate(model.layers):
        lines.append(f"layer.{i} = {layer.spec_str()}")
    text = "\n".join(lines).encode("utf-8")
    out = bytearray()
    out += ALNN_MAGIC + struct.pack("<I", ALNN_VERSION)
    out += struct.pack("<I", len(text)) + text
    for _, p in model.parameters():
        out += np.asarray(p, dtype="<f4").tobytes()
    # batch-norm running stats travel with the weights
    for layer in model.layers:
        if isinstance(layer, BatchNorm):
            out += np.asarray(layer.running_mean, dtype="<f4").tobytes()
            out += np.asarray(layer.running_var, dtype="<f4").tobytes()
    with open(path, "wb") as f:
        f.write(bytes(out))


def load_model(path) -> Model:
    from .errors import BadMagic, TruncatedFile, UnsupportedVersion
    with open(path, "rb") as f:
        data = f.read()
    if data[:4] != ALNN_MAGIC:
        raise BadMagic(f"bad magic {data[:4]!r}")
    (version,) = struct.unpack("<I", data[4:8])
    if version != ALNN_VERSION:
        raise UnsupportedVersion(f"version {version}")
    (tlen,) = struct.unpack("<I", data[8:12])
    text = data[12 : 12 + tlen].decode("utf-8")
    pos = 12 + tlen
    input_shape = None
    seed = 0
    layers = []
    for line in text.splitlines():
        key, _, val = (p.strip() for p in line.partition("="))
        if key == "input_shape":
            input_shape = tuple(int(d) for d in val.split(","))
        elif key == "seed":
            seed = int(val)
        elif key.startswith("layer."):
            layers.append(_parse_spec_line(val))
    model = Model(layers, input_shape, seed=seed)
    for _, p in model.parameters():
        nbytes = p.size * 4
        if pos + nbytes > len(data):
            raise TruncatedFile("weight blob truncated")
        p[...] = np.frombuffer(data[pos : pos + nbytes], dtype="<f4").reshape(p.shape)
        pos += nbytes
    for layer in model.layers:
        if isinstance(layer, BatchNorm):
            n = layer.running_mean.size * 4
            if pos + 2 * n > len(data):
                raise TruncatedFile("running stats truncated")
            layer.running_mean = np.frombuffer(data[pos : pos + n], dtype="<f4").astype(np.float64)
            layer.running_var = np.frombuffer(data[pos + n : pos + 2 * n], dtype="<f4").astype(np.float64)
            pos += 2 * n
    return model
