"""From-scratch multilayer perceptron for entanglement classification.

ReLU hidden layers and either a sigmoid head (binary cross entropy) or a
4-neuron raw-activation head read out through softmax (categorical cross
entropy).  Training is plain minibatch gradient descent with Adam or
RMSProp updates, per-epoch reshuffling and early stopping on the
test-set loss.  Everything is deterministic given the config seed.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from .pipeline import batches

# Predicted probabilities are clamped to [LOG_CLAMP, 1 - LOG_CLAMP] inside
# the losses so saturated outputs cannot produce infinite loss.
LOG_CLAMP = 1e-12

ADAM_DEFAULTS = dict(lr=1e-3, beta1=0.9, beta2=0.999, eps=1e-8)
RMSPROP_DEFAULTS = dict(lr=1e-3, decay=0.9, eps=1e-8)


@dataclass(eq=False)
class MlpModel:
    """Fully connected network: weight l has shape (n_l, n_{l-1})."""

    layer_sizes: list
    weights: list
    biases: list
    output_kind: str  # "sigmoid" | "softmax"

    @property
    def topology(self) -> str:
        return ":".join(str(n) for n in self.layer_sizes)

    @property
    def num_parameters(self) -> int:
        return sum(w.size + b.size for w, b in zip(self.weights, self.biases))

    def copy(self) -> "MlpModel":
        return MlpModel(
            list(self.layer_sizes),
            [w.copy() for w in self.weights],
            [b.copy() for b in self.biases],
            self.output_kind,
        )


def parse_topology(s: str) -> list:
    """'16:8:1' -> [16, 8, 1]."""
    sizes = [int(x) for x in s.split(":")]
    if len(sizes) < 2 or any(n < 1 for n in sizes):
        raise ValueError(f"bad topology {s!r}")
    return sizes


def glorot_uniform_init(layer_sizes, seed: int, output_kind: str = "sigmoid") -> MlpModel:
    """Weights uniform in +-sqrt(6/(fan_in+fan_out)), biases zero."""
    if isinstance(layer_sizes, str):
        layer_sizes = parse_topology(layer_sizes)
    if len(layer_sizes) < 2:
        raise ValueError("at least input and output layers are required")
    if output_kind not in ("sigmoid", "softmax"):
        raise ValueError(f"unknown output kind {output_kind!r}")
    rng = np.random.default_rng(np.random.SeedSequence([int(seed)]))
    weights, biases = [], []
    for n_in, n_out in zip(layer_sizes[:-1], layer_sizes[1:]):
        limit = np.sqrt(6.0 / (n_in + n_out))
        weights.append(rng.uniform(-limit, limit, size=(n_out, n_in)))
        biases.append(np.zeros(n_out))
    return MlpModel(list(layer_sizes), weights, biases, output_kind)


def relu(x):
    return np.maximum(x, 0.0)


def sigmoid(x):
    out = np.empty_like(x, dtype=float)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def softmax(a):
    """Stable softmax along the last axis; shift-invariant, sums to 1."""
    a = np.asarray(a, dtype=float)
    e = np.exp(a - np.max(a, axis=-1, keepdims=True))
    return e / np.sum(e, axis=-1, keepdims=True)


def bce(a, a_pred):
    """Binary cross entropy with clamped predictions; elementwise."""
    p = np.clip(a_pred, LOG_CLAMP, 1.0 - LOG_CLAMP)
    return -(a * np.log(p) + (1.0 - a) * np.log1p(-p))


def cce(activations, true_class):
    """Categorical cross entropy -log softmax(a)[i'] with clamping."""
    s = softmax(activations)
    if s.ndim == 1:
        p = s[int(true_class)]
    else:
        p = s[np.arange(s.shape[0]), np.asarray(true_class, dtype=int)]
    return -np.log(np.clip(p, LOG_CLAMP, 1.0 - LOG_CLAMP))


def _forward_cached(model: MlpModel, x: np.ndarray):
    """Pre-activations and activations of every layer for a batch."""
    zs, acts = [], [np.atleast_2d(np.asarray(x, dtype=float))]
    a = acts[0]
    last = len(model.weights) - 1
    for l, (w, b) in enumerate(zip(model.weights, model.biases)):
        z = a @ w.T + b
        zs.append(z)
        a = relu(z) if l < last else z
        acts.append(a)
    return zs, acts


def forward(model: MlpModel, x: np.ndarray) -> np.ndarray:
    """Network readout: sigmoid probabilities (B,) or raw activations (B, 4).

    A single input vector comes back with the batch axis squeezed away.
    """
    single = np.asarray(x).ndim == 1
    z = _forward_cached(model, x)[0][-1]
    out = sigmoid(z)[:, 0] if model.output_kind == "sigmoid" else z
    return out[0] if single else out


def _backward_impl(model: MlpModel, inputs: np.ndarray, targets: np.ndarray):
    x = np.atleast_2d(np.asarray(inputs, dtype=float))
    n = x.shape[0]
    zs, acts = _forward_cached(model, x)
    if model.output_kind == "sigmoid":
        y = np.asarray(targets, dtype=float).reshape(n, 1)
        p = sigmoid(zs[-1])
        delta = (p - y) / n
        delta[(p < LOG_CLAMP) | (p > 1.0 - LOG_CLAMP)] = 0.0
        loss = float(np.mean(bce(y, p)))
    else:
        y = np.atleast_2d(np.asarray(targets, dtype=float))
        p = softmax(zs[-1])
        delta = (p - y) / n
        p_true = np.sum(p * y, axis=1)
        delta[(p_true < LOG_CLAMP) | (p_true > 1.0 - LOG_CLAMP)] = 0.0
        loss = float(np.mean(-np.log(np.clip(p_true, LOG_CLAMP, 1.0 - LOG_CLAMP))))
    grads_w = [None] * len(model.weights)
    grads_b = [None] * len(model.biases)
    for l in range(len(model.weights) - 1, -1, -1):
        grads_w[l] = delta.T @ acts[l]
        grads_b[l] = delta.sum(axis=0)
        if l > 0:
            delta = (delta @ model.weights[l]) * (zs[l - 1] > 0)
    return grads_w, grads_b, loss


def backward(model: MlpModel, inputs: np.ndarray, targets: np.ndarray):
    """Gradients of the mean batch loss for every weight and bias.

    The loss follows the head: BCE for sigmoid (targets are 0/1), CCE for
    softmax (targets are one-hot rows).  Samples whose predicted
    probability is saturated past the log clamp contribute zero gradient,
    matching the clamped losses exactly.
    """
    gw, gb, _ = _backward_impl(model, inputs, targets)
    return gw, gb


class Adam:
    """Adam with bias correction; framework-default hyperparameters."""

    kind = "adam"

    def __init__(self, lr=None, beta1=None, beta2=None, eps=None):
        d = ADAM_DEFAULTS
        self.lr = d["lr"] if lr is None else lr
        self.beta1 = d["beta1"] if beta1 is None else beta1
        self.beta2 = d["beta2"] if beta2 is None else beta2
        self.eps = d["eps"] if eps is None else eps
        self.t = 0
        self.m = None
        self.v = None

    def step(self, params: list, grads: list) -> list:
        if self.m is None:
            self.m = [np.zeros_like(p) for p in params]
            self.v = [np.zeros_like(p) for p in params]
        self.t += 1
        out = []
        for i, (p, g) in enumerate(zip(params, grads)):
            self.m[i] = self.beta1 * self.m[i] + (1 - self.beta1) * g
            self.v[i] = self.beta2 * self.v[i] + (1 - self.beta2) * g**2
            mhat = self.m[i] / (1 - self.beta1**self.t)
            vhat = self.v[i] / (1 - self.beta2**self.t)
            out.append(p - self.lr * mhat / (np.sqrt(vhat) + self.eps))
        return out


class RMSProp:
    """RMSProp with the accumulator inside the square root."""

    kind = "rmsprop"

    def __init__(self, lr=None, decay=None, eps=None):
        d = RMSPROP_DEFAULTS
        self.lr = d["lr"] if lr is None else lr
        self.decay = d["decay"] if decay is None else decay
        self.eps = d["eps"] if eps is None else eps
        self.t = 0
        self.v = None

    def step(self, params: list, grads: list) -> list:
        if self.v is None:
            self.v = [np.zeros_like(p) for p in params]
        self.t += 1
        out = []
        for i, (p, g) in enumerate(zip(params, grads)):
            self.v[i] = self.decay * self.v[i] + (1 - self.decay) * g**2
            out.append(p - self.lr * g / np.sqrt(self.v[i] + self.eps))
        return out


def make_optimizer(kind: str, **kwargs):
    if kind == "adam":
        return Adam(**kwargs)
    if kind == "rmsprop":
        return RMSProp(**kwargs)
    raise ValueError(f"unknown optimizer {kind!r}")


@dataclass
class TrainConfig:
    batch_size: int = 40
    train_fraction: float = 0.8
    max_epochs: int = 200
    patience: int = 10
    seed: int = 0

    def __post_init__(self):
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError("train_fraction must be in (0, 1)")
        if self.max_epochs < 1:
            raise ValueError("max_epochs must be >= 1")
        if self.patience < 0:
            raise ValueError("patience must be >= 0")


@dataclass
class RunMetrics:
    """Per-epoch learning curves plus the early-stop bookkeeping."""

    train_losses: list = field(default_factory=list)
    test_losses: list = field(default_factory=list)
    test_asrs: list = field(default_factory=list)
    best_epoch: int = 0  # 1-based index of the restored epoch
    final_asr: float = 0.0

    @property
    def epochs_run(self) -> int:
        return len(self.train_losses)


def _mean_loss(model: MlpModel, inputs: np.ndarray, targets: np.ndarray) -> float:
    out = forward(model, inputs)
    if model.output_kind == "sigmoid":
        return float(np.mean(bce(np.asarray(targets, dtype=float), out)))
    return float(np.mean(cce(out, np.argmax(targets, axis=1))))


def asr(model: MlpModel, dataset) -> float:
    """Average success rate: fraction of correctly classified samples.

    Binary: entangled iff the sigmoid output is >= 1/2.  Categorical:
    argmax of the softmax readout (ties resolve to the lowest index).
    """
    inputs, labels = dataset
    out = forward(model, inputs)
    if model.output_kind == "sigmoid":
        pred = (out >= 0.5).astype(int)
        return float(np.mean(pred == np.asarray(labels).astype(int)))
    pred = np.argmax(out, axis=1)
    return float(np.mean(pred == np.argmax(labels, axis=1)))


def fit(model: MlpModel, train, test, config: TrainConfig, optimizer="adam"):
    """Train with minibatch updates and early stopping on the test loss.

    One epoch is ceil(n_train / M) parameter updates over a reshuffled
    pass of the whole training set (the final short batch is kept).
    Returns (best model, RunMetrics); the best model carries the weights
    of the epoch with the lowest test loss.
    """
    train_x, train_y = train
    test_x, test_y = test
    n_train = train_x.shape[0]
    if config.batch_size > n_train:
        raise ValueError(f"batch size {config.batch_size} exceeds training set {n_train}")
    opt = make_optimizer(optimizer) if isinstance(optimizer, str) else optimizer
    shuffle_rng = np.random.default_rng(np.random.SeedSequence([int(config.seed), 1]))

    metrics = RunMetrics()
    best_loss = np.inf
    best_weights = None
    stale = 0
    for epoch in range(1, config.max_epochs + 1):
        order = shuffle_rng.permutation(n_train)
        loss_sum = 0.0
        for idx in batches(order, config.batch_size):
            xb, yb = train_x[idx], train_y[idx]
            gw, gb, batch_loss = _backward_impl(model, xb, yb)
            params = opt.step(model.weights + model.biases, gw + gb)
            k = len(model.weights)
            model.weights, model.biases = params[:k], params[k:]
            loss_sum += batch_loss * len(idx)
        metrics.train_losses.append(loss_sum / n_train)
        test_loss = _mean_loss(model, test_x, test_y)
        metrics.test_losses.append(test_loss)
        metrics.test_asrs.append(asr(model, (test_x, test_y)))
        if test_loss < best_loss:
            best_loss = test_loss
            best_weights = ([w.copy() for w in model.weights], [b.copy() for b in model.biases])
            metrics.best_epoch = epoch
            stale = 0
        else:
            stale += 1
            if stale > config.patience:
                break
    best = model.copy()
    if best_weights is not None:
        best.weights, best.biases = best_weights
    metrics.final_asr = metrics.test_asrs[metrics.best_epoch - 1]
    return best, metrics


MODEL_MAGIC = "#entdetect-model v1"


def save_model(model: MlpModel, path) -> str:
    """Checkpoint: header line then one line per parameter tensor."""
    path = os.fspath(path)
    tmp = path + ".tmp"
    with open(tmp, "w") as fh:
        fh.write(f"{MODEL_MAGIC}; topology={model.topology}; head={model.output_kind}\n")
        for l, (w, b) in enumerate(zip(model.weights, model.biases), start=1):
            vals = " ".join(f"{x:.17g}" for x in w.ravel())
            fh.write(f"{l} weight {w.shape[0]} {w.shape[1]} {vals}\n")
            vals = " ".join(f"{x:.17g}" for x in b)
            fh.write(f"{l} bias {b.shape[0]} {vals}\n")
    os.replace(tmp, path)
    return path


def load_model(path) -> MlpModel:
    """Inverse of save_model; round trips are bit-exact."""
    from .stategen import FormatError

    path = os.fspath(path)
    with open(path) as fh:
        header = fh.readline().rstrip("\n")
        if not header.startswith(MODEL_MAGIC + "; "):
            raise FormatError(f"{path}: missing model header")
        fields = dict(
            part.partition("=")[::2] for part in header[len(MODEL_MAGIC) + 2 :].split("; ")
        )
        sizes = parse_topology(fields["topology"])
        head = fields["head"]
        if head not in ("sigmoid", "softmax"):
            raise FormatError(f"{path}: bad head {head!r}")
        weights = [None] * (len(sizes) - 1)
        biases = [None] * (len(sizes) - 1)
        for line in fh:
            parts = line.split()
            l, kind = int(parts[0]) - 1, parts[1]
            if kind == "weight":
                r, c = int(parts[2]), int(parts[3])
                weights[l] = np.array([float(x) for x in parts[4:]]).reshape(r, c)
            elif kind == "bias":
                n = int(parts[2])
                biases[l] = np.array([float(x) for x in parts[3:]])
                if biases[l].shape != (n,):
                    raise FormatError(f"{path}: bias length mismatch on layer {l + 1}")
            else:
                raise FormatError(f"{path}: unknown tensor kind {kind!r}")
    if any(w is None for w in weights) or any(b is None for b in biases):
        raise FormatError(f"{path}: incomplete checkpoint")
    model = MlpModel(sizes, weights, biases, head)
    for l, (w, b) in enumerate(zip(weights, biases)):
        if w.shape != (sizes[l + 1], sizes[l]) or b.shape != (sizes[l + 1],):
            raise FormatError(f"{path}: tensor shapes disagree with topology")
    return model
