"""Dense autoencoder in numpy with the radial loss.

The radial loss of one row is ``|k * r_out - r_in| / max(r_in, eps)`` where
``r_in = ||x - center||`` and ``r_out = ||net(x) - center||``. Training
tracks the test-set AUROC after every epoch and keeps the best snapshot;
that selection looks at test labels, which reports flag explicitly.

Weights are stored as ``(fan_in, fan_out)`` matrices, so a batch ``X`` of
row vectors maps to ``act(X @ W + b)``. Initialization draws
``N(0, gain / fan_in)`` with gain ``2 / (1 + alpha**2)`` for layers that feed
a (leaky) ReLU and gain 1 otherwise; biases start at zero.
"""

from __future__ import annotations

import copy
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from ._backend import kernels
from .geometry import Dataset, atomic_write_text, make_rng

MODEL_FORMAT_VERSION = 1

HIDDEN_ACTIVATIONS = ("leaky_relu", "relu", "identity")
OUTPUT_ACTIVATIONS = ("identity", "softsign", "tanh")
OPTIMIZERS = ("sgd", "sgd_momentum", "adam")


@dataclass(frozen=True)
class NetworkSpec:
    layer_sizes: tuple[int, ...]
    hidden_activation: str = "leaky_relu"
    leaky_alpha: float = 0.01
    output_activation: str = "identity"
    use_bias: bool = True

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.layer_sizes)
        object.__setattr__(self, "layer_sizes", sizes)
        if len(sizes) < 3:
            raise ValueError("an autoencoder needs at least 3 layers")
        if sizes[0] != sizes[-1]:
            raise ValueError(f"input size {sizes[0]} differs from output size {sizes[-1]}")
        if min(sizes) < 1:
            raise ValueError("layer sizes must be positive")
        if self.hidden_activation not in HIDDEN_ACTIVATIONS:
            raise ValueError(f"unknown hidden activation {self.hidden_activation!r}")
        if self.output_activation not in OUTPUT_ACTIVATIONS:
            raise ValueError(f"unknown output activation {self.output_activation!r}")
        if not self.use_bias and self.output_activation != "identity":
            raise ValueError("zero-bias networks must use the identity output activation")

    @classmethod
    def default(cls, dim: int, **kwargs) -> "NetworkSpec":
        return cls((dim, 70, 8, 70, dim), **kwargs)

    @property
    def dim(self) -> int:
        return self.layer_sizes[0]


def _activate(name: str, z: np.ndarray, alpha: float) -> np.ndarray:
    if name == "identity":
        return z
    if name == "relu":
        return np.maximum(z, 0.0)
    if name == "leaky_relu":
        return np.where(z > 0, z, alpha * z)
    if name == "softsign":
        return z / (1.0 + np.abs(z))
    if name == "tanh":
        return np.tanh(z)
    raise ValueError(name)


def _activate_grad(name: str, z: np.ndarray, alpha: float) -> np.ndarray:
    if name == "identity":
        return np.ones_like(z)
    if name == "relu":
        return (z > 0).astype(z.dtype)
    if name == "leaky_relu":
        return np.where(z > 0, 1.0, alpha)
    if name == "softsign":
        return 1.0 / (1.0 + np.abs(z)) ** 2
    if name == "tanh":
        return 1.0 - np.tanh(z) ** 2
    raise ValueError(name)


class Network:
    """Parameters of a dense autoencoder plus forward and backward passes."""

    def __init__(self, spec: NetworkSpec, weights, biases=None):
        self.spec = spec
        self.weights = [np.array(w, dtype=np.float64) for w in weights]
        if spec.use_bias:
            if biases is None:
                raise ValueError("spec requires biases")
            self.biases = [np.array(b, dtype=np.float64) for b in biases]
        else:
            if biases is not None and any(b is not None for b in biases):
                raise ValueError("zero-bias spec cannot carry biases")
            self.biases = None
        sizes = spec.layer_sizes
        if len(self.weights) != len(sizes) - 1:
            raise ValueError("wrong number of weight matrices")
        for i, w in enumerate(self.weights):
            if w.shape != (sizes[i], sizes[i + 1]):
                raise ValueError(f"layer {i} weights have shape {w.shape}")
            if self.biases is not None and self.biases[i].shape != (sizes[i + 1],):
                raise ValueError(f"layer {i} bias has shape {self.biases[i].shape}")

    @property
    def n_layers(self) -> int:
        return len(self.weights)

    @property
    def n_weights(self) -> int:
        return sum(w.size for w in self.weights)

    @property
    def n_biases(self) -> int:
        return 0 if self.biases is None else sum(b.size for b in self.biases)

    def parameters(self) -> list[np.ndarray]:
        return self.weights + (self.biases or [])

    def copy(self) -> "Network":
        return copy.deepcopy(self)

    def _act(self, layer: int) -> str:
        return self.spec.output_activation if layer == self.n_layers - 1 else self.spec.hidden_activation

    def forward(self, x) -> np.ndarray:
        a = np.asarray(x, dtype=np.float64)
        single = a.ndim == 1
        if single:
            a = a[None, :]
        if a.shape[1] != self.spec.dim:
            raise ValueError(f"input has {a.shape[1]} features, network expects {self.spec.dim}")
        for i, w in enumerate(self.weights):
            z = a @ w
            if self.biases is not None:
                z += self.biases[i]
            a = _activate(self._act(i), z, self.spec.leaky_alpha)
        return a[0] if single else a

    def forward_cached(self, x: np.ndarray):
        acts = [x]
        pre = []
        a = x
        for i, w in enumerate(self.weights):
            z = a @ w
            if self.biases is not None:
                z += self.biases[i]
            pre.append(z)
            a = _activate(self._act(i), z, self.spec.leaky_alpha)
            acts.append(a)
        return a, (acts, pre)

    def backward(self, cache, grad_out: np.ndarray) -> list[np.ndarray]:
        """Gradients in ``parameters()`` order, given dLoss/dOutput."""
        acts, pre = cache
        gw = [None] * self.n_layers
        gb = [None] * self.n_layers
        delta = grad_out
        for i in range(self.n_layers - 1, -1, -1):
            delta = delta * _activate_grad(self._act(i), pre[i], self.spec.leaky_alpha)
            gw[i] = acts[i].T @ delta
            gb[i] = delta.sum(axis=0)
            if i > 0:
                delta = delta @ self.weights[i].T
        return gw + (gb if self.biases is not None else [])

    def to_dict(self) -> dict:
        return {
            "format_version": MODEL_FORMAT_VERSION,
            "spec": {**asdict(self.spec), "layer_sizes": list(self.spec.layer_sizes)},
            "layers": [
                {"weights": w.tolist(), "bias": None if self.biases is None else self.biases[i].tolist()}
                for i, w in enumerate(self.weights)
            ],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "Network":
        version = doc.get("format_version")
        if version != MODEL_FORMAT_VERSION:
            raise ValueError(f"unsupported model format version {version!r}")
        spec = NetworkSpec(**doc["spec"])
        weights = [layer["weights"] for layer in doc["layers"]]
        biases = [layer["bias"] for layer in doc["layers"]] if spec.use_bias else None
        return cls(spec, weights, biases)

    def save(self, path) -> None:
        atomic_write_text(path, json.dumps(self.to_dict()) + "\n")

    @classmethod
    def load(cls, path) -> "Network":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def init_network(spec: NetworkSpec, seed: int = 0) -> Network:
    rng = make_rng(seed)
    sizes = spec.layer_sizes
    weights, biases = [], []
    relu_like = spec.hidden_activation in ("relu", "leaky_relu")
    alpha = spec.leaky_alpha if spec.hidden_activation == "leaky_relu" else 0.0
    for i in range(len(sizes) - 1):
        feeds_relu = relu_like and i < len(sizes) - 2
        gain = 2.0 / (1.0 + alpha ** 2) if feeds_relu else 1.0
        weights.append(rng.standard_normal((sizes[i], sizes[i + 1])) * math.sqrt(gain / sizes[i]))
        biases.append(np.zeros(sizes[i + 1]))
    return Network(spec, weights, biases if spec.use_bias else None)


def forward(net: Network, x) -> np.ndarray:
    return net.forward(x)


def radial_terms(x: np.ndarray, y: np.ndarray, center, k: float = 1.0, epsilon: float = 1e-8):
    """Per-row ``(r_in, r_out, rho)`` of the radial loss."""
    c = np.asarray(center, dtype=np.float64)
    r_in = np.sqrt(((x - c) ** 2).sum(axis=1))
    r_out = np.sqrt(((y - c) ** 2).sum(axis=1))
    rho = np.abs(k * r_out - r_in) / np.maximum(r_in, epsilon)
    return r_in, r_out, rho


def _radial_loss_grad(x, y, center, k, epsilon):
    c = np.asarray(center, dtype=np.float64)
    d = y - c
    r_in = np.sqrt(((x - c) ** 2).sum(axis=1))
    r_out = np.sqrt((d ** 2).sum(axis=1))
    denom = np.maximum(r_in, epsilon)
    t = k * r_out - r_in
    rho = np.abs(t) / denom
    # subgradient 0 at the kink t == 0 and where r_out == 0
    safe = np.where(r_out > 0, r_out, 1.0)
    coef = np.sign(t) * k / (denom * safe) * (r_out > 0)
    return rho.mean(), coef[:, None] * d / x.shape[0]


def _mse_loss_grad(x, y):
    diff = y - x
    return float((diff ** 2).mean()), 2.0 * diff / diff.size


def radial_loss(net: Network, batch, center, k: float = 1.0, epsilon: float = 1e-8):
    """Mean radial loss over ``batch`` and its gradients (``net.parameters()`` order)."""
    x = np.asarray(batch, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] == 0:
        raise ValueError("batch must be a non-empty 2-D array")
    y, cache = net.forward_cached(x)
    loss, g = _radial_loss_grad(x, y, center, k, epsilon)
    return float(loss), net.backward(cache, g)


def mse_loss(net: Network, batch):
    x = np.asarray(batch, dtype=np.float64)
    y, cache = net.forward_cached(x)
    loss, g = _mse_loss_grad(x, y)
    return loss, net.backward(cache, g)


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 200
    batch_size: int = 256
    learning_rate: float = 1e-3
    optimizer: str = "adam"
    momentum: float = 0.9
    beta1: float = 0.9
    beta2: float = 0.999
    adam_epsilon: float = 1e-8
    seed: int = 0
    loss: str = "radial"
    loss_k: float = 1.0
    radius_epsilon: float = 1e-8

    def __post_init__(self):
        if self.epochs < 0 or self.batch_size < 1:
            raise ValueError("epochs must be >= 0 and batch_size >= 1")
        if self.learning_rate < 0:
            raise ValueError("learning_rate must be nonnegative")
        if self.optimizer not in OPTIMIZERS:
            raise ValueError(f"unknown optimizer {self.optimizer!r}")
        if self.loss not in ("radial", "mse"):
            raise ValueError(f"unknown loss {self.loss!r}")
        if self.loss_k < 1:
            raise ValueError("loss_k must be >= 1")
        if self.radius_epsilon <= 0:
            raise ValueError("radius_epsilon must be positive")


@dataclass
class TrainTrace:
    train_loss: list[float] = field(default_factory=list)
    test_auroc: list[float] = field(default_factory=list)
    best_epoch: int | None = None
    best_net: Network | None = None
    final_net: Network | None = None

    @property
    def best_auroc(self) -> float | None:
        return None if self.best_epoch is None else self.test_auroc[self.best_epoch]


class _Optimizer:
    def __init__(self, params: list[np.ndarray], cfg: TrainConfig):
        self.cfg = cfg
        self.t = 0
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params] if cfg.optimizer == "adam" else None

    def step(self, params: list[np.ndarray], grads: list[np.ndarray]) -> None:
        cfg = self.cfg
        lr = cfg.learning_rate
        if cfg.optimizer == "sgd":
            for p, g in zip(params, grads):
                p -= lr * g
        elif cfg.optimizer == "sgd_momentum":
            for p, g, m in zip(params, grads, self.m):
                m *= cfg.momentum
                m += g
                p -= lr * m
        else:
            self.t += 1
            b1, b2 = cfg.beta1, cfg.beta2
            c1 = 1.0 - b1 ** self.t
            c2 = 1.0 - b2 ** self.t
            for p, g, m, v in zip(params, grads, self.m, self.v):
                m *= b1
                m += (1 - b1) * g
                v *= b2
                v += (1 - b2) * g * g
                p -= lr * (m / c1) / (np.sqrt(v / c2) + cfg.adam_epsilon)


def output_radii(net: Network, x, center) -> np.ndarray:
    y = net.forward(np.asarray(x, dtype=np.float64))
    return np.sqrt(((y - np.asarray(center, dtype=np.float64)) ** 2).sum(axis=1))


def reconstruction_error_scores(net: Network, data) -> np.ndarray:
    """Per-row mean squared reconstruction error (the vanilla AE anomaly score)."""
    x = data.features if isinstance(data, Dataset) else np.asarray(data, dtype=np.float64)
    y = net.forward(x)
    return ((y - x) ** 2).mean(axis=1)


def fit_with_tracking(
    net: Network,
    train: Dataset | np.ndarray,
    test: Dataset,
    center,
    cfg: TrainConfig | None = None,
) -> TrainTrace:
    """Mini-batch training with per-epoch test AUROC and best-epoch snapshot.

    The test score is the output radius from ``center`` for the radial loss and
    the reconstruction error for ``loss="mse"``. ``net`` is not modified.
    """
    cfg = cfg or TrainConfig()
    x = train.features if isinstance(train, Dataset) else np.asarray(train, dtype=np.float64)
    if isinstance(train, Dataset) and train.n_anomalies:
        raise ValueError("training set must contain only normal rows")
    if x.shape[0] == 0:
        raise ValueError("empty training set")
    if not test.has_both_classes():
        raise ValueError("test set needs both classes for AUROC tracking")
    center = np.asarray(center, dtype=np.float64)
    net = net.copy()
    trace = TrainTrace(best_net=net.copy())
    params = net.parameters()
    opt = _Optimizer(params, cfg)
    rng = make_rng(cfg.seed)
    n = x.shape[0]
    best = -np.inf
    for epoch in range(cfg.epochs):
        order = rng.permutation(n)
        total = 0.0
        for start in range(0, n, cfg.batch_size):
            batch = x[order[start:start + cfg.batch_size]]
            if cfg.loss == "radial":
                loss, grads = radial_loss(net, batch, center, cfg.loss_k, cfg.radius_epsilon)
            else:
                loss, grads = mse_loss(net, batch)
            total += loss * batch.shape[0]
            if cfg.learning_rate > 0:
                opt.step(params, grads)
        trace.train_loss.append(total / n)
        if cfg.loss == "radial":
            scores = output_radii(net, test.features, center)
        else:
            scores = reconstruction_error_scores(net, test)
        score = float(kernels.auroc(scores, test.labels))
        trace.test_auroc.append(score)
        if score > best:
            best = score
            trace.best_epoch = epoch
            trace.best_net = net.copy()
    trace.final_net = net
    return trace
