"""Dense feed-forward scorer with exact backpropagation.

The scorer maps a feature row to a single logit (higher = more normal).
Backprop returns gradients with respect to the parameters *and* the
inputs; the raw-score input gradient (of the logit itself, not the loss)
is exposed separately because the influence weights of the
limited-negatives trainer need it.

All math is float64.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ContractError

ACTIVATIONS = ("relu", "tanh")


def _as_matrix(batch) -> np.ndarray:
    X = np.asarray(batch, dtype=np.float64)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2:
        raise ContractError(f"batch must be 2-D, got shape {X.shape}")
    return X


@dataclass
class MlpModel:
    """Fully-connected net: hidden activations + identity scalar output."""

    layer_dims: list[int]
    activation: str
    weights: list[np.ndarray]
    biases: list[np.ndarray]

    @classmethod
    def init(cls, layer_dims, activation: str = "relu", seed: int = 0) -> "MlpModel":
        dims = [int(x) for x in layer_dims]
        if len(dims) < 2:
            raise ContractError("need at least input and output dims")
        if dims[-1] != 1:
            raise ContractError(f"output dim must be 1, got {dims[-1]}")
        if activation not in ACTIVATIONS:
            raise ContractError(f"activation must be one of {ACTIVATIONS}")
        rng = np.random.default_rng(seed)
        weights, biases = [], []
        for fan_in, fan_out in zip(dims[:-1], dims[1:]):
            bound = np.sqrt(6.0 / fan_in)
            weights.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)))
            biases.append(np.zeros(fan_out))
        return cls(dims, activation, weights, biases)

    @property
    def input_dim(self) -> int:
        return self.layer_dims[0]

    @property
    def n_layers(self) -> int:
        return len(self.weights)

    def copy(self) -> "MlpModel":
        return MlpModel(
            list(self.layer_dims),
            self.activation,
            [W.copy() for W in self.weights],
            [b.copy() for b in self.biases],
        )

    def _check_batch(self, X: np.ndarray) -> None:
        if X.shape[1] != self.input_dim:
            raise ContractError(
                f"batch has {X.shape[1]} columns, model expects {self.input_dim}"
            )

    def _activate(self, Z: np.ndarray) -> np.ndarray:
        if self.activation == "relu":
            return np.maximum(Z, 0.0)
        return np.tanh(Z)

    def _activate_grad(self, Z: np.ndarray, A: np.ndarray) -> np.ndarray:
        if self.activation == "relu":
            return (Z > 0.0).astype(np.float64)
        return 1.0 - A * A


@dataclass
class GradientBundle:
    """Gradients of a scalar loss: parameter grads plus per-row input grads."""

    weight_grads: list[np.ndarray]
    bias_grads: list[np.ndarray]
    input_grads: np.ndarray
    loss_value: float

    def scaled(self, factor: float) -> "GradientBundle":
        return GradientBundle(
            [g * factor for g in self.weight_grads],
            [g * factor for g in self.bias_grads],
            self.input_grads * factor,
            self.loss_value * factor,
        )

    def add(self, other: "GradientBundle") -> "GradientBundle":
        if self.input_grads.shape[1] != other.input_grads.shape[1]:
            raise ContractError("bundles built from different input dims")
        return GradientBundle(
            [a + b for a, b in zip(self.weight_grads, other.weight_grads)],
            [a + b for a, b in zip(self.bias_grads, other.bias_grads)],
            np.concatenate([self.input_grads, other.input_grads]),
            self.loss_value + other.loss_value,
        )


def _forward_pass(model: MlpModel, X: np.ndarray):
    """Returns (pre-activations per layer, activations per layer incl. X)."""
    A = [X]
    Z = []
    cur = X
    last = model.n_layers - 1
    for l, (W, b) in enumerate(zip(model.weights, model.biases)):
        z = cur @ W + b
        Z.append(z)
        cur = model._activate(z) if l < last else z
        A.append(cur)
    return Z, A


def forward(model: MlpModel, batch) -> np.ndarray:
    """Logits f(x) for each row; shape (n,)."""
    X = _as_matrix(batch)
    model._check_batch(X)
    _, A = _forward_pass(model, X)
    return A[-1][:, 0]


def sigmoid(t: np.ndarray) -> np.ndarray:
    # exp on the negative half-axis only, stable for |t| up to 1e3+
    out = np.empty_like(t, dtype=np.float64)
    pos = t >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-t[pos]))
    e = np.exp(t[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def bce_logit_loss(logit: float, label: int) -> float:
    """Cross-entropy of sigmoid(logit) against label in {+1, -1}.

    Equals softplus(-label * logit), evaluated in log-sum-exp form.
    """
    if label not in (1, -1):
        raise ContractError(f"label must be +1 or -1, got {label}")
    return float(np.logaddexp(0.0, -label * float(logit)))


def bce_logit_losses(logits: np.ndarray, labels: np.ndarray) -> np.ndarray:
    return np.logaddexp(0.0, -labels * logits)


def _backprop(model: MlpModel, Z, A, out_grad: np.ndarray) -> GradientBundle:
    """Backprop a gradient seed on the output column through the net."""
    weight_grads = [None] * model.n_layers
    bias_grads = [None] * model.n_layers
    G = out_grad
    for l in range(model.n_layers - 1, -1, -1):
        weight_grads[l] = A[l].T @ G
        bias_grads[l] = G.sum(axis=0)
        G = G @ model.weights[l].T
        if l > 0:
            G = G * model._activate_grad(Z[l - 1], A[l])
    return GradientBundle(weight_grads, bias_grads, G, 0.0)


def backward(model: MlpModel, batch, labels, per_example_weights=None) -> GradientBundle:
    """Exact gradients of the weighted mean BCE-logit loss.

    loss = (1/n) * sum_i w_i * softplus(-y_i * f(x_i)); gradients are taken
    w.r.t. every parameter and every input row.
    """
    X = _as_matrix(batch)
    model._check_batch(X)
    n = X.shape[0]
    y = np.broadcast_to(np.asarray(labels, dtype=np.float64), (n,))
    if per_example_weights is None:
        w = np.ones(n)
    else:
        w = np.asarray(per_example_weights, dtype=np.float64)
        if w.shape != (n,):
            raise ContractError(f"weights shape {w.shape} != ({n},)")
        if (w < 0).any():
            raise ContractError("per-example weights must be >= 0")

    Z, A = _forward_pass(model, X)
    logits = A[-1][:, 0]
    losses = bce_logit_losses(logits, y)
    loss = float((w * losses).sum() / n)
    # d/dz softplus(-y z) = -y * sigmoid(-y z)
    dlogit = (w / n) * (-y) * sigmoid(-y * logits)
    bundle = _backprop(model, Z, A, dlogit[:, None])
    bundle.loss_value = loss
    return bundle


def loss_and_input_grads(model: MlpModel, batch, label: int):
    """Per-row BCE-logit losses and their input gradients, skipping the
    parameter gradients (ascent inner loop runs this many times)."""
    X = _as_matrix(batch)
    model._check_batch(X)
    Z, A = _forward_pass(model, X)
    logits = A[-1][:, 0]
    losses = bce_logit_losses(logits, float(label))
    dlogit = -float(label) * sigmoid(-float(label) * logits)
    G = dlogit[:, None]
    for l in range(model.n_layers - 1, -1, -1):
        G = G @ model.weights[l].T
        if l > 0:
            G = G * model._activate_grad(Z[l - 1], A[l])
    return losses, G


def input_gradients(model: MlpModel, batch) -> np.ndarray:
    """Raw-score gradients d f(x) / d x per row (unit output seed)."""
    X = _as_matrix(batch)
    model._check_batch(X)
    Z, A = _forward_pass(model, X)
    G = np.ones((X.shape[0], 1))
    for l in range(model.n_layers - 1, -1, -1):
        G = G @ model.weights[l].T
        if l > 0:
            G = G * model._activate_grad(Z[l - 1], A[l])
    return G
