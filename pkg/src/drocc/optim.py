"""SGD and Adam with decoupled L2 weight decay.

The decay term contributes 2 * weight_decay * W directly to the update
(never to the Adam moments) and is applied to weight matrices only, not
biases, so the output offset stays unregularized.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ContractError
from .nn import GradientBundle, MlpModel

OPTIMIZERS = ("sgd", "adam")


@dataclass
class OptimizerState:
    kind: str = "adam"
    learning_rate: float = 1e-3
    weight_decay: float = 0.0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step_count: int = 0
    _m: list = field(default_factory=list, repr=False)
    _v: list = field(default_factory=list, repr=False)

    def __post_init__(self):
        if self.kind not in OPTIMIZERS:
            raise ContractError(f"optimizer kind must be one of {OPTIMIZERS}")
        if self.learning_rate <= 0:
            raise ContractError("learning_rate must be > 0")
        if self.weight_decay < 0:
            raise ContractError("weight_decay must be >= 0")

    def _ensure_moments(self, params):
        if not self._m:
            self._m = [np.zeros_like(p) for p in params]
            self._v = [np.zeros_like(p) for p in params]


def optimizer_step(model: MlpModel, bundle: GradientBundle, state: OptimizerState) -> MlpModel:
    """One in-place update of the model parameters; returns the model."""
    params = model.weights + model.biases
    grads = bundle.weight_grads + bundle.bias_grads
    n_w = len(model.weights)
    lr = state.learning_rate

    if state.kind == "sgd":
        for i, (p, g) in enumerate(zip(params, grads)):
            decay = lr * (2.0 * state.weight_decay) * p if (state.weight_decay > 0.0 and i < n_w) else None
            p -= lr * g
            if decay is not None:
                p -= decay
    else:
        state._ensure_moments(params)
        state.step_count += 1
        t = state.step_count
        b1, b2 = state.beta1, state.beta2
        for i, (p, g) in enumerate(zip(params, grads)):
            decay = lr * (2.0 * state.weight_decay) * p if (state.weight_decay > 0.0 and i < n_w) else None
            m = state._m[i]
            v = state._v[i]
            m *= b1
            m += (1.0 - b1) * g
            v *= b2
            v += (1.0 - b2) * (g * g)
            m_hat = m / (1.0 - b1**t)
            v_hat = v / (1.0 - b2**t)
            p -= lr * m_hat / (np.sqrt(v_hat) + state.eps)
            if decay is not None:
                p -= decay
    return model
