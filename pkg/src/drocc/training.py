"""Saddle-point one-class trainer.

Warm-up fits the scorer on normal points only; afterwards every batch
alternates an inner maximization (search for hard off-manifold negatives
inside the annulus around each normal point) with one descent step on

    data term + adv_weight * negative term (+ decoupled decay).

The inner search does normalized gradient ascent on the negative-label
loss and re-projects onto the annulus after every step. ``mode="random"``
replaces the search with uniform annulus sampling (ablation).
"""

import time
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigError, ContractError, DivergenceError
from .nn import GradientBundle, MlpModel, backward, forward, loss_and_input_grads, _as_matrix
from .optim import OPTIMIZERS, OptimizerState, optimizer_step
from .projection import project_displacements, sample_annulus_displacements

MODES = ("ascent", "random")


@dataclass
class DroccConfig:
    """Hyperparameters of the saddle-point trainer.

    radius=None resolves to sqrt(d)/2 when training starts (d = input dim).
    """

    radius: float | None = None
    radius_ratio: float = 2.0
    adv_weight: float = 1.0
    weight_decay: float = 0.0
    ascent_step: float = 0.01
    ascent_steps: int = 10
    warmup_steps: int = 50
    epochs: int = 50
    batch_size: int = 256
    seed: int = 0
    optimizer: str = "adam"
    learning_rate: float = 1e-3
    mode: str = "ascent"
    adv_period: int = 1

    def __post_init__(self):
        if self.radius is not None and not self.radius > 0:
            raise ConfigError("radius must be > 0")
        if not self.radius_ratio >= 1:
            raise ConfigError("radius_ratio must be >= 1")
        if self.adv_weight < 0:
            raise ConfigError("adv_weight must be >= 0")
        if self.weight_decay < 0:
            raise ConfigError("weight_decay must be >= 0")
        if not self.ascent_step > 0:
            raise ConfigError("ascent_step must be > 0")
        if self.ascent_steps < 0:
            raise ConfigError("ascent_steps must be >= 0")
        if self.warmup_steps < 0:
            raise ConfigError("warmup_steps must be >= 0")
        if self.epochs < 0:
            raise ConfigError("epochs must be >= 0")
        if self.batch_size < 1:
            raise ConfigError("batch_size must be >= 1")
        if self.optimizer not in OPTIMIZERS:
            raise ConfigError(f"optimizer must be one of {OPTIMIZERS}")
        if not self.learning_rate > 0:
            raise ConfigError("learning_rate must be > 0")
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}")
        if self.adv_period < 1:
            raise ConfigError("adv_period must be >= 1")

    def resolve_radius(self, dim: int) -> float:
        return self.radius if self.radius is not None else np.sqrt(dim) / 2.0


@dataclass
class TrainReport:
    data_loss: np.ndarray  # per epoch, classification term
    adv_loss: np.ndarray  # per epoch, generated-negative term (unweighted)
    total_loss: np.ndarray  # per epoch, incl. adv weight and decay penalty
    warmup_loss: np.ndarray  # per warm-up step
    model: MlpModel = None
    wall_time_s: float = 0.0
    seed: int = 0


def adversarial_search(model: MlpModel, x_batch, cfg: DroccConfig, rng) -> np.ndarray:
    """Displacements h maximizing the negative-label loss over the annulus.

    h starts from a standard Gaussian draw; each of the ascent_steps
    iterations moves along the row-normalized loss gradient and re-projects
    onto the annulus (rows with zero gradient keep their displacement and
    are still projected). With ascent_steps=0 the initial draw is projected
    once. The model is never modified.
    """
    X = _as_matrix(x_batch)
    n, d = X.shape
    radius = cfg.resolve_radius(d)
    h = rng.standard_normal((n, d))
    if cfg.ascent_steps == 0:
        return project_displacements(h, radius, cfg.radius_ratio, rng=rng)
    for _ in range(cfg.ascent_steps):
        _, grads = loss_and_input_grads(model, X + h, -1)
        norms = np.sqrt((grads * grads).sum(axis=1))
        nz = norms > 0.0
        h[nz] += cfg.ascent_step * grads[nz] / norms[nz, None]
        h = project_displacements(h, radius, cfg.radius_ratio, rng=rng)
    return h


def _euclidean_search(model, x_batch, cfg, rng, sigma=None):
    if cfg.mode == "random":
        n, d = x_batch.shape
        return sample_annulus_displacements(
            n, d, cfg.resolve_radius(d), cfg.radius_ratio, rng
        )
    return adversarial_search(model, x_batch, cfg, rng)


def _combine(ce: GradientBundle, adv: GradientBundle | None, mu: float) -> GradientBundle:
    if adv is None:
        return ce
    return GradientBundle(
        [a + mu * b for a, b in zip(ce.weight_grads, adv.weight_grads)],
        [a + mu * b for a, b in zip(ce.bias_grads, adv.bias_grads)],
        ce.input_grads,
        ce.loss_value + mu * adv.loss_value,
    )


def _decay_penalty(model: MlpModel, weight_decay: float) -> float:
    if weight_decay == 0.0:
        return 0.0
    return weight_decay * sum(float((W * W).sum()) for W in model.weights)


def _check_finite(value: float, phase: str) -> None:
    if not np.isfinite(value):
        raise DivergenceError(
            f"non-finite loss during {phase}; lower learning_rate or ascent_step"
        )


def run_training(
    model: MlpModel,
    X: np.ndarray,
    y: np.ndarray,
    cfg: DroccConfig,
    search_fn,
    sigma_update=None,
) -> TrainReport:
    """Shared engine: labeled warm-up, then per-batch search + descent.

    The classification term covers every labeled row of the batch; the
    search consumes only rows labeled +1. sigma_update, when given, runs
    once per epoch before the batches and its result is passed to
    search_fn.
    """
    X = _as_matrix(X)
    n = X.shape[0]
    if n == 0:
        raise ContractError("training data is empty")
    y = np.asarray(y, dtype=np.float64)
    if y.shape != (n,):
        raise ContractError("labels length must match rows")

    rng = np.random.default_rng(cfg.seed)
    opt = OptimizerState(
        kind=cfg.optimizer,
        learning_rate=cfg.learning_rate,
        weight_decay=cfg.weight_decay,
    )
    t0 = time.perf_counter()

    # warm-up: plain classification steps, no decay
    warmup_losses = []
    opt.weight_decay = 0.0
    steps_done = 0
    while steps_done < cfg.warmup_steps:
        perm = rng.permutation(n)
        for start in range(0, n, cfg.batch_size):
            if steps_done >= cfg.warmup_steps:
                break
            idx = perm[start : start + cfg.batch_size]
            bundle = backward(model, X[idx], y[idx])
            _check_finite(bundle.loss_value, "warm-up")
            optimizer_step(model, bundle, opt)
            warmup_losses.append(bundle.loss_value)
            steps_done += 1
    opt.weight_decay = cfg.weight_decay

    data_losses = np.zeros(cfg.epochs)
    adv_losses = np.zeros(cfg.epochs)
    total_losses = np.zeros(cfg.epochs)
    step_idx = 0
    for epoch in range(cfg.epochs):
        sigma = sigma_update(model, X[y == 1.0], epoch) if sigma_update else None
        perm = rng.permutation(n)
        n_batches = 0
        for start in range(0, n, cfg.batch_size):
            idx = perm[start : start + cfg.batch_size]
            Xb, yb = X[idx], y[idx]
            pos_rows = Xb[yb == 1.0]

            adv_bundle = None
            if pos_rows.shape[0] and step_idx % cfg.adv_period == 0:
                h = search_fn(model, pos_rows, cfg, rng, sigma)
                adv_bundle = backward(model, pos_rows + h, -1)

            ce_bundle = backward(model, Xb, yb)
            total = _combine(ce_bundle, adv_bundle, cfg.adv_weight)
            total_val = total.loss_value + _decay_penalty(model, cfg.weight_decay)
            _check_finite(total_val, f"epoch {epoch}")
            optimizer_step(model, total, opt)

            data_losses[epoch] += ce_bundle.loss_value
            adv_losses[epoch] += adv_bundle.loss_value if adv_bundle else 0.0
            total_losses[epoch] += total_val
            n_batches += 1
            step_idx += 1
        if n_batches:
            data_losses[epoch] /= n_batches
            adv_losses[epoch] /= n_batches
            total_losses[epoch] /= n_batches

    return TrainReport(
        data_loss=data_losses,
        adv_loss=adv_losses,
        total_loss=total_losses,
        warmup_loss=np.array(warmup_losses),
        model=model,
        wall_time_s=time.perf_counter() - t0,
        seed=cfg.seed,
    )


def warmup(model: MlpModel, positives, cfg: DroccConfig) -> MlpModel:
    """Only the warm-up phase: warmup_steps positive-label descent steps."""
    run_training(
        model,
        _as_matrix(positives),
        np.ones(_as_matrix(positives).shape[0]),
        replace(cfg, epochs=0),
        _euclidean_search,
    )
    return model


def train(model: MlpModel, positives, cfg: DroccConfig) -> TrainReport:
    """Full training on normal points only (one-class protocol)."""
    X = _as_matrix(positives)
    return run_training(model, X, np.ones(X.shape[0]), cfg, _euclidean_search)


def score(model: MlpModel, x) -> np.ndarray:
    """Normality scores (raw logits); negate for an anomaly score."""
    return forward(model, x)
