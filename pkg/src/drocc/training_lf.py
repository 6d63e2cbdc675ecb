"""Limited-negatives trainers.

``train_lf`` consumes labeled data: every batch contributes its
cross-entropy term, while hard negatives are generated from the positive
rows only, inside a diagonal-Mahalanobis annulus. The per-coordinate
influence weights defining that metric are the mean absolute raw-score
input gradients over the positive rows, refreshed at the start of every
epoch and floored to keep the metric invertible.

``train_oe`` is the outlier-exposure variant: same labeled
cross-entropy, but the negative search stays Euclidean.
"""

from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigError, ContractError
from .nn import MlpModel, input_gradients, loss_and_input_grads, _as_matrix
from .projection import project_mahalanobis_displacements
from .training import (
    DroccConfig,
    TrainReport,
    _euclidean_search,
    run_training,
)

SIGMA_FLOOR = 1e-6
VARIANTS = ("lf", "oe")


@dataclass
class SigmaWeights:
    """Per-coordinate influence weights (diagonal of the local metric)."""

    sigma: np.ndarray
    floor: float = SIGMA_FLOOR
    epoch_stamp: int = 0


@dataclass
class LfConfig(DroccConfig):
    grid_points: int = 256
    variant: str = "lf"

    def __post_init__(self):
        super().__post_init__()
        if self.grid_points < 2:
            raise ConfigError("grid_points must be >= 2")
        if self.variant not in VARIANTS:
            raise ConfigError(f"variant must be one of {VARIANTS}")
        if self.mode == "random":
            raise ConfigError("random negative sampling is only supported by the plain trainer")


def update_sigma(model: MlpModel, positives, epoch_stamp: int = 0) -> SigmaWeights:
    """Mean |d f / d x_j| over the positive rows, floored at SIGMA_FLOOR."""
    X = _as_matrix(positives)
    if X.shape[0] == 0:
        raise ContractError("positives must be nonempty")
    grads = input_gradients(model, X)
    sigma = np.abs(grads).mean(axis=0)
    return SigmaWeights(np.maximum(sigma, SIGMA_FLOOR), SIGMA_FLOOR, epoch_stamp)


def lf_adversarial_search(
    model: MlpModel, x_batch, sigma: SigmaWeights, cfg: LfConfig, rng
) -> np.ndarray:
    """Ascent loop identical to the plain search, but feasibility lives in
    the sigma-weighted metric (projection solves the multiplier problem)."""
    X = _as_matrix(x_batch)
    n, d = X.shape
    radius = cfg.resolve_radius(d)

    def project(H):
        return project_mahalanobis_displacements(
            H, sigma.sigma, radius, cfg.radius_ratio,
            grid_points=cfg.grid_points, rng=rng,
        )[0]

    h = rng.standard_normal((n, d))
    if cfg.ascent_steps == 0:
        return project(h)
    for _ in range(cfg.ascent_steps):
        _, grads = loss_and_input_grads(model, X + h, -1)
        norms = np.sqrt((grads * grads).sum(axis=1))
        nz = norms > 0.0
        h[nz] += cfg.ascent_step * grads[nz] / norms[nz, None]
        h = project(h)
    return h


def _lf_search(model, x_batch, cfg, rng, sigma):
    return lf_adversarial_search(model, x_batch, sigma, cfg, rng)


def _sigma_refresh(model, positives, epoch):
    return update_sigma(model, positives, epoch_stamp=epoch)


def train_lf(model: MlpModel, features, labels, cfg: LfConfig) -> TrainReport:
    """Train on labeled rows; labels must be +1/-1 with at least one +1."""
    X = _as_matrix(features)
    y = np.asarray(labels, dtype=np.float64)
    if not np.isin(y, (1.0, -1.0)).all():
        raise ContractError("labels must be +1 or -1")
    if not (y == 1.0).any():
        raise ContractError("need at least one positive row")
    if cfg.variant == "oe":
        return run_training(model, X, y, cfg, _euclidean_search)
    return run_training(model, X, y, cfg, _lf_search, sigma_update=_sigma_refresh)


def train_oe(model: MlpModel, features, labels, cfg: LfConfig) -> TrainReport:
    """Outlier-exposure variant: Euclidean search plus labeled CE."""
    return train_lf(model, features, labels, replace(cfg, variant="oe"))
