"""Projection onto the annulus of candidate negatives around a point.

Two metrics are supported. In the Euclidean metric the projection is
closed form: scale the displacement so its norm lands in
[radius, ratio*radius]. In the diagonal-Mahalanobis metric the
projection reduces to a one-dimensional multiplier search handled by the
kernels in :mod:`drocc.kernels` (log-dense grid plus bisection polish on
the active boundary).

Degenerate zero displacements get a deterministic pseudo-random unit
direction from the supplied generator (or a fixed default), placed on
the inner boundary.
"""

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import ContractError

EUCLIDEAN_TOL = 1e-9
MAHALANOBIS_TOL = 1e-6


@dataclass(frozen=True)
class EuclideanAnnulus:
    center: np.ndarray
    radius: float
    ratio: float = 2.0

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, dtype=np.float64))
        if not self.radius > 0:
            raise ContractError("radius must be > 0")
        if not self.ratio >= 1:
            raise ContractError("ratio must be >= 1")


@dataclass(frozen=True)
class MahalanobisAnnulus:
    center: np.ndarray
    radius: float
    ratio: float
    sigma: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, dtype=np.float64))
        object.__setattr__(self, "sigma", np.asarray(self.sigma, dtype=np.float64))
        if not self.radius > 0:
            raise ContractError("radius must be > 0")
        if not self.ratio >= 1:
            raise ContractError("ratio must be >= 1")
        if self.sigma.shape != self.center.shape:
            raise ContractError("sigma and center must have the same length")
        if not (self.sigma > 0).all():
            raise ContractError("all sigma entries must be > 0")


@dataclass(frozen=True)
class ProjectionResult:
    point: np.ndarray
    active_constraint: str  # "none" | "inner" | "outer"
    multiplier: float | None


_ACTIVE_NAMES = {
    kernels.ACTIVE_NONE: "none",
    kernels.ACTIVE_INNER: "inner",
    kernels.ACTIVE_OUTER: "outer",
}


def _fallback_directions(n: int, d: int, rng) -> np.ndarray:
    if rng is None:
        rng = np.random.default_rng(0)
    U = rng.standard_normal((n, d))
    return U / np.sqrt((U * U).sum(axis=1))[:, None]


def mahalanobis_norm(v: np.ndarray, sigma: np.ndarray) -> float:
    return float(np.sqrt((sigma * v * v).sum()))


def project_displacements(H, radius: float, ratio: float, rng=None) -> np.ndarray:
    """Batch Euclidean projection of displacement rows onto the annulus.

    Each row is rescaled to target norm
    radius            if |h| <= radius,
    |h|               if radius <= |h| <= ratio*radius,
    ratio*radius      if |h| >= ratio*radius.
    Zero rows become radius * (seeded random unit direction).
    """
    H = np.ascontiguousarray(H, dtype=np.float64)
    out = kernels.project_displacements(H, radius, radius * ratio)
    zero = (H == 0.0).all(axis=1)
    if zero.any():
        dirs = _fallback_directions(int(zero.sum()), H.shape[1], rng)
        out[zero] = radius * dirs
    return out


def project_displacement(h, radius: float, ratio: float, rng=None) -> np.ndarray:
    """Single-row convenience wrapper over :func:`project_displacements`."""
    h = np.asarray(h, dtype=np.float64)
    return project_displacements(h[None, :], radius, ratio, rng=rng)[0]


def project_euclidean(z, ann: EuclideanAnnulus, rng=None) -> ProjectionResult:
    """Nearest point of the Euclidean annulus around ann.center."""
    z = np.asarray(z, dtype=np.float64)
    if z.shape != ann.center.shape:
        raise ContractError("z and annulus center must have the same length")
    h = z - ann.center
    beta = float(np.sqrt((h * h).sum()))
    point = ann.center + project_displacement(h, ann.radius, ann.ratio, rng=rng)
    if beta < ann.radius:
        active = "inner"
    elif beta > ann.ratio * ann.radius:
        active = "outer"
    else:
        active = "none"
    return ProjectionResult(point, active, None)


def project_mahalanobis_displacements(
    H, sigma, radius: float, ratio: float, grid_points: int = 256, rng=None
):
    """Batch Mahalanobis projection in displacement coordinates.

    Returns (projected rows, active-constraint codes, multipliers). When
    all sigma entries are equal the metric is a rescaled Euclidean one and
    the closed form applies exactly (radii divided by sqrt(sigma)).
    """
    H = np.ascontiguousarray(H, dtype=np.float64)
    sigma = np.ascontiguousarray(sigma, dtype=np.float64)
    if sigma.shape != (H.shape[1],):
        raise ContractError("sigma length must match displacement dim")
    if grid_points < 2:
        raise ContractError("grid_points must be >= 2")

    if sigma.max() == sigma.min():
        scale = np.sqrt(sigma[0])
        out = kernels.project_displacements(H, radius / scale, radius * ratio / scale)
        s = np.sqrt((H * H).sum(axis=1)) * scale
        active = np.zeros(H.shape[0], dtype=np.int8)
        active[s < radius] = kernels.ACTIVE_INNER
        active[s > radius * ratio] = kernels.ACTIVE_OUTER
        active[s == 0.0] = kernels.ROW_ZERO
        mult = np.full(H.shape[0], np.nan)
        # closed form corresponds to a multiplier with 1 + tau*sigma = s/boundary
        inner_rows = active == kernels.ACTIVE_INNER
        outer_rows = active == kernels.ACTIVE_OUTER
        mult[inner_rows] = (s[inner_rows] / radius - 1.0) / sigma[0]
        mult[outer_rows] = sigma[0] / (s[outer_rows] / (radius * ratio) - 1.0)
    else:
        out, active, mult = kernels.mahalanobis_project(
            H, sigma, radius, radius * ratio, grid_points
        )

    zero = active == kernels.ROW_ZERO
    if zero.any():
        dirs = _fallback_directions(int(zero.sum()), H.shape[1], rng)
        norms = np.sqrt((sigma * dirs * dirs).sum(axis=1))
        out[zero] = dirs * (radius / norms)[:, None]
        active = active.copy()
        active[zero] = kernels.ACTIVE_INNER
        mult[zero] = np.nan
    return out, active, mult


def project_mahalanobis(
    z, ann: MahalanobisAnnulus, grid_points: int = 256, rng=None
) -> ProjectionResult:
    """Nearest point of the diagonal-Mahalanobis annulus around ann.center."""
    z = np.asarray(z, dtype=np.float64)
    if z.shape != ann.center.shape:
        raise ContractError("z and annulus center must have the same length")
    H = (z - ann.center)[None, :]
    out, active, mult = project_mahalanobis_displacements(
        H, ann.sigma, ann.radius, ann.ratio, grid_points=grid_points, rng=rng
    )
    m = float(mult[0])
    return ProjectionResult(
        ann.center + out[0],
        _ACTIVE_NAMES[int(active[0])],
        None if np.isnan(m) else m,
    )


def sample_annulus_displacements(n: int, d: int, radius: float, ratio: float, rng) -> np.ndarray:
    """Displacements distributed uniformly over the annulus volume.

    Direction is uniform on the sphere; the radius CDF is
    (rho^d - r^d) / ((ratio*r)^d - r^d), inverted in log space so large d
    cannot overflow.
    """
    dirs = _fallback_directions(n, d, rng)
    u = rng.random(n)
    if ratio == 1.0:
        radii = np.full(n, radius)
    else:
        # rho = r * (1 + u*(ratio^d - 1))^(1/d)
        radii = radius * np.exp(np.log1p(u * np.expm1(d * np.log(ratio))) / d)
    return dirs * radii[:, None]


def sample_uniform_annulus(ann: EuclideanAnnulus, rng) -> np.ndarray:
    """One point uniform over the annulus volume around ann.center."""
    return ann.center + sample_annulus_displacements(
        1, ann.center.shape[0], ann.radius, ann.ratio, rng
    )[0]
