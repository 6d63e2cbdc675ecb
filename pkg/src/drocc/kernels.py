"""Hot numeric kernels: batch annulus projections and brute-force distances.

Each kernel has two implementations with identical semantics:

* a loop form compiled with ``numba.njit`` (row-parallel where safe), and
* a vectorized pure-NumPy fallback.

``drocc._backend`` picks one at import time (``DROCC_BACKEND`` env var).
The public names (``project_displacements``, ``mahalanobis_project``,
``min_distances``) always point at the selected implementation; the
``*_numpy`` / ``*_numba`` variants stay importable for benchmarking.

Conventions: displacements are rows of ``H`` relative to the annulus
center; ``sigma`` is the shared per-coordinate weight vector of the
diagonal metric ``|v|_S^2 = sum_j sigma_j v_j^2``. Zero-norm rows are
left untouched (the callers substitute a seeded fallback direction).
"""

import numpy as np

from ._backend import NUMBA_ENABLED, njit, prange

# Relative margin excluding the singular endpoint of the inner-multiplier
# interval, and the bottom of the outer-multiplier grid.
GRID_MARGIN = 1e-9
_BISECT_ITERS = 80

# Row status codes shared by both implementations.
ACTIVE_NONE = 0
ACTIVE_INNER = 1
ACTIVE_OUTER = 2
ROW_ZERO = -1  # zero displacement; caller must substitute a direction


# ---------------------------------------------------------------------------
# Euclidean annulus projection of displacement rows
# ---------------------------------------------------------------------------

def _project_displacements_loop(H, inner, outer):
    out = np.empty_like(H)
    n, d = H.shape
    for i in prange(n):
        s = 0.0
        for j in range(d):
            s += H[i, j] * H[i, j]
        nrm = np.sqrt(s)
        if nrm == 0.0:
            for j in range(d):
                out[i, j] = 0.0
            continue
        if nrm <= inner:
            target = inner
        elif nrm >= outer:
            target = outer
        else:
            target = nrm
        scale = target / nrm
        for j in range(d):
            out[i, j] = H[i, j] * scale
    return out


def project_displacements_numpy(H, inner, outer):
    """Scale each row to norm in [inner, outer]; zero rows stay zero."""
    nrm = np.sqrt((H * H).sum(axis=1))
    target = np.clip(nrm, inner, outer)
    scale = np.ones_like(nrm)
    nz = nrm > 0.0
    scale[nz] = target[nz] / nrm[nz]
    return H * scale[:, None]


# ---------------------------------------------------------------------------
# Diagonal-Mahalanobis annulus projection of displacement rows
# ---------------------------------------------------------------------------
#
# Per row (delta = H[i], metric norm s):
#   band   (inner <= s <= outer): unchanged.
#   inside (s < inner): candidates delta / (1 + tau*sigma) with multiplier
#       tau in [-1/max(sigma), 0]; the squared metric norm grows
#       monotonically toward the singular endpoint, so the optimum sits on
#       the inner boundary. A log-dense grid over the interval brackets the
#       boundary crossing and bisection polishes it.
#   outside (s > outer): candidates scaled by nu / (nu + sigma) with
#       nu in (0, a/(1-a)*max(sigma)], a = outer/s; symmetric treatment.
#   If no grid candidate is feasible (extreme sigma spread), the row is
#   rescaled radially onto the violated boundary and carries no multiplier.


def _mahalanobis_project_loop(H, sigma, inner, outer, grid_points):
    n, d = H.shape
    out = H.copy()
    active = np.zeros(n, dtype=np.int8)
    mult = np.full(n, np.nan)
    smax = sigma.max()
    inner2 = inner * inner
    outer2 = outer * outer
    logm = np.log(GRID_MARGIN)

    for i in prange(n):
        s2 = 0.0
        for j in range(d):
            s2 += sigma[j] * H[i, j] * H[i, j]
        if s2 == 0.0:
            active[i] = ROW_ZERO
            continue
        if inner2 <= s2 <= outer2:
            continue

        if s2 < inner2:
            # u = 1 + tau*smax in [margin, 1]; feasibility grows as u -> margin
            k_star = -1
            u_lo = 0.0
            u_hi = 0.0
            for k in range(grid_points - 1, -1, -1):
                u = np.exp(logm * (1.0 - k / (grid_points - 1.0)))
                tau = (u - 1.0) / smax
                f = 0.0
                for j in range(d):
                    c = 1.0 + tau * sigma[j]
                    f += sigma[j] * H[i, j] * H[i, j] / (c * c)
                if f >= inner2:
                    k_star = k
                    u_lo = u
                    u_hi = np.exp(logm * (1.0 - (k + 1) / (grid_points - 1.0)))
                    break
            if k_star < 0:
                scale = inner / np.sqrt(s2)
                for j in range(d):
                    out[i, j] = H[i, j] * scale
                active[i] = ACTIVE_INNER
                continue
            for _ in range(_BISECT_ITERS):
                u_mid = 0.5 * (u_lo + u_hi)
                tau = (u_mid - 1.0) / smax
                f = 0.0
                for j in range(d):
                    c = 1.0 + tau * sigma[j]
                    f += sigma[j] * H[i, j] * H[i, j] / (c * c)
                if f >= inner2:
                    u_lo = u_mid
                else:
                    u_hi = u_mid
            tau = (u_lo - 1.0) / smax
            for j in range(d):
                out[i, j] = H[i, j] / (1.0 + tau * sigma[j])
            active[i] = ACTIVE_INNER
            mult[i] = tau
        else:
            s = np.sqrt(s2)
            a = outer / s
            nu_max = smax * a / (1.0 - a)
            # feasibility shrinks as nu grows; search top-down for the
            # largest feasible grid point
            k_star = -1
            nu_lo = 0.0
            nu_hi = 0.0
            for k in range(grid_points - 1, -1, -1):
                nu = nu_max * np.exp(logm * (1.0 - k / (grid_points - 1.0)))
                f = 0.0
                for j in range(d):
                    c = nu / (nu + sigma[j])
                    f += sigma[j] * H[i, j] * H[i, j] * c * c
                if f <= outer2:
                    k_star = k
                    nu_lo = nu
                    break
                nu_hi = nu
            if k_star < 0:
                scale = outer / s
                for j in range(d):
                    out[i, j] = H[i, j] * scale
                active[i] = ACTIVE_OUTER
                continue
            if k_star < grid_points - 1:
                for _ in range(_BISECT_ITERS):
                    nu_mid = 0.5 * (nu_lo + nu_hi)
                    f = 0.0
                    for j in range(d):
                        c = nu_mid / (nu_mid + sigma[j])
                        f += sigma[j] * H[i, j] * H[i, j] * c * c
                    if f <= outer2:
                        nu_lo = nu_mid
                    else:
                        nu_hi = nu_mid
            nu = nu_lo
            for j in range(d):
                out[i, j] = H[i, j] * nu / (nu + sigma[j])
            active[i] = ACTIVE_OUTER
            mult[i] = nu
    return out, active, mult


def mahalanobis_project_numpy(H, sigma, inner, outer, grid_points):
    """Vectorized twin of the loop kernel; same outputs."""
    n, d = H.shape
    out = H.copy()
    active = np.zeros(n, dtype=np.int8)
    mult = np.full(n, np.nan)
    smax = sigma.max()
    inner2 = inner * inner
    outer2 = outer * outer
    # ascending grid in u-space: margin (singular end) ... 1
    ugrid = np.exp(np.log(GRID_MARGIN) * (1.0 - np.arange(grid_points) / (grid_points - 1.0)))

    w2 = H * H * sigma
    s2 = w2.sum(axis=1)
    zero = s2 == 0.0
    active[zero] = ROW_ZERO
    ins = (s2 < inner2) & ~zero
    outs = s2 > outer2

    if ins.any():
        w2i = w2[ins]
        taus = (ugrid - 1.0) / smax
        denom2 = (1.0 + np.outer(taus, sigma)) ** 2  # (K, d)
        feas = w2i @ (1.0 / denom2).T  # (B, K)
        ok = feas >= inner2
        has = ok.any(axis=1)
        # largest feasible u (closest to tau = 0)
        k_star = grid_points - 1 - np.argmax(ok[:, ::-1], axis=1)

        idx = np.where(ins)[0]
        fb = idx[~has]
        if fb.size:
            out[fb] = H[fb] * (inner / np.sqrt(s2[fb]))[:, None]
            active[fb] = ACTIVE_INNER

        good = idx[has]
        if good.size:
            ks = k_star[has]
            u_lo = ugrid[ks]
            u_hi = ugrid[ks + 1]
            wg = w2[good]
            for _ in range(_BISECT_ITERS):
                u_mid = 0.5 * (u_lo + u_hi)
                tau = (u_mid - 1.0) / smax
                f = (wg / (1.0 + tau[:, None] * sigma) ** 2).sum(axis=1)
                feasible = f >= inner2
                u_lo = np.where(feasible, u_mid, u_lo)
                u_hi = np.where(feasible, u_hi, u_mid)
            tau = (u_lo - 1.0) / smax
            out[good] = H[good] / (1.0 + tau[:, None] * sigma)
            active[good] = ACTIVE_INNER
            mult[good] = tau

    if outs.any():
        idx = np.where(outs)[0]
        s = np.sqrt(s2[idx])
        a = outer / s
        nu_max = smax * a / (1.0 - a)
        nus = nu_max[:, None] * ugrid  # (B, K) ascending
        w2o = w2[idx]
        frac = nus[:, :, None] / (nus[:, :, None] + sigma)
        feas = (w2o[:, None, :] * frac * frac).sum(axis=2)  # (B, K)
        ok = feas <= outer2
        has = ok.any(axis=1)
        k_star = grid_points - 1 - np.argmax(ok[:, ::-1], axis=1)

        fb = idx[~has]
        if fb.size:
            out[fb] = H[fb] * (outer / np.sqrt(s2[fb]))[:, None]
            active[fb] = ACTIVE_OUTER

        good = idx[has]
        if good.size:
            ks = k_star[has]
            # top rows are feasible at nu_max itself; degenerate bracket
            nu_lo = np.take_along_axis(nus[has], ks[:, None], axis=1)[:, 0]
            nu_hi = np.take_along_axis(
                nus[has], np.minimum(ks + 1, grid_points - 1)[:, None], axis=1
            )[:, 0]
            wg = w2[good]
            for _ in range(_BISECT_ITERS):
                nu_mid = 0.5 * (nu_lo + nu_hi)
                fr = nu_mid[:, None] / (nu_mid[:, None] + sigma)
                f = (wg * fr * fr).sum(axis=1)
                feasible = f <= outer2
                nu_lo = np.where(feasible, nu_mid, nu_lo)
                nu_hi = np.where(feasible, nu_hi, nu_mid)
            nu = nu_lo
            out[good] = H[good] * (nu[:, None] / (nu[:, None] + sigma))
            active[good] = ACTIVE_OUTER
            mult[good] = nu

    return out, active, mult


# ---------------------------------------------------------------------------
# Brute-force nearest-neighbor distances
# ---------------------------------------------------------------------------

def _min_distances_loop(train, X):
    n, d = X.shape
    m = train.shape[0]
    out = np.empty(n)
    for i in prange(n):
        best = np.inf
        for k in range(m):
            s = 0.0
            for j in range(d):
                diff = X[i, j] - train[k, j]
                s += diff * diff
            if s < best:
                best = s
        out[i] = np.sqrt(best)
    return out


def min_distances_numpy(train, X, chunk=512):
    """Exact min Euclidean distance from each row of X to the train set."""
    out = np.empty(X.shape[0])
    for i in range(0, X.shape[0], chunk):
        block = X[i : i + chunk]
        d2 = ((block[:, None, :] - train[None, :, :]) ** 2).sum(axis=2)
        out[i : i + chunk] = np.sqrt(d2.min(axis=1))
    return out


# ---------------------------------------------------------------------------
# backend selection
# ---------------------------------------------------------------------------

if NUMBA_ENABLED:
    project_displacements_numba = njit(cache=True, parallel=True)(_project_displacements_loop)
    mahalanobis_project_numba = njit(cache=True, parallel=True)(_mahalanobis_project_loop)
    min_distances_numba = njit(cache=True, parallel=True)(_min_distances_loop)

    project_displacements = project_displacements_numba
    mahalanobis_project = mahalanobis_project_numba
    min_distances = min_distances_numba
else:  # pragma: no cover - exercised via DROCC_BACKEND=numpy runs
    project_displacements_numba = None
    mahalanobis_project_numba = None
    min_distances_numba = None

    project_displacements = project_displacements_numpy
    mahalanobis_project = mahalanobis_project_numpy

    def min_distances(train, X):
        return min_distances_numpy(train, X)
