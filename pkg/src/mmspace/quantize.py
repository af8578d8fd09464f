"""Vector quantization of empirical measures and epsilon-net graph metrics.

quantize runs weighted Lloyd iterations with restarts: assign each sample to
its nearest center, recenter each cell to minimize the cell's p-power cost,
repeat until the centers stop moving.  The reported objective is the
p-Wasserstein cost of collapsing the sample measure onto the centers.

epsilon_net_graph builds the shortest-path metric on an eps-net of a space
and reports whether the net is fine enough (measured net radius below
eps^2 / (4 diam)) for the graph metric to track the underlying geodesics.

density_compensation turns sampled density values into the reweighting that
undoes the density dependence of quantizer placement.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components, floyd_warshall
from scipy.spatial.distance import cdist

from .errors import DisconnectedGraphError, InvalidArgumentError


@dataclass
class QuantizeResult:
    """Centers (sorted lexicographically), their absorbed mass, and the cost.

    histories[r] is the per-iteration objective trace of restart r; each trace
    is nonincreasing, which is the Lloyd invariant worth asserting.
    """

    centers: np.ndarray
    masses: np.ndarray
    objective: float
    histories: list


def _as_samples(samples) -> np.ndarray:
    pts = np.asarray(samples, dtype=np.float64)
    if pts.ndim == 1:
        pts = pts[:, None]
    if pts.ndim != 2 or pts.shape[0] < 1:
        raise InvalidArgumentError("samples must be a nonempty (n, D) array")
    if not np.all(np.isfinite(pts)):
        raise InvalidArgumentError("samples must be finite")
    return pts


def _cell_center(points: np.ndarray, w: np.ndarray, p: float, start: np.ndarray) -> np.ndarray:
    """Minimize sum w |x - c|^p over c for one cell; exact mean when p = 2."""
    if p == 2.0:
        return (w[:, None] * points).sum(axis=0) / w.sum()

    def cost(c):
        return float(np.dot(w, np.linalg.norm(points - c[None, :], axis=1) ** p))

    res = minimize(cost, start, method="Nelder-Mead", options={"xatol": 1e-10, "fatol": 1e-12})
    # keep the update only if it actually improves, preserving monotonicity
    return res.x if res.fun <= cost(start) else start


def quantize(
    samples,
    n_centers: int,
    p: float = 2.0,
    restarts: int = 10,
    seed: int = 0,
    weights=None,
    max_iter: int = 200,
) -> QuantizeResult:
    """Weighted Lloyd quantization with restarts; deterministic per seed.

    weights are sample masses (normalized internally; uniform by default).
    When n_centers >= the sample count, the samples themselves are the optimal
    centers at objective zero.
    """
    pts = _as_samples(samples)
    n, dim = pts.shape
    p = float(p)
    if not (p >= 1.0 and math.isfinite(p)):
        raise InvalidArgumentError(f"p must be >= 1, got {p!r}")
    if n_centers < 1:
        raise InvalidArgumentError("n_centers must be >= 1")
    if restarts < 1:
        raise InvalidArgumentError("restarts must be >= 1")
    if weights is None:
        w = np.full(n, 1.0 / n)
    else:
        w = np.asarray(weights, dtype=np.float64)
        if w.shape != (n,) or w.min() < 0 or w.sum() <= 0:
            raise InvalidArgumentError("weights must be nonnegative with positive sum")
        w = w / w.sum()

    if n_centers >= n:
        return QuantizeResult(centers=pts.copy(), masses=w.copy(), objective=0.0, histories=[])

    best_cost = math.inf
    best_centers = None
    histories = []
    for r in range(restarts):
        rng = np.random.default_rng([seed & 0xFFFFFFFF, r])
        centers = pts[rng.choice(n, size=n_centers, replace=False)].copy()
        trace = []
        for _ in range(max_iter):
            dist = cdist(pts, centers)
            assign = np.argmin(dist, axis=1)
            powcost = float(np.dot(w, dist[np.arange(n), assign] ** p))
            trace.append(powcost ** (1.0 / p))
            moved = 0.0
            for c in range(n_centers):
                mask = assign == c
                if not np.any(mask):
                    continue
                new = _cell_center(pts[mask], w[mask], p, centers[c])
                moved = max(moved, float(np.linalg.norm(new - centers[c])))
                centers[c] = new
            if moved <= 1e-12:
                break
        dist = cdist(pts, centers)
        assign = np.argmin(dist, axis=1)
        powcost = float(np.dot(w, dist[np.arange(n), assign] ** p))
        trace.append(powcost ** (1.0 / p))
        histories.append(trace)
        if powcost < best_cost:
            best_cost = powcost
            best_centers = centers.copy()

    order = np.lexsort(best_centers.T[::-1])
    centers = best_centers[order]
    dist = cdist(pts, centers)
    assign = np.argmin(dist, axis=1)
    masses = np.zeros(n_centers)
    np.add.at(masses, assign, w)
    return QuantizeResult(
        centers=centers,
        masses=masses,
        objective=best_cost ** (1.0 / p),
        histories=histories,
    )


def grid_measure_1d(rho, a: float, b: float, grid_size: int = 4001):
    """Discretize a 1-D density on [a, b] into grid points and masses."""
    if not (a < b):
        raise InvalidArgumentError("need a < b")
    if grid_size < 2:
        raise InvalidArgumentError("grid_size must be >= 2")
    x = np.linspace(a, b, grid_size)
    dens = np.asarray([float(rho(v)) for v in x])
    if dens.min() < 0:
        raise InvalidArgumentError("density must be nonnegative")
    total = dens.sum()
    if total <= 0:
        raise InvalidArgumentError("density must have positive mass on [a, b]")
    return x, dens / total


def quantize_density_1d(
    rho,
    a: float,
    b: float,
    n_centers: int,
    p: float = 2.0,
    restarts: int = 10,
    seed: int = 0,
    grid_size: int = 4001,
) -> QuantizeResult:
    """Quantize a 1-D density by quantizing its grid discretization."""
    x, w = grid_measure_1d(rho, a, b, grid_size)
    return quantize(x, n_centers, p=p, restarts=restarts, seed=seed, weights=w)


# ----------------------------------------------------------------------------
# eps-net graphs
# ----------------------------------------------------------------------------


@dataclass
class NetGraphResult:
    """Graph metric on the net plus the admissibility verdict.

    admissible is None when the net radius cannot be measured (no closed-form
    ambient geometry and no net_radius supplied); the graph metric is still
    valid, only the fineness guarantee is unknown.
    """

    dist: np.ndarray
    admissible: bool | None
    net_radius: float | None
    threshold: float


def _circle_angles(net_points: np.ndarray) -> np.ndarray:
    pts = np.asarray(net_points, dtype=np.float64)
    if pts.ndim == 1:
        return np.mod(pts, 2.0 * math.pi)
    if pts.ndim == 2 and pts.shape[1] == 2:
        return np.mod(np.arctan2(pts[:, 1], pts[:, 0]), 2.0 * math.pi)
    raise InvalidArgumentError("circle net points must be angles or (n, 2) coordinates")


def _circle_metric(angles: np.ndarray) -> np.ndarray:
    diff = np.abs(angles[:, None] - angles[None, :])
    d = np.minimum(diff, 2.0 * math.pi - diff)
    np.fill_diagonal(d, 0.0)
    return np.minimum(d, d.T)


def circle_arc_metric(net_points) -> np.ndarray:
    """Geodesic arc distances between points on the unit circle.

    Accepts angles or (n, 2) coordinates, like the circle branch of
    epsilon_net_graph.
    """
    return _circle_metric(_circle_angles(np.asarray(net_points)))


def _circle_net_radius(angles: np.ndarray) -> float:
    """Covering radius of points on the circle: half the largest angular gap."""
    s = np.sort(angles)
    gaps = np.diff(s, append=s[0] + 2.0 * math.pi)
    return float(gaps.max() / 2.0)


def epsilon_net_graph(
    net_points,
    ambient_metric,
    eps: float,
    diam: float,
    net_radius: float | None = None,
) -> NetGraphResult:
    """Shortest-path metric over edges strictly shorter than eps.

    ambient_metric is "euclidean", "circle" (points as angles or unit-circle
    coordinates, geodesic arc distances), or an explicit distance matrix.  The
    admissibility condition is net_radius < eps^2 / (4 diam); the radius is
    measured exactly for the circle and must be supplied otherwise.  Raises
    DisconnectedGraphError when eps fails to connect the net.
    """
    if not (eps > 0 and math.isfinite(eps)):
        raise InvalidArgumentError(f"eps must be positive, got {eps!r}")
    if not (diam > 0 and math.isfinite(diam)):
        raise InvalidArgumentError(f"diam must be positive, got {diam!r}")
    if isinstance(ambient_metric, str):
        if ambient_metric == "euclidean":
            pts = np.asarray(net_points, dtype=np.float64)
            if pts.ndim == 1:
                pts = pts[:, None]
            amb = cdist(pts, pts)
            np.fill_diagonal(amb, 0.0)
        elif ambient_metric == "circle":
            angles = _circle_angles(np.asarray(net_points))
            amb = _circle_metric(angles)
            if net_radius is None:
                net_radius = _circle_net_radius(angles)
        else:
            raise InvalidArgumentError(
                f"ambient_metric must be 'euclidean', 'circle', or a matrix, got {ambient_metric!r}"
            )
    else:
        amb = np.asarray(ambient_metric, dtype=np.float64)
        if amb.ndim != 2 or amb.shape[0] != amb.shape[1]:
            raise InvalidArgumentError("ambient metric matrix must be square")
    n = amb.shape[0]
    if n < 1:
        raise InvalidArgumentError("net must be nonempty")

    adj = amb < eps
    np.fill_diagonal(adj, False)
    if n > 1:
        ncomp, labels = connected_components(csr_matrix(adj), directed=False)
        if ncomp > 1:
            comps = [sorted(int(i) for i in np.flatnonzero(labels == c)) for c in range(ncomp)]
            raise DisconnectedGraphError(
                f"eps={eps} does not connect the net ({ncomp} components)", comps
            )
    w = np.where(adj, amb, np.inf)
    np.fill_diagonal(w, 0.0)
    dist = floyd_warshall(w)

    threshold = eps * eps / (4.0 * diam)
    admissible = None if net_radius is None else bool(net_radius < threshold)
    return NetGraphResult(dist=dist, admissible=admissible, net_radius=net_radius, threshold=threshold)


def equispaced_circle_net(m: int) -> np.ndarray:
    """m equispaced points on the unit circle, as (m, 2) coordinates."""
    if m < 1:
        raise InvalidArgumentError("m must be >= 1")
    theta = 2.0 * math.pi * np.arange(m) / m
    return np.stack([np.cos(theta), np.sin(theta)], axis=1)


def density_compensation(rho_values, p: float, intrinsic_dim: int) -> np.ndarray:
    """Weights proportional to rho^(-(p + dim)/dim), normalized to sum to one.

    This is the reweighting under which quantizer centers of a density-biased
    sample behave like centers of the uniform measure.  Scale-invariant in rho
    up to roundoff.
    """
    rho = np.asarray(rho_values, dtype=np.float64)
    if rho.ndim != 1 or rho.size == 0:
        raise InvalidArgumentError("rho_values must be a nonempty vector")
    if rho.min() <= 0 or not np.all(np.isfinite(rho)):
        raise InvalidArgumentError("density values must be positive and finite")
    p = float(p)
    if not (p >= 1.0 and math.isfinite(p)):
        raise InvalidArgumentError(f"p must be >= 1, got {p!r}")
    if intrinsic_dim < 1:
        raise InvalidArgumentError("intrinsic_dim must be >= 1")
    w = rho ** (-(p + intrinsic_dim) / intrinsic_dim)
    return w / w.sum()
