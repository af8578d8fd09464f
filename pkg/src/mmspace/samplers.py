"""Synthetic point-cloud generators with deterministic, tagged RNG streams.

Every stream is a pure function of (seed, tag...), so a generator draws the
same points no matter what else ran before it, and mixture component picks
do not perturb the normal draws (a one-component mixture at center 0, scale 1
is bitwise the gaussian generator).
"""
from __future__ import annotations

import hashlib
import math

import numpy as np

from .cloud import PointCloud
from .errors import InvalidArgumentError

GENERATORS = ("interval", "circle", "torus", "gaussian", "mixture")


def _tag_int(tag) -> int:
    digest = hashlib.blake2b(str(tag).encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def stream(seed: int, *tags) -> np.random.Generator:
    """Deterministic generator for (seed, tags); independent across tags."""
    entropy = [int(seed) & 0xFFFFFFFFFFFFFFFF] + [_tag_int(t) for t in tags]
    return np.random.default_rng(np.random.SeedSequence(entropy))


def derived_seed(seed: int, *tags) -> int:
    """Collapse (seed, tags) into a single integer seed for APIs that take one."""
    payload = ",".join([str(int(seed))] + [str(t) for t in tags])
    digest = hashlib.blake2b(payload.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def sample(generator: str, n: int, seed: int, **params) -> PointCloud:
    """Draw n points from a named distribution.

    interval: uniform on [0, 1], one-dimensional.
    circle:   uniform on the unit circle, embedded in R^2.
    torus:    uniform on the flat torus, embedded in R^4 as a product of
              two unit circles.
    gaussian: standard isotropic normal in ``dim`` dimensions (default 1).
    mixture:  equal-weight isotropic Gaussian mixture with given ``centers``
              (list of points) and ``scales`` (scalar or per-component).
    """
    if n < 1:
        raise InvalidArgumentError("n must be >= 1")
    if generator == "interval":
        x = stream(seed, "interval").random(n)
        return PointCloud(x[:, None], 1)
    if generator == "circle":
        theta = stream(seed, "circle").random(n) * 2.0 * math.pi
        return PointCloud(np.stack([np.cos(theta), np.sin(theta)], axis=1), 1)
    if generator == "torus":
        rng = stream(seed, "torus")
        theta = rng.random(n) * 2.0 * math.pi
        phi = rng.random(n) * 2.0 * math.pi
        pts = np.stack([np.cos(theta), np.sin(theta), np.cos(phi), np.sin(phi)], axis=1)
        return PointCloud(pts, 2)
    if generator == "gaussian":
        dim = int(params.get("dim", 1))
        if dim < 1:
            raise InvalidArgumentError("dim must be >= 1")
        z = stream(seed, "normal").standard_normal((n, dim))
        return PointCloud(z, dim)
    if generator == "mixture":
        centers = np.asarray(params.get("centers"), dtype=np.float64)
        if centers.ndim == 0 or centers.size == 0:
            raise InvalidArgumentError("mixture needs a nonempty centers list")
        if centers.ndim == 1:
            centers = centers[:, None]
        m, dim = centers.shape
        scales = np.asarray(params.get("scales", 1.0), dtype=np.float64)
        if scales.ndim == 0:
            scales = np.full(m, float(scales))
        if scales.shape != (m,) or scales.min() <= 0:
            raise InvalidArgumentError("scales must be positive, one per component")
        comp = stream(seed, "component").integers(0, m, size=n)
        z = stream(seed, "normal").standard_normal((n, dim))
        pts = centers[comp] + scales[comp][:, None] * z
        return PointCloud(pts, dim)
    raise InvalidArgumentError(
        f"unknown generator {generator!r}; expected one of {GENERATORS}"
    )


# ----------------------------------------------------------------------------
# closed-form reference geometry per generator
# ----------------------------------------------------------------------------


def _torus_angles(points: np.ndarray) -> np.ndarray:
    return np.stack(
        [np.arctan2(points[:, 1], points[:, 0]), np.arctan2(points[:, 3], points[:, 2])],
        axis=1,
    )


def _circular_diff(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    d = np.abs(a - b)
    return np.minimum(d, 2.0 * math.pi - d)


def true_distance_matrix(generator: str, cloud: PointCloud) -> np.ndarray:
    """Closed-form geodesic distances between sample points, where known.

    interval, gaussian, mixture live in convex Euclidean space, so geodesics
    are straight lines; circle and torus use arc length on the embedded
    angles.
    """
    pts = cloud.points
    if generator in ("interval", "gaussian", "mixture"):
        from .cloud import euclidean_matrix

        return euclidean_matrix(cloud)
    if generator == "circle":
        theta = np.arctan2(pts[:, 1], pts[:, 0])
        d = _circular_diff(theta[:, None], theta[None, :])
        np.fill_diagonal(d, 0.0)
        return np.minimum(d, d.T)
    if generator == "torus":
        ang = _torus_angles(pts)
        d1 = _circular_diff(ang[:, 0][:, None], ang[:, 0][None, :])
        d2 = _circular_diff(ang[:, 1][:, None], ang[:, 1][None, :])
        d = np.sqrt(d1 * d1 + d2 * d2)
        np.fill_diagonal(d, 0.0)
        return np.minimum(d, d.T)
    raise InvalidArgumentError(f"no closed-form geometry for generator {generator!r}")


def covering_radius(generator: str, cloud: PointCloud, grid_size: int = 2048) -> float:
    """Covering radius of the sample inside its generator's space.

    Exact for the circle (half the largest angular gap); grid-approximated
    for the interval and torus.  Undefined for unbounded generators.
    """
    pts = cloud.points
    if generator == "interval":
        grid = np.linspace(0.0, 1.0, grid_size)
        return float(np.abs(grid[:, None] - pts[:, 0][None, :]).min(axis=1).max())
    if generator == "circle":
        theta = np.sort(np.mod(np.arctan2(pts[:, 1], pts[:, 0]), 2.0 * math.pi))
        gaps = np.diff(theta, append=theta[0] + 2.0 * math.pi)
        return float(gaps.max() / 2.0)
    if generator == "torus":
        ang = _torus_angles(pts)
        side = int(math.sqrt(grid_size))
        g = np.linspace(0.0, 2.0 * math.pi, side, endpoint=False)
        gt, gp = np.meshgrid(g, g, indexing="ij")
        grid = np.stack([gt.ravel(), gp.ravel()], axis=1)
        d1 = _circular_diff(grid[:, 0][:, None], ang[:, 0][None, :])
        d2 = _circular_diff(grid[:, 1][:, None], ang[:, 1][None, :])
        return float(np.sqrt(d1 * d1 + d2 * d2).min(axis=1).max())
    raise InvalidArgumentError(f"no covering radius for generator {generator!r}")


def isometry_defect(d_n: np.ndarray, d_true: np.ndarray, covering_eval=None):
    """(sup entrywise metric defect, covering radius).

    covering_eval may be a float or a zero-argument callable; None leaves the
    covering radius unreported.
    """
    a = np.asarray(d_n, dtype=np.float64)
    b = np.asarray(d_true, dtype=np.float64)
    if a.shape != b.shape:
        raise InvalidArgumentError("matrices must share a shape")
    defect = float(np.abs(a - b).max()) if a.size else 0.0
    if covering_eval is None:
        radius = None
    elif callable(covering_eval):
        radius = float(covering_eval())
    else:
        radius = float(covering_eval)
    return defect, radius
