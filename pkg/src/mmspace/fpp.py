"""First-passage percolation on the integer lattice with hashed edge weights.

Edge weights are never stored: the weight of the edge from u to u + e_axis is
a pure function of (instance seed, u, axis), obtained by hashing those
integers into (0, 1) and applying the law's inverse CDF.  That makes weight
queries deterministic across processes and thread counts, and lets balls grow
lazily with Dijkstra instead of materializing a box of the lattice.

The scaled ball B(t)/t with metric T/t and uniform weights is the finite
metric measure space whose limit is the time-constant norm ball; barycenter
tracking and shape defects quantify that convergence.
"""
from __future__ import annotations

import hashlib
import heapq
import math
import struct
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import dijkstra
from scipy.spatial import cKDTree
from scipy.spatial.distance import cdist

from .errors import (
    BudgetExceededError,
    InvalidArgumentError,
    SolverError,
    UnsupportedReferenceError,
)
from .space import FiniteMetricMeasureSpace, k_means_exact

DEFAULT_BALL_BUDGET = 4000
DEFAULT_SHELL = 0.2


@dataclass(frozen=True)
class EdgeWeightLaw:
    """Distribution of a single edge weight; strictly positive almost surely."""

    kind: str
    params: tuple

    @classmethod
    def deterministic(cls, c: float) -> "EdgeWeightLaw":
        if not (c > 0 and math.isfinite(c)):
            raise InvalidArgumentError(f"deterministic weight must be positive, got {c!r}")
        return cls("deterministic", (float(c),))

    @classmethod
    def exponential(cls, rate: float) -> "EdgeWeightLaw":
        if not (rate > 0 and math.isfinite(rate)):
            raise InvalidArgumentError(f"rate must be positive, got {rate!r}")
        return cls("exponential", (float(rate),))

    @classmethod
    def uniform(cls, a: float, b: float) -> "EdgeWeightLaw":
        if not (0 <= a < b and math.isfinite(b)):
            raise InvalidArgumentError(f"uniform law needs 0 <= a < b, got ({a!r}, {b!r})")
        return cls("uniform", (float(a), float(b)))

    @classmethod
    def parse(cls, text: str) -> "EdgeWeightLaw":
        """Parse 'det:c', 'exp:rate', or 'unif:a,b' (long names accepted)."""
        name, _, arg = text.partition(":")
        name = name.strip().lower()
        try:
            vals = [float(v) for v in arg.split(",")] if arg else []
        except ValueError:
            raise InvalidArgumentError(f"bad law parameters in {text!r}")
        if name in ("det", "deterministic") and len(vals) == 1:
            return cls.deterministic(vals[0])
        if name in ("exp", "exponential") and len(vals) == 1:
            return cls.exponential(vals[0])
        if name in ("unif", "uniform") and len(vals) == 2:
            return cls.uniform(vals[0], vals[1])
        raise InvalidArgumentError(
            f"cannot parse law {text!r}; expected det:c, exp:rate, or unif:a,b"
        )

    def quantile(self, u: float) -> float:
        if self.kind == "deterministic":
            return self.params[0]
        if self.kind == "exponential":
            return -math.log1p(-u) / self.params[0]
        a, b = self.params
        return a + (b - a) * u

    def describe(self) -> str:
        return f"{self.kind}({', '.join(repr(v) for v in self.params)})"


@dataclass(frozen=True)
class FppInstance:
    """Lattice dimension, edge-weight law, hash seed, and queryable horizon."""

    dim: int
    law: EdgeWeightLaw
    seed: int
    horizon: float

    def __post_init__(self):
        if self.dim not in (1, 2, 3):
            raise InvalidArgumentError(f"dim must be 1, 2, or 3, got {self.dim}")
        if not (self.horizon > 0 and math.isfinite(self.horizon)):
            raise InvalidArgumentError(f"horizon must be positive, got {self.horizon!r}")

    def edge_weight(self, base, axis: int) -> float:
        """Weight of the edge from base to base + e_axis (base is the lower end)."""
        if not 0 <= axis < self.dim:
            raise InvalidArgumentError(f"axis must be in [0, {self.dim}), got {axis}")
        payload = struct.pack(
            f"<qq{self.dim}q", int(self.seed), int(axis), *(int(c) for c in base)
        )
        digest = hashlib.blake2b(payload, digest_size=8).digest()
        u = (int.from_bytes(digest, "little") + 0.5) / 2.0**64
        return self.law.quantile(u)

    def _neighbor_edges(self, u):
        """(neighbor, weight) for all 2*dim lattice neighbors of u."""
        out = []
        for axis in range(self.dim):
            for sign in (1, -1):
                v = list(u)
                v[axis] += sign
                v = tuple(v)
                base = u if sign == 1 else v
                out.append((v, self.edge_weight(base, axis)))
        return out


def passage_time_ball(instance: FppInstance, t: float) -> dict:
    """Vertices with passage time from the origin strictly below t, with times.

    Grows Dijkstra from the origin until every frontier value is >= t, so the
    returned dict is exactly B(t) = {y : T(0, y) < t}.
    """
    if not (0 < t <= instance.horizon):
        raise InvalidArgumentError(
            f"t must lie in (0, horizon={instance.horizon}], got {t!r}"
        )
    origin = (0,) * instance.dim
    settled: dict = {}
    best = {origin: 0.0}
    heap = [(0.0, origin)]
    while heap:
        d, u = heapq.heappop(heap)
        if u in settled:
            continue
        if d >= t:
            break
        settled[u] = d
        for v, w in instance._neighbor_edges(u):
            if v in settled:
                continue
            nd = d + w
            if nd < best.get(v, math.inf):
                best[v] = nd
                heapq.heappush(heap, (nd, v))
    return settled


def _ordered_vertices(ball: dict, dim: int) -> list:
    origin = (0,) * dim
    rest = sorted(v for v in ball if v != origin)
    return [origin] + rest


def _ball_distance_matrix(instance: FppInstance, t: float, shell: float, budget: int):
    """(scaled coords of B(t), scaled all-pairs T restricted to the shell graph).

    shell = s routes paths through B(t * (1 + s)); s = 0 keeps them inside
    B(t).  The matrix is mirrored from per-source rows so it is exactly
    symmetric, with the origin's row computed from the origin itself.
    """
    if shell < 0:
        raise InvalidArgumentError("shell must be >= 0")
    if t * (1.0 + shell) > instance.horizon:
        raise InvalidArgumentError(
            f"t*(1+shell) = {t * (1.0 + shell)} exceeds horizon {instance.horizon}"
        )
    ball = passage_time_ball(instance, t)
    m = len(ball)
    if m > budget:
        raise BudgetExceededError(
            f"|B(t)| = {m} exceeds the all-pairs budget {budget}"
        )
    core = _ordered_vertices(ball, instance.dim)
    if shell > 0:
        outer = passage_time_ball(instance, t * (1.0 + shell))
        extra = sorted(v for v in outer if v not in ball)
    else:
        extra = []
    nodes = core + extra
    index = {v: i for i, v in enumerate(nodes)}
    n = len(nodes)

    rows, cols, data = [], [], []
    for u, iu in index.items():
        for axis in range(instance.dim):
            v = list(u)
            v[axis] += 1
            iv = index.get(tuple(v))
            if iv is not None:
                rows.append(iu)
                cols.append(iv)
                data.append(instance.edge_weight(u, axis))
    graph = coo_matrix((data, (rows, cols)), shape=(n, n)).tocsr()
    full = dijkstra(graph, directed=False, indices=np.arange(m))
    tmat = np.array(full[:, :m])
    if not np.all(np.isfinite(tmat)):
        raise SolverError("ball subgraph unexpectedly disconnected")
    upper = np.triu(tmat, 1)
    tmat = upper + upper.T
    coords = np.asarray(core, dtype=np.float64) / t
    return coords, tmat / t


def _space_from_ball(coords: np.ndarray, dmat: np.ndarray, t: float) -> FiniteMetricMeasureSpace:
    lattice = np.rint(coords * t).astype(np.int64)
    labels = [",".join(str(int(c)) for c in row) for row in lattice]
    return FiniteMetricMeasureSpace.uniform(labels, dmat)


def scaled_space(
    instance: FppInstance,
    t: float,
    shell: float = 0.0,
    budget: int = DEFAULT_BALL_BUDGET,
) -> FiniteMetricMeasureSpace:
    """B(t)/t as a uniform finite metric measure space with metric T/t.

    By default paths are restricted to edges inside B(t), which can only
    overestimate the unrestricted passage time; pass shell > 0 to allow
    detours through B(t * (1 + shell)).  Labels are the unscaled lattice
    coordinates, so point positions are recoverable from the space alone.
    """
    coords, dmat = _ball_distance_matrix(instance, t, shell, budget)
    return _space_from_ball(coords, dmat, t)


@dataclass
class TrackPoint:
    """Barycenter of one scaled ball: minimizing vertices in scaled coordinates."""

    t: float
    barycenters: list
    objective: float
    tied: bool
    ball_size: int


def fpp_barycenter_track(
    instance: FppInstance,
    t_list,
    p: float = 2.0,
    shell: float = DEFAULT_SHELL,
    budget: int = DEFAULT_BALL_BUDGET,
) -> list:
    """Exact 1-mean of the scaled ball for each t in an ascending list.

    Ties at relative tolerance 1e-12 are kept (all minimizers returned) and
    flagged, since a tied barycenter usually means the ball is still too
    symmetric or too small to localize the mean.
    """
    ts = [float(t) for t in t_list]
    if not ts or any(b <= a for a, b in zip(ts, ts[1:])):
        raise InvalidArgumentError("t_list must be nonempty and strictly ascending")
    out = []
    for t in ts:
        coords, dmat = _ball_distance_matrix(instance, t, shell, budget)
        space = _space_from_ball(coords, dmat, t)
        sol = k_means_exact(space, 1, p, tie_tol=1e-12)
        centers = [coords[s.indices[0]] for s in sol.minimizers]
        out.append(
            TrackPoint(
                t=t,
                barycenters=centers,
                objective=sol.objective,
                tied=len(centers) > 1,
                ball_size=space.n,
            )
        )
    return out


def _dist_to_l1_ball(z: np.ndarray, radius: float) -> float:
    """Euclidean distance from z to the closed l1 ball of the given radius."""
    a = np.abs(np.asarray(z, dtype=np.float64))
    if a.sum() <= radius:
        return 0.0
    u = np.sort(a)[::-1]
    css = np.cumsum(u)
    ks = np.arange(1, u.size + 1)
    valid = u - (css - radius) / ks > 0
    k = int(ks[valid][-1])
    theta = (css[k - 1] - radius) / k
    return float(np.linalg.norm(np.minimum(a, theta)))


def shape_defect(
    instance: FppInstance,
    t: float,
    reference_norm=None,
    budget: int = DEFAULT_BALL_BUDGET,
    grid_factor: int = 4,
):
    """(metric defect, covering defect) of B(t)/t against the limit norm ball.

    Only deterministic weights have a closed-form limit: T(x, y) = c |x - y|_1,
    so the reference norm is c times the l1 norm and the limit ball has l1
    radius 1/c.  Other laws raise UnsupportedReferenceError unless a callable
    norm is supplied, in which case its unit ball is used via a grid.

    The metric defect is the sup over pairs of |T/t - norm difference|; the
    covering defect is the Hausdorff distance between the scaled vertex set
    and the reference ball, measured in the ambient Euclidean metric on a grid
    finer than the scaled lattice.
    """
    if reference_norm is None:
        if instance.law.kind != "deterministic":
            raise UnsupportedReferenceError(
                f"no closed-form limit shape for {instance.law.describe()}; "
                "pass reference_norm explicitly"
            )
        c = instance.law.params[0]
        norm = lambda v: c * float(np.abs(v).sum())
        l1_radius = 1.0 / c
    else:
        norm = reference_norm
        l1_radius = None

    coords, dmat = _ball_distance_matrix(instance, t, 0.0, budget)
    m = coords.shape[0]
    if l1_radius is not None:
        ref = instance.law.params[0] * cdist(coords, coords, "cityblock")
    else:
        ref = np.zeros((m, m))
        for i in range(m):
            for j in range(i + 1, m):
                ref[i, j] = ref[j, i] = float(norm(coords[i] - coords[j]))
    metric_defect = float(np.abs(dmat - ref).max())

    # reference ball discretized finer than the 1/t lattice spacing
    h = 1.0 / (grid_factor * t)
    radius_box = max(float(np.abs(coords).max()) if m else 0.0, 1.0 if l1_radius is None else l1_radius)
    axes = [np.arange(-radius_box - h, radius_box + h, h)] * instance.dim
    mesh = np.meshgrid(*axes, indexing="ij")
    grid = np.stack([g.ravel() for g in mesh], axis=1)
    inside = np.array([norm(z) <= 1.0 for z in grid])
    grid = grid[inside]
    tree = cKDTree(coords)
    ball_to_set = float(tree.query(grid)[0].max()) if grid.size else 0.0
    if l1_radius is not None:
        set_to_ball = max(_dist_to_l1_ball(z, l1_radius) for z in coords)
    else:
        gtree = cKDTree(grid)
        set_to_ball = 0.0
        for z in coords:
            if float(norm(z)) > 1.0:
                set_to_ball = max(set_to_ball, float(gtree.query(z)[0]))
    covering_defect = max(ball_to_set, set_to_ball)
    return metric_defect, covering_defect
