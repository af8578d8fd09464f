"""Independent oracle implementations shared by the tests.

Everything here is deliberately written against the library's grain: plain
Python loops, itertools enumeration, relaxation instead of heaps.  Slow and
obviously correct beats fast; these exist so each nontrivial code path has a
second route to the same number.
"""
import itertools

import numpy as np

from mmspace import FiniteMetricMeasureSpace, enlarged_cell, voronoi_cells


def brute_cost(space, subset, p):
    """Pure-python clustering cost, no numpy broadcasting."""
    total = 0.0
    for i in range(space.n):
        best = min(space.dist[i][s] for s in subset)
        total += space.weights[i] * best**p
    return total


def brute_kmeans(space, k, p, tie_tol=1e-9):
    """Enumerate every subset of cardinality <= k; return (objective, tied sets)."""
    best = None
    costs = {}
    for size in range(1, min(k, space.n) + 1):
        for subset in itertools.combinations(range(space.n), size):
            c = brute_cost(space, subset, p)
            costs[subset] = c
            if best is None or c < best:
                best = c
    tied = {s for s, c in costs.items() if c <= best * (1.0 + tie_tol)}
    return best, tied


def random_space(rng, n, dim=2, uniform=False):
    pts = rng.uniform(-1.0, 1.0, size=(n, dim))
    d = np.sqrt(((pts[:, None, :] - pts[None, :, :]) ** 2).sum(axis=2))
    np.fill_diagonal(d, 0.0)
    d = np.minimum(d, d.T)
    labels = [f"p{i}" for i in range(n)]
    if uniform:
        return FiniteMetricMeasureSpace.uniform(labels, d), pts
    w = rng.uniform(0.1, 1.0, size=n)
    w = w / w.sum()
    w[-1] = 1.0 - w[:-1].sum()
    return FiniteMetricMeasureSpace(labels, d, w), pts


def relaxation_passage_times(instance, vertices):
    """All passage times from the origin within a fixed vertex set.

    Bellman-Ford style: relax every internal edge until nothing changes.  The
    vertex set must contain the origin; paths are restricted to the set, which
    matches the library's ball-restricted convention at shell = 0.
    """
    origin = (0,) * instance.dim
    vset = {tuple(v) for v in vertices}
    assert origin in vset
    dist = {v: float("inf") for v in vset}
    dist[origin] = 0.0
    changed = True
    while changed:
        changed = False
        for v in vset:
            for axis in range(instance.dim):
                for sign in (1, -1):
                    w = list(v)
                    w[axis] += sign
                    w = tuple(w)
                    if w not in vset:
                        continue
                    base = v if sign == 1 else w
                    weight = instance.edge_weight(base, axis)
                    if dist[v] + weight < dist[w] - 0.0:
                        dist[w] = dist[v] + weight
                        changed = True
    return dist


def wasserstein_1d_uniform(xs, ys, p):
    """W_p between uniform empirical measures on the line, equal sizes.

    The optimal coupling in one dimension is the monotone one, so the distance
    is the p-mean of sorted coordinate differences.
    """
    xs = sorted(xs)
    ys = sorted(ys)
    assert len(xs) == len(ys)
    total = sum(abs(a - b) ** p for a, b in zip(xs, ys)) / len(xs)
    return total ** (1.0 / p)


def perturbed_containment_trial(rng, n_max=16):
    """One randomized check of cell containment under center perturbation.

    Draw centers A, move each center to one of its nearest neighbors (possibly
    itself), and set delta to twice the Hausdorff distance between A and the
    moved set B (the hypothesis is two-sided: every a near B, every b near A).
    Every original cell must then sit inside the enlarged cell of the matched
    moved center.  Returns True if the containment holds.
    """
    n = int(rng.integers(5, n_max))
    space, _ = random_space(rng, n)
    k = int(rng.integers(1, 5))
    a_centers = rng.choice(n, size=k, replace=False).tolist()
    b_centers = []
    for a in a_centers:
        hop = int(rng.integers(0, 3))
        b_centers.append(int(np.argsort(space.dist[a], kind="stable")[hop]))
    b_centers = sorted(set(b_centers))
    matched = {a: min(b_centers, key=lambda b: space.dist[a, b]) for a in a_centers}
    a_to_b = max(space.dist[a, matched[a]] for a in a_centers)
    b_to_a = max(min(space.dist[b, a] for a in a_centers) for b in b_centers)
    delta = 2.0 * max(a_to_b, b_to_a)
    part = voronoi_cells(space, a_centers)
    for a in a_centers:
        enlarged = set(enlarged_cell(space, b_centers, matched[a], delta))
        if not set(part.cells[a]) <= enlarged:
            return False
    return True
