"""Closest-pair graphs of finite sets on spheres.

Vertices are the input points; edges join every pair realizing the minimum
pairwise distance (tolerance-closed).  In antipodal mode each input row
stands for a point pair {x, -x} and distances are minimized over signs,
which is the metric of the projective interpretation used for plane
invariants on the 5-sphere.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree
from scipy.spatial.distance import pdist, squareform

from .geom import EPS_EQ, DuplicatePointsError, worker_count


@dataclass(frozen=True)
class ClosestPairGraph:
    n: int
    delta: float
    edges: tuple            # sorted (i, j) pairs with i < j
    antipodal: bool = False

    def adjacency(self) -> list:
        adj: list = [[] for _ in range(self.n)]
        for i, j in self.edges:
            adj[i].append(j)
            adj[j].append(i)
        return [sorted(a) for a in adj]

    def max_degree(self) -> int:
        deg = np.zeros(self.n, dtype=int)
        for i, j in self.edges:
            deg[i] += 1
            deg[j] += 1
        return int(deg.max()) if self.n else 0


def _finish(n: int, delta: float, pairs: set, antipodal: bool) -> ClosestPairGraph:
    edges = tuple(sorted(pairs))
    return ClosestPairGraph(n, float(delta), edges, antipodal)


def closest_pair_graph(points: np.ndarray, antipodal: bool = False,
                       eps: float = EPS_EQ) -> ClosestPairGraph:
    """Build the closest-pair graph of distinct points in O(n log n) expected time.

    Raises DuplicatePointsError when two items are closer than eps; the
    callers all require simple sets.
    """
    pts = np.asarray(points, dtype=float)
    n = len(pts)
    if n < 2:
        raise ValueError("need at least two points")
    w = worker_count()
    if not antipodal:
        tree = cKDTree(pts)
        dists, _ = tree.query(pts, k=2, workers=w)
        delta = float(dists[:, 1].min())
        if delta <= eps:
            raise DuplicatePointsError(f"two points at distance {delta:.3e}")
        raw = tree.query_pairs(r=delta + eps, output_type="ndarray")
        pairs = {(int(i), int(j)) if i < j else (int(j), int(i)) for i, j in raw}
        return _finish(n, delta, pairs, False)

    work = np.vstack([pts, -pts])
    tree = cKDTree(work)
    k = min(3, len(work))
    dists, idxs = tree.query(work, k=k, workers=w)
    delta = np.inf
    for row in range(len(work)):
        partner = (row + n) % (2 * n)
        for col in range(k):
            j = int(idxs[row, col])
            if j == row or j == partner:
                continue
            delta = min(delta, float(dists[row, col]))
            break
    if delta <= eps:
        raise DuplicatePointsError(f"two sign classes at distance {delta:.3e}")
    raw = tree.query_pairs(r=delta + eps, output_type="ndarray")
    pairs = set()
    for i, j in raw:
        a, b = int(i) % n, int(j) % n
        if a == b:
            continue
        pairs.add((a, b) if a < b else (b, a))
    return _finish(n, delta, pairs, True)


def brute_graph(points: np.ndarray, antipodal: bool = False,
                eps: float = EPS_EQ) -> ClosestPairGraph:
    """Quadratic reference construction, for cross-checking (n <= 4096)."""
    pts = np.asarray(points, dtype=float)
    n = len(pts)
    if n < 2:
        raise ValueError("need at least two points")
    if n > 4096:
        raise ValueError("brute-force graph capped at 4096 points")
    d = squareform(pdist(pts))
    if antipodal:
        d_plus = squareform(pdist(np.vstack([pts, -pts])))[:n, n:]
        np.fill_diagonal(d_plus, np.inf)
        d = np.minimum(d, d_plus)
    iu = np.triu_indices(n, k=1)
    delta = float(d[iu].min())
    if delta <= eps:
        raise DuplicatePointsError(f"two points at distance {delta:.3e}")
    close = d[iu] <= delta + eps
    pairs = {(int(a), int(b)) for a, b in zip(iu[0][close], iu[1][close])}
    return _finish(n, delta, pairs, antipodal)
