"""Order-independent condensation helpers.

Three primitives recur throughout the pipeline: grouping nearly-equal reals
into classes (single-linkage at the comparison tolerance), keeping only the
smallest class under a canonical key, and computing the canonical axes of a
labeled configuration on a circle.  All of them are deterministic functions
of the input multiset, never of input order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Hashable, Optional, Sequence

import numpy as np

from .geom import EPS_EQ

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class ClusterResult:
    """Cluster ids aligned with the input, plus one representative per class.

    Ids are assigned in ascending order of class value; representatives are
    class minima, so equal multisets yield identical id sequences.
    """

    ids: np.ndarray
    reps: np.ndarray

    @property
    def count(self) -> int:
        return len(self.reps)


def tolerance_cluster(values: Sequence[float], eps: float = EPS_EQ) -> ClusterResult:
    """Split sorted values where consecutive gaps exceed eps.

    Single linkage: chains of closely spaced values merge even if the chain
    is wider than eps.  That keeps the result order-free and symmetric, at
    the usual price of non-transitivity near the tolerance boundary.
    """
    vals = np.asarray(values, dtype=float)
    if vals.ndim != 1:
        raise ValueError("expected a flat value array")
    n = len(vals)
    if n == 0:
        return ClusterResult(np.zeros(0, dtype=int), np.zeros(0))
    order = np.argsort(vals, kind="stable")
    sv = vals[order]
    breaks = np.nonzero(np.diff(sv) > eps)[0]
    ids_sorted = np.zeros(n, dtype=int)
    ids_sorted[breaks + 1] = 1
    ids_sorted = np.cumsum(ids_sorted)
    ids = np.empty(n, dtype=int)
    ids[order] = ids_sorted
    starts = np.concatenate([[0], breaks + 1])
    return ClusterResult(ids, sv[starts])


def joint_cluster(a: Sequence[float], b: Sequence[float],
                  eps: float = EPS_EQ) -> tuple[np.ndarray, np.ndarray]:
    """Cluster the union of two value multisets; return ids aligned to each."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    res = tolerance_cluster(np.concatenate([a, b]), eps)
    return res.ids[:len(a)], res.ids[len(a):]


@dataclass(frozen=True)
class PruneResult:
    indices: tuple          # positions of the selected class, ascending
    key: Hashable           # its key
    progressed: bool        # False when only one class existed
    histogram: tuple        # sorted (key, count) pairs; lockstep summary


def prune_by_key(keys: Sequence[Hashable]) -> PruneResult:
    """Select the smallest key class, ties broken by smallest key."""
    if len(keys) == 0:
        raise ValueError("nothing to prune")
    buckets: dict = {}
    for i, k in enumerate(keys):
        buckets.setdefault(k, []).append(i)
    best = min(buckets, key=lambda k: (len(buckets[k]), k))
    hist = tuple(sorted((k, len(v)) for k, v in buckets.items()))
    return PruneResult(tuple(buckets[best]), best, len(buckets) > 1, hist)


def _least_rotation(tokens: list) -> int:
    """Booth's algorithm: start index of the lexicographically least rotation."""
    s = tokens + tokens
    n = len(s)
    f = [-1] * n
    k = 0
    for j in range(1, n):
        sj = s[j]
        i = f[j - k - 1]
        while i != -1 and sj != s[k + i + 1]:
            if sj < s[k + i + 1]:
                k = j - i - 1
            i = f[i]
        if sj != s[k + i + 1]:
            if sj < s[k]:
                k = j
            f[j - k] = -1
        else:
            f[j - k] = i + 1
    return k


def _all_occurrences(pattern: list, text: list) -> list[int]:
    """KMP search returning every start of pattern in text."""
    m = len(pattern)
    fail = [0] * m
    k = 0
    for i in range(1, m):
        while k and pattern[i] != pattern[k]:
            k = fail[k - 1]
        if pattern[i] == pattern[k]:
            k += 1
        fail[i] = k
    hits = []
    k = 0
    for i, c in enumerate(text):
        while k and c != pattern[k]:
            k = fail[k - 1]
        if c == pattern[k]:
            k += 1
        if k == m:
            hits.append(i - m + 1)
            k = fail[k - 1]
    return hits


@dataclass(frozen=True)
class AxesSet:
    """Canonical axes of a labeled circular configuration.

    ``count`` equally spaced rays, the first at ``base_angle``; every axis
    passes through a configuration point.  ``code`` is the canonical cyclic
    string (the least rotation of the alternating label/gap sequence), equal
    for congruent configurations with identical label tokens.  ``order``
    sorts the input by angle and ``starts`` indexes into that sorted order.
    """

    count: int
    base_angle: float
    code: tuple
    order: np.ndarray
    sorted_angles: np.ndarray
    starts: tuple

    @property
    def spacing(self) -> float:
        return TWO_PI / self.count


def canonical_axes(angles: Sequence[float], labels: Optional[Sequence[Hashable]] = None,
                   eps: float = EPS_EQ,
                   gap_ids: Optional[Sequence[int]] = None) -> AxesSet:
    """Canonical axes of points on a circle, given as angles plus label tokens.

    Labels must be mutually comparable, canonical tokens (ints or int
    tuples); they are used verbatim in the code string.  Gap lengths are
    quantized by tolerance clustering unless precomputed ids are supplied.
    The rotations of the cyclic sequence are ranked starting at label
    positions only; the minimal starts are the axis points.
    """
    ang = np.mod(np.asarray(angles, dtype=float), TWO_PI)
    ang[ang >= TWO_PI] = 0.0    # x % 2pi rounds up to 2pi for tiny negative x
    n = len(ang)
    if n == 0:
        raise ValueError("empty configuration")
    if labels is None:
        labels = [0] * n
    order = np.lexsort((np.arange(n), ang))
    sorted_ang = ang[order]
    gaps = np.diff(np.concatenate([sorted_ang, [sorted_ang[0] + TWO_PI]]))
    if gap_ids is None:
        gap_ids = tolerance_cluster(gaps, eps).ids
    else:
        gap_ids = np.asarray(gap_ids, dtype=int)
        if len(gap_ids) != n:
            raise ValueError("gap id count mismatch")
    tokens: list = []
    for pos in range(n):
        tokens.append((0, labels[order[pos]]))
        tokens.append((1, int(gap_ids[pos])))
    k = _least_rotation(tokens)
    # label tokens sort before gap tokens, so the least rotation begins at a label
    assert k % 2 == 0
    code = tuple(tokens[k:] + tokens[:k])
    starts_tok = _all_occurrences(list(code), tokens + tokens[:-1])
    starts = sorted({(s // 2) % n for s in starts_tok})
    count = len(starts)
    base = float(sorted_ang[starts[0]])
    return AxesSet(count, base, code, order, sorted_ang, tuple(starts))


def axis_offsets(axes: AxesSet, angles: Sequence[float]) -> np.ndarray:
    """Offset of each angle to the nearest smaller canonical axis, in [0, spacing)."""
    ang = np.mod(np.asarray(angles, dtype=float), TWO_PI)
    return np.mod(ang - axes.base_angle, axes.spacing)
