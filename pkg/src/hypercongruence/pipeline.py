"""Top-level congruence decision for finite point sets in 4-space.

congruence_test_4d ties the stages together: centroid normalization,
radius pruning, iterative pruning on the 3-sphere, the mirror and orbit
condensing steps, circle marking, and the two dimension reductions.  Both
inputs are processed in lockstep; every stage emits comparison keys built
from counts and cluster ranks only, and the first key divergence decides
NotCongruent.  Positive verdicts always carry a rotation that has been
verified against the original (normalized) sets, so false positives are
impossible regardless of how aggressively the working sets were condensed.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.spatial import cKDTree

from .circles import CondensedPoints, GreatCircles, mirror_reduce, orbit_circles
from .condense import joint_cluster, prune_by_key
from .geom import CONSTANTS, EPS_EQ, PointSet4, Verdict, verify_rotation
from .iterprune import (EdgeTransitive, MirrorSymmetric, WellSeparated,
                        iterative_prune)
from .lowdim import one_plus_three_reduce
from .marking import FewCircles, Markers, mark_circles
from .torus import two_plus_two_reduce

MIRROR_X1 = np.diag([-1.0, 1.0, 1.0, 1.0])


@dataclass
class PipelineOptions:
    """Knobs for congruence_test_4d.

    delta0 and few_cap override the production constants so that small
    constructed instances can exercise the deep condensing paths; leave
    them at None for real inputs.
    """

    eps_eq: float = EPS_EQ
    allow_reflection: bool = False
    trace: bool = False
    max_restarts: int = 64
    verify_eps: float = 1e-6
    delta0: Optional[float] = None
    few_cap: Optional[int] = None

    def __post_init__(self):
        if self.eps_eq <= 0:
            raise ValueError("eps_eq must be positive")


def _dedupe(points: np.ndarray, eps: float, labels=None) -> tuple:
    """Collapse coincident equal-label points into multiplicity tokens.

    Returns (unique points, tokens) where a token is the multiplicity, or
    (multiplicity, label) when input labels are given.
    """
    n = len(points)
    pairs = cKDTree(points).query_pairs(r=eps, output_type="ndarray")
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i, j in pairs:
        if labels is not None and labels[int(i)] != labels[int(j)]:
            continue
        ri, rj = find(int(i)), find(int(j))
        if ri != rj:
            parent[max(ri, rj)] = min(ri, rj)
    groups: dict = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    reps = sorted(groups)
    out = np.array([points[groups[r]].mean(axis=0) for r in reps])
    if labels is None:
        toks = [len(groups[r]) for r in reps]
    else:
        toks = [(len(groups[r]), labels[r]) for r in reps]
    return out, toks


def _unique_circles(circles: list, eps: float) -> list:
    seen: list = []
    for c in sorted(circles, key=lambda p: p.key()):
        if not any(np.linalg.norm(np.asarray(c.key()) - np.asarray(s.key()))
                   <= 10 * eps for s in seen):
            seen.append(c)
    return seen


class _Lockstep:
    """Paired stage-key streams; records divergence for the verdict."""

    def __init__(self, sink: Optional[list]):
        self.sink = sink

    def check(self, stage: str, key_a, key_b) -> bool:
        if self.sink is not None:
            self.sink.append((stage, key_a, key_b))
        return key_a == key_b


def congruence_test_4d(a_raw, b_raw, opts: Optional[PipelineOptions] = None,
                       trace_sink: Optional[list] = None,
                       labels_a=None, labels_b=None) -> Verdict:
    """Decide whether two point multisets in 4-space are congruent by an
    orientation-preserving isometry; with allow_reflection also try the
    mirrored second set.  Returns a Verdict whose rotation and translation
    satisfy B ~ A @ rotation.T + translation as labeled multisets.

    Optional labels restrict matchings to equal-label points.
    """
    opts = opts or PipelineOptions()
    a = np.asarray(a_raw, dtype=float).reshape(-1, 4)
    b = np.asarray(b_raw, dtype=float).reshape(-1, 4)
    if len(a) != len(b):
        raise ValueError(f"point counts differ: {len(a)} vs {len(b)}")
    if len(a) == 0:
        raise ValueError("need at least one point")
    for lab, pts in ((labels_a, a), (labels_b, b)):
        if lab is not None and len(lab) != len(pts):
            raise ValueError("label count does not match point count")
    if (labels_a is None) != (labels_b is None):
        raise ValueError("either both sets are labeled or neither is")
    ca, cb = a.mean(axis=0), b.mean(axis=0)
    an, bn = a - ca, b - cb
    sink = trace_sink if trace_sink is not None else ([] if opts.trace else None)

    v = _attempt(an, bn, opts, sink, labels_a, labels_b)
    if v.congruent:
        return Verdict.yes(v.rotation, cb - ca @ v.rotation.T)
    if opts.allow_reflection:
        v2 = _attempt(an, bn @ MIRROR_X1, opts, sink, labels_a, labels_b)
        if v2.congruent:
            s = MIRROR_X1 @ v2.rotation
            return Verdict.yes(s, cb - ca @ s.T, reflected=True)
    return v


def _attempt(an: np.ndarray, bn: np.ndarray, opts: PipelineOptions,
             sink: Optional[list], labels_a=None, labels_b=None) -> Verdict:
    eps = opts.eps_eq
    step = _Lockstep(sink)
    ua, mult_a = _dedupe(an, eps, labels_a)
    ub, mult_b = _dedupe(bn, eps, labels_b)
    if not step.check("multiplicity",
                      (len(ua), tuple(sorted(Counter(mult_a).items()))),
                      (len(ub), tuple(sorted(Counter(mult_b).items())))):
        return Verdict.no("multiplicity")
    full_a = PointSet4(ua, tuple(mult_a))
    full_b = PointSet4(ub, tuple(mult_b))

    wa, wb = ua, ub
    lab_a, lab_b = list(mult_a), list(mult_b)
    delta0 = opts.delta0 if opts.delta0 is not None else CONSTANTS.delta0
    few_cap = opts.few_cap if opts.few_cap is not None else \
        CONSTANTS.few_circles_cap

    for _ in range(opts.max_restarts):
        norm_a = np.linalg.norm(wa, axis=1)
        norm_b = np.linalg.norm(wb, axis=1)
        org_a, org_b = norm_a <= eps, norm_b <= eps
        if not step.check("origin",
                          (int(org_a.sum()),
                           tuple(sorted(l for l, o in zip(lab_a, org_a) if o))),
                          (int(org_b.sum()),
                           tuple(sorted(l for l, o in zip(lab_b, org_b) if o)))):
            return Verdict.no("origin class")
        if org_a.all():
            # no direction information anywhere in the working set
            if verify_rotation(full_a, full_b, np.eye(4), opts.verify_eps):
                return Verdict.yes(np.eye(4), np.zeros(4))
            return Verdict.no("coincident")
        wa, norm_a = wa[~org_a], norm_a[~org_a]
        wb, norm_b = wb[~org_b], norm_b[~org_b]
        lab_a = [l for l, o in zip(lab_a, org_a) if not o]
        lab_b = [l for l, o in zip(lab_b, org_b) if not o]

        rid_a, rid_b = joint_cluster(norm_a, norm_b, eps)
        pr_a = prune_by_key(list(zip(lab_a, (int(r) for r in rid_a))))
        pr_b = prune_by_key(list(zip(lab_b, (int(r) for r in rid_b))))
        if not step.check("radius", pr_a.histogram, pr_b.histogram):
            return Verdict.no("radius class")
        ka = np.array(pr_a.indices, dtype=int)
        kb = np.array(pr_b.indices, dtype=int)
        sa = wa[ka] / norm_a[ka, None]
        sb = wb[kb] / norm_b[kb, None]

        if len(sa) == 1:
            return one_plus_three_reduce(full_a, full_b, sa, sb, eps,
                                         opts.verify_eps)

        ex_a, keys_a = iterative_prune(sa, eps, delta0, sink)
        ex_b, keys_b = iterative_prune(sb, eps, delta0)
        if not step.check("sphere", (type(ex_a).__name__, tuple(keys_a)),
                          (type(ex_b).__name__, tuple(keys_b))):
            return Verdict.no("sphere structure")

        if isinstance(ex_a, WellSeparated):
            return one_plus_three_reduce(full_a, full_b, ex_a.points,
                                         ex_b.points, eps, opts.verify_eps)

        if isinstance(ex_a, MirrorSymmetric):
            res_a, rk_a = mirror_reduce(ex_a.points, ex_a.graph, eps)
            res_b, rk_b = mirror_reduce(ex_b.points, ex_b.graph, eps)
            if not step.check("mirror", (type(res_a).__name__, tuple(rk_a)),
                              (type(res_b).__name__, tuple(rk_b))):
                return Verdict.no("mirror structure")
            if isinstance(res_a, CondensedPoints):
                if len(res_a.points) >= len(wa):
                    raise AssertionError("mirror condensing made no progress")
                wa, wb = res_a.points, res_b.points
                lab_a, lab_b = [0] * len(wa), [0] * len(wb)
                continue
            circ_a, circ_b = res_a.circles, res_b.circles
        else:
            cyc_a, ok_a = orbit_circles(ex_a.points, ex_a.graph, ex_a.delta,
                                        ex_a.alpha, ex_a.tau0, eps)
            cyc_b, ok_b = orbit_circles(ex_b.points, ex_b.graph, ex_b.delta,
                                        ex_b.alpha, ex_b.tau0, eps)
            if not step.check("orbit", tuple(ok_a), tuple(ok_b)):
                return Verdict.no("orbit structure")
            circ_a = [c.circle for c in cyc_a]
            circ_b = [c.circle for c in cyc_b]

        circ_a = _unique_circles(circ_a, eps)
        circ_b = _unique_circles(circ_b, eps)
        if not step.check("circles", len(circ_a), len(circ_b)):
            return Verdict.no("circle count")

        mres_a, mk_a = mark_circles(circ_a, eps, few_cap)
        mres_b, mk_b = mark_circles(circ_b, eps, few_cap)
        if not step.check("marking", (type(mres_a).__name__, tuple(mk_a)),
                          (type(mres_b).__name__, tuple(mk_b))):
            return Verdict.no("circle structure")

        if isinstance(mres_a, FewCircles):
            p = mres_a.circles[0]
            for q in mres_b.circles:
                v = two_plus_two_reduce(full_a, full_b, p, q, eps,
                                        opts.verify_eps)
                if v.congruent:
                    return v
            return Verdict.no("plane pair alignment")

        if len(mres_a.points) >= len(wa):
            raise AssertionError("marking made no progress")
        wa, wb = mres_a.points, mres_b.points
        lab_a, lab_b = [0] * len(wa), [0] * len(wb)

    raise AssertionError("restart budget exhausted")
