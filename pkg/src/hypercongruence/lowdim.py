"""Labeled congruence tests in one and three dimensions.

The 4D pipeline bottoms out here: once a well-separated direction pair
has been fixed (or a pair of invariant circles), what remains is to match
labeled points on a circle or in a 3-dimensional slice.  Angles on a
circle are matched through the canonical-axes machinery; 3D point sets
are matched by condensing a least-frequent shell to its symmetry-bounded
core and trying the handful of frame alignments that survive.
"""

from __future__ import annotations

import math
from collections import Counter
from typing import Optional, Sequence

import numpy as np

from .condense import canonical_axes, joint_cluster, tolerance_cluster
from .geom import EPS_EQ, PointSet4, Verdict, match_multisets, verify_rotation
from .iterprune import TWO_PI, _complete_basis
from .sphere import condense_sphere


def _mod_circle(angles: np.ndarray) -> np.ndarray:
    ang = np.mod(np.asarray(angles, dtype=float), TWO_PI)
    ang[ang >= TWO_PI] = 0.0  # x % 2pi can return exactly 2pi for tiny x < 0
    return ang


def _circular_clusters(values: np.ndarray, eps: float) -> list:
    """Group sorted indices of circle values, merging across the 0/2pi seam."""
    order = np.argsort(values, kind="stable")
    sv = values[order]
    groups: list = []
    cur = [int(order[0])]
    for k in range(1, len(order)):
        if sv[k] - sv[k - 1] <= eps:
            cur.append(int(order[k]))
        else:
            groups.append(cur)
            cur = [int(order[k])]
    groups.append(cur)
    if len(groups) > 1 and (sv[0] + TWO_PI) - sv[-1] <= eps:
        groups[0] = groups.pop() + groups[0]
    return groups


def collapse_circle(angles: np.ndarray, labels: Sequence,
                    eps: float) -> tuple:
    """Merge coincident circle positions into multiset-labeled points.

    Distinct points of a labeled circle set may share one angle (stacked
    3D points project together); their relative order under angle sorting
    is then noise, so they must enter any canonical code as one position
    carrying the label multiset.
    """
    ang = _mod_circle(np.atleast_1d(np.asarray(angles, dtype=float)))
    if len(ang) == 0:
        return ang, []
    labs = list(labels)
    reps, toks = [], []
    for idxs in _circular_clusters(ang, eps):
        c = float(np.cos(ang[idxs]).sum())
        s = float(np.sin(ang[idxs]).sum())
        reps.append(math.atan2(s, c) % TWO_PI)
        toks.append(tuple(sorted(Counter(labs[i] for i in idxs).items())))
    reps = np.asarray(reps)
    reps[reps >= TWO_PI] = 0.0
    return reps, toks


def sorted_circle_gaps(ang: np.ndarray) -> np.ndarray:
    order = np.lexsort((np.arange(len(ang)), ang))
    sa = ang[order]
    return np.diff(np.concatenate([sa, [sa[0] + TWO_PI]]))


def congruence_2d_labeled(angles_a: np.ndarray, labels_a: Sequence,
                          angles_b: np.ndarray, labels_b: Sequence,
                          eps: float = EPS_EQ) -> Optional[float]:
    """Rotation angle t with (angles_a + t, labels_a) == (angles_b, labels_b)
    as labeled multisets on the circle, or None.

    Labels must be hashable and comparable across the two sets (cluster ids,
    tuples of such).  Runs in O(n log n): both sets are reduced to a
    canonical necklace code; equality of codes pins the shift up to the
    common symmetry, and one representative shift is verified directly.
    """
    a = _mod_circle(np.atleast_1d(np.asarray(angles_a, dtype=float)))
    b = _mod_circle(np.atleast_1d(np.asarray(angles_b, dtype=float)))
    if len(a) != len(b):
        return None
    if len(a) == 0:
        return 0.0
    la, lb = list(labels_a), list(labels_b)
    ra, ta = collapse_circle(a, la, eps)
    rb, tb = collapse_circle(b, lb, eps)
    if len(ra) != len(rb):
        return None
    if len(ra) == 1:
        if ta[0] != tb[0]:
            return None
        return float(np.mod(rb[0] - ra[0], TWO_PI))

    ga, gb = sorted_circle_gaps(ra), sorted_circle_gaps(rb)
    gids_a, gids_b = joint_cluster(ga, gb, eps)
    ax_a = canonical_axes(ra, labels=ta, eps=eps, gap_ids=gids_a)
    ax_b = canonical_axes(rb, labels=tb, eps=eps, gap_ids=gids_b)
    if ax_a.code != ax_b.code:
        return None
    t = float(np.mod(ax_b.base_angle - ax_a.base_angle, TWO_PI))

    shifted = _mod_circle(a + t)
    merged = np.concatenate([shifted, b])
    for grp in _circular_clusters(merged, max(eps, 1e-12)):
        ca = Counter(la[i] for i in grp if i < len(a))
        cb = Counter(lb[i - len(a)] for i in grp if i >= len(a))
        if ca != cb:
            return None
    return t


def _rot_z(t: float) -> np.ndarray:
    c, s = math.cos(t), math.sin(t)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def _frame3(axis: np.ndarray) -> np.ndarray:
    """Right-handed orthonormal rows (e1, e2, axis)."""
    u = np.asarray(axis, dtype=float)
    u = u / np.linalg.norm(u)
    k = int(np.argmin(np.abs(u)))
    e1 = np.eye(3)[k] - u[k] * u
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(u, e1)
    return np.array([e1, e2, u])


def _pair_frame3(p1: np.ndarray, p2: np.ndarray) -> Optional[np.ndarray]:
    """Rows (p1, component of p2 perp to p1, cross); None if (anti)parallel."""
    r1 = p1 / np.linalg.norm(p1)
    w = p2 - (p2 @ r1) * r1
    nw = np.linalg.norm(w)
    if nw < 1e-9:
        return None
    r2 = w / nw
    return np.array([r1, r2, np.cross(r1, r2)])


def congruence_3d_labeled(points_a: np.ndarray, labels_a: Sequence,
                          points_b: np.ndarray, labels_b: Sequence,
                          eps: float = EPS_EQ) -> Optional[np.ndarray]:
    """A proper rotation S in SO(3) with S @ a_i matching {(b_j, label_j)}
    as labeled multisets, or None.

    Only proper rotations are searched: every embedding of a 3D slice match
    into a positively oriented 4D congruence forces det(S) = +1.
    """
    pa = np.asarray(points_a, dtype=float).reshape(-1, 3)
    pb = np.asarray(points_b, dtype=float).reshape(-1, 3)
    if len(pa) != len(pb):
        return None
    la, lb = list(labels_a), list(labels_b)
    ra, rb = np.linalg.norm(pa, axis=1), np.linalg.norm(pb, axis=1)
    orig_a, orig_b = ra <= eps, rb <= eps
    if Counter(l for l, o in zip(la, orig_a) if o) != \
            Counter(l for l, o in zip(lb, orig_b) if o):
        return None
    keep_a, keep_b = ~orig_a, ~orig_b
    pa, pb = pa[keep_a], pb[keep_b]
    la = [l for l, k in zip(la, keep_a) if k]
    lb = [l for l, k in zip(lb, keep_b) if k]
    if len(pa) != len(pb):
        return None
    if len(pa) == 0:
        return np.eye(3)

    rida, ridb = joint_cluster(np.linalg.norm(pa, axis=1),
                               np.linalg.norm(pb, axis=1), eps)
    toks_a = [(l, int(r)) for l, r in zip(la, rida)]
    toks_b = [(l, int(r)) for l, r in zip(lb, ridb)]
    ca, cb = Counter(toks_a), Counter(toks_b)
    if ca != cb:
        return None

    tok = min(ca, key=lambda t: (ca[t], t))
    sel_a = [i for i, t in enumerate(toks_a) if t == tok]
    sel_b = [i for i, t in enumerate(toks_b) if t == tok]
    ua = pa[sel_a] / np.linalg.norm(pa[sel_a], axis=1, keepdims=True)
    ub = pb[sel_b] / np.linalg.norm(pb[sel_b], axis=1, keepdims=True)
    fa, fb = condense_sphere(ua, eps), condense_sphere(ub, eps)
    if len(fa) != len(fb):
        return None
    vtol = max(eps, 1e-9) * 10.0

    if len(fa) <= 2:
        # an invariant axis: try u -> v, and u -> -v for the antipodal pair
        cands = [(fa[0], fb[k]) for k in range(len(fb))]
        for u, v in cands:
            ma, mb = _frame3(u), _frame3(v)
            ca3, cb3 = pa @ ma.T, pb @ mb.T
            hids_a, hids_b = joint_cluster(ca3[:, 2], cb3[:, 2], eps)
            rho_a = np.hypot(ca3[:, 0], ca3[:, 1])
            rho_b = np.hypot(cb3[:, 0], cb3[:, 1])
            off_a, off_b = rho_a > eps, rho_b > eps
            on_toks_a = Counter((l, int(h)) for l, h, o
                                in zip(la, hids_a, off_a) if not o)
            on_toks_b = Counter((l, int(h)) for l, h, o
                                in zip(lb, hids_b, off_b) if not o)
            if on_toks_a != on_toks_b or off_a.sum() != off_b.sum():
                continue
            if off_a.any():
                pids_a, pids_b = joint_cluster(rho_a[off_a], rho_b[off_b], eps)
                th_a = np.arctan2(ca3[off_a, 1], ca3[off_a, 0])
                th_b = np.arctan2(cb3[off_b, 1], cb3[off_b, 0])
                tla = [(l, int(h), int(p)) for l, h, p in
                       zip([x for x, o in zip(la, off_a) if o],
                           hids_a[off_a], pids_a)]
                tlb = [(l, int(h), int(p)) for l, h, p in
                       zip([x for x, o in zip(lb, off_b) if o],
                           hids_b[off_b], pids_b)]
                t = congruence_2d_labeled(th_a, tla, th_b, tlb, eps)
                if t is None:
                    continue
            else:
                t = 0.0
            s = mb.T @ _rot_z(t) @ ma
            if match_multisets(pa @ s.T, pb, vtol, tuple(toks_a), tuple(toks_b)):
                return s
        return None

    # a bounded orbit frame (4, 6 or 12 points): try every same-gap image pair
    p1 = fa[0]
    dist = np.where(np.abs(np.abs(fa @ p1) - 1.0) < 1e-6, np.inf,
                    np.linalg.norm(fa - p1, axis=1))
    if not np.isfinite(dist).any():
        raise AssertionError("condensed frame of >2 points is collinear")
    p2 = fa[int(np.argmin(dist))]
    d12 = float(p1 @ p2)
    ma = _pair_frame3(p1, p2)
    for i in range(len(fb)):
        for j in range(len(fb)):
            if i == j or abs(float(fb[i] @ fb[j]) - d12) > vtol:
                continue
            mb = _pair_frame3(fb[i], fb[j])
            if mb is None:
                continue
            s = mb.T @ ma
            if not match_multisets(fa @ s.T, fb, vtol):
                continue
            if match_multisets(pa @ s.T, pb, vtol, tuple(toks_a), tuple(toks_b)):
                return s
    return None


def one_plus_three_reduce(set_a: PointSet4, set_b: PointSet4,
                          anchors_a: np.ndarray, anchors_b: np.ndarray,
                          eps: float = EPS_EQ,
                          verify_eps: float = 1e-6) -> Verdict:
    """Decide congruence of two normalized 4D sets from well-separated anchors.

    Any congruence must map the anchor family of ``set_a`` onto that of
    ``set_b``, so it maps the lexicographically least anchor a0 to *some*
    anchor b.  Each candidate pins one axis; the residual freedom is a
    rotation of the orthogonal 3-slice, decided by congruence_3d_labeled on
    the projections with signed heights folded into the labels.
    """
    aa = np.asarray(anchors_a, dtype=float).reshape(-1, 4)
    ab = np.asarray(anchors_b, dtype=float).reshape(-1, 4)
    if len(aa) != len(ab) or len(aa) == 0:
        return Verdict.no("anchor count")
    a0 = aa[np.lexsort(aa.T[::-1])[0]]
    fa = _complete_basis([a0 / np.linalg.norm(a0)])
    h_a = set_a.points @ fa[0]
    proj_a = set_a.points @ fa[1:].T
    base_a = set_a.labels if set_a.labels is not None else [0] * len(set_a)
    base_b = set_b.labels if set_b.labels is not None else [0] * len(set_b)

    for b in ab[np.lexsort(ab.T[::-1])]:
        fb = _complete_basis([b / np.linalg.norm(b)])
        h_b = set_b.points @ fb[0]
        hids_a, hids_b = joint_cluster(h_a, h_b, eps)
        la = [(l, int(h)) for l, h in zip(base_a, hids_a)]
        lb = [(l, int(h)) for l, h in zip(base_b, hids_b)]
        s = congruence_3d_labeled(proj_a, la, set_b.points @ fb[1:].T, lb, eps)
        if s is None:
            continue
        lift = np.zeros((4, 4))
        lift[0, 0] = 1.0
        lift[1:, 1:] = s
        r = fb.T @ lift @ fa
        if verify_rotation(set_a, set_b, r, verify_eps):
            return Verdict.yes(r, np.zeros(4))
    return Verdict.no("anchor alignment")
