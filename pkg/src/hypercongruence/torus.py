"""Translation congruence on the flat torus and the invariant-plane reduction.

Once an invariant plane pair has been pinned, a 4D congruence restricted to
the generic points acts as a translation of the flat square torus (the two
polar angles).  Deciding labeled translation congruence on the torus is done
canonically: both sets are condensed to a translation-equivariant lattice
coset (Voronoi cell shapes and cell contents provide the pruning keys), and
the single surviving candidate translation is verified directly.
"""

from __future__ import annotations

from collections import Counter
from typing import Optional, Sequence

import numpy as np
from scipy.spatial import Voronoi, cKDTree

from .condense import canonical_axes, joint_cluster, prune_by_key, tolerance_cluster
from .geom import (EPS_EQ, PlaneSpan, PointSet4, Verdict, block_rotation,
                   match_multisets, verify_rotation)
from .iterprune import TWO_PI, _complete_basis
from .lowdim import collapse_circle, congruence_2d_labeled, sorted_circle_gaps

_NINE_OFFSETS = np.array([[0.0, 0.0]] + [[dx, dy]
                         for dx in (-TWO_PI, 0.0, TWO_PI)
                         for dy in (-TWO_PI, 0.0, TWO_PI)
                         if (dx, dy) != (0.0, 0.0)])

SWAP_PLANES = np.array([[0.0, 1.0, 0.0, 0.0],
                        [1.0, 0.0, 0.0, 0.0],
                        [0.0, 0.0, 0.0, 1.0],
                        [0.0, 0.0, 1.0, 0.0]])


def _mod_torus(pos: np.ndarray) -> np.ndarray:
    p = np.mod(np.asarray(pos, dtype=float), TWO_PI)
    p[p >= TWO_PI] = 0.0
    return p


def _replicate(sites: np.ndarray) -> np.ndarray:
    return np.concatenate([sites + off for off in _NINE_OFFSETS])


def _circular_ids(values: np.ndarray, eps: float,
                  period: float = TWO_PI) -> np.ndarray:
    """Tolerance-cluster ids for values on a circle of the given period."""
    v = np.mod(np.asarray(values, dtype=float), period)
    v[v >= period] = 0.0
    n = len(v)
    ids = np.zeros(n, dtype=int)
    if n == 0:
        return ids
    order = np.argsort(v, kind="stable")
    sv = v[order]
    gid = np.zeros(n, dtype=int)
    for k in range(1, n):
        gid[k] = gid[k - 1] + (1 if sv[k] - sv[k - 1] > eps else 0)
    if gid[-1] > 0 and (sv[0] + period) - sv[-1] <= eps:
        gid[gid == gid[-1]] = 0
        # renumber to keep ids dense and ordered by group minimum
        uniq = {g: r for r, g in enumerate(sorted(set(gid.tolist())))}
        gid = np.array([uniq[g] for g in gid])
    ids[order] = gid
    return ids


def _cell_shapes(vor: Voronoi, sites: np.ndarray, eps: float) -> list:
    """Canonical quantized shape key for each central site's Voronoi cell."""
    rels = []
    for i in range(len(sites)):
        region = vor.regions[vor.point_region[i]]
        if -1 in region or len(region) == 0:
            raise AssertionError("central torus cell is unbounded")
        rels.append(vor.vertices[region] - sites[i])
    flat = np.concatenate(rels)
    xids = tolerance_cluster(flat[:, 0], eps).ids
    yids = tolerance_cluster(flat[:, 1], eps).ids
    shapes = []
    at = 0
    for rel in rels:
        k = len(rel)
        pairs = list(zip(xids[at:at + k].tolist(), yids[at:at + k].tolist()))
        at += k
        ang = np.arctan2(rel[:, 1], rel[:, 0])
        ccw = [pairs[j] for j in np.argsort(ang, kind="stable")]
        start = min(range(k), key=lambda s: ccw[s:] + ccw[:s])
        shapes.append(tuple(ccw[start:] + ccw[:start]))
    return shapes


def canonical_set_torus(positions: np.ndarray, labels: Sequence,
                        eps: float = 1e-7) -> tuple:
    """Condense a labeled torus set to a coset of its translation symmetry.

    Returns (indices into the input, keys).  Every pruning decision is
    recorded as a count/rank key, so two runs on translation-congruent
    inputs emit identical key lists and keep identical index subsets (up
    to the translation).  The returned subset is a single orbit of the
    symmetry group: the difference of any member with any member of a
    congruent run's result is a valid candidate translation.
    """
    pos = _mod_torus(np.asarray(positions, dtype=float).reshape(-1, 2))
    labs = list(labels)
    if len(pos) != len(labs):
        raise ValueError("label count does not match point count")
    if len(pos) == 0:
        raise ValueError("empty torus set")
    keys: list = []
    orig = np.arange(len(pos))
    cur_pos, cur_labs = pos, labs

    while True:
        rank_of = {l: r for r, l in enumerate(sorted(set(cur_labs)))}
        pr = prune_by_key([rank_of[l] for l in cur_labs])
        keys.append(("T1", pr.histogram))
        cand = np.array(pr.indices, dtype=int)
        if len(cand) == 1:
            keys.append(("T", 1))
            return orig[cand], keys

        while True:
            sites = cur_pos[cand]
            vor = Voronoi(_replicate(sites))
            shapes = _cell_shapes(vor, sites, eps)
            spr = prune_by_key(shapes)
            keys.append(("T3", spr.histogram))
            if not spr.progressed:
                break
            cand = cand[np.array(spr.indices, dtype=int)]
            if len(cand) == 1:
                keys.append(("T", 1))
                return orig[cand], keys

        sites = cur_pos[cand]
        m = len(sites)
        tree = cKDTree(_replicate(sites))
        d, _ = tree.query(cur_pos)
        balls = tree.query_ball_point(cur_pos, d + eps)
        contents: list = [[] for _ in range(m)]
        for pi, hits in enumerate(balls):
            for h in set(int(j) % m for j in hits):
                w = np.mod(cur_pos[pi] - sites[h], TWO_PI)
                contents[h].append((pi, w[0] if w[0] <= np.pi else w[0] - TWO_PI,
                                    w[1] if w[1] <= np.pi else w[1] - TWO_PI))
        flat = [c for cc in contents for c in cc]
        phi_ids = _circular_ids(np.array([c[1] for c in flat]), eps)
        psi_ids = _circular_ids(np.array([c[2] for c in flat]), eps)
        lab_rank = {l: r for r, l in enumerate(sorted(set(cur_labs)))}
        words = []
        at = 0
        for cc in contents:
            k = len(cc)
            words.append(tuple(sorted(
                (int(phi_ids[at + j]), int(psi_ids[at + j]),
                 lab_rank[cur_labs[cc[j][0]]]) for j in range(k))))
            at += k
        word_rank = {w: r for r, w in enumerate(sorted(set(words)))}
        ranks = [word_rank[w] for w in words]
        keys.append(("T5", tuple(sorted(Counter(ranks).items()))))
        if len(word_rank) == 1:
            keys.append(("T", len(cand)))
            return orig[cand], keys
        orig = orig[cand]
        cur_pos, cur_labs = cur_pos[cand], ranks


def _embed_torus(pos: np.ndarray) -> np.ndarray:
    return np.c_[np.cos(pos[:, 0]), np.sin(pos[:, 0]),
                 np.cos(pos[:, 1]), np.sin(pos[:, 1])]


def torus_translation_congruent(pos_a: np.ndarray, labels_a: Sequence,
                                pos_b: np.ndarray, labels_b: Sequence,
                                eps: float = 1e-7) -> Optional[np.ndarray]:
    """A translation t with (pos_a + t, labels_a) == (pos_b, labels_b) on the
    torus, or None.  Runs the canonical condensation on both sides; the
    difference of any two canonical representatives is the only candidate
    that needs checking, and it is verified as a labeled multiset match.
    """
    pa, pb = _mod_torus(pos_a), _mod_torus(pos_b)
    if len(pa) != len(pb):
        return None
    if len(pa) == 0:
        return np.zeros(2)
    ca, keys_a = canonical_set_torus(pa, labels_a, eps)
    cb, keys_b = canonical_set_torus(pb, labels_b, eps)
    if keys_a != keys_b:
        return None
    p = pa[ca][np.lexsort(pa[ca].T[::-1])[0]]
    q = pb[cb][np.lexsort(pb[cb].T[::-1])[0]]
    t = np.mod(q - p, TWO_PI)
    shifted = _mod_torus(pa + t)
    vtol = max(eps, 1e-9) * 10.0
    if match_multisets(_embed_torus(shifted), _embed_torus(pb), vtol,
                       tuple(labels_a), tuple(labels_b)):
        return t
    return None


def _plane_split(coords: np.ndarray, tol: float) -> tuple:
    """Masks (origin, plane-1 only, plane-2 only, generic torus points)."""
    r1 = np.hypot(coords[:, 0], coords[:, 1])
    r2 = np.hypot(coords[:, 2], coords[:, 3])
    origin = (r1 <= tol) & (r2 <= tol)
    in1 = (r2 <= tol) & ~origin
    in2 = (r1 <= tol) & ~origin
    torus = ~(origin | in1 | in2)
    return r1, r2, origin, in1, in2, torus


def _axes_offsets(ang_a, labs_a, ang_b, labs_b, tor_a, tor_b, eps):
    """Offset ids of torus angles relative to the plane sets' symmetry axes.

    Returns (off_ids_a, off_ids_b) or None when the two plane sets cannot
    correspond under any rotation.  Empty plane sets impose no constraint.
    """
    n_t_a, n_t_b = len(tor_a), len(tor_b)
    if len(ang_a) != len(ang_b):
        return None
    if len(ang_a) == 0:
        return np.zeros(n_t_a, dtype=int), np.zeros(n_t_b, dtype=int)

    ra, ta = collapse_circle(ang_a, labs_a, eps)
    rb, tb = collapse_circle(ang_b, labs_b, eps)
    if len(ra) != len(rb):
        return None
    if len(ra) == 1:
        if ta[0] != tb[0]:
            return None
        # a single position fixes no residual symmetry: offsets vs it
        off_a = np.mod(tor_a - ra[0], TWO_PI)
        off_b = np.mod(tor_b - rb[0], TWO_PI)
        ids = _circular_ids(np.concatenate([off_a, off_b]), eps)
        return ids[:n_t_a], ids[n_t_a:]

    ga, gb = sorted_circle_gaps(ra), sorted_circle_gaps(rb)
    gids_a, gids_b = joint_cluster(ga, gb, eps)
    ax_a = canonical_axes(ra, labels=ta, eps=eps, gap_ids=gids_a)
    ax_b = canonical_axes(rb, labels=tb, eps=eps, gap_ids=gids_b)
    if ax_a.code != ax_b.code:
        return None
    spacing = TWO_PI / ax_a.count
    off_a = np.mod(tor_a - ax_a.base_angle, spacing)
    off_b = np.mod(tor_b - ax_b.base_angle, spacing)
    ids = _circular_ids(np.concatenate([off_a, off_b]), eps, period=spacing)
    return ids[:n_t_a], ids[n_t_a:]


def _block_match(ac: np.ndarray, la: Sequence, bc: np.ndarray, lb: Sequence,
                 eps: float) -> Optional[tuple]:
    """Angles (phi, psi) with block_rotation(phi, psi) mapping the labeled
    coordinate set ac onto bc, or None.  Both coordinate planes must be
    invariant; points are split into the two pure-plane circles and the
    generic torus part, and the torus translation is constrained to respect
    the circles through offset labels.
    """
    tol = max(eps, 1e-9)
    r1a, r2a, org_a, in1_a, in2_a, tor_a = _plane_split(ac, tol)
    r1b, r2b, org_b, in1_b, in2_b, tor_b = _plane_split(bc, tol)
    for ma, mb in ((org_a, org_b), (in1_a, in1_b), (in2_a, in2_b),
                   (tor_a, tor_b)):
        if ma.sum() != mb.sum():
            return None
    if Counter(l for l, o in zip(la, org_a) if o) != \
            Counter(l for l, o in zip(lb, org_b) if o):
        return None

    r1ids_a, r1ids_b = joint_cluster(r1a, r1b, tol)
    r2ids_a, r2ids_b = joint_cluster(r2a, r2b, tol)

    def circle_data(coords, mask, labs, rids, cols):
        ang = np.arctan2(coords[mask, cols[1]], coords[mask, cols[0]])
        toks = [(l, int(r)) for l, r, m in zip(labs, rids, mask) if m]
        return np.mod(ang, TWO_PI), toks

    ang1_a, l1a = circle_data(ac, in1_a, la, r1ids_a, (0, 1))
    ang1_b, l1b = circle_data(bc, in1_b, lb, r1ids_b, (0, 1))
    ang2_a, l2a = circle_data(ac, in2_a, la, r2ids_a, (2, 3))
    ang2_b, l2b = circle_data(bc, in2_b, lb, r2ids_b, (2, 3))

    if not tor_a.any():
        phi = 0.0
        if len(ang1_a) or len(ang1_b):
            phi = congruence_2d_labeled(ang1_a, l1a, ang1_b, l1b, tol)
            if phi is None:
                return None
        psi = 0.0
        if len(ang2_a) or len(ang2_b):
            psi = congruence_2d_labeled(ang2_a, l2a, ang2_b, l2b, tol)
            if psi is None:
                return None
        return float(phi), float(psi)

    phi_t_a = np.mod(np.arctan2(ac[tor_a, 1], ac[tor_a, 0]), TWO_PI)
    psi_t_a = np.mod(np.arctan2(ac[tor_a, 3], ac[tor_a, 2]), TWO_PI)
    phi_t_b = np.mod(np.arctan2(bc[tor_b, 1], bc[tor_b, 0]), TWO_PI)
    psi_t_b = np.mod(np.arctan2(bc[tor_b, 3], bc[tor_b, 2]), TWO_PI)

    off1 = _axes_offsets(ang1_a, l1a, ang1_b, l1b, phi_t_a, phi_t_b, tol)
    if off1 is None:
        return None
    off2 = _axes_offsets(ang2_a, l2a, ang2_b, l2b, psi_t_a, psi_t_b, tol)
    if off2 is None:
        return None

    def torus_labels(labs, mask, r1ids, r2ids, o1, o2):
        base = [(l, int(p), int(q)) for l, p, q, m
                in zip(labs, r1ids, r2ids, mask) if m]
        return [b + (int(x), int(y)) for b, x, y in zip(base, o1, o2)]

    tla = torus_labels(la, tor_a, r1ids_a, r2ids_a, off1[0], off2[0])
    tlb = torus_labels(lb, tor_b, r1ids_b, r2ids_b, off1[1], off2[1])
    t = torus_translation_congruent(np.c_[phi_t_a, psi_t_a], tla,
                                    np.c_[phi_t_b, psi_t_b], tlb, tol)
    if t is None:
        return None
    return float(t[0]), float(t[1])


def two_plus_two_reduce(set_a: PointSet4, set_b: PointSet4,
                        plane_a: PlaneSpan, plane_b: PlaneSpan,
                        eps: float = EPS_EQ,
                        verify_eps: float = 1e-6) -> Verdict:
    """Decide congruence of two normalized 4D sets given that any congruence
    maps plane_a onto plane_b (and so the orthocomplements onto each other).

    In adapted coordinates the unknown map is block 2x2 + 2x2 with both
    blocks orthogonal and determinant +1 overall: either two rotations, or
    two reflections, which a fixed plane swap turns back into rotations.
    """
    fa = _complete_basis(plane_a.basis)
    fb = _complete_basis(plane_b.basis)
    ac0 = set_a.points @ fa.T
    bc = set_b.points @ fb.T
    la = list(set_a.labels) if set_a.labels is not None else [0] * len(set_a)
    lb = list(set_b.labels) if set_b.labels is not None else [0] * len(set_b)

    for swapped in (False, True):
        ac = ac0 @ SWAP_PLANES if swapped else ac0
        res = _block_match(ac, la, bc, lb, eps)
        if res is None:
            continue
        m = block_rotation(*res)
        if swapped:
            m = m @ SWAP_PLANES
        r = fb.T @ m @ fa
        if verify_rotation(set_a, set_b, r, verify_eps):
            return Verdict.yes(r, np.zeros(4))
    return Verdict.no("plane pair alignment")
