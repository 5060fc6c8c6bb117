"""Turning structured closest-pair graphs into great circles or fewer points.

The pruning loop ends in one of two structured situations besides plain
separation.  A mirror-symmetric graph is an orbit of a reflection group;
its components are either eccentric (condense to their centroids), regular
polygons (their circumcircles), three-dimensional (two antipodal normal
points), or toroidal grids (two orthogonal great circles each).  An
edge-transitive graph decomposes into orbit cycles of a single rotation
each; every cycle yields the invariant great circle in which the rotation
turns by its smaller angle.

Both paths emit stage keys for the lockstep comparison and are equivariant:
a rotation of the input rotates the output.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geom import (EPS_EQ, CONSTANTS, PlaneSpan, Rotation4,
                   DegenerateRotationError, decompose_rotation)
from .condense import tolerance_cluster
from .iterprune import (TWO_PI, THETA_TOL, DirectedGraph, ps_figures,
                        _complete_basis, _gs_rows)


@dataclass
class CondensedPoints:
    """Replacement point set produced by the mirror reduction."""

    points: np.ndarray


@dataclass
class GreatCircles:
    """A family of great circles through the origin."""

    circles: list


@dataclass
class OrbitCycle:
    """A cyclic path that is the orbit of its first vertex under a rotation.

    ``circle`` spans the invariant plane in which the rotation turns by the
    smaller of its two angles.
    """

    vertices: tuple
    rotation: Rotation4
    circle: PlaneSpan


# ---------------------------------------------------------------------------
# reflection-group case


def _components(n: int, undirected_edges) -> list:
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i, j in undirected_edges:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[ri] = rj
    groups: dict = {}
    for v in range(n):
        groups.setdefault(find(v), []).append(v)
    # only vertices that touch an edge belong to the graph
    touched = {v for e in undirected_edges for v in e}
    return sorted(vs for vs in groups.values() if set(vs) & touched)


def _trace_cycle(adj: dict, comp) -> list:
    """Vertex order of a single cycle component (every degree is 2)."""
    start = min(comp)
    order = [start]
    prev, cur = None, start
    while True:
        step = min(w for w in adj[cur] if w != prev) if prev is not None \
            else min(adj[cur])
        if step == start:
            break
        order.append(step)
        prev, cur = cur, step
    if len(order) != len(comp):
        raise AssertionError("degree-2 component is not a single cycle")
    return order


def _cycle_rotation(pts: np.ndarray, order: list, eps: float) -> Rotation4:
    """The rotation advancing a cycle one step, fitted from spread triples."""
    ell = len(order)
    m = max(1, ell // 3)
    orbit = pts[order]
    for shift in range(min(ell, 8)):
        tmpl = [order[(shift + j * m) % ell] for j in range(3)]
        targ = [order[(shift + j * m + 1) % ell] for j in range(3)]
        try:
            rot = fit_rotation(pts[tmpl], pts[targ], eps)
        except ValueError:
            continue
        err = np.max(np.abs(orbit @ rot.matrix.T - np.roll(orbit, -1, axis=0)))
        if err <= 1e-7:
            return rot
    raise AssertionError("no step rotation advances the mirror cycle")


def mirror_reduce(points, graph: DirectedGraph, eps: float = EPS_EQ):
    """Condense a mirror-symmetric graph; returns (result, stage_keys).

    The result is CondensedPoints (components had eccentric centroids, or
    were three-dimensional and got replaced by their antipodal hyperplane
    normals) or GreatCircles (regular polygons or toroidal grids).
    """
    pts = np.asarray(points, dtype=float)
    keys: list = []
    edges = {(min(a), max(a)) for a in graph.arcs}
    comps = _components(len(pts), edges)
    sizes = tuple(sorted(len(c) for c in comps))
    keys.append(("R1", (len(comps), sizes)))

    centers = np.array([pts[c].mean(axis=0) for c in comps])
    if np.max(np.linalg.norm(centers, axis=1)) > 1e-7:
        keys.append(("R2", "eccentric"))
        return CondensedPoints(centers), keys
    keys.append(("R2", "centered"))

    ranks = []
    svds = []
    for c in comps:
        s = np.linalg.svd(pts[c], compute_uv=False)
        vt = np.linalg.svd(pts[c], full_matrices=False)[2]
        if vt.shape[0] < 4:
            vt = _complete_basis(vt)
        ranks.append(int(np.sum(s > 1e-7 * s[0])))
        svds.append(vt)
    if len(set(ranks)) != 1:
        raise AssertionError("components of a mirror-symmetric graph must "
                             "be congruent, got mixed ranks")
    rank = ranks[0]
    keys.append(("R-rank", rank))

    if rank == 2:
        circles = []
        ks = set()
        for c, vt in zip(comps, svds):
            e1, e2 = vt[0], vt[1]
            ang = np.sort(np.mod(np.arctan2(pts[c] @ e2, pts[c] @ e1), TWO_PI))
            gaps = np.diff(np.concatenate([ang, [ang[0] + TWO_PI]]))
            if np.max(np.abs(gaps - TWO_PI / len(c))) > 1e-7:
                raise AssertionError("planar component is not a regular polygon")
            ks.add(len(c))
            circles.append(PlaneSpan.from_vectors(e1, e2))
        keys.append(("R3", tuple(sorted(ks))))
        return GreatCircles(sorted(circles, key=lambda p: p.key())), keys

    if rank == 3:
        normals = []
        for vt in svds:
            n = vt[3]
            normals.append(n)
            normals.append(-n)
        keys.append(("R4", len(normals)))
        return CondensedPoints(np.array(normals)), keys

    # rank 4: toroidal grids (two orthogonal edge classes each), or closed
    # orbit cycles sampled so finely that their chirality defect fell below
    # the mirror tolerance
    circles = []
    adj = {v: set() for e in edges for v in e}
    for i, j in edges:
        adj[i].add(j)
        adj[j].add(i)
    if all(len(adj[v]) == 2 for c in comps for v in c):
        lens = []
        for c in comps:
            order = _trace_cycle(adj, c)
            rot = _cycle_rotation(pts, order, eps)
            dec = decompose_rotation(rot.matrix, eps)
            if dec.isoclinic:
                raise AssertionError("isoclinic mirror cycle should have "
                                     "been planar")
            circles.append(dec.planes[0])
            lens.append(len(order))
        keys.append(("R5", ("cycles", tuple(sorted(lens)))))
        return GreatCircles(sorted(circles, key=lambda p: p.key())), keys
    for c in comps:
        u = min(v for v in c if v in adj)
        nbrs = sorted(adj[u])
        if len(nbrs) != 4:
            raise AssertionError("full-dimensional mirror component is not "
                                 "a toroidal grid")
        legs = pts[nbrs] - pts[u]
        unit = legs / np.linalg.norm(legs, axis=1, keepdims=True)
        dots = np.abs(unit @ unit.T)
        np.fill_diagonal(dots, 0.0)
        mates = [[j for j in range(4) if dots[i, j] > 1e-7] for i in range(4)]
        counts = sorted(len(m) for m in mates)
        if counts == [1, 1, 1, 1]:
            pairs = {tuple(sorted((i, mates[i][0]))) for i in range(4)}
        elif counts == [0, 0, 1, 1]:
            # one grid circle is a square, its legs look orthogonal too;
            # pair the non-square legs directly, the rest by elimination
            i, j = (k for k in range(4) if mates[k])
            pairs = {(i, j), tuple(k for k in range(4) if k not in (i, j))}
        elif counts == [0, 0, 0, 0]:
            # both grid circles are squares of equal radius (a 4-cube orbit):
            # the splitting is genuinely ambiguous, and the three candidate
            # splittings form one symmetry orbit, so emit them all
            pairs = {(0, 1), (2, 3), (0, 2), (1, 3), (0, 3), (1, 2)}
        else:
            raise AssertionError("edge classes do not split two against two "
                                 "by orthogonality")
        if len({k for p in pairs for k in p}) != 4:
            raise AssertionError("edge pairing does not cover all four legs")
        for i, j in sorted(pairs):
            circles.append(PlaneSpan.from_vectors(legs[i], legs[j]))
    keys.append(("R5", len(circles)))
    return GreatCircles(sorted(circles, key=lambda p: p.key())), keys


# ---------------------------------------------------------------------------
# orbit-cycle case


def fit_rotation(template, target, eps: float = EPS_EQ) -> Rotation4:
    """The unique rotation mapping one 3-point frame onto another.

    Both triples must span a 3-dimensional subspace together with the
    origin (three points not on a common great circle); the target must be
    congruent to the template.
    """
    a = np.asarray(template, dtype=float)
    b = np.asarray(target, dtype=float)
    if a.shape != (3, 4) or b.shape != (3, 4):
        raise ValueError("expected two 3x4 point triples")
    rows_a = _gs_rows(a, eps=1e-9)
    rows_b = _gs_rows(b, eps=1e-9)
    if rows_a is None or rows_b is None:
        raise ValueError("triple lies on a great circle, rotation not unique")
    fa = _complete_basis(rows_a)
    fb = _complete_basis(rows_b)
    r = fb.T @ fa
    if np.max(np.abs(a @ r.T - b)) > max(eps, 1e-9) * 10:
        raise ValueError("target triple is not congruent to the template")
    return Rotation4(r)


def orbit_circles(points, graph: DirectedGraph, delta: float, alpha: float,
                  tau0: float, eps: float = EPS_EQ):
    """Trace all orbit cycles of an edge-transitive graph.

    Every triple (a1, a2, a3) with a2a3 a successor of a1a2 starts a unique
    cycle in which consecutive quadruples all share the anchor torsion
    tau0.  Cycles are traced once (the step map is a permutation of the
    triples) and deduplicated by vertex set.  Returns (cycles, stage_keys).
    """
    pts = np.asarray(points, dtype=float)
    figures = ps_figures(pts, graph, delta, alpha)
    succ_pos: dict = {}
    pred_pos: dict = {}
    for a, fig in figures.items():
        succ_pos[a] = {arc: i for i, arc in enumerate(fig.succ_at)
                       if arc is not None}
        pred_pos[a] = {arc: i for i, arc in enumerate(fig.pred_at)
                       if arc is not None}

    def next_arc(prev, cur):
        fig = figures[cur]
        ti = pred_pos[cur].get(prev)
        if ti is None:
            raise AssertionError("traced arc lost its predecessor mark")
        hits = []
        for arc, j in succ_pos[cur].items():
            tau = (fig.thetas[j] - fig.thetas[ti]) % TWO_PI
            d = abs(tau - tau0)
            if min(d, TWO_PI - d) <= THETA_TOL:
                hits.append(arc)
        if len(hits) != 1:
            raise AssertionError(f"torsion anchor hit {len(hits)} successors")
        return hits[0]

    visited: set = set()
    cycles: list = []
    by_vertex_set: dict = {}
    n = len(pts)
    for a in sorted(graph.arcs):
        for b in graph.succ[a]:
            if (a, b) in visited:
                continue
            states = []
            state = (a, b)
            while True:
                if state in visited:
                    raise AssertionError("orbit trace crossed another cycle")
                states.append(state)
                visited.add(state)
                nxt = next_arc(*state)
                state = (state[1], nxt)
                if state == (a, b):
                    break
                if len(states) > n:
                    raise AssertionError("orbit cycle failed to close "
                                         "within the point count")
            verts = tuple(s[0][0] for s in states)
            if len(set(verts)) != len(verts):
                raise AssertionError("orbit cycle revisits a vertex")
            key = frozenset(verts)
            if key in by_vertex_set:
                continue
            ell = len(verts)
            rot = fit_rotation(pts[list(verts[:3])],
                               pts[[verts[1], verts[2], verts[3 % ell]]], eps)
            orbit = pts[list(verts)]
            err = np.max(np.abs(orbit @ rot.matrix.T - np.roll(orbit, -1, axis=0)))
            if err > 1e-7:
                raise AssertionError("fitted rotation does not advance the "
                                     f"cycle (error {err:.2g})")
            try:
                dec = decompose_rotation(rot.matrix, eps)
            except DegenerateRotationError as exc:
                raise AssertionError("orbit rotation is degenerate") from exc
            if dec.isoclinic:
                raise AssertionError("orbit rotation is isoclinic, points "
                                     "would be concyclic")
            if abs(dec.angles[0]) <= 1e-9:
                raise AssertionError("orbit rotation fixes a plane pointwise")
            cycles.append(OrbitCycle(verts, rot, dec.planes[0]))
            by_vertex_set[key] = cycles[-1]
    lengths = tuple(sorted(len(c.vertices) for c in cycles))
    keys = [("O", (len(cycles), lengths))]
    if delta <= CONSTANTS.delta0 and len(cycles) > len(pts) / CONSTANTS.circle_factor:
        raise AssertionError("more orbit cycles than the packing bound allows")
    return cycles, keys


# ---------------------------------------------------------------------------
# reflection groups with bounded fundamental regions

_S5 = math.sqrt(5.0)

COXETER_NORMALS = {
    "A4": (np.array([
        [1.0, 0.0, 0.0, 0.0],
        [-0.5, math.sqrt(3.0) / 2.0, 0.0, 0.0],
        [0.0, -1.0 / math.sqrt(3.0), math.sqrt(2.0 / 3.0), 0.0],
        [0.0, 0.0, -math.sqrt(3.0) / (2.0 * math.sqrt(2.0)),
         math.sqrt(5.0) / (2.0 * math.sqrt(2.0))],
    ]), 0.2236067977),
    "C4": (np.array([
        [1.0, 0.0, 0.0, 0.0],
        [-1.0 / math.sqrt(2.0), 1.0 / math.sqrt(2.0), 0.0, 0.0],
        [0.0, -1.0 / math.sqrt(2.0), 1.0 / math.sqrt(2.0), 0.0],
        [0.0, 0.0, -1.0 / math.sqrt(2.0), 1.0 / math.sqrt(2.0)],
    ]), 0.1429000737),
    "B4": (np.array([
        [1.0, 0.0, 0.0, 0.0],
        [-0.5, math.sqrt(3.0) / 2.0, 0.0, 0.0],
        [0.0, -1.0 / math.sqrt(3.0), math.sqrt(2.0 / 3.0), 0.0],
        [0.0, -1.0 / math.sqrt(3.0), -1.0 / math.sqrt(6.0),
         1.0 / math.sqrt(2.0)],
    ]), 0.1889822365),
    "F4": (np.array([
        [1.0, 0.0, 0.0, 0.0],
        [-0.5, math.sqrt(3.0) / 2.0, 0.0, 0.0],
        [0.0, -math.sqrt(2.0 / 3.0), 1.0 / math.sqrt(3.0), 0.0],
        [0.0, 0.0, -math.sqrt(3.0) / 2.0, 0.5],
    ]), 0.009671356812),
    "G4": (np.array([
        [1.0, 0.0, 0.0, 0.0],
        [-(1.0 + _S5) / 4.0, math.sqrt(10.0 - 2.0 * _S5) / 4.0, 0.0, 0.0],
        [0.0, -2.0 / math.sqrt(10.0 - 2.0 * _S5),
         math.sqrt(6.0 - 2.0 * _S5) / math.sqrt(10.0 - 2.0 * _S5), 0.0],
        [0.0, 0.0,
         -math.sqrt(10.0 - 2.0 * _S5) / (2.0 * math.sqrt(6.0 - 2.0 * _S5)),
         math.sqrt(14.0 - 6.0 * _S5) / (2.0 * math.sqrt(6.0 - 2.0 * _S5))],
    ]), 0.03910328003),
    "A3xA1": (np.array([
        [1.0, 0.0, 0.0, 0.0],
        [-0.5, math.sqrt(3.0) / 2.0, 0.0, 0.0],
        [0.0, -1.0 / math.sqrt(3.0), math.sqrt(2.0 / 3.0), 0.0],
        [0.0, 0.0, 0.0, 1.0],
    ]), 0.3015113445),
    "C3xA1": (np.array([
        [1.0, 0.0, 0.0, 0.0],
        [-1.0 / math.sqrt(2.0), 1.0 / math.sqrt(2.0), 0.0, 0.0],
        [0.0, -1.0 / math.sqrt(2.0), 1.0 / math.sqrt(2.0), 0.0],
        [0.0, 0.0, 0.0, 1.0],
    ]), 0.2108874992),
    "G3xA1": (np.array([
        [1.0, 0.0, 0.0, 0.0],
        [-(1.0 + _S5) / 4.0, math.sqrt(10.0 - 2.0 * _S5) / 4.0, 0.0, 0.0],
        [0.0, -2.0 / math.sqrt(10.0 - 2.0 * _S5),
         math.sqrt(6.0 - 2.0 * _S5) / math.sqrt(10.0 - 2.0 * _S5), 0.0],
        [0.0, 0.0, 0.0, 1.0],
    ]), 0.1303737577),
}


@dataclass(frozen=True)
class CoxeterGroupSpec:
    """A rank-4 reflection group given by the outward normals of the walls
    of its fundamental region, with the tabulated inradius for reference."""

    name: str
    normals: np.ndarray
    tabulated_inradius: float


COXETER_GROUPS = tuple(CoxeterGroupSpec(name, normals, r0)
                       for name, (normals, r0) in COXETER_NORMALS.items())


def coxeter_inradius(spec: CoxeterGroupSpec) -> float:
    """Inscribed radius of the fundamental region on the unit sphere.

    Shift every wall hyperplane inward (against its outward normal) by one
    unit; the walls then meet in a single point p equidistant from all of
    them, and scaling p back to the sphere scales that distance to 1/|p|.
    """
    n = np.asarray(spec.normals, dtype=float)
    if n.shape != (4, 4):
        raise ValueError("need exactly four wall normals")
    p = np.linalg.solve(n, -np.ones(4))
    return 1.0 / float(np.linalg.norm(p))


def separation_floor() -> float:
    """Smallest closest-pair distance any of the bounded reflection groups
    allows for its orbits: twice the smallest recomputed inradius."""
    return 2.0 * min(coxeter_inradius(g) for g in COXETER_GROUPS)
