"""Iterative structure pruning of closest-pair graphs on the 3-sphere.

Starting from the closest-pair graph of a set on the unit sphere, the
pruning loop repeatedly discards vertices whose directed degrees are rare,
arcs whose directed edge figures are rare, and successor arcs not selected
by canonical axes, until one of three stable situations is reached:

* the closest-pair distance exceeds the separation threshold, so the
  surviving set is small enough for anchored dimension reduction,
* all directed edge figures are congruent and mirror symmetric,
* the arc set is edge transitive with two regular mark polygons, which
  hands over to orbit-cycle extraction.

Decisions are made on quantized invariants (tolerance-clustered angles and
frame coordinates), so congruent inputs run through identical stages; the
emitted stage keys make any divergence observable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .geom import EPS_EQ, CONSTANTS, match_multisets
from .condense import canonical_axes, prune_by_key, tolerance_cluster
from .cpgraph import closest_pair_graph

TWO_PI = 2.0 * math.pi
THETA_TOL = 1e-7            # angular tolerance for positions on mark circles

ROLE_SUCC = 0
ROLE_PRED = 1
ROLE_BOTH = 2

TAG_OUT = 1
TAG_IN = -1
TAG_BIDIRECTED = 0


@dataclass(frozen=True)
class DirectedGraph:
    """Arcs (ordered index pairs) over a point set, with successor sets.

    ``succ`` maps an arc to the tuple of its current successor arcs; it is
    None until successor angles get assigned.  Predecessors are derived:
    tu is a predecessor of uv exactly when uv is a successor of tu.
    """

    n: int
    arcs: frozenset
    succ: Optional[dict] = None
    _out: dict = field(default_factory=dict, compare=False, repr=False)
    _in: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        for a in self.arcs:
            self._out.setdefault(a[0], []).append(a)
            self._in.setdefault(a[1], []).append(a)
        for m in (self._out, self._in):
            for k in m:
                m[k].sort()

    def out_arcs(self, v) -> list:
        return self._out.get(v, [])

    def in_arcs(self, v) -> list:
        return self._in.get(v, [])

    def degrees(self, v) -> tuple:
        return (len(self._out.get(v, ())), len(self._in.get(v, ())))

    def pred(self) -> dict:
        p: dict = {a: [] for a in self.arcs}
        for a, succs in (self.succ or {}).items():
            for s in succs:
                p[s].append(a)
        for a in p:
            p[a].sort()
        return p


@dataclass
class WellSeparated:
    points: np.ndarray


@dataclass
class MirrorSymmetric:
    points: np.ndarray
    graph: DirectedGraph


@dataclass
class EdgeTransitive:
    points: np.ndarray
    graph: DirectedGraph        # carries the final successor sets
    delta: float
    alpha: float
    tau0: float


def _unit(v: np.ndarray) -> np.ndarray:
    return v / np.linalg.norm(v)


def _gs_rows(vectors, eps: float = 1e-9) -> Optional[np.ndarray]:
    """Gram-Schmidt; None if the vectors are (nearly) dependent."""
    rows: list = []
    for v in vectors:
        w = np.array(v, dtype=float)
        for r in rows:
            w -= (w @ r) * r
        nw = np.linalg.norm(w)
        if nw < eps:
            return None
        rows.append(w / nw)
    return np.array(rows)


def _complete_basis(rows) -> np.ndarray:
    """Extend orthonormal rows to a positively oriented basis of R^4."""
    out = [np.asarray(r, dtype=float) for r in rows]
    for k in range(4):
        if len(out) == 4:
            break
        w = np.eye(4)[k]
        for r in out:
            w = w - (w @ r) * r
        nw = np.linalg.norm(w)
        if nw > 1e-6:
            out.append(w / nw)
    frame = np.array(out)
    if np.linalg.det(frame) < 0:
        frame[-1] = -frame[-1]
    return frame


def _reflect_across_bisector(x, u, v):
    """Reflect x across the hyperplane of points equidistant from u and v."""
    d = v - u
    return x - (2.0 * (x @ d) / (d @ d)) * d


def _angle(a: np.ndarray, b: np.ndarray) -> float:
    c = float(a @ b) / (np.linalg.norm(a) * np.linalg.norm(b))
    return math.acos(min(1.0, max(-1.0, c)))


# ---------------------------------------------------------------------------
# figure codes


def _graph_angle_ids(points, graph: DirectedGraph, eps: float):
    """Cluster the successor angles of all arcs of the graph.

    For an arc (u, v), the successor angle of an out-arc (v, w), w != u, is
    the angle at v between the two.  Returns per-arc lists of
    (out_arc, cluster_id, value) plus the class representatives.
    """
    per_arc: dict = {}
    population: list = []
    for arc in sorted(graph.arcs):
        u, v = arc
        base = points[u] - points[v]
        vals = []
        for a in graph.out_arcs(v):
            if a[1] == u:
                continue
            vals.append((a, _angle(base, points[a[1]] - points[v])))
        per_arc[arc] = vals
        population.extend(t for _, t in vals)
    clu = tolerance_cluster(population, eps)
    tagged: dict = {}
    k = 0
    for arc in sorted(graph.arcs):
        lst = []
        for a, val in per_arc[arc]:
            lst.append((a, int(clu.ids[k]), val))
            k += 1
        tagged[arc] = lst
    return tagged, clu.reps


def _edge_figure_entries(points, graph: DirectedGraph, arc):
    """Figure points of an arc with direction masks; the head v is implicit.

    Mask bits: 1 for the tail u, 2 for endpoints of arcs out of v, 4 for
    sources of arcs into u.  The reversed arc vu shows up as bit 2 on u.
    """
    u, v = arc
    masks: dict = {u: 1}
    for a in graph.out_arcs(v):
        masks[a[1]] = masks.get(a[1], 0) | 2
    for a in graph.in_arcs(u):
        if a[0] != v:
            masks[a[0]] = masks.get(a[0], 0) | 4
    idxs = sorted(masks)
    return idxs, [masks[i] for i in idxs]


def _edge_figure_codes(points, graph: DirectedGraph, eps: float) -> dict:
    """Canonical code per arc, quantized jointly over the whole graph.

    The code is the minimum, over base vectors b from the out-neighbors of
    the head, of the sorted string of frame coordinates of all figure
    points, tagged with direction masks.  Arcs whose head has no second
    out-neighbor fall back to a two-vector frame plus a canonical cyclic
    code for the angular part.
    """
    coord_pop: list = []
    gap_pop: list = []
    prepared: dict = {}
    for arc in sorted(graph.arcs):
        u, v = arc
        idxs, masks = _edge_figure_entries(points, graph, arc)
        rel = points[idxs] - points[v]
        variants = []
        for a in graph.out_arcs(v):
            if a[1] == u:
                continue
            rows = _gs_rows([-points[v], points[u] - points[v],
                             points[a[1]] - points[v]])
            if rows is None:
                continue
            frame = _complete_basis(rows)
            coords = rel @ frame.T
            variants.append(("f", len(coord_pop), len(idxs)))
            coord_pop.extend(coords.ravel())
        if not variants:
            rows = _gs_rows([-points[v], points[u] - points[v]])
            if rows is None:
                raise AssertionError("arc endpoints collapse onto one ray")
            frame = _complete_basis(rows)
            c12 = rel @ rows.T
            perp = rel - c12 @ rows
            rho = np.linalg.norm(perp, axis=1)
            theta = np.mod(np.arctan2(perp @ frame[3], perp @ frame[2]), TWO_PI)
            theta[theta >= TWO_PI] = 0.0
            on = rho > 1e-9
            start = len(coord_pop)
            coord_pop.extend(c12.ravel())
            coord_pop.extend(rho)
            th = np.sort(theta[on])
            gaps = (np.diff(np.concatenate([th, [th[0] + TWO_PI]]))
                    if on.any() else np.zeros(0))
            variants.append(("p", start, len(idxs), on, theta, len(gap_pop)))
            gap_pop.extend(gaps)
        prepared[arc] = (masks, variants)
    cids = tolerance_cluster(coord_pop, eps).ids if coord_pop else np.zeros(0, int)
    gids = tolerance_cluster(gap_pop, THETA_TOL).ids if gap_pop else np.zeros(0, int)
    codes: dict = {}
    for arc in sorted(graph.arcs):
        masks, variants = prepared[arc]
        best = None
        for var in variants:
            if var[0] == "f":
                _, start, m = var
                entries = [tuple(int(c) for c in cids[start + 4 * i: start + 4 * i + 4])
                           + (masks[i],) for i in range(m)]
                cand = ("f", tuple(sorted(entries)))
            else:
                _, start, m, on, theta, gstart = var
                flat = [(int(cids[start + 2 * i]), int(cids[start + 2 * i + 1]),
                         int(cids[start + 2 * m + i]), masks[i]) for i in range(m)]
                axial = tuple(sorted(f for f, o in zip(flat, on) if not o))
                k = int(on.sum())
                if k:
                    labels = [f for f, o in zip(flat, on) if o]
                    ax = canonical_axes(theta[on], labels,
                                        gap_ids=gids[gstart:gstart + k])
                    angular = ax.code
                else:
                    angular = ()
                cand = ("p", axial, angular)
            if best is None or cand < best:
                best = cand
        codes[arc] = best
    return codes


def edge_figure_code(arc, graph: DirectedGraph, points, eps: float = EPS_EQ):
    """Congruence-type code of one directed edge figure.

    Codes computed against the same graph are comparable; equal codes mean
    congruent figures within tolerance.
    """
    return _edge_figure_codes(np.asarray(points, dtype=float), graph, eps)[arc]


def vertex_figure_code(v, graph: DirectedGraph, points, eps: float = EPS_EQ):
    """Congruence-type code of the directed vertex figure at v.

    Degrees 0 and 1 each have a single congruence type; degree 2 is
    classified by the angle between its legs; beyond that, the minimum over
    ordered base pairs of the sorted frame-coordinate string, with
    direction tags +1 out, -1 in, 0 both ways.
    """
    p = np.asarray(points, dtype=float)
    tags: dict = {}
    for a in graph.out_arcs(v):
        tags[a[1]] = TAG_OUT
    for a in graph.in_arcs(v):
        tags[a[0]] = TAG_BIDIRECTED if a[0] in tags else TAG_IN
    idxs = sorted(tags)
    c = len(idxs)
    if c == 0:
        return ("deg0",)
    if c == 1:
        return ("deg1", tags[idxs[0]])
    legs = p[idxs] - p[v]
    if c == 2:
        # quantize against every vertex angle of the graph so that codes
        # from two congruent graphs agree
        pop = []
        for w in range(graph.n):
            nbr = sorted({a[1] for a in graph.out_arcs(w)}
                         | {a[0] for a in graph.in_arcs(w)})
            for i in range(len(nbr)):
                for j in range(i + 1, len(nbr)):
                    pop.append(_angle(p[nbr[i]] - p[w], p[nbr[j]] - p[w]))
        ids = tolerance_cluster(pop, eps).ids
        mine = _angle(legs[0], legs[1])
        at = int(np.argmin(np.abs(np.asarray(pop) - mine)))
        return ("deg2", int(ids[at]), tuple(sorted(tags[i] for i in idxs)))
    coord_pop: list = []
    variants = []
    for i in range(c):
        for j in range(c):
            if i == j:
                continue
            rows = _gs_rows([-p[v], legs[i], legs[j]])
            if rows is None:
                continue
            frame = _complete_basis(rows)
            variants.append(len(coord_pop))
            coord_pop.extend((legs @ frame.T).ravel())
    if not variants:
        raise AssertionError("all base pairs of a high-degree vertex degenerate")
    cids = tolerance_cluster(coord_pop, eps).ids
    best = None
    for start in variants:
        entries = [tuple(int(x) for x in cids[start + 4 * i: start + 4 * i + 4])
                   + (tags[idxs[i]],) for i in range(c)]
        cand = tuple(sorted(entries))
        if best is None or cand < best:
            best = cand
    return ("deg3+", c, best)


# ---------------------------------------------------------------------------
# predecessor-successor figures


@dataclass
class PSFigure:
    """Mark circle of an arc: successors, and predecessors reflected onto it.

    Successor endpoints at angle alpha from the arc lie on a circle around
    the arc head; reflecting predecessors across the bisecting hyperplane
    of the arc puts them on the same circle.  Positions closer than the
    angular tolerance merge; distinct arcs occupy distinct points of the
    circle, so each position holds at most one successor and one
    predecessor.
    """

    arc: tuple
    center: np.ndarray
    frame: np.ndarray          # rows f1, f2 spanning the circle plane
    radius: float
    thetas: np.ndarray         # merged positions, ascending in [0, 2pi)
    roles: np.ndarray
    succ_at: tuple
    pred_at: tuple

    def torsions(self) -> list:
        """(tau, pred_arc, succ_arc) for every predecessor-successor pair,
        tau being the counterclockwise angle from predecessor to successor."""
        out = []
        for i in range(len(self.thetas)):
            if self.pred_at[i] is None:
                continue
            for j in range(len(self.thetas)):
                if self.succ_at[j] is None:
                    continue
                out.append(((self.thetas[j] - self.thetas[i]) % TWO_PI,
                            self.pred_at[i], self.succ_at[j]))
        return out

    def has_free_successor(self) -> bool:
        return any(s is not None and p is None
                   for s, p in zip(self.succ_at, self.pred_at))


def ps_figure(points, arc, succ_arcs, pred_arcs, delta: float,
              alpha: float) -> PSFigure:
    pu, pv = points[arc[0]], points[arc[1]]
    r1 = _unit(pv)
    q = pu - pv
    qr1 = float(q @ r1)
    w = q - qr1 * r1
    nw = np.linalg.norm(w)
    if nw < 1e-12:
        raise ValueError("arc through the origin has no mark circle")
    r2 = w / nw
    # center solves v.x = 1 - d^2/2 (x on the sphere at distance d from v)
    # and (u-v).x = (u-v).v + d^2 cos(alpha) (successor angle condition)
    b1 = 1.0 - delta * delta / 2.0
    b2 = float(q @ pv) + delta * delta * math.cos(alpha)
    x = b1
    y = (b2 - x * qr1) / nw
    center = x * r1 + y * r2
    radius = math.sqrt(max(1.0 - float(center @ center), 0.0))
    if radius < 1e-9:
        raise ValueError("mark circle degenerates to a point")
    frame = _complete_basis([r1, r2])
    f1, f2 = frame[2], frame[3]
    marks = [(points[a[1]], ROLE_SUCC, a) for a in succ_arcs]
    marks += [(_reflect_across_bisector(points[a[0]], pu, pv), ROLE_PRED, a)
              for a in pred_arcs]
    if not marks:
        raise ValueError("empty mark figure")
    th = np.array([math.atan2(float((x - center) @ f2),
                              float((x - center) @ f1)) % TWO_PI
                   for x, _, _ in marks])
    th[th >= TWO_PI] = 0.0      # x % 2pi rounds up to 2pi for tiny negative x
    order = np.argsort(th, kind="stable")
    pos_t: list = []
    pos_role: list = []
    pos_s: list = []
    pos_p: list = []

    def _absorb(k, role, a):
        pos_role[k] = role if pos_role[k] == role else ROLE_BOTH
        if role == ROLE_SUCC:
            pos_s[k] = a
        else:
            pos_p[k] = a

    for i in order:
        t, role, a = float(th[i]), marks[i][1], marks[i][2]
        if pos_t and t - pos_t[-1] <= THETA_TOL:
            _absorb(len(pos_t) - 1, role, a)
        else:
            pos_t.append(t)
            pos_role.append(role)
            pos_s.append(a if role == ROLE_SUCC else None)
            pos_p.append(a if role == ROLE_PRED else None)
    if len(pos_t) > 1 and pos_t[0] + TWO_PI - pos_t[-1] <= THETA_TOL:
        if pos_s[-1] is not None:
            _absorb(0, ROLE_SUCC, pos_s[-1])
        if pos_p[-1] is not None:
            _absorb(0, ROLE_PRED, pos_p[-1])
        pos_t.pop(), pos_role.pop(), pos_s.pop(), pos_p.pop()
    return PSFigure(arc, center, np.vstack([f1, f2]), radius,
                    np.array(pos_t), np.array(pos_role),
                    tuple(pos_s), tuple(pos_p))


def ps_figures(points, graph: DirectedGraph, delta: float, alpha: float) -> dict:
    """Figures of all arcs, built from the graph's successor sets."""
    pred = graph.pred()
    return {a: ps_figure(points, a, graph.succ[a], pred[a], delta, alpha)
            for a in sorted(graph.arcs)}


# ---------------------------------------------------------------------------
# the pruning loop


class _Run:
    def __init__(self, points, eps, delta0, trace):
        self.all_points = np.asarray(points, dtype=float)
        self.eps = eps
        self.delta0 = delta0
        self.keys: list = []
        self.trace = trace

    def emit(self, stage, key, note=""):
        self.keys.append((stage, key))
        if self.trace is not None:
            self.trace.append(f"{stage}: {note or key}")

    def run(self):
        alive = np.arange(len(self.all_points))
        while True:
            n = len(alive)
            if n == 1:
                self.emit("C1", (n, "separated"), f"single point, |A|={n}")
                return WellSeparated(self.all_points[alive])
            g = closest_pair_graph(self.all_points[alive], eps=self.eps)
            if g.delta > self.delta0:
                self.emit("C1", (n, "separated"),
                          f"delta {g.delta:.4g} > {self.delta0:.4g}, |A|={n}")
                return WellSeparated(self.all_points[alive])
            self.emit("C1", (n, "dense"), f"delta {g.delta:.4g}, |A|={n}")
            arcs = frozenset((i, j) for i, j in g.edges) | \
                frozenset((j, i) for i, j in g.edges)
            self.emit("C2", len(arcs), f"|D|={len(arcs)}")
            outcome = self._arc_rounds(self.all_points[alive], arcs, g.delta)
            if isinstance(outcome, np.ndarray):
                if not len(outcome) < n:
                    raise AssertionError("vertex pruning made no progress")
                alive = alive[outcome]
                continue
            return outcome

    def _arc_rounds(self, points, arcs, delta):
        """C3 through C11 on one closest-pair graph; either an index array
        of surviving vertices or a final exit."""
        # every arc-pruning pass lowers the common degree or splits the
        # vertex degree classes, so the degree bound caps the rounds
        for _ in range(CONSTANTS.kissing_3 * (CONSTANTS.kissing_2 + 2) + 4):
            graph = DirectedGraph(len(points), arcs)
            degs = [graph.degrees(v) for v in range(len(points))]
            res = prune_by_key(degs)
            self.emit("C3", res.histogram, f"degree classes {res.histogram}")
            if res.progressed:
                return np.array(res.indices, dtype=int)
            codes = _edge_figure_codes(points, graph, self.eps)
            arclist = sorted(arcs)
            rank = {c: i for i, c in enumerate(sorted(set(codes.values())))}
            res = prune_by_key([rank[codes[a]] for a in arclist])
            self.emit("C4", res.histogram, f"edge figure classes {res.histogram}")
            if res.progressed:
                arcs = frozenset(arclist[i] for i in res.indices)
                continue
            rep = arclist[0]
            if self._mirror_symmetric(points, graph, rep):
                self.emit("C5", "mirror", "edge figure is mirror symmetric")
                return MirrorSymmetric(points, graph)
            self.emit("C5", "chiral", "edge figure breaks mirror symmetry")
            angle_ids, angle_reps = _graph_angle_ids(points, graph, self.eps)
            alpha_id, alpha = self._choose_alpha(points, graph, rep,
                                                 angle_ids, angle_reps, delta)
            self.emit("C6", alpha_id, f"alpha class {alpha_id} ({alpha:.5f})")
            succ = {a: tuple(x for x, aid, _ in angle_ids[a] if aid == alpha_id)
                    for a in arclist}
            self.emit("C7", tuple(sorted({len(s) for s in succ.values()})),
                      "successor sets assigned")
            step = self._successor_rounds(points, arcs, succ, delta, alpha)
            if step[0] == "arcs":
                arcs = step[1]
                continue
            return step[1]
        raise AssertionError("arc pruning failed to terminate")

    def _mirror_symmetric(self, points, graph: DirectedGraph, arc) -> bool:
        u, v = arc
        outs = np.array([points[a[1]] for a in graph.out_arcs(v)])
        ins = np.array([points[a[0]] for a in graph.in_arcs(u)])
        if len(outs) != len(ins):
            return False
        reflected = np.array([_reflect_across_bisector(x, points[u], points[v])
                              for x in outs])
        return match_multisets(reflected, ins, 1e-7)

    def _choose_alpha(self, points, graph, rep, angle_ids, angle_reps, delta):
        """Smallest successor angle whose mark figure is not fully symmetric."""
        rep_ids = sorted({aid for _, aid, _ in angle_ids[rep]})
        for aid in rep_ids:
            alpha = float(angle_reps[aid])
            if math.sin(alpha) <= 1e-7:
                continue        # the circle at angle 0 or pi is a point
            succ_arcs = [a for a, i, _ in angle_ids[rep] if i == aid]
            pred_arcs = [t for t in graph.in_arcs(rep[0])
                         if any(a == rep and i == aid for a, i, _ in angle_ids[t])]
            fig = ps_figure(points, rep, succ_arcs, pred_arcs, delta, alpha)
            if fig.has_free_successor():
                return aid, alpha
        raise AssertionError("every successor angle is mirror symmetric "
                             "although the mirror test failed")

    def _successor_rounds(self, points, arcs, succ, delta, alpha):
        """C8 through C11: prune arcs by mark figure or successors by axes."""
        arclist = sorted(arcs)
        for _ in range(CONSTANTS.kissing_2 + 2):
            graph = DirectedGraph(len(points), arcs, succ)
            figures = ps_figures(points, graph, delta, alpha)
            gap_pop: list = []
            spans: dict = {}
            for a in arclist:
                th = figures[a].thetas
                gaps = np.diff(np.concatenate([th, [th[0] + TWO_PI]]))
                spans[a] = (len(gap_pop), len(gaps))
                gap_pop.extend(gaps)
            gids = tolerance_cluster(gap_pop, THETA_TOL).ids
            codes = {}
            for a in arclist:
                start, m = spans[a]
                fig = figures[a]
                ax = canonical_axes(fig.thetas, [int(r) for r in fig.roles],
                                    gap_ids=gids[start:start + m])
                codes[a] = ax.code
            rank = {c: i for i, c in enumerate(sorted(set(codes.values())))}
            res = prune_by_key([rank[codes[a]] for a in arclist])
            self.emit("C9", res.histogram, f"mark figure classes {res.histogram}")
            if res.progressed:
                return "arcs", frozenset(arclist[i] for i in res.indices)
            fig = figures[arclist[0]]
            if not fig.has_free_successor():
                raise AssertionError("no free successor position on the mark circle")
            k_s = sum(1 for s in fig.succ_at if s is not None)
            k_p = sum(1 for p in fig.pred_at if p is not None)
            if k_s == k_p and self._regular_kgons(fig):
                tau0 = min(t for t, _, _ in fig.torsions() if t > THETA_TOL)
                self.emit("C10", ("transitive", k_s), f"two regular {k_s}-gons")
                return "exit", EdgeTransitive(points, graph, delta, alpha, tau0)
            self.emit("C10", ("mixed", k_s, k_p), "polygons not both regular")
            succ = self._axes_prune(figures, arclist, succ)
            self.emit("C11", tuple(sorted({len(s) for s in succ.values()})),
                      "successors per arc after axes pruning")
        raise AssertionError("successor pruning failed to terminate")

    @staticmethod
    def _regular_kgons(fig: PSFigure) -> bool:
        for occupied in (fig.succ_at, fig.pred_at):
            th = np.sort([fig.thetas[i] for i in range(len(fig.thetas))
                          if occupied[i] is not None])
            if len(th) <= 1:
                continue
            gaps = np.diff(np.concatenate([th, [th[0] + TWO_PI]]))
            if np.max(np.abs(gaps - TWO_PI / len(th))) > THETA_TOL:
                return False
        return True

    @staticmethod
    def _axes_prune(figures, arclist, succ) -> dict:
        """Keep the successors hit by the canonical axes after rotating them
        counterclockwise onto the first free successor position."""
        new_succ = {}
        before = sum(len(succ[a]) for a in arclist)
        for a in arclist:
            fig = figures[a]
            ax = canonical_axes(fig.thetas, [int(r) for r in fig.roles], THETA_TOL)
            free = [(fig.thetas[i] - ax.base_angle) % ax.spacing
                    for i in range(len(fig.thetas))
                    if fig.succ_at[i] is not None and fig.pred_at[i] is None]
            dstar = min(free)
            kept = []
            for i in range(len(fig.thetas)):
                if fig.succ_at[i] is None:
                    continue
                off = (fig.thetas[i] - ax.base_angle - dstar) % ax.spacing
                if off <= THETA_TOL or ax.spacing - off <= THETA_TOL:
                    kept.append(fig.succ_at[i])
            new_succ[a] = tuple(sorted(kept))
        after = sum(len(new_succ[a]) for a in arclist)
        if not 0 < after < before:
            raise AssertionError("axes pruning must shrink the successor sets")
        return new_succ


def iterative_prune(points, eps: float = EPS_EQ,
                    delta0: float = CONSTANTS.delta0,
                    trace: Optional[list] = None):
    """Prune a set on the unit sphere down to one of the three exits.

    Returns (exit, stage_keys) where exit is WellSeparated, MirrorSymmetric
    or EdgeTransitive.  Congruent inputs produce equal stage keys, so a key
    mismatch between two runs certifies non-congruence.
    """
    pts = np.asarray(points, dtype=float)
    if len(pts) < 2:
        raise ValueError("need at least two points")
    run = _Run(pts, eps, delta0, trace)
    return run.run(), run.keys
