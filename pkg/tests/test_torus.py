"""Translation congruence on the 2-torus and the 2+2 block reduction."""

import numpy as np
import pytest

from hypercongruence.geom import (
    PlaneSpan,
    PointSet4,
    block_rotation,
    match_multisets,
)
from hypercongruence.harness import random_rotation
from hypercongruence.iterprune import TWO_PI
from hypercongruence.torus import (
    SWAP_PLANES,
    canonical_set_torus,
    torus_translation_congruent,
    two_plus_two_reduce,
)

E12 = PlaneSpan(np.array([[1.0, 0, 0, 0], [0, 1.0, 0, 0]]))


def wrap_dist(a, b, period=TWO_PI):
    d = np.mod(np.asarray(a) - np.asarray(b), period)
    return np.minimum(d, period - d)


def brute_symmetries(pos, labels, eps=1e-7):
    """All torus translations mapping the labeled set onto itself."""
    pos = np.mod(np.asarray(pos, float), TWO_PI)
    out = []
    base = sorted(range(len(pos)), key=lambda i: str(labels[i]))
    i0 = base[0]
    for j in range(len(pos)):
        if labels[j] != labels[i0]:
            continue
        t = np.mod(pos[j] - pos[i0], TWO_PI)
        shifted = np.mod(pos + t, TWO_PI)
        used = [False] * len(pos)
        ok = True
        for k in range(len(pos)):
            hit = -1
            for m in range(len(pos)):
                if used[m] or labels[m] != labels[k]:
                    continue
                if np.all(wrap_dist(shifted[k], pos[m]) < eps):
                    hit = m
                    break
            if hit < 0:
                ok = False
                break
            used[hit] = True
        if ok:
            out.append(tuple(np.round(t, 6)))
    return set(out)


class TestCanonicalSet:
    def test_unique_labels_singleton(self, rng):
        pos = rng.uniform(0, TWO_PI, size=(10, 2))
        idx, keys = canonical_set_torus(pos, list(range(10)))
        assert len(idx) == 1
        assert keys

    def test_single_point(self):
        idx, _ = canonical_set_torus(np.array([[1.0, 2.0]]), ["a"])
        assert list(idx) == [0]

    def test_equivariance(self, rng):
        pos = rng.uniform(0, TWO_PI, size=(24, 2))
        pos_b = np.mod(pos + rng.uniform(0, TWO_PI, size=2), TWO_PI)
        ia, ka = canonical_set_torus(pos, [0] * 24)
        ib, kb = canonical_set_torus(pos_b, [0] * 24)
        assert ka == kb
        assert sorted(ia.tolist()) == sorted(ib.tolist())

    def test_full_lattice_kept_whole(self):
        # a grid is its own translation orbit, nothing can be pruned
        g = np.array([[i * TWO_PI / 4, j * TWO_PI / 4]
                      for i in range(4) for j in range(4)])
        idx, _ = canonical_set_torus(g, [0] * 16)
        assert len(idx) == 16

    def test_canonical_orbit_size_matches_symmetry_group(self, rng):
        cases = []
        g = np.array([[i * TWO_PI / 3, j * TWO_PI / 3]
                      for i in range(3) for j in range(3)])
        cases.append((g, [0] * 9))
        # sublattice labels cut the symmetry down to the coarse lattice
        cases.append((g, [i // 3 for i in range(9)]))
        cloud = rng.uniform(0, TWO_PI, size=(7, 2))
        cases.append((cloud, [0] * 7))
        # lattice + generic offset cloud: only the identity survives
        mix = np.vstack([g, cloud])
        cases.append((mix, [0] * 16))
        for pos, labs in cases:
            idx, _ = canonical_set_torus(pos, labs)
            syms = brute_symmetries(pos, labs)
            assert len(idx) == len(syms)

    def test_canonical_set_is_one_orbit(self, rng):
        # two lattice orbits with different labels: the symmetry group is
        # the full lattice, and the canonical set is one of its orbits
        g = np.array([[i * TWO_PI / 3, j * TWO_PI / 3]
                      for i in range(3) for j in range(3)])
        jitter = rng.uniform(0, TWO_PI, size=2)
        other = rng.uniform(0, TWO_PI, size=2)
        pos = np.vstack([np.mod(g + jitter, TWO_PI),
                         np.mod(g + other, TWO_PI)])
        labs = ["g"] * 9 + ["c"] * 9
        idx, _ = canonical_set_torus(pos, labs)
        syms = brute_symmetries(pos, labs)
        assert len(idx) == len(syms) == 9
        # differences between canonical members enumerate the group
        diffs = {tuple(np.round(np.mod(pos[i] - pos[idx[0]], TWO_PI), 6))
                 for i in idx}
        assert diffs == syms


class TestTranslationCongruent:
    def test_roundtrip(self, rng):
        pos = rng.uniform(0, TWO_PI, size=(24, 2))
        t_true = rng.uniform(0, TWO_PI, size=2)
        pos_b = np.mod(pos + t_true, TWO_PI)
        t = torus_translation_congruent(pos, [0] * 24, pos_b, [0] * 24)
        assert t is not None
        assert np.max(wrap_dist(t, t_true)) < 1e-7

    def test_perturbed_rejected(self, rng):
        pos = rng.uniform(0, TWO_PI, size=(24, 2))
        pos_b = np.mod(pos + [0.4, 0.9], TWO_PI)
        pos_b[3, 0] += 1e-3
        assert torus_translation_congruent(pos, [0] * 24, pos_b,
                                           [0] * 24) is None

    def test_labels_respected(self, rng):
        pos = rng.uniform(0, TWO_PI, size=(24, 2))
        pos_b = np.mod(pos + [1.0, 0.2], TWO_PI)
        labs = [i % 3 for i in range(24)]
        assert torus_translation_congruent(pos, labs, pos_b, labs,
                                           1e-7) is not None
        labs2 = list(labs)
        labs2[0], labs2[1] = labs2[1], labs2[0]
        assert torus_translation_congruent(pos, labs, pos_b, labs2,
                                           1e-7) is None

    def test_square_lattice_translation_mod_lattice(self):
        g = np.array([[i * TWO_PI / 4, j * TWO_PI / 4]
                      for i in range(4) for j in range(4)])
        gb = np.mod(g + [0.3, 1.1], TWO_PI)
        t = torus_translation_congruent(g, [0] * 16, gb, [0] * 16)
        assert t is not None
        # any lattice representative of the true shift is acceptable
        assert np.max(wrap_dist(t, [0.3, 1.1], period=TWO_PI / 4)) < 1e-7

    def test_rect_lattice(self):
        g = np.array([[i * TWO_PI / 4, j * TWO_PI / 2]
                      for i in range(4) for j in range(2)])
        gb = np.mod(g + [0.77, 0.2], TWO_PI)
        t = torus_translation_congruent(g, [0] * 8, gb, [0] * 8)
        assert t is not None
        shifted = np.mod(g + t, TWO_PI)
        ok = [any(np.all(wrap_dist(s, q) < 1e-7) for q in gb)
              for s in shifted]
        assert all(ok)

    def test_size_mismatch(self):
        assert torus_translation_congruent([[0, 0]], ["a"], [], []) is None


def embed(phi, psi, r1, r2):
    return np.c_[r1 * np.cos(phi), r1 * np.sin(phi),
                 r2 * np.cos(psi), r2 * np.sin(psi)]


class TestTwoPlusTwo:
    def mixed(self, rng):
        """Torus points at one radius pair plus points on both core circles."""
        phi = rng.uniform(0, TWO_PI, 30)
        psi = rng.uniform(0, TWO_PI, 30)
        return np.r_[embed(phi, psi, 0.8, 0.6),
                     embed(rng.uniform(0, TWO_PI, 5), np.zeros(5), 1.0, 0.0),
                     embed(np.zeros(4), rng.uniform(0, TWO_PI, 4), 0.0, 1.0)]

    def test_direct_block_rotation(self, rng):
        a = self.mixed(rng)
        b = a @ block_rotation(0.7, 1.3).T
        v = two_plus_two_reduce(PointSet4(a),
                                PointSet4(b[rng.permutation(len(b))]),
                                E12, E12)
        assert v.congruent
        assert match_multisets(a @ v.rotation.T, b, 1e-6)

    def test_plane_swapping_rotation(self, rng):
        a = self.mixed(rng)
        m2 = block_rotation(0.4, 2.1) @ SWAP_PLANES
        assert np.linalg.det(m2) == pytest.approx(1.0)
        b = a @ m2.T
        v = two_plus_two_reduce(PointSet4(a), PointSet4(b), E12, E12)
        assert v.congruent
        assert match_multisets(a @ v.rotation.T, b, 1e-6)

    def test_general_planes_by_conjugation(self, rng):
        a = self.mixed(rng)
        b = a @ block_rotation(0.7, 1.3).T
        ra, rb = random_rotation(rng), random_rotation(rng)
        pa = PlaneSpan(E12.basis @ ra.T)
        pb = PlaneSpan(E12.basis @ rb.T)
        v = two_plus_two_reduce(PointSet4(a @ ra.T), PointSet4(b @ rb.T),
                                pa, pb)
        assert v.congruent
        assert match_multisets(a @ ra.T @ v.rotation.T, b @ rb.T, 1e-6)

    def test_circles_only(self):
        a = np.r_[embed(np.arange(6) * TWO_PI / 6, np.zeros(6), 1.0, 0.0),
                  embed(np.zeros(4), np.arange(4) * TWO_PI / 4 + 0.3,
                        0.0, 1.0)]
        b = a @ block_rotation(TWO_PI / 6, 0.9).T
        v = two_plus_two_reduce(PointSet4(a), PointSet4(b), E12, E12)
        assert v.congruent
        assert match_multisets(a @ v.rotation.T, b, 1e-6)

    def test_radius_scaled_rejected(self, rng):
        a = self.mixed(rng)
        b = a @ block_rotation(0.7, 1.3).T
        b[0] *= 1.001
        v = two_plus_two_reduce(PointSet4(a), PointSet4(b), E12, E12)
        assert not v.congruent
        assert v.stage

    def test_inconsistent_plane_shifts_rejected(self, rng):
        phi = rng.uniform(0, TWO_PI, 30)
        psi = rng.uniform(0, TWO_PI, 30)
        a = self.mixed2(phi, psi, rng)
        # shift only the torus points in plane 1; the circle points stay,
        # so no single block rotation explains both
        bmix = np.r_[embed(np.mod(phi + 0.5, TWO_PI), psi, 0.8, 0.6),
                     a[30:]]
        v = two_plus_two_reduce(PointSet4(a), PointSet4(bmix), E12, E12)
        assert not v.congruent

    def mixed2(self, phi, psi, rng):
        return np.r_[embed(phi, psi, 0.8, 0.6),
                     embed(rng.uniform(0, TWO_PI, 5), np.zeros(5), 1.0, 0.0),
                     embed(np.zeros(4), rng.uniform(0, TWO_PI, 4), 0.0, 1.0)]

    def test_flat_grid(self):
        ij = np.array([[i, j] for i in range(8) for j in range(8)], float)
        g = embed(ij[:, 0] * TWO_PI / 8, ij[:, 1] * TWO_PI / 8,
                  np.sqrt(0.5), np.sqrt(0.5))
        gb = g @ block_rotation(0.3, 0.44).T
        v = two_plus_two_reduce(PointSet4(g), PointSet4(gb), E12, E12)
        assert v.congruent
        assert match_multisets(g @ v.rotation.T, gb, 1e-6)
