"""Labeled congruence in reduced dimensions and the 1+3 anchor reduction."""

import math

import numpy as np

from conftest import rot3
from hypercongruence.geom import PointSet4, match_multisets
from hypercongruence.harness import random_rotation
from hypercongruence.iterprune import TWO_PI
from hypercongruence.lowdim import (
    congruence_2d_labeled,
    congruence_3d_labeled,
    one_plus_three_reduce,
)


class TestCircle:
    def test_regular_polygon_any_shift(self):
        ang = np.arange(7) * TWO_PI / 7
        t = congruence_2d_labeled(ang, [0] * 7, np.mod(ang + 1.3, TWO_PI),
                                  [0] * 7, 1e-9)
        assert t is not None
        assert np.allclose(np.sort(np.mod(ang + t, TWO_PI)),
                           np.sort(np.mod(ang + 1.3, TWO_PI)), atol=1e-9)

    def test_identical_sequences_zero_shift(self):
        ang = np.array([0.3, 1.1, 4.0])
        t = congruence_2d_labeled(ang, "xyz", ang, "xyz", 1e-9)
        assert t is not None
        assert np.allclose(np.sort(np.mod(ang + t, TWO_PI)),
                           np.sort(ang), atol=1e-9)

    def test_distinct_labels_pin_exact_shift(self):
        ang = np.arange(7) * TWO_PI / 7
        labs = list(range(7))
        t = congruence_2d_labeled(ang, labs, np.mod(ang + 1.3, TWO_PI),
                                  labs, 1e-9)
        assert t is not None
        assert abs(t - 1.3) < 1e-9

    def test_permuted_labels_rejected(self):
        ang = np.arange(7) * TWO_PI / 7
        labs = list(range(7))
        swapped = [labs[i] for i in [1, 0, 2, 3, 4, 5, 6]]
        assert congruence_2d_labeled(ang, labs, np.mod(ang + 1.3, TWO_PI),
                                     swapped, 1e-9) is None

    def test_wrap_seam_within_tolerance(self):
        t = congruence_2d_labeled([0.0], ["x"], [6.28318], ["x"], 1e-4)
        assert t is not None

    def test_size_mismatch(self):
        assert congruence_2d_labeled([0.0, 1.0], [0, 0], [0.0], [0],
                                     1e-9) is None

    def test_irregular_gaps(self):
        ang = np.array([0.0, 0.5, 1.7, 3.0, 4.9])
        lab = ["a", "b", "a", "c", "b"]
        t = congruence_2d_labeled(ang, lab, np.mod(ang + 2.2, TWO_PI), lab,
                                  1e-9)
        assert t is not None and abs(t - 2.2) < 1e-9
        assert congruence_2d_labeled(ang, lab, np.mod(ang + 2.2, TWO_PI),
                                     ["a", "b", "a", "c", "c"], 1e-9) is None


class TestSphere3D:
    def test_generic_cloud(self, rng):
        pa = rng.normal(size=(60, 3))
        r = rot3(rng)
        pb = pa @ r.T
        s = congruence_3d_labeled(pa, [0] * 60, pb[rng.permutation(60)],
                                  [0] * 60, 1e-9)
        assert s is not None
        assert abs(np.linalg.det(s) - 1) < 1e-9
        assert match_multisets(pa @ s.T, pb, 1e-7)

    def test_octahedron(self, rng):
        octa = np.concatenate([np.eye(3), -np.eye(3)])
        r = rot3(rng)
        s = congruence_3d_labeled(octa, [0] * 6, octa @ r.T, [0] * 6, 1e-9)
        assert s is not None
        assert match_multisets(octa @ s.T, octa @ r.T, 1e-7)

    def test_labeled_icosahedron_unique_rotation(self, rng):
        phi = (1 + math.sqrt(5)) / 2
        ico = []
        for s1 in (1, -1):
            for s2 in (1, -1):
                ico += [[0, s1, s2 * phi], [s1, s2 * phi, 0],
                        [s2 * phi, 0, s1]]
        ico = np.array(ico, float)
        ico /= np.linalg.norm(ico, axis=1, keepdims=True)
        labs = list(range(12))
        r = rot3(rng)
        s = congruence_3d_labeled(ico, labs, ico @ r.T, labs, 1e-9)
        assert s is not None
        # distinct labels leave a single admissible bijection
        assert np.max(np.abs(ico @ s.T - ico @ r.T)) < 1e-7

    def test_labeled_tetrahedron_distinct(self, rng):
        tet = np.array([[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]],
                       float) / math.sqrt(3)
        r = rot3(rng)
        s = congruence_3d_labeled(tet, "pqrs", tet @ r.T, "pqrs", 1e-9)
        assert s is not None
        assert np.max(np.abs(tet @ s.T - tet @ r.T)) < 1e-7

    def test_cylinder_with_pole_axis_case(self, rng):
        th = rng.uniform(0, TWO_PI, 40)
        cyl = np.c_[np.cos(th), np.sin(th), rng.choice([0.5, 1.5], 40)]
        cyl = np.r_[cyl, [[0, 0, 3.0]]]
        r = rot3(rng)
        s = congruence_3d_labeled(cyl, [0] * 41, cyl @ r.T, [0] * 41, 1e-9)
        assert s is not None and match_multisets(cyl @ s.T, cyl @ r.T, 1e-6)

    def test_antipodal_axis_case(self, rng):
        th = rng.uniform(0, TWO_PI, 40)
        cyl = np.c_[np.cos(th), np.sin(th), rng.choice([0.5, 1.5], 40)]
        cyl = np.r_[cyl, [[0, 0, 3.0], [0, 0, -3.0]]]
        r = rot3(rng)
        s = congruence_3d_labeled(cyl, [0] * 42, cyl @ r.T, [0] * 42, 1e-9)
        assert s is not None and match_multisets(cyl @ s.T, cyl @ r.T, 1e-6)

    def test_perturbed_rejected(self, rng):
        pa = rng.normal(size=(30, 3))
        pb = pa @ rot3(rng).T
        pb[3] += 1e-3
        assert congruence_3d_labeled(pa, [0] * 30, pb, [0] * 30, 1e-9) is None

    def test_collinear(self, rng):
        lin = np.array([[0, 0, 1.0], [0, 0, 2.0], [0, 0, -1.0]])
        r = rot3(rng)
        s = congruence_3d_labeled(lin, [0, 1, 2], lin @ r.T, [0, 1, 2], 1e-9)
        assert s is not None
        assert np.max(np.abs(lin @ s.T - lin @ r.T)) < 1e-7

    def test_origin_point_allowed(self, rng):
        pts = np.array([[0, 0, 1.0], [0, 0, 2.0], [0, 0, -1.0], [0, 0, 0]])
        r = rot3(rng)
        s = congruence_3d_labeled(pts, [0, 1, 2, 3], pts @ r.T, [0, 1, 2, 3],
                                  1e-9)
        assert s is not None


class TestOnePlusThree:
    def make(self, rng, n=200):
        a = rng.normal(size=(n, 4))
        a -= a.mean(axis=0)
        r4 = random_rotation(rng)
        anchors = a[:3] / np.linalg.norm(a[:3], axis=1, keepdims=True)
        return a, r4, anchors

    def test_roundtrip(self, rng):
        a, r4, anchors = self.make(rng)
        b = a @ r4.T
        v = one_plus_three_reduce(PointSet4(a),
                                  PointSet4(b[rng.permutation(len(a))]),
                                  anchors, anchors @ r4.T, 1e-9)
        assert v.congruent
        assert match_multisets(a @ v.rotation.T, b, 1e-6)

    def test_perturbed_rejected(self, rng):
        a, r4, anchors = self.make(rng)
        b = a @ r4.T
        b[7] += 1e-3
        v = one_plus_three_reduce(PointSet4(a), PointSet4(b), anchors,
                                  anchors @ r4.T, 1e-9)
        assert not v.congruent
        assert v.stage

    def test_labeled(self, rng):
        a, r4, anchors = self.make(rng)
        labs = tuple(i % 5 for i in range(len(a)))
        perm = rng.permutation(len(a))
        v = one_plus_three_reduce(
            PointSet4(a, labs),
            PointSet4(a[perm] @ r4.T, tuple(labs[i] for i in perm)),
            anchors, anchors @ r4.T, 1e-9)
        assert v.congruent
