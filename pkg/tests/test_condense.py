"""Pruning by key, tolerance clustering, canonical axes."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hypercongruence.condense import (AxesSet, canonical_axes, joint_cluster,
                                      prune_by_key, tolerance_cluster)

TWO_PI = 2 * math.pi


class TestPruneByKey:
    def test_smallest_class_wins(self):
        r = prune_by_key(["a", "a", "a", "b"])
        assert r.indices == (3,)
        assert r.key == "b"
        assert r.progressed

    def test_tie_breaks_to_smaller_key(self):
        r = prune_by_key(["b", "a", "b", "a"])
        assert r.key == "a"
        assert r.indices == (1, 3)

    def test_two_shell_split(self):
        radii = [1.0] * 3 + [2.0] * 5
        ids = tolerance_cluster(radii).ids
        r = prune_by_key([int(i) for i in ids])
        assert r.indices == (0, 1, 2)

    def test_single_class_no_progress(self):
        r = prune_by_key(["x", "x"])
        assert not r.progressed
        assert r.indices == (0, 1)

    def test_histogram_is_lockstep_key(self):
        a = prune_by_key(["u", "v", "v", "w"])
        b = prune_by_key(["v", "w", "u", "v"])
        assert a.histogram == b.histogram

    @given(st.lists(st.integers(0, 5), min_size=2, max_size=40))
    @settings(max_examples=60, deadline=None)
    def test_halving_when_multiple_classes(self, keys):
        r = prune_by_key(keys)
        if r.progressed:
            assert len(r.indices) <= len(keys) // 2 or \
                len(set(keys)) * len(r.indices) <= len(keys) + len(set(keys))
            # smallest class is never larger than the mean class size
            assert len(r.indices) <= len(keys) / len(set(keys))


class TestToleranceCluster:
    def test_tight_pair_merges(self):
        r = tolerance_cluster([1.0, 1.0 + 1e-12, 2.0])
        assert list(r.ids) == [0, 0, 1]

    def test_spread_values_split(self):
        eps = 1e-9
        r = tolerance_cluster([0.0, eps * 10, eps * 20], eps)
        assert list(r.ids) == [0, 1, 2]

    def test_three_clusters_with_margins(self, rng):
        centers = np.array([0.0, 1.0, 5.0])
        vals = np.concatenate([c + rng.uniform(-1e-12, 1e-12, 20)
                               for c in centers])
        perm = rng.permutation(len(vals))
        r = tolerance_cluster(vals[perm])
        assert r.count == 3

    @given(st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=30),
           st.randoms())
    @settings(max_examples=60, deadline=None)
    def test_permutation_invariant(self, vals, pyrandom):
        base = tolerance_cluster(vals, 1e-3)
        order = list(range(len(vals)))
        pyrandom.shuffle(order)
        shuf = tolerance_cluster([vals[i] for i in order], 1e-3)
        assert [base.ids[i] for i in order] == list(shuf.ids)

    def test_joint_cluster_aligns_runs(self):
        ia, ib = joint_cluster([1.0, 2.0], [2.0 + 1e-13, 1.0], 1e-9)
        assert list(ia) == [0, 1]
        assert list(ib) == [1, 0]


class TestCanonicalAxes:
    def test_regular_pentagon_full_symmetry(self):
        ang = np.arange(5) * TWO_PI / 5
        ax = canonical_axes(ang)
        assert ax.count == 5

    def test_unique_label_pins_axis(self):
        ang = np.arange(5) * TWO_PI / 5 + 0.3
        ax = canonical_axes(ang, labels=["p", "p", "q", "p", "p"])
        assert ax.count == 1
        # the single axis sits on one of the input points, stably
        assert min(abs(ax.base_angle - a % TWO_PI) for a in ang) < 1e-12
        shifted = canonical_axes((ang + 1.0) % TWO_PI,
                                 labels=["p", "p", "q", "p", "p"])
        assert (shifted.base_angle - ax.base_angle) % TWO_PI == pytest.approx(1.0)

    def test_square_alternating_labels(self):
        ang = np.arange(4) * TWO_PI / 4
        ax = canonical_axes(ang, labels=["A", "B", "A", "B"])
        assert ax.count == 2

    def test_symmetry_order_exact(self):
        # rotation by spacing maps the configuration to itself, smaller
        # fractions do not
        ang = np.arange(6) * TWO_PI / 6
        labels = ["x", "y", "x", "y", "x", "y"]
        ax = canonical_axes(ang, labels=labels)
        assert ax.count == 3
        shift = ax.spacing
        rotated = sorted((a + shift) % TWO_PI for a in ang)
        assert np.allclose(rotated, sorted(ang % TWO_PI), atol=1e-9)

    def test_rotation_equivariance(self, rng):
        ang = np.sort(rng.uniform(0, TWO_PI, 9))
        labels = [i % 3 for i in range(9)]
        ax = canonical_axes(ang, labels=labels)
        th = rng.uniform(0, TWO_PI)
        ax2 = canonical_axes((ang + th) % TWO_PI, labels=labels)
        assert ax2.count == ax.count
        d = (ax2.base_angle - ax.base_angle - th) % TWO_PI
        assert min(d % ax.spacing, ax.spacing - d % ax.spacing) < 1e-9

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            canonical_axes([])

    def test_single_point(self):
        ax = canonical_axes([1.25], labels=["z"])
        assert isinstance(ax, AxesSet)
        assert ax.count == 1
        assert ax.base_angle == pytest.approx(1.25)
