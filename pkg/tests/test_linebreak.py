import numpy as np
import pytest

from icrtlab.linebreak import (LineBrokenTree, branch_count_on_path,
                               branch_degree, distance, reduced_tree, rescale,
                               sample_line_breaking)
from icrtlab.rng import make_generator
from icrtlab.theta import ThetaParam


@pytest.fixture
def forced():
    # joins at 0.3 (colour 1) and 0.9 (colour 2); cutpoints 1.0 (colour 1)
    # and 1.4 (colour 2)
    return LineBrokenTree(theta=ThetaParam(np.array([1.0, 0.5])),
                          etas=[1.0, 1.4], colors=[1, 2],
                          joins={1: 0.3, 2: 0.9})


class TestGeometry:
    def test_segment_of(self, forced):
        assert forced.segment_of(0.3) == 0
        assert forced.segment_of(1.0) == 0  # segments own their right endpoint
        assert forced.segment_of(1.2) == 1

    def test_attachment(self, forced):
        assert forced.attach[1] == (0, 0.3)

    def test_distance_forced(self, forced):
        assert distance(forced, 1.0, 1.4) == pytest.approx(1.1)

    def test_distance_root(self, forced):
        assert forced.dist_to_root(1.4) == pytest.approx(0.3 + 0.4)

    def test_distance_symmetric(self, forced):
        assert distance(forced, 0.2, 1.3) == distance(forced, 1.3, 0.2)

    def test_four_point_condition(self):
        rng = make_generator(13)
        theta = ThetaParam(1.0 / np.arange(1, 11, dtype=float))
        tree = sample_line_breaking(theta, 6, rng)
        pts = [tree.leaf_position(i) for i in range(1, 5)]
        d = {(a, b): distance(tree, pts[a], pts[b])
             for a in range(4) for b in range(4)}
        s1 = d[(0, 1)] + d[(2, 3)]
        s2 = d[(0, 2)] + d[(1, 3)]
        s3 = d[(0, 3)] + d[(1, 2)]
        top = sorted([s1, s2, s3])
        assert top[2] - top[1] <= 1e-9

    def test_invalid_position(self, forced):
        with pytest.raises(ValueError):
            distance(forced, 0.0, 2.0)


class TestSampling:
    def test_cutpoints_increasing(self):
        rng = make_generator(14)
        theta = ThetaParam(np.array([2.0, 1.0, 0.5]))
        tree = sample_line_breaking(theta, 20, rng)
        assert all(b > a for a, b in zip(tree.etas, tree.etas[1:]))
        assert all(1 <= c <= 3 for c in tree.colors)

    def test_joins_precede_cutpoints(self):
        rng = make_generator(15)
        theta = ThetaParam(1.0 / np.arange(1, 6, dtype=float))
        tree = sample_line_breaking(theta, 10, rng)
        for m, colour in enumerate(tree.colors, start=1):
            assert tree.joins[colour] < tree.etas[m - 1]

    def test_single_colour_star(self):
        rng = make_generator(16)
        tree = sample_line_breaking(ThetaParam(np.array([1.0])), 5, rng)
        assert all(c == 1 for c in tree.colors)
        # every later segment glued at the unique join point
        assert all(a == tree.attach[1] for a in tree.attach[1:])

    def test_validation(self):
        rng = make_generator(17)
        with pytest.raises(ValueError):
            sample_line_breaking(ThetaParam(np.array([])), 3, rng)
        with pytest.raises(ValueError):
            sample_line_breaking(ThetaParam(np.array([1.0])), 0, rng)

    def test_json(self, forced):
        obj = forced.to_json()
        assert obj["segments"] == [[0.0, 1.0], [1.0, 1.4]]
        assert obj["attachments"][1] == [0, 0.3]


class TestReduced:
    def test_forced_k2(self, forced):
        assert reduced_tree(forced, 2).canonical() == "1:b1|2:b1|b1:0"

    def test_k1_edge(self, forced):
        assert reduced_tree(forced, 1).parents == {"1": "0"}

    def test_no_degree_two_vertices(self):
        rng = make_generator(18)
        theta = ThetaParam(1.0 / np.arange(1, 21, dtype=float))
        tree = sample_line_breaking(theta, 7, rng)
        lt = reduced_tree(tree, 7)
        deg = {}
        for child, parent in lt.parents.items():
            deg[child] = deg.get(child, 0) + 1
            deg[parent] = deg.get(parent, 0) + 1
        for lab, dg in deg.items():
            if lab.startswith("b"):
                assert dg >= 3

    def test_restriction_consistency(self):
        # dropping the last leaf of the k-tree gives the (k-1)-tree
        rng = make_generator(19)
        theta = ThetaParam(1.0 / np.arange(1, 21, dtype=float))
        tree = sample_line_breaking(theta, 5, rng)
        lt4 = reduced_tree(tree, 4)
        lt5 = reduced_tree(tree, 5)
        assert lt4.k == 4 and lt5.k == 5
        # leaves 1..4 keep pairwise tree distances, checked via branch counts
        for i in range(1, 5):
            pi = tree.leaf_position(i)
            assert distance(tree, 0.0, pi) == pytest.approx(tree.dist_to_root(pi))


class TestBranchStatistics:
    def test_forced_degree(self, forced):
        assert branch_degree(forced, 1, 2) == 3

    def test_pass_through_join(self, forced):
        # colour-2 join at 0.9 has no attached segment at k = 2: a
        # pass-through point of degree 2
        assert branch_degree(forced, 2, 2) == 2

    def test_unrealized_join(self):
        # the colour-2 join falls beyond the last realized cutpoint
        tree = LineBrokenTree(theta=ThetaParam(np.array([1.0, 0.5])),
                              etas=[1.0], colors=[1], joins={1: 0.3, 2: 1.2})
        assert branch_degree(tree, 2, 1) == 0

    def test_count_on_root_path(self, forced):
        assert branch_count_on_path(forced, 0.0, 1.0, 0.2) == 2
        assert branch_count_on_path(forced, 0.0, 1.0, 0.7) == 1

    def test_count_eps_validation(self, forced):
        with pytest.raises(ValueError):
            branch_count_on_path(forced, 0.0, 1.0, 0.0)


class TestRescale:
    def test_positions_divide(self, forced):
        r = rescale(forced, 2.0)
        assert r.etas == [0.5, 0.7]
        assert r.joins == {1: 0.15, 2: 0.45}
        assert np.allclose(r.theta.atoms, [2.0, 1.0])

    def test_distance_scales(self, forced):
        r = rescale(forced, 2.0)
        assert distance(r, 0.5, 0.7) == pytest.approx(1.1 / 2.0)

    def test_shape_invariant(self, forced):
        assert reduced_tree(rescale(forced, 3.0), 2) == reduced_tree(forced, 2)
