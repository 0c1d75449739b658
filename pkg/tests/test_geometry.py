import numpy as np
import pytest

from polyinv import geometry as geo
from polyinv.errors import (
    DegenerateHalfspaceError,
    DimensionMismatchError,
    EmptyPolytopeError,
    UnboundedPolytopeError,
)
from polyinv.geometry import Halfspace, Polytope


@pytest.fixture
def box():
    return Polytope.from_box([-15.0, -10.0], [15.0, 10.0])


@pytest.fixture
def interval():
    return Polytope.from_box([-5.0], [5.0])


class TestNormalize:
    def test_positive_scaling_invariance(self):
        h = geo.normalize(Halfspace([2.0, 0.0], 30.0))
        assert h.normal == pytest.approx([1.0, 0.0])
        assert h.offset == pytest.approx(15.0)

    def test_negative_component(self):
        h = geo.normalize(Halfspace([0.0, -5.0], 50.0))
        assert h.normal == pytest.approx([0.0, -1.0])
        assert h.offset == pytest.approx(10.0)

    def test_euclidean_scaling(self):
        h = geo.normalize(Halfspace([3.0, 4.0], 10.0))
        assert h.normal == pytest.approx([0.6, 0.8])
        assert h.offset == pytest.approx(2.0)

    def test_degenerate_normal_raises(self):
        with pytest.raises(DegenerateHalfspaceError):
            Halfspace([0.0, 1e-13], 1.0)


class TestMembership:
    def test_origin_interior(self, box):
        assert geo.is_member(box, (0.0, 0.0), 1e-9)

    def test_boundary_exceeded(self, box):
        assert not geo.is_member(box, (15.0001, 0.0), 1e-9)

    def test_closed_set_includes_vertices(self, box):
        assert geo.is_member(box, (15.0, 10.0), 1e-9)

    def test_dimension_mismatch(self, box):
        with pytest.raises(DimensionMismatchError):
            geo.is_member(box, (1.0, 2.0, 3.0), 1e-9)


class TestLpSolve:
    def test_max_x1_over_box(self, box):
        res = geo.lp_solve([1.0, 0.0], box, "maximize")
        assert res.status == "optimal"
        assert res.optimum == pytest.approx(15.0, abs=1e-9)

    def test_infeasible(self):
        p = Polytope(1, [[1.0], [-1.0]], [1.0, -2.0])
        assert geo.lp_solve([1.0], p).status == "infeasible"

    def test_unbounded(self):
        p = Polytope(2, [[0.0, 1.0]], [1.0])
        assert geo.lp_solve([1.0, 0.0], p).status == "unbounded"


class TestRemoveRedundancy:
    def test_dominated_parallel_constraint(self):
        p = Polytope(1, [[1.0], [1.0], [-1.0]], [15.0, 20.0, 15.0])
        reduced = geo.remove_redundancy(p)
        assert reduced.n_rows == 2
        assert geo.equal(reduced, p, 1e-7)

    def test_slack_diagonal_row_dropped(self, box):
        # max of x1 + x2 over the box is 25, far below the offset 100
        res = geo.lp_solve([1.0, 1.0], box)
        assert res.optimum == pytest.approx(25.0)
        p = geo.intersect(box, Halfspace([1.0, 1.0], 100.0))
        reduced = geo.remove_redundancy(p)
        assert reduced.n_rows == 4
        assert geo.equal(reduced, box, 1e-7)

    def test_idempotent_on_irredundant_box(self, box):
        reduced = geo.remove_redundancy(box)
        assert reduced.n_rows == box.n_rows
        np.testing.assert_allclose(reduced.normals, box.normals)
        np.testing.assert_allclose(reduced.offsets, box.offsets)

    def test_empty_polytope_raises(self):
        p = Polytope(1, [[1.0], [-1.0]], [1.0, -2.0])
        with pytest.raises(EmptyPolytopeError):
            geo.remove_redundancy(p)


class TestProjectEliminate:
    def test_joint_box_projects_to_state_box(self, box):
        z = Polytope.from_box([-15.0, -10.0, -5.0], [15.0, 10.0, 5.0])
        proj = geo.project_eliminate(z, [0, 1])
        assert geo.equal(proj, box, 1e-7)

    def test_input_forced_to_zero(self):
        p = Polytope(2, [[1.0, 1.0], [0.0, -1.0], [0.0, 1.0]], [1.0, 0.0, 0.0])
        proj = geo.project_eliminate(p, [0])
        assert proj.n_rows == 1
        assert proj.normals[0, 0] == pytest.approx(1.0)
        assert proj.offsets[0] == pytest.approx(1.0)

    def test_keep_validation(self, box):
        with pytest.raises(ValueError):
            geo.project_eliminate(box, [])
        with pytest.raises(ValueError):
            geo.project_eliminate(box, [0, 1])

    def test_empty_propagates(self):
        p = Polytope(2, [[1.0, 0.0], [-1.0, 0.0]], [1.0, -2.0])
        with pytest.raises(EmptyPolytopeError):
            geo.project_eliminate(p, [1])


class TestIntersect:
    def test_duplicate_row_same_set_extra_row(self, box):
        p = geo.intersect(box, Halfspace([1.0, 0.0], 15.0))
        assert p.n_rows == box.n_rows + 1
        assert geo.equal(p, box, 1e-9)

    def test_tighter_box(self, box):
        p = geo.intersect(box, Halfspace([1.0, 0.0], 5.0))
        assert geo.lp_solve([1.0, 0.0], p).optimum == pytest.approx(5.0)

    def test_label_recorded(self, box):
        p = geo.intersect(box, Halfspace([1.0, 0.0], 5.0), label="learned:1")
        assert p.labels[-1] == "learned:1"

    def test_dimension_mismatch(self, box):
        with pytest.raises(DimensionMismatchError):
            geo.intersect(box, Halfspace([1.0], 5.0))


class TestContainsEqual:
    def test_reflexive(self, box):
        assert geo.contains(box, box, 1e-9)

    def test_joint_box_contains_invariant_set(self, joint_box, zinf_expected):
        assert geo.contains(joint_box, zinf_expected, 1e-6)
        assert not geo.contains(zinf_expected, joint_box, 1e-6)

    def test_equal_under_row_permutation(self, box):
        permuted = Polytope(2, box.normals[::-1] * 3.0, box.offsets[::-1] * 3.0)
        assert geo.equal(box, permuted, 1e-9)

    def test_shrunk_box_not_equal(self, box):
        small = Polytope.from_box([-14.0, -10.0], [15.0, 10.0])
        assert not geo.equal(box, small, 1e-6)

    def test_empty_query_raises(self, box):
        empty = Polytope(2, [[1.0, 0.0], [-1.0, 0.0]], [1.0, -2.0])
        with pytest.raises(EmptyPolytopeError):
            geo.contains(box, empty, 1e-6)


class TestChebyshev:
    def test_symmetric_box(self, box):
        center, radius = geo.chebyshev_center(box)
        assert center == pytest.approx([0.0, 0.0], abs=1e-9)
        assert radius == pytest.approx(10.0, abs=1e-9)

    def test_input_interval(self, interval):
        center, radius = geo.chebyshev_center(interval)
        assert center == pytest.approx([0.0], abs=1e-12)
        assert radius == pytest.approx(5.0, abs=1e-12)

    def test_right_isoceles_triangle_inradius(self):
        tri = Polytope(2, [[-1.0, 0.0], [0.0, -1.0], [1.0, 1.0]], [0.0, 0.0, 1.0])
        _, radius = geo.chebyshev_center(tri)
        assert radius == pytest.approx(1.0 / (2.0 + np.sqrt(2.0)), abs=1e-9)

    def test_empty_raises(self):
        p = Polytope(1, [[1.0], [-1.0]], [1.0, -2.0])
        with pytest.raises(EmptyPolytopeError):
            geo.chebyshev_center(p)

    def test_degenerate_point_radius_zero(self):
        p = Polytope(1, [[1.0], [-1.0]], [3.0, -3.0])
        center, radius = geo.chebyshev_center(p)
        assert center == pytest.approx([3.0], abs=1e-9)
        assert radius == pytest.approx(0.0, abs=1e-9)


class TestVertices:
    def test_box_corners(self, box):
        verts = geo.enumerate_vertices(box)
        expected = {(-15.0, -10.0), (-15.0, 10.0), (15.0, -10.0), (15.0, 10.0)}
        assert {tuple(v) for v in verts} == expected

    def test_interval_endpoints(self, interval):
        verts = geo.enumerate_vertices(interval)
        assert sorted(v[0] for v in verts) == pytest.approx([-5.0, 5.0])

    def test_invariant_set_has_eight_vertices(self, xinf_expected):
        assert len(geo.enumerate_vertices(xinf_expected)) == 8

    def test_unbounded_raises(self):
        p = Polytope(2, [[1.0, 0.0], [-1.0, 0.0]], [1.0, 1.0])
        with pytest.raises(UnboundedPolytopeError):
            geo.enumerate_vertices(p)


class TestHausdorff:
    def test_identity(self, box):
        assert geo.hausdorff(box, box) == pytest.approx(0.0, abs=1e-12)

    def test_uniform_shrink_by_one(self, box):
        small = Polytope.from_box([-15.0, -10.0], [14.0, 10.0])
        assert geo.hausdorff(box, small) == pytest.approx(1.0, abs=1e-9)

    def test_interval_vs_shifted(self):
        a = Polytope.from_box([-5.0], [5.0])
        b = Polytope.from_box([-5.0], [3.0])
        assert geo.hausdorff(a, b) == pytest.approx(2.0, abs=1e-9)


class TestSampleUniform:
    def test_interval_membership(self, interval):
        rng = np.random.default_rng(0)
        for _ in range(50):
            u = geo.sample_uniform(interval, rng)
            assert geo.is_member(interval, u, 1e-9)

    def test_box_mean_near_center(self, box):
        rng = np.random.default_rng(1)
        pts = np.array([geo.sample_uniform(box, rng) for _ in range(10_000)])
        assert np.all(np.abs(pts.mean(axis=0)) < 0.5)

    def test_invariant_set_membership(self, xinf_expected):
        rng = np.random.default_rng(2)
        for _ in range(50):
            x = geo.sample_uniform(xinf_expected, rng)
            assert geo.is_member(xinf_expected, x, 1e-9)

    def test_deterministic_under_seed(self, box):
        a = geo.sample_uniform(box, np.random.default_rng(9))
        b = geo.sample_uniform(box, np.random.default_rng(9))
        np.testing.assert_array_equal(a, b)

    def test_thin_polytope_falls_back_to_hit_and_run(self):
        # Sliver with tiny acceptance rate inside its bounding box.
        p = Polytope(
            2,
            [[1.0, 0.0], [-1.0, 0.0], [1.0, -1.0], [-1.0, 1.0]],
            [100.0, 100.0, 1e-4, 1e-4],
        )
        y = geo.sample_uniform(p, np.random.default_rng(3))
        assert geo.is_member(p, y, 1e-6)


class TestSerialization:
    def test_json_round_trip(self, box):
        text = geo.polytope_to_json(geo.intersect(box, Halfspace([1.0, 1.0], 20.0), "extra"))
        back = geo.polytope_from_json(text)
        assert back.labels[-1] == "extra"
        assert geo.equal(back, geo.polytope_from_json(text), 1e-12)

    def test_vertices_csv_shape(self, box):
        lines = geo.vertices_csv(box).strip().splitlines()
        assert lines[0] == "y0,y1"
        assert len(lines) == 5
