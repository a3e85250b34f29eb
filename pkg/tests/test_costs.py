"""Cost model, connection radius, and Hausdorff distance."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pierguard import (
    CostParams,
    DirectedState,
    OccupancyGrid,
    astar_plan,
    cost_to_go,
    edge_cost,
    generate_map_spheres,
    hausdorff_distance,
    path_cost,
    random_free_problem,
    rrt_star_radius,
    unit_ball_volume,
)

EUCLID = CostParams(beta1=1.0, beta2=0.0)
TURNY = CostParams(beta1=1.0, beta2=1.0)


class TestEdgeCost:
    def test_pure_euclidean(self):
        state = DirectedState((0.0, 0.0, 0.0))
        assert edge_cost(EUCLID, state, (3.0, 4.0, 0.0)) == 5.0

    def test_identity(self):
        state = DirectedState((1.0, 2.0, 3.0), (1.0, 0.0, 0.0))
        assert edge_cost(TURNY, state, (1.0, 2.0, 3.0)) == 0.0

    def test_right_angle_turn(self):
        state = DirectedState((0.0, 0.0, 0.0), (1.0, 0.0, 0.0))
        got = edge_cost(TURNY, state, (0.0, 2.0, 0.0))
        assert got == pytest.approx(2.0 + math.pi / 2.0, abs=1e-12)
        assert 2.0 + math.pi / 2.0 == 3.5707963267948966

    def test_no_direction_means_no_turn_cost(self):
        state = DirectedState((0.0, 0.0, 0.0))
        assert edge_cost(TURNY, state, (0.0, 2.0, 0.0)) == 2.0

    def test_reversal_costs_pi(self):
        state = DirectedState((0.0, 0.0, 0.0), (1.0, 0.0, 0.0))
        got = edge_cost(TURNY, state, (-3.0, 0.0, 0.0))
        assert got == pytest.approx(3.0 + math.pi, abs=1e-12)

    def test_unit_dir_validated(self):
        with pytest.raises(ValueError):
            DirectedState((0.0, 0.0, 0.0), (2.0, 0.0, 0.0))

    @given(
        st.lists(st.floats(-50.0, 50.0), min_size=3, max_size=3),
        st.floats(-20.0, 20.0),
        st.floats(-20.0, 20.0),
        st.floats(-20.0, 20.0),
    )
    @settings(max_examples=50, deadline=None)
    def test_translation_invariance(self, shift, dx, dy, dz):
        a = np.array([1.0, 2.0, 3.0])
        b = a + np.array([dx, dy, dz])
        s = np.asarray(shift)
        base = edge_cost(TURNY, DirectedState(a, (0.0, 0.0, 1.0)), b)
        moved = edge_cost(TURNY, DirectedState(a + s, (0.0, 0.0, 1.0)), b + s)
        assert moved == pytest.approx(base, rel=1e-9, abs=1e-9)


class TestPathCost:
    def test_collinear(self):
        pts = [(0.0, 0.0, 0.0), (1.0, 0.0, 0.0), (2.0, 0.0, 0.0)]
        assert path_cost(EUCLID, pts) == 2.0

    def test_euclidean_arc_length(self):
        rng = np.random.default_rng(0)
        pts = rng.uniform(0.0, 10.0, (8, 3))
        expect = float(np.linalg.norm(np.diff(pts, axis=0), axis=1).sum())
        assert path_cost(EUCLID, pts) == pytest.approx(expect, rel=1e-12)

    def test_single_turn(self):
        pts = [(0.0, 0.0, 0.0), (1.0, 0.0, 0.0), (1.0, 1.0, 0.0)]
        assert path_cost(TURNY, pts) == pytest.approx(2.0 + math.pi / 2.0, abs=1e-12)

    def test_requires_two_waypoints(self):
        with pytest.raises(ValueError):
            path_cost(EUCLID, [(0.0, 0.0, 0.0)])
        with pytest.raises(ValueError):
            path_cost(EUCLID, [])

    def test_zero_length_segment_keeps_direction(self):
        # Pausing at a waypoint must not reset the turn reference.
        pts = [(0.0, 0.0, 0.0), (1.0, 0.0, 0.0), (1.0, 0.0, 0.0), (1.0, 1.0, 0.0)]
        direct = [(0.0, 0.0, 0.0), (1.0, 0.0, 0.0), (1.0, 1.0, 0.0)]
        assert path_cost(TURNY, pts) == pytest.approx(path_cost(TURNY, direct), abs=1e-12)

    @given(st.floats(0.1, 10.0))
    @settings(max_examples=30, deadline=None)
    def test_scaling(self, s):
        pts = np.array([[0.0, 0.0, 0.0], [1.0, 2.0, 0.5], [3.0, 1.0, 2.0]])
        assert path_cost(EUCLID, pts * s) == pytest.approx(s * path_cost(EUCLID, pts), rel=1e-9)


class TestCostToGo:
    def test_at_goal(self):
        assert cost_to_go(EUCLID, (1.0, 1.0, 1.0), (1.0, 1.0, 1.0)) == 0.0

    def test_axis_distance(self):
        assert cost_to_go(EUCLID, (0.0, 0.0, 0.0), (0.0, 0.0, 7.0)) == 7.0

    def test_admissible_on_random_paths(self):
        rng = np.random.default_rng(3)
        for _ in range(1000):
            k = int(rng.integers(2, 7))
            pts = rng.uniform(0.0, 20.0, (k, 3))
            params = CostParams(beta1=float(rng.uniform(0.5, 2.0)), beta2=float(rng.uniform(0.0, 1.0)))
            assert path_cost(params, pts) >= cost_to_go(params, pts[0], pts[-1]) - 1e-9

    def test_admissible_against_grid_search(self):
        grid = generate_map_spheres((16, 16, 16), 10, seed=21)
        problem = random_free_problem(grid, 4, 8.0)
        gp = astar_plan(grid, grid.voxel_of(problem.x_init), grid.voxel_of(problem.x_goal))
        start_c = grid.voxel_center(grid.voxel_of(problem.x_init))
        goal_c = grid.voxel_center(grid.voxel_of(problem.x_goal))
        assert gp.cost >= cost_to_go(EUCLID, start_c, goal_c) - 1e-9


class TestConnectionRadius:
    def test_unit_ball_volume(self):
        assert unit_ball_volume(2) == pytest.approx(math.pi, rel=1e-12)
        assert unit_ball_volume(3) == pytest.approx(4.0 * math.pi / 3.0, rel=1e-12)

    def test_frozen_gamma_64_cube(self):
        # 1.1 * (8/3)^(1/3) * (262144 / (4*pi/3))^(1/3), evaluated independently.
        gamma = 60.5618825734982
        measure = 64.0**3
        for n in (10, 100, 5000):
            expect = min(6.0, gamma * (math.log(n) / n) ** (1.0 / 3.0))
            assert rrt_star_radius(3, measure, n, 6.0) == pytest.approx(expect, rel=1e-12)

    def test_single_vertex_returns_cap(self):
        assert rrt_star_radius(3, 64.0**3, 1, 6.0) == 6.0

    def test_zero_vertices_invalid(self):
        with pytest.raises(ValueError):
            rrt_star_radius(3, 64.0**3, 0, 6.0)

    def test_dimension_below_two_invalid(self):
        with pytest.raises(ValueError):
            rrt_star_radius(1, 64.0, 5, 6.0)

    def test_monotone_nonincreasing(self):
        prev = math.inf
        for n in range(3, 4000):
            r = rrt_star_radius(3, 64.0**3, n, 1.0e9)
            assert r <= prev + 1e-15
            prev = r

    def test_cap_applies(self):
        # Small n makes the Eq. 8 term enormous; cap must win.
        assert rrt_star_radius(3, 128.0**3, 2, 6.0) == 6.0


def _hausdorff_oracle(a, b):
    d = np.linalg.norm(a[:, None, :] - b[None, :, :], axis=2)
    return max(float(d.min(axis=1).max()), float(d.min(axis=0).max()))


class TestHausdorff:
    def test_identical_sets(self):
        a = np.random.default_rng(4).uniform(0.0, 5.0, (20, 3))
        assert hausdorff_distance(a, a) == 0.0

    def test_single_points(self):
        a = np.array([[0.0, 0.0, 0.0]])
        b = np.array([[3.0, 4.0, 0.0]])
        assert hausdorff_distance(a, b) == 5.0

    def test_empty_invalid(self):
        a = np.zeros((0, 3))
        b = np.array([[1.0, 1.0, 1.0]])
        with pytest.raises(ValueError):
            hausdorff_distance(a, b)
        with pytest.raises(ValueError):
            hausdorff_distance(b, a)

    def test_brute_force_oracle_100_pairs(self):
        rng = np.random.default_rng(5)
        for _ in range(100):
            a = rng.uniform(-10.0, 10.0, (int(rng.integers(1, 51)), 3))
            b = rng.uniform(-10.0, 10.0, (int(rng.integers(1, 51)), 3))
            assert hausdorff_distance(a, b) == _hausdorff_oracle(a, b)

    def test_symmetry_and_triangle_100_triples(self):
        rng = np.random.default_rng(6)
        for _ in range(100):
            a = rng.uniform(-10.0, 10.0, (int(rng.integers(1, 31)), 3))
            b = rng.uniform(-10.0, 10.0, (int(rng.integers(1, 31)), 3))
            c = rng.uniform(-10.0, 10.0, (int(rng.integers(1, 31)), 3))
            dab = hausdorff_distance(a, b)
            dba = hausdorff_distance(b, a)
            assert dab == dba
            assert dab <= hausdorff_distance(a, c) + hausdorff_distance(c, b) + 1e-9

    def test_subset_one_sided(self):
        # B superset of A: distance is how far B's extra points stray from A.
        a = np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]])
        b = np.vstack([a, [[1.0, 2.0, 0.0]]])
        assert hausdorff_distance(a, b) == 2.0


class TestParamValidation:
    def test_beta1_positive(self):
        with pytest.raises(ValueError):
            CostParams(beta1=0.0)
        with pytest.raises(ValueError):
            CostParams(beta1=-1.0)

    def test_beta2_nonnegative(self):
        with pytest.raises(ValueError):
            CostParams(beta1=1.0, beta2=-0.5)
        CostParams(beta1=1.0, beta2=0.0)


class TestGridNeutralProblem:
    def test_free_measure_feeds_radius(self):
        grid = OccupancyGrid(np.zeros((64, 64, 64), dtype=bool))
        r = rrt_star_radius(3, grid.free_measure(), 100, 6.0)
        assert 0.0 < r <= 6.0
