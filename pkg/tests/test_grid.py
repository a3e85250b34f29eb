"""Occupancy grid: generators, collision queries, problem encoding, PGRID IO."""

import struct

import numpy as np
import pytest

from pierguard import (
    FormatError,
    InvalidProblemError,
    OccupancyGrid,
    PlanningProblem,
    encode_problem_grids,
    generate_map_cylinders,
    generate_map_spheres,
    generate_map_with_density,
    random_free_problem,
    rasterize_cylinder,
    rasterize_sphere,
)


def _sphere_params(dims, count, seed, radius_range=(0.4, 2.5), top_range=(0.5, 7.5)):
    """Replicate the generator's documented draw order to obtain obstacle params."""
    rng = np.random.default_rng(seed)
    world = np.asarray(dims, dtype=float)
    xs = rng.uniform(0.0, world[0], count)
    ys = rng.uniform(0.0, world[1], count)
    radii = rng.uniform(radius_range[0], radius_range[1], count)
    tops = rng.uniform(top_range[0], top_range[1], count)
    return xs, ys, radii, tops


def _voxel_centers(dims):
    axes = [np.arange(d) + 0.5 for d in dims]
    return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)


class TestGenerators:
    def test_zero_count_all_free(self):
        grid = generate_map_spheres((16, 16, 16), 0, seed=7)
        assert not grid.cells.any()

    def test_spheres_deterministic(self):
        a = generate_map_spheres((64, 64, 64), 30, seed=1)
        b = generate_map_spheres((64, 64, 64), 30, seed=1)
        assert np.array_equal(a.cells, b.cells)

    def test_spheres_membership_oracle(self):
        dims = (32, 32, 32)
        grid = generate_map_spheres(dims, 10, seed=3)
        xs, ys, radii, tops = _sphere_params(dims, 10, seed=3)
        centers = _voxel_centers(dims)
        expected = np.zeros(dims, dtype=bool)
        for x, y, r, top in zip(xs, ys, radii, tops):
            c = np.array([x, y, top - r])
            expected |= ((centers - c) ** 2).sum(axis=-1) <= r * r
        assert np.array_equal(grid.cells, expected)
        assert grid.occupied_fraction() == expected.mean()

    def test_cylinders_zero_all_free(self):
        grid = generate_map_cylinders((32, 32, 32), 0, 0, seed=5)
        assert not grid.cells.any()

    def test_cylinders_deterministic(self):
        a = generate_map_cylinders((64, 64, 64), 10, 8, seed=2)
        b = generate_map_cylinders((64, 64, 64), 10, 8, seed=2)
        assert np.array_equal(a.cells, b.cells)

    def test_cylinder_membership_oracle(self):
        dims = (32, 32, 32)
        cells = np.zeros(dims, dtype=bool)
        rasterize_cylinder(cells, (16.0, 16.0), 2.0, (0.0, 10.0))
        centers = _voxel_centers(dims)
        in_disk = (centers[..., 0] - 16.0) ** 2 + (centers[..., 1] - 16.0) ** 2 <= 4.0
        in_height = (centers[..., 2] >= 0.0) & (centers[..., 2] <= 10.0)
        assert np.array_equal(cells, in_disk & in_height)

    def test_sphere_membership_oracle_single(self):
        cells = np.zeros((16, 16, 16), dtype=bool)
        rasterize_sphere(cells, (8.0, 8.0, 8.0), 3.0)
        centers = _voxel_centers((16, 16, 16))
        expected = ((centers - 8.0) ** 2).sum(axis=-1) <= 9.0
        assert np.array_equal(cells, expected)

    def test_zero_volume_dims_rejected(self):
        with pytest.raises(ValueError):
            generate_map_spheres((0, 16, 16), 5, seed=1)
        with pytest.raises(ValueError):
            generate_map_cylinders((16, 0, 16), 1, 1, seed=1)

    def test_negative_count_rejected(self):
        with pytest.raises(ValueError):
            generate_map_spheres((8, 8, 8), -1, seed=0)

    def test_density_generator_reaches_target(self):
        grid = generate_map_with_density((32, 32, 32), 0.1, seed=4)
        assert grid.occupied_fraction() >= 0.1
        again = generate_map_with_density((32, 32, 32), 0.1, seed=4)
        assert np.array_equal(grid.cells, again.cells)


class TestPointQueries:
    def test_free_point(self):
        grid = OccupancyGrid(np.zeros((4, 4, 4), dtype=bool))
        assert grid.is_state_free((1.5, 1.5, 1.5))

    def test_out_of_bounds_not_free(self):
        grid = OccupancyGrid(np.zeros((4, 4, 4), dtype=bool))
        assert not grid.is_state_free((-0.1, 0.0, 0.0))
        assert not grid.is_state_free((4.0, 1.0, 1.0))

    def test_occupied_voxel(self):
        cells = np.zeros((4, 4, 4), dtype=bool)
        cells[2, 2, 2] = True
        grid = OccupancyGrid(cells)
        assert not grid.is_state_free((2.5, 2.5, 2.5))

    def test_boundary_belongs_to_floor_voxel(self):
        cells = np.zeros((4, 4, 4), dtype=bool)
        cells[2, 0, 0] = True
        grid = OccupancyGrid(cells)
        # x = 2.0 is the closed lower face of voxel 2.
        assert not grid.is_state_free((2.0, 0.5, 0.5))
        assert grid.is_state_free((1.9999, 0.5, 0.5))


def _dense_segment_free(grid, a, b, spacing=0.05):
    a = np.asarray(a, float)
    b = np.asarray(b, float)
    dist = float(np.linalg.norm(b - a))
    n = max(int(np.ceil(dist / (spacing * grid.voxel_size))), 1)
    t = np.linspace(0.0, 1.0, n + 1)
    pts = a[None, :] + t[:, None] * (b - a)[None, :]
    return bool(grid.points_free_mask(pts).all()), pts


class TestSegmentFree:
    def test_all_free_diagonal(self):
        grid = OccupancyGrid(np.zeros((16, 16, 16), dtype=bool))
        assert grid.segment_free((0.5, 0.5, 0.5), (15.0, 15.0, 15.0))

    def test_wall_blocks(self):
        cells = np.zeros((16, 16, 16), dtype=bool)
        cells[8, :, :] = True
        grid = OccupancyGrid(cells)
        assert not grid.segment_free((2.0, 2.0, 2.0), (14.0, 2.0, 2.0))

    def test_point_segment_equals_state_check(self):
        grid = generate_map_spheres((16, 16, 16), 12, seed=9)
        rng = np.random.default_rng(0)
        for _ in range(200):
            p = rng.uniform(-2.0, 18.0, 3)
            assert grid.segment_free(p, p) == grid.is_state_free(p)

    def test_symmetry(self):
        grid = generate_map_spheres((16, 16, 16), 12, seed=11)
        rng = np.random.default_rng(1)
        for _ in range(300):
            a = rng.uniform(0.0, 16.0, 3)
            b = rng.uniform(0.0, 16.0, 3)
            assert grid.segment_free(a, b) == grid.segment_free(b, a)

    def test_supersampling_oracle(self):
        """1000 step-length segments: >=99.9% agreement with a 0.05-spacing
        oracle; any disagreement must sit within half a voxel of the occupied
        set (a corner clip the fixed 0.5-spacing samples can straddle)."""
        rng = np.random.default_rng(2)
        total = 0
        disagreements = 0
        for map_seed in range(5):
            grid = generate_map_spheres(
                (32, 32, 32),
                12,
                seed=100 + map_seed,
                radius_range=(1.5, 3.0),
                top_height_range=(2.0, 30.0),
            )
            occupied = np.argwhere(grid.cells)
            for _ in range(200):
                a = rng.uniform(0.0, 32.0, 3)
                b = np.clip(a + rng.uniform(-3.0, 3.0, 3), 0.0, 32.0)
                coarse = grid.segment_free(a, b)
                dense, pts = _dense_segment_free(grid, a, b)
                total += 1
                if coarse != dense:
                    disagreements += 1
                    # Distance from sample points to the occupied voxel boxes.
                    gaps = np.abs(pts[:, None, :] - (occupied[None, :, :] + 0.5)) - 0.5
                    dist = np.linalg.norm(np.maximum(gaps, 0.0), axis=2).min()
                    assert dist <= 0.5 * grid.voxel_size
        assert disagreements / total <= 0.001


class TestMeasure:
    def test_all_free(self):
        grid = OccupancyGrid(np.zeros((4, 4, 4), dtype=bool))
        assert grid.free_measure() == 64.0

    def test_partially_occupied(self):
        cells = np.zeros((4, 4, 4), dtype=bool)
        cells.flat[:10] = True
        assert OccupancyGrid(cells).free_measure() == 54.0

    def test_complement_identity(self):
        grid = generate_map_spheres((32, 32, 32), 20, seed=6)
        occupied = int(grid.cells.sum())
        assert grid.free_measure() + occupied * grid.voxel_size**3 == float(grid.cells.size)

    def test_generated_matches_direct_count(self):
        grid = generate_map_spheres((16, 16, 16), 8, seed=8)
        assert grid.free_measure() == float((~grid.cells).sum())


class TestProblemEncoding:
    def test_two_nonzero_voxels(self):
        grid = OccupancyGrid(np.zeros((8, 8, 8), dtype=bool))
        problem = PlanningProblem(grid, (1.0, 1.0, 1.0), (6.0, 6.0, 6.0))
        e1, e2 = encode_problem_grids(problem)
        assert int((e1 > 0).sum()) == 2
        assert e1[1, 1, 1] == 1
        assert e1[6, 6, 6] == 2

    def test_occupied_init_rejected(self):
        cells = np.zeros((8, 8, 8), dtype=bool)
        cells[1, 1, 1] = True
        grid = OccupancyGrid(cells)
        with pytest.raises(InvalidProblemError):
            PlanningProblem(grid, (1.5, 1.5, 1.5), (6.0, 6.0, 6.0))

    def test_e2_is_occupancy(self):
        grid = generate_map_spheres((16, 16, 16), 6, seed=12)
        problem = random_free_problem(grid, 3, 6.0)
        _, e2 = encode_problem_grids(problem)
        assert np.array_equal(e2.astype(bool), grid.cells)

    def test_goal_radius_positive(self):
        grid = OccupancyGrid(np.zeros((8, 8, 8), dtype=bool))
        with pytest.raises(InvalidProblemError):
            PlanningProblem(grid, (1.0, 1.0, 1.0), (6.0, 6.0, 6.0), goal_radius=0.0)


class TestGridBytes:
    def test_round_trip(self):
        grid = generate_map_spheres((9, 7, 5), 6, seed=13, voxel_size=0.5)
        loaded = OccupancyGrid.from_bytes(grid.to_bytes())
        assert np.array_equal(loaded.cells, grid.cells)
        assert loaded.voxel_size == grid.voxel_size

    def test_frozen_layout_x_fastest(self):
        cells = np.zeros((2, 2, 1), dtype=bool)
        cells[1, 0, 0] = True
        got = OccupancyGrid(cells).to_bytes()
        expected = b"PGRID\x01" + struct.pack("<IIId", 2, 2, 1, 1.0) + bytes([0, 1, 0, 0])
        assert got == expected

    def test_bad_magic(self):
        with pytest.raises(FormatError):
            OccupancyGrid.from_bytes(b"NOPE\x00\x00" + b"\x00" * 32)

    def test_truncated(self):
        data = OccupancyGrid(np.zeros((4, 4, 4), dtype=bool)).to_bytes()
        with pytest.raises(FormatError):
            OccupancyGrid.from_bytes(data[:-5])

    def test_bad_values(self):
        data = bytearray(OccupancyGrid(np.zeros((2, 2, 2), dtype=bool)).to_bytes())
        data[-1] = 7
        with pytest.raises(FormatError):
            OccupancyGrid.from_bytes(bytes(data))


class TestRandomProblem:
    def test_deterministic_and_separated(self):
        grid = generate_map_spheres((32, 32, 32), 25, seed=14)
        a = random_free_problem(grid, 5, 16.0)
        b = random_free_problem(grid, 5, 16.0)
        assert np.array_equal(a.x_init, b.x_init) and np.array_equal(a.x_goal, b.x_goal)
        assert np.linalg.norm(a.x_goal - a.x_init) >= 16.0 - 1e-9

    def test_endpoints_share_component(self):
        grid = generate_map_spheres((16, 16, 16), 10, seed=15)
        problem = random_free_problem(grid, 9, 8.0)
        labels, _ = grid.free_components()
        assert labels[grid.voxel_of(problem.x_init)] == labels[grid.voxel_of(problem.x_goal)]

    def test_fully_occupied_rejected(self):
        grid = OccupancyGrid(np.ones((4, 4, 4), dtype=bool))
        with pytest.raises(InvalidProblemError):
            random_free_problem(grid, 0, 1.0)
