"""3D occupancy grids: procedural worlds, collision queries, binary serialization.

Voxel (i, j, k) covers the half-open world box [i, i+1) x [j, j+1) x [k, k+1)
scaled by ``voxel_size``; the world bounding box is [0, dims * voxel_size).
Points outside the bounding box are treated as occupied.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .costs import CostParams
from .errors import FormatError, InvalidProblemError

GRID_MAGIC = b"PGRID\x01"
_GRID_HEADER = struct.Struct("<IIId")  # dims x, y, z then voxel_size

_CUBE_3 = np.ones((3, 3, 3), dtype=bool)  # 26-connectivity structuring element


def encode_voxel_grid(values: np.ndarray, voxel_size: float) -> bytes:
    """Pack a uint8 voxel array into the PGRID container (x varying fastest)."""
    values = np.asarray(values)
    if values.ndim != 3:
        raise ValueError(f"voxel array must be 3D, got shape {values.shape}")
    nx, ny, nz = values.shape
    header = GRID_MAGIC + _GRID_HEADER.pack(nx, ny, nz, float(voxel_size))
    payload = np.ascontiguousarray(values.transpose(2, 1, 0), dtype=np.uint8)
    return header + payload.tobytes()


def decode_voxel_grid(data: bytes) -> tuple[np.ndarray, float]:
    """Unpack a PGRID container into (uint8 array of shape (nx, ny, nz), voxel_size)."""
    if data[: len(GRID_MAGIC)] != GRID_MAGIC:
        raise FormatError("bad magic: not a PGRID payload")
    off = len(GRID_MAGIC)
    if len(data) < off + _GRID_HEADER.size:
        raise FormatError("truncated PGRID header")
    nx, ny, nz, voxel_size = _GRID_HEADER.unpack_from(data, off)
    off += _GRID_HEADER.size
    expect = nx * ny * nz
    body = data[off:]
    if len(body) != expect:
        raise FormatError(f"PGRID payload length {len(body)} != dims product {expect}")
    if min(nx, ny, nz) == 0 or voxel_size <= 0:
        raise FormatError("PGRID header declares zero-volume dims or nonpositive voxel size")
    flat = np.frombuffer(body, dtype=np.uint8)
    values = flat.reshape(nz, ny, nx).transpose(2, 1, 0).copy()
    return values, voxel_size


@dataclass(frozen=True, eq=False)
class OccupancyGrid:
    """Dense boolean voxel map; ``cells[x, y, z]`` is True where occupied."""

    cells: np.ndarray
    voxel_size: float = 1.0

    def __post_init__(self) -> None:
        cells = np.asarray(self.cells)
        if cells.ndim != 3 or min(cells.shape) < 1:
            raise ValueError(f"cells must be a non-empty 3D array, got shape {cells.shape}")
        if self.voxel_size <= 0:
            raise ValueError(f"voxel_size must be positive, got {self.voxel_size}")
        cells = np.ascontiguousarray(cells.astype(bool))
        cells.setflags(write=False)
        object.__setattr__(self, "cells", cells)

    @property
    def dims(self) -> tuple[int, int, int]:
        return self.cells.shape  # type: ignore[return-value]

    @property
    def world_size(self) -> np.ndarray:
        return np.asarray(self.cells.shape, dtype=float) * self.voxel_size

    def voxel_of(self, point) -> tuple[int, int, int] | None:
        """Voxel index containing a world point, or None when out of bounds."""
        p = np.asarray(point, dtype=float)
        idx = np.floor(p / self.voxel_size).astype(np.int64)
        if np.any(idx < 0) or np.any(idx >= np.asarray(self.cells.shape)):
            return None
        return int(idx[0]), int(idx[1]), int(idx[2])

    def voxel_center(self, ijk) -> np.ndarray:
        return (np.asarray(ijk, dtype=float) + 0.5) * self.voxel_size

    def is_state_free(self, point) -> bool:
        """True when the point lies inside the map in a free voxel."""
        idx = self.voxel_of(point)
        if idx is None:
            return False
        return not bool(self.cells[idx])

    def points_free_mask(self, points: np.ndarray) -> np.ndarray:
        """Vectorized is_state_free over an (n, 3) array of world points."""
        pts = np.asarray(points, dtype=float)
        idx = np.floor(pts / self.voxel_size).astype(np.int64)
        inside = np.all((idx >= 0) & (idx < np.asarray(self.cells.shape)), axis=1)
        free = np.zeros(len(pts), dtype=bool)
        if inside.any():
            ii = idx[inside]
            free[inside] = ~self.cells[ii[:, 0], ii[:, 1], ii[:, 2]]
        return free

    def segment_free(self, a, b) -> bool:
        """Check a straight segment by point samples spaced <= 0.5 * voxel_size.

        Both endpoints are always included, so segment_free(a, a) reduces to
        is_state_free(a). Endpoints are ordered canonically before sampling,
        making the check exactly symmetric.
        """
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        if tuple(b) < tuple(a):
            a, b = b, a
        delta = b - a
        dist = float(np.linalg.norm(delta))
        steps = max(int(np.ceil(dist / (0.5 * self.voxel_size))), 1)
        t = np.linspace(0.0, 1.0, steps + 1)
        pts = a[None, :] + t[:, None] * delta[None, :]
        return bool(self.points_free_mask(pts).all())

    def occupied_fraction(self) -> float:
        return float(self.cells.mean())

    def free_measure(self) -> float:
        """Lebesgue measure of free space: free voxel count times voxel volume."""
        free = int(self.cells.size - np.count_nonzero(self.cells))
        return free * self.voxel_size**3

    def free_components(self) -> tuple[np.ndarray, int]:
        """Label 26-connected free-space components; returns (labels, count)."""
        return ndimage.label(~self.cells, structure=_CUBE_3)

    def to_bytes(self) -> bytes:
        return encode_voxel_grid(self.cells.astype(np.uint8), self.voxel_size)

    @classmethod
    def from_bytes(cls, data: bytes) -> "OccupancyGrid":
        values, voxel_size = decode_voxel_grid(data)
        if values.max(initial=0) > 1:
            raise FormatError("occupancy payload contains values outside {0, 1}")
        return cls(values.astype(bool), voxel_size)


def rasterize_sphere(cells: np.ndarray, center, radius: float, voxel_size: float = 1.0) -> None:
    """Mark occupied every voxel whose center lies inside the sphere."""
    if radius <= 0:
        raise ValueError(f"radius must be positive, got {radius}")
    center = np.asarray(center, dtype=float)
    lo = np.maximum(np.floor((center - radius) / voxel_size).astype(int), 0)
    hi = np.minimum(np.ceil((center + radius) / voxel_size).astype(int) + 1, cells.shape)
    if np.any(lo >= hi):
        return
    axes = [((np.arange(lo[d], hi[d]) + 0.5) * voxel_size - center[d]) for d in range(3)]
    dx, dy, dz = np.meshgrid(*axes, indexing="ij")
    inside = dx * dx + dy * dy + dz * dz <= radius * radius
    cells[lo[0] : hi[0], lo[1] : hi[1], lo[2] : hi[2]] |= inside


def rasterize_cylinder(
    cells: np.ndarray, center_xy, radius: float, z_range, voxel_size: float = 1.0
) -> None:
    """Mark occupied every voxel whose center lies inside the vertical cylinder."""
    if radius <= 0:
        raise ValueError(f"radius must be positive, got {radius}")
    z_lo, z_hi = float(z_range[0]), float(z_range[1])
    if z_hi < z_lo:
        raise ValueError(f"z_range must be ordered, got {z_range}")
    cx, cy = float(center_xy[0]), float(center_xy[1])
    lo_x = max(int(np.floor((cx - radius) / voxel_size)), 0)
    hi_x = min(int(np.ceil((cx + radius) / voxel_size)) + 1, cells.shape[0])
    lo_y = max(int(np.floor((cy - radius) / voxel_size)), 0)
    hi_y = min(int(np.ceil((cy + radius) / voxel_size)) + 1, cells.shape[1])
    if lo_x >= hi_x or lo_y >= hi_y:
        return
    zc = (np.arange(cells.shape[2]) + 0.5) * voxel_size
    z_ok = (zc >= z_lo) & (zc <= z_hi)
    if not z_ok.any():
        return
    xs = (np.arange(lo_x, hi_x) + 0.5) * voxel_size - cx
    ys = (np.arange(lo_y, hi_y) + 0.5) * voxel_size - cy
    dx, dy = np.meshgrid(xs, ys, indexing="ij")
    disk = dx * dx + dy * dy <= radius * radius
    cells[lo_x:hi_x, lo_y:hi_y, :] |= disk[:, :, None] & z_ok[None, None, :]


def _check_dims(dims) -> tuple[int, int, int]:
    dims = tuple(int(d) for d in dims)
    if len(dims) != 3 or min(dims) < 1:
        raise ValueError(f"dims must be three positive integers, got {dims}")
    return dims


def generate_map_spheres(
    dims,
    count: int,
    seed: int,
    radius_range=(0.4, 2.5),
    top_height_range=(0.5, 7.5),
    voxel_size: float = 1.0,
) -> OccupancyGrid:
    """Random sphere field: centers uniform in x/y, sphere top uniform in height.

    A sphere with top height h and radius r is centered at z = h - r, so small
    spheres can float while large ones intersect the ground.
    """
    dims = _check_dims(dims)
    if count < 0:
        raise ValueError(f"count must be nonnegative, got {count}")
    rng = np.random.default_rng(seed)
    world = np.asarray(dims, dtype=float) * voxel_size
    cells = np.zeros(dims, dtype=bool)
    xs = rng.uniform(0.0, world[0], count)
    ys = rng.uniform(0.0, world[1], count)
    radii = rng.uniform(radius_range[0], radius_range[1], count)
    tops = rng.uniform(top_height_range[0], top_height_range[1], count)
    for x, y, r, top in zip(xs, ys, radii, tops):
        rasterize_sphere(cells, (x, y, top - r), r, voxel_size)
    return OccupancyGrid(cells, voxel_size)


def generate_map_cylinders(
    dims,
    sphere_count: int,
    cylinder_count: int,
    seed: int,
    cylinder_height_range=(5.5, 10.5),
    cylinder_radius_range=(0.4, 2.5),
    sphere_radius_range=(0.4, 2.5),
    sphere_top_height_range=(0.5, 7.5),
    voxel_size: float = 1.0,
) -> OccupancyGrid:
    """Sphere field plus ground-standing vertical cylinders."""
    dims = _check_dims(dims)
    if sphere_count < 0 or cylinder_count < 0:
        raise ValueError("obstacle counts must be nonnegative")
    base = generate_map_spheres(
        dims,
        sphere_count,
        seed,
        radius_range=sphere_radius_range,
        top_height_range=sphere_top_height_range,
        voxel_size=voxel_size,
    )
    cells = base.cells.copy()
    rng = np.random.default_rng(seed + 1)
    world = np.asarray(dims, dtype=float) * voxel_size
    xs = rng.uniform(0.0, world[0], cylinder_count)
    ys = rng.uniform(0.0, world[1], cylinder_count)
    radii = rng.uniform(cylinder_radius_range[0], cylinder_radius_range[1], cylinder_count)
    heights = rng.uniform(cylinder_height_range[0], cylinder_height_range[1], cylinder_count)
    for x, y, r, h in zip(xs, ys, radii, heights):
        rasterize_cylinder(cells, (x, y), r, (0.0, h), voxel_size)
    return OccupancyGrid(cells, voxel_size)


def generate_map_with_density(
    dims,
    density: float,
    seed: int,
    radius_range=(1.0, 3.0),
    voxel_size: float = 1.0,
    max_obstacles: int = 100_000,
) -> OccupancyGrid:
    """Add random full-height spheres until the occupied fraction reaches density.

    The obstacle count self-adjusts: overlap between spheres removes less free
    space than disjoint placements, so the loop keeps adding until the measured
    fraction crosses the target.
    """
    dims = _check_dims(dims)
    if not 0.0 <= density < 1.0:
        raise ValueError(f"density must be in [0, 1), got {density}")
    rng = np.random.default_rng(seed)
    world = np.asarray(dims, dtype=float) * voxel_size
    cells = np.zeros(dims, dtype=bool)
    placed = 0
    while cells.mean() < density:
        if placed >= max_obstacles:
            raise ValueError(f"density {density} not reached after {max_obstacles} obstacles")
        center = rng.uniform(0.0, world, 3)
        radius = rng.uniform(radius_range[0], radius_range[1])
        rasterize_sphere(cells, center, radius, voxel_size)
        placed += 1
    return OccupancyGrid(cells, voxel_size)


@dataclass(frozen=True, eq=False)
class PlanningProblem:
    """Start/goal query on an occupancy grid with its edge-cost parameters."""

    grid: OccupancyGrid
    x_init: np.ndarray
    x_goal: np.ndarray
    goal_radius: float = 1.5
    cost_params: CostParams = field(default_factory=CostParams)

    def __post_init__(self) -> None:
        for name in ("x_init", "x_goal"):
            p = np.asarray(getattr(self, name), dtype=float)
            if p.shape != (3,):
                raise InvalidProblemError(f"{name} must be a 3-vector, got shape {p.shape}")
            object.__setattr__(self, name, p)
        if self.goal_radius <= 0:
            raise InvalidProblemError(f"goal_radius must be positive, got {self.goal_radius}")
        for name in ("x_init", "x_goal"):
            if not self.grid.is_state_free(getattr(self, name)):
                raise InvalidProblemError(f"{name} lies outside the grid or in an occupied voxel")

    def digest(self) -> str:
        """Short stable hash of the grid, endpoints, and cost parameters."""
        h = hashlib.sha256()
        h.update(self.grid.to_bytes())
        h.update(np.asarray(self.x_init, dtype="<f8").tobytes())
        h.update(np.asarray(self.x_goal, dtype="<f8").tobytes())
        h.update(struct.pack("<ddd", self.goal_radius, self.cost_params.beta1, self.cost_params.beta2))
        return h.hexdigest()[:16]


def encode_problem_grids(problem: PlanningProblem) -> tuple[np.ndarray, np.ndarray]:
    """Split a problem into endpoint and obstacle grids.

    Returns (e1, e2): e1 is all zeros except 1 at the start voxel and 2 at the
    goal voxel; e2 is the occupancy grid as 0/1. Both are uint8 with the grid's
    dims.
    """
    grid = problem.grid
    init_vox = grid.voxel_of(problem.x_init)
    goal_vox = grid.voxel_of(problem.x_goal)
    if init_vox is None or goal_vox is None or grid.cells[init_vox] or grid.cells[goal_vox]:
        raise InvalidProblemError("start or goal voxel is occupied or out of bounds")
    e1 = np.zeros(grid.dims, dtype=np.uint8)
    e1[init_vox] = 1
    e1[goal_vox] = 2
    e2 = grid.cells.astype(np.uint8)
    return e1, e2


def random_free_problem(
    grid: OccupancyGrid,
    seed: int,
    min_separation: float,
    goal_radius: float = 1.5,
    cost_params: CostParams | None = None,
    max_attempts: int = 200,
) -> PlanningProblem:
    """Draw a solvable problem: endpoints in one 26-connected free component.

    Endpoints are voxel centers at least min_separation apart (world units),
    taken from the largest free component so a grid path always exists.
    """
    labels, n_comp = grid.free_components()
    if n_comp == 0:
        raise InvalidProblemError("grid has no free voxels")
    counts = np.bincount(labels.ravel())
    counts[0] = 0
    best = int(np.argmax(counts))
    voxels = np.argwhere(labels == best)
    rng = np.random.default_rng(seed)
    for _ in range(max_attempts):
        a = voxels[rng.integers(len(voxels))]
        dists = np.linalg.norm((voxels - a) * grid.voxel_size, axis=1)
        candidates = voxels[dists >= min_separation]
        if len(candidates) == 0:
            continue
        b = candidates[rng.integers(len(candidates))]
        return PlanningProblem(
            grid,
            grid.voxel_center(a),
            grid.voxel_center(b),
            goal_radius=goal_radius,
            cost_params=cost_params if cost_params is not None else CostParams(),
        )
    raise InvalidProblemError(
        f"no endpoint pair with separation >= {min_separation} after {max_attempts} attempts"
    )
