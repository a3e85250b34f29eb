"""Training-sample pipeline: grid-search ground truth, path dilation into
free-space regions, and the three-channel sample container."""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import ndimage

from .astar import GridPath, astar_plan
from .errors import FormatError
from .grid import (
    GRID_MAGIC,
    OccupancyGrid,
    PlanningProblem,
    decode_voxel_grid,
    encode_problem_grids,
    encode_voxel_grid,
    generate_map_cylinders,
    generate_map_spheres,
    random_free_problem,
)
from .seeding import derive_seed

SAMPLE_MAGIC = b"PSAMP\x01"
_COUNT = struct.Struct("<I")
_CUBE_3 = np.ones((3, 3, 3), dtype=bool)


def dilate_path(path: GridPath, grid: OccupancyGrid, radius_voxels: int = 2) -> np.ndarray:
    """Grow a voxel path into a free-space region mask.

    A voxel is set iff its Chebyshev distance to some path voxel is at most
    radius_voxels and the voxel itself is free; occupied voxels never enter
    the region.
    """
    if radius_voxels < 1:
        raise ValueError(f"radius_voxels must be >= 1, got {radius_voxels}")
    mask = np.zeros(grid.dims, dtype=bool)
    idx = np.asarray(path.voxels, dtype=np.int64)
    mask[idx[:, 0], idx[:, 1], idx[:, 2]] = True
    # Iterating the 3x3x3 cube r times dilates by a Chebyshev ball of radius r.
    grown = ndimage.binary_dilation(mask, structure=_CUBE_3, iterations=radius_voxels)
    return grown & ~grid.cells


@dataclass(frozen=True, eq=False)
class TrainingSample:
    """Three aligned channels: endpoints (e1), occupancy (e2), target region."""

    e1: np.ndarray
    e2: np.ndarray
    label: np.ndarray
    voxel_size: float = 1.0

    def __post_init__(self) -> None:
        e1 = np.ascontiguousarray(self.e1, dtype=np.uint8)
        e2 = np.ascontiguousarray(self.e2, dtype=np.uint8)
        label = np.ascontiguousarray(self.label, dtype=np.uint8)
        if not (e1.shape == e2.shape == label.shape) or e1.ndim != 3:
            raise ValueError(
                f"channels must share 3D dims, got {e1.shape}, {e2.shape}, {label.shape}"
            )
        if e1.max(initial=0) > 2:
            raise ValueError("e1 values must lie in {0, 1, 2}")
        if e2.max(initial=0) > 1 or label.max(initial=0) > 1:
            raise ValueError("e2 and label values must lie in {0, 1}")
        for name, arr in (("e1", e1), ("e2", e2), ("label", label)):
            object.__setattr__(self, name, arr)


def make_training_sample(problem: PlanningProblem, dilation_radius: int = 2) -> TrainingSample:
    """Ground-truth sample for one problem: grid search then dilation."""
    e1, e2 = encode_problem_grids(problem)
    grid = problem.grid
    path = astar_plan(grid, grid.voxel_of(problem.x_init), grid.voxel_of(problem.x_goal))
    label = dilate_path(path, grid, dilation_radius)
    return TrainingSample(e1, e2, label.astype(np.uint8), grid.voxel_size)


def save_sample(sample: TrainingSample) -> bytes:
    """Serialize: magic, channel count, then three voxel-grid payloads."""
    chunks = [SAMPLE_MAGIC, _COUNT.pack(3)]
    for arr in (sample.e1, sample.e2, sample.label):
        chunks.append(encode_voxel_grid(arr, sample.voxel_size))
    return b"".join(chunks)


def load_sample(data: bytes) -> TrainingSample:
    if data[: len(SAMPLE_MAGIC)] != SAMPLE_MAGIC:
        raise FormatError("bad magic: not a PSAMP payload")
    off = len(SAMPLE_MAGIC)
    if len(data) < off + _COUNT.size:
        raise FormatError("truncated PSAMP header")
    (count,) = _COUNT.unpack_from(data, off)
    off += _COUNT.size
    if count != 3:
        raise FormatError(f"PSAMP channel count must be 3, got {count}")
    grids = []
    voxel_size = None
    for _ in range(3):
        if data[off : off + len(GRID_MAGIC)] != GRID_MAGIC:
            raise FormatError("PSAMP channel is not a voxel-grid payload")
        head_end = off + len(GRID_MAGIC) + 20
        if len(data) < head_end:
            raise FormatError("truncated PSAMP channel header")
        nx, ny, nz = struct.unpack_from("<III", data, off + len(GRID_MAGIC))
        end = head_end + nx * ny * nz
        if len(data) < end:
            raise FormatError("truncated PSAMP channel payload")
        values, vs = decode_voxel_grid(data[off:end])
        grids.append(values)
        voxel_size = vs if voxel_size is None else voxel_size
        off += end - off
    if off != len(data):
        raise FormatError(f"{len(data) - off} trailing bytes after PSAMP channels")
    return TrainingSample(grids[0], grids[1], grids[2], voxel_size or 1.0)


def generate_sample_case(
    dims,
    sample_seed: int,
    dilation_radius: int = 2,
    kind: str = "spheres",
    obstacle_count: int | None = None,
    min_separation: float | None = None,
    voxel_size: float = 1.0,
) -> tuple[TrainingSample, dict]:
    """One corpus entry: seeded random map, random solvable query, sample.

    Returns the sample plus a metadata dict (seeds, endpoints, path cost) for
    the dataset manifest. Fully determined by the arguments.
    """
    dims = tuple(int(d) for d in dims)
    volume = dims[0] * dims[1] * dims[2]
    if obstacle_count is None:
        obstacle_count = max(4, volume // 120)
    map_seed = derive_seed("map", sample_seed)
    if kind == "spheres":
        grid = generate_map_spheres(dims, obstacle_count, map_seed, voxel_size=voxel_size)
    elif kind == "cylinders":
        grid = generate_map_cylinders(
            dims, obstacle_count // 2, obstacle_count // 2, map_seed, voxel_size=voxel_size
        )
    else:
        raise ValueError(f"unknown map kind {kind!r}")
    if min_separation is None:
        min_separation = 0.5 * max(dims) * voxel_size
    problem = random_free_problem(grid, derive_seed("problem", sample_seed), min_separation)
    sample = make_training_sample(problem, dilation_radius)
    path = astar_plan(grid, grid.voxel_of(problem.x_init), grid.voxel_of(problem.x_goal))
    meta = {
        "sample_seed": int(sample_seed),
        "map_seed": int(map_seed),
        "kind": kind,
        "dims": list(dims),
        "obstacle_count": int(obstacle_count),
        "init_voxel": list(grid.voxel_of(problem.x_init)),
        "goal_voxel": list(grid.voxel_of(problem.x_goal)),
        "path_cost": path.cost,
        "region_voxels": int(sample.label.sum()),
    }
    return sample, meta


def generate_dataset(
    out_dir,
    count: int,
    dims,
    seed: int,
    dilation_radius: int = 2,
    kind: str = "spheres",
    obstacle_count: int | None = None,
    min_separation: float | None = None,
) -> dict:
    """Write ``count`` sample files plus manifest.json; returns the manifest."""
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    entries = []
    for i in range(count):
        sample, meta = generate_sample_case(
            dims,
            derive_seed(seed, i),
            dilation_radius=dilation_radius,
            kind=kind,
            obstacle_count=obstacle_count,
            min_separation=min_separation,
        )
        name = f"sample_{i:05d}.psamp"
        (out / name).write_bytes(save_sample(sample))
        meta["file"] = name
        entries.append(meta)
    manifest = {
        "seed": int(seed),
        "count": int(count),
        "dims": [int(d) for d in dims],
        "dilation_radius": int(dilation_radius),
        "kind": kind,
        "files": entries,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2))
    return manifest
