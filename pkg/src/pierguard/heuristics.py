"""Heuristic sampling regions, the samplers built on them, and region metrics.

A region is a voxel probability map over the same lattice as an occupancy
grid. Sampling draws a voxel (weighted by probability, above a threshold)
then a uniform point inside that voxel, which concentrates tree growth where
the region predicts the optimal path lies.
"""

from __future__ import annotations

import dataclasses
import struct
from dataclasses import dataclass

import numpy as np

from .errors import EmptyRegionError, FormatError
from .grid import OccupancyGrid
from .seeding import derive_seed

REGION_MAGIC = b"PHEUR\x01"
_REGION_HEADER = struct.Struct("<IIId")  # dims x, y, z then threshold


@dataclass(frozen=True, eq=False)
class HeuristicRegion:
    """Voxel probability map with a fixed activation threshold.

    Voxels with prob >= threshold are "active" and eligible for sampling;
    the active set and its cumulative weights are cached at construction.
    """

    probs: np.ndarray
    threshold: float = 0.5

    def __post_init__(self) -> None:
        probs = np.ascontiguousarray(self.probs, dtype=np.float32)
        if probs.ndim != 3 or min(probs.shape) < 1:
            raise ValueError(f"probs must be a non-empty 3D array, got shape {probs.shape}")
        if np.any(probs < 0.0) or np.any(probs > 1.0):
            raise ValueError("region probabilities must lie in [0, 1]")
        if not 0.0 < self.threshold < 1.0:
            raise ValueError(f"threshold must lie in (0, 1), got {self.threshold}")
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)
        active = np.argwhere(probs >= self.threshold)
        weights = probs[active[:, 0], active[:, 1], active[:, 2]].astype(np.float64)
        object.__setattr__(self, "_active", active)
        object.__setattr__(self, "_cum_weights", np.cumsum(weights))

    @property
    def dims(self) -> tuple[int, int, int]:
        return self.probs.shape  # type: ignore[return-value]

    @property
    def active_voxels(self) -> np.ndarray:
        """(k, 3) voxel indices with prob >= threshold, lexicographic order."""
        return self._active  # type: ignore[attr-defined]

    @property
    def active_count(self) -> int:
        return len(self.active_voxels)

    @classmethod
    def from_mask(cls, mask: np.ndarray, threshold: float = 0.5) -> "HeuristicRegion":
        """Binary mask as a region: active voxels get probability 1."""
        return cls(np.asarray(mask, dtype=bool).astype(np.float32), threshold)


def save_region(region: HeuristicRegion) -> bytes:
    nx, ny, nz = region.dims
    header = REGION_MAGIC + _REGION_HEADER.pack(nx, ny, nz, region.threshold)
    payload = np.ascontiguousarray(region.probs.transpose(2, 1, 0), dtype="<f4")
    return header + payload.tobytes()


def load_region(data: bytes) -> HeuristicRegion:
    if data[: len(REGION_MAGIC)] != REGION_MAGIC:
        raise FormatError("bad magic: not a PHEUR payload")
    off = len(REGION_MAGIC)
    if len(data) < off + _REGION_HEADER.size:
        raise FormatError("truncated PHEUR header")
    nx, ny, nz, threshold = _REGION_HEADER.unpack_from(data, off)
    off += _REGION_HEADER.size
    expect = 4 * nx * ny * nz
    if len(data) - off != expect:
        raise FormatError(f"PHEUR payload length {len(data) - off} != expected {expect}")
    flat = np.frombuffer(data, dtype="<f4", offset=off)
    probs = flat.reshape(nz, ny, nx).transpose(2, 1, 0).copy()
    if np.any(probs < 0.0) or np.any(probs > 1.0) or not np.isfinite(probs).all():
        raise FormatError("PHEUR probabilities outside [0, 1]")
    if not 0.0 < threshold < 1.0:
        raise FormatError(f"PHEUR threshold outside (0, 1): {threshold}")
    return HeuristicRegion(probs, threshold)


def sample_uniform(grid: OccupancyGrid, rng: np.random.Generator) -> np.ndarray:
    """Uniform point over the world bounding box, free and occupied alike."""
    return rng.uniform(0.0, grid.world_size, 3)


def sample_region(
    region: HeuristicRegion, grid: OccupancyGrid, rng: np.random.Generator
) -> np.ndarray:
    """Probability-weighted active voxel, then a uniform point inside it."""
    if region.dims != grid.dims:
        raise ValueError(f"region dims {region.dims} != grid dims {grid.dims}")
    cum = region._cum_weights  # type: ignore[attr-defined]
    if len(cum) == 0:
        raise EmptyRegionError("region has no voxel at or above its threshold")
    u = rng.random() * cum[-1]
    idx = min(int(np.searchsorted(cum, u, side="right")), len(cum) - 1)
    voxel = region.active_voxels[idx]
    return (voxel + rng.random(3)) * grid.voxel_size


def neural_sample(
    region: HeuristicRegion,
    grid: OccupancyGrid,
    mu: float,
    rng: np.random.Generator,
    uniform_fallback: bool = True,
) -> np.ndarray:
    """Gated sampler: uniform with probability mu, region-biased otherwise.

    An empty region falls back to uniform (keeping the planner complete) unless
    the fallback is disabled, as the connectivity metric requires.
    """
    if not 0.0 <= mu <= 1.0:
        raise ValueError(f"mu must lie in [0, 1], got {mu}")
    if rng.random() < mu:
        return sample_uniform(grid, rng)
    try:
        return sample_region(region, grid, rng)
    except EmptyRegionError:
        if uniform_fallback:
            return sample_uniform(grid, rng)
        raise


@dataclass(frozen=True, eq=False)
class InformedSet:
    """Prolate spheroid of points that can shorten the current best path."""

    focus1: np.ndarray
    focus2: np.ndarray
    c_best: float

    def __post_init__(self) -> None:
        for name in ("focus1", "focus2"):
            p = np.asarray(getattr(self, name), dtype=float)
            if p.shape != (3,):
                raise ValueError(f"{name} must be a 3-vector, got shape {p.shape}")
            object.__setattr__(self, name, p)
        if not np.isfinite(self.c_best):
            raise ValueError("c_best must be finite to sample the informed set")
        if self.c_best < self.c_min:
            raise ValueError(f"c_best {self.c_best} < focal distance {self.c_min}")
        object.__setattr__(self, "_rotation", self._build_rotation())

    @property
    def c_min(self) -> float:
        return float(np.linalg.norm(self.focus2 - self.focus1))

    def _build_rotation(self) -> np.ndarray:
        """Rotation taking the x-axis onto the focal axis (identity if coincident foci)."""
        c_min = self.c_min
        if c_min == 0.0:
            return np.eye(3)
        a1 = (self.focus2 - self.focus1) / c_min
        helper = np.array([0.0, 0.0, 1.0]) if abs(a1[2]) < 0.9 else np.array([0.0, 1.0, 0.0])
        b = helper - np.dot(helper, a1) * a1
        b /= np.linalg.norm(b)
        c = np.cross(a1, b)
        return np.column_stack([a1, b, c])


def sample_informed(
    informed: InformedSet, grid: OccupancyGrid, rng: np.random.Generator
) -> np.ndarray:
    """Uniform point inside the spheroid: unit ball, axis scaling, rotation.

    Points may land outside the map or in obstacles; collision handling stays
    downstream exactly as for uniform sampling.
    """
    r_major = informed.c_best / 2.0
    r_minor = float(np.sqrt(max(informed.c_best**2 - informed.c_min**2, 0.0))) / 2.0
    while True:
        direction = rng.standard_normal(3)
        norm = float(np.linalg.norm(direction))
        if norm > 1e-12:
            break
    direction /= norm
    radius = rng.random() ** (1.0 / 3.0)
    ball = direction * radius
    scaled = np.array([r_major * ball[0], r_minor * ball[1], r_minor * ball[2]])
    center = (informed.focus1 + informed.focus2) / 2.0
    rot = informed._rotation  # type: ignore[attr-defined]
    return rot @ scaled + center


def region_connectivity_score(
    dataset,
    planner_config=None,
    trials: int = 1,
    iteration_cap: int = 5000,
    seed: int = 0,
) -> float:
    """Fraction of (problem, region) pairs solvable by sampling only the region.

    Each pair runs the region-guided planner with mu=0, no uniform fallback,
    and an iteration cap; a pair counts as connected when any of its seeded
    trials finds a path. Empty regions fail outright.
    """
    from .planners import PlannerConfig, plan_pierguard  # local import: planners uses samplers

    pairs = list(dataset)
    if not pairs:
        raise ValueError("connectivity score needs at least one (problem, region) pair")
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    base = planner_config if planner_config is not None else PlannerConfig()
    connected = 0
    for idx, (problem, region) in enumerate(pairs):
        if region.active_count == 0:
            continue
        for t in range(trials):
            config = dataclasses.replace(
                base,
                mu=0.0,
                uniform_fallback=False,
                max_iterations=iteration_cap,
                stop_on_first_solution=True,
                seed=derive_seed("connectivity", seed, idx, t),
            )
            result = plan_pierguard(problem, region, config)
            if result.best_path is not None:
                connected += 1
                break
    return connected / len(pairs)
