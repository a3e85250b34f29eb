"""Resolution-optimal grid search: A* over 26-connected voxels plus a
uniform-cost cross-check used to validate it."""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np

from .errors import NoPathError
from .grid import OccupancyGrid

# 26-neighborhood offsets with unit-grid Euclidean step weights and the step
# type (squared length: 1 straight, 2 face diagonal, 3 cube diagonal).
_OFFSETS: list[tuple[int, int, int, float, int]] = [
    (dx, dy, dz, math.sqrt(dx * dx + dy * dy + dz * dz), dx * dx + dy * dy + dz * dz)
    for dx in (-1, 0, 1)
    for dy in (-1, 0, 1)
    for dz in (-1, 0, 1)
    if (dx, dy, dz) != (0, 0, 0)
]

_SQRT2 = math.sqrt(2.0)
_SQRT3 = math.sqrt(3.0)


def _canonical_cost(n1, n2, n3, voxel_size: float):
    """Path cost from step-type counts, with a pinned operation order.

    Any two minimal paths share the same count triple (1, sqrt 2, sqrt 3 are
    rationally independent), so recombining counts this way makes independent
    searches report bit-identical costs instead of order-of-summation ulps.
    """
    return (n1 + n2 * _SQRT2 + n3 * _SQRT3) * voxel_size


@dataclass(frozen=True)
class GridPath:
    """Ordered voxel path; cost is the sum of Euclidean center-to-center steps."""

    voxels: tuple[tuple[int, int, int], ...]
    cost: float


def _check_endpoint(grid: OccupancyGrid, voxel, name: str) -> tuple[int, int, int]:
    v = tuple(int(c) for c in voxel)
    if len(v) != 3:
        raise ValueError(f"{name} must be a 3-tuple of voxel indices, got {voxel}")
    if any(c < 0 for c in v) or any(c >= d for c, d in zip(v, grid.dims)):
        raise ValueError(f"{name} {v} outside grid dims {grid.dims}")
    if grid.cells[v]:
        raise ValueError(f"{name} voxel {v} is occupied")
    return v


def astar_plan(grid: OccupancyGrid, start_voxel, goal_voxel) -> GridPath:
    """Shortest 26-connected free path between two voxels.

    Edge weight is the Euclidean distance between voxel centers; the heuristic
    is the Euclidean distance to the goal (admissible and consistent, so the
    returned cost is exact). Heap ties break on smaller heuristic, then on
    insertion order.
    """
    start = _check_endpoint(grid, start_voxel, "start")
    goal = _check_endpoint(grid, goal_voxel, "goal")
    vs = grid.voxel_size
    if start == goal:
        return GridPath((start,), 0.0)

    nx, ny, nz = grid.dims
    occ = grid.cells.ravel()
    n = occ.size
    syx, syz = ny * nz, nz
    start_f = start[0] * syx + start[1] * syz + start[2]
    goal_f = goal[0] * syx + goal[1] * syz + goal[2]
    gx, gy, gz = goal

    g = np.full(n, np.inf)
    parent = np.full(n, -1, dtype=np.int64)
    closed = np.zeros(n, dtype=bool)
    g[start_f] = 0.0

    def heuristic(x: int, y: int, z: int) -> float:
        return vs * math.sqrt((x - gx) ** 2 + (y - gy) ** 2 + (z - gz) ** 2)

    seq = 0
    h0 = heuristic(*start)
    heap: list[tuple[float, float, int, int]] = [(h0, h0, seq, start_f)]
    while heap:
        _, _, _, cur = heapq.heappop(heap)
        if closed[cur]:
            continue
        if cur == goal_f:
            break
        closed[cur] = True
        x, rem = divmod(cur, syx)
        y, z = divmod(rem, syz)
        g_cur = g[cur]
        for dx, dy, dz, w, _ in _OFFSETS:
            xn, yn, zn = x + dx, y + dy, z + dz
            if xn < 0 or yn < 0 or zn < 0 or xn >= nx or yn >= ny or zn >= nz:
                continue
            nb = cur + dx * syx + dy * syz + dz
            if occ[nb] or closed[nb]:
                continue
            cand = g_cur + w * vs
            if cand < g[nb]:
                g[nb] = cand
                parent[nb] = cur
                h = heuristic(xn, yn, zn)
                seq += 1
                heapq.heappush(heap, (cand + h, h, seq, nb))
    else:
        raise NoPathError(f"no grid path from {start} to {goal}")

    voxels: list[tuple[int, int, int]] = []
    cur = goal_f
    while cur != -1:
        x, rem = divmod(cur, syx)
        y, z = divmod(rem, syz)
        voxels.append((int(x), int(y), int(z)))
        cur = int(parent[cur]) if cur != start_f else -1
    voxels.reverse()
    counts = [0, 0, 0]
    for a, b in zip(voxels, voxels[1:]):
        t = (a[0] - b[0]) ** 2 + (a[1] - b[1]) ** 2 + (a[2] - b[2]) ** 2
        counts[t - 1] += 1
    return GridPath(tuple(voxels), _canonical_cost(counts[0], counts[1], counts[2], vs))


def dijkstra_costs_from(grid: OccupancyGrid, start_voxel) -> np.ndarray:
    """Exact shortest-path cost from start to every voxel (inf if unreachable).

    Exhaustive uniform-cost search over the whole free space; shaped like the
    grid. Slower than astar_plan by design; it exists to cross-check it.
    """
    start = _check_endpoint(grid, start_voxel, "start")
    vs = grid.voxel_size
    nx, ny, nz = grid.dims
    occ = grid.cells.ravel()
    syx, syz = ny * nz, nz
    start_f = start[0] * syx + start[1] * syz + start[2]

    g = np.full(occ.size, np.inf)
    closed = np.zeros(occ.size, dtype=bool)
    steps = np.zeros((3, occ.size), dtype=np.int32)
    g[start_f] = 0.0
    seq = 0
    heap: list[tuple[float, int, int]] = [(0.0, seq, start_f)]
    while heap:
        d, _, cur = heapq.heappop(heap)
        if closed[cur]:
            continue
        closed[cur] = True
        x, rem = divmod(cur, syx)
        y, z = divmod(rem, syz)
        for dx, dy, dz, w, t in _OFFSETS:
            xn, yn, zn = x + dx, y + dy, z + dz
            if xn < 0 or yn < 0 or zn < 0 or xn >= nx or yn >= ny or zn >= nz:
                continue
            nb = cur + dx * syx + dy * syz + dz
            if occ[nb] or closed[nb]:
                continue
            cand = d + w * vs
            if cand < g[nb]:
                g[nb] = cand
                steps[:, nb] = steps[:, cur]
                steps[t - 1, nb] += 1
                seq += 1
                heapq.heappush(heap, (cand, seq, nb))
    out = np.full(occ.size, np.inf)
    reached = np.isfinite(g)
    out[reached] = _canonical_cost(
        steps[0, reached].astype(np.float64),
        steps[1, reached].astype(np.float64),
        steps[2, reached].astype(np.float64),
        vs,
    )
    return out.reshape(grid.dims)


def dijkstra_cost(grid: OccupancyGrid, start_voxel, goal_voxel) -> float:
    """Exact shortest-path cost between two voxels via uniform-cost search."""
    goal = _check_endpoint(grid, goal_voxel, "goal")
    costs = dijkstra_costs_from(grid, start_voxel)
    value = float(costs[goal])
    if math.isinf(value):
        raise NoPathError(f"no grid path from {tuple(start_voxel)} to {goal}")
    return value
