"""Edge and path costs, the shrinking connection radius, and set distances."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class CostParams:
    """Weights of the two edge-cost terms: beta1 * length + beta2 * turn angle."""

    beta1: float = 1.0
    beta2: float = 0.0

    def __post_init__(self) -> None:
        if self.beta1 <= 0:
            raise ValueError(f"beta1 must be positive, got {self.beta1}")
        if self.beta2 < 0:
            raise ValueError(f"beta2 must be nonnegative, got {self.beta2}")


@dataclass(frozen=True, eq=False)
class DirectedState:
    """A position plus the unit direction it was entered along (None at roots)."""

    position: np.ndarray
    incoming_dir: np.ndarray | None = None

    def __post_init__(self) -> None:
        p = np.asarray(self.position, dtype=float)
        if p.shape != (3,):
            raise ValueError(f"position must be a 3-vector, got shape {p.shape}")
        object.__setattr__(self, "position", p)
        if self.incoming_dir is not None:
            d = np.asarray(self.incoming_dir, dtype=float)
            if d.shape != (3,) or abs(float(np.linalg.norm(d)) - 1.0) > 1e-9:
                raise ValueError("incoming_dir must be a unit 3-vector")
            object.__setattr__(self, "incoming_dir", d)


def _edge_cost_raw(
    beta1: float,
    beta2: float,
    from_pos: np.ndarray,
    from_dir: np.ndarray | None,
    to_pos: np.ndarray,
) -> float:
    """Allocation-light edge cost used by planner inner loops."""
    dx = to_pos[0] - from_pos[0]
    dy = to_pos[1] - from_pos[1]
    dz = to_pos[2] - from_pos[2]
    length = math.sqrt(dx * dx + dy * dy + dz * dz)
    cost = beta1 * length
    if beta2 > 0.0 and from_dir is not None and length > 0.0:
        dot = (from_dir[0] * dx + from_dir[1] * dy + from_dir[2] * dz) / length
        cost += beta2 * math.acos(min(1.0, max(-1.0, dot)))
    return cost


def edge_cost(params: CostParams, state: DirectedState, to) -> float:
    """Cost of the straight move from state.position to ``to``.

    The angular term penalizes the turn between the incoming direction and the
    new segment; it is zero when the state has no incoming direction or the
    segment has zero length.
    """
    to_pos = np.asarray(to, dtype=float)
    return _edge_cost_raw(params.beta1, params.beta2, state.position, state.incoming_dir, to_pos)


def path_cost(params: CostParams, waypoints) -> float:
    """Sum of edge costs along a waypoint list, threading the turn direction.

    The first segment has no incoming direction; afterwards each segment's
    direction feeds the next one's angular term. Zero-length segments cost
    nothing and leave the threaded direction unchanged.
    """
    pts = np.asarray(waypoints, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 3:
        raise ValueError(f"waypoints must be an (n, 3) array, got shape {pts.shape}")
    if len(pts) < 2:
        raise ValueError("path_cost needs at least two waypoints")
    total = 0.0
    direction: np.ndarray | None = None
    for i in range(len(pts) - 1):
        a, b = pts[i], pts[i + 1]
        total += _edge_cost_raw(params.beta1, params.beta2, a, direction, b)
        seg = b - a
        length = float(np.linalg.norm(seg))
        if length > 0.0:
            direction = seg / length
    return total


def cost_to_go(params: CostParams, position, goal) -> float:
    """Admissible remaining-cost bound: beta1 times straight-line distance."""
    p = np.asarray(position, dtype=float)
    g = np.asarray(goal, dtype=float)
    return params.beta1 * float(np.linalg.norm(g - p))


def unit_ball_volume(m: int) -> float:
    """Lebesgue measure of the unit ball in m dimensions."""
    if m < 1:
        raise ValueError(f"dimension must be >= 1, got {m}")
    return math.pi ** (m / 2) / math.gamma(m / 2 + 1)


def rrt_star_radius(m: int, free_measure: float, n: int, step_cap: float) -> float:
    """Shrinking near-neighbor radius min(step_cap, gamma * (ln n / n)^(1/m)).

    gamma = (1 + eps) * (2 (1 + 1/m))^(1/m) * (free_measure / unit_ball)^(1/m)
    with eps = 0.1. For n == 1 the log term vanishes and the cap applies.
    """
    if m < 2:
        raise ValueError(f"dimension must be >= 2, got {m}")
    if n < 1:
        raise ValueError(f"vertex count must be >= 1, got {n}")
    if free_measure <= 0:
        raise ValueError(f"free_measure must be positive, got {free_measure}")
    if step_cap <= 0:
        raise ValueError(f"step_cap must be positive, got {step_cap}")
    if n == 1:
        return step_cap
    gamma = 1.1 * (2.0 * (1.0 + 1.0 / m)) ** (1.0 / m) * (free_measure / unit_ball_volume(m)) ** (
        1.0 / m
    )
    return min(step_cap, gamma * (math.log(n) / n) ** (1.0 / m))


def hausdorff_distance(a, b) -> float:
    """Symmetric Hausdorff distance between two finite 3D point sets."""
    pa = np.asarray(a, dtype=float)
    pb = np.asarray(b, dtype=float)
    if pa.ndim != 2 or pa.shape[1] != 3 or len(pa) == 0:
        raise ValueError(f"first point set must be non-empty (n, 3), got shape {pa.shape}")
    if pb.ndim != 2 or pb.shape[1] != 3 or len(pb) == 0:
        raise ValueError(f"second point set must be non-empty (n, 3), got shape {pb.shape}")
    # Chunk the (n, m) distance matrix to bound peak memory on large sets.
    def directed(xs: np.ndarray, ys: np.ndarray) -> float:
        worst = 0.0
        chunk = max(1, int(4_000_000 // max(len(ys), 1)))
        for start in range(0, len(xs), chunk):
            block = xs[start : start + chunk]
            d2 = ((block[:, None, :] - ys[None, :, :]) ** 2).sum(axis=2)
            worst = max(worst, float(np.sqrt(d2.min(axis=1)).max()))
        return worst

    return max(directed(pa, pb), directed(pb, pa))
