"""Search trees and four sampling-based planners on occupancy grids.

All four planners share the same machinery: exact nearest/near queries over an
array-backed tree, RRT*-style choose-parent and rewire, and a per-iteration
metrics log. They differ in sampling and tree topology:

- plan_rrt_star: single tree, uniform sampling.
- plan_informed: single tree, ellipsoidal sampling once a solution exists.
- plan_rrt_connect: two trees, uniform sampling, greedy inter-tree connection.
- plan_pierguard: two trees, region-biased sampling, cost-gated insertion,
  and branch-and-bound pruning against the best known path.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .costs import CostParams, _edge_cost_raw, cost_to_go, path_cost, rrt_star_radius
from .grid import OccupancyGrid, PlanningProblem
from .heuristics import (
    HeuristicRegion,
    InformedSet,
    neural_sample,
    sample_informed,
    sample_uniform,
)

# Position assigned to removed nodes so distance scans never select them.
_DEAD_POS = 1.0e18


@dataclass(frozen=True)
class PlannerConfig:
    """Shared planner knobs; samplers and stops that a planner ignores are inert."""

    mu: float = 0.5
    step: float = 2.0
    max_iterations: int = 50_000
    seed: int = 0
    radius_cap_steps: float = 3.0
    stop_on_first_solution: bool = False
    stop_at_cost: float | None = None
    uniform_fallback: bool = True
    audit_every: int = 0

    def __post_init__(self) -> None:
        if not 0.0 <= self.mu <= 1.0:
            raise ValueError(f"mu must lie in [0, 1], got {self.mu}")
        if self.step <= 0:
            raise ValueError(f"step must be positive, got {self.step}")
        if self.max_iterations < 1:
            raise ValueError(f"max_iterations must be >= 1, got {self.max_iterations}")
        if self.radius_cap_steps <= 0:
            raise ValueError(f"radius_cap_steps must be positive, got {self.radius_cap_steps}")
        if self.audit_every < 0:
            raise ValueError(f"audit_every must be >= 0, got {self.audit_every}")

    def to_dict(self) -> dict:
        return {
            "mu": self.mu,
            "step": self.step,
            "max_iterations": self.max_iterations,
            "seed": self.seed,
            "radius_cap_steps": self.radius_cap_steps,
            "stop_on_first_solution": self.stop_on_first_solution,
            "stop_at_cost": self.stop_at_cost,
            "uniform_fallback": self.uniform_fallback,
            "audit_every": self.audit_every,
        }


class LogEntry(NamedTuple):
    iteration: int
    nodes: int
    best_cost: float
    elapsed_s: float


@dataclass(eq=False)
class PlanResult:
    """Outcome of one planner run; the log has one entry per iteration."""

    planner: str
    best_path: np.ndarray | None
    best_cost: float
    log: list[LogEntry]
    stats: dict
    problem_digest: str
    config: PlannerConfig

    def to_json_dict(self) -> dict:
        """JSON-safe view; infinities become null."""
        def cost_or_none(c: float):
            return None if math.isinf(c) else c

        return {
            "planner": self.planner,
            "problem_digest": self.problem_digest,
            "config": self.config.to_dict(),
            "best_cost": cost_or_none(self.best_cost),
            "best_path": None if self.best_path is None else self.best_path.tolist(),
            "log": [
                [e.iteration, e.nodes, cost_or_none(e.best_cost), e.elapsed_s] for e in self.log
            ],
            "stats": self.stats,
        }


class SearchTree:
    """Growable array-backed tree with exact linear-scan neighbor queries.

    Node ids are insertion slots (root is 0) and are never reused; removed
    nodes keep their slot but move to a far sentinel position so distance
    scans skip them without masking.
    """

    def __init__(self, root_pos, target, params: CostParams, capacity: int = 1024):
        self.params = params
        self.target = np.asarray(target, dtype=float)
        self._pos = np.full((capacity, 3), _DEAD_POS)
        self._cost = np.zeros(capacity)
        self._parent = np.full(capacity, -1, dtype=np.int64)
        self._dir = np.zeros((capacity, 3))
        self._has_dir = np.zeros(capacity, dtype=bool)
        self._alive = np.zeros(capacity, dtype=bool)
        self._children: list[set[int]] = [set() for _ in range(capacity)]
        self.size = 1
        self.alive_count = 1
        self.inserted_total = 0  # excludes the root
        self._pos[0] = np.asarray(root_pos, dtype=float)
        self._alive[0] = True

    # -- storage ---------------------------------------------------------

    def _grow(self) -> None:
        cap = len(self._pos)
        new_cap = cap * 2
        pos = np.full((new_cap, 3), _DEAD_POS)
        pos[:cap] = self._pos
        self._pos = pos
        cost = np.zeros(new_cap)
        cost[:cap] = self._cost
        self._cost = cost
        parent = np.full(new_cap, -1, dtype=np.int64)
        parent[:cap] = self._parent
        self._parent = parent
        d = np.zeros((new_cap, 3))
        d[:cap] = self._dir
        self._dir = d
        has = np.zeros(new_cap, dtype=bool)
        has[:cap] = self._has_dir
        self._has_dir = has
        alive = np.zeros(new_cap, dtype=bool)
        alive[:cap] = self._alive
        self._alive = alive
        self._children.extend(set() for _ in range(new_cap - cap))

    # -- accessors -------------------------------------------------------

    def pos(self, node_id: int) -> np.ndarray:
        return self._pos[node_id]

    def cost(self, node_id: int) -> float:
        return float(self._cost[node_id])

    def parent(self, node_id: int) -> int:
        return int(self._parent[node_id])

    def incoming_dir(self, node_id: int) -> np.ndarray | None:
        return self._dir[node_id] if self._has_dir[node_id] else None

    def is_alive(self, node_id: int) -> bool:
        return bool(self._alive[node_id])

    def alive_ids(self) -> np.ndarray:
        return np.flatnonzero(self._alive[: self.size])

    # -- queries ---------------------------------------------------------

    def nearest(self, point) -> int:
        """Alive node closest to point; exact ties go to the smaller id."""
        p = np.asarray(point, dtype=float)
        diff = self._pos[: self.size] - p
        d2 = np.einsum("ij,ij->i", diff, diff)
        return int(np.argmin(d2))

    def near(self, point, radius: float) -> np.ndarray:
        """Alive node ids within radius of point, ascending id order."""
        if radius <= 0:
            raise ValueError(f"radius must be positive, got {radius}")
        p = np.asarray(point, dtype=float)
        diff = self._pos[: self.size] - p
        d2 = np.einsum("ij,ij->i", diff, diff)
        return np.flatnonzero(d2 <= radius * radius)

    def costs_through(self, ids: np.ndarray, point) -> np.ndarray:
        """Vectorized cost-from-root of reaching ``point`` via each node."""
        p = np.asarray(point, dtype=float)
        seg = p[None, :] - self._pos[ids]
        lengths = np.sqrt(np.einsum("ij,ij->i", seg, seg))
        costs = self._cost[ids] + self.params.beta1 * lengths
        if self.params.beta2 > 0.0:
            usable = self._has_dir[ids] & (lengths > 0.0)
            if usable.any():
                dots = np.einsum("ij,ij->i", self._dir[ids], seg)
                with np.errstate(invalid="ignore", divide="ignore"):
                    cosang = np.clip(dots / np.where(lengths > 0, lengths, 1.0), -1.0, 1.0)
                costs = costs + np.where(usable, self.params.beta2 * np.arccos(cosang), 0.0)
        return costs

    # -- mutation --------------------------------------------------------

    def _edge_dir(self, parent_id: int, pos: np.ndarray) -> tuple[np.ndarray, bool]:
        seg = pos - self._pos[parent_id]
        length = float(np.linalg.norm(seg))
        if length > 0.0:
            return seg / length, True
        # Zero-length edge: thread the parent's direction through, as path_cost does.
        return self._dir[parent_id].copy(), bool(self._has_dir[parent_id])

    def insert(self, pos, parent_id: int) -> int:
        if not self._alive[parent_id]:
            raise ValueError(f"parent {parent_id} is not alive")
        if self.size == len(self._pos):
            self._grow()
        node_id = self.size
        self.size += 1
        p = np.asarray(pos, dtype=float)
        self._pos[node_id] = p
        self._parent[node_id] = parent_id
        parent_dir = self._dir[parent_id] if self._has_dir[parent_id] else None
        edge = _edge_cost_raw(
            self.params.beta1, self.params.beta2, self._pos[parent_id], parent_dir, p
        )
        self._cost[node_id] = self._cost[parent_id] + edge
        self._dir[node_id], self._has_dir[node_id] = self._edge_dir(parent_id, p)
        self._alive[node_id] = True
        self._children[parent_id].add(node_id)
        self.alive_count += 1
        self.inserted_total += 1
        return node_id

    def _refresh_costs_from(self, node_id: int) -> None:
        """Recompute stored costs for a node and all descendants (eager propagation)."""
        stack = [node_id]
        while stack:
            u = stack.pop()
            p = int(self._parent[u])
            parent_dir = self._dir[p] if self._has_dir[p] else None
            edge = _edge_cost_raw(
                self.params.beta1, self.params.beta2, self._pos[p], parent_dir, self._pos[u]
            )
            self._cost[u] = self._cost[p] + edge
            stack.extend(self._children[u])

    def reparent(self, node_id: int, new_parent_id: int) -> None:
        old = int(self._parent[node_id])
        self._children[old].discard(node_id)
        self._parent[node_id] = new_parent_id
        self._children[new_parent_id].add(node_id)
        self._dir[node_id], self._has_dir[node_id] = self._edge_dir(
            new_parent_id, self._pos[node_id]
        )
        self._refresh_costs_from(node_id)

    def _remove_subtree(self, node_id: int) -> int:
        self._children[int(self._parent[node_id])].discard(node_id)
        removed = 0
        stack = [node_id]
        while stack:
            u = stack.pop()
            stack.extend(self._children[u])
            self._children[u] = set()
            self._alive[u] = False
            self._pos[u] = _DEAD_POS
            self._parent[u] = -1
            removed += 1
        self.alive_count -= removed
        return removed

    def prune(self, c_best: float) -> int:
        """Drop every subtree whose admissible total exceeds c_best.

        Walks from the root and cuts at the shallowest violating node; the
        root itself is never examined (its bound is the straight-line lower
        bound, which no finite best cost can undercut).
        """
        if not math.isfinite(c_best):
            return 0
        beta1 = self.params.beta1
        cut: list[int] = []
        stack = [0]
        while stack:
            u = stack.pop()
            for child in self._children[u]:
                remaining = beta1 * float(np.linalg.norm(self.target - self._pos[child]))
                if self._cost[child] + remaining > c_best:
                    cut.append(child)
                else:
                    stack.append(child)
        removed = 0
        for node_id in cut:
            removed += self._remove_subtree(node_id)
        return removed

    def path_from_root(self, node_id: int) -> list[np.ndarray]:
        """Positions from the root to the node, inclusive."""
        out = []
        cur = node_id
        while cur != -1:
            out.append(self._pos[cur].copy())
            cur = int(self._parent[cur])
        out.reverse()
        return out


def nearest(tree: SearchTree, point) -> int:
    """Node id minimizing Euclidean distance to point (ties: smaller id)."""
    return tree.nearest(point)


def near(tree: SearchTree, point, radius: float) -> np.ndarray:
    """All node ids within radius of point, ascending."""
    return tree.near(point, radius)


def steer(from_point, toward, step: float) -> np.ndarray:
    """Move from ``from_point`` toward ``toward`` by at most ``step``."""
    if step <= 0:
        raise ValueError(f"step must be positive, got {step}")
    f = np.asarray(from_point, dtype=float)
    t = np.asarray(toward, dtype=float)
    delta = t - f
    dist = float(np.linalg.norm(delta))
    if dist <= step:
        return t.copy()
    return f + (step / dist) * delta


def _rewire_through(
    tree: SearchTree, grid: OccupancyGrid, new_id: int, candidate_ids: np.ndarray
) -> int:
    """Re-parent every candidate whose cost improves via the new node.

    The cost test runs before the collision check (it is far cheaper); strict
    inequality plus nonnegative edge costs make cycles impossible, so no
    ancestor test is needed.
    """
    rewired = 0
    x_new = tree.pos(new_id)
    new_dir = tree.incoming_dir(new_id)
    beta1, beta2 = tree.params.beta1, tree.params.beta2
    cost_new = tree.cost(new_id)
    for cid in candidate_ids:
        cid = int(cid)
        if cid == new_id or not tree.is_alive(cid):
            continue
        edge = _edge_cost_raw(beta1, beta2, x_new, new_dir, tree.pos(cid))
        if cost_new + edge < tree.cost(cid) and grid.segment_free(x_new, tree.pos(cid)):
            tree.reparent(cid, new_id)
            rewired += 1
    return rewired


def extend_rrt_star(
    tree: SearchTree, problem: PlanningProblem, x_rand, radius: float, step: float = 2.0
) -> int | None:
    """Standard RRT* extension: steer, choose cheapest feasible parent, rewire.

    Returns the new node id, or None when the steered segment from the nearest
    node is blocked.
    """
    grid = problem.grid
    near_id = tree.nearest(x_rand)
    x_new = steer(tree.pos(near_id), x_rand, step)
    if not grid.segment_free(tree.pos(near_id), x_new):
        return None
    ids = tree.near(x_new, radius)
    if near_id not in ids:
        ids = np.unique(np.append(ids, near_id))
    costs = tree.costs_through(ids, x_new)
    order = np.lexsort((ids, costs))
    parent_id = None
    for k in order:
        cid = int(ids[k])
        if cid == near_id or grid.segment_free(tree.pos(cid), x_new):
            parent_id = cid
            break
    if parent_id is None:
        return None
    new_id = tree.insert(x_new, parent_id)
    _rewire_through(tree, grid, new_id, ids)
    return new_id


def path_opt(
    tree: SearchTree,
    x_new,
    X_near: np.ndarray,
    c_best: float,
    problem: PlanningProblem,
) -> int | None:
    """Cost-gated insertion and re-connect around a steered sample.

    Candidates are ordered by cost-through-candidate (ties by id). The sample
    is inserted under the first collision-free candidate whose cost plus the
    admissible cost-to-go still beats c_best; once the gate fails it fails for
    every later (costlier) candidate, so the scan stops. After insertion every
    near node whose cost would drop through the new node is re-parented.
    """
    if len(X_near) == 0:
        return None
    grid = problem.grid
    x_new = np.asarray(x_new, dtype=float)
    ids = np.asarray(X_near, dtype=np.int64)
    costs = tree.costs_through(ids, x_new)
    order = np.lexsort((ids, costs))
    remaining = cost_to_go(tree.params, x_new, tree.target)
    new_id = None
    for k in order:
        cid = int(ids[k])
        if costs[k] + remaining >= c_best:
            break  # sorted ascending: no later candidate can pass the gate
        if grid.segment_free(tree.pos(cid), x_new):
            new_id = tree.insert(x_new, cid)
            break
    if new_id is None:
        return None
    _rewire_through(tree, grid, new_id, ids)
    return new_id


def connect_graphs(
    tree_a: SearchTree,
    new_id: int,
    tree_b: SearchTree,
    connect_id: int,
    problem: PlanningProblem,
    step: float,
) -> tuple[float, np.ndarray] | None:
    """Try to join the trees along the straight segment between two nodes.

    Greedy stepping with per-segment checks accepts exactly when the whole
    segment is free (samples are spaced the same way), so one check decides.
    Returns (cost, waypoints root_a -> ... -> root_b), or None when blocked.
    """
    x_new = tree_a.pos(new_id)
    x_connect = tree_b.pos(connect_id)
    if not problem.grid.segment_free(x_connect, x_new):
        return None
    forward = tree_a.path_from_root(new_id)
    backward = tree_b.path_from_root(connect_id)
    waypoints: list[np.ndarray] = []
    for p in forward + backward[::-1]:
        if waypoints and float(np.linalg.norm(p - waypoints[-1])) == 0.0:
            continue
        waypoints.append(p)
    path = np.asarray(waypoints)
    if len(path) < 2:
        return 0.0, path  # coincident roots: the trivial plan
    return path_cost(tree_a.params, path), path


def branch_and_bound(
    tree_a: SearchTree, tree_b: SearchTree, c_best: float, problem: PlanningProblem
) -> tuple[int, int]:
    """Prune both trees against the best known cost; returns removal counts."""
    return tree_a.prune(c_best), tree_b.prune(c_best)


def check_tree_invariants(
    tree: SearchTree, grid: OccupancyGrid, tol: float = 1e-9
) -> list[str]:
    """Audit structure, stored costs, and edge feasibility; returns violations."""
    violations: list[str] = []
    alive = tree.alive_ids()
    if len(alive) == 0 or alive[0] != 0 or not tree.is_alive(0):
        violations.append("root is not alive")
        return violations
    if tree.parent(0) != -1 or tree.cost(0) != 0.0:
        violations.append("root must have no parent and zero cost")

    # Acyclicity and reachability: DFS over children must visit each alive node once.
    seen = np.zeros(tree.size, dtype=bool)
    stack = [0]
    visits = 0
    while stack:
        u = stack.pop()
        if seen[u]:
            violations.append(f"node {u} reached twice (cycle or shared child)")
            return violations
        seen[u] = True
        visits += 1
        stack.extend(tree._children[u])
    if visits != tree.alive_count:
        violations.append(
            f"reachable nodes {visits} != alive count {tree.alive_count} (detached subtree)"
        )

    rest = alive[alive != 0]
    if len(rest) == 0:
        return violations
    parents = tree._parent[rest]
    if not tree._alive[parents].all():
        violations.append("alive node with dead parent")

    # Cost telescoping, vectorized: recompute each edge from the parent's state.
    seg = tree._pos[rest] - tree._pos[parents]
    lengths = np.sqrt(np.einsum("ij,ij->i", seg, seg))
    expected = tree._cost[parents] + tree.params.beta1 * lengths
    if tree.params.beta2 > 0.0:
        usable = tree._has_dir[parents] & (lengths > 0.0)
        dots = np.einsum("ij,ij->i", tree._dir[parents], seg)
        with np.errstate(invalid="ignore"):
            cosang = np.clip(dots / np.where(lengths > 0, lengths, 1.0), -1.0, 1.0)
        expected = expected + np.where(usable, tree.params.beta2 * np.arccos(cosang), 0.0)
    bad = np.flatnonzero(np.abs(tree._cost[rest] - expected) > tol)
    for i in bad:
        violations.append(f"cost telescoping violated at node {int(rest[i])}")

    # Edge feasibility: sample every edge at <= half-voxel spacing in one batch.
    counts = np.maximum(np.ceil(lengths / (0.5 * grid.voxel_size)).astype(int), 1) + 1
    starts = np.concatenate(([0], np.cumsum(counts)[:-1]))
    edge_of = np.repeat(np.arange(len(rest)), counts)
    local = np.arange(counts.sum()) - starts[edge_of]
    t = local / (counts[edge_of] - 1)
    pts = tree._pos[parents][edge_of] + t[:, None] * seg[edge_of]
    free = grid.points_free_mask(pts)
    for i in np.unique(edge_of[~free]):
        violations.append(f"edge into node {int(rest[i])} intersects an obstacle")
    return violations


def _finalize(
    planner: str,
    problem: PlanningProblem,
    config: PlannerConfig,
    best_path,
    best_cost: float,
    log: list[LogEntry],
    stats: dict,
) -> PlanResult:
    path = None if best_path is None else np.asarray(best_path, dtype=float)
    return PlanResult(
        planner=planner,
        best_path=path,
        best_cost=best_cost,
        log=log,
        stats=stats,
        problem_digest=problem.digest(),
        config=config,
    )


def _run_audit(trees: list[SearchTree], grid: OccupancyGrid, iteration: int, stats: dict) -> None:
    for label, tree in zip("ab", trees):
        for v in check_tree_invariants(tree, grid):
            stats["audit_violations"].append(f"iter {iteration} tree {label}: {v}")


def _plan_single_tree(problem: PlanningProblem, config: PlannerConfig, informed: bool) -> PlanResult:
    grid = problem.grid
    params = problem.cost_params
    rng = np.random.default_rng(config.seed)
    tree = SearchTree(problem.x_init, target=problem.x_goal, params=params)
    free_measure = grid.free_measure()
    step_cap = config.radius_cap_steps * config.step
    goal = problem.x_goal

    goal_ids: list[int] = []
    c_best = math.inf
    best_goal_id: int | None = None
    informed_set: InformedSet | None = None
    stats = {
        "nodes_generated": 0,
        "nodes_alive": 0,
        "informed_draws": 0,
        "first_informed_iteration": None,
        "first_solution_iteration": None,
        "audit_violations": [],
    }
    log: list[LogEntry] = []
    t0 = time.perf_counter()
    c_min = float(np.linalg.norm(goal - problem.x_init))
    for iteration in range(1, config.max_iterations + 1):
        if informed and math.isfinite(c_best):
            # Telescoped sums can land ulps below the focal distance; clamp.
            length_bound = max(c_best / params.beta1, c_min)
            if informed_set is None or informed_set.c_best != length_bound:
                informed_set = InformedSet(problem.x_init, goal, length_bound)
            x_rand = sample_informed(informed_set, grid, rng)
            stats["informed_draws"] += 1
            if stats["first_informed_iteration"] is None:
                stats["first_informed_iteration"] = iteration
        else:
            x_rand = sample_uniform(grid, rng)
        radius = rrt_star_radius(3, free_measure, tree.alive_count, step_cap)
        new_id = extend_rrt_star(tree, problem, x_rand, radius, config.step)
        if new_id is not None:
            p = tree.pos(new_id)
            if float(np.linalg.norm(p - goal)) <= problem.goal_radius and grid.segment_free(
                p, goal
            ):
                goal_ids.append(new_id)
        if goal_ids:
            # Rewiring can improve goal-touching nodes at any time, so re-pick
            # the cheapest closing edge every iteration.
            ids = np.asarray(goal_ids, dtype=np.int64)
            closing = tree.costs_through(ids, goal)
            k = int(np.lexsort((ids, closing))[0])
            if closing[k] < c_best:
                c_best = float(closing[k])
                best_goal_id = int(ids[k])
                if stats["first_solution_iteration"] is None:
                    stats["first_solution_iteration"] = iteration
        if config.audit_every and iteration % config.audit_every == 0:
            _run_audit([tree], grid, iteration, stats)
        log.append(
            LogEntry(iteration, tree.inserted_total, c_best, time.perf_counter() - t0)
        )
        if config.stop_on_first_solution and math.isfinite(c_best):
            break
        if config.stop_at_cost is not None and c_best <= config.stop_at_cost:
            break

    best_path = None
    if best_goal_id is not None:
        waypoints = tree.path_from_root(best_goal_id)
        if float(np.linalg.norm(waypoints[-1] - goal)) > 0.0:
            waypoints.append(goal.copy())
        best_path = waypoints
    stats["nodes_generated"] = tree.inserted_total
    stats["nodes_alive"] = tree.alive_count
    name = "informed_rrt_star" if informed else "rrt_star"
    return _finalize(name, problem, config, best_path, c_best, log, stats)


def plan_rrt_star(problem: PlanningProblem, config: PlannerConfig) -> PlanResult:
    """Single-tree RRT* with uniform sampling."""
    return _plan_single_tree(problem, config, informed=False)


def plan_informed(problem: PlanningProblem, config: PlannerConfig) -> PlanResult:
    """RRT* that samples the shrinking ellipsoid once a solution exists."""
    return _plan_single_tree(problem, config, informed=True)


def _plan_bidirectional(
    problem: PlanningProblem,
    config: PlannerConfig,
    region: HeuristicRegion | None,
) -> PlanResult:
    """Shared two-tree loop; region-guided when a region is given."""
    grid = problem.grid
    params = problem.cost_params
    guided = region is not None
    if guided and region.dims != grid.dims:
        raise ValueError(f"region dims {region.dims} != grid dims {grid.dims}")
    rng = np.random.default_rng(config.seed)
    tree_init = SearchTree(problem.x_init, target=problem.x_goal, params=params)
    tree_goal = SearchTree(problem.x_goal, target=problem.x_init, params=params)
    trees = [tree_init, tree_goal]
    active = 0
    free_measure = grid.free_measure()
    step_cap = config.radius_cap_steps * config.step

    c_best = math.inf
    best_path: np.ndarray | None = None
    stats = {
        "nodes_generated": 0,
        "nodes_alive": 0,
        "nodes_pruned": 0,
        "connect_successes": 0,
        "solution_improvements": 0,
        "first_solution_iteration": None,
        "audit_violations": [],
    }
    log: list[LogEntry] = []
    t0 = time.perf_counter()
    for iteration in range(1, config.max_iterations + 1):
        tree_a, tree_b = trees[active], trees[1 - active]
        if guided:
            x_rand = neural_sample(region, grid, config.mu, rng, config.uniform_fallback)
        else:
            x_rand = sample_uniform(grid, rng)
        radius = rrt_star_radius(3, free_measure, tree_a.alive_count, step_cap)
        if guided:
            near_id = tree_a.nearest(x_rand)
            x_new = steer(tree_a.pos(near_id), x_rand, config.step)
            ids = tree_a.near(x_new, radius)
            if near_id not in ids:
                ids = np.unique(np.append(ids, near_id))
            new_id = path_opt(tree_a, x_new, ids, c_best, problem)
        else:
            new_id = extend_rrt_star(tree_a, problem, x_rand, radius, config.step)
        if new_id is not None:
            connect_id = tree_b.nearest(tree_a.pos(new_id))
            joined = connect_graphs(tree_a, new_id, tree_b, connect_id, problem, config.step)
            if joined is not None:
                stats["connect_successes"] += 1
                cost, waypoints = joined
                if active == 1 and len(waypoints) >= 2:
                    # tree_a is goal-rooted here; store paths init -> goal.
                    waypoints = waypoints[::-1].copy()
                    cost = path_cost(params, waypoints)
                if cost < c_best:
                    c_best = cost
                    best_path = waypoints
                    stats["solution_improvements"] += 1
                    if stats["first_solution_iteration"] is None:
                        stats["first_solution_iteration"] = iteration
                    if guided:
                        removed = branch_and_bound(tree_init, tree_goal, c_best, problem)
                        stats["nodes_pruned"] += removed[0] + removed[1]
        if config.audit_every and iteration % config.audit_every == 0:
            _run_audit(trees, grid, iteration, stats)
        log.append(
            LogEntry(
                iteration,
                tree_init.inserted_total + tree_goal.inserted_total,
                c_best,
                time.perf_counter() - t0,
            )
        )
        if config.stop_on_first_solution and math.isfinite(c_best):
            break
        if config.stop_at_cost is not None and c_best <= config.stop_at_cost:
            break
        active = 1 - active

    stats["nodes_generated"] = tree_init.inserted_total + tree_goal.inserted_total
    stats["nodes_alive"] = tree_init.alive_count + tree_goal.alive_count
    name = "pierguard" if guided else "rrt_connect"
    return _finalize(name, problem, config, best_path, c_best, log, stats)


def plan_rrt_connect(problem: PlanningProblem, config: PlannerConfig) -> PlanResult:
    """Bidirectional RRT* with uniform sampling and greedy tree connection."""
    return _plan_bidirectional(problem, config, region=None)


def plan_pierguard(
    problem: PlanningProblem, region: HeuristicRegion, config: PlannerConfig
) -> PlanResult:
    """Bidirectional region-guided planner with cost gating and pruning.

    Each iteration: draw a sample (region-biased with probability 1 - mu),
    steer from the active tree's nearest node, insert through the cheapest
    gated near-candidate, rewire, try to connect the trees at the new node,
    prune both trees when the best cost improves, then swap tree roles.
    """
    if not isinstance(region, HeuristicRegion):
        raise ValueError("plan_pierguard requires a HeuristicRegion")
    return _plan_bidirectional(problem, config, region=region)
