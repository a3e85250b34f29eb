"""Benchmark harness: seeded trials, phase metrics, suite aggregation, reports.

A trial runs one planner on one problem and reduces its per-iteration log to
two phase snapshots: the "initial" phase at the first iteration any solution
exists, and the "optimal" phase at the first iteration the cost is within a
tolerance of the grid-search reference cost.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass

import numpy as np

from .astar import astar_plan
from .costs import CostParams
from .dataset import dilate_path
from .errors import NoPathError, PierguardError
from .grid import (
    OccupancyGrid,
    PlanningProblem,
    generate_map_cylinders,
    generate_map_with_density,
    random_free_problem,
)
from .heuristics import HeuristicRegion
from .planners import (
    PlannerConfig,
    PlanResult,
    plan_informed,
    plan_pierguard,
    plan_rrt_connect,
    plan_rrt_star,
)
from .seeding import derive_seed

PLANNERS = ("rrt_star", "informed_rrt_star", "rrt_connect", "pierguard")

CSV_HEADER = (
    "planner,map_id,seed,init_iter,init_nodes,init_time_s,init_cost,"
    "opt_iter,opt_nodes,opt_time_s,success"
)


@dataclass(frozen=True)
class BenchConfig:
    """Suite-level knobs: planner settings plus problem and phase parameters."""

    mu: float = 0.5
    step: float = 2.0
    goal_radius: float = 1.5
    beta1: float = 1.0
    beta2: float = 0.0
    max_iterations: int = 50_000
    phase_tolerance: float = 0.02
    dilation_radius: int = 2
    stop_after_initial: bool = False
    stop_at_optimal: bool = True

    def cost_params(self) -> CostParams:
        return CostParams(self.beta1, self.beta2)

    def planner_config(self, seed: int, stop_at_cost: float | None) -> PlannerConfig:
        return PlannerConfig(
            mu=self.mu,
            step=self.step,
            max_iterations=self.max_iterations,
            seed=seed,
            stop_on_first_solution=self.stop_after_initial,
            stop_at_cost=stop_at_cost,
        )

    def to_dict(self) -> dict:
        return {
            "mu": self.mu,
            "step": self.step,
            "goal_radius": self.goal_radius,
            "beta1": self.beta1,
            "beta2": self.beta2,
            "max_iterations": self.max_iterations,
            "phase_tolerance": self.phase_tolerance,
            "dilation_radius": self.dilation_radius,
            "stop_after_initial": self.stop_after_initial,
            "stop_at_optimal": self.stop_at_optimal,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "BenchConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)


@dataclass(frozen=True)
class TrialRecord:
    """Phase metrics of one seeded run; None marks a phase never reached."""

    planner: str
    map_id: str
    seed: int
    initial_iteration: int | None
    initial_nodes: int | None
    initial_time_s: float | None
    initial_cost: float | None
    optimal_iteration: int | None
    optimal_nodes: int | None
    optimal_time_s: float | None
    success: bool

    def to_row(self) -> list[str]:
        def fmt(v) -> str:
            return "" if v is None else repr(v) if isinstance(v, float) else str(v)

        return [
            self.planner,
            self.map_id,
            str(self.seed),
            fmt(self.initial_iteration),
            fmt(self.initial_nodes),
            fmt(self.initial_time_s),
            fmt(self.initial_cost),
            fmt(self.optimal_iteration),
            fmt(self.optimal_nodes),
            fmt(self.optimal_time_s),
            "true" if self.success else "false",
        ]

    def to_json_dict(self) -> dict:
        return {
            "planner": self.planner,
            "map_id": self.map_id,
            "seed": self.seed,
            "initial_iteration": self.initial_iteration,
            "initial_nodes": self.initial_nodes,
            "initial_time_s": self.initial_time_s,
            "initial_cost": self.initial_cost,
            "optimal_iteration": self.optimal_iteration,
            "optimal_nodes": self.optimal_nodes,
            "optimal_time_s": self.optimal_time_s,
            "success": self.success,
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "TrialRecord":
        return cls(**data)


def extract_phases(
    result: PlanResult, reference_cost: float | None, tolerance: float
) -> dict:
    """Reduce a per-iteration log to initial/optimal phase snapshots."""
    phases: dict = {
        "initial_iteration": None,
        "initial_nodes": None,
        "initial_time_s": None,
        "initial_cost": None,
        "optimal_iteration": None,
        "optimal_nodes": None,
        "optimal_time_s": None,
    }
    for entry in result.log:
        if phases["initial_iteration"] is None and math.isfinite(entry.best_cost):
            phases["initial_iteration"] = entry.iteration
            phases["initial_nodes"] = entry.nodes
            phases["initial_time_s"] = entry.elapsed_s
            phases["initial_cost"] = entry.best_cost
        if (
            phases["optimal_iteration"] is None
            and reference_cost is not None
            and entry.best_cost <= (1.0 + tolerance) * reference_cost
        ):
            phases["optimal_iteration"] = entry.iteration
            phases["optimal_nodes"] = entry.nodes
            phases["optimal_time_s"] = entry.elapsed_s
        if phases["initial_iteration"] is not None and (
            phases["optimal_iteration"] is not None or reference_cost is None
        ):
            break
    return phases


def run_trial(
    planner: str,
    problem: PlanningProblem,
    region: HeuristicRegion | None,
    config: BenchConfig,
    seed: int,
    map_id: str = "",
    reference_cost: float | None = None,
) -> TrialRecord:
    """One seeded planner run reduced to a TrialRecord.

    The reference cost (for the optimal phase) is computed by grid search when
    not supplied; an unsolvable problem leaves it None and the optimal fields
    absent. Planner errors become a failed record rather than propagating.
    """
    if planner not in PLANNERS:
        raise ValueError(f"unknown planner {planner!r}; expected one of {PLANNERS}")
    if (planner == "pierguard") != (region is not None):
        raise ValueError("a region is required exactly when the planner is pierguard")
    grid = problem.grid
    if reference_cost is None:
        try:
            ref_path = astar_plan(
                grid, grid.voxel_of(problem.x_init), grid.voxel_of(problem.x_goal)
            )
            reference_cost = config.beta1 * ref_path.cost
        except NoPathError:
            reference_cost = None
    stop_at_cost = None
    if config.stop_at_optimal and not config.stop_after_initial and reference_cost is not None:
        stop_at_cost = (1.0 + config.phase_tolerance) * reference_cost
    planner_config = config.planner_config(seed, stop_at_cost)
    try:
        if planner == "rrt_star":
            result = plan_rrt_star(problem, planner_config)
        elif planner == "informed_rrt_star":
            result = plan_informed(problem, planner_config)
        elif planner == "rrt_connect":
            result = plan_rrt_connect(problem, planner_config)
        else:
            result = plan_pierguard(problem, region, planner_config)
    except PierguardError:
        return TrialRecord(planner, map_id, seed, None, None, None, None, None, None, None, False)
    phases = extract_phases(result, reference_cost, config.phase_tolerance)
    return TrialRecord(
        planner=planner,
        map_id=map_id,
        seed=seed,
        success=phases["initial_iteration"] is not None,
        **phases,
    )


@dataclass(frozen=True, eq=False)
class BenchCase:
    """A benchmark instance: map, query, oracle region, and reference cost."""

    map_id: str
    problem: PlanningProblem
    region: HeuristicRegion | None
    reference_cost: float | None


def make_cluttered_case(
    dims,
    density: float,
    seed: int,
    config: BenchConfig,
    map_id: str | None = None,
    separation_fraction: float = 0.6,
    radius_range=(1.0, 3.0),
) -> BenchCase:
    """Sphere-field map at a target density with a solvable long-range query.

    The grid-search path that provides the reference cost also provides the
    oracle heuristic region (path dilated into free space).
    """
    grid = generate_map_with_density(
        dims, density, derive_seed("map", seed), radius_range=radius_range
    )
    min_sep = separation_fraction * max(dims) * grid.voxel_size
    problem = random_free_problem(
        grid,
        derive_seed("query", seed),
        min_sep,
        goal_radius=config.goal_radius,
        cost_params=config.cost_params(),
    )
    path = astar_plan(grid, grid.voxel_of(problem.x_init), grid.voxel_of(problem.x_goal))
    region = HeuristicRegion.from_mask(dilate_path(path, grid, config.dilation_radius))
    name = map_id if map_id is not None else f"clutter{dims[0]}d{int(density * 100)}s{seed}"
    return BenchCase(name, problem, region, config.beta1 * path.cost)


def make_pier_case(
    dims,
    seed: int,
    config: BenchConfig,
    sphere_count: int = 60,
    cylinder_count: int = 60,
    map_id: str | None = None,
    separation_fraction: float = 0.6,
) -> BenchCase:
    """Pier-scene map: floating sphere field low in the water column plus
    grounded pillars, open volume above. Query endpoints are drawn anywhere
    in free space, so most long-range problems cross or skirt the structure.
    """
    grid = generate_map_cylinders(
        dims, sphere_count, cylinder_count, derive_seed("pier", seed)
    )
    min_sep = separation_fraction * max(dims) * grid.voxel_size
    problem = random_free_problem(
        grid,
        derive_seed("query", seed),
        min_sep,
        goal_radius=config.goal_radius,
        cost_params=config.cost_params(),
    )
    path = astar_plan(grid, grid.voxel_of(problem.x_init), grid.voxel_of(problem.x_goal))
    region = HeuristicRegion.from_mask(dilate_path(path, grid, config.dilation_radius))
    name = map_id if map_id is not None else f"pier{dims[0]}s{seed}"
    return BenchCase(name, problem, region, config.beta1 * path.cost)


def make_corridor_case(
    dims,
    seed: int,
    config: BenchConfig,
    width: int = 5,
    map_id: str | None = None,
) -> BenchCase:
    """Occupied map with a free grid-aligned L-corridor and endpoints at its ends."""
    dims = tuple(int(d) for d in dims)
    if width < 3 or any(width + 2 > d for d in dims):
        raise ValueError(f"corridor width {width} does not fit dims {dims}")
    rng = np.random.default_rng(derive_seed("corridor", seed))
    half = width // 2
    cells = np.ones(dims, dtype=bool)
    # Centerline margins keep the carved tube fully inside the map.
    y0 = int(rng.integers(half, dims[1] - half))
    z0 = int(rng.integers(half, dims[2] - half))
    xb = int(rng.integers(width + 1, dims[0] - half))
    y1 = int(rng.integers(half, dims[1] - half))

    def carve(x_range, y_range, z_range):
        cells[
            max(x_range[0], 0) : min(x_range[1], dims[0]),
            max(y_range[0], 0) : min(y_range[1], dims[1]),
            max(z_range[0], 0) : min(z_range[1], dims[2]),
        ] = False

    # Leg along +x at (y0, z0), then along y at x near xb toward y1.
    carve((0, xb + half + 1), (y0 - half, y0 + half + 1), (z0 - half, z0 + half + 1))
    lo_y, hi_y = sorted((y0, y1))
    carve((xb - half, xb + half + 1), (lo_y - half, hi_y + half + 1), (z0 - half, z0 + half + 1))
    grid = OccupancyGrid(cells)
    x_init = grid.voxel_center((0, y0, z0))
    x_goal = grid.voxel_center((xb, y1, z0))
    problem = PlanningProblem(
        grid, x_init, x_goal, goal_radius=config.goal_radius, cost_params=config.cost_params()
    )
    path = astar_plan(grid, (0, y0, z0), (xb, y1, z0))
    region = HeuristicRegion.from_mask(dilate_path(path, grid, config.dilation_radius))
    name = map_id if map_id is not None else f"corridor{dims[0]}s{seed}"
    return BenchCase(name, problem, region, config.beta1 * path.cost)


_METRICS = (
    "initial_iteration",
    "initial_nodes",
    "initial_time_s",
    "initial_cost",
    "optimal_iteration",
    "optimal_nodes",
    "optimal_time_s",
)


def aggregate_records(records: list[TrialRecord]) -> dict:
    """Per-planner mean/std/count of each metric over records where present."""
    out: dict = {}
    for planner in sorted({r.planner for r in records}):
        rows = [r for r in records if r.planner == planner]
        summary: dict = {
            "trials": len(rows),
            "success_rate": sum(r.success for r in rows) / len(rows),
        }
        for metric in _METRICS:
            values = [getattr(r, metric) for r in rows if getattr(r, metric) is not None]
            if values:
                summary[metric] = {
                    "mean": float(np.mean(values)),
                    "std": float(np.std(values)),
                    "count": len(values),
                }
            else:
                summary[metric] = {"mean": None, "std": None, "count": 0}
        out[planner] = summary
    return out


@dataclass(eq=False)
class SuiteReport:
    records: list[TrialRecord]
    aggregates: dict
    config: dict

    def to_json_dict(self) -> dict:
        return {
            "config": self.config,
            "aggregates": self.aggregates,
            "records": [r.to_json_dict() for r in self.records],
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "SuiteReport":
        return cls(
            records=[TrialRecord.from_json_dict(r) for r in data["records"]],
            aggregates=data["aggregates"],
            config=data["config"],
        )


def run_suite(
    cases: list[BenchCase],
    planners,
    repetitions: int,
    config: BenchConfig,
    suite_seed: int = 0,
) -> SuiteReport:
    """Run the full cases x planners x repetitions cross product sequentially.

    Trial seeds depend only on (suite seed, map id, planner, repetition), so
    any sub-slice of a suite reproduces the same per-trial results.
    """
    planners = list(planners)
    if not cases or not planners:
        raise ValueError("run_suite needs at least one case and one planner")
    if repetitions < 1:
        raise ValueError(f"repetitions must be >= 1, got {repetitions}")
    for p in planners:
        if p not in PLANNERS:
            raise ValueError(f"unknown planner {p!r}; expected one of {PLANNERS}")
    records = []
    for case in cases:
        for planner in planners:
            region = case.region if planner == "pierguard" else None
            for rep in range(repetitions):
                seed = derive_seed(suite_seed, case.map_id, planner, rep)
                records.append(
                    run_trial(
                        planner,
                        case.problem,
                        region,
                        config,
                        seed,
                        map_id=case.map_id,
                        reference_cost=case.reference_cost,
                    )
                )
    return SuiteReport(records, aggregate_records(records), config.to_dict())


def emit_report(report: SuiteReport, fmt: str) -> bytes:
    """Serialize a suite report as csv (records only) or json (full report)."""
    if fmt == "json":
        return json.dumps(report.to_json_dict(), indent=2).encode()
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_HEADER.split(","))
        for record in report.records:
            writer.writerow(record.to_row())
        return buf.getvalue().encode()
    raise ValueError(f"unknown report format {fmt!r}; expected csv or json")
