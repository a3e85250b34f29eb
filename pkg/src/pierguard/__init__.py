"""Occupancy-grid motion planning: bidirectional region-guided RRT* with
baselines, a grid-search oracle pipeline, and a benchmark harness."""

__version__ = "0.1.0"

from .costs import (
    CostParams,
    DirectedState,
    cost_to_go,
    edge_cost,
    hausdorff_distance,
    path_cost,
    rrt_star_radius,
    unit_ball_volume,
)
from .errors import (
    EmptyRegionError,
    FormatError,
    InvalidProblemError,
    NoPathError,
    PierguardError,
)
from .grid import (
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
from .astar import GridPath, astar_plan, dijkstra_cost, dijkstra_costs_from
from .dataset import (
    TrainingSample,
    dilate_path,
    generate_dataset,
    load_sample,
    make_training_sample,
    save_sample,
)
from .heuristics import (
    HeuristicRegion,
    InformedSet,
    load_region,
    neural_sample,
    region_connectivity_score,
    sample_informed,
    sample_region,
    sample_uniform,
    save_region,
)
from .planners import (
    PlannerConfig,
    PlanResult,
    SearchTree,
    branch_and_bound,
    check_tree_invariants,
    connect_graphs,
    extend_rrt_star,
    near,
    nearest,
    path_opt,
    plan_informed,
    plan_pierguard,
    plan_rrt_connect,
    plan_rrt_star,
    steer,
)
from .bench import (
    CSV_HEADER,
    PLANNERS,
    BenchCase,
    BenchConfig,
    SuiteReport,
    TrialRecord,
    aggregate_records,
    emit_report,
    extract_phases,
    make_cluttered_case,
    make_corridor_case,
    make_pier_case,
    run_suite,
    run_trial,
)

__all__ = [name for name in dir() if not name.startswith("_")]
