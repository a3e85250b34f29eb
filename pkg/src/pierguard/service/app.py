"""HTTP service exposing map generation, planning, datasets, and benchmarks.

Binary artifacts travel base64-encoded inside JSON requests; generated maps
come back as raw octet streams so clients can write them straight to disk.
"""

from __future__ import annotations

import base64

import numpy as np
from fastapi import FastAPI, Request, Response
from fastapi.responses import JSONResponse

from .. import __version__
from ..bench import BenchConfig, make_cluttered_case, make_corridor_case, make_pier_case, run_suite
from ..costs import CostParams
from ..dataset import generate_sample_case, load_sample, save_sample
from ..errors import PierguardError
from ..grid import (
    OccupancyGrid,
    PlanningProblem,
    generate_map_cylinders,
    generate_map_spheres,
    generate_map_with_density,
)
from ..heuristics import HeuristicRegion, load_region, region_connectivity_score
from ..planners import PlannerConfig, plan_informed, plan_pierguard, plan_rrt_connect, plan_rrt_star
from .models import (
    BenchRequest,
    DatasetSampleRequest,
    DatasetSampleResponse,
    GenerateMapRequest,
    PlanRequest,
    RegionScoreRequest,
    RegionScoreResponse,
)

_PLANNER_FUNCS = {
    "rrt_star": plan_rrt_star,
    "informed_rrt_star": plan_informed,
    "rrt_connect": plan_rrt_connect,
}


def _problem_from_sample_bytes(data: bytes, goal_radius: float) -> PlanningProblem:
    """Rebuild a planning problem from a training sample's e1/e2 channels."""
    sample = load_sample(data)
    grid = OccupancyGrid(sample.e2.astype(bool), sample.voxel_size)
    init_vox = np.argwhere(sample.e1 == 1)
    goal_vox = np.argwhere(sample.e1 == 2)
    if len(init_vox) != 1 or len(goal_vox) != 1:
        raise ValueError("sample e1 channel must mark exactly one start and one goal voxel")
    return PlanningProblem(
        grid,
        grid.voxel_center(init_vox[0]),
        grid.voxel_center(goal_vox[0]),
        goal_radius=goal_radius,
    )


def create_app() -> FastAPI:
    app = FastAPI(title="pierguard", version=__version__)

    @app.exception_handler(PierguardError)
    async def _domain_error(_: Request, exc: PierguardError) -> JSONResponse:
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.exception_handler(ValueError)
    async def _value_error(_: Request, exc: ValueError) -> JSONResponse:
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok", "version": __version__}

    @app.post("/maps/generate")
    def generate_map(req: GenerateMapRequest) -> Response:
        if req.kind == "spheres":
            grid = generate_map_spheres(req.dims, req.count, req.seed, voxel_size=req.voxel_size)
        elif req.kind == "cylinders":
            grid = generate_map_cylinders(
                req.dims, req.count, req.cylinder_count, req.seed, voxel_size=req.voxel_size
            )
        else:
            grid = generate_map_with_density(
                req.dims, req.density, req.seed, voxel_size=req.voxel_size
            )
        return Response(content=grid.to_bytes(), media_type="application/octet-stream")

    @app.post("/plan")
    def plan(req: PlanRequest) -> dict:
        grid = OccupancyGrid.from_bytes(base64.b64decode(req.grid_b64))
        problem = PlanningProblem(
            grid,
            req.x_init,
            req.x_goal,
            goal_radius=req.goal_radius,
            cost_params=CostParams(req.beta1, req.beta2),
        )
        config = req.config.to_config()
        if req.planner == "pierguard":
            if req.region_b64 is None:
                raise ValueError("planner 'pierguard' requires region_b64")
            region = load_region(base64.b64decode(req.region_b64))
            result = plan_pierguard(problem, region, config)
        else:
            result = _PLANNER_FUNCS[req.planner](problem, config)
        return result.to_json_dict()

    @app.post("/dataset/sample")
    def dataset_sample(req: DatasetSampleRequest) -> DatasetSampleResponse:
        sample, meta = generate_sample_case(
            req.dims,
            req.sample_seed,
            dilation_radius=req.dilation_radius,
            kind=req.kind,
            obstacle_count=req.obstacle_count,
            min_separation=req.min_separation,
        )
        return DatasetSampleResponse(
            psamp_b64=base64.b64encode(save_sample(sample)).decode(), meta=meta
        )

    @app.post("/bench")
    def bench(req: BenchRequest) -> dict:
        config = BenchConfig.from_dict(req.config)
        cases = []
        for spec in req.cases:
            if spec.kind == "clutter":
                cases.append(
                    make_cluttered_case(
                        spec.dims, spec.density, spec.seed, config, map_id=spec.map_id
                    )
                )
            elif spec.kind == "pier":
                cases.append(
                    make_pier_case(spec.dims, spec.seed, config, map_id=spec.map_id)
                )
            else:
                cases.append(
                    make_corridor_case(
                        spec.dims, spec.seed, config, width=spec.corridor_width, map_id=spec.map_id
                    )
                )
        report = run_suite(cases, req.planners, req.repetitions, config, req.suite_seed)
        return report.to_json_dict()

    @app.post("/region/score")
    def region_score(req: RegionScoreRequest) -> RegionScoreResponse:
        pairs: list[tuple[PlanningProblem, HeuristicRegion]] = []
        for pair in req.pairs:
            problem = _problem_from_sample_bytes(
                base64.b64decode(pair.sample_b64), req.goal_radius
            )
            region = load_region(base64.b64decode(pair.region_b64))
            pairs.append((problem, region))
        config = PlannerConfig(step=req.step)
        score = region_connectivity_score(
            pairs,
            planner_config=config,
            trials=req.trials,
            iteration_cap=req.iteration_cap,
            seed=req.seed,
        )
        return RegionScoreResponse(score=score, pairs=len(pairs))

    return app
