"""Pydantic request/response models for the planning service."""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field

from ..planners import PlannerConfig

Vec3 = tuple[float, float, float]
Dims = tuple[int, int, int]


class GenerateMapRequest(BaseModel):
    kind: Literal["spheres", "cylinders", "density"] = "spheres"
    dims: Dims
    seed: int = 0
    count: int = 40
    cylinder_count: int = 10
    density: float = 0.1
    voxel_size: float = 1.0


class PlannerSettings(BaseModel):
    """Mirrors PlannerConfig so CLI/service callers pass plain JSON."""

    mu: float = 0.5
    step: float = 2.0
    max_iterations: int = 50_000
    seed: int = 0
    radius_cap_steps: float = 3.0
    stop_on_first_solution: bool = False
    stop_at_cost: Optional[float] = None
    uniform_fallback: bool = True
    audit_every: int = 0

    def to_config(self) -> PlannerConfig:
        return PlannerConfig(**self.model_dump())


class PlanRequest(BaseModel):
    grid_b64: str = Field(description="base64 PGRID payload")
    x_init: Vec3
    x_goal: Vec3
    goal_radius: float = 1.5
    beta1: float = 1.0
    beta2: float = 0.0
    planner: Literal["rrt_star", "informed_rrt_star", "rrt_connect", "pierguard"] = "pierguard"
    region_b64: Optional[str] = Field(default=None, description="base64 PHEUR payload")
    config: PlannerSettings = PlannerSettings()


class DatasetSampleRequest(BaseModel):
    dims: Dims
    sample_seed: int
    dilation_radius: int = 2
    kind: Literal["spheres", "cylinders"] = "spheres"
    obstacle_count: Optional[int] = None
    min_separation: Optional[float] = None


class DatasetSampleResponse(BaseModel):
    psamp_b64: str
    meta: dict


class BenchCaseSpec(BaseModel):
    kind: Literal["clutter", "pier", "corridor"] = "clutter"
    dims: Dims
    seed: int = 0
    density: float = 0.1
    corridor_width: int = 5
    map_id: Optional[str] = None


class BenchRequest(BaseModel):
    cases: list[BenchCaseSpec]
    planners: list[str]
    repetitions: int = 1
    suite_seed: int = 0
    config: dict = Field(default_factory=dict, description="BenchConfig fields")


class RegionScorePair(BaseModel):
    sample_b64: str = Field(description="base64 PSAMP payload; e1/e2 define the problem")
    region_b64: str = Field(description="base64 PHEUR payload")


class RegionScoreRequest(BaseModel):
    pairs: list[RegionScorePair]
    iteration_cap: int = 5000
    trials: int = 1
    seed: int = 0
    goal_radius: float = 1.5
    step: float = 2.0


class RegionScoreResponse(BaseModel):
    score: float
    pairs: int
