"""
Pydantic Report Models
"""
from __future__ import annotations

from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field

from ratlimits.core.ratmap import ReducedForm
from ratlimits.models.schemas import MapModel, PointModel


class HoleReport(BaseModel):
    point: PointModel
    depth: int


class ReduceReport(BaseModel):
    degree: int
    reduction: MapModel
    reduction_degree: int
    holes: List[HoleReport]
    residual: float
    confidence: str
    resultant_vanishes: Optional[bool] = None
    stability: Optional[str] = None

    @classmethod
    def from_reduced(cls, red: ReducedForm, **extra: Any) -> "ReduceReport":
        return cls(
            degree=red.degree,
            reduction=MapModel.from_map(red.reduction),
            reduction_degree=red.reduction_degree,
            holes=[HoleReport(point=PointModel.from_point(h.point), depth=h.depth) for h in red.holes],
            residual=float(red.residual),
            confidence=red.confidence,
            **extra,
        )


class MapReport(BaseModel):
    map: MapModel
    reduced: ReduceReport


class MmeReport(BaseModel):
    samples: int
    steps: int
    seed: int
    atoms: int
    fixed_point_residual: float
    euclidean_moment: List[float]


class BarycenterReport(BaseModel):
    center: Optional[List[float]] = None
    class_: Optional[str] = Field(None, alias="class")
    heavy_atom: Optional[PointModel] = None
    heavy_weight: Optional[float] = None
    iterations: Optional[int] = None
    moment_norm: Optional[float] = None
    translation: Optional[List[List[List[float]]]] = None

    model_config = {"populate_by_name": True}


class TransitionReport(BaseModel):
    level: int
    reduced: ReduceReport
    fully_ramified: bool
    cauchy_rate: Optional[float] = None
    last_step: float
    redraws: int


class IterateReport(BaseModel):
    level: int
    reduced: ReduceReport
    last_step: float


class FamilyReport(BaseModel):
    name: str
    degree: int
    levels: int
    transitions: List[TransitionReport]
    phis: List[ReduceReport]
    iterates: List[IterateReport]
    fully_ramified: Dict[str, bool]
    decomposition_residuals: Dict[str, float]
    decomposition_tolerances: Dict[str, float] = Field(default_factory=dict)
    depth_ratios: Dict[str, List[float]] = Field(default_factory=dict)
    case: Optional[str] = None
    limit: Optional[Dict[str, Any]] = None
    limit_label: Optional[str] = None
    distance_to_limit: Optional[float] = None
    cauchy_steps: List[float] = Field(default_factory=list)
    degree_ratios: List[float] = Field(default_factory=list)
    sampler_distance: Optional[float] = None
    notes: List[str] = Field(default_factory=list)


class JunctionReport(BaseModel):
    members: List[Dict[str, Any]]


class TreeReport(BaseModel):
    spheres: List[int]
    points: List[Dict[str, Any]]
    junctions: List[JunctionReport]
    adjacency: List[List[int]]
    hausdorff_residual: Optional[float] = None
    dot: str


class PolyLikeReport(BaseModel):
    window: int
    experimental: bool
    fully_ramified_run: List[int]
    level: Optional[int] = None
    hypotheses: List[Dict[str, Any]]
    certificates: List[Dict[str, Any]]
    failures: List[Dict[str, Any]] = Field(default_factory=list)


class CriterionResult(BaseModel):
    id: int
    name: str
    status: str          # "pass" | "fail" | "error"
    seconds: float
    detail: Dict[str, Any] = Field(default_factory=dict)


class VerifyReport(BaseModel):
    tier: str
    criteria: List[CriterionResult]
    passed: bool


class ErrorReport(BaseModel):
    error: str
    message: str
    details: Dict[str, Any] = Field(default_factory=dict)
