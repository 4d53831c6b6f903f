"""Request and response models for the live feedback API."""
from __future__ import annotations

from pydantic import BaseModel, Field


class CreateSessionRequest(BaseModel):
    scenario_seed: int | None = None
    family: str = "manipulation"
    scene: dict | None = None
    seed: int = 0
    k: int = Field(default=5, ge=1)
    candidates: int = Field(default=50, ge=2)


class TrajectoryView(BaseModel):
    rank: int
    index: int
    score: float
    waypoints: list[list[float]]
    wrist: list[list[float]]
    deviation: list[float]


class SceneView(BaseModel):
    attributes: list[str]
    objects: list[dict]
    manipulated_id: str
    table_height: float
    goal: list[float]
    start_config: list[float]
    arm: dict


class SessionPayload(BaseModel):
    session_id: str
    iteration: int
    scene: SceneView
    top: list[TrajectoryView]
    weight_hash: str


class RerankRequest(BaseModel):
    rank: int = Field(ge=1)


class EditRequest(BaseModel):
    index: int = Field(ge=1)
    target: list[float]


class UpdateSummary(BaseModel):
    iteration: int
    accepted: bool
    weight_delta_norm: float
    weight_hash: str
    detail: str = ""


class FeedbackResponse(BaseModel):
    update: UpdateSummary
    next: SessionPayload


class WeightsView(BaseModel):
    interaction: list[float]
    motion: list[float]


class SessionState(BaseModel):
    session_id: str
    iteration: int
    weight_hash: str
    weights: WeightsView
    history: list[dict]
    manifest: list[dict]
    top: list[TrajectoryView]
    scene: SceneView


class EventsResponse(BaseModel):
    events: list[dict]


class ErrorPayload(BaseModel):
    error: str
