"""FastAPI application exposing the coactive feedback loop.

Endpoints:
  POST /sessions                  create a session, returns the top-k payload
  GET  /sessions/{id}             weights snapshot, history, manifest
  POST /sessions/{id}/rerank      click a rank as improved feedback
  POST /sessions/{id}/edit       drag one interior waypoint to a wrist target
  GET  /sessions/{id}/events      append-only event log

The browser UI, when built into frontend/dist, is served under /ui.
"""
from __future__ import annotations

from pathlib import Path

from fastapi import FastAPI
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from ..harness.scenarios import ScenarioError
from ..sampler import SamplerError
from .schemas import (
    CreateSessionRequest,
    EditRequest,
    EventsResponse,
    FeedbackResponse,
    RerankRequest,
    SessionPayload,
    SessionState,
)
from .sessions import BadRequest, EditRejected, SessionManager, SessionNotFound


def create_app(manager: SessionManager | None = None) -> FastAPI:
    manager = manager or SessionManager()
    app = FastAPI(title="coactive feedback service")

    @app.exception_handler(SessionNotFound)
    async def _not_found(_, exc):
        return JSONResponse(status_code=404, content={"error": f"no session {exc}"})

    @app.exception_handler(BadRequest)
    async def _bad_request(_, exc):
        return JSONResponse(status_code=422, content={"error": str(exc)})

    @app.exception_handler(EditRejected)
    async def _rejected(_, exc):
        return JSONResponse(status_code=409, content={"error": str(exc)})

    @app.post("/sessions", response_model=SessionPayload)
    def create_session(req: CreateSessionRequest):
        try:
            session = manager.create(
                req.scenario_seed, req.family, req.scene, req.seed, req.k, req.candidates
            )
        except (ScenarioError, SamplerError, ValueError) as err:
            return JSONResponse(status_code=422, content={"error": str(err)})
        return manager.payload(session)

    @app.get("/sessions/{session_id}", response_model=SessionState)
    def get_state(session_id: str):
        session = manager.get(session_id)
        with session.lock:
            return manager.state(session)

    @app.post("/sessions/{session_id}/rerank", response_model=FeedbackResponse)
    def rerank(session_id: str, req: RerankRequest):
        session, event = manager.rerank(session_id, req.rank)
        return {
            "update": {
                "iteration": session.iteration,
                "accepted": True,
                "weight_delta_norm": event["weight_delta_norm"],
                "weight_hash": event["weight_hash"],
            },
            "next": manager.payload(session),
        }

    @app.post("/sessions/{session_id}/edit", response_model=FeedbackResponse)
    def edit(session_id: str, req: EditRequest):
        session, event = manager.edit(session_id, req.index, req.target)
        return {
            "update": {
                "iteration": session.iteration,
                "accepted": True,
                "weight_delta_norm": event["weight_delta_norm"],
                "weight_hash": event["weight_hash"],
                "detail": f"residual {event['residual']:.4f} m",
            },
            "next": manager.payload(session),
        }

    @app.get("/sessions/{session_id}/events", response_model=EventsResponse)
    def events(session_id: str):
        session = manager.get(session_id)
        with session.lock:
            return {"events": list(session.events)}

    ui_dir = Path(__file__).resolve().parents[3] / "frontend" / "dist"
    if ui_dir.is_dir():
        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
