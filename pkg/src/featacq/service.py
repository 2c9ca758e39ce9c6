"""HTTP layer for interactive acquisition sessions.

Sessions live in memory with TTL eviction; writes to one session are
serialized by a non-blocking per-session lock (two racing submits yield
one success and one conflict). The model and schema are immutable and
shared across sessions.
"""

from __future__ import annotations

import json
import threading
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .data import DatasetSchema, load_schema
from .engine import (
    STATUS_ACTIVE,
    AcquisitionSession,
    make_policy,
    new_session,
    trajectory_from_session,
)
from .errors import BudgetError, ConfigError, FeatacqError, SessionStateError
from .model_io import ModelBundle, load_model

DEFAULT_TTL_SECONDS = 86400.0


@dataclass
class ModelEntry:
    tag: str
    bundle: ModelBundle
    schema: DatasetSchema

    def schema_summary(self) -> dict:
        b = self.bundle.bounds
        return {
            "feature_count": self.schema.n_features,
            "class_names": list(self.schema.class_names),
            "features": [
                {
                    "index": i,
                    "name": self.schema.feature_names[i],
                    "kind": self.schema.feature_kinds[i],
                    "cost": float(self.schema.costs[i]),
                    # raw clinical units map onto [0, 1] by clamp + min-max with these bounds
                    "raw_lower": float(b.lower[i]),
                    "raw_upper": float(b.upper[i]),
                    "baseline": float(self.bundle.baseline[i]),
                }
                for i in range(self.schema.n_features)
            ],
        }


class ModelRegistry:
    """Immutable set of deployable models, keyed by tag."""

    def __init__(self, entries: dict[str, ModelEntry]):
        self.entries = entries

    @classmethod
    def from_directory(cls, model_dir) -> "ModelRegistry":
        model_dir = Path(model_dir)
        entries = {}
        for model_path in sorted(model_dir.glob("*.model.json")):
            tag = model_path.name[: -len(".model.json")]
            schema_path = model_dir / f"{tag}.schema.json"
            if not schema_path.exists():
                raise ConfigError(f"model {model_path.name} has no sibling {schema_path.name}")
            schema = load_schema(schema_path)
            bundle = load_model(model_path, schema=schema)
            entries[tag] = ModelEntry(tag=tag, bundle=bundle, schema=schema)
        if not entries:
            raise ConfigError(f"no *.model.json files found in {model_dir}")
        return cls(entries)


@dataclass
class SessionHandle:
    session_id: str
    dataset_tag: str
    created_at: float
    session: AcquisitionSession
    lock: threading.Lock = field(default_factory=threading.Lock)


class SessionStore:
    def __init__(self, ttl_seconds: float = DEFAULT_TTL_SECONDS):
        self.ttl = ttl_seconds
        self._lock = threading.Lock()
        self._live: dict[str, SessionHandle] = {}
        self._tombstones: set[str] = set()

    def create(self, handle: SessionHandle):
        with self._lock:
            self._sweep()
            self._live[handle.session_id] = handle

    def get(self, session_id: str) -> SessionHandle | None:
        with self._lock:
            self._sweep()
            return self._live.get(session_id)

    def is_expired(self, session_id: str) -> bool:
        with self._lock:
            return session_id in self._tombstones

    def _sweep(self):
        now = time.monotonic()
        dead = [sid for sid, h in self._live.items() if now - h.created_at > self.ttl]
        for sid in dead:
            del self._live[sid]
            self._tombstones.add(sid)


class CreateSessionRequest(BaseModel):
    model_tag: str
    policy: str = "aig"
    budget: float | None = None
    steps_m: int = 50
    seed: int = 0


class SubmitFeatureRequest(BaseModel):
    feature_index: int
    value: float


def _suggestion_body(session: AcquisitionSession) -> dict | None:
    if session.status != STATUS_ACTIVE:
        return None
    suggestion = session.suggest_next()
    if suggestion is None:
        return None
    index, score = suggestion
    return {
        "feature_index": index,
        "feature_name": session.schema.feature_names[index],
        "cost": float(session.schema.costs[index]),
        "score": score,
    }


def _state_body(handle: SessionHandle) -> dict:
    session = handle.session
    body = {
        "session_id": handle.session_id,
        "dataset_tag": handle.dataset_tag,
        "status": session.status,
        "policy": session.policy.tag,
        "budget": session.budget,
        "accumulated_cost": session.accumulated_cost,
        "remaining_budget": session.remaining_budget(),
        "step": session.step,
        "posterior": [float(p) for p in session.posterior()],
        "predicted_class": session.predicted_class(),
        "class_names": list(session.schema.class_names),
        "step0_posterior": [float(p) for p in session.step0_posterior],
        "history": [
            {
                "step": h.step,
                "feature_index": h.feature_index,
                "feature_name": session.schema.feature_names[h.feature_index],
                "value": h.value,
                "cost": h.cost,
                "accumulated_cost": h.accumulated_cost,
                "score": None if np.isnan(h.score) else h.score,
                "posterior": [float(p) for p in h.posterior],
                "predicted_class": int(np.argmax(h.posterior)),
            }
            for h in session.history
        ],
    }
    if session.status != STATUS_ACTIVE:
        body["stop_reason"] = session.status
    return body


def create_app(registry: ModelRegistry, session_ttl: float = DEFAULT_TTL_SECONDS) -> FastAPI:
    app = FastAPI(title="featacq acquisition service")
    store = SessionStore(ttl_seconds=session_ttl)
    app.state.registry = registry
    app.state.sessions = store

    @app.exception_handler(RequestValidationError)
    async def malformed_body(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"error": "malformed request body"})

    def error_response(status: int, message: str, **extra):
        return JSONResponse(status_code=status, content={"error": message, **extra})

    def lookup(session_id: str):
        handle = store.get(session_id)
        if handle is None:
            reason = "session expired" if store.is_expired(session_id) else "unknown session"
            return None, error_response(404, reason)
        return handle, None

    @app.get("/v1/models")
    def list_models():
        return {
            "models": [
                {
                    "model_tag": entry.tag,
                    "dataset_tag": entry.bundle.dataset_tag,
                    "kind": entry.bundle.kind,
                    "feature_count": entry.schema.n_features,
                    "class_count": entry.schema.class_count,
                }
                for entry in registry.entries.values()
            ]
        }

    @app.post("/v1/sessions", status_code=201)
    def create_session(req: CreateSessionRequest):
        entry = registry.entries.get(req.model_tag)
        if entry is None:
            return error_response(404, f"unknown model_tag {req.model_tag!r}")
        try:
            policy = make_policy(req.policy, steps=req.steps_m, seed=req.seed)
            session = new_session(entry.bundle, entry.schema, policy, budget=req.budget)
        except FeatacqError as exc:
            return error_response(400, str(exc))
        handle = SessionHandle(
            session_id=uuid.uuid4().hex,
            dataset_tag=entry.bundle.dataset_tag or entry.tag,
            created_at=time.monotonic(),
            session=session,
        )
        store.create(handle)
        body = _state_body(handle)
        body["schema"] = entry.schema_summary()
        body["suggestion"] = _suggestion_body(session)
        return body

    @app.get("/v1/sessions/{session_id}")
    def get_state(session_id: str):
        handle, err = lookup(session_id)
        if err is not None:
            return err
        return _state_body(handle)

    @app.get("/v1/sessions/{session_id}/export")
    def export_trajectory(session_id: str):
        handle, err = lookup(session_id)
        if err is not None:
            return err
        return {"trajectory": trajectory_from_session(handle.session).to_records()}

    @app.post("/v1/sessions/{session_id}/features")
    def submit_feature(session_id: str, req: SubmitFeatureRequest):
        handle, err = lookup(session_id)
        if err is not None:
            return err
        if not handle.lock.acquire(blocking=False):
            return error_response(409, "another write to this session is in flight")
        try:
            session = handle.session
            try:
                session.acquire(req.feature_index, req.value)
            except SessionStateError as exc:
                return error_response(409, str(exc))
            except BudgetError as exc:
                return error_response(422, str(exc), remaining_budget=exc.remaining)
            except FeatacqError as exc:
                return error_response(400, str(exc))
            body = {
                "step": session.step,
                "posterior": [float(p) for p in session.posterior()],
                "predicted_class": session.predicted_class(),
                "accumulated_cost": session.accumulated_cost,
                "remaining_budget": session.remaining_budget(),
                "status": session.status,
                "next_suggestion": _suggestion_body(session),
            }
            if session.status != STATUS_ACTIVE:
                body["stop_reason"] = session.status
            return body
        finally:
            handle.lock.release()

    return app
