"""HTTP facade over sessions.

Every mutating endpoint takes a session id (defaulting to "default") and a
user name. Handlers hold a per-session lock, so concurrent clients see a
serialized interaction history.
"""

from __future__ import annotations

import itertools
import threading
from typing import Dict, List, Optional

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel, Field

from . import programs as P
from .session import Candidate, Session, SessionError, SubmitResult
from .world import WorldState, world_diff, world_to_dict

DEFAULT_SESSION = "default"


class SubmitRequest(BaseModel):
    user: str = Field(min_length=1)
    utterance: str
    session: str = DEFAULT_SESSION


class AcceptRequest(BaseModel):
    user: str = Field(min_length=1)
    index: int
    session: str = DEFAULT_SESSION


class UserRequest(BaseModel):
    user: str = Field(min_length=1)
    session: str = DEFAULT_SESSION


class DefineStartRequest(BaseModel):
    user: str = Field(min_length=1)
    head: str
    session: str = DEFAULT_SESSION


class DefineAcceptRequest(BaseModel):
    user: str = Field(min_length=1)
    head: Optional[str] = None
    last: Optional[int] = None
    session: str = DEFAULT_SESSION


class SessionRequest(BaseModel):
    session: Optional[str] = None


class SessionRegistry:
    def __init__(self) -> None:
        self._sessions: Dict[str, Session] = {}
        self._locks: Dict[str, threading.Lock] = {}
        self._registry_lock = threading.Lock()
        self._counter = itertools.count(1)

    def create(self, name: Optional[str] = None, session: Optional[Session] = None) -> str:
        with self._registry_lock:
            if name is None:
                name = f"s{next(self._counter)}"
                while name in self._sessions:
                    name = f"s{next(self._counter)}"
            if name in self._sessions:
                raise HTTPException(409, detail=f"session {name!r} already exists")
            self._sessions[name] = session if session is not None else Session()
            self._locks[name] = threading.Lock()
            return name

    def get(self, name: str) -> Session:
        session = self._sessions.get(name)
        if session is None:
            raise HTTPException(404, detail=f"no session named {name!r}")
        return session

    def lock(self, name: str) -> threading.Lock:
        lock = self._locks.get(name)
        if lock is None:
            raise HTTPException(404, detail=f"no session named {name!r}")
        return lock

    def names(self) -> List[str]:
        return sorted(self._sessions)


def candidate_payload(candidate: Candidate, base: WorldState) -> dict:
    return {
        "index": candidate.index,
        "program": candidate.program_text,
        "score": candidate.score,
        "core_only": candidate.derivation.is_core_only(),
        "rules": sorted(set(candidate.derivation.rule_ids())),
        "diff": world_diff(base, candidate.next_state),
    }


def submit_payload(result: SubmitResult) -> dict:
    payload = {
        "status": result.status,
        "utterance": result.utterance,
        "define_depth": result.define_depth,
        "candidates": [],
    }
    if result.base_state is not None:
        payload["candidates"] = [
            candidate_payload(c, result.base_state) for c in result.candidates
        ]
    return payload


def rule_payload(rule) -> dict:
    return {
        "id": rule.id,
        "lhs": rule.lhs.value,
        "rhs": rule.rhs_text(),
        "template": (P.pretty(rule.template.skeleton)
                     if rule.template is not None else None),
        "author": rule.author,
        "core": rule.is_core,
        "use_count": rule.use_count,
        "used_by_other": rule.used_by_other,
        "citations": rule.citations,
    }


def create_app(registry: Optional[SessionRegistry] = None) -> FastAPI:
    app = FastAPI(title="voxlang")
    # browser clients are served from wherever; the API itself is the only truth
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    app.state.registry = registry if registry is not None else SessionRegistry()
    if DEFAULT_SESSION not in app.state.registry.names():
        app.state.registry.create(DEFAULT_SESSION)

    def run(name: str, fn):
        reg: SessionRegistry = app.state.registry
        with reg.lock(name):
            session = reg.get(name)
            try:
                return fn(session)
            except SessionError as exc:
                raise HTTPException(409, detail={"code": exc.code,
                                                 "message": str(exc)})

    @app.post("/session")
    def make_session(req: SessionRequest) -> dict:
        name = app.state.registry.create(req.session)
        return {"session": name}

    @app.get("/sessions")
    def list_sessions() -> dict:
        return {"sessions": app.state.registry.names()}

    @app.post("/submit")
    def submit(req: SubmitRequest) -> dict:
        return run(req.session, lambda s: submit_payload(
            s.submit(req.user, req.utterance)))

    @app.post("/accept")
    def accept(req: AcceptRequest) -> dict:
        def fn(session: Session) -> dict:
            before = session.world
            chosen = session.accept(req.user, req.index)
            return {
                "accepted": chosen.index,
                "program": chosen.program_text,
                "world": world_to_dict(session.world),
                "diff": world_diff(before, session.world),
                "define_depth": session.define_depth(req.user),
            }
        return run(req.session, fn)

    @app.post("/reject")
    def reject(req: UserRequest) -> dict:
        return run(req.session, lambda s: submit_payload(s.reject(req.user)))

    @app.post("/define/start")
    def define_start(req: DefineStartRequest) -> dict:
        return run(req.session, lambda s: submit_payload(
            s.define_start(req.user, req.head)))

    @app.post("/define/step")
    def define_step(req: SubmitRequest) -> dict:
        return run(req.session, lambda s: submit_payload(
            s.define_step(req.user, req.utterance)))

    @app.post("/define/accept")
    def define_accept(req: DefineAcceptRequest) -> dict:
        def fn(session: Session) -> dict:
            result = session.define_accept(req.user, req.head, req.last)
            return {
                "head": result.head,
                "rules": [rule_payload(r) for r in result.rules],
                "redundant": result.redundant,
                "world": world_to_dict(result.world),
                "define_depth": result.define_depth,
            }
        return run(req.session, fn)

    @app.post("/define/cancel")
    def define_cancel(req: UserRequest) -> dict:
        return run(req.session, lambda s: {
            "define_depth": s.define_cancel(req.user)})

    @app.get("/state")
    def state(session: str = DEFAULT_SESSION) -> dict:
        def fn(s: Session) -> dict:
            return {
                "world": world_to_dict(s.world),
                "define_depths": {u: len(stack) for u, stack in
                                  s.define_stacks.items() if stack},
                "pending_users": sorted(s.pending),
                "interactions": len(s.records),
            }
        return run(session, fn)

    @app.get("/metrics")
    def metrics(session: str = DEFAULT_SESSION, window: int = 50) -> dict:
        return run(session, lambda s: s.metrics_report(window=window))

    @app.get("/grammar")
    def grammar(session: str = DEFAULT_SESSION, induced_only: bool = False) -> dict:
        def fn(s: Session) -> dict:
            rules = s.grammar.induced_rules() if induced_only else s.grammar.rules
            return {"rules": [rule_payload(r) for r in rules]}
        return run(session, fn)

    return app


app = create_app()
