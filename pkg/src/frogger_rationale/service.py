"""HTTP service for think-aloud collection sessions.

Turn-taking contract: an action opens a pending rationale slot; further
actions are rejected until the rationale arrives (or a redo recycles the
previous one). Sessions are held in memory with optional JSONL
journaling; mutations on a session are serialized by a per-session lock.
"""

from __future__ import annotations

import threading
import time
import uuid
from dataclasses import dataclass, field

from fastapi import FastAPI, HTTPException
from fastapi.responses import PlainTextResponse
from pydantic import BaseModel

import json
import os

from . import corpus as corpus_mod
from . import env
from .corpus import CorpusRecord
from .env import Action, EnvConfig, GameState, Status

PAUSE_SECONDS = 10

PHASES = ("tutorial", "collecting", "review", "done")


@dataclass
class Session:
    id: str
    env_cfg: EnvConfig
    state: GameState
    phase: str = "tutorial"
    pending_action: Action | None = None
    pending_state: GameState | None = None  # snapshot before the action
    pending_outcome: env.StepOutcome | None = None
    records: list[CorpusRecord] = field(default_factory=list)
    lock: threading.Lock = field(default_factory=threading.Lock)


def _state_json(env_cfg: EnvConfig, state: GameState) -> dict:
    from . import serialize

    return {
        "grid": "".join(serialize.serialize_full(state)),
        "board": env.render_ascii(state),
        "frog": list(state.frog),
        "lives": state.lives,
        "tick": state.tick,
        "status": state.status.value,
        "width": env_cfg.width,
        "height": env_cfg.height,
    }


def _record_json(env_cfg: EnvConfig, rec: CorpusRecord) -> dict:
    data = corpus_mod.record_to_json(rec)
    data["board"] = env.render_ascii(rec.state(env_cfg.width))
    return data


class PhaseBody(BaseModel):
    phase: str


class ActionBody(BaseModel):
    action: str


class TextBody(BaseModel):
    text: str


def create_app(env_cfg: EnvConfig | None = None, journal_dir: str | None = None) -> FastAPI:
    if env_cfg is None:
        env_cfg = env.default_config()
    env_cfg.validate()
    app = FastAPI(title="rationale collection service")
    sessions: dict[str, Session] = {}

    def get_session(sid: str) -> Session:
        session = sessions.get(sid)
        if session is None:
            raise HTTPException(status_code=404, detail=f"unknown session {sid}")
        return session

    def journal(session: Session, rec: CorpusRecord) -> None:
        if journal_dir is None:
            return
        os.makedirs(journal_dir, exist_ok=True)
        path = os.path.join(journal_dir, f"{session.id}.jsonl")
        with open(path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(corpus_mod.record_to_json(rec)) + "\n")

    @app.post("/sessions")
    def create_session():
        sid = uuid.uuid4().hex[:12]
        seed = int.from_bytes(sid[:8].encode(), "big") % 2**31
        cfg = env.with_seed(env_cfg, seed)
        session = Session(id=sid, env_cfg=cfg, state=env.new_game(cfg))
        sessions[sid] = session
        return {"id": sid, "state": _state_json(cfg, session.state), "phase": session.phase}

    @app.post("/sessions/{sid}/phase")
    def advance_phase(sid: str, body: PhaseBody):
        session = get_session(sid)
        with session.lock:
            if body.phase not in PHASES:
                raise HTTPException(status_code=400, detail=f"unknown phase {body.phase!r}")
            current = PHASES.index(session.phase)
            if PHASES.index(body.phase) != current + 1:
                raise HTTPException(
                    status_code=409,
                    detail=f"cannot move from {session.phase} to {body.phase}",
                )
            if session.pending_action is not None:
                raise HTTPException(status_code=409, detail="rationale still pending")
            session.phase = body.phase
            return {"id": sid, "phase": session.phase}

    @app.post("/sessions/{sid}/action")
    def take_action(sid: str, body: ActionBody):
        session = get_session(sid)
        with session.lock:
            if session.phase != "collecting":
                raise HTTPException(status_code=409, detail="not in collecting phase")
            if session.pending_action is not None:
                raise HTTPException(
                    status_code=409, detail="rationale pending for previous action"
                )
            try:
                action = Action(body.action)
            except ValueError:
                raise HTTPException(status_code=400, detail=f"unknown action {body.action!r}")
            if session.state.status != Status.RUNNING:
                raise HTTPException(status_code=409, detail="game is over")
            before = session.state
            after, outcome = env.step(session.env_cfg, before, action)
            session.state = after
            session.pending_action = action
            session.pending_state = before
            session.pending_outcome = outcome
            return {
                "state": _state_json(session.env_cfg, after),
                "outcome": {
                    "reward": outcome.reward,
                    "event": outcome.event.value,
                    "terminal": outcome.terminal,
                },
                "pause_seconds": PAUSE_SECONDS,
            }

    def _commit_record(session: Session, text: str, redo_of: str | None) -> CorpusRecord:
        rec = corpus_mod.record_from_state(
            rid=f"{session.id}-{len(session.records):04d}",
            state=session.pending_state,
            action=session.pending_action,
            rationale=text,
            participant=session.id,
            redo_of=redo_of,
            ts=time.time(),
        )
        session.records.append(rec)
        session.pending_action = None
        session.pending_state = None
        session.pending_outcome = None
        journal(session, rec)
        return rec

    @app.post("/sessions/{sid}/rationale")
    def submit_rationale(sid: str, body: TextBody):
        session = get_session(sid)
        with session.lock:
            if session.pending_action is None:
                raise HTTPException(status_code=409, detail="no action awaiting a rationale")
            if not body.text.strip():
                raise HTTPException(status_code=400, detail="rationale must be non-empty")
            rec = _commit_record(session, body.text.strip(), None)
            return {"record": _record_json(session.env_cfg, rec)}

    @app.post("/sessions/{sid}/redo")
    def redo_rationale(sid: str):
        session = get_session(sid)
        with session.lock:
            if session.pending_action is None:
                raise HTTPException(status_code=409, detail="no action awaiting a rationale")
            if not session.records:
                raise HTTPException(status_code=409, detail="no previous rationale to recycle")
            prev = session.records[-1]
            if prev.action != session.pending_action:
                raise HTTPException(
                    status_code=409,
                    detail="redo only applies to a repeated action",
                )
            rec = _commit_record(session, prev.rationale, prev.id)
            return {"record": _record_json(session.env_cfg, rec)}

    @app.get("/sessions/{sid}/records")
    def list_records(sid: str):
        session = get_session(sid)
        with session.lock:
            return {
                "records": [_record_json(session.env_cfg, r) for r in session.records]
            }

    @app.patch("/sessions/{sid}/records/{rid}")
    def edit_record(sid: str, rid: str, body: TextBody):
        session = get_session(sid)
        with session.lock:
            if not body.text.strip():
                raise HTTPException(status_code=400, detail="rationale must be non-empty")
            for i, rec in enumerate(session.records):
                if rec.id == rid:
                    rec.rationale = body.text.strip()
                    rec.edited = True
                    journal(session, rec)
                    return {"record": _record_json(session.env_cfg, rec)}
            raise HTTPException(status_code=404, detail=f"unknown record {rid}")

    @app.get("/sessions/{sid}/export")
    def export_records(sid: str):
        session = get_session(sid)
        with session.lock:
            lines = [
                json.dumps(corpus_mod.record_to_json(r)) for r in session.records
            ]
        body = "\n".join(lines) + ("\n" if lines else "")
        return PlainTextResponse(body, media_type="application/x-ndjson")

    return app
