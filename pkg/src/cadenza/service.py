"""HTTP API for the interactive workflow: upload, generate, restyle, download.

Sessions are held in memory with TTL eviction and one lock each, so requests
within a session are serialized while different sessions proceed in parallel.
Request-shape problems return 400, unknown resources 404, ordering violations
409, and engine errors 422.
"""

from __future__ import annotations

import tempfile
import threading
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, File, Form, Request, UploadFile
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, Response

from .arrange import (
    Arrangement,
    ArrangerConfig,
    Complexity,
    TexturePhrase,
    arrange,
    load_textures,
    rearrange_phrase,
)
from .harmonize import (
    HarmonizationResult,
    HarmonizerConfig,
    harmonize,
    select_style,
)
from .library import Library, StyleLabel, TransitionStats, load_library, default_library_path
from .midi import AnnotationSidecar, arrangement_midi_bytes, read_midi_bytes, parse_melody_midi
from .core import AnnotatedMelody


@dataclass
class Session:
    id: str
    melody: AnnotatedMelody
    created: float
    touched: float
    lock: threading.Lock = field(default_factory=threading.Lock, repr=False)
    result: Optional[HarmonizationResult] = None
    arrangement: Optional[Arrangement] = None
    complexity: Complexity = Complexity.MEDIUM


class _Engine:
    def __init__(
        self,
        library: Library,
        textures: list[TexturePhrase],
        session_ttl_seconds: float,
    ):
        self.library = library
        self.stats = TransitionStats.build(library)
        self.textures = textures
        self.session_ttl = session_ttl_seconds
        self.sessions: dict[str, Session] = {}
        self.sessions_lock = threading.Lock()

    def evict_expired(self) -> None:
        now = time.monotonic()
        with self.sessions_lock:
            expired = [
                sid for sid, s in self.sessions.items()
                if now - s.touched > self.session_ttl
            ]
            for sid in expired:
                del self.sessions[sid]

    def add_session(self, melody: AnnotatedMelody) -> Session:
        session = Session(
            id=uuid.uuid4().hex,
            melody=melody,
            created=time.monotonic(),
            touched=time.monotonic(),
        )
        with self.sessions_lock:
            self.sessions[session.id] = session
        return session

    def get_session(self, session_id: str) -> Optional[Session]:
        self.evict_expired()
        with self.sessions_lock:
            session = self.sessions.get(session_id)
            if session:
                session.touched = time.monotonic()
            return session


class _ApiError(Exception):
    def __init__(self, status: int, detail: str):
        super().__init__(detail)
        self.status = status
        self.detail = detail


def _summary(session: Session) -> dict:
    result = session.result
    assert result is not None
    phrases = []
    for i, choice in enumerate(result.choices):
        phrases.append({
            "index": choice.phrase_index,
            "label": choice.label,
            "identity": choice.identity,
            "template_id": choice.chosen.id_string,
            "style": choice.chosen.style.value if choice.chosen.style else None,
            "losses": {
                "micro": choice.micro,
                "meso": choice.meso,
                "macro": choice.macro,
            },
            "variants": [
                {"template_id": v.id_string,
                 "style": v.style.value if v.style else None}
                for v in choice.variants
            ],
            "available_styles": [s.value for s in choice.available_styles()],
            "chords": result.phrase_chords(i).as_pairs(),
        })
    assert session.arrangement is not None
    return {
        "session_id": session.id,
        "total_score": result.total_score,
        "alpha": result.config_used.alpha,
        "beta": result.config_used.beta,
        "texture_complexity": session.complexity.value,
        "texture_ids": list(session.arrangement.texture_ids),
        "phrases": phrases,
    }


def _parse_style(raw: Optional[str]) -> Optional[StyleLabel]:
    if raw is None or raw == "":
        return None
    try:
        return StyleLabel(raw)
    except ValueError:
        raise _ApiError(400, f"unknown style {raw!r}; expected one of "
                             f"{sorted(s.value for s in StyleLabel)}")


def _parse_complexity(raw: Optional[str], fallback: Complexity) -> Complexity:
    if raw is None or raw == "":
        return fallback
    try:
        return Complexity(raw)
    except ValueError:
        raise _ApiError(400, f"unknown complexity {raw!r}; expected one of "
                             f"{sorted(c.value for c in Complexity)}")


def _parse_weight(raw, name: str, fallback: float) -> float:
    if raw is None:
        return fallback
    try:
        value = float(raw)
    except (TypeError, ValueError):
        raise _ApiError(400, f"{name} must be a number in [0, 1]")
    if not 0.0 <= value <= 1.0:
        raise _ApiError(400, f"{name} must lie in [0, 1], got {value}")
    return value


def create_app(
    library_path: Optional[str | Path] = None,
    texture_path: Optional[str | Path] = None,
    session_ttl_seconds: float = 3600.0,
) -> FastAPI:
    engine = _Engine(
        library=load_library(library_path or default_library_path()),
        textures=load_textures(texture_path),
        session_ttl_seconds=session_ttl_seconds,
    )
    app = FastAPI(title="cadenza", version="0.1.0")
    app.state.engine = engine
    # the browser client may be served from another origin during development
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.exception_handler(_ApiError)
    async def api_error_handler(_request: Request, exc: _ApiError):
        return JSONResponse(status_code=exc.status, content={"detail": exc.detail})

    @app.exception_handler(RequestValidationError)
    async def validation_handler(_request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"detail": str(exc.errors())})

    def _session_or_404(session_id: str) -> Session:
        session = engine.get_session(session_id)
        if session is None:
            raise _ApiError(404, f"unknown session {session_id!r}")
        return session

    @app.post("/songs", status_code=201)
    async def upload_song(
        file: UploadFile = File(...),
        phrases: str = Form(...),
        key: str = Form(...),
        mode: str = Form(...),
        meter: str = Form("4/4"),
    ):
        payload = await file.read()
        if not payload:
            raise _ApiError(400, "uploaded MIDI file is empty")
        annotation = AnnotationSidecar(phrases, key, mode, meter)
        try:
            read_midi_bytes(payload)  # cheap structural check before parsing
            with tempfile.NamedTemporaryFile(suffix=".mid") as handle:
                handle.write(payload)
                handle.flush()
                melody = parse_melody_midi(handle.name, annotation)
        except ValueError as exc:
            raise _ApiError(400, f"could not parse upload: {exc}")
        session = engine.add_session(melody)
        return {
            "session_id": session.id,
            "phrase_count": len(melody.phrases),
            "phrases": [
                {"index": i, "label": p.label, "length_bars": p.length_bars}
                for i, p in enumerate(melody.phrases)
            ],
            "key": str(melody.key),
            "meter": f"{melody.meter[0]}/{melody.meter[1]}",
        }

    @app.post("/songs/{session_id}/generate")
    async def generate(session_id: str, body: Optional[dict] = None):
        session = _session_or_404(session_id)
        body = body or {}
        style = _parse_style(body.get("style"))
        complexity = _parse_complexity(body.get("complexity"), Complexity.MEDIUM)
        alpha = _parse_weight(body.get("alpha"), "alpha", 0.1)
        beta = _parse_weight(body.get("beta"), "beta", 0.5)
        config = HarmonizerConfig(
            alpha=alpha,
            beta=beta,
            style_filter=frozenset({style}) if style else None,
        )
        with session.lock:
            try:
                result = harmonize(session.melody, engine.library, engine.stats, config)
                arrangement = arrange(
                    session.melody, result, engine.textures, complexity, ArrangerConfig()
                )
            except ValueError as exc:
                raise _ApiError(422, str(exc))
            session.result = result
            session.arrangement = arrangement
            session.complexity = complexity
            return _summary(session)

    @app.post("/songs/{session_id}/phrases/{phrase_index}/style")
    async def restyle_phrase(session_id: str, phrase_index: int, body: dict):
        session = _session_or_404(session_id)
        raw_style = body.get("style")
        if raw_style is None:
            raise _ApiError(400, "body must include a style")
        style = _parse_style(raw_style)
        with session.lock:
            if session.result is None or session.arrangement is None:
                raise _ApiError(409, "generate the song before restyling phrases")
            if not 0 <= phrase_index < len(session.result.choices):
                raise _ApiError(
                    404,
                    f"phrase {phrase_index} out of range "
                    f"(0..{len(session.result.choices) - 1})",
                )
            try:
                session.result = select_style(session.result, phrase_index, style)
            except ValueError as exc:
                raise _ApiError(422, str(exc))
            session.arrangement = rearrange_phrase(
                session.arrangement, session.result, engine.textures, phrase_index
            )
            return _summary(session)

    @app.post("/songs/{session_id}/texture")
    async def retexture(session_id: str, body: dict):
        session = _session_or_404(session_id)
        raw = body.get("complexity")
        if raw is None:
            raise _ApiError(400, "body must include a complexity")
        complexity = _parse_complexity(raw, Complexity.MEDIUM)
        with session.lock:
            if session.result is None:
                raise _ApiError(409, "generate the song before changing texture")
            try:
                session.arrangement = arrange(
                    session.melody, session.result, engine.textures,
                    complexity, ArrangerConfig(),
                )
            except ValueError as exc:
                raise _ApiError(422, str(exc))
            session.complexity = complexity
            return _summary(session)

    @app.get("/songs/{session_id}/midi")
    async def download_midi(session_id: str):
        session = _session_or_404(session_id)
        with session.lock:
            if session.arrangement is None:
                raise _ApiError(409, "generate the song before downloading")
            payload = arrangement_midi_bytes(session.arrangement)
        return Response(
            content=payload,
            media_type="audio/midi",
            headers={"Content-Disposition": 'attachment; filename="arrangement.mid"'},
        )

    return app
