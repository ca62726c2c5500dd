"""HTTP facade for the edit-and-resynthesize loop.

Every response carries the session revision (JSON field and
X-Session-Revision header); mutations must present the current revision and
are rejected with 409 otherwise. Curve uploads are validated before being
accepted: 422 responses name the offending field path.
"""

from __future__ import annotations

import io
import struct

from fastapi import Body, FastAPI, Response
from fastapi.responses import FileResponse, JSONResponse

from .f0 import contour_to_dict
from .mel import MEL_MAGIC
from .score import ScoreError
from .session import (
    CurveValidationError,
    RevisionConflict,
    Session,
    SessionNotFound,
    SessionService,
)
from .style_tokens import bundle_to_dict


def _meta(session: Session) -> dict:
    return {
        "id": session.id,
        "revision": session.revision,
        "mel_revision": session.mel_revision,
        "frames": session.n_frames,
        "seed": session.seed,
        "created": session.created,
        "updated": session.updated,
    }


def _headers(session: Session) -> dict:
    return {
        "X-Session-Revision": str(session.revision),
        "X-Mel-Revision": str(session.mel_revision),
    }


def create_app(service: SessionService, ui_dir=None) -> FastAPI:
    app = FastAPI(title="svslab session service")

    @app.exception_handler(SessionNotFound)
    def _not_found(request, exc):
        return JSONResponse(status_code=404, content={
            "error": "session_not_found", "message": str(exc)})

    @app.exception_handler(RevisionConflict)
    def _conflict(request, exc):
        return JSONResponse(status_code=409, content={
            "error": "revision_conflict",
            "expected": exc.expected, "got": exc.got})

    @app.exception_handler(CurveValidationError)
    def _invalid_curve(request, exc):
        return JSONResponse(status_code=422, content={
            "error": "invalid_curve", "field": exc.field_path,
            "message": exc.message})

    @app.exception_handler(ScoreError)
    def _invalid_score(request, exc):
        return JSONResponse(status_code=422, content={
            "error": "invalid_score", "field": exc.field_path,
            "message": str(exc)})

    @app.post("/sessions", status_code=201)
    def create_session(body: dict = Body(...)):
        session = service.create_session(body.get("score"),
                                         seed=int(body.get("seed", 0)))
        return JSONResponse(status_code=201, content=_meta(session),
                            headers=_headers(session))

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        session = service.get(session_id)
        return JSONResponse(content=_meta(session), headers=_headers(session))

    @app.get("/sessions/{session_id}/style")
    def get_style(session_id: str):
        session = service.get(session_id)
        return JSONResponse(content={
            "revision": session.revision,
            "mel_revision": session.mel_revision,
            "style": bundle_to_dict(session.style),
        }, headers=_headers(session))

    @app.get("/sessions/{session_id}/f0")
    def get_f0(session_id: str):
        session = service.get(session_id)
        return JSONResponse(content={
            "revision": session.revision,
            "mel_revision": session.mel_revision,
            "f0": contour_to_dict(session.f0),
        }, headers=_headers(session))

    @app.get("/sessions/{session_id}/mel")
    def get_mel(session_id: str):
        session = service.get(session_id)
        mel = session.mel
        buf = io.BytesIO()
        buf.write(MEL_MAGIC)
        buf.write(struct.pack("<II", mel.n_frames, mel.n_mels))
        buf.write(mel.frames.astype("<f4").tobytes())
        return Response(content=buf.getvalue(),
                        media_type="application/octet-stream",
                        headers=_headers(session))

    @app.put("/sessions/{session_id}/f0")
    def put_f0(session_id: str, body: dict = Body(...)):
        session = service.put_f0(session_id, int(body.get("revision", -1)),
                                 body.get("f0") or {})
        return JSONResponse(content={"revision": session.revision},
                            headers=_headers(session))

    @app.put("/sessions/{session_id}/style")
    def put_style(session_id: str, body: dict = Body(...)):
        session = service.put_style(session_id, int(body.get("revision", -1)),
                                    body.get("style") or {})
        return JSONResponse(content={"revision": session.revision},
                            headers=_headers(session))

    @app.post("/sessions/{session_id}/resynthesize")
    def resynthesize(session_id: str, body: dict = Body(...)):
        session = service.resynthesize(session_id, int(body.get("revision", -1)))
        return JSONResponse(content={
            "revision": session.revision,
            "mel_revision": session.mel_revision,
            "style": bundle_to_dict(session.style),
        }, headers=_headers(session))

    @app.get("/sessions/{session_id}/audio.wav")
    def get_audio(session_id: str):
        session = service.get(session_id)
        path = service.audio_path(session_id)
        return FileResponse(path, media_type="audio/wav",
                            headers=_headers(session))

    if ui_dir:
        from fastapi.staticfiles import StaticFiles
        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
