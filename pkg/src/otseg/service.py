"""HTTP session service for the interactive marker workflow.

A session holds the expensive pipeline products (palette, superpixels,
pre-merge region graph) computed once at upload.  Every marker mutation
re-runs the marker merge from that frozen snapshot, so the resulting class
map depends only on the current marker set, never on mutation order or undo
history.  Endpoints:

    POST   /sessions                   multipart image + m, k, alpha
    GET    /sessions/{id}/labels       current label map (rle-json)
    POST   /sessions/{id}/markers      {"x": int, "y": int, "class": str}
    DELETE /sessions/{id}/markers/last undo newest marker
    DELETE /sessions/{id}              drop the session

Label maps travel as rle-json: {"width": W, "height": H,
"runs": [[label, length], ...]} in row-major order.  Region boundaries are
returned as integer pixel-corner chains.
"""

from __future__ import annotations

import os
import threading
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, File, Form, HTTPException, Request, UploadFile
from fastapi.responses import JSONResponse

from .errors import MarkerConflictError, MarkerError, OtsegError, UnsupportedFormatError
from .image import LabelMap, load_image_bytes, runs_payload
from .merge import MarkerSet, class_label_map, run_marker
from .pipeline import prepare

DEFAULT_TTL_SECONDS = 30 * 60


def boundary_polylines(lm: LabelMap) -> list:
    """Boundaries between differing 4-neighbors as integer corner chains.

    Corners use (x, y) lattice coordinates where pixel (row, col) spans
    corners (col, row) to (col+1, row+1).  Each chain is a list of [x, y]
    points; open chains start and end at junction corners, the rest are
    closed loops.
    """
    labels = lm.labels
    H, W = labels.shape
    segments = set()
    diff_h = labels[:, :-1] != labels[:, 1:]
    for row, col in zip(*diff_h.nonzero()):
        segments.add(((int(col) + 1, int(row)), (int(col) + 1, int(row) + 1)))
    diff_v = labels[:-1, :] != labels[1:, :]
    for row, col in zip(*diff_v.nonzero()):
        segments.add(((int(col), int(row) + 1), (int(col) + 1, int(row) + 1)))

    adj = {}
    for a, b in segments:
        adj.setdefault(a, set()).add(b)
        adj.setdefault(b, set()).add(a)

    chains = []

    def walk(start):
        chain = [start]
        node = start
        while adj.get(node):
            nxt = min(adj[node])
            adj[node].discard(nxt)
            adj[nxt].discard(node)
            chain.append(nxt)
            node = nxt
        return chain

    # open chains first (junction corners have degree != 2), then loops
    for start in sorted(n for n, s in adj.items() if len(s) % 2 == 1):
        while adj.get(start):
            chains.append(walk(start))
    for start in sorted(adj):
        while adj.get(start):
            chains.append(walk(start))
    return [[[x, y] for x, y in chain] for chain in chains]


@dataclass
class Session:
    session_id: str
    pipeline: object
    markers: list = field(default_factory=list)
    lock: threading.Lock = field(default_factory=threading.Lock)
    last_access: float = field(default_factory=time.monotonic)

    def touch(self):
        self.last_access = time.monotonic()


class SessionStore:
    def __init__(self, ttl_seconds: float = DEFAULT_TTL_SECONDS):
        self.ttl = ttl_seconds
        self._sessions = {}
        self._lock = threading.Lock()

    def put(self, session: Session):
        with self._lock:
            self._purge()
            self._sessions[session.session_id] = session

    def get(self, session_id: str) -> Session:
        with self._lock:
            self._purge()
            session = self._sessions.get(session_id)
        if session is None:
            raise HTTPException(status_code=404, detail="unknown session")
        session.touch()
        return session

    def drop(self, session_id: str):
        with self._lock:
            if session_id not in self._sessions:
                raise HTTPException(status_code=404, detail="unknown session")
            del self._sessions[session_id]

    def _purge(self):
        now = time.monotonic()
        dead = [
            sid
            for sid, s in self._sessions.items()
            if now - s.last_access > self.ttl
        ]
        for sid in dead:
            del self._sessions[sid]


def _current_state(session: Session) -> dict:
    """Label payload for the session's current marker set."""
    pipe = session.pipeline
    if not session.markers:
        lm = pipe.superpixels
        return {
            "kind": "superpixels",
            "labels": runs_payload(lm),
            "classes": {},
            "num_regions": int(lm.labels.max()) + 1,
            "boundaries": boundary_polylines(lm),
            "num_markers": 0,
        }
    marker_set = MarkerSet(tuple(session.markers))
    lm, region_classes = run_marker(pipe.graph, marker_set)
    class_map, mapping = class_label_map(lm, region_classes)
    return {
        "kind": "classes",
        "labels": runs_payload(class_map),
        "classes": mapping,
        "num_regions": int(lm.labels.max()) + 1,
        "boundaries": boundary_polylines(class_map),
        "num_markers": len(session.markers),
    }


def create_app(ttl_seconds: float = DEFAULT_TTL_SECONDS) -> FastAPI:
    app = FastAPI(title="otseg session service")
    store = SessionStore(ttl_seconds)
    app.state.store = store

    @app.exception_handler(OtsegError)
    async def otseg_error_handler(request: Request, exc: OtsegError):
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.get("/healthz")
    def healthz():
        return {"status": "ok", "sessions": len(store._sessions)}

    @app.post("/sessions")
    def create_session(
        image: UploadFile = File(...),
        m: int = Form(...),
        k: int = Form(15),
        alpha: float = Form(10.0),
        colorspace: str = Form("auto"),
    ):
        raw = image.file.read()
        try:
            img = load_image_bytes(raw, image.filename or "<upload>")
            pipe = prepare(img, m=m, k=k, alpha=alpha, colorspace=colorspace)
        except UnsupportedFormatError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        except (ValueError, OtsegError) as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        session = Session(session_id=uuid.uuid4().hex, pipeline=pipe)
        store.put(session)
        return {
            "session_id": session.session_id,
            "width": img.width,
            "height": img.height,
            "num_superpixels": int(pipe.superpixels.labels.max()) + 1,
            "labels": runs_payload(pipe.superpixels),
            "boundaries": boundary_polylines(pipe.superpixels),
        }

    @app.get("/sessions/{session_id}/labels")
    def get_labels(session_id: str):
        session = store.get(session_id)
        with session.lock:
            return _current_state(session)

    @app.post("/sessions/{session_id}/markers")
    async def add_marker(session_id: str, request: Request):
        session = store.get(session_id)
        try:
            body = await request.json()
            x = int(body["x"])
            y = int(body["y"])
            cls = str(body["class"])
        except Exception:
            raise HTTPException(status_code=400, detail="malformed marker")
        pipe = session.pipeline
        if not (0 <= x < pipe.image.width and 0 <= y < pipe.image.height):
            raise HTTPException(status_code=400, detail="marker out of bounds")
        with session.lock:
            superpixel = int(pipe.superpixels.labels[y, x])
            for mx, my, mcls in session.markers:
                if int(pipe.superpixels.labels[my, mx]) == superpixel and mcls != cls:
                    raise HTTPException(
                        status_code=409,
                        detail=f"superpixel {superpixel} already seeded as {mcls!r}",
                    )
            session.markers.append((x, y, cls))
            try:
                state = _current_state(session)
            except MarkerConflictError as exc:
                session.markers.pop()
                raise HTTPException(status_code=409, detail=str(exc))
            except MarkerError as exc:
                session.markers.pop()
                raise HTTPException(status_code=400, detail=str(exc))
        return state

    @app.delete("/sessions/{session_id}/markers/last")
    def undo_marker(session_id: str):
        session = store.get(session_id)
        with session.lock:
            if not session.markers:
                raise HTTPException(status_code=400, detail="no markers to undo")
            session.markers.pop()
            return _current_state(session)

    @app.delete("/sessions/{session_id}")
    def drop_session(session_id: str):
        store.drop(session_id)
        return {"deleted": session_id}

    frontend = os.environ.get("OTSEG_FRONTEND_DIR")
    if frontend and Path(frontend).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=frontend, html=True), name="ui")

    return app
