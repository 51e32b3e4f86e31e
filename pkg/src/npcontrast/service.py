"""Session-oriented HTTP API for interactive labeling.

A session holds one uploaded image and a mutable label mask. Clients stream
stroke batches and poll for metrics and segmentation previews; every
response that depends on the mask echoes the revision it was computed from.
Edits are serialized per session (single writer), reads work on a snapshot.
"""

from __future__ import annotations

import io
import secrets
import socket
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from fastapi import FastAPI, File, Form, HTTPException, Response, UploadFile
from pydantic import BaseModel, Field

from . import imageio, metrics, report
from .domain import TIE_BREAKS, UNSEEN_POLICIES, ClassSamples
from .errors import InputError, NpcontrastError
from .imageio import ImagePlane, LabelMask, QuantizationConfig
from .metrics import build_distribution

DEFAULT_SESSION_TTL = 3600.0
DEFAULT_MAX_UPLOAD = 32 * 1024 * 1024
MAX_PALETTE_CLASSES = 12

_PATHS = {"definitional", "histogram_l1", "max_form", "min_form", "all"}


@dataclass(frozen=True)
class SessionSettings:
    quant_bins: int = 256
    domain_range: tuple[float, float] | None = None
    channel: int | str | None = None
    tie_break: str = "lowest"
    unseen: str = "unassigned"
    path: str = "histogram_l1"
    max_classes: int = MAX_PALETTE_CLASSES

    def as_dict(self) -> dict:
        return {
            "quant_bins": self.quant_bins,
            "domain_range": list(self.domain_range) if self.domain_range else None,
            "channel": self.channel,
            "tie_break": self.tie_break,
            "unseen": self.unseen,
            "path": self.path,
            "max_classes": self.max_classes,
        }


class Stroke(BaseModel):
    x: int
    y: int
    class_id: int = Field(ge=0)


class StrokeBatch(BaseModel):
    strokes: list[Stroke] = Field(min_length=1)


@dataclass
class Session:
    id: str
    image: ImagePlane
    settings: SessionSettings
    labels: np.ndarray
    revision: int = 0
    lock: threading.Lock = field(default_factory=threading.Lock)
    last_access: float = field(default_factory=time.monotonic)

    def touch(self) -> None:
        self.last_access = time.monotonic()

    def apply_strokes(self, strokes: list[Stroke]) -> int:
        """Apply one batch atomically; bad coordinates reject the whole
        batch and leave the mask untouched."""
        h, w = self.labels.shape
        for s in strokes:
            if not (0 <= s.x < w and 0 <= s.y < h):
                raise HTTPException(422, f"stroke at ({s.x}, {s.y}) is out of bounds")
            if s.class_id > self.settings.max_classes:
                raise HTTPException(422, f"class {s.class_id} exceeds the palette")
        with self.lock:
            for s in strokes:
                self.labels[s.y, s.x] = s.class_id
            self.revision += 1
            return self.revision

    def snapshot(self) -> tuple[np.ndarray, int]:
        with self.lock:
            return self.labels.copy(), self.revision


class SessionStore:
    def __init__(self, ttl: float, persist_dir: str | Path | None = None):
        self.ttl = ttl
        self.persist_dir = Path(persist_dir) if persist_dir else None
        self._sessions: dict[str, Session] = {}
        self._lock = threading.Lock()

    def create(self, image: ImagePlane, settings: SessionSettings) -> Session:
        session = Session(
            id=secrets.token_hex(16),
            image=image,
            settings=settings,
            labels=np.zeros((image.height, image.width), dtype=np.int64),
        )
        with self._lock:
            self._purge_expired()
            self._sessions[session.id] = session
        return session

    def get(self, session_id: str) -> Session:
        with self._lock:
            self._purge_expired()
            session = self._sessions.get(session_id)
        if session is None:
            raise HTTPException(404, "unknown session")
        session.touch()
        return session

    def delete(self, session_id: str) -> None:
        with self._lock:
            if session_id not in self._sessions:
                raise HTTPException(404, "unknown session")
            del self._sessions[session_id]

    def _purge_expired(self) -> None:
        now = time.monotonic()
        dead = [sid for sid, s in self._sessions.items() if now - s.last_access > self.ttl]
        for sid in dead:
            del self._sessions[sid]

    def snapshot_to_disk(self, session: Session) -> None:
        if self.persist_dir is None:
            return
        target = self.persist_dir / session.id
        target.mkdir(parents=True, exist_ok=True)
        (target / "settings.json").write_text(report.canonical_json(session.settings.as_dict()))
        (target / "image.png").write_bytes(imageio.image_png_bytes(session.image))
        labels, revision = session.snapshot()
        mask = LabelMask(labels=labels, n_classes=session.settings.max_classes)
        (target / "mask.png").write_bytes(imageio.mask_png_bytes(mask))
        (target / "revision").write_text(str(revision))


def _parse_settings(
    quant_bins: int,
    domain_range: str | None,
    channel: str | None,
    tie_break: str,
    unseen: str,
    path: str,
    max_classes: int,
) -> SessionSettings:
    parsed_range = None
    if domain_range:
        try:
            lo_s, hi_s = domain_range.split(":")
            parsed_range = (float(lo_s), float(hi_s))
        except ValueError:
            raise HTTPException(400, "domain_range must look like MIN:MAX")
        if not parsed_range[0] < parsed_range[1]:
            raise HTTPException(400, "domain_range MIN must be below MAX")
    parsed_channel: int | str | None = None
    if channel:
        parsed_channel = channel if channel == "luma" else int(channel)
    if tie_break not in TIE_BREAKS:
        raise HTTPException(400, f"tie_break must be one of {TIE_BREAKS}")
    if unseen not in UNSEEN_POLICIES:
        raise HTTPException(400, f"unseen must be one of {UNSEEN_POLICIES}")
    if path not in _PATHS:
        raise HTTPException(400, f"path must be one of {sorted(_PATHS)}")
    if not 2 <= max_classes <= 255:
        raise HTTPException(400, "max_classes must be in 2..255")
    return SessionSettings(
        quant_bins=quant_bins,
        domain_range=parsed_range,
        channel=parsed_channel,
        tie_break=tie_break,
        unseen=unseen,
        path=path,
        max_classes=max_classes,
    )


def _labeled_distributions(session: Session, labels: np.ndarray):
    """Distributions for every class with at least one labeled pixel,
    together with the participating class ids in ascending order."""
    present = [int(c) for c in np.unique(labels) if c > 0]
    dists = []
    for cid in present:
        values = np.asarray(session.image.pixels[labels == cid], dtype=np.float64)
        dists.append(build_distribution(ClassSamples(cid, values), session.image.domain))
    return present, dists


def _require_two_classes(present: list[int]) -> None:
    if len(present) < 2:
        raise HTTPException(
            409, f"insufficient labels: {len(present)} labeled class(es), need at least 2"
        )


def _json_response(payload: dict, status_code: int = 200, revision: int | None = None) -> Response:
    headers = {"X-Revision": str(revision)} if revision is not None else None
    return Response(
        content=report.canonical_json(payload),
        media_type="application/json",
        status_code=status_code,
        headers=headers,
    )


def default_ui_dir() -> Path | None:
    candidate = Path.cwd() / "frontend" / "dist"
    return candidate if (candidate / "index.html").exists() else None


def create_app(
    ui_dir: str | Path | None = None,
    session_ttl: float = DEFAULT_SESSION_TTL,
    persist_dir: str | Path | None = None,
    max_upload_bytes: int = DEFAULT_MAX_UPLOAD,
) -> FastAPI:
    app = FastAPI(title="npcontrast labeling service", version="1")
    store = SessionStore(ttl=session_ttl, persist_dir=persist_dir)
    app.state.store = store

    @app.get("/healthz")
    def healthz():
        return {"status": "ok"}

    @app.post("/sessions", status_code=201)
    async def create_session(
        image: UploadFile = File(...),
        quant_bins: int = Form(256),
        domain_range: str | None = Form(None),
        channel: str | None = Form(None),
        tie_break: str = Form("lowest"),
        unseen: str = Form("unassigned"),
        path: str = Form("histogram_l1"),
        max_classes: int = Form(MAX_PALETTE_CLASSES),
    ):
        settings = _parse_settings(quant_bins, domain_range, channel, tie_break, unseen, path, max_classes)
        data = await image.read()
        if len(data) > max_upload_bytes:
            raise HTTPException(413, f"upload exceeds {max_upload_bytes} bytes")
        quant = (
            QuantizationConfig(settings.quant_bins, *settings.domain_range)
            if settings.domain_range
            else QuantizationConfig(settings.quant_bins)
        )
        try:
            plane = imageio.load_image(
                io.BytesIO(data),
                quant=quant,
                channel=settings.channel,
                nominal_range=settings.domain_range,
            )
        except (InputError, NpcontrastError, ValueError) as exc:
            raise HTTPException(400, f"cannot decode image: {exc}")
        session = store.create(plane, settings)
        store.snapshot_to_disk(session)
        return {
            "id": session.id,
            "revision": 0,
            "width": plane.width,
            "height": plane.height,
            "depth": plane.depth,
            "n_levels": plane.domain.size,
            "settings": settings.as_dict(),
        }

    @app.post("/sessions/{session_id}/labels")
    def post_labels(session_id: str, batch: StrokeBatch):
        session = store.get(session_id)
        revision = session.apply_strokes(batch.strokes)
        store.snapshot_to_disk(session)
        return {"revision": revision}

    @app.get("/sessions/{session_id}/metrics")
    def get_metrics(session_id: str):
        session = store.get(session_id)
        labels, revision = session.snapshot()
        present, dists = _labeled_distributions(session, labels)
        _require_two_classes(present)
        contrast = metrics.compute_contrast_report(
            dists,
            path=session.settings.path,
            tie_break=session.settings.tie_break,
            unseen_policy=session.settings.unseen,
        )
        results = report.results_dict(contrast, session.image.domain, class_ids=present)
        return _json_response(
            {"revision": revision, "class_ids": present, "results": results},
            revision=revision,
        )

    @app.get("/sessions/{session_id}/segmentation")
    def get_segmentation(session_id: str, format: str = "ids"):
        if format not in ("ids", "color"):
            raise HTTPException(422, "format must be 'ids' or 'color'")
        session = store.get(session_id)
        labels, revision = session.snapshot()
        present, dists = _labeled_distributions(session, labels)
        _require_two_classes(present)
        lut = metrics.optimal_segmentation_lut(
            dists,
            tie_break=session.settings.tie_break,
            unseen_policy=session.settings.unseen,
        )
        segmented = imageio.segment_image(session.image, lut)
        # The LUT speaks in positions 1..n; translate back to the painted ids.
        id_table = np.array([0] + present, dtype=np.int64)
        remapped = LabelMask(labels=id_table[segmented.labels], n_classes=max(present))
        if format == "ids":
            body = imageio.mask_png_bytes(remapped)
        else:
            body = imageio.colorized_png_bytes(remapped)
        return Response(content=body, media_type="image/png", headers={"X-Revision": str(revision)})

    @app.get("/sessions/{session_id}/image")
    def get_image(session_id: str):
        session = store.get(session_id)
        return Response(content=imageio.image_png_bytes(session.image), media_type="image/png")

    @app.get("/sessions/{session_id}/mask")
    def get_mask(session_id: str):
        session = store.get(session_id)
        labels, revision = session.snapshot()
        mask = LabelMask(labels=labels, n_classes=session.settings.max_classes)
        return Response(
            content=imageio.mask_png_bytes(mask),
            media_type="image/png",
            headers={"X-Revision": str(revision)},
        )

    @app.delete("/sessions/{session_id}", status_code=204)
    def delete_session(session_id: str):
        store.delete(session_id)
        return Response(status_code=204)

    if ui_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app


def run_server(app: FastAPI, host: str = "127.0.0.1", port: int = 0) -> None:
    """Serve the app, printing the bound address before accepting traffic.

    Binding the socket up front makes --port 0 print the OS-assigned port
    and turns port collisions into an immediate OSError.
    """
    import uvicorn

    sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
    sock.bind((host, port))
    actual_port = sock.getsockname()[1]
    print(f"serving on http://{host}:{actual_port}", flush=True)
    config = uvicorn.Config(app, log_level="warning")
    server = uvicorn.Server(config)
    server.run(sockets=[sock])


def session_count(app: FastAPI) -> int:
    return len(app.state.store._sessions)
