"""Rating-session backend: playlists, score collection, progress.

Scores land in an append-only JSONL journal under the dataset directory;
restarting the service replays the journal, so the rating table survives
crashes byte-for-byte.  Playlists are plain text files, one run name per
line, named ``session{S}_part{P}.txt`` under ``<dataset>/playlists``; a
``#training`` directive line marks every item of that part as training
(journaled but excluded from the export).
"""

from __future__ import annotations

import csv
import io
import json
import re
import threading
import time
from dataclasses import dataclass
from pathlib import Path

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from rtplab.orchestrator import RECEIVED_MANIFEST_FILE

PLAYLIST_DIR = "playlists"
JOURNAL_FILE = "ratings.jsonl"
_PLAYLIST_RE = re.compile(r"session(\d+)_part(\d+)\.txt$")

EXPORT_COLUMNS = ("rater_id", "run_id", "session", "part", "position", "score", "rated_at")


@dataclass(frozen=True)
class Playlist:
    session: int
    part: int
    items: tuple[str, ...]
    training: bool


def load_playlists(dataset_dir: Path) -> dict[tuple[int, int], Playlist]:
    root = dataset_dir / PLAYLIST_DIR
    playlists: dict[tuple[int, int], Playlist] = {}
    if not root.is_dir():
        return playlists
    for path in sorted(root.iterdir()):
        m = _PLAYLIST_RE.match(path.name)
        if not m:
            continue
        session, part = int(m.group(1)), int(m.group(2))
        items: list[str] = []
        training = False
        for line in path.read_text(encoding="utf-8").splitlines():
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                if line.lstrip("#").strip() == "training":
                    training = True
                continue
            items.append(line)
        playlists[(session, part)] = Playlist(session, part, tuple(items), training)
    return playlists


class RatingIn(BaseModel):
    rater_id: str = Field(min_length=1)
    run_id: str = Field(min_length=1)
    session: int
    part: int
    position: int = Field(ge=0)
    score: int = Field(ge=1, le=5)


class RatingStore:
    """In-memory index over the append-only journal; single-writer appends."""

    def __init__(self, dataset_dir: Path):
        self.dataset_dir = Path(dataset_dir)
        self.journal_path = self.dataset_dir / JOURNAL_FILE
        self.playlists = load_playlists(self.dataset_dir)
        self._lock = threading.Lock()
        self._records: dict[tuple[str, str], dict] = {}
        self._served_at: dict[tuple[str, str], float] = {}
        self._replay()

    def _replay(self) -> None:
        if not self.journal_path.exists():
            return
        for line in self.journal_path.read_text(encoding="utf-8").splitlines():
            if not line.strip():
                continue
            record = json.loads(line)
            key = (record["rater_id"], record["run_id"])
            self._records.setdefault(key, record)

    def playlist(self, session: int, part: int) -> Playlist:
        playlist = self.playlists.get((session, part))
        if playlist is None:
            raise KeyError((session, part))
        return playlist

    def mark_served(self, rater_id: str, run_ids) -> None:
        now = time.time()
        for run_id in run_ids:
            self._served_at.setdefault((rater_id, run_id), now)

    def add(self, rating: RatingIn) -> dict:
        playlist = self.playlists.get((rating.session, rating.part))
        if playlist is None:
            raise KeyError((rating.session, rating.part))
        if rating.run_id not in playlist.items:
            raise ValueError(f"run {rating.run_id!r} is not in session {rating.session} part {rating.part}")
        key = (rating.rater_id, rating.run_id)
        with self._lock:
            if key in self._records:
                raise FileExistsError(rating.run_id)
            rated_at = time.time()
            served = self._served_at.get(key)
            record = dict(
                rating.model_dump(),
                rated_at=rated_at,
                training=playlist.training,
                # evidence for the client-side 10 s viewing gate
                seconds_since_served=None if served is None else round(rated_at - served, 3),
            )
            with open(self.journal_path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps(record, sort_keys=True) + "\n")
                fh.flush()
            self._records[key] = record
        return record

    def rated_run_ids(self, rater_id: str) -> set[str]:
        return {run for (rater, run) in self._records if rater == rater_id}

    def progress(self, rater_id: str) -> list[dict]:
        rated = self.rated_run_ids(rater_id)
        out = []
        for (session, part), playlist in sorted(self.playlists.items()):
            done = sum(1 for item in playlist.items if item in rated)
            next_position = next(
                (i for i, item in enumerate(playlist.items) if item not in rated), None
            )
            out.append(
                {
                    "session": session,
                    "part": part,
                    "training": playlist.training,
                    "rated": done,
                    "total": len(playlist.items),
                    "next_position": next_position,
                }
            )
        return out

    def export_csv(self) -> str:
        """Non-training ratings, journal order."""
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(EXPORT_COLUMNS)
        for record in self._records.values():
            if record.get("training"):
                continue
            writer.writerow([record[c] if c != "rated_at" else f"{record[c]:.3f}" for c in EXPORT_COLUMNS])
        return buf.getvalue()

    def records(self) -> list[dict]:
        return list(self._records.values())


def load_received_manifest(dataset_dir: Path, run_id: str) -> list[dict]:
    path = dataset_dir / run_id / RECEIVED_MANIFEST_FILE
    if not path.exists():
        raise FileNotFoundError(run_id)
    with open(path, encoding="utf-8", newline="") as fh:
        rows = []
        for row in csv.DictReader(fh):
            rows.append(
                {
                    "kind": row["kind"],
                    "index": int(row["index"]),
                    "rtp_timestamp": int(row["rtp_timestamp"]),
                    "size": int(row["size"]),
                    "fragments_expected": int(row["fragments_expected"]),
                    "fragments_received": int(row["fragments_received"]),
                    "complete": row["complete"] == "true",
                    "digest_ok": row["digest_ok"] == "true",
                }
            )
        return rows


def create_app(dataset_dir, ui_dir=None) -> FastAPI:
    """API app; with ui_dir, the built rating player is served at /ui."""
    dataset_dir = Path(dataset_dir)
    store = RatingStore(dataset_dir)
    app = FastAPI(title="rtplab rating sessions")
    app.state.store = store
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    if ui_dir is not None:
        app.mount("/ui", StaticFiles(directory=Path(ui_dir), html=True), name="ui")

    @app.get("/sessions")
    def sessions_index():
        return {
            "sessions": [
                {
                    "session": playlist.session,
                    "part": playlist.part,
                    "training": playlist.training,
                    "total": len(playlist.items),
                }
                for playlist in store.playlists.values()
            ]
        }

    @app.get("/sessions/{session}/parts/{part}/playlist")
    def get_playlist(session: int, part: int, rater_id: str | None = None):
        try:
            playlist = store.playlist(session, part)
        except KeyError:
            raise HTTPException(status_code=404, detail=f"no playlist for session {session} part {part}")
        if rater_id:
            store.mark_served(rater_id, playlist.items)
        items = [
            {
                "run_id": run_id,
                "position": i,
                "training": playlist.training,
                "manifest_url": f"/runs/{run_id}/manifest",
            }
            for i, run_id in enumerate(playlist.items)
        ]
        return {
            "session": session,
            "part": part,
            "training": playlist.training,
            "items": items,
        }

    @app.get("/runs/{run_id}/manifest")
    def get_manifest(run_id: str):
        try:
            frames = load_received_manifest(dataset_dir, run_id)
        except FileNotFoundError:
            raise HTTPException(status_code=404, detail=f"no manifest for run {run_id!r}")
        return {"run_id": run_id, "frames": frames}

    @app.post("/ratings", status_code=201)
    def post_rating(rating: RatingIn):
        try:
            record = store.add(rating)
        except KeyError:
            raise HTTPException(
                status_code=404, detail=f"no playlist for session {rating.session} part {rating.part}"
            )
        except ValueError as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        except FileExistsError:
            raise HTTPException(
                status_code=409, detail=f"{rating.rater_id!r} already rated {rating.run_id!r}"
            )
        return {"ok": True, "rated_at": record["rated_at"]}

    @app.get("/progress/{rater_id}")
    def get_progress(rater_id: str):
        parts = store.progress(rater_id)
        return {
            "rater_id": rater_id,
            "parts": parts,
            "total_rated": sum(p["rated"] for p in parts),
            "total": sum(p["total"] for p in parts),
        }

    @app.get("/ratings/export")
    def export_ratings():
        from fastapi.responses import PlainTextResponse

        return PlainTextResponse(store.export_csv(), media_type="text/csv")

    return app
