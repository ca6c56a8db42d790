"""HTTP service binding the chatbot engine to a JSON API.

Handlers work over an immutable application snapshot (knowledge base,
gazetteer, corpus, stopwords, replies) plus a session table. Swapping in a
new snapshot is a single reference assignment, so chat requests never see a
half-updated knowledge base.
"""

from __future__ import annotations

import json
import logging
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

from fastapi import Body, FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware

from . import dialogue
from .classify import Gazetteer, load_gazetteer
from .dialogue import DialogueSession, MapRef, StatusCard, SymptomList
from .kb import COUNTRY, KnowledgeBase, StatusView, load_kb
from .rake import StopwordList
from .resources import fixture_path
from .smalltalk import Corpus, load_corpus

logger = logging.getLogger("covassist.gateway")

SESSION_TTL_SECONDS = 30 * 60


class ConfigError(Exception):
    pass


@dataclass(frozen=True)
class AppConfig:
    kb_path: Path
    gazetteer_path: Path
    corpus_path: Path
    store_path: Path
    stopwords_path: Path
    replies_path: Path
    listen_address: str = "127.0.0.1:8000"
    live_fetch_enabled: bool = False
    live_fetch_url: str = ""
    snapshot_dir: Path = Path("snapshots")

    @classmethod
    def default(cls) -> "AppConfig":
        """Config over the shipped fixtures; the store lives in the cwd."""
        return cls(
            kb_path=fixture_path("cvio.json"),
            gazetteer_path=fixture_path("gazetteer.json"),
            corpus_path=fixture_path("corpus.json"),
            store_path=Path("covassist-store.csv"),
            stopwords_path=fixture_path("stopwords.txt"),
            replies_path=fixture_path("replies.toml"),
        )

    @classmethod
    def from_file(cls, path: str | Path) -> "AppConfig":
        path = Path(path)
        try:
            doc = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"{path}: {exc}") from exc
        if not isinstance(doc, dict):
            raise ConfigError(f"{path}: config must be a JSON object")
        base = path.parent

        def resolve(key: str, fallback: Path) -> Path:
            raw = doc.get(key)
            return (base / raw).resolve() if isinstance(raw, str) else fallback

        defaults = cls.default()
        config = cls(
            kb_path=resolve("kb_path", defaults.kb_path),
            gazetteer_path=resolve("gazetteer_path", defaults.gazetteer_path),
            corpus_path=resolve("corpus_path", defaults.corpus_path),
            store_path=resolve("store_path", defaults.store_path),
            stopwords_path=resolve("stopwords_path", defaults.stopwords_path),
            replies_path=resolve("replies_path", defaults.replies_path),
            listen_address=str(doc.get("listen_address", defaults.listen_address)),
            live_fetch_enabled=bool(doc.get("live_fetch_enabled", False)),
            live_fetch_url=str(doc.get("live_fetch_url", "")),
            snapshot_dir=resolve("snapshot_dir", defaults.snapshot_dir),
        )
        config.validate()
        return config

    def validate(self) -> None:
        for name in ("kb_path", "gazetteer_path", "corpus_path", "stopwords_path", "replies_path"):
            value: Path = getattr(self, name)
            if not value.exists():
                raise ConfigError(f"{name} does not exist: {value}")
        if self.live_fetch_enabled and not self.live_fetch_url:
            raise ConfigError("live_fetch_url is required when live_fetch_enabled is true")

    def host_port(self) -> tuple[str, int]:
        host, _, port = self.listen_address.rpartition(":")
        if not host or not port.isdigit():
            raise ConfigError(f"listen_address must be host:port, got {self.listen_address!r}")
        return host, int(port)


@dataclass(frozen=True)
class AppSnapshot:
    """All read-only data a request handler needs."""

    kb: KnowledgeBase
    gazetteer: Gazetteer
    corpus: Corpus
    stopwords: StopwordList
    replies: dict[str, str]


def load_snapshot(config: AppConfig) -> AppSnapshot:
    return AppSnapshot(
        kb=load_kb(config.kb_path),
        gazetteer=load_gazetteer(config.gazetteer_path),
        corpus=load_corpus(config.corpus_path),
        stopwords=StopwordList.from_file(config.stopwords_path),
        replies=dialogue.load_replies(config.replies_path),
    )


@dataclass
class MapPoint:
    country: str
    lat: float
    lon: float
    cases: int
    deaths: int
    recovered: int


def map_points(kb: KnowledgeBase, gaz: Gazetteer) -> list[MapPoint]:
    """One point per country that has both a status and a centroid."""
    points: list[MapPoint] = []
    for individual in kb.individuals_of(COUNTRY):
        view = kb.status_of(individual.label())
        if view is None:
            continue
        centroid = gaz.centroids.get(individual.label())
        if centroid is None:
            logger.warning("no centroid for %s; omitted from map", individual.label())
            continue
        points.append(
            MapPoint(
                country=view.region_name,
                lat=centroid[0],
                lon=centroid[1],
                cases=view.cases,
                deaths=view.deaths,
                recovered=view.recovered,
            )
        )
    points.sort(key=lambda p: p.country)
    return points


class _SessionEntry:
    __slots__ = ("session", "lock", "last_seen")

    def __init__(self, session: DialogueSession, now: float):
        self.session = session
        self.lock = threading.Lock()
        self.last_seen = now


class SessionTable:
    """Thread-safe session registry with idle expiry."""

    def __init__(self, ttl: float = SESSION_TTL_SECONDS, clock: Callable[[], float] = time.monotonic):
        self._ttl = ttl
        self._clock = clock
        self._lock = threading.Lock()
        self._entries: dict[str, _SessionEntry] = {}

    def add(self, session: DialogueSession) -> None:
        with self._lock:
            self._entries[session.id] = _SessionEntry(session, self._clock())

    def get(self, session_id: str) -> _SessionEntry | None:
        now = self._clock()
        with self._lock:
            expired = [sid for sid, e in self._entries.items() if now - e.last_seen > self._ttl]
            for sid in expired:
                del self._entries[sid]
            entry = self._entries.get(session_id)
            if entry is not None:
                entry.last_seen = now
            return entry


def _status_json(view: StatusView) -> dict:
    return {
        "region": view.region_name,
        "cases": view.cases,
        "deaths": view.deaths,
        "recovered": view.recovered,
        "retrieved": view.retrieved.isoformat(),
        "trend": view.trend.value,
        "source": view.source,
        "publisher": view.publisher,
    }


def _attachment_json(attachment) -> dict | None:
    if attachment is None:
        return None
    if isinstance(attachment, StatusCard):
        return {"type": "status_card", **_status_json(attachment.view)}
    if isinstance(attachment, SymptomList):
        return {
            "type": "symptom_list",
            "items": [
                {"name": s.name, "synonyms": list(s.synonyms), "prevalence_percent": s.prevalence_percent}
                for s in attachment.items
            ],
        }
    if isinstance(attachment, MapRef):
        return {"type": "map", "region": attachment.region}
    raise TypeError(f"unknown attachment: {attachment!r}")


def create_app(
    config: AppConfig | None = None,
    *,
    snapshot: AppSnapshot | None = None,
    session_ttl: float = SESSION_TTL_SECONDS,
    clock: Callable[[], float] = time.monotonic,
) -> FastAPI:
    config = config or AppConfig.default()
    app = FastAPI(title="covassist", docs_url=None, redoc_url=None)
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    app.state.snapshot = snapshot or load_snapshot(config)
    app.state.config = config
    sessions = SessionTable(ttl=session_ttl, clock=clock)
    app.state.sessions = sessions

    def snap() -> AppSnapshot:
        return app.state.snapshot

    @app.post("/api/session", status_code=201)
    def create_session() -> dict:
        session, greeting = dialogue.new_session(snap().replies)
        sessions.add(session)
        return {"session_id": session.id, "greeting": greeting.text}

    @app.post("/api/session/{session_id}/message")
    def post_message(session_id: str, payload: dict = Body(...)) -> dict:
        text = payload.get("text") if isinstance(payload, dict) else None
        if not isinstance(text, str) or not text.strip():
            raise HTTPException(status_code=400, detail="body must carry non-empty 'text'")
        entry = sessions.get(session_id)
        if entry is None:
            raise HTTPException(status_code=404, detail="unknown session")
        data = snap()
        with entry.lock:
            entry.session, reply = dialogue.step(
                entry.session,
                text,
                data.kb,
                data.gazetteer,
                data.corpus,
                stops=data.stopwords,
                replies=data.replies,
            )
            state = entry.session.rest_state.value
        return {
            "reply": reply.text,
            "attachment": _attachment_json(reply.attachment),
            "quick_replies": list(reply.quick_replies),
            "state": state,
        }

    @app.get("/api/status")
    def get_status(region: str = "") -> dict:
        view = snap().kb.status_of(region)
        if view is None:
            raise HTTPException(status_code=404, detail=f"no status for region {region!r}")
        return _status_json(view)

    @app.get("/api/symptoms")
    def get_symptoms() -> list[dict]:
        return [
            {"name": s.name, "synonyms": list(s.synonyms), "prevalence_percent": s.prevalence_percent}
            for s in snap().kb.symptoms()
        ]

    @app.get("/api/map")
    def get_map() -> list[dict]:
        data = snap()
        return [
            {
                "country": p.country,
                "lat": p.lat,
                "lon": p.lon,
                "cases": p.cases,
                "deaths": p.deaths,
                "recovered": p.recovered,
            }
            for p in map_points(data.kb, data.gazetteer)
        ]

    return app


def swap_snapshot(app: FastAPI, snapshot: AppSnapshot) -> None:
    """Atomically replace the app data; in-flight requests keep the old one."""
    app.state.snapshot = snapshot
