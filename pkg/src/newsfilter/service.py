"""Filterlist push service: full list, checkpoint deltas, label intake.

Snapshot publication is atomic (readers pick up an immutable Filterlist via
a single reference read, never a partial update). Label reports require an
HS256 bearer token with sub/role/exp claims; super-user reports aggregate
into a quorum and, once enough distinct reporters agree, append one line to
the retraining label file.

Endpoints (all JSON, gzip on request via Accept-Encoding):
  GET  /v1/filterlist               full current snapshot (503 before publish)
  GET  /v1/filterlist/delta?since=N composed delta since N (410 past horizon)
  POST /v1/labels                   bearer-authenticated label report
  GET  /v1/health                   checkpoint, entry count, uptime
  POST /v1/admin/publish            operator-only: publish a new snapshot
                                    (super-user bearer token required)
"""

from __future__ import annotations

import json
import threading
import time
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Optional
from urllib.parse import parse_qs, urlsplit

from . import jwt_hs256
from .errors import InvariantError, SchemaError
from .filterlist import (
    Delta,
    Filterlist,
    compose_delta,
    delta_to_json,
    empty_delta,
    filterlist_from_json,
    filterlist_to_json,
    gzip_bytes,
    make_delta,
)

SUPER_USER_ROLE = "super-user"


@dataclass(frozen=True)
class ServiceConfig:
    host: str = "127.0.0.1"
    port: int = 8300
    jwt_secret: str = ""
    quorum_threshold: int = 3
    delta_retention: int = 64
    labels_path: str = "labels.jsonl"
    filterlist_path: Optional[str] = None
    # informational: the model the current list was built from; the service
    # itself never loads it (retraining is an explicit CLI step)
    model_path: Optional[str] = None

    @classmethod
    def from_file(cls, path: str) -> "ServiceConfig":
        with open(path, "r", encoding="utf-8") as handle:
            try:
                doc = json.load(handle)
            except json.JSONDecodeError as exc:
                raise SchemaError(f"{path}: malformed config ({exc.msg})")
        known = {f: doc[f] for f in doc if f in cls.__dataclass_fields__}
        unknown = set(doc) - set(known)
        if unknown:
            raise SchemaError(f"{path}: unknown config keys {sorted(unknown)}")
        return cls(**known)


@dataclass
class LabelReport:
    domain: str
    proposed_label: str
    reporter_id: str
    role: str
    received_at: int


class ServiceState:
    """Snapshot + retained delta chain + quorum aggregation.

    Readers take the current snapshot reference without locking; all
    mutation happens under one lock and finishes with a single reference
    swap, so no request can observe a half-published checkpoint.
    """

    def __init__(self, config: ServiceConfig):
        self.config = config
        self.started_at = time.time()
        self._lock = threading.Lock()
        self._snapshot: Optional[Filterlist] = None
        self._deltas: list[Delta] = []
        self._quorum: dict[tuple[str, str], set[str]] = {}

    @property
    def snapshot(self) -> Optional[Filterlist]:
        return self._snapshot

    def publish(self, new_list: Filterlist) -> None:
        new_list.validate()
        with self._lock:
            old = self._snapshot
            if old is not None:
                self._deltas.append(make_delta(old, new_list))
                self._deltas = self._deltas[-self.config.delta_retention:]
            self._snapshot = new_list  # atomic swap; readers see old or new

    def delta_since(self, since: int) -> Optional[Delta]:
        """Composed delta from `since` to the current checkpoint, or None when
        the horizon no longer covers it (client must full-fetch)."""
        snapshot = self._snapshot
        if snapshot is None:
            return None
        if since == snapshot.checkpoint:
            return empty_delta(since)
        with self._lock:
            chain = list(self._deltas)
        start = next(
            (i for i, d in enumerate(chain) if d.from_checkpoint == since), None
        )
        if start is None:
            return None
        combined = chain[start]
        for delta in chain[start + 1:]:
            combined = compose_delta(combined, delta)
        return combined

    def report_label(self, report: LabelReport) -> dict:
        """Count one distinct super-user reporter per (domain, label); append
        to the retraining file when the quorum threshold is reached."""
        key = (report.domain, report.proposed_label)
        with self._lock:
            reporters = self._quorum.setdefault(key, set())
            duplicate = report.reporter_id in reporters
            reporters.add(report.reporter_id)
            count = len(reporters)
            confirmed = count >= self.config.quorum_threshold
            if confirmed:
                del self._quorum[key]
                line = json.dumps({
                    "domain": report.domain,
                    "label": report.proposed_label,
                    "reporters": sorted(reporters),
                    "confirmed_at": report.received_at,
                }, sort_keys=True)
                with open(self.config.labels_path, "a", encoding="utf-8") as handle:
                    handle.write(line + "\n")
        return {
            "status": "duplicate" if duplicate else "accepted",
            "count": count,
            "threshold": self.config.quorum_threshold,
            "confirmed": confirmed,
        }

    def health(self) -> dict:
        snapshot = self._snapshot
        return {
            "status": "ok",
            "checkpoint": None if snapshot is None else snapshot.checkpoint,
            "entries": 0 if snapshot is None else len(snapshot.entries),
            "uptime_seconds": round(time.time() - self.started_at, 3),
        }


class _Handler(BaseHTTPRequestHandler):
    state: ServiceState  # injected by make_server

    protocol_version = "HTTP/1.1"

    def log_message(self, fmt, *args):  # quiet by default
        pass

    def handle(self):
        try:
            super().handle()
        except (BrokenPipeError, ConnectionResetError):
            pass  # client went away mid-response

    def _send(self, status: int, payload: dict | str, gzip_ok: bool = False) -> None:
        body = payload if isinstance(payload, str) else json.dumps(payload)
        raw = body.encode("utf-8")
        encoding = None
        if gzip_ok and "gzip" in self.headers.get("Accept-Encoding", ""):
            raw = gzip_bytes(raw)
            encoding = "gzip"
        self.send_response(status)
        self.send_header("Content-Type", "application/json; charset=utf-8")
        self.send_header("Content-Length", str(len(raw)))
        self.send_header("Access-Control-Allow-Origin", "*")
        if encoding:
            self.send_header("Content-Encoding", encoding)
        self.end_headers()
        self.wfile.write(raw)

    def do_OPTIONS(self):
        self.send_response(204)
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
        self.send_header("Access-Control-Allow-Headers", "Authorization, Content-Type")
        self.send_header("Content-Length", "0")
        self.end_headers()

    def do_GET(self):
        url = urlsplit(self.path)
        if url.path == "/v1/filterlist":
            snapshot = self.state.snapshot
            if snapshot is None:
                self._send(503, {"error": "no filterlist published yet"})
            else:
                self._send(200, filterlist_to_json(snapshot), gzip_ok=True)
        elif url.path == "/v1/filterlist/delta":
            self._handle_delta(url.query)
        elif url.path == "/v1/health":
            self._send(200, self.state.health())
        else:
            self._send(404, {"error": f"unknown path {url.path}"})

    def _handle_delta(self, query: str) -> None:
        params = parse_qs(query)
        raw = params.get("since", [None])[0]
        if raw is None or not raw.isdigit():
            self._send(400, {"error": "since must be a non-negative integer"})
            return
        snapshot = self.state.snapshot
        if snapshot is None:
            self._send(503, {"error": "no filterlist published yet"})
            return
        delta = self.state.delta_since(int(raw))
        if delta is None:
            self._send(410, {"error": "checkpoint outside retained horizon",
                             "action": "full-fetch"})
        else:
            self._send(200, delta_to_json(delta), gzip_ok=True)

    def _authorize_super_user(self):
        auth = self.headers.get("Authorization", "")
        if not auth.startswith("Bearer "):
            self._send(401, {"error": "missing bearer token"})
            return None
        try:
            claims = jwt_hs256.decode(auth[len("Bearer "):], self.state.config.jwt_secret)
        except jwt_hs256.TokenError as exc:
            self._send(401, {"error": f"invalid token: {exc}"})
            return None
        if claims.get("role") != SUPER_USER_ROLE:
            self._send(403, {"error": "this endpoint requires the super-user role"})
            return None
        return claims

    def do_POST(self):
        path = urlsplit(self.path).path
        if path == "/v1/admin/publish":
            self._handle_publish()
            return
        if path != "/v1/labels":
            self._send(404, {"error": "unknown path"})
            return

        claims = self._authorize_super_user()
        if claims is None:
            return

        length = int(self.headers.get("Content-Length", "0") or 0)
        try:
            body = json.loads(self.rfile.read(length) or b"{}")
            domain = str(body["domain"]).lower()
            label = str(body["proposed_label"])
        except (json.JSONDecodeError, KeyError, TypeError, UnicodeDecodeError):
            self._send(400, {"error": "body must carry domain and proposed_label"})
            return
        if label not in ("fake", "real") or not domain:
            self._send(400, {"error": "proposed_label must be fake or real"})
            return

        result = self.state.report_label(LabelReport(
            domain=domain,
            proposed_label=label,
            reporter_id=str(claims["sub"]),
            role=str(claims["role"]),
            received_at=int(time.time()),
        ))
        self._send(200, result)

    def _handle_publish(self):
        if self._authorize_super_user() is None:
            return
        length = int(self.headers.get("Content-Length", "0") or 0)
        try:
            new_list = filterlist_from_json(self.rfile.read(length).decode("utf-8"))
        except (SchemaError, UnicodeDecodeError) as exc:
            self._send(400, {"error": f"bad filterlist document: {exc}"})
            return
        snapshot = self.state.snapshot
        if snapshot is not None and new_list.checkpoint <= snapshot.checkpoint:
            self._send(409, {"error": "checkpoint must increase",
                             "current": snapshot.checkpoint})
            return
        try:
            self.state.publish(new_list)
        except InvariantError as exc:
            self._send(400, {"error": str(exc)})
            return
        self._send(200, {"published": new_list.checkpoint,
                         "entries": len(new_list.entries)})


def make_server(config: ServiceConfig, state: Optional[ServiceState] = None):
    """ThreadingHTTPServer bound to config.host:config.port (0 = ephemeral)."""
    state = state or ServiceState(config)
    handler = type("BoundHandler", (_Handler,), {"state": state})
    server = ThreadingHTTPServer((config.host, config.port), handler)
    return server, state


def run(config: ServiceConfig) -> None:
    server, state = make_server(config)
    if config.filterlist_path:
        with open(config.filterlist_path, "r", encoding="utf-8") as handle:
            state.publish(filterlist_from_json(handle.read()))
    host, port = server.server_address[:2]
    print(json.dumps({"serving": f"http://{host}:{port}", "health": "/v1/health"}),
          flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
