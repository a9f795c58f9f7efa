"""The challenge server: engine sessions behind the DCGW1 wire.

Server-authoritative clock: the session's frame index follows wall time
from the first frame fetch, so slow pollers skip frames. Sessions expire a
grace period after reaching a terminal state.
"""

from __future__ import annotations

import asyncio
import io
import json
import secrets
import struct
import threading
import time
import urllib.parse
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..assets import GameType, LayoutError
from ..engine import (DropOutsideFrame, EngineError, GameConfig, GameSession,
                      HoldCapExceeded, InvalidConfig, InvalidHandle,
                      NoObjectAtPoint, SessionNotInProgress, Status, new_game)
from ..frames import encode_codes
from ..vision import dequantize
from .protocol import (ALLOWED_RESPONSE_KEYS, BINARY_MAGIC, ORACLE_KEYS,
                       PROTOCOL, pack_message, unpack_message)

VALID_FPS = (10, 20, 40)
VALID_COUNTS = (4, 5, 6)


@dataclass
class ServiceConfig:
    host: str = "127.0.0.1"
    port: int = 0                  # 0: ephemeral
    drag_cap: int = 2
    hold_cap: int | None = None
    timeout: float = 60.0
    session_limit: int = 256
    expiry_grace: float = 30.0     # seconds after terminal state
    allow_oracle: bool = False     # experiment flag; never on in production
    allow_client_seed: bool = True
    compress_frames: bool = False
    static_dir: str | None = None  # serves the frontend when set

    @classmethod
    def from_file(cls, path: str | Path, **overrides) -> "ServiceConfig":
        data = json.loads(Path(path).read_text())
        data.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**data)


@dataclass
class _Live:
    session: GameSession
    ticket: dict
    created_at: float
    started_at: float | None = None
    terminal_at: float | None = None
    handle: object = None          # current drag handle (one per session)


class ServiceError(Exception):
    def __init__(self, code: str, detail: str = ""):
        super().__init__(detail or code)
        self.code = code


class ChallengeService:
    """Asyncio server; ``clock`` is injectable for pacing tests."""

    def __init__(self, config: ServiceConfig | None = None, clock=None):
        self.config = config or ServiceConfig()
        self.clock = clock or time.monotonic
        self.sessions: dict[str, _Live] = {}
        self._server: asyncio.AbstractServer | None = None
        self.port: int | None = None

    # -- session core -------------------------------------------------------

    def _now(self) -> float:
        return self.clock()

    def create_session(self, body: dict) -> dict:
        try:
            game_type = GameType(body["game_type"])
        except (KeyError, ValueError) as exc:
            raise ServiceError("InvalidParameterization",
                              f"unknown game_type {body.get('game_type')!r}") from exc
        fps = int(body.get("fps", 20))
        count = int(body.get("object_count", 4))
        if fps not in VALID_FPS or count not in VALID_COUNTS:
            raise ServiceError("InvalidParameterization",
                              f"fps must be in {VALID_FPS}, object_count in {VALID_COUNTS}")
        self._sweep()
        if len(self.sessions) >= self.config.session_limit:
            raise ServiceError("BadRequest", "session limit reached")
        seed = int(body["seed"]) if ("seed" in body and self.config.allow_client_seed) \
            else secrets.randbits(48)
        try:
            cfg = GameConfig(
                game_type=game_type, fps=fps, object_count=count,
                timeout=float(body.get("timeout", self.config.timeout)),
                drag_cap=int(body.get("drag_cap", self.config.drag_cap)),
                hold_cap=body.get("hold_cap", self.config.hold_cap),
                seed=seed, instance_seed=int(body.get("instance_seed", 0)))
            session = new_game(cfg)
        except (InvalidConfig, LayoutError, ValueError) as exc:
            raise ServiceError("InvalidParameterization", str(exc)) from exc
        sid = secrets.token_hex(8)
        ticket = {
            "session": sid, "created_at": round(self._now(), 3),
            "game_type": game_type.value, "fps": fps, "object_count": count,
            "width": cfg.frame_width, "height": cfg.frame_height,
            "timeout": cfg.timeout,
        }
        self.sessions[sid] = _Live(session=session, ticket=ticket,
                                   created_at=self._now())
        return ticket

    def _get(self, sid: str) -> _Live:
        live = self.sessions.get(sid)
        if live is None:
            raise ServiceError("UnknownSession", sid)
        if live.terminal_at is not None and \
                self._now() - live.terminal_at > self.config.expiry_grace:
            del self.sessions[sid]
            raise ServiceError("ExpiredSession", sid)
        return live

    def _sweep(self) -> None:
        now = self._now()
        dead = [sid for sid, live in self.sessions.items()
                if live.terminal_at is not None
                and now - live.terminal_at > self.config.expiry_grace]
        for sid in dead:
            del self.sessions[sid]

    def _advance_to_now(self, live: _Live) -> None:
        if live.started_at is None:
            live.started_at = self._now()
        fps = live.session.config.fps
        target = int((self._now() - live.started_at) * fps)
        if target > live.session.frame_index and not live.session.is_terminal():
            live.session.advance(target - live.session.frame_index)
        if live.session.is_terminal() and live.terminal_at is None:
            live.terminal_at = self._now()

    def get_frame(self, sid: str) -> tuple[dict, bytes]:
        live = self._get(sid)
        self._advance_to_now(live)
        frame = live.session.render()
        body = {"ok": True, "status": live.session.status.value,
                "frame_index": live.session.frame_index}
        return body, encode_codes(frame.codes)

    def post_click(self, sid: str, x: int, y: int) -> dict:
        live = self._get(sid)
        self._advance_to_now(live)
        s = live.session
        try:
            live.handle = s.begin_drag((x, y))
        except NoObjectAtPoint as exc:
            raise ServiceError("NoObjectAtPoint", str(exc)) from exc
        except SessionNotInProgress as exc:
            live.terminal_at = live.terminal_at or self._now()
            raise ServiceError("SessionTerminal", s.status.value) from exc
        except InvalidHandle as exc:
            raise ServiceError("InvalidSequence", str(exc)) from exc
        return {"ok": True, "grabbed": True, "status": s.status.value}

    def post_drop(self, sid: str, x: int, y: int) -> dict:
        live = self._get(sid)
        self._advance_to_now(live)
        s = live.session
        if live.handle is None:
            raise ServiceError("InvalidSequence", "drop without a click")
        try:
            fb = s.drop(live.handle, (x, y))
        except InvalidHandle as exc:
            live.handle = None
            raise ServiceError("InvalidSequence", str(exc)) from exc
        except DropOutsideFrame as exc:
            raise ServiceError("DropOutsideFrame", str(exc)) from exc
        except HoldCapExceeded as exc:
            live.handle = None
            raise ServiceError("HoldCapExceeded", str(exc)) from exc
        except SessionNotInProgress as exc:
            live.terminal_at = live.terminal_at or self._now()
            raise ServiceError("SessionTerminal", s.status.value) from exc
        live.handle = None
        if s.is_terminal() and live.terminal_at is None:
            live.terminal_at = self._now()
        return {"ok": True, "feedback": fb.outcome, "status": s.status.value}

    def oracle(self, sid: str) -> dict:
        """Ground truth for harnesses; requires the experiment flag."""
        if not self.config.allow_oracle:
            raise ServiceError("OracleDisabled",
                              "start the service with the experiment flag")
        live = self._get(sid)
        self._advance_to_now(live)
        gt = live.session.ground_truth()
        answers = []
        for oid, st_id in gt.bindings.items():
            if live.session.objects[oid].matched:
                continue
            st = gt.sub_targets[st_id]
            answers.append({"object_id": oid,
                            "centroid": list(gt.centroids[oid]),
                            "target_centroid": list(st.centroid)})
        r = gt.target_region
        return {"ok": True, "answers": answers,
                "target_region": [r.x0, r.y0, r.x1, r.y1],
                "status": live.session.status.value}

    # -- binary binding -------------------------------------------------------

    async def _handle_binary(self, reader, writer):
        rest = await reader.readexactly(2)  # after the 4 sniffed bytes
        if rest != BINARY_MAGIC[4:]:
            writer.close()
            return
        while True:
            try:
                header = await reader.readexactly(4)
            except (asyncio.IncompleteReadError, ConnectionError):
                break
            (total,) = struct.unpack(">I", header)
            if total > 32 * 1024 * 1024:
                break
            data = await reader.readexactly(total)
            body, _ = unpack_message(data)
            op = body.get("op")
            if op == "bye":
                break
            reply, attachment = self._dispatch(op, body)
            writer.write(pack_message(reply, attachment,
                                      compress=self.config.compress_frames
                                      and bool(attachment)))
            await writer.drain()
        writer.close()

    def _dispatch(self, op: str, body: dict) -> tuple[dict, bytes]:
        try:
            if op == "hello":
                reply = {"ok": True, "proto": PROTOCOL, "server": "dcglab"}
            elif op == "create":
                reply = dict(self.create_session(body), ok=True)
            elif op == "frame":
                meta, dcgf = self.get_frame(str(body.get("session")))
                return self._check_keys(meta), dcgf
            elif op == "click":
                reply = self.post_click(str(body.get("session")),
                                        int(body.get("x")), int(body.get("y")))
            elif op == "drop":
                reply = self.post_drop(str(body.get("session")),
                                       int(body.get("x")), int(body.get("y")))
            elif op == "oracle":
                return self._check_keys(self.oracle(str(body.get("session"))),
                                        oracle=True), b""
            else:
                reply = {"ok": False, "error": "BadRequest"}
            return self._check_keys(reply), b""
        except ServiceError as exc:
            return {"ok": False, "error": exc.code}, b""
        except (TypeError, ValueError, KeyError):
            return {"ok": False, "error": "BadRequest"}, b""

    @staticmethod
    def _check_keys(body: dict, oracle: bool = False) -> dict:
        allowed = ALLOWED_RESPONSE_KEYS | (ORACLE_KEYS if oracle else frozenset())
        extra = set(body) - allowed
        if extra:
            raise ServiceError("BadRequest", f"internal: illegal keys {extra}")
        return body

    # -- HTTP binding ---------------------------------------------------------

    async def _handle_http(self, first: bytes, reader, writer):
        try:
            line = first + await reader.readline()
            parts = line.decode("latin-1").split()
            if len(parts) < 2:
                return
            method, raw_path = parts[0], parts[1]
            headers = {}
            while True:
                h = await reader.readline()
                if h in (b"\r\n", b"\n", b""):
                    break
                k, _, v = h.decode("latin-1").partition(":")
                headers[k.strip().lower()] = v.strip()
            body = b""
            if "content-length" in headers:
                body = await reader.readexactly(int(headers["content-length"]))
            status, ctype, payload, extra = self._route(method, raw_path, body)
            head = (f"HTTP/1.1 {status}\r\nContent-Type: {ctype}\r\n"
                    f"Content-Length: {len(payload)}\r\n"
                    "Access-Control-Allow-Origin: *\r\n"
                    "Cache-Control: no-store\r\n")
            for k, v in extra.items():
                head += f"{k}: {v}\r\n"
            head += "Connection: close\r\n\r\n"
            writer.write(head.encode("latin-1") + payload)
            await writer.drain()
        except (asyncio.IncompleteReadError, ConnectionError, ValueError):
            pass
        finally:
            writer.close()

    def _route(self, method: str, raw_path: str, body: bytes):
        url = urllib.parse.urlsplit(raw_path)
        path = url.path
        q = dict(urllib.parse.parse_qsl(url.query))

        def jbody():
            try:
                return json.loads(body.decode() or "{}")
            except json.JSONDecodeError:
                raise ServiceError("BadRequest", "invalid json")

        def jresp(status, payload, extra=None, oracle=False):
            if payload.get("ok"):
                self._check_keys(payload, oracle=oracle)
            return (status, "application/json",
                    json.dumps(payload).encode(), extra or {})

        try:
            if method == "POST" and path == "/api/session":
                return jresp("200 OK", dict(self.create_session(jbody()), ok=True))
            if method == "GET" and path == "/api/frame":
                meta, dcgf = self.get_frame(q.get("session", ""))
                extra = {"X-Status": meta["status"],
                         "X-Frame-Index": str(meta["frame_index"])}
                if q.get("format") == "png":
                    return ("200 OK", "image/png", self._png(dcgf), extra)
                return ("200 OK", "application/octet-stream", dcgf, extra)
            if method == "POST" and path == "/api/click":
                b = jbody()
                return jresp("200 OK", self.post_click(
                    str(b.get("session")), int(b.get("x")), int(b.get("y"))))
            if method == "POST" and path == "/api/drop":
                b = jbody()
                return jresp("200 OK", self.post_drop(
                    str(b.get("session")), int(b.get("x")), int(b.get("y"))))
            if method == "GET" and path == "/api/oracle":
                return jresp("200 OK", self.oracle(q.get("session", "")),
                             oracle=True)
            if method == "GET":
                return self._static(path)
            return jresp("405 Method Not Allowed",
                         {"ok": False, "error": "BadRequest"})
        except ServiceError as exc:
            code = {"UnknownSession": "404 Not Found",
                    "ExpiredSession": "410 Gone",
                    "OracleDisabled": "403 Forbidden"}.get(exc.code,
                                                           "400 Bad Request")
            return jresp(code, {"ok": False, "error": exc.code})
        except (TypeError, ValueError):
            return jresp("400 Bad Request", {"ok": False, "error": "BadRequest"})

    @staticmethod
    def _png(dcgf: bytes) -> bytes:
        from PIL import Image
        from ..frames import decode_codes
        rgb = dequantize(decode_codes(dcgf))
        buf = io.BytesIO()
        Image.fromarray(rgb.astype(np.uint8), "RGB").save(buf, "PNG")
        return buf.getvalue()

    def _static(self, path: str):
        root = self.config.static_dir
        if not root:
            return ("404 Not Found", "text/plain", b"no static dir", {})
        rel = "index.html" if path == "/" else path.lstrip("/")
        full = (Path(root) / rel).resolve()
        if not str(full).startswith(str(Path(root).resolve())) or not full.is_file():
            return ("404 Not Found", "text/plain", b"not found", {})
        ctype = {
            ".html": "text/html", ".js": "application/javascript",
            ".mjs": "application/javascript", ".css": "text/css",
            ".map": "application/json", ".png": "image/png",
        }.get(full.suffix, "application/octet-stream")
        return ("200 OK", ctype, full.read_bytes(), {})

    # -- lifecycle ------------------------------------------------------------

    async def _handle(self, reader, writer):
        try:
            first = await reader.readexactly(4)
        except (asyncio.IncompleteReadError, ConnectionError):
            writer.close()
            return
        if first == BINARY_MAGIC[:4]:
            await self._handle_binary(reader, writer)
        else:
            await self._handle_http(first, reader, writer)

    async def start(self):
        self._server = await asyncio.start_server(
            self._handle, self.config.host, self.config.port)
        self.port = self._server.sockets[0].getsockname()[1]
        return self.port

    async def serve_forever(self):
        await self.start()
        async with self._server:
            await self._server.serve_forever()

    async def stop(self):
        if self._server is not None:
            self._server.close()
            await self._server.wait_closed()


class ServiceThread:
    """Run a ChallengeService on a daemon thread (tests, CLI embedding)."""

    def __init__(self, config: ServiceConfig | None = None, clock=None):
        self.service = ChallengeService(config, clock)
        self._loop = None
        self._thread = None

    def __enter__(self):
        started = threading.Event()

        def run():
            self._loop = asyncio.new_event_loop()
            asyncio.set_event_loop(self._loop)
            self._loop.run_until_complete(self.service.start())
            started.set()
            self._loop.run_forever()

        self._thread = threading.Thread(target=run, daemon=True)
        self._thread.start()
        if not started.wait(10):
            raise RuntimeError("service failed to start")
        return self

    def __exit__(self, *exc):
        async def shutdown():
            await self.service.stop()
            self._loop.stop()

        asyncio.run_coroutine_threadsafe(shutdown(), self._loop)
        self._thread.join(5)

    @property
    def port(self) -> int:
        return self.service.port
