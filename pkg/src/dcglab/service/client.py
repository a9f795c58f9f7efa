"""Blocking client for the DCGW1 binary binding, plus the wire driver the
solver uses. The driver speaks only the documented protocol; a capture hook
can record every byte for information-hiding audits."""

from __future__ import annotations

import socket
import struct
import time

import numpy as np

from ..frames import decode_codes
from .protocol import BINARY_MAGIC, ProtocolError, pack_message, unpack_message


class WireClient:
    def __init__(self, host: str, port: int, capture=None, timeout: float = 30.0):
        self.capture = capture  # callable(direction, json_body, attachment)
        self._sock = socket.create_connection((host, port), timeout=timeout)
        self._file = self._sock.makefile("rwb")
        self._file.write(BINARY_MAGIC)
        self._file.flush()
        hello = self.call({"op": "hello"})
        if hello[0].get("proto") != "DCGW1":
            raise ProtocolError(f"unexpected handshake: {hello[0]}")

    def call(self, body: dict, attachment: bytes = b"") -> tuple[dict, bytes]:
        if self.capture:
            self.capture("send", body, attachment)
        self._file.write(pack_message(body, attachment))
        self._file.flush()
        header = self._file.read(4)
        if len(header) < 4:
            raise ProtocolError("connection closed")
        (total,) = struct.unpack(">I", header)
        data = self._file.read(total)
        if len(data) < total:
            raise ProtocolError("truncated reply")
        reply, att = unpack_message(data)
        if self.capture:
            self.capture("recv", reply, att)
        return reply, att

    def close(self):
        try:
            self._file.write(pack_message({"op": "bye"}))
            self._file.flush()
        except OSError:
            pass
        self._sock.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    # -- convenience ops ------------------------------------------------------

    def create(self, game_type: str, fps: int = 20, object_count: int = 4,
               **extra) -> dict:
        body = {"op": "create", "game_type": game_type, "fps": fps,
                "object_count": object_count, **extra}
        reply, _ = self.call(body)
        if not reply.get("ok"):
            raise ProtocolError(f"create failed: {reply.get('error')}")
        return reply

    def frame(self, session: str) -> tuple[np.ndarray, str, int]:
        reply, att = self.call({"op": "frame", "session": session})
        if not reply.get("ok"):
            raise ProtocolError(f"frame failed: {reply.get('error')}")
        return decode_codes(att), reply["status"], reply["frame_index"]

    def click(self, session: str, x: int, y: int) -> dict:
        reply, _ = self.call({"op": "click", "session": session,
                              "x": int(x), "y": int(y),
                              "client_time": int(time.time() * 1000)})
        return reply

    def drop(self, session: str, x: int, y: int) -> dict:
        reply, _ = self.call({"op": "drop", "session": session,
                              "x": int(x), "y": int(y),
                              "client_time": int(time.time() * 1000)})
        return reply


class WireDriver:
    """ChallengeDriver over the wire: what an actual bot would run.

    ``sleep_fn`` is real time by default; probing a 20 FPS game really
    takes the 8 s learning window.
    """

    def __init__(self, client: WireClient, game_type: str, fps: int = 20,
                 object_count: int = 4, sleep_fn=time.sleep, **create_extra):
        self._client = client
        self._game_type = game_type
        self._create_extra = create_extra
        self._sleep_fn = sleep_fn
        self.fps = fps
        self.object_count = object_count
        self._slept = 0.0
        self._start_session()

    def _start_session(self):
        t = self._client.create(self._game_type, self.fps, self.object_count,
                                **self._create_extra)
        self.ticket = t
        self.session_id = t["session"]
        self.frame_width = t["width"]
        self.frame_height = t["height"]

    def get_frame(self):
        return self._client.frame(self.session_id)

    def click(self, point):
        reply = self._client.click(self.session_id, point[0], point[1])
        return bool(reply.get("ok") and reply.get("grabbed"))

    def drop(self, point):
        reply = self._client.drop(self.session_id, point[0], point[1])
        if not reply.get("ok"):
            return None
        return reply.get("feedback")

    def sleep(self, seconds):
        if seconds > 0:
            self._slept += seconds
            self._sleep_fn(seconds)

    def restart(self):
        self._start_session()

    @property
    def elapsed(self) -> float:
        _, _, idx = self.get_frame()
        return idx / self.fps
