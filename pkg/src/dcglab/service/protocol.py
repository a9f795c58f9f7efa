"""DCGW1 wire protocol.

One TCP port serves two bindings, told apart by the first bytes of the
connection:

* binary: the client opens with the 6 bytes ``DCGW1\\n``; both directions
  then exchange length-prefixed messages::

      u32 total_length
      u32 json_length
      json_length bytes   UTF-8 JSON object
      remainder           optional binary attachment (DCGF container)

  Integers are big-endian. A frame response puts {"ok": true, "status":
  ..., "frame_index": ...} in the JSON part and the DCGF bytes in the
  attachment ("encoding": "zlib" marks a compressed attachment).

* HTTP/1.1: anything not starting with the magic. Routes mirror the binary
  ops; frames are returned as DCGF bytes or a PNG re-encoded from the
  code grid (``format=png``), with status/frame index in X- headers.

Request ops (JSON "op" field / HTTP route):

    hello                                   handshake (binary only)
    create    POST /api/session             {game_type, fps, object_count,
                                             [timeout, drag_cap, hold_cap,
                                              instance_seed, seed]}
    frame     GET /api/frame?session=..     -> status, frame_index + DCGF
    click     POST /api/click               {session, x, y, [client_time]}
    drop      POST /api/drop                {session, x, y, [client_time]}
    oracle    GET /api/oracle?session=..    only with the experiment flag
    bye                                     close (binary only)

Every response carries only keys from ALLOWED_RESPONSE_KEYS: frames,
status, feedback, and ticket summaries. Answer metadata never crosses the
wire (the oracle op exists only when the service is started with the
experiment flag, for harnesses, and refuses otherwise).
"""

from __future__ import annotations

import json
import struct
import zlib

PROTOCOL = "DCGW1"
BINARY_MAGIC = b"DCGW1\n"

# every key a production response may carry; the information-hiding tests
# hold the server to exactly this list
ALLOWED_RESPONSE_KEYS = frozenset({
    "ok", "error", "proto", "server",
    "session", "created_at", "game_type", "fps", "object_count",
    "width", "height", "timeout",
    "status", "frame_index", "encoding",
    "grabbed", "feedback",
})

# extra keys permitted only on the flagged oracle op
ORACLE_KEYS = frozenset({"answers", "target_region", "object_id",
                         "centroid", "target_centroid"})

ERRORS = (
    "UnknownSession", "ExpiredSession", "InvalidParameterization",
    "NoObjectAtPoint", "InvalidSequence", "DropOutsideFrame",
    "HoldCapExceeded", "SessionTerminal", "BadRequest", "OracleDisabled",
)


class ProtocolError(Exception):
    pass


def pack_message(body: dict, attachment: bytes = b"",
                 compress: bool = False) -> bytes:
    if compress and attachment:
        attachment = zlib.compress(attachment)
        body = dict(body, encoding="zlib")
    payload = json.dumps(body, separators=(",", ":")).encode()
    total = 4 + len(payload) + len(attachment)
    return struct.pack(">II", total, len(payload)) + payload + attachment


def unpack_message(data: bytes) -> tuple[dict, bytes]:
    if len(data) < 4:
        raise ProtocolError("short message")
    (jlen,) = struct.unpack_from(">I", data, 0)
    if 4 + jlen > len(data):
        raise ProtocolError("json length exceeds message")
    body = json.loads(data[4:4 + jlen].decode())
    attachment = data[4 + jlen:]
    if body.get("encoding") == "zlib" and attachment:
        attachment = zlib.decompress(attachment)
    return body, attachment


def read_message_sync(sock_file) -> tuple[dict, bytes]:
    header = sock_file.read(4)
    if len(header) < 4:
        raise ProtocolError("connection closed")
    (total,) = struct.unpack(">I", header)
    data = sock_file.read(total)
    if len(data) < total:
        raise ProtocolError("truncated message")
    return unpack_message(data)
