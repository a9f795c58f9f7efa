"""Challenge service: tickets, pacing, events, hiding, expiry."""

import json
import threading
import urllib.request

import numpy as np
import pytest

from dcglab.engine import GameConfig, new_game
from dcglab.service.client import WireClient, WireDriver
from dcglab.service.protocol import (ALLOWED_RESPONSE_KEYS, ORACLE_KEYS,
                                     pack_message, unpack_message)
from dcglab.service.server import (ChallengeService, ServiceConfig,
                                   ServiceError, ServiceThread)


class FakeClock:
    def __init__(self):
        self.t = 1000.0

    def __call__(self):
        return self.t


@pytest.fixture()
def svc():
    clock = FakeClock()
    service = ChallengeService(ServiceConfig(allow_oracle=True), clock=clock)
    return service, clock


def test_ticket_summary_only(svc):
    service, _ = svc
    t = service.create_session({"game_type": "shapes", "fps": 20,
                                "object_count": 4, "seed": 7})
    assert set(t) <= ALLOWED_RESPONSE_KEYS
    assert t["game_type"] == "shapes" and t["width"] == 360 and t["height"] == 130
    t2 = service.create_session({"game_type": "shapes", "fps": 20,
                                 "object_count": 4, "seed": 7})
    assert t2["session"] != t["session"]


def test_invalid_parameterizations(svc):
    service, _ = svc
    with pytest.raises(ServiceError):
        service.create_session({"game_type": "chess"})
    with pytest.raises(ServiceError):
        service.create_session({"game_type": "ships", "fps": 25})
    with pytest.raises(ServiceError):
        service.create_session({"game_type": "ships", "object_count": 9})


def test_clock_paces_frames(svc):
    service, clock = svc
    t = service.create_session({"game_type": "ships", "fps": 20,
                                "object_count": 4, "seed": 1})
    sid = t["session"]
    meta, _ = service.get_frame(sid)       # clock starts here
    assert meta["frame_index"] == 0
    clock.t += 1.0
    meta, _ = service.get_frame(sid)
    assert abs(meta["frame_index"] - 20) <= 1
    clock.t += 0.5
    meta, _ = service.get_frame(sid)
    assert abs(meta["frame_index"] - 30) <= 1


def test_frame_index_monotone(svc):
    service, clock = svc
    sid = service.create_session({"game_type": "ships", "fps": 40,
                                  "object_count": 4, "seed": 1})["session"]
    last = -1
    for step in (0.0, 0.3, 0.0, 1.7, 0.2):
        clock.t += step
        meta, _ = service.get_frame(sid)
        assert meta["frame_index"] >= last
        last = meta["frame_index"]


def test_timeout_and_expiry(svc):
    service, clock = svc
    sid = service.create_session({"game_type": "ships", "fps": 20,
                                  "object_count": 4, "seed": 1})["session"]
    service.get_frame(sid)
    clock.t += 61.0
    meta, _ = service.get_frame(sid)
    assert meta["status"] == "timed_out"
    clock.t += 31.0                        # past the 30 s grace
    with pytest.raises(ServiceError) as exc:
        service.get_frame(sid)
    assert exc.value.code == "ExpiredSession"


def test_unknown_session(svc):
    service, _ = svc
    with pytest.raises(ServiceError) as exc:
        service.get_frame("feedbeef")
    assert exc.value.code == "UnknownSession"


def test_click_drop_flow_with_oracle(svc):
    service, clock = svc
    sid = service.create_session({"game_type": "shapes", "fps": 20,
                                  "object_count": 4, "seed": 5})["session"]
    service.get_frame(sid)
    info = service.oracle(sid)
    assert len(info["answers"]) == 2
    for ans in info["answers"]:
        r = service.post_click(sid, *ans["centroid"])
        assert r["grabbed"]
        r = service.post_drop(sid, *ans["target_centroid"])
        assert r["feedback"] == "star"
    assert r["status"] == "complete"


def test_drop_without_click_rejected(svc):
    service, _ = svc
    sid = service.create_session({"game_type": "ships", "fps": 20,
                                  "object_count": 4, "seed": 2})["session"]
    service.get_frame(sid)
    with pytest.raises(ServiceError) as exc:
        service.post_drop(sid, 10, 10)
    assert exc.value.code == "InvalidSequence"


def test_lockout_surfaced_on_poll(svc):
    service, _ = svc
    sid = service.create_session({"game_type": "shapes", "fps": 20,
                                  "object_count": 4, "seed": 5,
                                  "drag_cap": 1})["session"]
    service.get_frame(sid)
    info = service.oracle(sid)
    # find a noise object: click somewhere that is not an answer
    session = service.sessions[sid].session
    noise = next(o for o in session.objects if not o.is_answer)
    target = info["answers"][0]["target_centroid"]
    for _ in range(2):
        c = session.centroid(noise.id)
        service.post_click(sid, *c)
        r = service.post_drop(sid, *target)
        assert r["feedback"] == "cross"
    meta, _ = service.get_frame(sid)
    assert meta["status"] == "locked_out"


def test_oracle_requires_flag():
    service = ChallengeService(ServiceConfig(allow_oracle=False))
    sid = service.create_session({"game_type": "ships", "fps": 20,
                                  "object_count": 4, "seed": 3})["session"]
    with pytest.raises(ServiceError) as exc:
        service.oracle(sid)
    assert exc.value.code == "OracleDisabled"


def test_protocol_message_roundtrip():
    body = {"op": "frame", "session": "ab12"}
    data = pack_message(body, b"PAYLOAD", compress=True)
    total = int.from_bytes(data[:4], "big")
    got, att = unpack_message(data[4:4 + total])
    assert att == b"PAYLOAD"
    assert got["op"] == "frame" and got["encoding"] == "zlib"


# -- live socket tests ---------------------------------------------------------

def test_wire_end_to_end_and_key_whitelist():
    captured = []

    def capture(direction, body, att):
        if direction == "recv":
            captured.append(body)

    with ServiceThread(ServiceConfig()) as st:
        with WireClient("127.0.0.1", st.port, capture=capture) as c:
            t = c.create("parking", fps=20, object_count=5, seed=4)
            codes, status, idx = c.frame(t["session"])
            assert codes.shape == (130, 360) and status == "in_progress"
            r = c.click(t["session"], 1, 1)
            assert r["ok"] is False and r["error"] == "NoObjectAtPoint"
    for body in captured:
        assert set(body) <= ALLOWED_RESPONSE_KEYS, body


def test_wire_driver_plays_via_oracle():
    with ServiceThread(ServiceConfig(allow_oracle=True)) as st:
        with WireClient("127.0.0.1", st.port) as c:
            drv = WireDriver(c, "shapes", fps=40, object_count=4, seed=11)
            reply, _ = c.call({"op": "oracle", "session": drv.session_id})
            for ans in reply["answers"]:
                assert drv.click(tuple(ans["centroid"]))
                assert drv.drop(tuple(ans["target_centroid"])) == "star"
            _, status, _ = drv.get_frame()
            assert status == "complete"


def test_http_binding(tmp_path):
    with ServiceThread(ServiceConfig(allow_oracle=True)) as st:
        base = f"http://127.0.0.1:{st.port}"
        req = urllib.request.Request(
            base + "/api/session",
            data=json.dumps({"game_type": "animals", "fps": 20,
                             "object_count": 6, "seed": 8}).encode(),
            headers={"Content-Type": "application/json"}, method="POST")
        ticket = json.loads(urllib.request.urlopen(req).read())
        assert set(ticket) <= ALLOWED_RESPONSE_KEYS
        sid = ticket["session"]

        fr = urllib.request.urlopen(f"{base}/api/frame?session={sid}")
        data = fr.read()
        assert data[:4] == b"DCGF"
        assert fr.headers["X-Status"] == "in_progress"

        png = urllib.request.urlopen(
            f"{base}/api/frame?session={sid}&format=png").read()
        assert png[:8] == b"\x89PNG\r\n\x1a\n"

        orc = json.loads(urllib.request.urlopen(
            f"{base}/api/oracle?session={sid}").read())
        assert set(orc) <= ALLOWED_RESPONSE_KEYS | ORACLE_KEYS
        ans = orc["answers"][0]
        req = urllib.request.Request(
            base + "/api/click",
            data=json.dumps({"session": sid, "x": ans["centroid"][0],
                             "y": ans["centroid"][1]}).encode(),
            method="POST")
        assert json.loads(urllib.request.urlopen(req).read())["grabbed"]
        req = urllib.request.Request(
            base + "/api/drop",
            data=json.dumps({"session": sid, "x": ans["target_centroid"][0],
                             "y": ans["target_centroid"][1]}).encode(),
            method="POST")
        assert json.loads(urllib.request.urlopen(req).read())["feedback"] == "star"


def test_http_unknown_session_is_404():
    with ServiceThread(ServiceConfig()) as st:
        base = f"http://127.0.0.1:{st.port}"
        with pytest.raises(urllib.error.HTTPError) as exc:
            urllib.request.urlopen(f"{base}/api/frame?session=zz")
        assert exc.value.code == 404
        body = json.loads(exc.value.read())
        assert body["error"] == "UnknownSession"
