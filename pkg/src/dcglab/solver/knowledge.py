"""The attack dictionary: learned backgrounds, targets, and bindings.

Persisted in the DCGD1 container (all integers big-endian):

    bytes 0..4   magic "DCGD1"
    u32          record count
    per record:
      u8 + bytes   game label (attacker's own tag, may be empty)
      u8           complete flag
      32 bytes     game key (sha256 of the background code bytes)
      u32 + DCGF   background codes
      u32 + bytes  confidence grid, u8 = round(conf * 255), row-major
      u8           target method (0 mbr, 1 edge, 2 exclusion)
      4 x u16      target region x0 y0 x1 y1
      2 x u16      target center
      4 x u16      parked-object zone x0 y0 x1 y1
      9 x 2 x u16  probe block centroids
      u16          binding count
      per binding: u32 area, 2 x u16 centroid, 64 x u32 histogram
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..frames import decode_codes, encode_codes
from ..geometry import Rect
from ..vision import Background, TargetEstimate

MAGIC = b"DCGD1"

_METHODS = ("mbr", "edge", "exclusion")


class DictionaryError(Exception):
    pass


def game_key(background_codes: np.ndarray) -> str:
    return hashlib.sha256(
        np.ascontiguousarray(background_codes, dtype=np.uint8).tobytes()
    ).hexdigest()


@dataclass
class Binding:
    histogram: np.ndarray          # 64-bin
    area: int
    centroid: tuple[int, int]      # one of the 9 probe block centroids


@dataclass
class KnowledgeRecord:
    game_key: str
    background: Background
    target: TargetEstimate
    probe_blocks: list[tuple[int, int]]
    bindings: list[Binding] = field(default_factory=list)
    label: str = ""
    complete: bool = False


class KnowledgeBase:
    def __init__(self):
        self.records: dict[str, KnowledgeRecord] = {}

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records.values())

    def put(self, record: KnowledgeRecord) -> None:
        self.records[record.game_key] = record

    def get(self, key: str) -> KnowledgeRecord | None:
        return self.records.get(key)

    # -- persistence --------------------------------------------------------

    def save(self, path: str | Path) -> None:
        chunks = [MAGIC, struct.pack(">I", len(self.records))]
        for rec in self.records.values():
            label = rec.label.encode()
            chunks.append(struct.pack(">B", len(label)))
            chunks.append(label)
            chunks.append(struct.pack(">B", 1 if rec.complete else 0))
            chunks.append(bytes.fromhex(rec.game_key))
            bg = encode_codes(rec.background.codes)
            chunks.append(struct.pack(">I", len(bg)))
            chunks.append(bg)
            conf = np.clip(np.round(rec.background.confidence * 255), 0, 255
                           ).astype(np.uint8).tobytes()
            chunks.append(struct.pack(">I", len(conf)))
            chunks.append(conf)
            t = rec.target
            zone = t.parked_zone()
            chunks.append(struct.pack(">B4H2H4H", _METHODS.index(t.method),
                                      t.region.x0, t.region.y0,
                                      t.region.x1, t.region.y1,
                                      t.center[0], t.center[1],
                                      zone.x0, zone.y0, zone.x1, zone.y1))
            if len(rec.probe_blocks) != 9:
                raise DictionaryError("record must carry 9 probe blocks")
            for bx, by in rec.probe_blocks:
                chunks.append(struct.pack(">2H", bx, by))
            chunks.append(struct.pack(">H", len(rec.bindings)))
            for b in rec.bindings:
                chunks.append(struct.pack(">I2H", b.area,
                                          b.centroid[0], b.centroid[1]))
                chunks.append(np.asarray(b.histogram, dtype=">u4").tobytes())
        Path(path).write_bytes(b"".join(chunks))

    @classmethod
    def load(cls, path: str | Path) -> "KnowledgeBase":
        data = Path(path).read_bytes()
        if data[:5] != MAGIC:
            raise DictionaryError("not a DCGD1 dictionary")
        kb = cls()
        off = 5
        (count,) = struct.unpack_from(">I", data, off)
        off += 4
        for _ in range(count):
            (llen,) = struct.unpack_from(">B", data, off)
            off += 1
            label = data[off:off + llen].decode()
            off += llen
            (complete,) = struct.unpack_from(">B", data, off)
            off += 1
            key = data[off:off + 32].hex()
            off += 32
            (blen,) = struct.unpack_from(">I", data, off)
            off += 4
            codes = decode_codes(data[off:off + blen])
            off += blen
            (clen,) = struct.unpack_from(">I", data, off)
            off += 4
            conf = np.frombuffer(data[off:off + clen], dtype=np.uint8
                                 ).reshape(codes.shape).astype(np.float64) / 255.0
            off += clen
            (method, x0, y0, x1, y1, cx, cy,
             zx0, zy0, zx1, zy1) = struct.unpack_from(">B4H2H4H", data, off)
            off += 21
            blocks = []
            for _ in range(9):
                bx, by = struct.unpack_from(">2H", data, off)
                off += 4
                blocks.append((bx, by))
            (nbind,) = struct.unpack_from(">H", data, off)
            off += 2
            bindings = []
            for _ in range(nbind):
                area, bx, by = struct.unpack_from(">I2H", data, off)
                off += 8
                hist = np.frombuffer(data[off:off + 256], dtype=">u4"
                                     ).astype(np.int64)
                off += 256
                bindings.append(Binding(histogram=hist, area=area,
                                        centroid=(bx, by)))
            kb.put(KnowledgeRecord(
                game_key=key,
                background=Background(codes=codes, confidence=conf),
                target=TargetEstimate(method=_METHODS[method],
                                      region=Rect(x0, y0, x1, y1),
                                      center=(cx, cy),
                                      zone=Rect(zx0, zy0, zx1, zy1)),
                probe_blocks=blocks, bindings=bindings,
                label=label, complete=bool(complete)))
        return kb


def identify(kb: KnowledgeBase, frame_codes: np.ndarray,
             min_equality: float = 0.95) -> KnowledgeRecord | None:
    """Match a live frame against stored games.

    The target region holds no moving objects, so a single frame compares
    directly with the stored background there; best record wins if its
    per-pixel code equality is at least ``min_equality``.
    """
    best, best_eq = None, min_equality
    for rec in kb:
        if rec.background.codes.shape != frame_codes.shape:
            continue
        r = rec.target.region
        stored = rec.background.codes[r.y0:r.y1, r.x0:r.x1]
        live = frame_codes[r.y0:r.y1, r.x0:r.x1]
        if stored.size == 0:
            continue
        eq = float((stored == live).mean())
        if eq >= best_eq:
            best, best_eq = rec, eq
    return best
