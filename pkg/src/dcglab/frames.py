"""Frame values and the DCGF byte container.

DCGF layout (all integers big-endian):

    bytes 0..3   magic "DCGF"
    bytes 4..5   u16 width
    bytes 6..7   u16 height
    bytes 8..    width*height u8 color codes, row-major

Backgrounds and masks ship in the same container (masks as 0/1 codes).
An optional RGB sidecar holds raw 24-bit rows with no header; dimensions
come from the main container.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

MAGIC = b"DCGF"


class FormatError(Exception):
    pass


@dataclass
class Frame:
    codes: np.ndarray          # (H, W) uint8
    rgb: np.ndarray | None = None  # (H, W, 3) uint8

    @property
    def width(self) -> int:
        return self.codes.shape[1]

    @property
    def height(self) -> int:
        return self.codes.shape[0]


def encode_codes(codes: np.ndarray) -> bytes:
    codes = np.ascontiguousarray(codes, dtype=np.uint8)
    h, w = codes.shape
    return MAGIC + struct.pack(">HH", w, h) + codes.tobytes()


def decode_codes(data: bytes) -> np.ndarray:
    if len(data) < 8 or data[:4] != MAGIC:
        raise FormatError("not a DCGF container")
    w, h = struct.unpack(">HH", data[4:8])
    body = data[8:]
    if len(body) != w * h:
        raise FormatError(f"body is {len(body)} bytes, expected {w * h}")
    return np.frombuffer(body, dtype=np.uint8).reshape(h, w).copy()


def save_codes(path: str | Path, codes: np.ndarray, rgb: np.ndarray | None = None) -> None:
    path = Path(path)
    path.write_bytes(encode_codes(codes))
    if rgb is not None:
        rgb = np.ascontiguousarray(rgb, dtype=np.uint8)
        path.with_suffix(path.suffix + ".rgb").write_bytes(rgb.tobytes())


def load_codes(path: str | Path) -> np.ndarray:
    return decode_codes(Path(path).read_bytes())


def load_rgb_sidecar(path: str | Path, width: int, height: int) -> np.ndarray:
    raw = Path(path).read_bytes()
    if len(raw) != width * height * 3:
        raise FormatError("rgb sidecar size mismatch")
    return np.frombuffer(raw, dtype=np.uint8).reshape(height, width, 3).copy()


def encode_mask(mask: np.ndarray) -> bytes:
    return encode_codes(mask.astype(np.uint8))


def decode_mask(data: bytes) -> np.ndarray:
    return decode_codes(data).astype(bool)
