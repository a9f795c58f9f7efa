"""Procedural layouts and sprites for the four game types.

Sprites are flat two-tone shapes (body + accent stripe) so that color-code
histograms stay meaningful without any licensed artwork. Within one game
instance every class quantizes to a distinct dominant 6-bit code; the
instance seed picks among palette/arrangement alternatives so different
instances get different backgrounds.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .geometry import Rect
from .rng import Stream
from .vision import quantize


class GameType(str, Enum):
    SHIPS = "ships"
    SHAPES = "shapes"
    ANIMALS = "animals"
    PARKING = "parking"


# answer objects per game: single / two / three / one-with-empty-target
ANSWER_COUNT = {
    GameType.SHIPS: 1,
    GameType.SHAPES: 2,
    GameType.ANIMALS: 3,
    GameType.PARKING: 1,
}

VALID_OBJECT_COUNTS = (4, 5, 6)


class LayoutError(Exception):
    pass


@dataclass(frozen=True)
class SpriteClass:
    class_id: str
    game_type: GameType
    role: str               # "answer" | "noise" | "target_marker"
    levels: tuple[int, int, int]  # 2-bit channel levels of the body color
    shape: str              # "circle" | "ngon:N" | "blob" | "hull" | "box"
    nominal_size: int


@dataclass
class Sprite:
    spec: SpriteClass
    variant: int
    mask: np.ndarray   # (h, w) bool
    rgb: np.ndarray    # (h, w, 3) uint8, valid where mask
    codes: np.ndarray  # (h, w) uint8, valid where mask

    @property
    def area(self) -> int:
        return int(self.mask.sum())

    @property
    def size(self) -> tuple[int, int]:
        return self.mask.shape[1], self.mask.shape[0]

    @property
    def dominant_code(self) -> int:
        vals = self.codes[self.mask]
        return int(np.bincount(vals, minlength=64).argmax())

    def histogram(self) -> np.ndarray:
        return np.bincount(self.codes[self.mask], minlength=64)[:64].astype(np.int64)


@dataclass
class SubTarget:
    id: int
    centroid: tuple[int, int]
    bbox: Rect                      # accepting area (share of the band)
    expected_class: str
    marker: Sprite | None = None
    marker_pos: tuple[int, int] | None = None  # top-left


@dataclass
class LayoutSpec:
    game_type: GameType
    frame_width: int
    frame_height: int
    band: Rect
    moving_area: Rect
    canvas_rgb: np.ndarray
    band_rgb: np.ndarray
    sub_targets: list[SubTarget]
    slots: list[tuple[int, int]]    # slot centers inside the moving area
    answer_classes: list[str]       # index-aligned with sub_targets
    noise_classes: list[str]
    is_empty_target: bool
    seed: int = 0
    instruction: str = ""


_ACCENT_LEVELS = (0, 0, 0)

# accent tones cycled by sprite variant; crossing quantization bands is what
# makes a new variant land outside the matcher's threshold
_ACCENT_OPTIONS = [(0, 0, 0), (0, 1, 1), (1, 0, 1), (1, 1, 0), (0, 0, 1)]

# body-color levels per class; all distinct per game, also from canvas/band
_GAME_DEFS = {
    GameType.SHIPS: dict(
        canvas_options=[(3, 3, 3), (2, 3, 3), (3, 2, 3)],
        band=(0, 1, 3),
        band_axis="bottom",
        instruction="Place the ships on the sea",
        answers=[("ship", (3, 0, 0), "hull", 22)],
        noise=[("bird", (3, 3, 0), "blob", 16),
               ("monkey", (2, 1, 0), "blob", 18),
               ("squirrel", (3, 2, 0), "blob", 16),
               ("kite", (1, 3, 1), "ngon:4", 15),
               ("balloon", (2, 0, 3), "circle", 17)],
        markers=[],
    ),
    GameType.SHAPES: dict(
        canvas_options=[(3, 3, 2), (2, 2, 3), (3, 2, 2)],
        band=(1, 2, 3),
        band_axis="top",
        instruction="Match the shapes",
        answers=[("circle", (3, 0, 1), "circle", 19),
                 ("pentagon", (0, 2, 0), "ngon:5", 20)],
        noise=[("triangle", (3, 2, 0), "ngon:3", 19),
               ("square", (0, 2, 3), "box", 17),
               ("hexagon", (2, 0, 2), "ngon:6", 19),
               ("diamond", (3, 3, 0), "ngon:4", 18)],
        markers=[("circle_slot", (1, 1, 2), "circle", 21),
                 ("pentagon_slot", (2, 1, 1), "ngon:5", 22)],
    ),
    GameType.ANIMALS: dict(
        canvas_options=[(2, 3, 3), (3, 3, 2), (2, 2, 3)],
        band=(1, 2, 0),
        band_axis="right",
        instruction="Feed the animals",
        answers=[("bone", (3, 3, 1), "blob", 16),
                 ("banana", (3, 2, 0), "blob", 17),
                 ("carrot", (3, 1, 0), "blob", 16)],
        noise=[("rock", (1, 1, 1), "blob", 16),
               ("flower", (3, 0, 2), "blob", 15),
               ("ball", (0, 0, 2), "circle", 15)],
        markers=[("dog", (2, 1, 0), "blob", 21),
                 ("rabbit", (2, 2, 2), "blob", 20),
                 ("bear", (1, 0, 0), "blob", 22)],
    ),
    GameType.PARKING: dict(
        canvas_options=[(1, 2, 3), (0, 2, 3), (1, 3, 3)],
        band=(2, 1, 0),
        band_axis="left",
        instruction="Park the boat",
        answers=[("boat", (3, 0, 0), "hull", 15)],
        noise=[("buoy", (3, 2, 0), "circle", 14),
               ("raft", (2, 2, 0), "box", 15),
               ("crate", (1, 1, 0), "box", 14),
               ("barrel", (2, 0, 1), "circle", 14),
               ("duck", (3, 3, 0), "blob", 14)],
        markers=[],
    ),
}


def _rgb_from_levels(levels: tuple[int, int, int], stream: Stream) -> np.ndarray:
    """A color inside the 2-bit band of each channel; jitter keeps the code."""
    return np.array([lv * 64 + 8 + stream.below(48) for lv in levels], dtype=np.uint8)


def _class_phase(class_id: str) -> float:
    return (zlib.crc32(class_id.encode()) % 628) / 100.0


def _circle_mask(size: int) -> np.ndarray:
    r = size / 2.0
    yy, xx = np.mgrid[0:size, 0:size]
    return (xx - r + 0.5) ** 2 + (yy - r + 0.5) ** 2 <= (r - 0.5) ** 2


def _ngon_mask(size: int, n: int, phase: float = -np.pi / 2) -> np.ndarray:
    r = size / 2.0
    angles = phase + 2 * np.pi * np.arange(n) / n
    vx = r + (r - 0.5) * np.cos(angles)
    vy = r + (r - 0.5) * np.sin(angles)
    yy, xx = np.mgrid[0:size, 0:size]
    px = xx + 0.5
    py = yy + 0.5
    inside = np.ones((size, size), dtype=bool)
    for i in range(n):
        j = (i + 1) % n
        cross = (vx[j] - vx[i]) * (py - vy[i]) - (vy[j] - vy[i]) * (px - vx[i])
        inside &= cross >= 0
    return inside


def _blob_mask(size: int, phase: float, lobes: int = 3, amp: float = 0.22) -> np.ndarray:
    r = size / 2.0
    yy, xx = np.mgrid[0:size, 0:size]
    dx = xx - r + 0.5
    dy = yy - r + 0.5
    theta = np.arctan2(dy, dx)
    radius = (r - 0.5) * (1.0 - amp / 2 + amp * np.sin(lobes * theta + phase))
    return dx ** 2 + dy ** 2 <= radius ** 2


def _hull_mask(size: int) -> np.ndarray:
    """A boat profile: cabin block over a trapezoid hull."""
    m = np.zeros((size, size), dtype=bool)
    deck = int(size * 0.45)
    keel = int(size * 0.85)
    for y in range(deck, keel):
        t = (y - deck) / max(1, keel - deck)
        inset = int(t * size * 0.22)
        m[y, inset:size - inset] = True
    cab_w = int(size * 0.4)
    cab_x = (size - cab_w) // 2
    m[int(size * 0.18):deck, cab_x:cab_x + cab_w] = True
    return m


def _box_mask(size: int) -> np.ndarray:
    m = np.zeros((size, size), dtype=bool)
    m[1:size - 1, 1:size - 1] = True
    return m


def _shape_mask(spec: SpriteClass, size: int, variant: int) -> np.ndarray:
    shape = spec.shape
    phase = _class_phase(spec.class_id) + 0.9 * variant
    if shape == "circle":
        return _circle_mask(size)
    if shape.startswith("ngon:"):
        return _ngon_mask(size, int(shape.split(":")[1]))
    if shape == "blob":
        return _blob_mask(size, phase, lobes=3 + zlib.crc32(spec.class_id.encode()) % 3)
    if shape == "hull":
        return _hull_mask(size)
    if shape == "box":
        return _box_mask(size)
    raise ValueError(f"unknown shape {shape!r}")


def make_sprite(spec: SpriteClass, variant: int = 0, seed: int = 0) -> Sprite:
    """Rasterize one sprite variant.

    Variants shift the accent-stripe share of the body (a histogram-visible
    change) and perturb blob outlines; the dominant code never changes.
    """
    stream = Stream(zlib.crc32(spec.class_id.encode()) ^ (seed * 0x9E37 + variant))
    size = spec.nominal_size + (variant // 3)
    mask = _shape_mask(spec, size, variant)
    body = _rgb_from_levels(spec.levels, stream)
    accent = _rgb_from_levels(_ACCENT_OPTIONS[variant % len(_ACCENT_OPTIONS)], stream)
    rgb = np.zeros((size, size, 3), dtype=np.uint8)
    rgb[...] = body
    if spec.role != "target_marker":
        # bottom accent wedge sized by area share; variants shift both the
        # share and the accent tone, body color stays dominant (cap 0.49)
        area = int(mask.sum())
        target = (0.12 + 0.17 * (variant % 3)) * area
        row_w = mask.sum(axis=1)
        acc = 0
        for y in range(size - 1, -1, -1):
            w = int(row_w[y])
            if w == 0:
                continue
            if acc >= target or acc + w > 0.49 * area:
                break
            rgb[y, :] = accent
            acc += w
    codes = quantize(rgb)
    return Sprite(spec=spec, variant=variant, mask=mask, rgb=rgb, codes=codes)


def game_classes(game_type: GameType) -> tuple[list[SpriteClass], list[SpriteClass], list[SpriteClass]]:
    """(answer, noise, marker) class specs for one game type."""
    defs = _GAME_DEFS[game_type]

    def build(rows, role):
        return [SpriteClass(class_id=cid, game_type=game_type, role=role,
                            levels=levels, shape=shape, nominal_size=size)
                for cid, levels, shape, size in rows]

    return (build(defs["answers"], "answer"),
            build(defs["noise"], "noise"),
            build(defs["markers"], "target_marker"))


def _band_rects(game_type: GameType, w: int, h: int) -> tuple[Rect, Rect]:
    """(band, moving_area); a 2 px seam separates them."""
    axis = _GAME_DEFS[game_type]["band_axis"]
    if axis == "bottom":
        split = round(h * 0.72)
        return Rect(0, split, w, h), Rect(0, 0, w, split - 2)
    if axis == "top":
        split = round(h * 0.28)
        return Rect(0, 0, w, split), Rect(0, split + 2, w, h)
    if axis == "right":
        split = round(w * 0.72)
        return Rect(split, 0, w, h), Rect(0, 0, split - 2, h)
    if axis == "left":
        split = round(w * 0.28)
        return Rect(0, 0, split, h), Rect(split + 2, 0, w, h)
    raise ValueError(axis)


def _split_band(band: Rect, n: int, axis: str) -> list[Rect]:
    """n equal shares along the band's long axis."""
    shares = []
    if axis in ("top", "bottom"):
        cuts = [band.x0 + i * band.width // n for i in range(n + 1)]
        shares = [Rect(cuts[i], band.y0, cuts[i + 1], band.y1) for i in range(n)]
    else:
        cuts = [band.y0 + i * band.height // n for i in range(n + 1)]
        shares = [Rect(band.x0, cuts[i], band.x1, cuts[i + 1]) for i in range(n)]
    return shares


def generate_layout(game_type: GameType, object_count: int, seed: int = 0,
                    frame_width: int = 360, frame_height: int = 130,
                    ) -> tuple[LayoutSpec, dict[str, Sprite]]:
    """Instantiate a game layout: target band, sub-targets, sprites, slots.

    Deterministic in (game_type, object_count, seed, dimensions). The seed
    selects the canvas palette, jitters colors inside their quantization
    bands, and permutes which answer binds to which sub-target.
    """
    game_type = GameType(game_type)
    if object_count not in VALID_OBJECT_COUNTS:
        raise LayoutError(f"object_count must be one of {VALID_OBJECT_COUNTS}")
    defs = _GAME_DEFS[game_type]
    r = ANSWER_COUNT[game_type]
    stream = Stream(seed ^ zlib.crc32(game_type.value.encode()))

    answers, noise, markers = game_classes(game_type)
    if object_count - r > len(noise):
        raise LayoutError("not enough noise classes for object_count")
    noise = noise[:object_count - r]

    canvas_levels = defs["canvas_options"][stream.below(len(defs["canvas_options"]))]
    canvas_rgb = _rgb_from_levels(canvas_levels, stream)
    band_rgb = _rgb_from_levels(defs["band"], stream)
    band, moving = _band_rects(game_type, frame_width, frame_height)

    sprites: dict[str, Sprite] = {}
    for spec in answers + noise + markers:
        sprites[spec.class_id] = make_sprite(spec, variant=0, seed=seed)

    # distinct dominant codes, canvas and band included
    codes = [int(quantize(canvas_rgb.reshape(1, 1, 3))[0, 0]),
             int(quantize(band_rgb.reshape(1, 1, 3))[0, 0])]
    codes += [sprites[s.class_id].dominant_code for s in answers + noise + markers]
    if len(set(codes)) != len(codes):
        raise LayoutError(f"palette collision in {game_type.value}: {codes}")

    # answer k binds to share k; the seed permutes the pairing
    order = list(range(r))
    stream.shuffle(order)
    shares = _split_band(band, r, defs["band_axis"])
    sub_targets = []
    answer_classes = []
    for k, share in enumerate(shares):
        a_idx = order[k]
        marker = sprites[markers[a_idx].class_id] if markers else None
        cx, cy = share.center
        mpos = None
        if marker is not None:
            mw, mh = marker.size
            mpos = (cx - mw // 2, cy - mh // 2)
        sub_targets.append(SubTarget(
            id=k, centroid=(cx, cy), bbox=share,
            expected_class=answers[a_idx].class_id,
            marker=marker, marker_pos=mpos))
        answer_classes.append(answers[a_idx].class_id)

    max_size = max(s.nominal_size for s in answers + noise) + 2
    cols, rows = 3, 2
    if moving.width // cols < max_size + 2 or moving.height // rows < max_size + 2:
        raise LayoutError("moving area too small for non-overlapping slots")
    slots = [(moving.x0 + (2 * c + 1) * moving.width // (2 * cols),
              moving.y0 + (2 * rw + 1) * moving.height // (2 * rows))
             for rw in range(rows) for c in range(cols)]

    layout = LayoutSpec(
        game_type=game_type, frame_width=frame_width, frame_height=frame_height,
        band=band, moving_area=moving, canvas_rgb=canvas_rgb, band_rgb=band_rgb,
        sub_targets=sub_targets, slots=slots,
        answer_classes=answer_classes,
        noise_classes=[s.class_id for s in noise],
        is_empty_target=(game_type == GameType.PARKING),
        seed=seed, instruction=defs["instruction"])
    return layout, sprites


def sprite_pool(game_type: GameType, class_id: str, n: int, seed: int = 0) -> list[Sprite]:
    """n variants of one class; variant 0 is the canonical sprite."""
    if n < 1:
        raise ValueError("n must be >= 1")
    answers, noise, markers = game_classes(GameType(game_type))
    by_id = {s.class_id: s for s in answers + noise + markers}
    if class_id not in by_id:
        raise KeyError(f"unknown class {class_id!r} for {game_type}")
    return [make_sprite(by_id[class_id], variant=v, seed=seed) for v in range(n)]
