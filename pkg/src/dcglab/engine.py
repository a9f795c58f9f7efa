"""Deterministic frame-based simulation of the four drag-and-drop games.

Objects move 1 px/frame on the compass axes and (1,1) px/frame diagonally,
bounce off the moving-area border and each other by redrawing a direction,
and are matched by dragging them onto their bound sub-target. The session
is a pure function of (config, seed, interaction script).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum, IntEnum

import numpy as np

from . import kernels
from .assets import (ANSWER_COUNT, GameType, LayoutSpec, Sprite, SubTarget,
                     generate_layout)
from .frames import Frame
from .geometry import Rect
from .rng import Stream

VALID_FPS = (10, 20, 40)

# the five canonical (fps, object_count) pairs; with the four game types
# they form the 20-variant corpus
CANONICAL_PARAMS = ((10, 4), (20, 4), (20, 5), (20, 6), (40, 4))


class Direction(IntEnum):
    N = 0
    S = 1
    E = 2
    W = 3
    NE = 4
    NW = 5
    SE = 6
    SW = 7


# index-aligned with Direction; single source shared with the motion kernels
DX = kernels.get_backend("numpy").DX
DY = kernels.get_backend("numpy").DY


class Status(str, Enum):
    IN_PROGRESS = "in_progress"
    COMPLETE = "complete"
    TIMED_OUT = "timed_out"
    LOCKED_OUT = "locked_out"


class EngineError(Exception):
    pass


class InvalidConfig(EngineError):
    pass


class NoObjectAtPoint(EngineError):
    pass


class InvalidHandle(EngineError):
    pass


class DropOutsideFrame(EngineError):
    pass


class HoldCapExceeded(EngineError):
    pass


class SessionNotInProgress(EngineError):
    pass


@dataclass
class GameConfig:
    game_type: GameType
    fps: int = 20
    object_count: int = 4
    frame_width: int = 360
    frame_height: int = 130
    timeout: float = 60.0
    drag_cap: int = 2
    hold_cap: int | None = None      # max frames an object may be held
    seed: int = 0                    # drives motion and slot assignment
    instance_seed: int = 0           # selects the game artwork/layout
    matched_visible: bool = True     # render matched objects at the target
    sprite_variants: dict | None = None  # class_id -> variant, swaps in
                                         # alternate artwork for a class

    def __post_init__(self):
        self.game_type = GameType(self.game_type)
        if self.fps <= 0:
            raise InvalidConfig("fps must be positive")
        if self.timeout <= 0:
            raise InvalidConfig("timeout must be positive")
        if self.drag_cap < 1:
            raise InvalidConfig("drag_cap must be >= 1")

    @property
    def timeout_frames(self) -> int:
        return int(round(self.timeout * self.fps))

    @property
    def answer_count(self) -> int:
        return ANSWER_COUNT[self.game_type]


@dataclass
class ObjectState:
    id: int
    class_id: str
    sprite: Sprite
    is_answer: bool
    bound_target: int | None
    held: bool = False
    matched: bool = False
    attempts: int = 0
    held_frames: int = 0
    hold_violation: bool = False
    matched_pos: tuple[int, int] | None = None


@dataclass
class Feedback:
    outcome: str                 # "star" | "cross"
    object_id: int
    sub_target_id: int | None = None


@dataclass
class DragHandle:
    object_id: int
    nonce: int


@dataclass
class GroundTruth:
    background: np.ndarray                 # (H, W) uint8 codes
    object_masks: dict[int, np.ndarray]    # id -> full-frame bool mask
    target_region: Rect
    sub_targets: list[SubTarget]
    bindings: dict[int, int]               # answer object id -> sub-target id
    positions: dict[int, tuple[int, int]]  # id -> top-left
    centroids: dict[int, tuple[int, int]]  # id -> sprite-box center


class GameSession:
    """One live game. Mutated by exactly one caller at a time."""

    def __init__(self, config: GameConfig):
        self.config = config
        self.layout, self.sprites = generate_layout(
            config.game_type, config.object_count, config.instance_seed,
            config.frame_width, config.frame_height)
        if config.sprite_variants:
            from .assets import game_classes, make_sprite
            answers, noise, markers = game_classes(config.game_type)
            by_id = {s.class_id: s for s in answers + noise}
            for cid, variant in config.sprite_variants.items():
                if cid in self.sprites and cid in by_id:
                    self.sprites[cid] = make_sprite(
                        by_id[cid], variant=variant, seed=config.instance_seed)
        self.rng = Stream(config.seed ^ 0xD1CE5EED)
        self.frame_index = 0
        self.status = Status.IN_PROGRESS
        self._nonce = 0
        self._held_id: int | None = None
        self.objects = self._place_objects()
        n = len(self.objects)
        self._pos_x = np.empty(n, dtype=np.int32)
        self._pos_y = np.empty(n, dtype=np.int32)
        self._dirs = np.empty(n, dtype=np.uint8)
        self._w = np.empty(n, dtype=np.int32)
        self._h = np.empty(n, dtype=np.int32)
        for obj, (x, y, d) in zip(self.objects, self._initial_states):
            self._pos_x[obj.id] = x
            self._pos_y[obj.id] = y
            self._dirs[obj.id] = d
            self._w[obj.id] = obj.sprite.size[0]
            self._h[obj.id] = obj.sprite.size[1]
        self._moving = np.ones(n, dtype=np.uint8)
        self._blocking = np.ones(n, dtype=np.uint8)
        self._bg_codes, self._bg_rgb = self._render_background()

    # -- construction -----------------------------------------------------

    # slot grid is row-major 2x3; corners go first so any object count
    # spans the whole moving area (placement is pre-specified, only the
    # sprite-to-slot assignment varies with the seed)
    _SLOT_PRIORITY = (0, 2, 3, 5, 1, 4)

    def _place_objects(self) -> list[ObjectState]:
        layout = self.layout
        class_ids = list(layout.answer_classes) + list(layout.noise_classes)
        chosen = [layout.slots[i] for i in self._SLOT_PRIORITY[:len(class_ids)]]
        assignment = list(range(len(chosen)))
        self.rng.shuffle(assignment)
        objects = []
        self._initial_states = []
        for i, cid in enumerate(class_ids):
            sprite = self.sprites[cid]
            sw, sh = sprite.size
            cx, cy = chosen[assignment[i]]
            x, y = cx - sw // 2, cy - sh // 2
            m = layout.moving_area
            if not (m.x0 <= x and x + sw <= m.x1 and m.y0 <= y and y + sh <= m.y1):
                raise InvalidConfig("slot does not fit sprite inside moving area")
            is_answer = i < len(layout.answer_classes)
            objects.append(ObjectState(
                id=i, class_id=cid, sprite=sprite, is_answer=is_answer,
                bound_target=i if is_answer else None))
            self._initial_states.append((x, y, self.rng.below(8)))
        for a in objects:
            for b in objects:
                if a.id < b.id and self._bbox_of(a, self._initial_states[a.id][:2]
                                                 ).intersects(self._bbox_of(b, self._initial_states[b.id][:2])):
                    raise InvalidConfig("initial placement overlaps")
        return objects

    def _bbox_of(self, obj: ObjectState, pos: tuple[int, int]) -> Rect:
        w, h = obj.sprite.size
        return Rect(pos[0], pos[1], pos[0] + w, pos[1] + h)

    def _render_background(self) -> tuple[np.ndarray, np.ndarray]:
        from .vision import quantize
        lay = self.layout
        rgb = np.empty((lay.frame_height, lay.frame_width, 3), dtype=np.uint8)
        rgb[...] = lay.canvas_rgb
        b = lay.band
        rgb[b.y0:b.y1, b.x0:b.x1] = lay.band_rgb
        for st in lay.sub_targets:
            if st.marker is not None:
                _blit_rgb(rgb, st.marker, st.marker_pos)
        return quantize(rgb), rgb

    # -- state access -----------------------------------------------------

    def position(self, object_id: int) -> tuple[int, int]:
        return int(self._pos_x[object_id]), int(self._pos_y[object_id])

    def bbox(self, object_id: int) -> Rect:
        x, y = self.position(object_id)
        return Rect(x, y, x + int(self._w[object_id]), y + int(self._h[object_id]))

    def centroid(self, object_id: int) -> tuple[int, int]:
        b = self.bbox(object_id)
        return b.center

    def direction(self, object_id: int) -> Direction:
        return Direction(int(self._dirs[object_id]))

    @property
    def elapsed(self) -> float:
        return self.frame_index / self.config.fps

    def is_terminal(self) -> bool:
        return self.status is not Status.IN_PROGRESS

    # -- simulation -------------------------------------------------------

    def step(self) -> Frame:
        """Advance one frame; a no-op returning the final frame if over."""
        return self.advance(1)

    def advance(self, n_frames: int) -> Frame:
        if self.is_terminal() or n_frames <= 0:
            return self.render()
        n = min(n_frames, self.config.timeout_frames - self.frame_index)
        for o in self.objects:
            self._moving[o.id] = 0 if (o.held or o.matched) else 1
            self._blocking[o.id] = 0 if o.matched else 1
        m = self.layout.moving_area
        self.rng.state = kernels.advance_objects(
            self._pos_x, self._pos_y, self._dirs, self._w, self._h,
            self._moving, self._blocking, m.x0, m.y0, m.x1, m.y1, n,
            self.rng.state)
        self.frame_index += n
        if self._held_id is not None:
            obj = self.objects[self._held_id]
            obj.held_frames += n
            cap = self.config.hold_cap
            if cap is not None and obj.held_frames > cap:
                # countermeasure: a too-long hold is a spent attempt
                obj.held = False
                obj.hold_violation = True
                self._held_id = None
                self._spend_attempt(obj)
        if self.frame_index >= self.config.timeout_frames and not self.is_terminal():
            self.status = Status.TIMED_OUT
        return self.render()

    def _spend_attempt(self, obj: ObjectState) -> None:
        obj.attempts += 1
        self._dirs[obj.id] = self.rng.below(8)
        if obj.attempts > self.config.drag_cap:
            self.status = Status.LOCKED_OUT

    # -- rendering ----------------------------------------------------------

    def render(self) -> Frame:
        """Composite the current scene; pure in the session state."""
        codes = self._bg_codes.copy()
        for obj in self.objects:  # ascending id == render order
            if obj.matched:
                if self.config.matched_visible and obj.matched_pos is not None:
                    _blit_codes(codes, obj.sprite, obj.matched_pos)
            else:
                _blit_codes(codes, obj.sprite, self.position(obj.id))
        return Frame(codes=codes)

    def render_rgb(self) -> np.ndarray:
        rgb = self._bg_rgb.copy()
        for obj in self.objects:
            if obj.matched:
                if self.config.matched_visible and obj.matched_pos is not None:
                    _blit_rgb(rgb, obj.sprite, obj.matched_pos)
            else:
                _blit_rgb(rgb, obj.sprite, self.position(obj.id))
        return rgb

    # -- interaction --------------------------------------------------------

    def begin_drag(self, point: tuple[int, int], at_frame: int | None = None) -> DragHandle:
        """Grab the topmost unmatched object whose bbox contains point."""
        if self.is_terminal():
            raise SessionNotInProgress(self.status.value)
        if self._held_id is not None:
            raise InvalidHandle("another object is already held")
        x, y = point
        hit = None
        for obj in self.objects:  # later-rendered (higher id) wins
            if not obj.matched and self.bbox(obj.id).contains(x, y):
                hit = obj
        if hit is None:
            raise NoObjectAtPoint(f"no object bbox contains {point}")
        hit.held = True
        hit.held_frames = 0
        hit.hold_violation = False
        self._held_id = hit.id
        self._nonce += 1
        return DragHandle(object_id=hit.id, nonce=self._nonce)

    def drop(self, handle: DragHandle, point: tuple[int, int]) -> Feedback:
        if self.is_terminal():
            raise SessionNotInProgress(self.status.value)
        if not isinstance(handle, DragHandle) or handle.nonce != self._nonce:
            raise InvalidHandle("stale or foreign drag handle")
        obj = self.objects[handle.object_id]
        if obj.hold_violation:
            obj.hold_violation = False
            raise HoldCapExceeded(f"object {obj.id} held past hold_cap")
        if not obj.held or self._held_id != obj.id:
            raise InvalidHandle("object is not held")
        x, y = point
        if not (0 <= x < self.config.frame_width and 0 <= y < self.config.frame_height):
            raise DropOutsideFrame(str(point))
        obj.held = False
        self._held_id = None
        target = None
        if obj.bound_target is not None:
            target = self.layout.sub_targets[obj.bound_target]
        if obj.is_answer and target is not None and target.bbox.contains(x, y):
            obj.matched = True
            obj.matched_pos = self._settle_position(obj, target, point)
            if all(o.matched for o in self.objects if o.is_answer):
                self.status = Status.COMPLETE
            return Feedback(outcome="star", object_id=obj.id,
                            sub_target_id=target.id)
        self._spend_attempt(obj)
        hit_st = next((st.id for st in self.layout.sub_targets
                       if st.bbox.contains(x, y)), None)
        return Feedback(outcome="cross", object_id=obj.id, sub_target_id=hit_st)

    def _settle_position(self, obj: ObjectState, target: SubTarget,
                         point: tuple[int, int]) -> tuple[int, int]:
        """Where a matched object sits: on the marker, else where dropped."""
        sw, sh = obj.sprite.size
        if target.marker is not None:
            cx, cy = target.centroid
        else:
            cx, cy = point
        x = min(max(cx - sw // 2, target.bbox.x0), target.bbox.x1 - sw)
        y = min(max(cy - sh // 2, target.bbox.y0), target.bbox.y1 - sh)
        x = min(max(x, 0), self.config.frame_width - sw)
        y = min(max(y, 0), self.config.frame_height - sh)
        return x, y

    # -- oracle (test/experiment use only; never crosses the service wire) --

    def ground_truth(self) -> GroundTruth:
        h, w = self.config.frame_height, self.config.frame_width
        masks = {}
        positions = {}
        centroids = {}
        for obj in self.objects:
            m = np.zeros((h, w), dtype=bool)
            if obj.matched:
                pos = obj.matched_pos if self.config.matched_visible else None
            else:
                pos = self.position(obj.id)
            if pos is not None:
                sx, sy = pos
                sh_, sw_ = obj.sprite.mask.shape
                m[sy:sy + sh_, sx:sx + sw_] = obj.sprite.mask
            masks[obj.id] = m
            positions[obj.id] = pos
            if pos is not None:
                centroids[obj.id] = (pos[0] + obj.sprite.size[0] // 2,
                                     pos[1] + obj.sprite.size[1] // 2)
        return GroundTruth(
            background=self._bg_codes.copy(),
            object_masks=masks,
            target_region=self.layout.band,
            sub_targets=self.layout.sub_targets,
            bindings={o.id: o.bound_target for o in self.objects if o.is_answer},
            positions=positions,
            centroids=centroids)


def _blit_codes(canvas: np.ndarray, sprite: Sprite, pos: tuple[int, int]) -> None:
    x, y = pos
    h, w = sprite.mask.shape
    region = canvas[y:y + h, x:x + w]
    region[sprite.mask] = sprite.codes[sprite.mask]


def _blit_rgb(canvas: np.ndarray, sprite: Sprite, pos: tuple[int, int]) -> None:
    x, y = pos
    h, w = sprite.mask.shape
    region = canvas[y:y + h, x:x + w]
    region[sprite.mask] = sprite.rgb[sprite.mask]


def new_game(config: GameConfig) -> GameSession:
    return GameSession(config)


def play_perfectly(session: GameSession, step_between: int = 0) -> list[Feedback]:
    """Scripted oracle: drag every answer to its sub-target centroid.

    Always ends Complete with zero crosses; the baseline for attack and
    relay comparisons.
    """
    feedbacks = []
    for obj in list(session.objects):
        if session.is_terminal():
            break
        if not obj.is_answer or obj.matched:
            continue
        handle = session.begin_drag(session.centroid(obj.id))
        if step_between:
            session.advance(step_between)
        st = session.layout.sub_targets[obj.bound_target]
        feedbacks.append(session.drop(handle, st.centroid))
    return feedbacks
