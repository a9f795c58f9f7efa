"""Session drivers: the only view of a game the attacker ever gets.

A driver exposes frames, click/drop, a clock, and the public ticket summary
(game type, fps, object count). It never exposes engine internals; the
LocalDriver embeds the engine for headless experiments with simulated time,
the wire driver (``service.client``) speaks the same interface over TCP.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Protocol

import numpy as np

from ..engine import (DropOutsideFrame, EngineError, GameConfig, GameSession,
                      HoldCapExceeded, InvalidHandle, NoObjectAtPoint,
                      SessionNotInProgress, new_game)


class ChallengeDriver(Protocol):
    fps: int
    frame_width: int
    frame_height: int

    def get_frame(self) -> tuple[np.ndarray, str, int]:
        """(codes, status, frame_index) without advancing time."""
        ...

    def click(self, point: tuple[int, int]) -> bool:
        """Begin a drag; False if nothing was grabbed."""
        ...

    def drop(self, point: tuple[int, int]) -> str | None:
        """Finish the drag: 'star', 'cross', or None on a rejected drop."""
        ...

    def sleep(self, seconds: float) -> None:
        """Let game time pass."""
        ...

    def restart(self) -> None:
        """Abandon the session; a fresh run of the same challenge."""
        ...


@dataclass
class DriverStats:
    clicks: int = 0
    drags: int = 0
    stars: int = 0
    crosses: int = 0
    runs: int = 1
    slept: float = 0.0


class LocalDriver:
    """Embedded-engine driver with a simulated clock.

    Each ``restart`` reruns the same challenge instance with a fresh motion
    seed, like refreshing the captcha.
    """

    def __init__(self, config: GameConfig, run_stride: int = 1000003):
        self._base = config
        self._stride = run_stride
        self._run = 0
        self.stats = DriverStats()
        self.session = self._make_session()
        self.fps = config.fps
        self.frame_width = config.frame_width
        self.frame_height = config.frame_height

    def _make_session(self) -> GameSession:
        cfg = GameConfig(
            game_type=self._base.game_type, fps=self._base.fps,
            object_count=self._base.object_count,
            frame_width=self._base.frame_width,
            frame_height=self._base.frame_height,
            timeout=self._base.timeout, drag_cap=self._base.drag_cap,
            hold_cap=self._base.hold_cap,
            seed=self._base.seed + self._run * self._stride,
            instance_seed=self._base.instance_seed,
            matched_visible=self._base.matched_visible,
            sprite_variants=self._base.sprite_variants)
        return new_game(cfg)

    # -- driver interface ---------------------------------------------------

    def get_frame(self):
        frame = self.session.render()
        return frame.codes, self.session.status.value, self.session.frame_index

    def click(self, point):
        self.stats.clicks += 1
        try:
            self._handle = self.session.begin_drag(point)
            return True
        except (NoObjectAtPoint, SessionNotInProgress, InvalidHandle):
            self._handle = None
            return False

    def drop(self, point):
        if getattr(self, "_handle", None) is None:
            return None
        self.stats.drags += 1
        try:
            fb = self.session.drop(self._handle, point)
        except (InvalidHandle, DropOutsideFrame, HoldCapExceeded,
                SessionNotInProgress):
            self._handle = None
            return None
        self._handle = None
        if fb.outcome == "star":
            self.stats.stars += 1
        else:
            self.stats.crosses += 1
        return fb.outcome

    def sleep(self, seconds):
        if seconds <= 0:
            return
        self.stats.slept += seconds
        self.session.advance(max(1, round(seconds * self.fps)))

    def restart(self):
        self._run += 1
        self.stats.runs += 1
        self._handle = None
        self.session = self._make_session()

    # -- reporting ----------------------------------------------------------

    @property
    def status(self) -> str:
        return self.session.status.value

    @property
    def elapsed(self) -> float:
        """Simulated seconds inside the current run."""
        return self.session.frame_index / self.fps
