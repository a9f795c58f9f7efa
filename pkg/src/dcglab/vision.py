"""Attacker-side perception: color quantization, background learning,
foreground extraction, and the three target-area detectors.

Everything here is a pure function of frames; no engine internals are
touched. Frames are uint8 code grids (see ``frames.py`` for the container).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import Rect
from . import kernels


class VisionError(Exception):
    pass


class NoComplement(VisionError):
    """Foreground bounding rectangle covers the whole frame."""


class NoEdges(VisionError):
    """No edge segment survived the size threshold."""


@dataclass
class VisionParams:
    learn_frames: int = 40
    sample_interval: float = 0.2  # seconds between learning frames
    object_frames: int = 6        # in [5, 8]
    min_component_size: int = 16  # px; smaller components discarded as noise
    edge_min_segment: int = 20    # px; tunable per game
    match_threshold: float = 0.15

    def __post_init__(self):
        if not (5 <= self.object_frames <= 8):
            raise ValueError("object_frames must be in [5, 8]")
        if self.learn_frames < self.object_frames:
            raise ValueError("learn_frames must be >= object_frames")
        if self.sample_interval <= 0:
            raise ValueError("sample_interval must be positive")


def quantize(rgb: np.ndarray) -> np.ndarray:
    """24-bit RGB -> 6-bit code: top 2 bits of each channel, R high."""
    rgb = np.asarray(rgb, dtype=np.uint8)
    r = rgb[..., 0] >> 6
    g = rgb[..., 1] >> 6
    b = rgb[..., 2] >> 6
    return ((r << 4) | (g << 2) | b).astype(np.uint8)


def dequantize(codes: np.ndarray) -> np.ndarray:
    """Canonical RGB representative (band midpoint) of each 6-bit code."""
    codes = np.asarray(codes)
    r = ((codes >> 4) & 3).astype(np.uint8)
    g = ((codes >> 2) & 3).astype(np.uint8)
    b = (codes & 3).astype(np.uint8)
    return np.stack([(r << 6) | 32, (g << 6) | 32, (b << 6) | 32], axis=-1)


@dataclass
class Background:
    codes: np.ndarray       # (H, W) uint8
    confidence: np.ndarray  # (H, W) float, modal-count / learn_frames

    @property
    def shape(self) -> tuple[int, int]:
        return self.codes.shape


@dataclass
class ForegroundObject:
    mask: np.ndarray      # (H, W) bool, full-frame
    bbox: Rect
    centroid: tuple[int, int]
    area: int
    histogram: np.ndarray  # 64-bin int64, sums to area


@dataclass
class TargetEstimate:
    method: str                      # "mbr" | "edge" | "exclusion"
    region: Rect
    center: tuple[int, int]
    region_mask: np.ndarray | None = field(default=None, repr=False)
    # where dropped objects may come to rest: the region's side of the
    # scene, extended past the cell's own (foreground-derived) span
    zone: Rect | None = None

    def parked_zone(self) -> Rect:
        return self.zone if self.zone is not None else self.region


def learn_background(frames: np.ndarray) -> Background:
    """Per-pixel modal 6-bit code over a (n, H, W) stack of code frames.

    Ties break toward the lowest code.
    """
    frames = np.asarray(frames)
    if frames.ndim != 3:
        raise ValueError("expected a (n, H, W) stack of code frames")
    modes, counts = kernels.mode_codes(frames.astype(np.uint8))
    return Background(codes=modes, confidence=counts / float(frames.shape[0]))


def foreground_mask(frame: np.ndarray, background: Background) -> np.ndarray:
    if frame.shape != background.codes.shape:
        raise ValueError("frame/background dimension mismatch")
    return frame != background.codes


def extract_foreground(frame: np.ndarray, background: Background,
                       params: VisionParams) -> list[ForegroundObject]:
    """Connected foreground components above the size threshold.

    The mask is every pixel whose code differs from the learned background;
    components are 4-connected; each carries bbox, centroid, area, and a
    64-bin color-code histogram of its frame pixels.
    """
    mask = foreground_mask(frame, background)
    labels, n = kernels.label_components(mask)
    objects: list[ForegroundObject] = []
    if n == 0:
        return objects
    areas = np.bincount(labels.ravel(), minlength=n + 1)
    ys, xs = np.nonzero(labels)
    labs = labels[ys, xs]
    for lab in range(1, n + 1):
        area = int(areas[lab])
        if area < params.min_component_size:
            continue
        sel = labs == lab
        oy, ox = ys[sel], xs[sel]
        bbox = Rect(int(ox.min()), int(oy.min()), int(ox.max()) + 1, int(oy.max()) + 1)
        centroid = (int(round(ox.mean())), int(round(oy.mean())))
        hist = np.bincount(frame[oy, ox], minlength=64)[:64].astype(np.int64)
        omask = np.zeros_like(mask)
        omask[oy, ox] = True
        objects.append(ForegroundObject(mask=omask, bbox=bbox, centroid=centroid,
                                        area=area, histogram=hist))
    return objects


def sample_indices(learn_frames: int, object_frames: int) -> list[int]:
    """Equally spaced indices into the learning sequence."""
    if object_frames == 1:
        return [0]
    return [k * (learn_frames - 1) // (object_frames - 1) for k in range(object_frames)]


def select_object_frame(frames: np.ndarray, background: Background,
                        params: VisionParams) -> tuple[int, list[ForegroundObject]]:
    """Pick the frame with the most components (ties: earliest)."""
    best_idx = 0
    best_objs: list[ForegroundObject] = []
    best_count = -1
    for idx in range(frames.shape[0]):
        objs = extract_foreground(frames[idx], background, params)
        if len(objs) > best_count:
            best_idx, best_objs, best_count = idx, objs, len(objs)
    return best_idx, best_objs


def _mask_bbox(mask: np.ndarray) -> Rect | None:
    ys, xs = np.nonzero(mask)
    if len(ys) == 0:
        return None
    return Rect(int(xs.min()), int(ys.min()), int(xs.max()) + 1, int(ys.max()) + 1)


def detect_target_mbr(background: Background,
                      masks: list[np.ndarray]) -> TargetEstimate:
    """Largest of the 8 cells surrounding the union of per-frame MBRs.

    Each sample frame's foreground pixels get a bounding rectangle; the
    final moving-area estimate bounds them all. Its four edges extended to
    the frame border partition the complement into up to 8 cells; the
    largest is the target region and its centroid the target center.
    """
    h, w = background.shape
    mbr: Rect | None = None
    for m in masks:
        b = _mask_bbox(m)
        if b is not None:
            mbr = b if mbr is None else mbr.union(b)
    if mbr is None:
        raise ValueError("all foreground masks empty")
    xs = [0, mbr.x0, mbr.x1, w]
    ys = [0, mbr.y0, mbr.y1, h]
    best: Rect | None = None
    best_pos = None
    for row in range(3):
        for col in range(3):
            if row == 1 and col == 1:
                continue
            cell = Rect(xs[col], ys[row], xs[col + 1], ys[row + 1])
            if cell.area <= 0:
                continue
            if best is None or cell.area > best.area:
                best, best_pos = cell, (row, col)
    if best is None:
        raise NoComplement("foreground MBR covers the entire frame")
    row, col = best_pos
    zone = best
    if row == 1:    # west / east cell: everything beyond that MBR edge
        zone = Rect(0 if col == 0 else best.x0, 0,
                    best.x1 if col == 0 else w, h)
    elif col == 1:  # north / south cell
        zone = Rect(0, 0 if row == 0 else best.y0,
                    w, best.y1 if row == 0 else h)
    return TargetEstimate(method="mbr", region=best, center=best.center,
                          zone=zone)


def edge_mask(codes: np.ndarray) -> np.ndarray:
    """A pixel is an edge pixel if any 4-neighbor has a different code."""
    e = np.zeros(codes.shape, dtype=bool)
    e[:, :-1] |= codes[:, :-1] != codes[:, 1:]
    e[:, 1:] |= codes[:, 1:] != codes[:, :-1]
    e[:-1, :] |= codes[:-1, :] != codes[1:, :]
    e[1:, :] |= codes[1:, :] != codes[:-1, :]
    return e


def _label8(mask: np.ndarray) -> tuple[np.ndarray, int]:
    """8-connected labeling: a 4-connected pass, then merge labels that
    touch diagonally. Edge segments are thin, so this comes up constantly.
    """
    labels, n = kernels.label_components(mask)
    if n == 0:
        return labels, 0
    parent = list(range(n + 1))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for a, b in (
        (labels[:-1, :-1], labels[1:, 1:]),   # SE diagonal
        (labels[:-1, 1:], labels[1:, :-1]),   # SW diagonal
    ):
        both = (a > 0) & (b > 0)
        if not both.any():
            continue
        pairs = np.unique(np.stack([a[both], b[both]], axis=1), axis=0)
        for la, lb in pairs:
            ra, rb = find(int(la)), find(int(lb))
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)

    lut = np.zeros(n + 1, dtype=np.int32)
    remap: dict[int, int] = {}
    for lab in range(1, n + 1):
        root = find(lab)
        if root not in remap:
            remap[root] = len(remap) + 1
        lut[lab] = remap[root]
    return lut[labels], len(remap)


def detect_target_edge(background: Background,
                       params: VisionParams) -> TargetEstimate:
    """Mean of surviving edge-segment centroids.

    Sensitive to strong background structure away from the target (texts);
    the per-game segment-size threshold is deliberately exposed.
    """
    edges = edge_mask(background.codes)
    labels, n = _label8(edges)
    if n == 0:
        raise NoEdges("background has no edges")
    areas = np.bincount(labels.ravel(), minlength=n + 1)
    ys, xs = np.nonzero(labels)
    labs = labels[ys, xs]
    sum_x = np.bincount(labs, weights=xs, minlength=n + 1)
    sum_y = np.bincount(labs, weights=ys, minlength=n + 1)
    keep = areas >= params.edge_min_segment
    keep[0] = False
    if not keep.any():
        raise NoEdges("no edge segment above the size threshold")
    cx = int(round((sum_x[keep] / areas[keep]).mean()))
    cy = int(round((sum_y[keep] / areas[keep]).mean()))
    region = _mask_bbox(keep[labels])
    return TargetEstimate(method="edge", region=region, center=(cx, cy))


def detect_target_exclusion(background: Background,
                            masks: list[np.ndarray]) -> TargetEstimate:
    """Largest connected remainder after removing accumulated foreground."""
    h, w = background.shape
    remainder = np.ones((h, w), dtype=bool)
    for m in masks:
        remainder &= ~m
    labels, n = kernels.label_components(remainder)
    if n == 0:
        # zero remainder is impossible unless foreground covered everything
        center = (w // 2, h // 2)
        return TargetEstimate(method="exclusion", region=Rect(0, 0, w, h),
                              center=center, region_mask=remainder)
    areas = np.bincount(labels.ravel(), minlength=n + 1)
    areas[0] = 0
    lab = int(areas.argmax())
    region_mask = labels == lab
    ys, xs = np.nonzero(region_mask)
    center = (int(round(xs.mean())), int(round(ys.mean())))
    return TargetEstimate(method="exclusion", region=_mask_bbox(region_mask),
                          center=center, region_mask=region_mask)


def histogram_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Normalized L1 distance between two 64-bin histograms, in [0, 1]."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != (64,) or b.shape != (64,):
        raise ValueError("histograms must be 64-bin")
    sa, sb = a.sum(), b.sum()
    if sa == 0 or sb == 0:
        return 1.0 if sa != sb else 0.0
    return float(0.5 * np.abs(a / sa - b / sb).sum())
