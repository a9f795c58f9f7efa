"""Probing: discover answer objects and their sub-targets by dragging.

The probable target area is split into a 3x3 block grid. Matches are NOT
read from the game's star/cross feedback; they are inferred by watching the
summed foreground area (outside the detected target region) shrink by at
least half the dragged object's area, which is what a parked answer object
looks like to the vision stack.

Probing survives drag caps and timeouts by restarting the challenge and
re-identifying objects by histogram, resuming where it left off.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .. import vision
from ..geometry import Rect
from ..vision import Background, TargetEstimate, VisionParams, histogram_distance
from .drivers import ChallengeDriver
from .knowledge import Binding, KnowledgeBase, KnowledgeRecord, game_key, identify


class ProbeError(Exception):
    pass


class TargetDetectionFailed(ProbeError):
    pass


class ProbeExhausted(ProbeError):
    """Every (object, drop point) pair tried without finding a binding."""


@dataclass
class ProbeStats:
    drags: int = 0
    runs: int = 0
    learn_seconds: float = 0.0
    probe_seconds: float = 0.0
    objects_seen: int = 0


@dataclass
class _Signature:
    histogram: np.ndarray
    area: int
    tried: set = field(default_factory=set)  # drop points already tried
    is_answer: bool = False
    is_noise: bool = False


@dataclass
class _Group:
    """One distinct drop point: a visible sub-target marker, or the whole
    region when the target area carries no markers."""
    index: int
    drop_point: tuple[int, int]   # one of the 9 block centroids
    bound: bool = False


def block_centroids(region: Rect) -> list[tuple[int, int]]:
    """Centroids of the 3x3 equal blocks of a region, row-major."""
    xs = [region.x0 + (2 * c + 1) * region.width // 6 for c in range(3)]
    ys = [region.y0 + (2 * r + 1) * region.height // 6 for r in range(3)]
    return [(x, y) for y in ys for x in xs]


def _marker_centroids(background: Background, region: Rect,
                      params: VisionParams) -> list[tuple[int, int]]:
    """Visible structure inside the target region: candidate sub-targets.

    Connected components of non-modal pixels, filtered to marker-like
    blobs (bounded area, low aspect) so band seams don't count.
    """
    sub = background.codes[region.y0:region.y1, region.x0:region.x1]
    if sub.size == 0:
        return []
    modal = int(np.bincount(sub.ravel(), minlength=64).argmax())
    from .. import kernels
    labels, n = kernels.label_components(sub != modal)
    out = []
    for lab in range(1, n + 1):
        ys, xs = np.nonzero(labels == lab)
        area = len(ys)
        if area < params.min_component_size or area > 900:
            continue
        w = xs.max() - xs.min() + 1
        h = ys.max() - ys.min() + 1
        if max(w, h) > 3 * min(w, h):
            continue
        out.append((region.x0 + int(round(xs.mean())),
                    region.y0 + int(round(ys.mean()))))
    out.sort(key=lambda c: (c[1], c[0]))
    return out


def _nearest_block(point: tuple[int, int],
                   blocks: list[tuple[int, int]]) -> tuple[int, int]:
    return min(blocks, key=lambda b: (b[0] - point[0]) ** 2 + (b[1] - point[1]) ** 2)


def _make_groups(background: Background, target: TargetEstimate,
                 blocks: list[tuple[int, int]],
                 params: VisionParams) -> list[_Group]:
    markers = _marker_centroids(background, target.region, params)
    if not markers:
        # empty target area: any block works, aim at the region center
        return [_Group(index=0, drop_point=blocks[4])]
    points = [_nearest_block(m, blocks) for m in markers]
    # row-major over the drop blocks
    order = sorted(range(len(points)), key=lambda i: blocks.index(points[i]))
    return [_Group(index=k, drop_point=points[order[k]]) for k in range(len(order))]


def collect_frames(driver: ChallengeDriver, count: int,
                   interval: float) -> np.ndarray:
    frames = []
    for i in range(count):
        codes, status, _ = driver.get_frame()
        frames.append(codes)
        if i + 1 < count:
            driver.sleep(interval)
    return np.stack(frames)


def learn_from_driver(driver: ChallengeDriver,
                      params: VisionParams) -> tuple[Background, list[np.ndarray], list]:
    """Learn the background and extract sample-frame objects and masks."""
    stack = collect_frames(driver, params.learn_frames, params.sample_interval)
    background = vision.learn_background(stack)
    idxs = vision.sample_indices(params.learn_frames, params.object_frames)
    samples = stack[idxs]
    masks = [vision.foreground_mask(f, background) for f in samples]
    _, objects = vision.select_object_frame(samples, background, params)
    return background, masks, objects


def _extract_live(driver: ChallengeDriver, background: Background,
                  target: TargetEstimate, params: VisionParams):
    """Free foreground components: everything except parked answers.

    A component counts as parked when it sits on the target-band side of
    the scene (the detector's zone) AND it holds still across two frames.
    Motion is the discriminator because free objects advance every frame,
    while the zone alone would also swallow objects sliding along the
    moving-area edge next to the band.
    """
    before, status, _ = driver.get_frame()
    if status != "in_progress":
        return [], status
    driver.sleep(2.0 / driver.fps)
    codes, status, _ = driver.get_frame()
    objs = vision.extract_foreground(codes, background, params)
    zone = target.parked_zone()
    in_zone = [o for o in objs if zone.contains(*o.centroid)]
    if in_zone:
        prev = vision.extract_foreground(before, background, params)
        parked = set()
        for o in in_zone:
            for p in prev:
                if (abs(p.centroid[0] - o.centroid[0]) <= 1
                        and abs(p.centroid[1] - o.centroid[1]) <= 1
                        and histogram_distance(p.histogram, o.histogram) <= 0.05):
                    parked.add(id(o))
                    break
        objs = [o for o in objs if id(o) not in parked]
    return objs, status


def _match_signature(objs, sig: _Signature, threshold: float):
    best, best_d = None, threshold
    for o in objs:
        d = histogram_distance(o.histogram, sig.histogram)
        if d <= best_d:
            best, best_d = o, d
    return best


def probe_game(driver: ChallengeDriver, params: VisionParams | None = None,
               kb: KnowledgeBase | None = None, max_runs: int = 15,
               label: str = "") -> tuple[KnowledgeRecord, ProbeStats]:
    """Learn one game end to end; may span several runs of the challenge.

    Returns the (possibly partial) record; raises ProbeExhausted if every
    pair was tried and nothing ever matched, TargetDetectionFailed if no
    target estimate could be formed.
    """
    params = params or VisionParams()
    stats = ProbeStats()
    record: KnowledgeRecord | None = None
    groups: list[_Group] | None = None
    signatures: list[_Signature] = []
    complete = False

    while stats.runs < max_runs and not complete:
        stats.runs += 1
        codes, status, _ = driver.get_frame()
        if status != "in_progress":
            driver.restart()
            codes, status, _ = driver.get_frame()

        if record is None and kb is not None:
            known = identify(kb, codes)
            if known is not None:
                record = known

        if record is None:
            t0 = driver.elapsed if hasattr(driver, "elapsed") else 0.0
            try:
                background, masks, objects = learn_from_driver(driver, params)
                target = vision.detect_target_mbr(background, masks)
            except (vision.VisionError, ValueError) as exc:
                raise TargetDetectionFailed(str(exc)) from exc
            stats.learn_seconds += (driver.elapsed - t0) if hasattr(driver, "elapsed") else 0.0
            blocks = block_centroids(target.region)
            record = KnowledgeRecord(
                game_key=game_key(background.codes), background=background,
                target=target, probe_blocks=blocks, label=label)
            if kb is not None:
                kb.put(record)
        else:
            # background already known; a short burst re-finds the objects
            _, objects = vision.select_object_frame(
                collect_frames(driver, params.object_frames, params.sample_interval),
                record.background, params)

        if groups is None:
            groups = _make_groups(record.background, record.target,
                                  record.probe_blocks, params)
            for b in record.bindings:  # resuming an earlier record
                for g in groups:
                    if g.drop_point == b.centroid:
                        g.bound = True
            if record.complete or all(g.bound for g in groups):
                complete = record.complete = True
                break

        # fold this run's objects into the signature table
        for o in objects:
            if record.target.parked_zone().contains(*o.centroid):
                continue
            hit = None
            for s in signatures:
                if histogram_distance(o.histogram, s.histogram) <= params.match_threshold:
                    hit = s
                    break
            if hit is None:
                signatures.append(_Signature(histogram=o.histogram.copy(),
                                             area=o.area))
        stats.objects_seen = max(stats.objects_seen, len(signatures))

        complete = _probe_session(driver, record, groups, signatures,
                                  params, stats)
        if complete:
            record.complete = True
        elif _exhausted(signatures, groups):
            break
        else:
            driver.restart()

    if record is None:
        raise TargetDetectionFailed("no target estimate formed")
    if not record.bindings:
        raise ProbeExhausted("tried every object on every block: no match")
    if kb is not None:
        kb.put(record)
    return record, stats


def _exhausted(signatures: list[_Signature], groups: list[_Group] | None) -> bool:
    if groups is None:
        return False
    open_groups = {g.index for g in groups if not g.bound}
    if not open_groups:
        return True
    return all(s.is_answer or open_groups <= s.tried for s in signatures)


def _probe_session(driver, record, groups, signatures, params, stats) -> bool:
    """Drag until the run ends or pairs run out. True when the game
    completed (all answers parked)."""
    target = record.target
    settle = 1.0 / driver.fps
    stall = 0

    while True:
        objs, status = _extract_live(driver, record.background, target, params)
        if status != "in_progress":
            return status == "complete"

        pair = _next_pair(signatures, groups)
        if pair is None:
            return False
        sig, group = pair

        live = _match_signature(objs, sig, params.match_threshold)
        if live is None:
            # occluded or merged right now; wait it out, restart the run
            # if the scene never untangles
            stall += 1
            if stall > 30:
                return False
            driver.sleep(3 * settle)
            continue
        stall = 0

        pre_area = sum(o.area for o in objs)
        if not driver.click(live.centroid):
            driver.sleep(settle)
            continue
        sig.tried.add(group.index)
        stats.drags += 1
        outcome = driver.drop(group.drop_point)
        driver.sleep(settle)

        objs_after, status = _extract_live(driver, record.background, target, params)
        post_area = sum(o.area for o in objs_after)
        still_free = _match_signature(objs_after, sig, params.match_threshold)
        if pre_area - post_area >= live.area / 2 and still_free is None:
            # foreground shrank and the object is gone: it stayed parked
            sig.is_answer = True
            group.bound = True
            record.bindings.append(Binding(histogram=sig.histogram.copy(),
                                           area=sig.area,
                                           centroid=group.drop_point))
        elif all(g.bound or g.index in sig.tried for g in groups):
            sig.is_noise = True

        if status != "in_progress":
            return status == "complete"


def _next_pair(signatures, groups):
    """Next untried (object, drop point): biggest objects first, drop
    points in block row-major order; bound groups and resolved objects
    are skipped."""
    for sig in sorted(signatures, key=lambda s: -s.area):
        if sig.is_answer or sig.is_noise:
            continue
        for g in groups:
            if not g.bound and g.index not in sig.tried:
                return sig, g
    return None
