"""Dictionary attack and continuous learning.

A fresh challenge is identified by comparing the live frame with stored
backgrounds over their target regions; known answer objects are then found
by histogram match, click-and-held while "matching" runs, and dragged
straight to their recorded block centroids.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..vision import VisionParams, histogram_distance
from .drivers import ChallengeDriver
from .knowledge import Binding, KnowledgeBase, KnowledgeRecord, identify
from .probe import ProbeExhausted, _extract_live, _match_signature, _Signature


@dataclass
class AttackParams:
    vision: VisionParams = field(default_factory=VisionParams)
    hold_time: float = 0.25      # click-and-hold budget while matching runs
    locate_retries: int = 12     # frames worth of retries to find an object
    min_background_equality: float = 0.95


@dataclass
class AttackResult:
    outcome: str                 # success | locked_out | timed_out | unknown_challenge | match_failed
    drags_total: int = 0
    drags_correct: int = 0
    frames_elapsed: int = 0
    sim_seconds: float = 0.0
    learned_new: bool = False


class UnknownChallenge(Exception):
    pass


def _grouped_targets(record: KnowledgeRecord) -> dict[tuple[int, int], list[Binding]]:
    """Bindings per sub-target centroid (continuous learning appends
    alternate histograms for the same centroid)."""
    groups: dict[tuple[int, int], list[Binding]] = {}
    for b in record.bindings:
        groups.setdefault(b.centroid, []).append(b)
    return groups


def _drag_known(driver, record, centroid, candidates, params) -> tuple[bool, int]:
    """Find a foreground object matching any candidate histogram, hold it,
    drop it on the centroid. Returns (dragged, drags)."""
    target = record.target
    for _ in range(params.locate_retries):
        objs, status = _extract_live(driver, record.background, target,
                                     params.vision)
        if status != "in_progress":
            return False, 0
        live = None
        for b in candidates:
            live = _match_signature(objs, _Signature(histogram=b.histogram,
                                                     area=b.area),
                                    params.vision.match_threshold)
            if live is not None:
                break
        if live is None:
            # occluded or merged right now; the scene untangles itself
            driver.sleep(3.0 / driver.fps)
            continue
        if not driver.click(live.centroid):
            driver.sleep(1.0 / driver.fps)
            continue
        # click-and-hold: the object cannot move while features are matched
        if params.hold_time > 0:
            driver.sleep(params.hold_time)
        driver.drop(centroid)
        return True, 1
    return False, 0


def attack(driver: ChallengeDriver, kb: KnowledgeBase,
           params: AttackParams | None = None,
           learn: bool = True) -> AttackResult:
    """Solve a challenge from the dictionary; on unseen answer objects fall
    back to continuous learning over the known sub-targets."""
    params = params or AttackParams()
    result = AttackResult(outcome="unknown_challenge")

    codes, status, idx0 = driver.get_frame()
    record = identify(kb, codes, params.min_background_equality)
    if record is None:
        return result

    missing: list[tuple[int, int]] = []
    for centroid, bindings in _grouped_targets(record).items():
        dragged, n = _drag_known(driver, record, centroid, bindings, params)
        result.drags_total += n
        if not dragged:
            missing.append(centroid)

    if missing and learn:
        try:
            learned = continuous_learn(driver, kb, record, missing, params)
        except ProbeExhausted:
            learned = 0
        result.learned_new = learned > 0
        # retry the still-unmatched targets with the enlarged dictionary
        groups = _grouped_targets(record)
        for centroid in missing:
            _, status, _ = driver.get_frame()
            if status != "in_progress":
                break
            dragged, n = _drag_known(driver, record, centroid,
                                     groups.get(centroid, []), params)
            result.drags_total += n

    codes, status, idx = driver.get_frame()
    result.frames_elapsed = idx - idx0
    result.sim_seconds = result.frames_elapsed / driver.fps
    if status == "complete":
        result.outcome = "success"
        result.drags_correct = result.drags_total
    elif status == "locked_out":
        result.outcome = "locked_out"
    elif status == "timed_out":
        result.outcome = "timed_out"
    else:
        result.outcome = "match_failed"
    return result


def continuous_learn(driver: ChallengeDriver, kb: KnowledgeBase,
                     record: KnowledgeRecord, missing: list[tuple[int, int]],
                     params: AttackParams | None = None) -> int:
    """Learn unseen answer objects against already-known sub-targets only.

    Foreground objects that match no stored histogram are dragged to each
    missing centroid; a match is inferred from the foreground-area drop,
    exactly as during probing. Returns the number of new bindings.
    """
    params = params or AttackParams()
    target = record.target
    vp = params.vision
    known = [b.histogram for b in record.bindings]
    settle = 1.0 / driver.fps
    sigs: list[_Signature] = []
    learned = 0

    def unknown_objs():
        objs, status = _extract_live(driver, record.background, target, vp)
        out = [o for o in objs
               if all(histogram_distance(o.histogram, h) > vp.match_threshold
                      for h in known)]
        return out, status

    budget = params.locate_retries + 9 * len(missing) * 6
    while missing and budget > 0:
        budget -= 1
        objs, status = unknown_objs()
        if status != "in_progress":
            break
        for o in objs:
            if all(histogram_distance(o.histogram, s.histogram) > vp.match_threshold
                   for s in sigs):
                sigs.append(_Signature(histogram=o.histogram.copy(), area=o.area))

        pair = None
        for s in sorted(sigs, key=lambda s: -s.area):
            if s.is_answer or s.is_noise:
                continue
            untried = [c for c in missing if c not in s.tried]
            if untried:
                pair = (s, untried[0])
                break
        if pair is None:
            break
        sig, centroid = pair

        live = _match_signature(objs, sig, vp.match_threshold)
        if live is None:
            driver.sleep(settle)
            continue
        pre = sum(o.area for o in objs)
        if not driver.click(live.centroid):
            driver.sleep(settle)
            continue
        sig.tried.add(centroid)
        if params.hold_time > 0:
            driver.sleep(params.hold_time)
        driver.drop(centroid)
        driver.sleep(settle)
        objs_after, status = _extract_live(driver, record.background, target, vp)
        post = sum(x.area for x in objs_after)
        still_free = _match_signature(objs_after, sig, vp.match_threshold)
        if pre - post >= sig.area / 2 and still_free is None:
            sig.is_answer = True
            record.bindings.append(Binding(histogram=sig.histogram.copy(),
                                           area=sig.area, centroid=centroid))
            known.append(sig.histogram)
            missing.remove(centroid)
            learned += 1
        elif all(c in sig.tried for c in missing):
            sig.is_noise = True
    kb.put(record)
    if learned == 0 and missing:
        raise ProbeExhausted(
            "no unknown object matched any known sub-target")
    return learned
