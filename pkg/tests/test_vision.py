"""Vision stack against constructed scenes and the engine oracle."""

import numpy as np
import pytest

from dcglab import vision
from dcglab.assets import GameType
from dcglab.engine import GameConfig, new_game
from dcglab.vision import (Background, NoComplement, NoEdges, VisionParams,
                           dequantize, detect_target_edge,
                           detect_target_exclusion, detect_target_mbr,
                           extract_foreground, histogram_distance,
                           learn_background, quantize, sample_indices,
                           select_object_frame)

P = VisionParams()


# -- quantization -------------------------------------------------------------

def test_quantize_examples():
    assert quantize(np.array([255, 255, 255], np.uint8).reshape(1, 1, 3))[0, 0] == 63
    assert quantize(np.array([0, 0, 0], np.uint8).reshape(1, 1, 3))[0, 0] == 0
    # bit-shift oracle: 200 >> 6 = 3, 100 >> 6 = 1, 50 >> 6 = 0 -> 0b110100
    assert quantize(np.array([200, 100, 50], np.uint8).reshape(1, 1, 3))[0, 0] == 0b110100 == 52


def test_quantize_dequantize_idempotent():
    codes = np.arange(64, dtype=np.uint8).reshape(8, 8)
    assert np.array_equal(quantize(dequantize(codes)), codes)


def test_quantize_brute_force_oracle():
    rng = np.random.default_rng(0)
    rgb = rng.integers(0, 256, size=(10, 10, 3)).astype(np.uint8)
    got = quantize(rgb)
    for y in range(10):
        for x in range(10):
            r, g, b = (int(v) for v in rgb[y, x])
            assert got[y, x] == (r >> 6) * 16 + (g >> 6) * 4 + (b >> 6)


# -- background learning --------------------------------------------------------

def test_identical_frames_learn_exact_background():
    frame = np.random.default_rng(1).integers(0, 64, (20, 30)).astype(np.uint8)
    bg = learn_background(np.stack([frame] * 40))
    assert np.array_equal(bg.codes, frame)
    assert (bg.confidence == 1.0).all()


def test_minority_occlusion_recovers_scene():
    scene, obj = 5, 9
    stack = np.full((40, 4, 4), scene, dtype=np.uint8)
    stack[:10, 1, 1] = obj          # covered 10/40 frames
    bg = learn_background(stack)
    assert bg.codes[1, 1] == scene
    assert bg.confidence[1, 1] == 30 / 40


def test_majority_occlusion_makes_pseudo_patch():
    scene, obj = 5, 9
    stack = np.full((40, 4, 4), scene, dtype=np.uint8)
    stack[:25, 1, 1] = obj          # covered 25/40 frames: hovering object
    bg = learn_background(stack)
    assert bg.codes[1, 1] == obj    # learned wrong: the pseudo patch


def test_dimension_mismatch_rejected():
    bg = learn_background(np.zeros((40, 4, 4), np.uint8))
    with pytest.raises(ValueError):
        vision.foreground_mask(np.zeros((5, 5), np.uint8), bg)


# -- foreground extraction ------------------------------------------------------

def _engine_scene(game=GameType.SHIPS, count=4, seed=3, frames=0):
    s = new_game(GameConfig(game_type=game, fps=20, object_count=count, seed=seed))
    if frames:
        s.advance(frames)
    gt = s.ground_truth()
    return s, gt, Background(codes=gt.background,
                             confidence=np.ones_like(gt.background, float))


def test_frame_equal_background_gives_empty():
    _, gt, bg = _engine_scene()
    assert extract_foreground(gt.background, bg, P) == []


@pytest.mark.parametrize("game", list(GameType))
def test_extraction_matches_ground_truth(game):
    s, gt, bg = _engine_scene(game=game, count=4, seed=8, frames=25)
    gt = s.ground_truth()
    objs = extract_foreground(s.render().codes, bg, P)
    assert len(objs) == 4
    got_boxes = {(o.bbox.x0, o.bbox.y0, o.bbox.x1, o.bbox.y1) for o in objs}
    want = set()
    for oid, mask in gt.object_masks.items():
        ys, xs = np.nonzero(mask)
        want.add((xs.min(), ys.min(), xs.max() + 1, ys.max() + 1))
    assert got_boxes == want
    for o in objs:
        assert o.histogram.sum() == o.area
        assert o.area >= P.min_component_size


def test_overlapping_objects_merge():
    s, gt, bg = _engine_scene(seed=5)
    s._pos_x[1] = s._pos_x[0] + int(s._w[0]) - 4   # force an overlap
    s._pos_y[1] = s._pos_y[0]
    objs = extract_foreground(s.render().codes, bg, P)
    assert len(objs) == 3    # 4 objects, two merged into one component


def test_small_components_discarded_as_noise():
    bg = Background(codes=np.zeros((20, 20), np.uint8),
                    confidence=np.ones((20, 20)))
    frame = np.zeros((20, 20), np.uint8)
    frame[2, 2] = 7                  # 1 px speckle: below the threshold
    frame[10:14, 10:14] = 9          # 16 px block: survives
    objs = extract_foreground(frame, bg, VisionParams(min_component_size=16))
    assert len(objs) == 1 and objs[0].area == 16


# -- object frame selection -----------------------------------------------------

def test_sample_indices_formula():
    assert sample_indices(40, 6) == [0, 7, 15, 23, 31, 39]
    assert sample_indices(40, 5) == [0, 9, 19, 29, 39]


def test_select_object_frame_prefers_more_components():
    s, gt, bg = _engine_scene(seed=5)
    good = s.render().codes
    s2, _, _ = _engine_scene(seed=5)
    s2._pos_x[1] = s2._pos_x[0] + int(s2._w[0]) - 4
    s2._pos_y[1] = s2._pos_y[0]
    merged = s2.render().codes
    idx, objs = select_object_frame(np.stack([merged, good, good]), bg, P)
    assert idx == 1 and len(objs) == 4


def test_select_object_frame_tie_breaks_earliest():
    _, gt, bg = _engine_scene(seed=5)
    frame = gt.background
    idx, objs = select_object_frame(np.stack([frame, frame, frame]), bg, P)
    assert idx == 0 and objs == []


# -- target detectors -----------------------------------------------------------

def test_mbr_constructed_geometry():
    bg = Background(codes=np.zeros((130, 360), np.uint8),
                    confidence=np.ones((130, 360)))
    masks = []
    for x in (20, 120, 180):
        m = np.zeros((130, 360), bool)
        m[20:40, x:x + 20] = True
        m[100:118, x + 5:x + 22] = True
        masks.append(m)
    est = detect_target_mbr(bg, masks)
    # objects confined to x < 200: the east cell wins
    assert est.region.x0 == 202
    assert est.center[0] > 202


def test_mbr_full_frame_degenerate():
    full = np.ones((130, 360), bool)
    bg = Background(codes=np.zeros((130, 360), np.uint8),
                    confidence=np.ones((130, 360)))
    with pytest.raises(NoComplement):
        detect_target_mbr(bg, [full])


@pytest.mark.parametrize("game", list(GameType))
def test_mbr_on_default_games(game):
    """With an exactly learned background, the detected center falls inside
    the true target region."""
    s, gt, bg = _engine_scene(game=game, count=5, seed=12)
    masks = []
    for k in range(6):
        masks.append(vision.foreground_mask(s.render().codes, bg))
        s.advance(31)
    est = detect_target_mbr(bg, masks)
    assert gt.target_region.contains(*est.center), (game, est)


def test_edge_detector_single_sprite():
    codes = np.full((60, 80), 40, np.uint8)
    codes[20:34, 30:44] = 9
    bg = Background(codes=codes, confidence=np.ones_like(codes, float))
    est = detect_target_edge(bg, VisionParams(edge_min_segment=10))
    assert abs(est.center[0] - 36.5) <= 2
    assert abs(est.center[1] - 26.5) <= 2


def test_edge_detector_pulled_by_text():
    codes = np.full((60, 200), 40, np.uint8)
    codes[20:34, 20:34] = 9                       # the real target marker
    for k in range(5):                             # synthetic text strokes
        codes[10 + 8 * k // 4, 150:190] = 2
    bg = Background(codes=codes, confidence=np.ones_like(codes, float))
    est = detect_target_edge(bg, VisionParams(edge_min_segment=10))
    assert est.center[0] > 40   # dragged toward the strokes: documented failure


def test_edge_detector_blank_background():
    bg = Background(codes=np.full((40, 40), 7, np.uint8),
                    confidence=np.ones((40, 40)))
    with pytest.raises(NoEdges):
        detect_target_edge(bg, P)


def test_exclusion_fast_sweep_hits_target():
    """Objects fast enough to sweep the whole moving area leave only the
    target band uncovered."""
    s, gt, bg = _engine_scene(game=GameType.SHIPS, count=6, seed=2)
    m = s.layout.moving_area
    masks = []
    for x in range(m.x0, m.x1, 40):           # accumulated footprints tile it
        sweep = np.zeros(bg.codes.shape, bool)
        sweep[m.y0:m.y1, x:min(x + 40, m.x1)] = True
        masks.append(sweep)
    est = detect_target_exclusion(bg, masks)
    assert gt.target_region.contains(*est.center)


def test_exclusion_short_sweep_misses():
    s, gt, bg = _engine_scene(game=GameType.SHIPS, count=4, seed=2)
    masks = [vision.foreground_mask(s.render().codes, bg)]   # single frame
    est = detect_target_exclusion(bg, masks)
    # documented weakness: uncovered moving area folds into the estimate
    assert not gt.target_region.contains(*est.center)


def test_exclusion_zero_foreground():
    bg = Background(codes=np.zeros((20, 30), np.uint8),
                    confidence=np.ones((20, 30)))
    est = detect_target_exclusion(bg, [np.zeros((20, 30), bool)])
    assert est.region.area == 20 * 30
    # mean of pixel coordinates 0..29 / 0..19: (14.5, 9.5) rounded
    assert est.center in ((14, 10), (15, 10), (14, 9), (15, 9))


# -- histogram matching -----------------------------------------------------------

def test_histogram_distance_bounds():
    a = np.zeros(64); a[3] = 10
    b = np.zeros(64); b[9] = 4
    assert histogram_distance(a, a) == 0.0
    assert histogram_distance(a, b) == 1.0
    assert histogram_distance(a, 2.5 * a) == 0.0   # scale invariant


def test_same_sprite_two_positions_close():
    s, gt, bg = _engine_scene(game=GameType.SHAPES, seed=9)
    objs0 = extract_foreground(s.render().codes, bg, P)
    s.advance(60)
    objs1 = extract_foreground(s.render().codes, bg, P)
    assert len(objs0) == len(objs1) == 4
    for a in objs0:
        best = min(histogram_distance(a.histogram, b.histogram) for b in objs1)
        assert best < 0.05
