"""Layouts and sprites: multiplicities, palette separation, determinism."""

import numpy as np
import pytest

from dcglab.assets import (ANSWER_COUNT, GameType, LayoutError,
                           game_classes, generate_layout, sprite_pool)
from dcglab.vision import histogram_distance, quantize

ALL_GAMES = list(GameType)


@pytest.mark.parametrize("game", ALL_GAMES)
@pytest.mark.parametrize("count", [4, 5, 6])
def test_layout_multiplicity(game, count):
    layout, sprites = generate_layout(game, count, seed=0)
    r = ANSWER_COUNT[game]
    assert len(layout.answer_classes) == r
    assert len(layout.sub_targets) == r
    assert len(layout.noise_classes) == count - r
    assert layout.is_empty_target == (game is GameType.PARKING)


def test_answer_multiplicity_table():
    assert ANSWER_COUNT[GameType.SHIPS] == 1
    assert ANSWER_COUNT[GameType.SHAPES] == 2
    assert ANSWER_COUNT[GameType.ANIMALS] == 3
    assert ANSWER_COUNT[GameType.PARKING] == 1


@pytest.mark.parametrize("game", ALL_GAMES)
def test_band_does_not_touch_moving_area(game):
    layout, _ = generate_layout(game, 6, seed=0)
    assert not layout.band.intersects(layout.moving_area)
    for st in layout.sub_targets:
        assert layout.band.contains_rect(st.bbox)


@pytest.mark.parametrize("game", ALL_GAMES)
@pytest.mark.parametrize("seed", [0, 1, 5])
def test_dominant_codes_pairwise_distinct(game, seed):
    layout, sprites = generate_layout(game, 6, seed=seed)
    codes = [int(quantize(layout.canvas_rgb.reshape(1, 1, 3))[0, 0]),
             int(quantize(layout.band_rgb.reshape(1, 1, 3))[0, 0])]
    codes += [s.dominant_code for s in sprites.values()]
    assert len(set(codes)) == len(codes)


def test_layout_deterministic():
    a, sa = generate_layout(GameType.ANIMALS, 6, seed=9)
    b, sb = generate_layout(GameType.ANIMALS, 6, seed=9)
    assert a.slots == b.slots
    assert a.answer_classes == b.answer_classes
    assert np.array_equal(a.canvas_rgb, b.canvas_rgb)
    for k in sa:
        assert np.array_equal(sa[k].rgb, sb[k].rgb)


def test_different_instance_seeds_differ():
    canvases = set()
    for seed in range(8):
        layout, _ = generate_layout(GameType.SHIPS, 4, seed=seed)
        canvases.add(tuple(int(v) for v in layout.canvas_rgb))
    assert len(canvases) > 1


def test_object_count_validation():
    with pytest.raises(LayoutError):
        generate_layout(GameType.SHIPS, 3)
    with pytest.raises(LayoutError):
        generate_layout(GameType.SHIPS, 7)


def test_too_small_frame_rejected():
    with pytest.raises(LayoutError):
        generate_layout(GameType.SHIPS, 6, frame_width=60, frame_height=40)


def test_sprite_pool_canonical_and_errors():
    pool = sprite_pool(GameType.SHIPS, "ship", 1)
    layout, sprites = generate_layout(GameType.SHIPS, 4, seed=0)
    assert np.array_equal(pool[0].rgb, sprites["ship"].rgb)
    with pytest.raises(ValueError):
        sprite_pool(GameType.SHIPS, "ship", 0)
    with pytest.raises(KeyError):
        sprite_pool(GameType.SHIPS, "submarine", 1)


def test_sprite_pool_variants_distinct_from_noise():
    layout, sprites = generate_layout(GameType.SHIPS, 6, seed=0)
    pool = sprite_pool(GameType.SHIPS, "ship", 5)
    for v in pool:
        for cid in layout.noise_classes:
            d = histogram_distance(v.histogram(), sprites[cid].histogram())
            assert d > 0.5, (v.variant, cid, d)


@pytest.mark.parametrize("game", ALL_GAMES)
def test_variants_exceed_match_threshold(game):
    """A fresh variant must not be matched by the previous one's histogram."""
    answers, noise, _ = game_classes(game)
    for spec in answers:
        pool = sprite_pool(game, spec.class_id, 3)
        h = [p.histogram() for p in pool]
        assert histogram_distance(h[0], h[1]) > 0.15
        assert histogram_distance(h[0], h[2]) > 0.15
        assert len({p.dominant_code for p in pool}) == 1


def test_markers_only_for_marker_games():
    for game, expected in ((GameType.SHIPS, 0), (GameType.SHAPES, 2),
                           (GameType.ANIMALS, 3), (GameType.PARKING, 0)):
        layout, _ = generate_layout(game, 4, seed=0)
        markers = [st for st in layout.sub_targets if st.marker is not None]
        assert len(markers) == expected
