"""Reference baseline measurements for the four games.

Human-study numbers used as simulator defaults and as annotation columns
in reports: direct-play completion times, static-relay outcomes, and
solver reaction-time distributions, each as (mean, stddev) seconds or
plain rates.
"""

from .assets import GameType

# solver reaction time to the stimulus, all clicks (mean, stddev seconds)
REACTION_ALL_CLICKS = {
    GameType.SHIPS: (2.27, 0.34),
    GameType.ANIMALS: (2.58, 0.35),
    GameType.PARKING: (2.50, 0.51),
    GameType.SHAPES: (2.17, 0.20),
}

# reaction time over correct clicks only
REACTION_CORRECT_CLICKS = {
    GameType.SHIPS: (2.06, 0.17),
    GameType.ANIMALS: (1.85, 0.23),
    GameType.PARKING: (2.00, 0.31),
    GameType.SHAPES: (1.62, 0.11),
}

# direct play: completion time (mean, stddev) and per-click error rate
DIRECT_PLAY_TIME = {
    GameType.SHIPS: (4.51, 1.00),
    GameType.ANIMALS: (9.10, 0.96),
    GameType.PARKING: (4.37, 0.90),
    GameType.SHAPES: (5.26, 0.59),
}
DIRECT_PLAY_ERROR_PER_CLICK = {
    GameType.SHIPS: 0.04,
    GameType.ANIMALS: 0.05,
    GameType.PARKING: 0.09,
    GameType.SHAPES: 0.03,
}

# direct play grouped by object speed (fps) and by object count
DIRECT_PLAY_BY_FPS = {10: (5.74, 2.11, 0.06), 20: (4.90, 2.22, 0.05),
                      40: (6.53, 2.87, 0.04)}
DIRECT_PLAY_BY_COUNT = {6: (6.58, 1.69, 0.06), 5: (5.30, 2.28, 0.05),
                        4: (4.90, 2.22, 0.04)}

# static relay play: overall time, successful time, game error rate,
# per-click error rate
RELAY_OVERALL_TIME = {
    GameType.SHIPS: (30.92, 5.91),
    GameType.ANIMALS: (46.51, 5.05),
    GameType.PARKING: (28.16, 7.36),
    GameType.SHAPES: (26.19, 1.59),
}
RELAY_SUCCESSFUL_TIME = {
    GameType.SHIPS: (22.25, 5.04),
    GameType.ANIMALS: (37.93, 4.91),
    GameType.PARKING: (20.45, 5.04),
    GameType.SHAPES: (22.94, 1.74),
}
RELAY_ERROR_RATE = {
    GameType.SHIPS: 0.26,
    GameType.ANIMALS: 0.40,
    GameType.PARKING: 0.22,
    GameType.SHAPES: 0.09,
}
RELAY_ERROR_PER_CLICK = {
    GameType.SHIPS: 0.17,
    GameType.ANIMALS: 0.65,
    GameType.PARKING: 0.66,
    GameType.SHAPES: 0.56,
}

# attacker wall-clock figures, reported alongside simulated equivalents
ATTACK_TIME_AVG = 6.9
ATTACK_TIME_MAX = 9.3
BACKGROUND_LEARN_TIME_AVG = 30.9
