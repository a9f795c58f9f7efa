"""The closed-loop attacker: probing, dictionary attacks, continuous
learning, and the random-guessing baseline."""

from .drivers import ChallengeDriver, LocalDriver
from .knowledge import Binding, KnowledgeBase, KnowledgeRecord, identify
from .probe import ProbeError, ProbeExhausted, ProbeStats, TargetDetectionFailed, probe_game
from .attack import AttackParams, AttackResult, attack, continuous_learn
from .guessing import (GuessModel, ProbeModel, analytic_guess_probability,
                       estimate_probe_success, probe_success_enumeration,
                       random_guess_attack)

__all__ = [
    "ChallengeDriver", "LocalDriver",
    "Binding", "KnowledgeBase", "KnowledgeRecord", "identify",
    "ProbeError", "ProbeExhausted", "ProbeStats", "TargetDetectionFailed", "probe_game",
    "AttackParams", "AttackResult", "attack", "continuous_learn",
    "GuessModel", "ProbeModel", "analytic_guess_probability",
    "estimate_probe_success", "probe_success_enumeration", "random_guess_attack",
]
