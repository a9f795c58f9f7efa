"""Dynamic cognitive game (DCG) captcha laboratory.

A deterministic engine for four drag-and-drop game captchas, a vision-based
dictionary attacker, a static-relay attack simulator, and a challenge
service speaking a small documented wire protocol.
"""

__version__ = "0.1.0"
