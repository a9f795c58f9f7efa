"""Challenge service: sessions, streamed frames, interaction events."""

from .protocol import PROTOCOL, ALLOWED_RESPONSE_KEYS
from .server import ChallengeService, ServiceConfig
from .client import WireClient, WireDriver

__all__ = ["PROTOCOL", "ALLOWED_RESPONSE_KEYS", "ChallengeService",
           "ServiceConfig", "WireClient", "WireDriver"]
