"""Shared dual-session vocabulary for the sender/receiver actors."""

from __future__ import annotations

from dataclasses import dataclass, field

VIDEO = "video"
AUDIO = "audio"
SESSIONS = (VIDEO, AUDIO)

RTP = "rtp"
RTCP = "rtcp"


@dataclass(frozen=True)
class Outgoing:
    """One datagram an actor wants on the wire."""

    session: str
    kind: str  # rtp | rtcp
    data: bytes
    meta: dict = field(default_factory=dict)
