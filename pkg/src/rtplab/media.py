"""Synthetic media source: deterministic timelines and RTP fragmentation.

Timelines stand in for pre-encoded source files.  Payload bytes are a seeded
pseudorandom function of (source_id, kind, index), so any party that knows
the profile can regenerate a frame's exact bytes and verify integrity by
digest without shipping real codec bitstreams.
"""

from __future__ import annotations

import hashlib
import math
import random
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Iterator

from rtplab.errors import ConfigurationError, ProtocolError
from rtplab.kernels import Rng, derive_seed
from rtplab.rtp import RTP_HEADER_LEN, RtpPacket, SequenceCursor

VIDEO_CLOCK_RATE = 90000
AUDIO_CLOCK_RATE = 16000
AUDIO_FRAME_MS = 20

DEFAULT_MTU = 1412  # 1400 bytes of payload after the 12-byte RTP header
MIN_MTU = 64

# Lognormal spread of video frame sizes around bitrate/fps, clamped to
# [0.2x, 5x] of the mean so fragment counts stay bounded.
_SIZE_SIGMA = 0.35
_SIZE_CLAMP_LO = 0.2
_SIZE_CLAMP_HI = 5.0


class Resolution(str, Enum):
    R720P = "720p"
    R1080P = "1080p"


class Tier(str, Enum):
    HQ = "HQ"
    MQ = "MQ"
    LQ = "LQ"


class FrameKind(str, Enum):
    VIDEO = "video"
    AUDIO = "audio"


@dataclass(frozen=True)
class MediaProfile:
    source_id: str
    resolution: Resolution
    tier: Tier
    video_bitrate_kbit: float
    video_fps: float
    audio_bitrate_kbit: float
    duration_s: float
    video_clock_rate: int = VIDEO_CLOCK_RATE
    audio_clock_rate: int = AUDIO_CLOCK_RATE
    audio_frame_ms: int = AUDIO_FRAME_MS

    def validate(self) -> None:
        if self.video_clock_rate != VIDEO_CLOCK_RATE:
            raise ConfigurationError("video clock rate is fixed at 90000 Hz")
        if self.audio_clock_rate != AUDIO_CLOCK_RATE:
            raise ConfigurationError("audio clock rate is fixed at 16000 Hz")
        if self.audio_frame_ms != AUDIO_FRAME_MS:
            raise ConfigurationError("audio frame cadence is fixed at 20 ms")
        for name in ("video_bitrate_kbit", "video_fps", "audio_bitrate_kbit", "duration_s"):
            if getattr(self, name) <= 0:
                raise ConfigurationError(f"{name} must be strictly positive")

    def clock_rate(self, kind: FrameKind) -> int:
        return self.video_clock_rate if kind is FrameKind.VIDEO else self.audio_clock_rate

    @property
    def audio_frame_bytes(self) -> int:
        # Constant-cadence audio: bitrate over one 20 ms frame.
        return max(1, int(round(self.audio_bitrate_kbit * 1000 * self.audio_frame_ms / 1000 / 8)))


def _mk(source_id: str, res: Resolution, tier: Tier, vkbit: float) -> MediaProfile:
    return MediaProfile(
        source_id=source_id,
        resolution=res,
        tier=tier,
        video_bitrate_kbit=vkbit,
        video_fps=25.0,
        audio_bitrate_kbit=24.0,
        duration_s=60.0,
    )


# Two resolutions x three quality tiers.  Bitrates are testbed defaults.
BUILTIN_PROFILES: dict[str, MediaProfile] = {
    p.source_id: p
    for p in (
        _mk("s01", Resolution.R1080P, Tier.HQ, 6000.0),
        _mk("s02", Resolution.R1080P, Tier.MQ, 4000.0),
        _mk("s03", Resolution.R1080P, Tier.LQ, 2000.0),
        _mk("s04", Resolution.R720P, Tier.HQ, 4000.0),
        _mk("s05", Resolution.R720P, Tier.MQ, 2000.0),
        _mk("s06", Resolution.R720P, Tier.LQ, 1000.0),
    )
}


def get_profile(source_id: str) -> MediaProfile:
    try:
        return BUILTIN_PROFILES[source_id]
    except KeyError:
        raise ConfigurationError(
            f"unknown profile {source_id!r}; built-ins: {', '.join(BUILTIN_PROFILES)}"
        ) from None


@dataclass(frozen=True)
class Frame:
    kind: FrameKind
    index: int
    capture_time: float
    rtp_timestamp: int
    size: int
    payload_digest: int


@dataclass(frozen=True)
class MediaTimeline:
    profile: MediaProfile
    seed: int
    video_frames: tuple[Frame, ...]
    audio_frames: tuple[Frame, ...]

    def frames(self, kind: FrameKind) -> tuple[Frame, ...]:
        return self.video_frames if kind is FrameKind.VIDEO else self.audio_frames


def frame_payload(source_id: str, kind: FrameKind, index: int, size: int) -> bytes:
    """Deterministic synthetic payload for one frame.

    Independent of the timeline seed: the receiver only needs the frame's
    identity (and the observed size) to regenerate the expected bytes.
    """
    seed = derive_seed("payload", source_id, kind.value, index)
    return random.Random(seed).randbytes(size)


def payload_digest(payload: bytes) -> int:
    return int.from_bytes(hashlib.blake2b(payload, digest_size=8).digest(), "big")


def expected_digest(source_id: str, kind: FrameKind, index: int, size: int) -> int:
    return payload_digest(frame_payload(source_id, kind, index, size))


def _video_size(rng: Rng, mean: float) -> int:
    # Box-Muller; 1 - random() keeps the log argument in (0, 1].
    u1 = 1.0 - rng.random()
    u2 = rng.random()
    z = math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)
    size = mean * math.exp(_SIZE_SIGMA * z - 0.5 * _SIZE_SIGMA * _SIZE_SIGMA)
    size = min(max(size, _SIZE_CLAMP_LO * mean), _SIZE_CLAMP_HI * mean)
    return max(1, int(round(size)))


def generate_timeline(profile: MediaProfile, seed: int) -> MediaTimeline:
    """Deterministic timeline for (profile, seed).

    Video frames land at i/fps with lognormal sizes around bitrate/fps;
    audio frames land every 20 ms with a fixed size.
    """
    profile.validate()

    size_rng = Rng(derive_seed(seed, profile.source_id, "video-sizes"))
    mean_size = profile.video_bitrate_kbit * 1000.0 / 8.0 / profile.video_fps

    n_video = int(round(profile.video_fps * profile.duration_s))
    video = []
    for i in range(n_video):
        t = i / profile.video_fps
        size = _video_size(size_rng, mean_size)
        video.append(
            Frame(
                kind=FrameKind.VIDEO,
                index=i,
                capture_time=t,
                rtp_timestamp=int(round(t * profile.video_clock_rate)) & 0xFFFFFFFF,
                size=size,
                payload_digest=expected_digest(profile.source_id, FrameKind.VIDEO, i, size),
            )
        )

    n_audio = int(round(profile.duration_s * 1000.0 / profile.audio_frame_ms))
    asize = profile.audio_frame_bytes
    audio = []
    for i in range(n_audio):
        t = i * profile.audio_frame_ms / 1000.0
        audio.append(
            Frame(
                kind=FrameKind.AUDIO,
                index=i,
                capture_time=t,
                rtp_timestamp=int(round(t * profile.audio_clock_rate)) & 0xFFFFFFFF,
                size=asize,
                payload_digest=expected_digest(profile.source_id, FrameKind.AUDIO, i, asize),
            )
        )

    return MediaTimeline(
        profile=profile, seed=seed, video_frames=tuple(video), audio_frames=tuple(audio)
    )


def payload_capacity(mtu: int) -> int:
    if mtu < MIN_MTU:
        raise ConfigurationError(f"mtu must be >= {MIN_MTU} bytes, got {mtu}")
    return mtu - RTP_HEADER_LEN


def packetize_frame(
    frame: Frame,
    payload: bytes,
    *,
    mtu: int,
    payload_type: int,
    ssrc: int,
    cursor: SequenceCursor,
) -> list[RtpPacket]:
    """Split a frame into RTP packets: shared timestamp, consecutive sequence
    numbers (mod 2**16), marker bit on the final fragment only."""
    cap = payload_capacity(mtu)
    if len(payload) != frame.size:
        raise ProtocolError(f"payload length {len(payload)} != frame size {frame.size}")
    n = max(1, math.ceil(frame.size / cap))
    packets = []
    for j in range(n):
        chunk = payload[j * cap : (j + 1) * cap]
        packets.append(
            RtpPacket(
                marker=(j == n - 1),
                payload_type=payload_type,
                sequence=cursor.take(),
                timestamp=frame.rtp_timestamp,
                ssrc=ssrc,
                payload=chunk,
            )
        )
    return packets


@dataclass(frozen=True)
class ReassembledFrame:
    complete: bool
    rtp_timestamp: int
    payload: bytes | None = None
    digest: int | None = None
    missing: int | None = None  # None when the gap size is unknowable


def reassemble_frame(
    fragments: Iterable[RtpPacket], *, first_seq: int | None = None
) -> ReassembledFrame:
    """Rebuild a frame from same-timestamp fragments.

    Complete when fragments form a contiguous sequence run ending in a marker
    (and starting at ``first_seq`` when the caller knows it).  Otherwise
    returns the missing-fragment count, or None when it cannot be inferred.
    """
    frags = list(fragments)
    if not frags:
        return ReassembledFrame(complete=False, rtp_timestamp=-1, missing=None)

    ts = frags[0].timestamp
    if any(p.timestamp != ts for p in frags):
        raise ProtocolError("fragments mix RTP timestamps")

    # A frame is far shorter than half the sequence space, so signed mod-2**16
    # offsets from an arbitrary fragment unwrap any crossing of 65535 -> 0.
    s0 = frags[0].sequence

    def soff(seq: int) -> int:
        off = (seq - s0) & 0xFFFF
        return off - 0x10000 if off >= 0x8000 else off

    base = soff(first_seq) if first_seq is not None else min(soff(p.sequence) for p in frags)
    rel = {soff(p.sequence) - base: p for p in frags}
    if min(rel) < 0:
        raise ProtocolError("fragment precedes the declared first sequence number")

    markers = [off for off, p in rel.items() if p.marker]
    if markers:
        end = max(markers)
        expected = end + 1
        missing = expected - sum(1 for off in rel if off <= end)
        if missing == 0 and len(rel) == expected:
            payload = b"".join(rel[off].payload for off in range(expected))
            return ReassembledFrame(
                complete=True, rtp_timestamp=ts, payload=payload, digest=payload_digest(payload)
            )
        return ReassembledFrame(complete=False, rtp_timestamp=ts, missing=max(missing, 0))

    # No marker seen: at least one trailing fragment is gone, count unknown.
    gaps = sum(1 for off in range(max(rel) + 1) if off not in rel)
    return ReassembledFrame(complete=False, rtp_timestamp=ts, missing=gaps if gaps else None)


@dataclass(frozen=True)
class FragmentPlan:
    """Where each frame of a session lands in sequence-number space."""

    frame: Frame
    first_ext_seq: int
    n_fragments: int


def fragment_plan(frames: Iterable[Frame], mtu: int) -> list[FragmentPlan]:
    """Deterministic packetization geometry for one session, seq starting at 0.

    Sequence numbers here are *extended* (not wrapped); the wire carries
    them mod 2**16.
    """
    cap = payload_capacity(mtu)
    plan = []
    cursor = 0
    for frame in frames:
        n = max(1, math.ceil(frame.size / cap))
        plan.append(FragmentPlan(frame=frame, first_ext_seq=cursor, n_fragments=n))
        cursor += n
    return plan


MANIFEST_COLUMNS = ("kind", "index", "rtp_timestamp", "size", "digest")


def write_manifest(timeline: MediaTimeline, path) -> None:
    """One CSV record per frame: kind, index, rtp_timestamp, size, digest."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(MANIFEST_COLUMNS) + "\n")
        for frame in (*timeline.video_frames, *timeline.audio_frames):
            fh.write(
                f"{frame.kind.value},{frame.index},{frame.rtp_timestamp},"
                f"{frame.size},{frame.payload_digest:016x}\n"
            )


def read_manifest(path) -> Iterator[dict]:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        for line in fh:
            row = dict(zip(header, line.strip().split(",")))
            row["index"] = int(row["index"])
            row["rtp_timestamp"] = int(row["rtp_timestamp"])
            row["size"] = int(row["size"])
            row["digest"] = int(row["digest"], 16)
            yield row
