"""RTP sender actor: dual sessions (video + audio), frame-paced media,
periodic sender reports, end-of-stream BYE.

The actor is substrate-blind: it exposes a timed action schedule that either
the virtual-clock simulation or the UDP runner drives.  All state advances
only through ``emit_due``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from rtplab.kernels import derive_seed
from rtplab.media import (
    DEFAULT_MTU,
    FrameKind,
    MediaTimeline,
    frame_payload,
    packetize_frame,
)
from rtplab.rtp import (
    PT_AUDIO,
    PT_VIDEO,
    Bye,
    ReceiverReport,
    SenderReport,
    SequenceCursor,
    decode_rtcp_compound,
    encode_compound,
    encode_rtp,
    ntp_from_seconds,
)
from rtplab.sessions import AUDIO, RTCP, RTP, SESSIONS, VIDEO, Outgoing

DEFAULT_REPORT_INTERVAL_S = 5.0
BYE_REPEATS = 3  # BYE compounds resent to survive lossy channels
BYE_SPACING_S = 0.1
BYE_OFFSET_S = 0.01


@dataclass
class SessionTx:
    kind: FrameKind
    payload_type: int
    ssrc: int
    clock_rate: int
    cursor: SequenceCursor = field(default_factory=SequenceCursor)
    packets_sent: int = 0
    octets_sent: int = 0
    frames_sent: int = 0
    rr_received: int = 0


@dataclass(frozen=True)
class SenderSummary:
    packets_sent: dict[str, int]
    octets_sent: dict[str, int]
    frames_sent: dict[str, int]
    rr_received: dict[str, int]
    end_time: float


class SenderActor:
    def __init__(
        self,
        timeline: MediaTimeline,
        *,
        mtu: int = DEFAULT_MTU,
        report_interval_s: float = DEFAULT_REPORT_INTERVAL_S,
    ):
        self._timeline = timeline
        self._mtu = mtu
        profile = timeline.profile
        seed = timeline.seed
        self.sessions: dict[str, SessionTx] = {
            VIDEO: SessionTx(
                kind=FrameKind.VIDEO,
                payload_type=PT_VIDEO,
                ssrc=derive_seed(seed, "tx-ssrc", VIDEO) & 0xFFFFFFFF,
                clock_rate=profile.video_clock_rate,
            ),
            AUDIO: SessionTx(
                kind=FrameKind.AUDIO,
                payload_type=PT_AUDIO,
                ssrc=derive_seed(seed, "tx-ssrc", AUDIO) & 0xFFFFFFFF,
                clock_rate=profile.audio_clock_rate,
            ),
        }
        self._schedule = self._build_schedule(report_interval_s)
        self._cursor = 0
        self._end_time = 0.0

    def _build_schedule(self, interval: float) -> list[tuple[float, int, tuple]]:
        entries: list[tuple[float, int, tuple]] = []
        for frame in self._timeline.video_frames:
            entries.append((frame.capture_time, 0, ("frame", VIDEO, frame)))
        for frame in self._timeline.audio_frames:
            entries.append((frame.capture_time, 1, ("frame", AUDIO, frame)))
        duration = self._timeline.profile.duration_s
        k = 1
        while k * interval <= duration:
            entries.append((k * interval, 2, ("sr",)))
            k += 1
        for j in range(BYE_REPEATS):
            entries.append((duration + BYE_OFFSET_S + j * BYE_SPACING_S, 3, ("bye",)))
        entries.sort(key=lambda e: (e[0], e[1]))
        return entries

    @property
    def done(self) -> bool:
        return self._cursor >= len(self._schedule)

    def next_time(self) -> float | None:
        if self.done:
            return None
        return self._schedule[self._cursor][0]

    def emit_due(self, now: float) -> list[Outgoing]:
        out: list[Outgoing] = []
        while not self.done and self._schedule[self._cursor][0] <= now + 1e-12:
            action = self._schedule[self._cursor][2]
            self._cursor += 1
            if action[0] == "frame":
                out.extend(self._emit_frame(action[1], action[2]))
            elif action[0] == "sr":
                out.extend(self._emit_sr(now, with_bye=False))
            else:
                out.extend(self._emit_sr(now, with_bye=True))
            self._end_time = max(self._end_time, now)
        return out

    def _emit_frame(self, session: str, frame) -> list[Outgoing]:
        tx = self.sessions[session]
        payload = frame_payload(
            self._timeline.profile.source_id, frame.kind, frame.index, frame.size
        )
        packets = packetize_frame(
            frame,
            payload,
            mtu=self._mtu,
            payload_type=tx.payload_type,
            ssrc=tx.ssrc,
            cursor=tx.cursor,
        )
        tx.frames_sent += 1
        out = []
        for pkt in packets:
            tx.packets_sent += 1
            tx.octets_sent += len(pkt.payload)
            meta = {
                "session": session,
                "kind": RTP,
                "seq": pkt.sequence,
                "ts": pkt.timestamp,
                "frame": frame.index,
            }
            out.append(Outgoing(session=session, kind=RTP, data=encode_rtp(pkt), meta=meta))
        return out

    def _emit_sr(self, now: float, *, with_bye: bool) -> list[Outgoing]:
        out = []
        for session in SESSIONS:
            tx = self.sessions[session]
            sr = SenderReport(
                ssrc=tx.ssrc,
                ntp_time=ntp_from_seconds(now),
                rtp_time=int(round(now * tx.clock_rate)) & 0xFFFFFFFF,
                packet_count=tx.packets_sent,
                octet_count=tx.octets_sent,
            )
            packets = [sr, Bye(tx.ssrc)] if with_bye else [sr]
            meta = {"session": session, "kind": RTCP, "rtcp": "sr+bye" if with_bye else "sr"}
            out.append(Outgoing(session=session, kind=RTCP, data=encode_compound(packets), meta=meta))
        return out

    def on_rtcp_return(self, session: str, data: bytes, now: float) -> None:
        """Receiver reports arriving on the session's RTCP return port."""
        for pkt in decode_rtcp_compound(data):
            if isinstance(pkt, ReceiverReport):
                self.sessions[session].rr_received += 1

    def summary(self) -> SenderSummary:
        return SenderSummary(
            packets_sent={s: self.sessions[s].packets_sent for s in SESSIONS},
            octets_sent={s: self.sessions[s].octets_sent for s in SESSIONS},
            frames_sent={s: self.sessions[s].frames_sent for s in SESSIONS},
            rr_received={s: self.sessions[s].rr_received for s in SESSIONS},
            end_time=self._end_time,
        )
