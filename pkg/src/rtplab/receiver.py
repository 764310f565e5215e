"""RTP receiver actor: dual-session ingest, RTCP statistics, reception
reports on the return ports, jitter-buffered frame reconstruction, and
end-of-stream handling (BYE on both sessions or media-silence timeout).

The receiver knows which profile is being streamed (the testbed analogue of
caps exchanged out of band), so it can regenerate the exact fragment
geometry and expected digests and account for every sent frame.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from rtplab.errors import ProtocolError
from rtplab.jitterbuffer import JitterBuffer
from rtplab.kernels import derive_seed
from rtplab.media import (
    DEFAULT_MTU,
    FrameKind,
    MediaProfile,
    MediaTimeline,
    fragment_plan,
    generate_timeline,
    payload_capacity,
    reassemble_frame,
)
from rtplab.rtp import (
    PT_AUDIO,
    PT_VIDEO,
    Bye,
    ReceiverReport,
    RtpPacket,
    SenderReport,
    decode_rtcp_compound,
    decode_rtp,
    encode_rtcp,
)
from rtplab.sessions import AUDIO, RTCP, SESSIONS, VIDEO, Outgoing
from rtplab.stats import SourceStats

DEFAULT_LATENCY_MS = 200.0
DEFAULT_TIMEOUT_S = 10.0
DEFAULT_REPORT_INTERVAL_S = 5.0

EOS_BYE = "BYE"
EOS_TIMEOUT = "timeout"

RECEIVED_MANIFEST_COLUMNS = (
    "kind",
    "index",
    "rtp_timestamp",
    "size",
    "digest",
    "fragments_expected",
    "fragments_received",
    "complete",
    "digest_ok",
)


class _FrameSlot:
    __slots__ = ("plan", "fragments", "complete", "digest_ok", "received_digest")

    def __init__(self, plan):
        self.plan = plan
        self.fragments: dict[int, RtpPacket] = {}  # fragment ordinal -> packet
        self.complete = False
        self.digest_ok: bool | None = None
        self.received_digest: int | None = None

    def finalize(self) -> None:
        if not self.fragments:
            return
        result = reassemble_frame(
            self.fragments.values(), first_seq=self.plan.first_ext_seq & 0xFFFF
        )
        # the fragment plan knows the true count, so a lost tail (marker
        # included) can never masquerade as a complete frame
        self.complete = result.complete and len(self.fragments) == self.plan.n_fragments
        if self.complete:
            self.received_digest = result.digest
            self.digest_ok = result.digest == self.plan.frame.payload_digest


class FrameAssembler:
    """Tracks every expected frame of one session against released packets."""

    def __init__(self, plans):
        self.slots = [_FrameSlot(p) for p in plans]
        self._by_ts = {p.frame.rtp_timestamp: i for i, p in enumerate(plans)}
        self.unknown_packets = 0

    def feed(self, released) -> None:
        for ext_seq, pkt in released:
            idx = self._by_ts.get(pkt.timestamp)
            if idx is None:
                self.unknown_packets += 1
                continue
            slot = self.slots[idx]
            j = ext_seq - slot.plan.first_ext_seq
            if 0 <= j < slot.plan.n_fragments:
                slot.fragments[j] = pkt
            else:
                self.unknown_packets += 1

    def finalize(self) -> None:
        for slot in self.slots:
            slot.finalize()

    @property
    def frames_complete(self) -> int:
        return sum(1 for s in self.slots if s.complete)

    @property
    def frames_partial(self) -> int:
        return sum(1 for s in self.slots if not s.complete and s.fragments)

    @property
    def frames_missing(self) -> int:
        return sum(1 for s in self.slots if not s.fragments)


@dataclass
class SessionRx:
    kind: FrameKind
    payload_type: int
    clock_rate: int
    buffer: JitterBuffer
    assembler: FrameAssembler
    sources: dict[int, SourceStats] = field(default_factory=dict)
    primary_ssrc: int | None = None
    packets_received: int = 0
    payload_bytes: int = 0
    invalid_packets: int = 0
    eos_seen: bool = False
    final_sender_report: SenderReport | None = None

    def primary(self) -> SourceStats | None:
        if self.primary_ssrc is None:
            return None
        return self.sources[self.primary_ssrc]


@dataclass(frozen=True)
class SessionSummary:
    packets_received: int
    payload_bytes: int
    invalid_packets: int
    jitter_clock_units: int
    rfc_cumulative_lost: int
    sender_packet_count: int | None
    exact_lost: int | None
    frames_expected: int
    frames_complete: int
    frames_partial: int
    frames_missing: int
    late_discards: int
    duplicates: int
    eos_seen: bool

    @property
    def measured_loss_percent(self) -> float | None:
        """Loss against the sender's final report when the stream closed with
        BYE; RFC expected-vs-received arithmetic otherwise."""
        if self.sender_packet_count is not None and self.sender_packet_count > 0:
            return 100.0 * (self.exact_lost or 0) / self.sender_packet_count
        return None


@dataclass(frozen=True)
class ReceiverSummary:
    sessions: dict[str, SessionSummary]
    eos_kind: str
    end_time: float

    @property
    def frames_complete(self) -> int:
        return sum(s.frames_complete for s in self.sessions.values())

    @property
    def frames_partial(self) -> int:
        return sum(s.frames_partial for s in self.sessions.values())

    @property
    def late_discards(self) -> int:
        return sum(s.late_discards for s in self.sessions.values())

    @property
    def payload_bytes(self) -> int:
        return sum(s.payload_bytes for s in self.sessions.values())


class ReceiverActor:
    def __init__(
        self,
        profile: MediaProfile,
        media_seed: int,
        *,
        latency_ms: float = DEFAULT_LATENCY_MS,
        mtu: int = DEFAULT_MTU,
        report_interval_s: float = DEFAULT_REPORT_INTERVAL_S,
        timeout_s: float = DEFAULT_TIMEOUT_S,
        stats_writer=None,
        start_time: float = 0.0,
        timeline: MediaTimeline | None = None,
    ):
        if latency_ms < 0:
            raise ValueError("latency must be >= 0 ms")
        payload_capacity(mtu)  # validates the MTU floor
        self._stats = stats_writer
        self._timeout = timeout_s
        self._interval = report_interval_s
        self._latency = latency_ms / 1000.0
        timeline = timeline or generate_timeline(profile, media_seed)
        self.sessions: dict[str, SessionRx] = {
            VIDEO: SessionRx(
                kind=FrameKind.VIDEO,
                payload_type=PT_VIDEO,
                clock_rate=profile.video_clock_rate,
                buffer=JitterBuffer(self._latency),
                assembler=FrameAssembler(fragment_plan(timeline.video_frames, mtu)),
            ),
            AUDIO: SessionRx(
                kind=FrameKind.AUDIO,
                payload_type=PT_AUDIO,
                clock_rate=profile.audio_clock_rate,
                buffer=JitterBuffer(self._latency),
                assembler=FrameAssembler(fragment_plan(timeline.audio_frames, mtu)),
            ),
        }
        self._rx_ssrc = {
            s: derive_seed(media_seed, "rx-ssrc", s) & 0xFFFFFFFF for s in SESSIONS
        }
        self._last_activity = start_time
        self._next_rr = start_time + report_interval_s
        self.done = False
        self.eos_kind: str | None = None
        self.end_time = start_time

    # -- packet path ----------------------------------------------------------

    def on_packet(self, session: str, kind: str, data: bytes, now: float) -> list[Outgoing]:
        if self.done:
            return []
        if kind == RTCP:
            return self._on_rtcp(session, data, now)
        return self._on_rtp(session, data, now)

    def _on_rtp(self, session: str, data: bytes, now: float) -> list[Outgoing]:
        sess = self.sessions[session]
        try:
            pkt = decode_rtp(data)
        except ProtocolError:
            sess.invalid_packets += 1
            return []
        if pkt.payload_type != sess.payload_type:
            sess.invalid_packets += 1
            return []
        self._last_activity = now
        stats = sess.sources.get(pkt.ssrc)
        if stats is None:
            stats = SourceStats(pkt.ssrc, sess.clock_rate)
            sess.sources[pkt.ssrc] = stats
            if sess.primary_ssrc is None:
                sess.primary_ssrc = pkt.ssrc
        ext = stats.on_rtp(pkt.sequence, pkt.timestamp, now)
        sess.packets_received += 1
        sess.payload_bytes += len(pkt.payload)
        sess.buffer.add(ext, pkt.timestamp, now, (ext, pkt))
        sess.assembler.feed(sess.buffer.release_due(now))
        return []

    def _on_rtcp(self, session: str, data: bytes, now: float) -> list[Outgoing]:
        sess = self.sessions[session]
        try:
            packets = decode_rtcp_compound(data)
        except ProtocolError:
            sess.invalid_packets += 1
            return []
        self._last_activity = now
        for pkt in packets:
            if isinstance(pkt, SenderReport):
                stats = sess.sources.get(pkt.ssrc)
                if stats is None:
                    stats = SourceStats(pkt.ssrc, sess.clock_rate)
                    sess.sources[pkt.ssrc] = stats
                    if sess.primary_ssrc is None:
                        sess.primary_ssrc = pkt.ssrc
                stats.on_sender_report(pkt, now)
                sess.final_sender_report = pkt
                self._write_sr_row(session, pkt, now)
            elif isinstance(pkt, Bye):
                if not sess.eos_seen:
                    sess.eos_seen = True
                    if self._stats:
                        self._stats.row(now, session, "BYE", ssrc=pkt.ssrc)
                if all(s.eos_seen for s in self.sessions.values()):
                    self._complete(now, EOS_BYE)
        return []

    def _write_sr_row(self, session: str, sr: SenderReport, now: float) -> None:
        if not self._stats:
            return
        self._stats.row(
            now,
            session,
            "SR",
            ssrc=sr.ssrc,
            ntp_time=sr.ntp_time,
            rtp_time=sr.rtp_time,
            packet_count=sr.packet_count,
            octet_count=sr.octet_count,
        )

    # -- timers ---------------------------------------------------------------

    def on_wake(self, now: float) -> list[Outgoing]:
        if self.done:
            return []
        out: list[Outgoing] = []
        while self._next_rr <= now + 1e-12:
            tick = self._next_rr
            self._next_rr += self._interval
            out.extend(self._emit_rr(max(tick, now)))
        for sess in self.sessions.values():
            sess.assembler.feed(sess.buffer.release_due(now))
        if now - self._last_activity >= self._timeout - 1e-12:
            self._complete(now, EOS_TIMEOUT)
        return out

    def next_wakeup(self) -> float | None:
        if self.done:
            return None
        candidates = [self._next_rr, self._last_activity + self._timeout]
        for sess in self.sessions.values():
            deadline = sess.buffer.next_deadline()
            if deadline is not None:
                candidates.append(deadline)
        return min(candidates)

    def _emit_rr(self, now: float) -> list[Outgoing]:
        out = []
        for session in SESSIONS:
            sess = self.sessions[session]
            stats = sess.primary()
            if stats is None:
                continue
            report = stats.build_reception_report(now)
            if report is None:
                continue
            rr = ReceiverReport(ssrc=self._rx_ssrc[session], reports=(report,))
            out.append(
                Outgoing(
                    session=session,
                    kind=RTCP,
                    data=encode_rtcp(rr),
                    meta={"session": session, "kind": RTCP, "rtcp": "rr"},
                )
            )
            if self._stats:
                self._stats.row(
                    now,
                    session,
                    "RR",
                    ssrc=self._rx_ssrc[session],
                    source_ssrc=report.source_ssrc,
                    fraction_lost=report.fraction_lost,
                    cumulative_lost=report.cumulative_lost,
                    extended_highest_seq=report.extended_highest_seq,
                    interarrival_jitter=report.interarrival_jitter,
                    last_sr=report.last_sr,
                    delay_since_last_sr=report.delay_since_last_sr,
                )
        return out

    # -- completion -----------------------------------------------------------

    def _complete(self, now: float, kind: str) -> None:
        for sess in self.sessions.values():
            sess.assembler.feed(sess.buffer.flush())
            sess.assembler.finalize()
        self.done = True
        self.eos_kind = kind
        self.end_time = now

    def summary(self) -> ReceiverSummary:
        if not self.done:
            raise RuntimeError("receiver has not completed")
        sessions = {}
        for name, sess in self.sessions.items():
            stats = sess.primary()
            sender_count = (
                sess.final_sender_report.packet_count
                if sess.eos_seen and sess.final_sender_report is not None
                else None
            )
            rfc_lost = stats.cumulative_lost if stats else 0
            exact = None
            received = stats.packets_received if stats else 0
            if sender_count is not None:
                exact = sender_count - received
            sessions[name] = SessionSummary(
                packets_received=received,
                payload_bytes=sess.payload_bytes,
                invalid_packets=sess.invalid_packets,
                jitter_clock_units=stats.jitter.jitter if stats else 0,
                rfc_cumulative_lost=rfc_lost,
                sender_packet_count=sender_count,
                exact_lost=exact,
                frames_expected=len(sess.assembler.slots),
                frames_complete=sess.assembler.frames_complete,
                frames_partial=sess.assembler.frames_partial,
                frames_missing=sess.assembler.frames_missing,
                late_discards=sess.buffer.late_discards,
                duplicates=sess.buffer.duplicates,
                eos_seen=sess.eos_seen,
            )
        return ReceiverSummary(sessions=sessions, eos_kind=self.eos_kind or EOS_TIMEOUT, end_time=self.end_time)

    def write_received_manifest(self, path) -> None:
        """Sent-manifest mirror with completeness and digest verification."""
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(",".join(RECEIVED_MANIFEST_COLUMNS) + "\n")
            for session in SESSIONS:
                for slot in self.sessions[session].assembler.slots:
                    frame = slot.plan.frame
                    digest_ok = "" if slot.digest_ok is None else str(slot.digest_ok).lower()
                    fh.write(
                        f"{frame.kind.value},{frame.index},{frame.rtp_timestamp},"
                        f"{frame.size},{frame.payload_digest:016x},"
                        f"{slot.plan.n_fragments},{len(slot.fragments)},"
                        f"{str(slot.complete).lower()},{digest_ok}\n"
                    )
