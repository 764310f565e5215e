"""RTP and RTCP wire formats.

Fixed 12-byte RTP header (V=2, no padding/extension/CSRC).  RTCP covers the
three packet types the testbed emits: sender report (200), receiver report
(201) and BYE (203), plus compound datagrams built by concatenation.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

from rtplab.errors import ProtocolError

RTP_HEADER_LEN = 12
RTP_VERSION = 2

PT_VIDEO = 96
PT_AUDIO = 97

RTCP_SR = 200
RTCP_RR = 201
RTCP_BYE = 203


class SequenceCursor:
    """Monotone 16-bit sequence counter, wrapping mod 2**16."""

    __slots__ = ("next_seq", "issued")

    def __init__(self, start: int = 0):
        self.next_seq = start & 0xFFFF
        self.issued = 0

    def take(self) -> int:
        seq = self.next_seq
        self.next_seq = (self.next_seq + 1) & 0xFFFF
        self.issued += 1
        return seq


@dataclass(frozen=True)
class RtpPacket:
    marker: bool
    payload_type: int
    sequence: int
    timestamp: int
    ssrc: int
    payload: bytes
    version: int = RTP_VERSION


def encode_rtp(packet: RtpPacket) -> bytes:
    if not packet.payload:
        raise ProtocolError("refusing to encode an RTP packet with empty payload")
    b0 = RTP_VERSION << 6
    b1 = ((1 if packet.marker else 0) << 7) | (packet.payload_type & 0x7F)
    return (
        struct.pack(
            "!BBHII",
            b0,
            b1,
            packet.sequence & 0xFFFF,
            packet.timestamp & 0xFFFFFFFF,
            packet.ssrc & 0xFFFFFFFF,
        )
        + packet.payload
    )


def decode_rtp(data: bytes) -> RtpPacket:
    if len(data) < RTP_HEADER_LEN:
        raise ProtocolError(f"RTP packet too short: {len(data)} bytes")
    b0, b1, seq, ts, ssrc = struct.unpack_from("!BBHII", data)
    version = b0 >> 6
    if version != RTP_VERSION:
        raise ProtocolError(f"unsupported RTP version {version}")
    if b0 & 0x3F:
        raise ProtocolError("padding/extension/CSRC not supported")
    return RtpPacket(
        marker=bool(b1 >> 7),
        payload_type=b1 & 0x7F,
        sequence=seq,
        timestamp=ts,
        ssrc=ssrc,
        payload=data[RTP_HEADER_LEN:],
    )


@dataclass(frozen=True)
class ReceptionReport:
    source_ssrc: int
    fraction_lost: int  # 8-bit fixed point, lost/expected * 256 for the interval
    cumulative_lost: int  # 24-bit signed
    extended_highest_seq: int
    interarrival_jitter: int
    last_sr: int
    delay_since_last_sr: int  # 1/65536 s units


@dataclass(frozen=True)
class SenderReport:
    ssrc: int
    ntp_time: int  # 64-bit, 32.32 fixed-point seconds
    rtp_time: int
    packet_count: int
    octet_count: int
    reports: tuple[ReceptionReport, ...] = field(default_factory=tuple)


@dataclass(frozen=True)
class ReceiverReport:
    ssrc: int
    reports: tuple[ReceptionReport, ...] = field(default_factory=tuple)


@dataclass(frozen=True)
class Bye:
    ssrc: int


RtcpPacket = SenderReport | ReceiverReport | Bye

_CUM_LOST_MAX = 0x7FFFFF
_CUM_LOST_MIN = -0x800000


def _pack_report(r: ReceptionReport) -> bytes:
    lost = min(max(r.cumulative_lost, _CUM_LOST_MIN), _CUM_LOST_MAX) & 0xFFFFFF
    return struct.pack(
        "!IIIIII",
        r.source_ssrc & 0xFFFFFFFF,
        ((r.fraction_lost & 0xFF) << 24) | lost,
        r.extended_highest_seq & 0xFFFFFFFF,
        r.interarrival_jitter & 0xFFFFFFFF,
        r.last_sr & 0xFFFFFFFF,
        r.delay_since_last_sr & 0xFFFFFFFF,
    )


def _unpack_report(data: bytes, offset: int) -> ReceptionReport:
    ssrc, word, ext, jitter, lsr, dlsr = struct.unpack_from("!IIIIII", data, offset)
    lost = word & 0xFFFFFF
    if lost & 0x800000:
        lost -= 0x1000000
    return ReceptionReport(
        source_ssrc=ssrc,
        fraction_lost=word >> 24,
        cumulative_lost=lost,
        extended_highest_seq=ext,
        interarrival_jitter=jitter,
        last_sr=lsr,
        delay_since_last_sr=dlsr,
    )


def _rtcp_header(pt: int, count: int, body_len: int) -> bytes:
    # length field is in 32-bit words minus one, header included
    words = (4 + body_len) // 4 - 1
    return struct.pack("!BBH", 0x80 | (count & 0x1F), pt, words)


def encode_rtcp(packet: RtcpPacket) -> bytes:
    if isinstance(packet, SenderReport):
        body = struct.pack(
            "!IQIII",
            packet.ssrc & 0xFFFFFFFF,
            packet.ntp_time & 0xFFFFFFFFFFFFFFFF,
            packet.rtp_time & 0xFFFFFFFF,
            packet.packet_count & 0xFFFFFFFF,
            packet.octet_count & 0xFFFFFFFF,
        ) + b"".join(_pack_report(r) for r in packet.reports)
        return _rtcp_header(RTCP_SR, len(packet.reports), len(body)) + body
    if isinstance(packet, ReceiverReport):
        body = struct.pack("!I", packet.ssrc & 0xFFFFFFFF) + b"".join(
            _pack_report(r) for r in packet.reports
        )
        return _rtcp_header(RTCP_RR, len(packet.reports), len(body)) + body
    if isinstance(packet, Bye):
        body = struct.pack("!I", packet.ssrc & 0xFFFFFFFF)
        return _rtcp_header(RTCP_BYE, 1, len(body)) + body
    raise ProtocolError(f"cannot encode {type(packet).__name__}")


def encode_compound(packets: list[RtcpPacket]) -> bytes:
    return b"".join(encode_rtcp(p) for p in packets)


def decode_rtcp_compound(data: bytes) -> list[RtcpPacket]:
    """Parse one datagram that may hold several concatenated RTCP packets."""
    out: list[RtcpPacket] = []
    offset = 0
    while offset < len(data):
        if len(data) - offset < 4:
            raise ProtocolError("truncated RTCP header")
        b0, pt, words = struct.unpack_from("!BBH", data, offset)
        if b0 >> 6 != RTP_VERSION:
            raise ProtocolError(f"unsupported RTCP version {b0 >> 6}")
        count = b0 & 0x1F
        total = (words + 1) * 4
        if offset + total > len(data):
            raise ProtocolError("RTCP length exceeds datagram")
        body = data[offset + 4 : offset + total]
        if pt == RTCP_SR:
            ssrc, ntp, rtp_time, pkts, octs = struct.unpack_from("!IQIII", body)
            reports = tuple(
                _unpack_report(body, 24 + 24 * i) for i in range(count)
            )
            out.append(SenderReport(ssrc, ntp, rtp_time, pkts, octs, reports))
        elif pt == RTCP_RR:
            (ssrc,) = struct.unpack_from("!I", body)
            reports = tuple(_unpack_report(body, 4 + 24 * i) for i in range(count))
            out.append(ReceiverReport(ssrc, reports))
        elif pt == RTCP_BYE:
            (ssrc,) = struct.unpack_from("!I", body)
            out.append(Bye(ssrc))
        else:
            raise ProtocolError(f"unsupported RTCP packet type {pt}")
        offset += total
    return out


def ntp_from_seconds(t: float) -> int:
    return int(t * 65536.0 * 65536.0) & 0xFFFFFFFFFFFFFFFF


def ntp_middle32(ntp: int) -> int:
    return (ntp >> 16) & 0xFFFFFFFF
