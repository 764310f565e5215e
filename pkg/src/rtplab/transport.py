"""Execution substrates for the sender/receiver actors.

Simulation mode drives both actors from a deterministic virtual-clock event
loop with an impairment channel per (direction, session).  UDP mode runs the
same actor code over real sockets on the standard port plan; the artifact
never impairs real traffic (that is the operating system's job, as on a
physical testbed).
"""

from __future__ import annotations

import heapq
import select
import socket
import time
from dataclasses import dataclass

from rtplab.errors import ConfigurationError, SimulationDeadlock
from rtplab.impairment import Channel, identity_channel
from rtplab.receiver import ReceiverActor, ReceiverSummary
from rtplab.sender import SenderActor, SenderSummary
from rtplab.sessions import RTCP, RTP, SESSIONS, VIDEO


@dataclass(frozen=True)
class SessionTopology:
    """Port plan: RTP + forward RTCP land on the receiver, return RTCP on the
    sender.  Video 5000/5001/5005, audio 5002/5003/5007 by default."""

    video_rtp: int = 5000
    video_rtcp: int = 5001
    video_rtcp_return: int = 5005
    audio_rtp: int = 5002
    audio_rtcp: int = 5003
    audio_rtcp_return: int = 5007

    def validate(self) -> None:
        ports = self.all_ports()
        if len(set(ports)) != len(ports):
            raise ConfigurationError(f"ports must be pairwise distinct: {ports}")

    def all_ports(self) -> tuple[int, ...]:
        return (
            self.video_rtp,
            self.video_rtcp,
            self.video_rtcp_return,
            self.audio_rtp,
            self.audio_rtcp,
            self.audio_rtcp_return,
        )

    @classmethod
    def with_base(cls, base: int) -> "SessionTopology":
        return cls(
            video_rtp=base,
            video_rtcp=base + 1,
            video_rtcp_return=base + 5,
            audio_rtp=base + 2,
            audio_rtcp=base + 3,
            audio_rtcp_return=base + 7,
        )

    def rtp_port(self, session: str) -> int:
        return self.video_rtp if session == VIDEO else self.audio_rtp

    def rtcp_port(self, session: str) -> int:
        return self.video_rtcp if session == VIDEO else self.audio_rtcp

    def rtcp_return_port(self, session: str) -> int:
        return self.video_rtcp_return if session == VIDEO else self.audio_rtcp_return


class VirtualClock:
    """Time-ordered event queue; equal times fire in insertion order."""

    def __init__(self):
        self.now = 0.0
        self._heap: list[tuple[float, int, object]] = []
        self._ordinal = 0

    def schedule(self, t: float, fn) -> None:
        if t < self.now:
            t = self.now
        heapq.heappush(self._heap, (t, self._ordinal, fn))
        self._ordinal += 1

    def pending(self) -> int:
        return len(self._heap)

    def step(self) -> bool:
        if not self._heap:
            return False
        t, _, fn = heapq.heappop(self._heap)
        self.now = t
        fn()
        return True


@dataclass(frozen=True)
class SimResult:
    sender: SenderSummary
    receiver: ReceiverSummary
    final_time: float


def _default_channels() -> dict[str, Channel]:
    return {s: identity_channel() for s in SESSIONS}


def run_simulation(
    sender: SenderActor,
    receiver: ReceiverActor,
    *,
    forward_channels: dict[str, Channel] | None = None,
    return_channels: dict[str, Channel] | None = None,
    clock: VirtualClock | None = None,
) -> SimResult:
    """Advance virtual time event-by-event until both actors complete.

    Every forward datagram (RTP and RTCP alike) traverses its session's
    forward channel; reception reports ride the return channels, identity by
    default.  Identical inputs and seeds produce identical event traces.
    """
    clock = clock or VirtualClock()
    forward = forward_channels or _default_channels()
    return_ch = return_channels or _default_channels()

    wake_gen = [0]

    def dispatch_receiver_outs(outs) -> None:
        for out in outs:
            result = return_ch[out.session].process(out.data, clock.now, meta=out.meta)
            if result.delivered:
                clock.schedule(
                    result.deliver_time,
                    lambda o=out: sender.on_rtcp_return(o.session, o.data, clock.now),
                )

    def reschedule_wake() -> None:
        t = receiver.next_wakeup()
        if t is None:
            return
        wake_gen[0] += 1
        gen = wake_gen[0]

        def fire():
            if gen != wake_gen[0] or receiver.done:
                return
            dispatch_receiver_outs(receiver.on_wake(clock.now))
            reschedule_wake()

        clock.schedule(t, fire)

    def deliver_to_receiver(session: str, kind: str, data: bytes) -> None:
        if receiver.done:
            return
        dispatch_receiver_outs(receiver.on_packet(session, kind, data, clock.now))
        reschedule_wake()

    def pump_sender() -> None:
        for out in sender.emit_due(clock.now):
            result = forward[out.session].process(out.data, clock.now, meta=out.meta)
            if result.delivered:
                clock.schedule(
                    result.deliver_time,
                    lambda o=out: deliver_to_receiver(o.session, o.kind, o.data),
                )
        t = sender.next_time()
        if t is not None:
            clock.schedule(t, pump_sender)

    t0 = sender.next_time()
    if t0 is not None:
        clock.schedule(t0, pump_sender)
    reschedule_wake()

    while clock.step():
        if sender.done and receiver.done:
            break

    if not (sender.done and receiver.done):
        raise SimulationDeadlock(
            f"event queue exhausted; sender done={sender.done}, "
            f"receiver done={receiver.done} (eos={receiver.eos_kind})"
        )
    return SimResult(sender=sender.summary(), receiver=receiver.summary(), final_time=clock.now)


# --- UDP substrate ------------------------------------------------------------

_RCVBUF = 1 << 20


def _bind(host: str, port: int) -> socket.socket:
    sock = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
    sock.setsockopt(socket.SOL_SOCKET, socket.SO_RCVBUF, _RCVBUF)
    try:
        sock.bind((host, port))
    except OSError as exc:
        sock.close()
        raise ConfigurationError(f"cannot bind UDP port {port} on {host}: {exc}") from exc
    return sock


def run_udp_receiver(
    receiver: ReceiverActor,
    topology: SessionTopology,
    *,
    bind_host: str = "0.0.0.0",
    max_runtime_s: float | None = None,
    ready=None,
) -> ReceiverSummary:
    """Drive a receiver actor over real sockets until it completes.

    Return-path RTCP goes to the host the media came from, on the topology's
    return ports.  ``ready`` (a threading.Event) is set once all ports are
    bound, so a co-located sender can be released safely.
    """
    topology.validate()
    socks: dict[socket.socket, tuple[str, str]] = {}
    for session in SESSIONS:
        socks[_bind(bind_host, topology.rtp_port(session))] = (session, RTP)
        socks[_bind(bind_host, topology.rtcp_port(session))] = (session, RTCP)
    if ready is not None:
        ready.set()
    out_sock = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
    peer_host: str | None = None
    start = time.monotonic()

    def now() -> float:
        return time.monotonic() - start

    def send_outs(outs) -> None:
        if peer_host is None:
            return
        for out in outs:
            out_sock.sendto(out.data, (peer_host, topology.rtcp_return_port(out.session)))

    try:
        while not receiver.done:
            if max_runtime_s is not None and now() > max_runtime_s:
                break
            wake = receiver.next_wakeup()
            timeout = 0.05 if wake is None else min(max(wake - now(), 0.0), 0.05)
            readable, _, _ = select.select(list(socks), [], [], timeout)
            for sock in readable:
                session, kind = socks[sock]
                try:
                    data, addr = sock.recvfrom(65536)
                except OSError:
                    continue
                if peer_host is None:
                    peer_host = addr[0]
                send_outs(receiver.on_packet(session, kind, data, now()))
            wake = receiver.next_wakeup()
            if wake is not None and now() >= wake:
                send_outs(receiver.on_wake(now()))
    finally:
        for sock in socks:
            sock.close()
        out_sock.close()
    if not receiver.done:
        raise RuntimeError("receiver did not complete within max_runtime_s")
    return receiver.summary()


def run_udp_sender(
    sender: SenderActor,
    topology: SessionTopology,
    *,
    dest_host: str,
    bind_host: str = "0.0.0.0",
    linger_s: float = 0.5,
) -> SenderSummary:
    """Pace the sender's schedule on the wall clock over real sockets."""
    topology.validate()
    return_socks: dict[socket.socket, str] = {}
    for session in SESSIONS:
        return_socks[_bind(bind_host, topology.rtcp_return_port(session))] = session
    out_sock = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
    start = time.monotonic()

    def now() -> float:
        return time.monotonic() - start

    def poll_returns(timeout: float) -> None:
        readable, _, _ = select.select(list(return_socks), [], [], timeout)
        for sock in readable:
            try:
                data, _ = sock.recvfrom(65536)
            except OSError:
                continue
            sender.on_rtcp_return(return_socks[sock], data, now())

    try:
        while not sender.done:
            next_t = sender.next_time()
            assert next_t is not None
            delay = next_t - now()
            if delay > 0:
                poll_returns(min(delay, 0.02))
                continue
            for out in sender.emit_due(now()):
                port = (
                    topology.rtp_port(out.session)
                    if out.kind == RTP
                    else topology.rtcp_port(out.session)
                )
                out_sock.sendto(out.data, (dest_host, port))
        deadline = now() + linger_s
        while now() < deadline:
            poll_returns(0.02)
    finally:
        for sock in return_socks:
            sock.close()
        out_sock.close()
    return sender.summary()
