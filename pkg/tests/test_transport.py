import io
import socket
import threading

import pytest

from conftest import make_profile, run_sim_cell

from rtplab.errors import ConfigurationError
from rtplab.media import generate_timeline
from rtplab.receiver import ReceiverActor
from rtplab.sender import SenderActor
from rtplab.sessions import SESSIONS, VIDEO
from rtplab.sinks import StatsCsvWriter
from rtplab.transport import (
    SessionTopology,
    VirtualClock,
    run_udp_receiver,
    run_udp_sender,
)

UDP_BASE = 15600


def test_clock_orders_by_time_then_insertion():
    clock = VirtualClock()
    fired = []
    clock.schedule(2.0, lambda: fired.append("b1"))
    clock.schedule(1.0, lambda: fired.append("a"))
    clock.schedule(2.0, lambda: fired.append("b2"))
    while clock.step():
        pass
    assert fired == ["a", "b1", "b2"]
    assert clock.now == 2.0


def test_zero_duration_completes_on_bye_alone():
    profile = make_profile(duration_s=0.001)
    result, _ = run_sim_cell(profile)
    assert result.receiver.eos_kind == "BYE"
    assert result.receiver.frames_complete == 0
    assert result.final_time < 1.0


def test_identity_channel_final_time_close_to_duration():
    profile = make_profile(duration_s=10.0)
    result, _ = run_sim_cell(profile, latency_ms=200.0)
    # media ends at 10 s; BYE repeats and the final drain add a short tail
    assert 10.0 <= result.final_time <= 11.5


def test_virtual_time_respects_analytic_bound():
    profile = make_profile(duration_s=4.0)
    cases = [
        dict(plr=0.0, delay_ms=0.0, jitter_ms=0.0),
        dict(plr=5.0, delay_ms=100.0, jitter_ms=40.0),
        dict(plr=100.0, delay_ms=200.0, jitter_ms=0.0),
    ]
    for case in cases:
        result, _ = run_sim_cell(profile, timeout_s=3.0, latency_ms=150.0, **case)
        bound = (
            profile.duration_s
            + (case["delay_ms"] + case["jitter_ms"]) / 1000.0
            + 0.150  # latency
            + 3.0  # timeout
            + 1.0  # BYE tail slack
        )
        assert result.final_time <= bound


def _run_pair(profile, seed, stats_buf):
    return run_sim_cell(
        profile,
        plr=3.0,
        delay_ms=25.0,
        jitter_ms=10.0,
        seed=seed,
        stats_writer=StatsCsvWriter(stats_buf),
    )


def test_simulation_determinism_byte_identical_stats():
    profile = make_profile(duration_s=8.0)
    buf_a, buf_b = io.StringIO(), io.StringIO()
    result_a, _ = _run_pair(profile, 31, buf_a)
    result_b, _ = _run_pair(profile, 31, buf_b)
    assert buf_a.getvalue() == buf_b.getvalue()
    assert result_a.final_time == result_b.final_time
    assert result_a.receiver.sessions == result_b.receiver.sessions

    buf_c = io.StringIO()
    _run_pair(profile, 32, buf_c)
    assert buf_c.getvalue() != buf_a.getvalue()


def test_actors_substrate_blind_udp_matches_sim():
    # The same actor logic over real loopback sockets must reproduce the
    # simulation's lossless frame accounting.
    profile = make_profile(duration_s=1.5, video_bitrate_kbit=400.0)
    sim_result, _ = run_sim_cell(profile, seed=5, latency_ms=100.0)

    topology = SessionTopology.with_base(UDP_BASE)
    timeline = generate_timeline(profile, 5)
    sender = SenderActor(timeline)
    receiver = ReceiverActor(profile, 5, latency_ms=100.0, timeout_s=5.0, timeline=timeline)
    ready = threading.Event()
    box = {}

    def rx():
        box["summary"] = run_udp_receiver(
            receiver, topology, bind_host="127.0.0.1", max_runtime_s=30.0, ready=ready
        )

    thread = threading.Thread(target=rx, daemon=True)
    thread.start()
    assert ready.wait(5.0)
    sender_summary = run_udp_sender(sender, topology, dest_host="127.0.0.1", bind_host="127.0.0.1")
    thread.join(30.0)
    assert "summary" in box
    udp = box["summary"]

    assert udp.eos_kind == "BYE"
    for session in SESSIONS:
        assert udp.sessions[session].eos_seen
        assert udp.sessions[session].exact_lost == 0
        assert udp.sessions[session].measured_loss_percent == 0.0
        assert (
            udp.sessions[session].frames_complete
            == sim_result.receiver.sessions[session].frames_complete
        )
    assert sender_summary.packets_sent == sim_result.sender.packets_sent
    assert sender_summary.rr_received[VIDEO] >= 0  # RRs may or may not beat the linger window


def test_udp_bind_conflict_names_port():
    blocker = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
    blocker.bind(("127.0.0.1", UDP_BASE + 20))
    try:
        topology = SessionTopology.with_base(UDP_BASE + 20)
        profile = make_profile(duration_s=0.5)
        receiver = ReceiverActor(profile, 1)
        with pytest.raises(ConfigurationError, match=str(UDP_BASE + 20)):
            run_udp_receiver(receiver, topology, bind_host="127.0.0.1")
    finally:
        blocker.close()


def test_udp_sender_completes_without_receiver():
    topology = SessionTopology.with_base(UDP_BASE + 40)
    profile = make_profile(duration_s=0.5, video_bitrate_kbit=200.0)
    sender = SenderActor(generate_timeline(profile, 2))
    summary = run_udp_sender(
        sender, topology, dest_host="127.0.0.1", bind_host="127.0.0.1", linger_s=0.1
    )
    assert sender.done
    assert summary.rr_received == {s: 0 for s in SESSIONS}


def test_deadlock_diagnostic_names_actor_states():
    # A receiver that reports no future wakeups while incomplete starves the
    # event queue; the simulator must diagnose instead of hanging.
    from rtplab.errors import SimulationDeadlock
    from rtplab.transport import run_simulation

    class StuckReceiver:
        done = False
        eos_kind = None

        def on_packet(self, *args):
            return []

        def on_wake(self, now):
            return []

        def next_wakeup(self):
            return None

    profile = make_profile(duration_s=0.1)
    sender = SenderActor(generate_timeline(profile, 1))
    with pytest.raises(SimulationDeadlock, match="receiver done=False"):
        run_simulation(sender, StuckReceiver())


def test_topology_ports_must_be_distinct():
    with pytest.raises(ConfigurationError):
        SessionTopology(video_rtp=5000, audio_rtp=5000).validate()
    SessionTopology().validate()
    assert SessionTopology().all_ports() == (5000, 5001, 5005, 5002, 5003, 5007)
