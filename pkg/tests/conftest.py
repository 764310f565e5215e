import dataclasses

from rtplab.impairment import ImpairmentConfig, channel_from_config


def pytest_terminal_summary(terminalreporter):
    try:
        import test_acceptance
    except ImportError:
        return
    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in test_acceptance.RESULTS:
            terminalreporter.write_line(line)
from rtplab.kernels import derive_seed
from rtplab.media import MediaProfile, Resolution, Tier, generate_timeline
from rtplab.receiver import ReceiverActor
from rtplab.sender import SenderActor
from rtplab.sessions import SESSIONS
from rtplab.transport import run_simulation


def make_profile(**overrides) -> MediaProfile:
    base = dict(
        source_id="t01",
        resolution=Resolution.R720P,
        tier=Tier.LQ,
        video_bitrate_kbit=1000.0,
        video_fps=25.0,
        audio_bitrate_kbit=24.0,
        duration_s=5.0,
    )
    base.update(overrides)
    return MediaProfile(**base)


def run_sim_cell(
    profile,
    *,
    plr=0.0,
    delay_ms=0.0,
    jitter_ms=0.0,
    bandwidth_kbit=None,
    queue_limit=50,
    seed=7,
    latency_ms=200.0,
    timeout_s=10.0,
    report_interval_s=5.0,
    trace=None,
    stats_writer=None,
):
    """Wire one sender/receiver pair through per-session impairment channels."""
    timeline = generate_timeline(profile, seed)
    impairment = ImpairmentConfig(
        plr=plr,
        delay_ms=delay_ms,
        jitter_ms=jitter_ms,
        bandwidth_kbit=bandwidth_kbit,
        queue_limit=queue_limit,
    )
    forward = {
        s: channel_from_config(
            dataclasses.replace(impairment, seed=derive_seed(seed, s)), trace=trace
        )
        for s in SESSIONS
    }
    sender = SenderActor(timeline, report_interval_s=report_interval_s)
    receiver = ReceiverActor(
        profile,
        seed,
        latency_ms=latency_ms,
        timeout_s=timeout_s,
        report_interval_s=report_interval_s,
        stats_writer=stats_writer,
        timeline=timeline,
    )
    result = run_simulation(sender, receiver, forward_channels=forward)
    return result, forward
