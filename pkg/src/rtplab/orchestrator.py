"""Experiment runner: matrix expansion, parameter-encoding run names,
artifact persistence, and the matrix summary table.

Each matrix cell streams one profile through one impairment condition and
leaves behind: the sent-media manifest, the RTCP stats log, the channel
decision trace (simulation mode), the received-media manifest, and a
summary.json used for resumption.
"""

from __future__ import annotations

import dataclasses
import json
import threading
from dataclasses import dataclass
from pathlib import Path

from rtplab.errors import ConfigurationError, RtplabError
from rtplab.impairment import (
    ImpairmentConfig,
    JsonlTraceWriter,
    channel_from_config,
    identity_channel,
)
from rtplab.kernels import derive_seed
from rtplab.media import (
    BUILTIN_PROFILES,
    DEFAULT_MTU,
    MediaProfile,
    Resolution,
    Tier,
    generate_timeline,
    get_profile,
    write_manifest,
)
from rtplab.receiver import (
    DEFAULT_LATENCY_MS,
    DEFAULT_REPORT_INTERVAL_S,
    DEFAULT_TIMEOUT_S,
    ReceiverActor,
)
from rtplab.sender import SenderActor
from rtplab.sessions import SESSIONS, VIDEO
from rtplab.sinks import StatsCsvWriter
from rtplab.transport import (
    SessionTopology,
    run_simulation,
    run_udp_receiver,
    run_udp_sender,
)

MODE_SIM = "sim"
MODE_UDP = "udp"

STATS_FILE = "stats.csv"
TRACE_FILE = "channel_trace.jsonl"
SENT_MANIFEST_FILE = "sent_manifest.csv"
RECEIVED_MANIFEST_FILE = "received_manifest.csv"
RUN_SUMMARY_FILE = "summary.json"
MATRIX_SUMMARY_FILE = "summary.csv"

SUMMARY_COLUMNS = (
    "run_id",
    "status",
    "plr",
    "delay_ms",
    "jitter_ms",
    "bandwidth_kbit",
    "latency_ms",
    "measured_loss_percent",
    "final_jitter_clock_units",
    "effective_bitrate_kbit",
    "frames_complete",
    "frames_partial",
    "late_discards",
    "eos_kind",
    "error",
)


@dataclass(frozen=True)
class ExperimentConfig:
    profile: MediaProfile
    impairment: ImpairmentConfig
    latency_ms: float
    mode: str
    run_id: str
    media_seed: int
    mtu: int = DEFAULT_MTU
    report_interval_s: float = DEFAULT_REPORT_INTERVAL_S
    timeout_s: float = DEFAULT_TIMEOUT_S
    udp_base_port: int = 5000


@dataclass(frozen=True)
class RunArtifacts:
    run_id: str
    run_dir: Path
    stats_path: Path
    received_manifest_path: Path
    sent_manifest_path: Path
    channel_trace_path: Path | None
    summary: dict


def _num(v: float) -> str:
    """Locale-independent compact number: integers drop the decimal part."""
    if v == int(v):
        return str(int(v))
    return repr(float(v))


def encode_filename(config: ExperimentConfig) -> str:
    profile = config.profile
    if "_" in profile.source_id or not profile.source_id:
        raise ConfigurationError(f"source_id {profile.source_id!r} unusable in file names")
    imp = config.impairment
    bw = "NA" if imp.bandwidth_kbit is None else _num(imp.bandwidth_kbit)
    return (
        f"{profile.source_id}_{profile.resolution.value}_{profile.tier.value}"
        f"_plr{_num(imp.plr)}_del{_num(imp.delay_ms)}_jit{_num(imp.jitter_ms)}"
        f"_bw{bw}_lat{_num(config.latency_ms)}"
    )


@dataclass(frozen=True)
class DecodedName:
    source_id: str
    resolution: Resolution
    tier: Tier
    plr: float
    delay_ms: float
    jitter_ms: float
    bandwidth_kbit: float | None
    latency_ms: float


def decode_filename(name: str) -> DecodedName:
    parts = name.split("_")
    if len(parts) != 8:
        raise ConfigurationError(
            f"cannot parse run name {name!r}: expected 8 '_'-separated fields, got {len(parts)}"
        )
    source, res, tier, plr_t, del_t, jit_t, bw_t, lat_t = parts

    def num_token(token: str, prefix: str, allow_na: bool = False) -> float | None:
        if not token.startswith(prefix):
            raise ConfigurationError(f"bad token {token!r}: expected prefix {prefix!r}")
        text = token[len(prefix) :]
        if allow_na and text == "NA":
            return None
        try:
            return float(text)
        except ValueError:
            raise ConfigurationError(f"bad numeric value in token {token!r}") from None

    try:
        resolution = Resolution(res)
    except ValueError:
        raise ConfigurationError(f"bad token {res!r}: not a resolution") from None
    try:
        tier_v = Tier(tier)
    except ValueError:
        raise ConfigurationError(f"bad token {tier!r}: not a quality tier") from None
    if not source:
        raise ConfigurationError("empty source id token")
    return DecodedName(
        source_id=source,
        resolution=resolution,
        tier=tier_v,
        plr=num_token(plr_t, "plr"),
        delay_ms=num_token(del_t, "del"),
        jitter_ms=num_token(jit_t, "jit"),
        bandwidth_kbit=num_token(bw_t, "bw", allow_na=True),
        latency_ms=num_token(lat_t, "lat"),
    )


def expand_matrix(matrix: dict) -> list[ExperimentConfig]:
    """Full Cartesian product in deterministic order: profiles, then plr,
    delay, jitter, bandwidth, latency.  Per-run seeds derive from
    (master_seed, run_id)."""
    master_seed = int(matrix.get("master_seed", 0))
    mode = matrix.get("mode", MODE_SIM)
    if mode not in (MODE_SIM, MODE_UDP):
        raise ConfigurationError(f"unknown mode {mode!r}")
    defaults = matrix.get("defaults", {})

    profile_ids = matrix.get("profiles", "all")
    if profile_ids == "all":
        profile_ids = list(BUILTIN_PROFILES)
    axes = {
        "profiles": profile_ids,
        "plr": matrix.get("plr", [0.0]),
        "delay_ms": matrix.get("delay_ms", [0.0]),
        "jitter_ms": matrix.get("jitter_ms", [0.0]),
        "bandwidth_kbit": matrix.get("bandwidth_kbit", [None]),
        "latency_ms": matrix.get("latency_ms", [DEFAULT_LATENCY_MS]),
    }
    for name, values in axes.items():
        if not values:
            raise ConfigurationError(f"matrix axis {name!r} is empty")

    duration = defaults.get("duration_s")
    mtu = int(defaults.get("mtu", DEFAULT_MTU))
    queue_limit = int(defaults.get("queue_limit", ImpairmentConfig().queue_limit))
    report_interval = float(defaults.get("report_interval_s", DEFAULT_REPORT_INTERVAL_S))
    timeout = float(defaults.get("timeout_s", DEFAULT_TIMEOUT_S))
    udp_base = int(defaults.get("udp_base_port", 5000))

    configs: list[ExperimentConfig] = []
    seen: set[str] = set()
    for source_id in axes["profiles"]:
        profile = get_profile(source_id)
        if duration is not None:
            profile = dataclasses.replace(profile, duration_s=float(duration))
        for plr in axes["plr"]:
            for delay in axes["delay_ms"]:
                for jitter in axes["jitter_ms"]:
                    for bw in axes["bandwidth_kbit"]:
                        for latency in axes["latency_ms"]:
                            imp = ImpairmentConfig(
                                plr=float(plr),
                                delay_ms=float(delay),
                                jitter_ms=float(jitter),
                                bandwidth_kbit=None if bw is None else float(bw),
                                queue_limit=queue_limit,
                            )
                            imp.validate()
                            partial = ExperimentConfig(
                                profile=profile,
                                impairment=imp,
                                latency_ms=float(latency),
                                mode=mode,
                                run_id="",
                                media_seed=0,
                                mtu=mtu,
                                report_interval_s=report_interval,
                                timeout_s=timeout,
                                udp_base_port=udp_base,
                            )
                            run_id = encode_filename(partial)
                            if run_id in seen:
                                raise ConfigurationError(f"duplicate matrix cell {run_id}")
                            seen.add(run_id)
                            configs.append(
                                dataclasses.replace(
                                    partial,
                                    run_id=run_id,
                                    media_seed=derive_seed(master_seed, run_id, "media"),
                                    impairment=dataclasses.replace(
                                        imp, seed=derive_seed(master_seed, run_id, "channel")
                                    ),
                                )
                            )
    return configs


def _run_sim(config: ExperimentConfig, run_dir: Path, trace: bool):
    timeline = generate_timeline(config.profile, config.media_seed)
    write_manifest(timeline, run_dir / SENT_MANIFEST_FILE)

    trace_writer = JsonlTraceWriter(run_dir / TRACE_FILE) if trace else None
    stats_writer = StatsCsvWriter(run_dir / STATS_FILE)
    try:
        forward = {
            s: channel_from_config(
                dataclasses.replace(
                    config.impairment, seed=derive_seed(config.impairment.seed, s)
                ),
                trace=trace_writer,
            )
            for s in SESSIONS
        }
        sender = SenderActor(
            timeline, mtu=config.mtu, report_interval_s=config.report_interval_s
        )
        receiver = ReceiverActor(
            config.profile,
            config.media_seed,
            latency_ms=config.latency_ms,
            mtu=config.mtu,
            report_interval_s=config.report_interval_s,
            timeout_s=config.timeout_s,
            stats_writer=stats_writer,
            timeline=timeline,
        )
        result = run_simulation(sender, receiver, forward_channels=forward)
        receiver.write_received_manifest(run_dir / RECEIVED_MANIFEST_FILE)
        channel_drops = {s: forward[s].dropped for s in SESSIONS}
    finally:
        stats_writer.close()
        if trace_writer:
            trace_writer.close()
    return result, channel_drops


def _run_udp_loopback(config: ExperimentConfig, run_dir: Path):
    """Both actors over real loopback sockets; no artifact-side impairment."""
    timeline = generate_timeline(config.profile, config.media_seed)
    write_manifest(timeline, run_dir / SENT_MANIFEST_FILE)
    topology = SessionTopology.with_base(config.udp_base_port)
    stats_writer = StatsCsvWriter(run_dir / STATS_FILE)
    try:
        sender = SenderActor(
            timeline, mtu=config.mtu, report_interval_s=config.report_interval_s
        )
        receiver = ReceiverActor(
            config.profile,
            config.media_seed,
            latency_ms=config.latency_ms,
            mtu=config.mtu,
            report_interval_s=config.report_interval_s,
            timeout_s=config.timeout_s,
            stats_writer=stats_writer,
            timeline=timeline,
        )
        ready = threading.Event()
        box: dict = {}

        def rx():
            try:
                box["receiver"] = run_udp_receiver(
                    receiver,
                    topology,
                    bind_host="127.0.0.1",
                    max_runtime_s=config.profile.duration_s + config.timeout_s + 30,
                    ready=ready,
                )
            except Exception as exc:  # surfaced after join
                box["error"] = exc

        thread = threading.Thread(target=rx, daemon=True)
        thread.start()
        if not ready.wait(timeout=10):
            raise RtplabError("UDP receiver failed to bind within 10 s")
        sender_summary = run_udp_sender(sender, topology, dest_host="127.0.0.1")
        thread.join(timeout=config.profile.duration_s + config.timeout_s + 60)
        if "error" in box:
            raise box["error"]
        if "receiver" not in box:
            raise RtplabError("UDP receiver did not finish")
        receiver.write_received_manifest(run_dir / RECEIVED_MANIFEST_FILE)
    finally:
        stats_writer.close()

    from rtplab.transport import SimResult

    return SimResult(sender=sender_summary, receiver=box["receiver"], final_time=box["receiver"].end_time), None


def build_summary(config: ExperimentConfig, result, channel_drops: dict | None) -> dict:
    rx = result.receiver
    tx = result.sender
    sent = sum(tx.packets_sent.values())
    received = sum(s.packets_received for s in rx.sessions.values())
    if config.mode == MODE_SIM:
        measured_loss = 100.0 * (sent - received) / sent if sent else 0.0
    else:
        known = [s for s in rx.sessions.values() if s.sender_packet_count is not None]
        if known and all(s.sender_packet_count is not None for s in rx.sessions.values()):
            total = sum(s.sender_packet_count for s in rx.sessions.values())
            lost = sum(s.exact_lost for s in rx.sessions.values())
            measured_loss = 100.0 * lost / total if total else 0.0
        else:
            lost = sum(s.rfc_cumulative_lost for s in rx.sessions.values())
            expected = received + lost
            measured_loss = 100.0 * lost / expected if expected else 100.0
    duration = config.profile.duration_s
    summary = {
        "run_id": config.run_id,
        "status": "ok",
        "mode": config.mode,
        "plr": config.impairment.plr,
        "delay_ms": config.impairment.delay_ms,
        "jitter_ms": config.impairment.jitter_ms,
        "bandwidth_kbit": config.impairment.bandwidth_kbit,
        "latency_ms": config.latency_ms,
        "duration_s": duration,
        "packets_sent": sent,
        "packets_received": received,
        "channel_drops": channel_drops,
        "measured_loss_percent": measured_loss,
        "final_jitter_clock_units": rx.sessions[VIDEO].jitter_clock_units,
        "effective_bitrate_kbit": rx.payload_bytes * 8.0 / 1000.0 / duration,
        "frames_complete": rx.frames_complete,
        "frames_partial": rx.frames_partial,
        "late_discards": rx.late_discards,
        "eos_kind": rx.eos_kind,
        "final_time": result.final_time,
        "sessions": {
            name: {
                "packets_received": s.packets_received,
                "jitter_clock_units": s.jitter_clock_units,
                "rfc_cumulative_lost": s.rfc_cumulative_lost,
                "sender_packet_count": s.sender_packet_count,
                "exact_lost": s.exact_lost,
                "frames_complete": s.frames_complete,
                "frames_partial": s.frames_partial,
                "frames_missing": s.frames_missing,
                "late_discards": s.late_discards,
                "eos_seen": s.eos_seen,
            }
            for name, s in rx.sessions.items()
        },
        "error": "",
    }
    return summary


def run_experiment(config: ExperimentConfig, out_dir, *, trace: bool = True) -> RunArtifacts:
    """Execute one matrix cell and persist its artifacts under the run name."""
    out_dir = Path(out_dir)
    run_dir = out_dir / config.run_id
    run_dir.mkdir(parents=True, exist_ok=True)
    config.impairment.validate()
    if config.mode == MODE_SIM:
        result, channel_drops = _run_sim(config, run_dir, trace)
    elif config.mode == MODE_UDP:
        result, channel_drops = _run_udp_loopback(config, run_dir)
    else:
        raise ConfigurationError(f"unknown mode {config.mode!r}")
    summary = build_summary(config, result, channel_drops)
    (run_dir / RUN_SUMMARY_FILE).write_text(
        json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return RunArtifacts(
        run_id=config.run_id,
        run_dir=run_dir,
        stats_path=run_dir / STATS_FILE,
        received_manifest_path=run_dir / RECEIVED_MANIFEST_FILE,
        sent_manifest_path=run_dir / SENT_MANIFEST_FILE,
        channel_trace_path=(run_dir / TRACE_FILE) if config.mode == MODE_SIM and trace else None,
        summary=summary,
    )


def load_run_summary(out_dir, run_id: str) -> dict | None:
    path = Path(out_dir) / run_id / RUN_SUMMARY_FILE
    if not path.exists():
        return None
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError):
        return None


def _summary_csv_row(summary: dict) -> str:
    def cell(key):
        v = summary.get(key)
        if v is None:
            return ""
        if isinstance(v, float):
            return repr(v)
        return str(v)

    return ",".join(cell(c) for c in SUMMARY_COLUMNS)


def summarize_matrix(summaries: list[dict], path) -> None:
    """Stable-order summary table: header plus one row per run, matrix order."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(SUMMARY_COLUMNS) + "\n")
        for summary in summaries:
            fh.write(_summary_csv_row(summary) + "\n")


def failure_summary(config: ExperimentConfig, error: Exception) -> dict:
    return {
        "run_id": config.run_id,
        "status": "failed",
        "eos_kind": None,
        "error": f"{type(error).__name__}: {error}",
    }


def run_matrix(
    matrix: dict, out_dir, *, resume: bool = True, trace: bool = True, log=None
) -> list[dict]:
    """Run every cell; a failed run records a failure row rather than
    aborting.  With resume, cells whose summary.json already exists are
    skipped and their stored summary reused."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    configs = expand_matrix(matrix)
    summaries = []
    for config in configs:
        existing = load_run_summary(out_dir, config.run_id) if resume else None
        if existing is not None and existing.get("status") == "ok":
            if log:
                log(f"skip {config.run_id} (complete)")
            summaries.append(existing)
            continue
        if log:
            log(f"run  {config.run_id}")
        try:
            artifacts = run_experiment(config, out_dir, trace=trace)
            summaries.append(artifacts.summary)
        except RtplabError as exc:
            summaries.append(failure_summary(config, exc))
            if log:
                log(f"FAIL {config.run_id}: {exc}")
    summarize_matrix(summaries, out_dir / MATRIX_SUMMARY_FILE)
    return summaries
