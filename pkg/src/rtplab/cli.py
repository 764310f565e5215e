"""Command-line entry points.

Exit codes: 0 success, 1 configuration error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from rtplab.errors import ConfigurationError, RtplabError
from rtplab.media import BUILTIN_PROFILES, DEFAULT_MTU, generate_timeline, get_profile
from rtplab.orchestrator import (
    MATRIX_SUMMARY_FILE,
    load_run_summary,
    run_matrix,
    summarize_matrix,
)
from rtplab.receiver import (
    DEFAULT_LATENCY_MS,
    DEFAULT_REPORT_INTERVAL_S,
    DEFAULT_TIMEOUT_S,
    ReceiverActor,
)
from rtplab.sender import SenderActor
from rtplab.sinks import StatsCsvWriter
from rtplab.transport import SessionTopology, run_udp_receiver, run_udp_sender


def _topology(args) -> SessionTopology:
    return SessionTopology.with_base(args.base_port)


def _add_udp_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--profile", required=True, help="built-in profile id (s01..s06)")
    parser.add_argument("--seed", type=int, default=0, help="media seed; must match the peer")
    parser.add_argument("--duration", type=float, default=None, help="override stream seconds")
    parser.add_argument("--mtu", type=int, default=DEFAULT_MTU)
    parser.add_argument("--base-port", type=int, default=5000, help="first port of the plan")
    parser.add_argument(
        "--report-interval", type=float, default=DEFAULT_REPORT_INTERVAL_S, help="RTCP period (s)"
    )


def _resolve_profile(args):
    profile = get_profile(args.profile)
    if args.duration is not None:
        profile = dataclasses.replace(profile, duration_s=args.duration)
    return profile


def cmd_run(args) -> int:
    matrix = json.loads(Path(args.matrix).read_text(encoding="utf-8"))
    if args.seed is not None:
        matrix["master_seed"] = args.seed
    if args.mode is not None:
        matrix["mode"] = args.mode
    summaries = run_matrix(
        matrix,
        args.out,
        resume=not args.no_resume,
        trace=not args.no_trace,
        log=lambda msg: print(msg, flush=True),
    )
    failed = [s for s in summaries if s.get("status") != "ok"]
    print(f"{len(summaries) - len(failed)}/{len(summaries)} runs ok -> {args.out}")
    return 2 if failed else 0


def cmd_send(args) -> int:
    profile = _resolve_profile(args)
    timeline = generate_timeline(profile, args.seed)
    sender = SenderActor(timeline, mtu=args.mtu, report_interval_s=args.report_interval)
    summary = run_udp_sender(sender, _topology(args), dest_host=args.dest, bind_host=args.bind)
    print(json.dumps(dataclasses.asdict(summary), indent=2))
    return 0


def cmd_receive(args) -> int:
    profile = _resolve_profile(args)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    stats = StatsCsvWriter(out_dir / "stats.csv")
    try:
        receiver = ReceiverActor(
            profile,
            args.seed,
            latency_ms=args.latency,
            mtu=args.mtu,
            report_interval_s=args.report_interval,
            timeout_s=args.timeout,
            stats_writer=stats,
        )
        summary = run_udp_receiver(receiver, _topology(args), bind_host=args.bind)
        receiver.write_received_manifest(out_dir / "received_manifest.csv")
    finally:
        stats.close()
    out = {
        "eos_kind": summary.eos_kind,
        "frames_complete": summary.frames_complete,
        "frames_partial": summary.frames_partial,
        "late_discards": summary.late_discards,
        "sessions": {
            name: dataclasses.asdict(sess) for name, sess in summary.sessions.items()
        },
    }
    print(json.dumps(out, indent=2))
    return 0


def cmd_summarize(args) -> int:
    out_dir = Path(args.out)
    if not out_dir.is_dir():
        raise ConfigurationError(f"{out_dir} is not a directory")
    summaries = []
    for run_dir in sorted(p for p in out_dir.iterdir() if p.is_dir()):
        summary = load_run_summary(out_dir, run_dir.name)
        if summary is not None:
            summaries.append(summary)
    if not summaries:
        raise ConfigurationError(f"no completed runs under {out_dir}")
    summarize_matrix(summaries, out_dir / MATRIX_SUMMARY_FILE)
    print(f"wrote {out_dir / MATRIX_SUMMARY_FILE} ({len(summaries)} rows)")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from rtplab.ratings import create_app

    app = create_app(args.dataset, ui_dir=args.ui)
    if args.ui:
        print(f"rating player at http://{args.host}:{args.port}/ui/")
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def cmd_profiles(args) -> int:
    for profile in BUILTIN_PROFILES.values():
        print(
            f"{profile.source_id}  {profile.resolution.value:>6} {profile.tier.value}"
            f"  video {profile.video_bitrate_kbit:g} kbit/s @ {profile.video_fps:g} fps"
            f"  audio {profile.audio_bitrate_kbit:g} kbit/s  {profile.duration_s:g} s"
        )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rtplab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="execute an experiment matrix")
    p.add_argument("--matrix", required=True, help="matrix JSON file")
    p.add_argument("--out", required=True, help="output dataset directory")
    p.add_argument("--mode", choices=["sim", "udp"], default=None)
    p.add_argument("--seed", type=int, default=None, help="override master seed")
    p.add_argument("--no-resume", action="store_true", help="re-run completed cells")
    p.add_argument("--no-trace", action="store_true", help="skip channel trace files")
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("send", help="UDP sender on the standard port plan")
    _add_udp_common(p)
    p.add_argument("--dest", required=True, help="receiver host")
    p.add_argument("--bind", default="0.0.0.0", help="local bind for RTCP return ports")
    p.set_defaults(fn=cmd_send)

    p = sub.add_parser("receive", help="UDP receiver on the standard port plan")
    _add_udp_common(p)
    p.add_argument("--bind", default="0.0.0.0")
    p.add_argument("--latency", type=float, default=DEFAULT_LATENCY_MS, help="jitter buffer ms")
    p.add_argument("--timeout", type=float, default=DEFAULT_TIMEOUT_S, help="media-silence timeout s")
    p.add_argument("--out", default=".", help="directory for stats + received manifest")
    p.set_defaults(fn=cmd_receive)

    p = sub.add_parser("summarize", help="rebuild summary.csv from run artifacts")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_summarize)

    p = sub.add_parser("serve", help="serve the rating-session API")
    p.add_argument("--dataset", required=True, help="matrix output directory")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--ui", default=None, help="built rating player directory (frontend/)")
    p.set_defaults(fn=cmd_serve)

    p = sub.add_parser("profiles", help="list built-in media profiles")
    p.set_defaults(fn=cmd_profiles)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    except RtplabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
