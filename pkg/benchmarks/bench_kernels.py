#!/usr/bin/env python3
"""Benchmark the pure-Python kernels against the compiled extension.

Microbenchmarks cover the per-packet hot path (RNG draws, netem decisions,
jitter and sequence updates); --cell additionally times a full 60 s / 5%
loss simulation cell under each backend (in subprocesses, since the backend
is chosen at import time).

Usage: python benchmarks/bench_kernels.py [--n 1000000] [--cell]
"""

import argparse
import os
import subprocess
import sys
import time

from rtplab import _kernels_py

try:
    from rtplab import _speedups
except ImportError:
    _speedups = None

N_DEFAULT = 1_000_000


def bench(label, impl, n):
    rng = impl.Rng(42)

    def rng_draws():
        for _ in range(n):
            rng.random()

    def netem():
        r = impl.Rng(7)
        for _ in range(n):
            impl.netem_decide(r, 0.05, 0.02, 0.05)

    def jitter():
        est = impl.JitterEstimator()
        for i in range(n):
            est.update(i * 3600, i * 0.04 + (i % 7) * 0.001, 90000)

    def sequence():
        tracker = impl.SequenceTracker(0)
        for i in range(n):
            tracker.update(i & 0xFFFF)

    results = {}
    for name, fn in (("rng.random", rng_draws), ("netem_decide", netem),
                     ("jitter.update", jitter), ("seq.update", sequence)):
        start = time.perf_counter()
        fn()
        elapsed = time.perf_counter() - start
        results[name] = n / elapsed
    return results


def bench_cell(pure: bool) -> float:
    code = (
        "import dataclasses, time\n"
        "from rtplab.media import get_profile, generate_timeline\n"
        "from rtplab.sender import SenderActor\n"
        "from rtplab.receiver import ReceiverActor\n"
        "from rtplab.transport import run_simulation\n"
        "from rtplab.impairment import ImpairmentConfig, channel_from_config\n"
        "from rtplab.kernels import derive_seed, BACKEND\n"
        "from rtplab.sessions import SESSIONS\n"
        "p = dataclasses.replace(get_profile('s02'), duration_s=60.0)\n"
        "tl = generate_timeline(p, 1)\n"
        "imp = ImpairmentConfig(plr=5.0, delay_ms=20.0, jitter_ms=5.0, seed=7)\n"
        "fwd = {s: channel_from_config(dataclasses.replace(imp, seed=derive_seed(7, s)))"
        " for s in SESSIONS}\n"
        "t0 = time.perf_counter()\n"
        "run_simulation(SenderActor(tl), ReceiverActor(p, 1, timeline=tl), forward_channels=fwd)\n"
        "print(time.perf_counter() - t0)\n"
    )
    env = dict(os.environ)
    if pure:
        env["RTPLAB_PURE_KERNELS"] = "1"
    else:
        env.pop("RTPLAB_PURE_KERNELS", None)
    out = subprocess.run(
        [sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True
    )
    return float(out.stdout.strip().splitlines()[-1])


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n", type=int, default=N_DEFAULT, help="iterations per benchmark")
    parser.add_argument("--cell", action="store_true", help="also time a full simulation cell")
    args = parser.parse_args()

    pure = bench("pure", _kernels_py, args.n)
    compiled = bench("compiled", _speedups, args.n) if _speedups else None

    width = max(len(k) for k in pure)
    print(f"{'kernel':<{width}}  {'pure ops/s':>14}  {'compiled ops/s':>14}  {'speedup':>8}")
    for name, pure_rate in pure.items():
        if compiled:
            rate = compiled[name]
            print(f"{name:<{width}}  {pure_rate:>14,.0f}  {rate:>14,.0f}  {rate / pure_rate:>7.1f}x")
        else:
            print(f"{name:<{width}}  {pure_rate:>14,.0f}  {'(not built)':>14}  {'-':>8}")

    if args.cell:
        print()
        t_pure = bench_cell(pure=True)
        print(f"60 s / 5% loss cell, pure kernels:     {t_pure:.2f} s")
        if _speedups:
            t_comp = bench_cell(pure=False)
            print(f"60 s / 5% loss cell, compiled kernels: {t_comp:.2f} s  ({t_pure / t_comp:.2f}x)")


if __name__ == "__main__":
    main()
