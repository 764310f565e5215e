"""Userspace network conditioning: delay/jitter and loss stages in the style
of a netem qdisc chain, composed with a fluid bandwidth pipe (tail-dropping
bounded queue) and an optional token-bucket shaper.

All randomness comes from one seeded generator per channel with a fixed
consumption order per packet: the jitter offset is drawn first (only when
jitter > 0), then the loss draw (only when plr > 0).  Replaying the same
draws therefore reproduces every decision bit-for-bit.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass
from typing import Callable, Sequence

from rtplab.errors import ConfigurationError
from rtplab.kernels import Rng, netem_decide

DEFAULT_QUEUE_LIMIT = 50  # packets


@dataclass(frozen=True)
class ImpairmentConfig:
    """One experiment cell's network condition."""

    plr: float = 0.0  # percent
    delay_ms: float = 0.0
    jitter_ms: float = 0.0
    bandwidth_kbit: float | None = None
    queue_limit: int = DEFAULT_QUEUE_LIMIT
    seed: int = 0

    def validate(self) -> None:
        if not 0.0 <= self.plr <= 100.0:
            raise ConfigurationError(f"plr must be in [0, 100], got {self.plr}")
        if self.delay_ms < 0 or self.jitter_ms < 0:
            raise ConfigurationError("delay and jitter must be >= 0")
        if self.bandwidth_kbit is not None and self.bandwidth_kbit <= 0:
            raise ConfigurationError("bandwidth must be > 0 kbit/s when set")
        if self.queue_limit < 1:
            raise ConfigurationError("queue_limit must be >= 1")

    def stages(self) -> list["StageSpec"]:
        specs: list[StageSpec] = [
            DelayJitterSpec(delay_ms=self.delay_ms, jitter_ms=self.jitter_ms),
            LossSpec(plr=self.plr),
        ]
        if self.bandwidth_kbit is not None:
            specs.append(PipeSpec(bandwidth_kbit=self.bandwidth_kbit, queue_limit=self.queue_limit))
        return specs


@dataclass(frozen=True)
class ScheduledPacket:
    packet: bytes
    inject_time: float
    deliver_time: float


@dataclass(frozen=True)
class Dropped:
    stage: str


def netem_apply(
    packet: bytes, now: float, config: ImpairmentConfig, rng: Rng
) -> ScheduledPacket | Dropped:
    """Delay/jitter stage chained into a loss stage, as a netem qdisc pair.

    The delay stage runs first, the loss stage second; a drop is a valid
    outcome, not an error.  Delivery never precedes injection (the jitter
    offset is clamped so delay + offset >= 0).
    """
    config.validate()
    dropped, extra = netem_decide(
        rng, config.delay_ms / 1000.0, config.jitter_ms / 1000.0, config.plr / 100.0
    )
    if dropped:
        return Dropped(stage="loss")
    return ScheduledPacket(packet=packet, inject_time=now, deliver_time=now + extra)


# --- composable stages -------------------------------------------------------

@dataclass(frozen=True)
class DelayJitterSpec:
    delay_ms: float
    jitter_ms: float


@dataclass(frozen=True)
class LossSpec:
    plr: float  # percent


@dataclass(frozen=True)
class PipeSpec:
    bandwidth_kbit: float
    queue_limit: int = DEFAULT_QUEUE_LIMIT


@dataclass(frozen=True)
class TokenBucketSpec:
    rate_kbit: float
    burst_bytes: int


StageSpec = DelayJitterSpec | LossSpec | PipeSpec | TokenBucketSpec


class _DelayJitterStage:
    name = "delay"

    def __init__(self, spec: DelayJitterSpec, rng: Rng):
        if spec.delay_ms < 0 or spec.jitter_ms < 0:
            raise ConfigurationError("delay and jitter must be >= 0")
        self._delay = spec.delay_ms / 1000.0
        self._jitter = spec.jitter_ms / 1000.0
        self._rng = rng

    def process(self, size: int, t: float) -> float | None:
        _, extra = netem_decide(self._rng, self._delay, self._jitter, 0.0)
        return t + extra


class _LossStage:
    name = "loss"

    def __init__(self, spec: LossSpec, rng: Rng):
        if not 0.0 <= spec.plr <= 100.0:
            raise ConfigurationError(f"plr must be in [0, 100], got {spec.plr}")
        self._prob = spec.plr / 100.0
        self._rng = rng

    def process(self, size: int, t: float) -> float | None:
        dropped, _ = netem_decide(self._rng, 0.0, 0.0, self._prob)
        return None if dropped else t


class PipeState:
    """Fixed-bandwidth link: each packet is delayed by the queue ahead of it.

    deliver = max(arrival, link_free_at) + size_bits/bandwidth, with tail
    drop once queue_limit packets are pending.
    """

    name = "pipe"

    def __init__(self, spec: PipeSpec):
        if spec.bandwidth_kbit <= 0:
            raise ConfigurationError("pipe bandwidth must be > 0")
        if spec.queue_limit < 1:
            raise ConfigurationError("queue_limit must be >= 1")
        self.bandwidth_bits = spec.bandwidth_kbit * 1000.0
        self.queue_limit = spec.queue_limit
        self.link_free_at = 0.0
        self._pending: deque[float] = deque()  # deliver times not yet reached
        self.enqueued = 0
        self.delivered = 0
        self.tail_dropped = 0

    def process(self, size: int, arrival: float) -> float | None:
        while self._pending and self._pending[0] <= arrival:
            self._pending.popleft()
        if len(self._pending) >= self.queue_limit:
            self.tail_dropped += 1
            return None
        tx = size * 8.0 / self.bandwidth_bits
        deliver = max(arrival, self.link_free_at) + tx
        self.link_free_at = deliver
        self._pending.append(deliver)
        self.enqueued += 1
        self.delivered += 1
        return deliver


def pipe_enqueue(packet: bytes, arrival: float, state: PipeState) -> ScheduledPacket | Dropped:
    deliver = state.process(len(packet), arrival)
    if deliver is None:
        return Dropped(stage="pipe")
    return ScheduledPacket(packet=packet, inject_time=arrival, deliver_time=deliver)


class TokenBucket:
    """Shaping token bucket: tokens accrue at ``rate``, a packet passes once
    tokens cover its size.  Deferred packets are serialized, never dropped."""

    name = "tbf"

    def __init__(self, spec: TokenBucketSpec):
        if spec.rate_kbit <= 0:
            raise ConfigurationError("token bucket rate must be > 0")
        if spec.burst_bytes < 1:
            raise ConfigurationError("token bucket burst must be >= 1 byte")
        self.rate_bytes = spec.rate_kbit * 1000.0 / 8.0
        self.burst = float(spec.burst_bytes)
        self.tokens = float(spec.burst_bytes)
        self.clock = 0.0  # time of the last token accrual

    def admit(self, size: int, now: float) -> float:
        """Earliest time the packet passes; consumes its tokens."""
        if size > self.burst:
            raise ConfigurationError(
                f"packet of {size} bytes can never pass a burst of {int(self.burst)} bytes"
            )
        at = max(now, self.clock)  # arrivals behind a deferred packet queue up
        self.tokens = min(self.burst, self.tokens + self.rate_bytes * (at - self.clock))
        self.clock = at
        if self.tokens >= size:
            self.tokens -= size
            return at
        wait = (size - self.tokens) / self.rate_bytes
        self.tokens = 0.0
        self.clock = at + wait
        return at + wait

    def process(self, size: int, t: float) -> float | None:
        return self.admit(size, t)


def token_bucket_admit(packet: bytes, now: float, bucket: TokenBucket) -> float:
    return bucket.admit(len(packet), now)


# --- channel composition -----------------------------------------------------

@dataclass
class ChannelResult:
    delivered: bool
    inject_time: float
    deliver_time: float | None
    drop_stage: str | None
    stage_log: list


TraceWriter = Callable[[dict], None]


class Channel:
    """Ordered stage chain; a drop at any stage is final.

    One logical actor feeds a channel instance (single-owner); independent
    cells use independent instances.
    """

    def __init__(self, stages: Sequence, trace: TraceWriter | None = None):
        self._stages = list(stages)
        self._trace = trace
        self._count = 0
        self.injected = 0
        self.delivered = 0
        self.dropped = 0

    def process(self, data: bytes, now: float, meta: dict | None = None) -> ChannelResult:
        self.injected += 1
        t = now
        log: list = []
        drop_stage = None
        for stage in self._stages:
            out = stage.process(len(data), t)
            if out is None:
                log.append([stage.name, "drop"])
                drop_stage = stage.name
                break
            log.append([stage.name, round(out, 9)])
            t = out
        if drop_stage is None:
            self.delivered += 1
            result = ChannelResult(True, now, t, None, log)
        else:
            self.dropped += 1
            result = ChannelResult(False, now, None, drop_stage, log)
        if self._trace is not None:
            record = {"i": self._count, "t_inject": round(now, 9)}
            if meta:
                record.update(meta)
            record["size"] = len(data)
            record["stages"] = log
            if result.delivered:
                record["outcome"] = "delivered"
                record["t_deliver"] = round(t, 9)
            else:
                record["outcome"] = "dropped"
                record["drop_stage"] = drop_stage
            self._trace(record)
        self._count += 1
        return result


def compose_channel(
    stages: Sequence[StageSpec], *, seed: int = 0, trace: TraceWriter | None = None
) -> Channel:
    """Build a channel from stage specs, instantiated in the given order.

    At most one bandwidth-limiting stage (pipe or token bucket) is allowed.
    An empty list is the identity channel.
    """
    bandwidth_stages = sum(isinstance(s, (PipeSpec, TokenBucketSpec)) for s in stages)
    if bandwidth_stages > 1:
        raise ConfigurationError("duplicate bandwidth stage in channel")
    rng = Rng(seed)
    built = []
    for spec in stages:
        if isinstance(spec, DelayJitterSpec):
            built.append(_DelayJitterStage(spec, rng))
        elif isinstance(spec, LossSpec):
            built.append(_LossStage(spec, rng))
        elif isinstance(spec, PipeSpec):
            built.append(PipeState(spec))
        elif isinstance(spec, TokenBucketSpec):
            built.append(TokenBucket(spec))
        else:
            raise ConfigurationError(f"unknown stage spec {type(spec).__name__}")
    return Channel(built, trace=trace)


def channel_from_config(config: ImpairmentConfig, trace: TraceWriter | None = None) -> Channel:
    config.validate()
    return compose_channel(config.stages(), seed=config.seed, trace=trace)


def identity_channel(trace: TraceWriter | None = None) -> Channel:
    return Channel([], trace=trace)


class JsonlTraceWriter:
    """Line-delimited channel decision log."""

    def __init__(self, path):
        self._fh = open(path, "w", encoding="utf-8")

    def __call__(self, record: dict) -> None:
        self._fh.write(json.dumps(record, separators=(",", ":")) + "\n")

    def close(self) -> None:
        self._fh.close()


def read_trace(path) -> list[dict]:
    with open(path, encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]
