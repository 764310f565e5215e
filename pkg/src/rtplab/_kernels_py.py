"""Pure-Python implementations of the per-packet hot kernels.

A compiled twin of this module lives in ``_speedups.pyx``; ``rtplab.kernels``
picks whichever is available at import time.  Both implementations must stay
bit-identical: all integer arithmetic is masked to 64 bits and all float
operations are plain IEEE double operations performed in the same order.
"""

import math

MASK64 = 0xFFFFFFFFFFFFFFFF

_INV_2_53 = 2.0 ** -53


class Rng:
    """splitmix64 generator.

    Small, fast and trivially portable between the pure and compiled kernel
    implementations.  Not cryptographic; used only for reproducible
    impairment decisions and synthetic media sizing.
    """

    __slots__ = ("_state",)

    def __init__(self, seed: int):
        self._state = seed & MASK64

    def next_u64(self) -> int:
        self._state = (self._state + 0x9E3779B97F4A7C15) & MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    def random(self) -> float:
        """Uniform double in [0, 1) with 53 bits of precision."""
        return (self.next_u64() >> 11) * _INV_2_53

    def uniform(self, lo: float, hi: float) -> float:
        return lo + (hi - lo) * self.random()


class JitterEstimator:
    """Interarrival jitter recurrence J += (|D| - J)/16 in stream clock units.

    State is kept in fixed point with 16 fractional bits so the pure and
    compiled kernels produce identical values.  Transit times are quantized
    to whole clock units (floor(x + 0.5)) before differencing.
    """

    __slots__ = ("_jitter_fp", "_last_transit", "_primed")

    def __init__(self):
        self._jitter_fp = 0
        self._last_transit = 0
        self._primed = False

    def update(self, rtp_timestamp: int, arrival: float, clock_rate: int) -> None:
        transit = int(math.floor(arrival * clock_rate + 0.5)) - rtp_timestamp
        if not self._primed:
            # First packet only seeds the transit reference.
            self._last_transit = transit
            self._primed = True
            return
        d = transit - self._last_transit
        self._last_transit = transit
        if d < 0:
            d = -d
        self._jitter_fp += (d << 12) - ((self._jitter_fp + 8) >> 4)

    @property
    def jitter(self) -> int:
        """Current estimate truncated to integer clock units."""
        return self._jitter_fp >> 16

    @property
    def jitter_fp(self) -> int:
        return self._jitter_fp


class SequenceTracker:
    """16-bit RTP sequence tracking with wrap (cycle) detection.

    A wrap is counted when a forward step (delta < 0x8000 mod 2**16) lands on
    a numerically smaller sequence number.  Old or duplicate packets never
    touch ``cycles``/``max_seq``.
    """

    __slots__ = ("base_seq", "max_seq", "cycles", "received")

    def __init__(self, first_seq: int):
        self.base_seq = first_seq
        self.max_seq = first_seq
        self.cycles = 0
        self.received = 1

    def update(self, seq: int) -> int:
        """Register one packet; returns its extended sequence number."""
        delta = (seq - self.max_seq) & 0xFFFF
        if delta < 0x8000:
            if delta > 0:
                if seq < self.max_seq:
                    self.cycles += 1
                self.max_seq = seq
            ext = (self.cycles << 16) | seq
        else:
            # Reordered packet from the past.
            if seq > self.max_seq and self.cycles > 0:
                ext = ((self.cycles - 1) << 16) | seq
            else:
                ext = (self.cycles << 16) | seq
        self.received += 1
        return ext

    @property
    def extended_highest(self) -> int:
        return (self.cycles << 16) | self.max_seq


def netem_decide(rng: Rng, delay_s: float, jitter_s: float, loss_prob: float):
    """One per-packet delay/jitter + loss decision.

    Draw order is fixed: the jitter offset is drawn first (only when
    jitter > 0), then the loss draw (only when loss_prob > 0).  Callers that
    replay the stream independently must consume draws in the same order.
    Returns (dropped, extra_delay_s); extra delay is clamped at 0 so delivery
    never precedes injection.
    """
    if jitter_s > 0.0:
        extra = delay_s + rng.uniform(-jitter_s, jitter_s)
        if extra < 0.0:
            extra = 0.0
    else:
        extra = delay_s
    dropped = loss_prob > 0.0 and rng.random() < loss_prob
    return dropped, extra
