# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled twin of ``rtplab._kernels_py``.

Must stay bit-identical with the pure implementation: same integer masking,
same IEEE double operations in the same order.  ``tests/test_kernels.py``
cross-checks the two when this extension is available.
"""

from libc.math cimport floor
from libc.stdint cimport int64_t, uint64_t

cdef double _INV_2_53 = 2.0 ** -53


cdef class Rng:
    """splitmix64 generator (see the pure twin for notes)."""

    cdef uint64_t _state

    def __init__(self, seed):
        self._state = <uint64_t> (seed & 0xFFFFFFFFFFFFFFFF)

    cdef uint64_t _next(self):
        self._state += <uint64_t> 0x9E3779B97F4A7C15
        cdef uint64_t z = self._state
        z = (z ^ (z >> 30)) * <uint64_t> 0xBF58476D1CE4E5B9
        z = (z ^ (z >> 27)) * <uint64_t> 0x94D049BB133111EB
        return z ^ (z >> 31)

    def next_u64(self):
        return self._next()

    cdef double _random(self):
        return <double> (self._next() >> 11) * _INV_2_53

    def random(self):
        return self._random()

    def uniform(self, double lo, double hi):
        return lo + (hi - lo) * self._random()


cdef class JitterEstimator:
    """Fixed-point interarrival jitter recurrence (16 fractional bits)."""

    cdef int64_t _jitter_fp
    cdef int64_t _last_transit
    cdef bint _primed

    def __init__(self):
        self._jitter_fp = 0
        self._last_transit = 0
        self._primed = False

    cpdef update(self, int64_t rtp_timestamp, double arrival, int clock_rate):
        cdef int64_t transit = <int64_t> floor(arrival * clock_rate + 0.5) - rtp_timestamp
        cdef int64_t d
        if not self._primed:
            self._last_transit = transit
            self._primed = True
            return
        d = transit - self._last_transit
        self._last_transit = transit
        if d < 0:
            d = -d
        self._jitter_fp += (d << 12) - ((self._jitter_fp + 8) >> 4)

    @property
    def jitter(self):
        return self._jitter_fp >> 16

    @property
    def jitter_fp(self):
        return self._jitter_fp


cdef class SequenceTracker:
    """16-bit RTP sequence tracking with wrap detection."""

    cdef public int64_t base_seq
    cdef public int64_t max_seq
    cdef public int64_t cycles
    cdef public int64_t received

    def __init__(self, int first_seq):
        self.base_seq = first_seq
        self.max_seq = first_seq
        self.cycles = 0
        self.received = 1

    cpdef int64_t update(self, int64_t seq):
        cdef int64_t delta = (seq - self.max_seq) & 0xFFFF
        cdef int64_t ext
        if delta < 0x8000:
            if delta > 0:
                if seq < self.max_seq:
                    self.cycles += 1
                self.max_seq = seq
            ext = (self.cycles << 16) | seq
        else:
            if seq > self.max_seq and self.cycles > 0:
                ext = ((self.cycles - 1) << 16) | seq
            else:
                ext = (self.cycles << 16) | seq
        self.received += 1
        return ext

    @property
    def extended_highest(self):
        return (self.cycles << 16) | self.max_seq


def netem_decide(Rng rng, double delay_s, double jitter_s, double loss_prob):
    """Per-packet delay/jitter + loss decision; see the pure twin for the
    draw-order contract."""
    cdef double extra
    cdef bint dropped
    if jitter_s > 0.0:
        extra = delay_s + rng.uniform(-jitter_s, jitter_s)
        if extra < 0.0:
            extra = 0.0
    else:
        extra = delay_s
    dropped = loss_prob > 0.0 and rng._random() < loss_prob
    return dropped, extra
