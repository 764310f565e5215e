"""Per-source reception statistics and RTCP report assembly."""

from __future__ import annotations

import math

from rtplab.kernels import JitterEstimator, SequenceTracker
from rtplab.rtp import ReceptionReport, SenderReport, ntp_middle32


class SourceStats:
    """Loss, extended-sequence and jitter accounting for one SSRC."""

    def __init__(self, ssrc: int, clock_rate: int):
        self.ssrc = ssrc
        self.clock_rate = clock_rate
        self.tracker: SequenceTracker | None = None
        self.jitter = JitterEstimator()
        self._expected_prior = 0
        self._received_prior = 0
        self.last_sr: SenderReport | None = None
        self.last_sr_arrival: float | None = None

    def on_rtp(self, seq: int, rtp_timestamp: int, arrival: float) -> int:
        """Returns the packet's extended sequence number."""
        if self.tracker is None:
            self.tracker = SequenceTracker(seq)
            ext = seq
        else:
            ext = self.tracker.update(seq)
        self.jitter.update(rtp_timestamp, arrival, self.clock_rate)
        return ext

    def on_sender_report(self, sr: SenderReport, arrival: float) -> None:
        self.last_sr = sr
        self.last_sr_arrival = arrival

    @property
    def packets_received(self) -> int:
        return self.tracker.received if self.tracker is not None else 0

    @property
    def extended_highest(self) -> int:
        return self.tracker.extended_highest if self.tracker is not None else 0

    @property
    def expected(self) -> int:
        if self.tracker is None:
            return 0
        return self.extended_highest - self.tracker.base_seq + 1

    @property
    def cumulative_lost(self) -> int:
        return self.expected - self.packets_received

    def build_reception_report(self, now: float) -> ReceptionReport | None:
        """RFC-style report block; interval counters reset on each call.

        Returns None until at least one packet has been received.
        """
        if self.tracker is None:
            return None
        expected = self.expected
        received = self.packets_received
        interval_expected = expected - self._expected_prior
        interval_received = received - self._received_prior
        self._expected_prior = expected
        self._received_prior = received
        interval_lost = interval_expected - interval_received
        if interval_expected <= 0 or interval_lost <= 0:
            fraction = 0  # duplicates can push interval loss negative
        else:
            fraction = min(255, (interval_lost * 256) // interval_expected)
        if self.last_sr is not None and self.last_sr_arrival is not None:
            lsr = ntp_middle32(self.last_sr.ntp_time)
            dlsr = max(0, int(math.floor((now - self.last_sr_arrival) * 65536.0)))
        else:
            lsr = 0
            dlsr = 0
        return ReceptionReport(
            source_ssrc=self.ssrc,
            fraction_lost=fraction,
            cumulative_lost=self.cumulative_lost,
            extended_highest_seq=self.extended_highest,
            interarrival_jitter=self.jitter.jitter,
            last_sr=lsr,
            delay_since_last_sr=dlsr,
        )
