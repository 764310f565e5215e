"""Latency-bounded jitter buffer.

Packets are held until the release deadline of their frame (first arrival of
that RTP timestamp + latency) and handed out in extended-sequence order.
Arrivals after their frame's deadline, or below the highest sequence already
released, are counted as late discards; the released stream is therefore
always sequence-ordered.
"""

from __future__ import annotations

import heapq
from typing import Any


class JitterBuffer:
    def __init__(self, latency_s: float):
        if latency_s < 0:
            raise ValueError("latency must be >= 0")
        self.latency = latency_s
        self._entries: dict[int, Any] = {}  # ext_seq -> payload object
        self._by_deadline: list[tuple[float, int]] = []
        self._by_seq: list[int] = []
        self._first_arrival: dict[int, float] = {}  # rtp timestamp -> arrival
        self._highest_released = -1
        self.late_discards = 0
        self.duplicates = 0

    def __len__(self) -> int:
        return len(self._entries)

    def add(self, ext_seq: int, rtp_timestamp: int, arrival: float, item: Any) -> bool:
        """Returns True when buffered, False when discarded."""
        if ext_seq <= self._highest_released:
            self.late_discards += 1
            return False
        if ext_seq in self._entries:
            self.duplicates += 1
            return False
        deadline = self._first_arrival.setdefault(rtp_timestamp, arrival) + self.latency
        if arrival > deadline:
            self.late_discards += 1
            return False
        self._entries[ext_seq] = item
        heapq.heappush(self._by_deadline, (deadline, ext_seq))
        heapq.heappush(self._by_seq, ext_seq)
        return True

    def next_deadline(self) -> float | None:
        while self._by_deadline and self._by_deadline[0][1] not in self._entries:
            heapq.heappop(self._by_deadline)
        return self._by_deadline[0][0] if self._by_deadline else None

    def release_due(self, now: float) -> list[Any]:
        """All packets up to the highest sequence whose deadline has passed.

        Lower-sequence packets ahead of a due one are released with it (early
        release keeps the output sequence-ordered); nothing is held past its
        deadline.
        """
        threshold = -1
        while self._by_deadline and self._by_deadline[0][0] <= now:
            _, ext_seq = heapq.heappop(self._by_deadline)
            if ext_seq in self._entries:
                threshold = max(threshold, ext_seq)
        if threshold < 0:
            return []
        return self._pop_through(threshold)

    def flush(self) -> list[Any]:
        """Release everything (end of stream)."""
        out = self._pop_through(max(self._entries, default=-1))
        self._first_arrival.clear()
        return out

    def _pop_through(self, threshold: int) -> list[Any]:
        out = []
        while self._by_seq and self._by_seq[0] <= threshold:
            ext_seq = heapq.heappop(self._by_seq)
            item = self._entries.pop(ext_seq, None)
            if item is not None:
                out.append(item)
        if threshold > self._highest_released:
            self._highest_released = threshold
        return out
