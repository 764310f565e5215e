"""File sinks: the RTCP stats log and its reader.

One CSV record per RTCP event with a stable column order; unused fields are
left empty.  Times are virtual seconds in simulation mode and run-relative
wall seconds in UDP mode, always rendered with 6 decimals so identical runs
produce identical bytes.
"""

from __future__ import annotations

import csv
import io

STATS_COLUMNS = (
    "time",
    "session",
    "event",  # SR | RR | BYE
    "ssrc",
    "ntp_time",
    "rtp_time",
    "packet_count",
    "octet_count",
    "source_ssrc",
    "fraction_lost",
    "cumulative_lost",
    "extended_highest_seq",
    "interarrival_jitter",
    "last_sr",
    "delay_since_last_sr",
)


class StatsCsvWriter:
    def __init__(self, path_or_buf):
        if isinstance(path_or_buf, (str, bytes)) or hasattr(path_or_buf, "__fspath__"):
            self._fh = open(path_or_buf, "w", encoding="utf-8", newline="")
            self._owns = True
        else:
            self._fh = path_or_buf
            self._owns = False
        self._fh.write(",".join(STATS_COLUMNS) + "\n")

    def row(self, time: float, session: str, event: str, **fields) -> None:
        values = {"time": f"{time:.6f}", "session": session, "event": event}
        values.update({k: str(v) for k, v in fields.items() if v is not None})
        unknown = set(values) - set(STATS_COLUMNS)
        if unknown:
            raise ValueError(f"unknown stats columns: {sorted(unknown)}")
        self._fh.write(",".join(values.get(c, "") for c in STATS_COLUMNS) + "\n")

    def close(self) -> None:
        if self._owns:
            self._fh.close()


class NullStatsWriter:
    def row(self, *args, **kwargs) -> None:
        pass

    def close(self) -> None:
        pass


def read_stats(path) -> list[dict]:
    with open(path, encoding="utf-8", newline="") as fh:
        return list(csv.DictReader(fh))


def stats_to_string(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=STATS_COLUMNS)
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()
