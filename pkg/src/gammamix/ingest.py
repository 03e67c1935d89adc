"""Quote ingestion and midpoint-time return series.

Input is a CSV with header ``timestamp,bid,ask`` and ISO-8601 timestamps in
exchange-local time. The midpoint clock advances only when the midpoint
changes. The first 30 minutes after the open are dropped and returns never
span two calendar days.
"""

from __future__ import annotations

import csv
import datetime as dt
import io
import math
import os
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, NamedTuple, Sequence

import numpy as np

from ._io import atomic_write

__all__ = [
    "IngestError",
    "FormatError",
    "OrderingError",
    "QuoteEvent",
    "Rejection",
    "RejectionReport",
    "ParsedQuotes",
    "MidpointSeries",
    "ReturnSeries",
    "parse_quotes",
    "group_by_day",
    "build_midpoint_series",
    "build_all_series",
    "returns_at_scale",
    "write_returns_csv",
    "write_midpoints_csv",
    "read_returns_csv",
    "TRUNCATE_MINUTES",
    "DEFAULT_OPEN",
]

TRUNCATE_MINUTES = 30
DEFAULT_OPEN = dt.time(8, 0)
HEADER = ("timestamp", "bid", "ask")


class IngestError(Exception):
    pass


class FormatError(IngestError, ValueError):
    """The quote file is not in the expected schema, or is mostly garbage."""


class OrderingError(IngestError, ValueError):
    def __init__(self, index, message=None):
        super().__init__(message or f"events out of timestamp order at index {index}")
        self.index = index


class QuoteEvent(NamedTuple):
    timestamp: dt.datetime
    bid: float
    ask: float

    @property
    def mid(self) -> float:
        return 0.5 * (self.bid + self.ask)


class Rejection(NamedTuple):
    line: int
    reason: str
    text: str


@dataclass
class RejectionReport:
    rows: int = 0
    counts: Counter = field(default_factory=Counter)
    samples: List[Rejection] = field(default_factory=list)
    max_samples: int = 20

    @property
    def rejected(self) -> int:
        return sum(self.counts.values())

    def add(self, line, reason, text):
        self.counts[reason] += 1
        if len(self.samples) < self.max_samples:
            self.samples.append(Rejection(line, reason, text))

    def summary(self) -> str:
        if not self.rejected:
            return f"{self.rows} rows, none rejected"
        parts = ", ".join(f"{k}={v}" for k, v in sorted(self.counts.items()))
        return f"{self.rows} rows, {self.rejected} rejected ({parts})"


class ParsedQuotes(NamedTuple):
    events: List[QuoteEvent]
    report: RejectionReport


@dataclass(frozen=True)
class MidpointSeries:
    day: dt.date
    log_mid: np.ndarray

    @property
    def ticks(self) -> int:
        """Number of single-tick returns in the day."""
        return max(len(self.log_mid) - 1, 0)


@dataclass(frozen=True)
class ReturnSeries:
    day: dt.date
    tau: int
    returns: np.ndarray


def _parse_timestamp(text: str) -> dt.datetime:
    text = text.strip()
    if text.endswith("Z"):
        text = text[:-1] + "+00:00"
    return dt.datetime.fromisoformat(text)


def _open_text(source):
    if isinstance(source, (str, os.PathLike)):
        return open(source, newline=""), True
    if isinstance(source, (bytes, bytearray)):
        return io.StringIO(source.decode("utf-8"), newline=""), True
    if isinstance(source, io.TextIOBase):
        return source, False
    return io.TextIOWrapper(source, encoding="utf-8", newline=""), False


def parse_quotes(source, max_reject_fraction: float = 0.5) -> ParsedQuotes:
    """Read quote events from a path, bytes, or a binary/text stream.

    Malformed rows, crossed quotes and nonpositive prices are rejected and
    counted in the report. Raises :class:`FormatError` when the header is
    missing or more than ``max_reject_fraction`` of rows are rejected.
    """
    fh, close = _open_text(source)
    try:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip().lower() for h in header) != HEADER:
            raise FormatError(f"expected header {','.join(HEADER)!r}, got {header!r}")
        events = []
        report = RejectionReport()
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            report.rows += 1
            if len(row) != 3:
                report.add(lineno, "malformed", ",".join(row))
                continue
            try:
                ts = _parse_timestamp(row[0])
                bid = float(row[1])
                ask = float(row[2])
            except ValueError:
                report.add(lineno, "malformed", ",".join(row))
                continue
            if not (math.isfinite(bid) and math.isfinite(ask)):
                report.add(lineno, "nonfinite", ",".join(row))
            elif bid <= 0.0 or ask <= 0.0:
                report.add(lineno, "nonpositive", ",".join(row))
            elif bid > ask:
                report.add(lineno, "crossed", ",".join(row))
            else:
                events.append(QuoteEvent(ts, bid, ask))
    finally:
        if close:
            fh.close()
    if report.rows and report.rejected > max_reject_fraction * report.rows:
        raise FormatError(f"too many rejected rows: {report.summary()}")
    return ParsedQuotes(events, report)


def group_by_day(events: Iterable[QuoteEvent]) -> Dict[dt.date, List[QuoteEvent]]:
    """Split events by calendar date of their timestamp, keeping input order."""
    days: Dict[dt.date, List[QuoteEvent]] = {}
    for ev in events:
        days.setdefault(ev.timestamp.date(), []).append(ev)
    return days


def build_midpoint_series(events: Sequence[QuoteEvent], open_time: dt.time = DEFAULT_OPEN,
                          day: dt.date = None) -> MidpointSeries:
    """Midpoint-time log prices for one day's events.

    Events before ``open_time`` + 30 minutes are discarded. A tick is recorded
    only when the midpoint differs from the last recorded one.
    """
    if day is None:
        if not events:
            raise ValueError("day is required for an empty event list")
        day = events[0].timestamp.date()
    stamps = [ev.timestamp for ev in events]
    for i in range(1, len(stamps)):
        if stamps[i] < stamps[i - 1]:
            raise OrderingError(i)
    cutoff = dt.datetime.combine(day, open_time) + dt.timedelta(minutes=TRUNCATE_MINUTES)
    if stamps and stamps[0].tzinfo is not None:
        cutoff = cutoff.replace(tzinfo=stamps[0].tzinfo)
    first = next((i for i, ts in enumerate(stamps) if ts >= cutoff), len(stamps))
    kept = events[first:]
    if not kept:
        return MidpointSeries(day, np.empty(0))
    bid = np.fromiter((ev.bid for ev in kept), float, len(kept))
    ask = np.fromiter((ev.ask for ev in kept), float, len(kept))
    mid = 0.5 * (bid + ask)
    changed = np.empty(len(mid), dtype=bool)
    changed[0] = True
    np.not_equal(mid[1:], mid[:-1], out=changed[1:])
    return MidpointSeries(day, np.log(mid[changed]))


def build_all_series(events: Iterable[QuoteEvent], open_time: dt.time = DEFAULT_OPEN) -> List[MidpointSeries]:
    """One midpoint series per calendar day, in date order."""
    by_day = group_by_day(events)
    return [build_midpoint_series(by_day[d], open_time, d) for d in sorted(by_day)]


def returns_at_scale(series: MidpointSeries, tau: int) -> ReturnSeries:
    """Nonoverlapping tau-tick returns anchored at the day's first tick."""
    if isinstance(tau, bool) or int(tau) != tau or tau < 1:
        raise ValueError(f"tau must be a positive integer, got {tau!r}")
    tau = int(tau)
    count = series.ticks // tau
    if count == 0:
        return ReturnSeries(series.day, tau, np.empty(0))
    ends = series.log_mid[: count * tau + 1 : tau]
    return ReturnSeries(series.day, tau, np.diff(ends))


def write_returns_csv(path, returns: Iterable[ReturnSeries], preamble: Sequence[str] = ()) -> None:
    with atomic_write(path) as fh:
        for line in preamble:
            fh.write(f"# {line}\n")
        w = csv.writer(fh)
        w.writerow(["day", "tau", "k", "return"])
        for rs in returns:
            day = rs.day.isoformat()
            for k, r in enumerate(rs.returns.tolist()):
                w.writerow([day, rs.tau, k, repr(r)])


def write_midpoints_csv(path, series: Iterable[MidpointSeries], preamble: Sequence[str] = ()) -> None:
    with atomic_write(path) as fh:
        for line in preamble:
            fh.write(f"# {line}\n")
        w = csv.writer(fh)
        w.writerow(["day", "t", "log_mid"])
        for s in series:
            day = s.day.isoformat()
            for t, v in enumerate(s.log_mid.tolist()):
                w.writerow([day, t, repr(v)])


def read_returns_csv(path) -> Dict[int, Dict[dt.date, np.ndarray]]:
    """Inverse of :func:`write_returns_csv`: ``{tau: {day: returns}}``."""
    acc: Dict[int, Dict[dt.date, list]] = {}
    with open(path, newline="") as fh:
        reader = csv.reader(row for row in fh if not row.startswith("#"))
        header = next(reader, None)
        if header != ["day", "tau", "k", "return"]:
            raise FormatError(f"unexpected returns header {header!r}")
        for row in reader:
            day = dt.date.fromisoformat(row[0])
            acc.setdefault(int(row[1]), {}).setdefault(day, []).append(float(row[3]))
    return {tau: {d: np.asarray(v) for d, v in days.items()} for tau, days in acc.items()}
