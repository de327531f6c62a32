"""Outdoor temperature series: CSV ingestion or a synthetic summer day."""

import csv
import math
from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np


class WeatherError(Exception):
    pass


class ParseError(WeatherError):
    def __init__(self, line_no, message):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class EmptySeries(WeatherError):
    pass


@dataclass(frozen=True)
class WeatherSeries:
    """Minute-resolution outdoor temperature.

    timestamps are strictly increasing UTC seconds with 60 s spacing;
    `interpolated[i]` marks minutes filled in over source gaps.
    """

    timestamps: np.ndarray
    tout: np.ndarray
    interpolated: np.ndarray = field(default=None)

    def __post_init__(self):
        ts = np.asarray(self.timestamps, dtype=np.int64)
        tv = np.asarray(self.tout, dtype=np.float64)
        if ts.size == 0:
            raise EmptySeries("no weather rows")
        if ts.size != tv.size:
            raise ValueError("timestamps and tout length mismatch")
        if ts.size > 1 and not np.all(np.diff(ts) == 60):
            raise ValueError("timestamps must be strictly increasing at 60 s spacing")
        flags = self.interpolated
        if flags is None:
            flags = np.zeros(ts.size, dtype=bool)
        object.__setattr__(self, "timestamps", ts)
        object.__setattr__(self, "tout", tv)
        object.__setattr__(self, "interpolated", np.asarray(flags, dtype=bool))

    def tout_at(self, ts):
        """Nearest-minute lookup, clamped to the series ends."""
        idx = int(np.clip(round((ts - self.timestamps[0]) / 60.0),
                          0, self.timestamps.size - 1))
        return float(self.tout[idx])


def synthetic_tout(hour_of_day):
    """Summer-day default: 29 + 5*sin(2*pi*(hour-9)/24), peak at 15:00."""
    return 29.0 + 5.0 * math.sin(2.0 * math.pi * (hour_of_day - 9.0) / 24.0)


def synthetic_weather(start_ts, minutes):
    """Deterministic sinusoidal series starting at `start_ts` (UTC s)."""
    ts = np.asarray(start_ts + 60 * np.arange(minutes), dtype=np.int64)
    hours = (ts % 86400) / 3600.0
    tout = 29.0 + 5.0 * np.sin(2.0 * np.pi * (hours - 9.0) / 24.0)
    return WeatherSeries(timestamps=ts, tout=tout)


def ingest_weather_csv(path):
    """Parse `timestamp_iso8601,tout_c` rows into a WeatherSeries.

    Gaps larger than 60 s are filled by linear interpolation and flagged.
    """
    raw = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise EmptySeries(f"{path} is empty")
        if [h.strip() for h in header[:2]] != ["timestamp_iso8601", "tout_c"]:
            raise ParseError(1, f"unexpected header {header!r}")
        for line_no, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) < 2:
                raise ParseError(line_no, f"expected 2 columns, got {len(row)}")
            try:
                ts = datetime.fromisoformat(row[0].strip())
            except ValueError as exc:
                raise ParseError(line_no, f"bad timestamp {row[0]!r}: {exc}") from exc
            if ts.tzinfo is None:
                ts = ts.replace(tzinfo=timezone.utc)
            try:
                tout = float(row[1])
            except ValueError as exc:
                raise ParseError(line_no, f"bad temperature {row[1]!r}") from exc
            raw.append((int(ts.timestamp()), tout, line_no))
    if not raw:
        raise EmptySeries(f"{path} has a header but no rows")
    raw.sort(key=lambda r: r[0])

    timestamps, touts, flags = [], [], []
    prev_ts, prev_t = None, None
    for ts, tout, line_no in raw:
        if prev_ts is not None:
            if ts == prev_ts:
                raise ParseError(line_no, f"duplicate timestamp {ts}")
            gap = ts - prev_ts
            if gap % 60:
                raise ParseError(line_no, f"timestamp {ts} not on the minute grid")
            if gap > 60:
                for step in range(60, gap, 60):
                    frac = step / gap
                    timestamps.append(prev_ts + step)
                    touts.append(prev_t + frac * (tout - prev_t))
                    flags.append(True)
        timestamps.append(ts)
        touts.append(tout)
        flags.append(False)
        prev_ts, prev_t = ts, tout
    return WeatherSeries(timestamps=np.array(timestamps),
                         tout=np.array(touts),
                         interpolated=np.array(flags))
