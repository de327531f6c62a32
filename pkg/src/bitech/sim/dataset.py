"""Minute-resolution training datasets from the seeded room model.

One row per simulated minute: outdoor and indoor conditions, the occupant
set-point schedule (a reflecting random walk with dwell times), and the
energy oracle's kWh target. Identical seeds give byte-identical output.
"""

import csv
from dataclasses import dataclass, replace

import numpy as np

from ..comfort import mean_radiant_temperature
from ..rng import named_stream
from .energy import DEFAULT_ENERGY, EnergyRecord, energy_oracle
from .room import DEFAULT_ROOM, AcUnit, initial_state, sample_sensors, solar_factor, step
from .weather import synthetic_weather

# 2023-08-01 00:00:00 UTC; fixed so seeded runs are reproducible
DEFAULT_START_TS = 1_690_848_000

FEATURE_NAMES = ("tout", "ta", "rh", "tr", "setpoint", "delta_setpoint",
                 "hour", "occupancy")
CSV_COLUMNS = FEATURE_NAMES + ("kwh",)


@dataclass(frozen=True)
class TrainingRow:
    tout: float
    ta: float
    rh: float
    tr: float
    setpoint: float
    delta_setpoint: float
    hour: float
    occupancy: float
    kwh: float

    def features(self):
        return tuple(getattr(self, name) for name in FEATURE_NAMES)


@dataclass(frozen=True)
class Schedule:
    """Occupancy window and the set-point random walk."""

    occupied_start: float = 8.0    # hour of day
    occupied_end: float = 22.0
    base_occupancy: int = 2
    max_occupancy: int = 4
    setpoint_lo: int = 24
    setpoint_hi: int = 28
    dwell_lo_min: int = 25
    dwell_hi_min: int = 70


DEFAULT_SCHEDULE = Schedule()


def generate_dataset(days=2, seed=7, schedule=DEFAULT_SCHEDULE, trim=2500,
                     start_ts=DEFAULT_START_TS, weather=None,
                     room_config=DEFAULT_ROOM, energy_config=DEFAULT_ENERGY):
    """Returns (rows, energy_records), trimmed to `trim` rows when set."""
    if days < 1:
        raise ValueError("days must be >= 1")
    minutes = days * 1440
    if weather is None:
        weather = synthetic_weather(start_ts, minutes + 1)

    sched_rng = named_stream(seed, "schedule")
    process_rng = named_stream(seed, "process")
    sensor_rng = named_stream(seed, "sensors")
    energy_rng = named_stream(seed, "energy")

    setpoint = int(sched_rng.integers(schedule.setpoint_lo, schedule.setpoint_hi + 1))
    dwell = int(sched_rng.integers(schedule.dwell_lo_min, schedule.dwell_hi_min + 1))
    occupancy = 0
    state = initial_state(weather.tout_at(start_ts), config=room_config)

    rows, records = [], []
    prev_setpoint = setpoint
    for m in range(minutes):
        ts = start_ts + 60 * (m + 1)
        hour = ((m + 1) % 1440) / 60.0
        occupied = schedule.occupied_start <= hour < schedule.occupied_end

        if occupied:
            if occupancy == 0:
                occupancy = schedule.base_occupancy
            if m % 15 == 0:
                wobble = int(sched_rng.integers(-1, 2))
                occupancy = int(np.clip(occupancy + wobble, 1,
                                        schedule.max_occupancy))
            dwell -= 1
            if dwell <= 0:
                move = int(sched_rng.choice((-1, 1)))
                setpoint = int(np.clip(setpoint + move, schedule.setpoint_lo,
                                       schedule.setpoint_hi))
                dwell = int(sched_rng.integers(schedule.dwell_lo_min,
                                               schedule.dwell_hi_min + 1))
        else:
            occupancy = 0

        ac = AcUnit(setpoint=setpoint, mode="cooling" if occupied else "off")
        tout = weather.tout_at(ts)
        state = replace(state, occupancy=occupancy)
        state = step(state, tout, ac, rng=process_rng, config=room_config)

        samples = sample_sensors(state, sensor_rng, timestamp=ts)
        mean_ta = float(np.mean([s.ta for s in samples]))
        mean_tg = float(np.mean([s.tg for s in samples]))
        mean_rh = float(np.mean([s.rh for s in samples]))
        tr = mean_radiant_temperature(mean_tg, mean_ta)

        true_room_ta = float(np.mean([p.ta for p in state.points]))
        kwh = energy_oracle(tout, setpoint, occupancy, solar_factor(hour),
                            ac.mode, energy_rng, room_ta=true_room_ta,
                            config=energy_config)
        rows.append(TrainingRow(
            tout=tout, ta=mean_ta, rh=mean_rh, tr=tr,
            setpoint=float(setpoint),
            delta_setpoint=float(setpoint - prev_setpoint),
            hour=hour, occupancy=float(occupancy), kwh=kwh))
        records.append(EnergyRecord(timestamp=ts, kwh=kwh))
        prev_setpoint = setpoint

    if trim:
        rows = rows[:trim]
        records = records[:trim]
    return rows, records


def rows_to_arrays(rows):
    """(X, y, feature_names) for the learning stack."""
    X = np.array([r.features() for r in rows], dtype=np.float64)
    y = np.array([r.kwh for r in rows], dtype=np.float64)
    return X, y, list(FEATURE_NAMES)


def write_dataset_csv(rows, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for r in rows:
            writer.writerow([repr(getattr(r, c)) for c in CSV_COLUMNS])


def read_dataset_csv(path):
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != list(CSV_COLUMNS):
            raise ValueError(f"unexpected dataset header {header!r}")
        for raw in reader:
            if not raw:
                continue
            values = [float(v) for v in raw]
            rows.append(TrainingRow(**dict(zip(CSV_COLUMNS, values))))
    return rows


def write_energy_csv(records, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("timestamp", "kwh"))
        for rec in records:
            writer.writerow([repr(rec.timestamp), repr(rec.kwh)])
