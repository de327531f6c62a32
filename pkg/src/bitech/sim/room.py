"""Five-point room model with per-point radiant biases and sensor noise.

Physics-lite single-node air temperature: the AC pulls toward its
set-point (time constant 20 min while running), the envelope leaks toward
outdoor temperature (90 min). Point peculiarities ride on top: point 1
sits below the AC outlet (cold radiant bias, elevated air speed while
cooling), point 4 takes the western sun (afternoon globe-temperature bump
peaking at 15:00). CO2 integrates an occupancy source against ventilation
decay; humidity follows a diurnal template.
"""

import math
from dataclasses import dataclass, field, replace

from ..comfort import EnvironmentSample


MODES = ("cooling", "heating", "off")


@dataclass(frozen=True)
class AcUnit:
    setpoint: int = 26
    mode: str = "cooling"
    rated_kw: float = 2.2

    def __post_init__(self):
        if not 16 <= self.setpoint <= 30:
            raise ValueError(f"setpoint {self.setpoint} outside [16, 30]")
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")

    @property
    def running(self):
        return self.mode != "off"


@dataclass(frozen=True)
class PointConditions:
    ta: float
    tg: float
    rh: float
    vair: float
    co2: float


@dataclass(frozen=True)
class RoomState:
    points: tuple            # five PointConditions
    occupancy: int
    minute: int              # simulation minute index

    def __post_init__(self):
        if len(self.points) != 5:
            raise ValueError("room model tracks exactly 5 points")


@dataclass(frozen=True)
class RoomConfig:
    tau_ac_min: float = 20.0
    tau_leak_min: float = 90.0
    # per-point air-temperature offsets from the room node (stratification)
    ta_offsets: tuple = (-0.5, 0.0, 0.1, 0.5, -0.1)
    # constant radiant offsets tg - ta when no special effect applies
    tg_offsets: tuple = (0.0, 0.2, 0.2, 0.2, 0.2)
    ac_outlet_tg_bias: float = -1.5     # point 1 while cooling
    ac_outlet_vair: float = 0.6         # m/s at point 1 while cooling
    base_vair: float = 0.05
    west_sun_peak: float = 3.0          # degC tg bump at point 4, 15:00
    rh_base: float = 55.0
    rh_swing: float = 8.0
    rh_ac_drop: float = 4.0
    co2_outdoor: float = 420.0
    co2_per_person_min: float = 6.0     # ppm/min source per occupant
    co2_tau_min: float = 40.0
    process_noise_ta: float = 0.02      # degC per step on the room node


DEFAULT_ROOM = RoomConfig()


def solar_factor(hour_of_day):
    """Western-sun intensity in [0, 1]; peak 15:00, zero outside 8:00-22:00."""
    return max(0.0, math.cos(math.pi * (hour_of_day - 15.0) / 14.0))


def initial_state(tout, occupancy=0, minute=0, config=DEFAULT_ROOM):
    """Room in equilibrium with outdoors, AC off."""
    points = []
    for i in range(5):
        ta = tout + config.ta_offsets[i]
        points.append(PointConditions(
            ta=ta, tg=ta + config.tg_offsets[i],
            rh=config.rh_base, vair=config.base_vair, co2=config.co2_outdoor))
    return RoomState(points=tuple(points), occupancy=occupancy, minute=minute)


def _hour(minute):
    return (minute % 1440) / 60.0


def step(state, tout, ac, dt=60.0, rng=None, config=DEFAULT_ROOM):
    """Advance the room one interval; returns a new RoomState snapshot."""
    dt_min = dt / 60.0
    hour = _hour(state.minute + 1)
    cooling = ac.mode == "cooling"

    ta_offsets = config.ta_offsets
    room_ta = sum(p.ta - off for p, off in zip(state.points, ta_offsets)) / 5.0
    drift = (tout - room_ta) / config.tau_leak_min
    if ac.running:
        drift += (ac.setpoint - room_ta) / config.tau_ac_min
    room_ta += dt_min * drift
    if rng is not None and config.process_noise_ta > 0:
        room_ta += float(rng.normal(0.0, config.process_noise_ta))

    co2 = state.points[0].co2
    co2 += dt_min * (config.co2_per_person_min * state.occupancy
                     - (co2 - config.co2_outdoor) / config.co2_tau_min)
    co2 = min(max(co2, 300.0), 10000.0)

    rh = config.rh_base + config.rh_swing * math.sin(
        2.0 * math.pi * (hour - 5.0) / 24.0)
    if ac.running:
        rh -= config.rh_ac_drop
    rh = min(max(rh, 5.0), 95.0)

    sun = solar_factor(hour)
    points = []
    for i in range(5):
        ta = room_ta + ta_offsets[i]
        tg_bias = config.tg_offsets[i]
        vair = config.base_vair
        if i == 0 and cooling:
            tg_bias = config.ac_outlet_tg_bias
            vair = config.ac_outlet_vair
        if i == 3:
            tg_bias += config.west_sun_peak * sun
        points.append(PointConditions(ta=ta, tg=ta + tg_bias, rh=rh,
                                      vair=vair, co2=co2))
    return RoomState(points=tuple(points), occupancy=state.occupancy,
                     minute=state.minute + 1)


# Gaussian noise per channel, from the sensor datasheets' accuracy column
SENSOR_SIGMA = {"tg": 0.1, "ta": 0.5, "rh": 3.0, "vair": 0.01, "co2": 50.0}


def sample_sensors(state, rng, timestamp=0.0, sigma=None):
    """Noisy sensor read of every point; clamped to physical ranges."""
    sig = dict(SENSOR_SIGMA)
    if sigma is not None:
        sig.update(sigma)
    samples = []
    for i, p in enumerate(state.points):
        ta = p.ta + (rng.normal(0.0, sig["ta"]) if sig["ta"] else 0.0)
        tg = p.tg + (rng.normal(0.0, sig["tg"]) if sig["tg"] else 0.0)
        rh = p.rh + (rng.normal(0.0, sig["rh"]) if sig["rh"] else 0.0)
        vair = p.vair + (rng.normal(0.0, sig["vair"]) if sig["vair"] else 0.0)
        co2 = p.co2 + (rng.normal(0.0, sig["co2"]) if sig["co2"] else 0.0)
        samples.append(EnvironmentSample(
            point_id=i + 1,
            timestamp=timestamp,
            ta=min(max(ta, -20.0), 60.0),
            tg=min(max(tg, -20.0), 80.0),
            rh=min(max(rh, 0.0), 100.0),
            vair=max(vair, 0.0),
            co2=min(max(co2, 300.0), 10000.0),
        ))
    return samples


def estimate_occupancy(co2_ppm, config=DEFAULT_ROOM, max_people=12):
    """Invert the CO2 steady state: occ ~= (co2-outdoor)/(source*tau)."""
    scale = config.co2_per_person_min * config.co2_tau_min
    est = (co2_ppm - config.co2_outdoor) / scale
    return int(min(max(round(est), 0), max_people))
