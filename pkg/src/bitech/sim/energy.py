"""Ground-truth AC energy draw, the oracle behind dataset generation.

Per-minute kWh is an affine function of cooling demand plus noise and a
rare compressor-surge term that puts outliers in the right tail:

    kwh = clip(a0 + a1*max(0, tout - setpoint) + a2*solar + a3*occupancy
               + pull*max(0, room_ta - setpoint) + surge + eps, 0, kwh_max)

The pull term is the compressor working down the remaining indoor excess;
after an occupant lowers the set-point it surges, after a raise the unit
coasts, which is what makes set-point changes energy-relevant. All
coefficients are configuration defaults, not measurements.
"""

from dataclasses import dataclass


@dataclass(frozen=True)
class EnergyConfig:
    a0: float = 0.01            # base draw, kWh/min
    a1: float = 0.008           # per degC of (tout - setpoint)
    a2: float = 0.004           # per unit solar factor
    a3: float = 0.002           # per occupant
    pull: float = 0.02          # per degC of indoor excess over setpoint
    kwh_max: float = 0.25
    noise_std: float = 0.003
    surge_prob: float = 0.005   # compressor surge minutes
    surge_lo: float = 0.05
    surge_hi: float = 0.12


DEFAULT_ENERGY = EnergyConfig()


@dataclass(frozen=True)
class EnergyRecord:
    timestamp: float
    kwh: float

    def __post_init__(self):
        if self.kwh < 0:
            raise ValueError("kwh must be >= 0")


def energy_oracle(tout, setpoint, occupancy, solar, mode, rng,
                  room_ta=None, config=DEFAULT_ENERGY):
    """kWh drawn over one minute. Heating is not modelled yet."""
    if mode == "off":
        return 0.0
    if mode != "cooling":
        raise ValueError(f"unsupported AC mode {mode!r}")
    kwh = (config.a0
           + config.a1 * max(0.0, tout - setpoint)
           + config.a2 * solar
           + config.a3 * occupancy)
    if room_ta is not None:
        kwh += config.pull * max(0.0, room_ta - setpoint)
    if rng is not None:
        if config.surge_prob > 0 and rng.random() < config.surge_prob:
            kwh += rng.uniform(config.surge_lo, config.surge_hi)
        if config.noise_std > 0:
            kwh += rng.normal(0.0, config.noise_std)
    return float(min(max(kwh, 0.0), config.kwh_max))
