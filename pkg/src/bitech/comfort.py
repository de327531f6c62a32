"""Thermal comfort kernel: mean radiant temperature and the PMV/PPD index.

The comfort vote is computed from six factors: air temperature ta, mean
radiant temperature tr, relative air velocity vair, water vapour partial
pressure pa, metabolic rate M and clothing insulation Icl. tr is derived
from a standard 150 mm black-globe reading, and the clothing surface
temperature tcl is the root of the nonlinear balance

    tcl = 35.7 - 0.028*(M - W)
          - Icl*[3.96e-8*fcl*((tcl+273)^4 - (tr+273)^4) + fcl*hc*(tcl-ta)]

with hc = max(2.38*|tcl-ta|^0.25, 12.1*sqrt(vair)), solved here by a damped
fixed-point iteration. All functions are pure and deterministic.
"""

import math
from dataclasses import dataclass


MET_WATTS = 58.15        # W/m^2 per met
CLO_INSULATION = 0.155   # m^2K/W per clo

MRT_VARIANTS = ("sqrt", "iso7726")


class ComfortError(Exception):
    """Base class for comfort-kernel failures."""


class NonPhysical(ComfortError):
    """Globe correction radicand is not positive (extreme cooling)."""


class NoConvergence(ComfortError):
    """Clothing-temperature iteration exhausted its iteration budget."""


class NonPhysicalRoot(ComfortError):
    """Converged clothing temperature falls outside (0, 60) degC."""


class OutOfValidity(ComfortError):
    """Inputs breach the validity envelope of the comfort model."""


@dataclass(frozen=True)
class ComfortConfig:
    """Numerical knobs for the kernel.

    mrt_variant selects the exponent on |tg - ta| in the globe correction:
    "sqrt" uses 1/2 (default), "iso7726" uses the 1/4 natural-convection
    form.
    """

    mrt_variant: str = "sqrt"
    tcl_tolerance: float = 1e-5      # degC, residual of the balance
    tcl_max_iterations: int = 150
    tcl_damping: float = 0.5

    def __post_init__(self):
        if self.mrt_variant not in MRT_VARIANTS:
            raise ValueError(f"unknown mrt_variant {self.mrt_variant!r}")
        if self.tcl_tolerance <= 0:
            raise ValueError("tcl_tolerance must be > 0")
        if self.tcl_max_iterations < 1:
            raise ValueError("tcl_max_iterations must be >= 1")
        if not 0 < self.tcl_damping <= 1:
            raise ValueError("tcl_damping must be in (0, 1]")


DEFAULT_CONFIG = ComfortConfig()


@dataclass(frozen=True)
class EnvironmentSample:
    """One timestamped reading at one measurement point.

    ta: air temperature degC, tg: globe temperature degC, rh: relative
    humidity %, vair: relative air velocity m/s, co2: ppm.
    """

    point_id: int
    timestamp: float
    ta: float
    tg: float
    rh: float
    vair: float
    co2: float

    def __post_init__(self):
        if not 1 <= self.point_id <= 5:
            raise ValueError(f"point_id {self.point_id} outside 1..5")
        if not -20.0 <= self.ta <= 60.0:
            raise ValueError(f"ta {self.ta} outside [-20, 60]")
        if not -20.0 <= self.tg <= 80.0:
            raise ValueError(f"tg {self.tg} outside [-20, 80]")
        if not 0.0 <= self.rh <= 100.0:
            raise ValueError(f"rh {self.rh} outside [0, 100]")
        if self.vair < 0.0:
            raise ValueError(f"vair {self.vair} negative")
        if not 300.0 <= self.co2 <= 10000.0:
            raise ValueError(f"co2 {self.co2} outside [300, 10000]")


@dataclass(frozen=True)
class PersonalFactors:
    """Non-environmental comfort factors, all in W/m^2 and m^2K/W."""

    metabolic_rate: float
    external_work: float = 0.0
    clothing_insulation: float = 0.5 * CLO_INSULATION

    @classmethod
    def from_met_clo(cls, met, clo, work_met=0.0):
        """Build from met / clo units (1 met = 58.15 W/m^2, 1 clo = 0.155 m^2K/W)."""
        return cls(
            metabolic_rate=met * MET_WATTS,
            external_work=work_met * MET_WATTS,
            clothing_insulation=clo * CLO_INSULATION,
        )


@dataclass(frozen=True)
class ComfortResult:
    """Derived thermal quantities for one sample."""

    tr: float    # mean radiant temperature degC
    pa: float    # water vapour partial pressure Pa
    fcl: float   # clothing area factor
    hc: float    # convective coefficient W/m^2K
    tcl: float   # clothing surface temperature degC
    pmv: float   # reported vote, clamped to [-3.5, 3.5]
    ppd: float   # percentage dissatisfied, from the reported pmv
    pmv_clamped: bool = False


def mean_radiant_temperature(tg, ta, config=DEFAULT_CONFIG):
    """Mean radiant temperature (degC) from a 150 mm globe reading.

    tr = [(tg+273)^4 + 0.4e8 * |tg-ta|^e * (tg-ta)]^(1/4) - 273 with
    e = 1/2 ("sqrt") or 1/4 ("iso7726"). Raises NonPhysical when the
    bracketed radicand is not positive.
    """
    exponent = 0.5 if config.mrt_variant == "sqrt" else 0.25
    radicand = (tg + 273.0) ** 4 + 0.4e8 * abs(tg - ta) ** exponent * (tg - ta)
    if radicand <= 0.0:
        raise NonPhysical(
            f"globe correction radicand {radicand:.3e} <= 0 for tg={tg}, ta={ta}"
        )
    return radicand ** 0.25 - 273.0


def vapor_pressure(ta, rh):
    """Water vapour partial pressure in Pa from air temperature and rh %."""
    return rh * 10.0 * math.exp(16.6536 - 4030.183 / (ta + 235.0))


def clothing_area_factor(icl):
    """Clothed-to-nude surface area ratio from insulation in m^2K/W."""
    if icl < 0.0:
        raise ValueError("clothing insulation must be >= 0")
    if icl <= 0.078:
        return 1.00 + 1.290 * icl
    return 1.05 + 0.645 * icl


def _convective_coefficient(tcl, ta, vair):
    # natural-convection branch wins when the forced term is small
    return max(2.38 * abs(tcl - ta) ** 0.25, 12.1 * math.sqrt(vair))


def solve_clothing_temperature(ta, tr, vair, factors, config=DEFAULT_CONFIG):
    """Solve the clothing-surface balance for (tcl degC, hc W/m^2K).

    Damped fixed point: tcl <- tcl + damping*(g(tcl) - tcl) where g is the
    right-hand side of the balance. Converged when the undamped residual
    |g(tcl) - tcl| drops below tcl_tolerance.
    """
    mw = factors.metabolic_rate - factors.external_work
    icl = factors.clothing_insulation
    fcl = clothing_area_factor(icl)
    skin = 35.7 - 0.028 * mw

    tcl = skin
    hc = _convective_coefficient(tcl, ta, vair)
    for _ in range(config.tcl_max_iterations):
        hc = _convective_coefficient(tcl, ta, vair)
        radiant = 3.96e-8 * fcl * ((tcl + 273.0) ** 4 - (tr + 273.0) ** 4)
        g = skin - icl * (radiant + fcl * hc * (tcl - ta))
        if abs(g - tcl) < config.tcl_tolerance:
            tcl = g
            break
        tcl = tcl + config.tcl_damping * (g - tcl)
    else:
        raise NoConvergence(
            f"no clothing-temperature root after {config.tcl_max_iterations} iterations"
        )
    if not (0.0 < tcl < 60.0) or math.isnan(tcl):
        raise NonPhysicalRoot(f"clothing temperature {tcl:.2f} degC outside (0, 60)")
    return tcl, _convective_coefficient(tcl, ta, vair)


def ppd_from_pmv(pmv):
    """Percentage dissatisfied for a given vote; symmetric, minimum 5%."""
    return 100.0 - 95.0 * math.exp(-0.03353 * pmv ** 4 - 0.2179 * pmv ** 2)


def pmv_ppd(sample, factors, config=DEFAULT_CONFIG):
    """Full comfort evaluation of one environment sample.

    Raises OutOfValidity when inputs leave the model envelope
    (M in [46, 232] W/m^2, external work in [0, M), Icl <= 0.310 m^2K/W,
    vair <= 1.5 m/s, pa <= 2700 Pa). The reported vote is clamped to
    [-3.5, 3.5] and flagged when clamping occurred; ppd derives from the
    reported value.
    """
    m = factors.metabolic_rate
    w = factors.external_work
    icl = factors.clothing_insulation
    if not 46.0 <= m <= 232.0:
        raise OutOfValidity(f"metabolic rate {m} W/m^2 outside [46, 232]")
    if not 0.0 <= w < m:
        raise OutOfValidity(f"external work {w} W/m^2 outside [0, M)")
    if not 0.0 <= icl <= 0.310:
        raise OutOfValidity(f"clothing insulation {icl} outside [0, 0.310]")
    if sample.vair > 1.5:
        raise OutOfValidity(f"air velocity {sample.vair} m/s above 1.5")

    pa = vapor_pressure(sample.ta, sample.rh)
    if pa > 2700.0:
        raise OutOfValidity(f"vapour pressure {pa:.0f} Pa above 2700")

    tr = mean_radiant_temperature(sample.tg, sample.ta, config)
    fcl = clothing_area_factor(icl)
    tcl, hc = solve_clothing_temperature(sample.ta, tr, sample.vair, factors, config)

    mw = m - w
    ta = sample.ta
    load = (
        mw
        - 3.05e-3 * (5733.0 - 6.99 * mw - pa)
        - max(0.0, 0.42 * (mw - 58.15))
        - 1.7e-5 * m * (5867.0 - pa)
        - 0.0014 * m * (34.0 - ta)
        - 3.96e-8 * fcl * ((tcl + 273.0) ** 4 - (tr + 273.0) ** 4)
        - fcl * hc * (tcl - ta)
    )
    pmv = (0.303 * math.exp(-0.036 * m) + 0.028) * load

    clamped = not -3.5 <= pmv <= 3.5
    if clamped:
        pmv = max(-3.5, min(3.5, pmv))
    return ComfortResult(
        tr=tr, pa=pa, fcl=fcl, hc=hc, tcl=tcl,
        pmv=pmv, ppd=ppd_from_pmv(pmv), pmv_clamped=clamped,
    )
