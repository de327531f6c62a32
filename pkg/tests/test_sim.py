import numpy as np
import pytest

from bitech.comfort import PersonalFactors, pmv_ppd
from bitech.rng import named_stream
from bitech.sim.dataset import (
    DEFAULT_START_TS,
    FEATURE_NAMES,
    generate_dataset,
    read_dataset_csv,
    rows_to_arrays,
    write_dataset_csv,
)
from bitech.sim.energy import EnergyConfig, EnergyRecord, energy_oracle
from bitech.sim.room import (
    AcUnit,
    estimate_occupancy,
    initial_state,
    sample_sensors,
    solar_factor,
    step,
)
from bitech.sim.weather import (
    EmptySeries,
    ParseError,
    ingest_weather_csv,
    synthetic_tout,
    synthetic_weather,
)

QUIET = EnergyConfig(noise_std=0.0, surge_prob=0.0)


class TestWeather:
    def test_two_row_file(self, tmp_path):
        p = tmp_path / "w.csv"
        p.write_text("timestamp_iso8601,tout_c\n"
                     "2023-08-01T00:00:00+00:00,28.0\n"
                     "2023-08-01T00:01:00+00:00,28.5\n")
        series = ingest_weather_csv(p)
        assert series.timestamps.tolist() == [1690848000, 1690848060]
        assert series.tout.tolist() == [28.0, 28.5]
        assert not series.interpolated.any()

    def test_malformed_temperature_reports_line(self, tmp_path):
        p = tmp_path / "w.csv"
        p.write_text("timestamp_iso8601,tout_c\n"
                     "2023-08-01T00:00:00+00:00,28.0\n"
                     "2023-08-01T00:01:00+00:00,oops\n")
        with pytest.raises(ParseError) as exc:
            ingest_weather_csv(p)
        assert exc.value.line_no == 3

    def test_gap_interpolated_and_flagged(self, tmp_path):
        p = tmp_path / "w.csv"
        p.write_text("timestamp_iso8601,tout_c\n"
                     "2023-08-01T00:00:00+00:00,20.0\n"
                     "2023-08-01T00:10:00+00:00,30.0\n")
        series = ingest_weather_csv(p)
        assert series.timestamps.size == 11
        # hand-computed linear fill: +1.0 degC per minute
        assert series.tout.tolist() == pytest.approx(
            [20.0 + i for i in range(11)])
        assert series.interpolated.tolist() == [False] + [True] * 9 + [False]

    def test_empty_file(self, tmp_path):
        p = tmp_path / "w.csv"
        p.write_text("timestamp_iso8601,tout_c\n")
        with pytest.raises(EmptySeries):
            ingest_weather_csv(p)

    def test_synthetic_peaks_mid_afternoon(self):
        assert synthetic_tout(15.0) == pytest.approx(34.0)
        assert synthetic_tout(3.0) == pytest.approx(24.0)
        series = synthetic_weather(DEFAULT_START_TS, 1440)
        assert series.tout.max() == pytest.approx(34.0, abs=0.01)


class TestRoomStep:
    def test_fixed_point_when_idle(self):
        state = initial_state(tout=28.0, minute=180)  # 03:00, flat rh template
        nxt = step(state, tout=28.0, ac=AcUnit(mode="off"), rng=None)
        for before, after in zip(state.points, nxt.points):
            assert after.ta == pytest.approx(before.ta, abs=1e-9)
            assert after.tg == pytest.approx(before.tg, abs=1e-9)
            assert after.co2 == pytest.approx(before.co2, abs=1e-9)
            assert after.vair == before.vair

    def test_cooling_pulls_toward_setpoint(self):
        state = initial_state(tout=32.0)
        ac = AcUnit(setpoint=25, mode="cooling")
        for _ in range(240):
            state = step(state, tout=32.0, ac=ac, rng=None)
        room_ta = np.mean([p.ta for p in state.points])
        assert 25.0 < room_ta < 28.5

    def test_west_sun_dominates_globe_swing(self):
        # over a sunny day the point-4 globe swing beats points 2, 3, 5
        state = initial_state(tout=synthetic_tout(0.0))
        ac = AcUnit(setpoint=26, mode="cooling")
        traces = {i: [] for i in range(5)}
        for m in range(1440):
            hour = (m + 1) / 60.0
            state = step(state, tout=synthetic_tout(hour), ac=ac, rng=None)
            for i, p in enumerate(state.points):
                traces[i].append(p.tg)
        swing = {i: max(t) - min(t) for i, t in traces.items()}
        for other in (1, 2, 4):
            assert swing[3] > swing[other]

    def test_ac_outlet_point_is_least_comfortable_side(self):
        # mean vote at point 1 sits below every other point while cooling
        factors = PersonalFactors.from_met_clo(1.2, 0.5)
        state = initial_state(tout=31.0)
        ac = AcUnit(setpoint=26, mode="cooling")
        zero_sigma = {k: 0.0 for k in ("ta", "tg", "rh", "vair", "co2")}
        votes = {i: [] for i in range(5)}
        for m in range(300, 600):
            state = step(state, tout=31.0, ac=ac, rng=None)
            samples = sample_sensors(state, rng=None, sigma=zero_sigma)
            for i, s in enumerate(samples):
                votes[i].append(pmv_ppd(s, factors).pmv)
        means = {i: np.mean(v) for i, v in votes.items()}
        for other in range(1, 5):
            assert means[0] < means[other]

    def test_co2_tracks_occupancy(self):
        from dataclasses import replace
        state = replace(initial_state(tout=28.0), occupancy=4)
        for _ in range(300):
            state = step(state, tout=28.0, ac=AcUnit(mode="off"), rng=None)
        assert state.points[0].co2 > 1000.0
        assert estimate_occupancy(state.points[0].co2) == 4


class TestSensors:
    def test_zero_sigma_exact(self):
        state = initial_state(tout=29.0)
        samples = sample_sensors(state, named_stream(1, "s"),
                                 sigma={k: 0.0 for k in ("ta", "tg", "rh", "vair", "co2")})
        for s, p in zip(samples, state.points):
            assert (s.ta, s.tg, s.rh, s.vair, s.co2) == (p.ta, p.tg, p.rh, p.vair, p.co2)

    def test_noise_std_matches_datasheet(self):
        state = initial_state(tout=29.0)
        rng = named_stream(11, "noise")
        draws = {"ta": [], "tg": [], "rh": [], "vair": [], "co2": []}
        for _ in range(2000):
            for s, p in zip(sample_sensors(state, rng), state.points):
                draws["ta"].append(s.ta - p.ta)
                draws["tg"].append(s.tg - p.tg)
                draws["rh"].append(s.rh - p.rh)
                draws["vair"].append(s.vair - p.vair)
                draws["co2"].append(s.co2 - p.co2)
        expected = {"ta": 0.5, "tg": 0.1, "rh": 3.0, "vair": 0.01, "co2": 50.0}
        for key, sigma in expected.items():
            assert np.std(draws[key]) == pytest.approx(sigma, rel=0.10)

    def test_same_seed_same_stream(self):
        state = initial_state(tout=29.0)
        a = sample_sensors(state, named_stream(3, "x"))
        b = sample_sensors(state, named_stream(3, "x"))
        assert a == b


class TestEnergyOracle:
    def test_base_load_only(self):
        kwh = energy_oracle(26.0, 26, 0, 0.0, "cooling", None, config=QUIET)
        assert kwh == pytest.approx(QUIET.a0)

    def test_monotone_in_demand(self):
        values = [energy_oracle(26.0 + d, 26, 0, 0.0, "cooling", None, config=QUIET)
                  for d in range(0, 9)]
        assert all(b >= a for a, b in zip(values, values[1:]))

    def test_off_draws_nothing(self):
        assert energy_oracle(35.0, 20, 4, 1.0, "off", None) == 0.0

    def test_heating_unsupported(self):
        with pytest.raises(ValueError):
            energy_oracle(10.0, 24, 1, 0.0, "heating", None)

    def test_clip_bounds(self):
        cfg = EnergyConfig(a1=1.0, kwh_max=0.25, noise_std=0.0, surge_prob=0.0)
        assert energy_oracle(40.0, 16, 0, 0.0, "cooling", None, config=cfg) == 0.25

    def test_record_rejects_negative(self):
        with pytest.raises(ValueError):
            EnergyRecord(timestamp=0.0, kwh=-0.1)


@pytest.fixture(scope="module")
def dataset():
    return generate_dataset(days=2, seed=7)


class TestDataset:
    def test_row_count_default(self, dataset):
        rows, records = dataset
        assert len(rows) == 2500
        assert len(records) == 2500

    def test_deterministic_per_seed(self, dataset):
        rows, records = dataset
        again, recs2 = generate_dataset(days=2, seed=7)
        assert rows == again
        assert records == recs2
        different, _ = generate_dataset(days=2, seed=8)
        assert different != rows

    def test_energy_zero_inflated_never_negative(self, dataset):
        rows, _ = dataset
        kwh = np.array([r.kwh for r in rows])
        assert (kwh >= 0.0).all()
        assert (kwh == 0.0).mean() > 0.10   # idle night minutes
        assert kwh.max() <= 0.25

    def test_negative_delta_setpoint_correlation(self, dataset):
        rows, _ = dataset
        delta = np.array([r.delta_setpoint for r in rows])
        kwh = np.array([r.kwh for r in rows])
        assert np.corrcoef(delta, kwh)[0, 1] < 0.0

    def test_histogram_concentrated_with_tail(self, dataset):
        rows, _ = dataset
        kwh = np.array([r.kwh for r in rows if r.occupancy > 0 or r.kwh > 0])
        kwh_all = np.array([r.kwh for r in rows])
        q1, q3 = np.quantile(kwh_all, [0.25, 0.75])
        central = ((kwh_all >= q1) & (kwh_all <= q3)).mean()
        assert central >= 0.70
        p99 = np.quantile(kwh_all, 0.99)
        assert (kwh_all > p99).sum() > 0
        assert kwh.max() > np.median(kwh) * 1.8   # right tail present

    def test_csv_round_trip_byte_identical(self, dataset, tmp_path):
        rows, _ = dataset
        p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
        write_dataset_csv(rows, p1)
        write_dataset_csv(read_dataset_csv(p1), p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_arrays_shape(self, dataset):
        rows, _ = dataset
        X, y, names = rows_to_arrays(rows)
        assert X.shape == (2500, len(FEATURE_NAMES))
        assert y.shape == (2500,)
        assert names == list(FEATURE_NAMES)
        assert np.isfinite(X).all() and np.isfinite(y).all()
