"""Tests for the Monte-Carlo engine, seeding, aggregation, and persistence."""

import math

import numpy as np
import pytest

from cfolab import (
    EstimatorMode,
    OfdmConfig,
    PowerProfile,
    Scenario,
    adaptive_fine_mode,
    coarse_mode,
    fixed_fine_mode,
    read_results,
    run_sweep,
    run_trial,
    trial_rng,
    uniform_profile,
    write_results,
)
from cfolab.errors import ConfigError, ParseError
from cfolab.harness import noise_power_for, scenario_metadata, sidecar_path


def make_scenario(k=4, m=2, snrs=(10.0, 20.0), trials=5, skip=None, modes=None, seed=99,
                  profile=None, cfo=0.295):
    if skip is None:
        skip = k >= 2
    if modes is None:
        modes = (coarse_mode(), fixed_fine_mode(16), adaptive_fine_mode(2))
    cfg = OfdmConfig(n_fft=64, cp_len=16, n_symbols=k, n_antennas=m)
    return Scenario(
        config=cfg,
        profile=profile if profile is not None else uniform_profile(5),
        cfo=cfo,
        snr_db_list=snrs,
        modes=modes,
        trials=trials,
        base_seed=seed,
        skip_first_symbol=skip,
    )


class TestModesAndScenario:
    def test_mode_validation(self):
        with pytest.raises(ConfigError):
            EstimatorMode(kind="nonsense")
        with pytest.raises(ConfigError):
            EstimatorMode(kind="fixed_fine")
        with pytest.raises(ConfigError):
            EstimatorMode(kind="adaptive_fine", iterations=-1)

    def test_skip_needs_two_symbols(self):
        with pytest.raises(ConfigError):
            make_scenario(k=1, skip=True)

    def test_lambda_cannot_exceed_lag_count(self):
        with pytest.raises(ConfigError):
            make_scenario(modes=(fixed_fine_mode(33),))

    def test_empty_snr_list(self):
        with pytest.raises(ConfigError):
            make_scenario(snrs=())

    def test_cfo_range(self):
        with pytest.raises(ConfigError):
            make_scenario(cfo=0.5)

    def test_duplicate_modes_rejected(self):
        with pytest.raises(ConfigError):
            make_scenario(modes=(coarse_mode(), coarse_mode()))

    def test_effective_symbols(self):
        assert make_scenario(k=4, skip=True).effective_symbols == 3
        assert make_scenario(k=4, skip=False).effective_symbols == 4

    def test_noise_power_convention(self):
        assert noise_power_for(0.0, 1.0) == 1.0
        assert noise_power_for(10.0, 1.0) == pytest.approx(0.1)
        assert noise_power_for(10.0, 2.0) == pytest.approx(0.2)
        assert noise_power_for(float("inf"), 1.0) == 0.0


class TestRunTrial:
    def test_deterministic_repeat(self):
        scenario = make_scenario()
        first = run_trial(scenario, 10.0, 3)
        second = run_trial(scenario, 10.0, 3)
        assert first.squared_errors == second.squared_errors
        assert first.crb_value == second.crb_value

    def test_distinct_trials_differ(self):
        scenario = make_scenario()
        assert (
            run_trial(scenario, 10.0, 0).squared_errors
            != run_trial(scenario, 10.0, 1).squared_errors
        )

    def test_noiseless_single_tap_fine_modes_exact(self):
        # the guard symbol carries data, so the coarse mode keeps its
        # cross-symbol self-noise even without receiver noise; the fine
        # modes reject those lags and recover the rotation exactly
        scenario = make_scenario(
            k=4, m=2, skip=True, snrs=(float("inf"),), profile=PowerProfile([1.0]),
            modes=(coarse_mode(), fixed_fine_mode(16), adaptive_fine_mode(2)),
        )
        for trial in range(4):
            result = run_trial(scenario, float("inf"), trial)
            assert result.squared_errors["fixed_fine"] <= 1e-18
            assert result.squared_errors["adaptive_fine"] <= 1e-18
            assert result.squared_errors["coarse"] < 1e-2
            assert result.crb_value == 0.0

    def test_snr_must_be_on_grid(self):
        with pytest.raises(ConfigError):
            run_trial(make_scenario(), 12.5, 0)

    def test_seed_streams_independent_of_each_other(self):
        a = trial_rng(1, 0, 0).standard_normal(4)
        b = trial_rng(1, 0, 1).standard_normal(4)
        c = trial_rng(1, 1, 0).standard_normal(4)
        assert not np.allclose(a, b)
        assert not np.allclose(a, c)


class TestRunSweep:
    def test_single_trial_mse_equals_trial_error(self):
        scenario = make_scenario(trials=1, snrs=(15.0,))
        result = run_sweep(scenario)
        trial = run_trial(scenario, 15.0, 0)
        for row in result.rows:
            assert row.mse == trial.squared_errors[row.mode]
            assert row.trials == 1

    def test_rows_sorted_and_complete(self):
        result = run_sweep(make_scenario(trials=2))
        keys = [(r.snr_db, r.mode) for r in result.rows]
        assert keys == sorted(keys)
        assert len(result.rows) == 2 * 3

    def test_crb_identical_across_modes_in_cell(self):
        result = run_sweep(make_scenario(trials=3))
        for snr in (10.0, 20.0):
            values = {r.crb_mean for r in result.rows if r.snr_db == snr}
            assert len(values) == 1

    def test_parallel_matches_serial(self):
        scenario = make_scenario(trials=8)
        serial = run_sweep(scenario, workers=1)
        parallel = run_sweep(scenario, workers=4)
        assert serial.rows == parallel.rows
        assert serial.metadata == parallel.metadata

    def test_doubling_trials_stays_within_standard_error(self):
        base = make_scenario(k=8, m=1, trials=200, snrs=(20.0,), modes=(coarse_mode(),))
        doubled = make_scenario(k=8, m=1, trials=400, snrs=(20.0,), modes=(coarse_mode(),))
        errs = np.array(
            [run_trial(base, 20.0, t).squared_errors["coarse"] for t in range(200)]
        )
        se = np.std(errs, ddof=1) / math.sqrt(len(errs))
        mse_small = run_sweep(base).rows[0].mse
        mse_big = run_sweep(doubled).rows[0].mse
        assert abs(mse_big - mse_small) < 3 * se

    def test_metadata_echoes_scenario(self):
        scenario = make_scenario()
        meta = run_sweep(make_scenario(trials=1)).metadata
        assert meta == scenario_metadata(scenario)
        assert meta["base_seed"] == 99
        assert meta["skip_first_symbol"] is True
        assert meta["tap_variances"] == [0.2] * 5

    def test_skip_first_symbol_changes_results(self):
        with_skip = run_sweep(make_scenario(trials=3, skip=True)).rows
        without = run_sweep(make_scenario(trials=3, skip=False)).rows
        assert any(a.mse != b.mse for a, b in zip(with_skip, without))


class TestPersistence:
    def test_round_trip(self, tmp_path):
        result = run_sweep(make_scenario(trials=2))
        path = tmp_path / "sweep.csv"
        write_results(result, path)
        loaded = read_results(path)
        assert loaded.rows == result.rows
        assert loaded.metadata == result.metadata

    def test_header_exact(self, tmp_path):
        result = run_sweep(make_scenario(trials=1, snrs=(10.0,)))
        path = tmp_path / "sweep.csv"
        write_results(result, path)
        header = path.read_text().splitlines()[0]
        assert header == "snr_db,mode,k_symbols,m_antennas,lambda,iter,trials,mse,crb_mean"

    def test_lambda_iter_empty_for_coarse(self, tmp_path):
        result = run_sweep(make_scenario(trials=1, snrs=(10.0,)))
        path = tmp_path / "sweep.csv"
        write_results(result, path)
        lines = path.read_text().splitlines()
        coarse_line = next(l for l in lines if ",coarse," in l)
        fields = coarse_line.split(",")
        assert fields[4] == "" and fields[5] == ""
        fine_line = next(l for l in lines if ",fixed_fine," in l)
        assert fine_line.split(",")[4] == "16"

    def test_seventeen_digit_floats(self, tmp_path):
        result = run_sweep(make_scenario(trials=3, snrs=(10.0,)))
        path = tmp_path / "sweep.csv"
        write_results(result, path)
        reloaded = read_results(path)
        for row, original in zip(reloaded.rows, result.rows):
            assert row.mse == original.mse  # bit-exact float round trip
            assert row.crb_mean == original.crb_mean

    def test_missing_column_named(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("snr_db,mode,k_symbols,m_antennas,lambda,iter,trials,mse\n")
        with pytest.raises(ParseError, match="crb_mean"):
            read_results(path)

    def test_bad_field_reports_line(self, tmp_path):
        result = run_sweep(make_scenario(trials=1, snrs=(10.0,)))
        path = tmp_path / "sweep.csv"
        write_results(result, path)
        lines = path.read_text().splitlines()
        lines[1] = lines[1].replace("10,", "ten,", 1)
        path.write_text("\n".join(lines) + "\n")
        with pytest.raises(ParseError, match="line 2"):
            read_results(path)

    def test_missing_sidecar(self, tmp_path):
        result = run_sweep(make_scenario(trials=1, snrs=(10.0,)))
        path = tmp_path / "sweep.csv"
        write_results(result, path)
        sidecar_path(path).unlink()
        with pytest.raises(ParseError, match="sidecar"):
            read_results(path)

    def test_sidecar_keys(self, tmp_path):
        result = run_sweep(make_scenario(trials=1, snrs=(10.0,)))
        path = tmp_path / "out.csv"
        write_results(result, path)
        assert sidecar_path(path).name == "out.meta.json"
        import json

        meta = json.loads(sidecar_path(path).read_text())
        assert set(meta) == {
            "n_fft", "cp_len", "k_symbols", "m_antennas", "qam_order", "signal_power",
            "tap_variances", "cfo", "base_seed", "skip_first_symbol", "artifact_version",
        }


class TestDeterminism:
    def test_sweep_rerun_byte_identical(self, tmp_path):
        scenario = make_scenario(trials=4)
        first, second = tmp_path / "a.csv", tmp_path / "b.csv"
        write_results(run_sweep(scenario, workers=1), first)
        write_results(run_sweep(scenario, workers=3), second)
        assert first.read_bytes() == second.read_bytes()
