"""Monte-Carlo experiment engine.

Each trial draws a channel, a data frame, and noise from an RNG stream
derived deterministically from (base_seed, snr_index, trial_index), runs
every configured estimator mode on the same frame (common random numbers),
and scores the wrapped squared error. Sweeps aggregate trials per
(SNR, mode) cell and persist results as CSV plus a JSON metadata sidecar.

Aggregation always reduces in trial-index order, so output bytes are
independent of how many worker threads executed the trials.
"""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import bounds
from . import estimator as est
from .channel import ChannelRealization, PowerProfile, ReceivedFrame, draw_channel, propagate
from .errors import ConfigError, DegenerateCorrelation, ParseError, SingularFisher
from .frame import OfdmConfig, draw_qam_symbols, modulate_stream

ARTIFACT_VERSION = "0.1.0"

CSV_COLUMNS = (
    "snr_db",
    "mode",
    "k_symbols",
    "m_antennas",
    "lambda",
    "iter",
    "trials",
    "mse",
    "crb_mean",
)


@dataclass(frozen=True)
class EstimatorMode:
    """One estimator configuration: coarse, fixed_fine(lambda), or adaptive_fine(iter)."""

    kind: str
    subset_size: int | None = None
    iterations: int | None = None

    def __post_init__(self):
        if self.kind not in (est.MODE_COARSE, est.MODE_FIXED_FINE, est.MODE_ADAPTIVE_FINE):
            raise ConfigError(f"unknown estimator mode {self.kind!r}")
        if self.kind == est.MODE_FIXED_FINE and (self.subset_size is None or self.subset_size < 1):
            raise ConfigError("fixed_fine needs a subset size (lambda >= 1)")
        if self.kind == est.MODE_ADAPTIVE_FINE and (self.iterations is None or self.iterations < 0):
            raise ConfigError("adaptive_fine needs an iteration count (iter >= 0)")

    def run(self, frame: ReceivedFrame) -> est.CfoEstimate:
        if self.kind == est.MODE_COARSE:
            return est.coarse_estimate(frame)
        if self.kind == est.MODE_FIXED_FINE:
            return est.fixed_fine(frame, self.subset_size)
        return est.adaptive_fine(frame, self.iterations)


def coarse_mode() -> EstimatorMode:
    return EstimatorMode(kind=est.MODE_COARSE)


def fixed_fine_mode(subset_size: int) -> EstimatorMode:
    return EstimatorMode(kind=est.MODE_FIXED_FINE, subset_size=subset_size)


def adaptive_fine_mode(iterations: int = 2) -> EstimatorMode:
    return EstimatorMode(kind=est.MODE_ADAPTIVE_FINE, iterations=iterations)


@dataclass(frozen=True)
class Scenario:
    """Full description of one sweep: geometry, channel, grid, modes, seeding."""

    config: OfdmConfig
    profile: PowerProfile
    cfo: float
    snr_db_list: tuple[float, ...]
    modes: tuple[EstimatorMode, ...]
    trials: int = 10_000
    base_seed: int = 0
    skip_first_symbol: bool = True

    def __post_init__(self):
        object.__setattr__(self, "snr_db_list", tuple(float(s) for s in self.snr_db_list))
        object.__setattr__(self, "modes", tuple(self.modes))
        if not -0.5 <= self.cfo < 0.5:
            raise ConfigError(f"cfo must lie in [-0.5, 0.5), got {self.cfo}")
        if self.trials < 1:
            raise ConfigError(f"trials must be >= 1, got {self.trials}")
        if not self.snr_db_list:
            raise ConfigError("snr_db_list must not be empty")
        if not self.modes:
            raise ConfigError("modes must not be empty")
        if self.profile.n_taps > self.config.cp_len:
            raise ConfigError(
                f"tap_variances has {self.profile.n_taps} taps, more than cp_len={self.config.cp_len}"
            )
        if self.skip_first_symbol and self.config.n_symbols < 2:
            raise ConfigError("skip_first_symbol requires k_symbols >= 2")
        for mode in self.modes:
            if mode.subset_size is not None and mode.subset_size > 2 * self.config.cp_len:
                raise ConfigError(
                    f"lambda={mode.subset_size} exceeds the 2L={2 * self.config.cp_len} lag set"
                )
        labels = [mode_label(m) for m in self.modes]
        if len(set(labels)) != len(labels):
            raise ConfigError(f"duplicate estimator modes: {labels}")

    @property
    def effective_symbols(self) -> int:
        return self.config.n_symbols - 1 if self.skip_first_symbol else self.config.n_symbols


def mode_label(mode: EstimatorMode) -> str:
    return mode.kind


def noise_power_for(snr_db: float, signal_power: float) -> float:
    """AWGN variance for a given SNR, with unit-normalized channel energy."""
    return signal_power * 10.0 ** (-snr_db / 10.0)


def trial_rng(base_seed: int, snr_index: int, trial_index: int) -> np.random.Generator:
    """Independent per-trial stream: SeedSequence(base_seed, spawn_key=(snr, trial))."""
    seq = np.random.SeedSequence(base_seed, spawn_key=(snr_index, trial_index))
    return np.random.default_rng(seq)


def _effective_frame(frame: ReceivedFrame, skip_first_symbol: bool) -> ReceivedFrame:
    """Drop the leading symbol span so estimation starts at the second symbol.

    Trimming is equivalent to summing k from 1: the same sample pairs
    remain and the lag products are insensitive to the global phase offset.
    """
    if not skip_first_symbol:
        return frame
    cfg = frame.config
    trimmed_cfg = replace(cfg, n_symbols=cfg.n_symbols - 1)
    return ReceivedFrame(
        samples=frame.samples[:, cfg.symbol_span():],
        true_cfo=frame.true_cfo,
        noise_power=frame.noise_power,
        config=trimmed_cfg,
    )


@dataclass
class TrialResult:
    squared_errors: dict[str, float]
    crb_value: float
    signed_errors: dict[str, float] | None = None


def draw_trial_frame(
    rng: np.random.Generator,
    config: OfdmConfig,
    profile: PowerProfile,
    cfo: float,
    noise_power: float,
) -> tuple[ReceivedFrame, ChannelRealization]:
    """Draw channel, data, and noise for one trial (in that fixed order).

    The appended guard block carries ordinary data: transmission is
    continuous, so the samples following the last scored symbol belong to
    the next real symbol. Its data enters the estimators only through the
    cross-symbol lag pairs, where it acts as the self-noise that caps the
    coarse estimator at high SNR.
    """
    channel = draw_channel(rng, config.n_antennas, profile, config.cp_len)
    freq = draw_qam_symbols(rng, (config.n_symbols + 1) * config.n_fft, config.qam_order,
                            config.signal_power)
    tx = modulate_stream(freq, config)
    frame = propagate(tx, channel, cfo, noise_power, rng if noise_power > 0 else None)
    return frame, channel


def run_trial(scenario: Scenario, snr_db: float, trial_index: int) -> TrialResult:
    """Run every configured mode on one freshly drawn frame at one SNR."""
    try:
        snr_index = scenario.snr_db_list.index(float(snr_db))
    except ValueError:
        raise ConfigError(f"snr_db {snr_db} is not in the scenario's snr_db_list") from None
    rng = trial_rng(scenario.base_seed, snr_index, trial_index)
    cfg = scenario.config
    noise_power = noise_power_for(snr_db, cfg.signal_power)
    frame, channel = draw_trial_frame(rng, cfg, scenario.profile, scenario.cfo, noise_power)
    scored = _effective_frame(frame, scenario.skip_first_symbol)

    errors: dict[str, float] = {}
    signed: dict[str, float] = {}
    for mode in scenario.modes:
        try:
            estimate = mode.run(scored)
            err = est.circular_distance(estimate.xi, scenario.cfo)
            errors[mode_label(mode)] = err**2
            signed[mode_label(mode)] = err
        except DegenerateCorrelation:
            errors[mode_label(mode)] = math.nan
            signed[mode_label(mode)] = math.nan
    try:
        crb_value = bounds.crb(channel, cfg.signal_power, noise_power, scenario.effective_symbols)
    except SingularFisher:
        crb_value = 0.0  # zero noise: infinite information, the bound collapses
    return TrialResult(squared_errors=errors, crb_value=crb_value, signed_errors=signed)


@dataclass(frozen=True)
class SweepRow:
    """One aggregated (SNR, mode) cell."""

    snr_db: float
    mode: str
    k_symbols: int
    m_antennas: int
    subset_size: int | None
    iterations: int | None
    trials: int
    mse: float
    crb_mean: float


@dataclass
class SweepResult:
    rows: list[SweepRow]
    metadata: dict


def scenario_metadata(scenario: Scenario) -> dict:
    return {
        "n_fft": scenario.config.n_fft,
        "cp_len": scenario.config.cp_len,
        "k_symbols": scenario.config.n_symbols,
        "m_antennas": scenario.config.n_antennas,
        "qam_order": scenario.config.qam_order,
        "signal_power": scenario.config.signal_power,
        "tap_variances": [float(v) for v in scenario.profile.tap_variances],
        "cfo": scenario.cfo,
        "base_seed": scenario.base_seed,
        "skip_first_symbol": scenario.skip_first_symbol,
        "artifact_version": ARTIFACT_VERSION,
    }


def run_sweep(scenario: Scenario, workers: int = 1) -> SweepResult:
    """Aggregate MSE and mean CRB per (SNR, mode) cell over all trials."""
    rows: list[SweepRow] = []
    for snr_index, snr_db in enumerate(scenario.snr_db_list):
        indices = range(scenario.trials)
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(lambda t: run_trial(scenario, snr_db, t), indices))
        else:
            results = [run_trial(scenario, snr_db, t) for t in indices]
        crb_mean = float(np.mean([r.crb_value for r in results]))
        for mode in scenario.modes:
            label = mode_label(mode)
            errs = np.array([r.squared_errors[label] for r in results])
            valid = errs[~np.isnan(errs)]
            mse = float(np.mean(valid)) if valid.size else math.nan
            rows.append(
                SweepRow(
                    snr_db=float(snr_db),
                    mode=label,
                    k_symbols=scenario.config.n_symbols,
                    m_antennas=scenario.config.n_antennas,
                    subset_size=mode.subset_size if mode.kind == est.MODE_FIXED_FINE else None,
                    iterations=mode.iterations if mode.kind == est.MODE_ADAPTIVE_FINE else None,
                    trials=scenario.trials,
                    mse=mse,
                    crb_mean=crb_mean,
                )
            )
    rows.sort(key=_row_sort_key)
    return SweepResult(rows=rows, metadata=scenario_metadata(scenario))


def _row_sort_key(row: SweepRow):
    return (row.snr_db, row.mode, row.subset_size or 0, row.iterations or 0)


def _format_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def sidecar_path(path) -> Path:
    path = Path(path)
    return path.with_name(path.stem + ".meta.json")


def write_results(result: SweepResult, path) -> None:
    """Write the CSV body and the JSON metadata sidecar next to it."""
    path = Path(path)
    with path.open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(CSV_COLUMNS)
        for row in result.rows:
            writer.writerow(
                [
                    _format_value(row.snr_db),
                    row.mode,
                    row.k_symbols,
                    row.m_antennas,
                    _format_value(row.subset_size),
                    _format_value(row.iterations),
                    row.trials,
                    _format_value(row.mse),
                    _format_value(row.crb_mean),
                ]
            )
    with sidecar_path(path).open("w") as handle:
        json.dump(result.metadata, handle, indent=2, sort_keys=True)
        handle.write("\n")


def _parse_field(raw: str, kind, line_num: int, column: str):
    if raw == "":
        return None
    try:
        return kind(raw)
    except ValueError:
        raise ParseError(f"line {line_num}: column {column!r} has invalid value {raw!r}") from None


def read_results(path) -> SweepResult:
    """Read back a sweep CSV plus its sidecar; inverse of write_results."""
    path = Path(path)
    with path.open(newline="") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"{path}: empty results file") from None
        missing = [c for c in CSV_COLUMNS if c not in header]
        if missing or tuple(header) != CSV_COLUMNS:
            if missing:
                raise ParseError(f"{path}: missing column {missing[0]!r}")
            raise ParseError(f"{path}: unexpected header {header!r}")
        rows = []
        for line_num, record in enumerate(reader, start=2):
            if len(record) != len(CSV_COLUMNS):
                raise ParseError(
                    f"line {line_num}: expected {len(CSV_COLUMNS)} fields, got {len(record)}"
                )
            values = dict(zip(CSV_COLUMNS, record))
            for column in ("snr_db", "mse", "crb_mean", "k_symbols", "m_antennas", "trials"):
                if values[column] == "" and column not in ("mse",):
                    raise ParseError(f"line {line_num}: column {column!r} is empty")
            rows.append(
                SweepRow(
                    snr_db=_parse_field(values["snr_db"], float, line_num, "snr_db"),
                    mode=values["mode"],
                    k_symbols=_parse_field(values["k_symbols"], int, line_num, "k_symbols"),
                    m_antennas=_parse_field(values["m_antennas"], int, line_num, "m_antennas"),
                    subset_size=_parse_field(values["lambda"], int, line_num, "lambda"),
                    iterations=_parse_field(values["iter"], int, line_num, "iter"),
                    trials=_parse_field(values["trials"], int, line_num, "trials"),
                    mse=_parse_field(values["mse"], float, line_num, "mse"),
                    crb_mean=_parse_field(values["crb_mean"], float, line_num, "crb_mean"),
                )
            )
    meta_file = sidecar_path(path)
    if not meta_file.exists():
        raise ParseError(f"missing metadata sidecar {meta_file}")
    with meta_file.open() as handle:
        metadata = json.load(handle)
    return SweepResult(rows=rows, metadata=metadata)
