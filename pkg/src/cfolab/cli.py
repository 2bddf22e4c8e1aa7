"""Command-line front end: sweeps, single-trial inspection, and CRB runs.

Config files are flat ``key = value`` lines with ``#`` comments; list
values are comma-separated. Flag overrides win over file values.

Exit codes: 0 success, 1 configuration errors (message names the offending
key or file), 2 I/O errors while writing results.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import bounds, harness
from .channel import PowerProfile, draw_channel, uniform_profile
from .errors import CfoLabError, ConfigError, SingularFisher
from .estimator import coarse_estimate, lag_energy_profile
from .frame import OfdmConfig

_KNOWN_KEYS = {
    "n_fft",
    "cp_len",
    "k_symbols",
    "m_antennas",
    "qam_order",
    "signal_power",
    "tap_variances",
    "cfo",
    "snr_db_list",
    "modes",
    "lambda",
    "iter",
    "trials",
    "base_seed",
    "skip_first_symbol",
    "out",
}

_REQUIRED_KEYS = ("n_fft", "cp_len", "k_symbols", "m_antennas", "cfo", "snr_db_list", "modes")


def parse_config_file(path: str | Path) -> dict[str, str]:
    """Parse flat ``key = value`` lines; comments and blank lines ignored."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    values: dict[str, str] = {}
    for line_num, raw_line in enumerate(path.read_text().splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{line_num}: expected 'key = value', got {raw_line!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key not in _KNOWN_KEYS:
            raise ConfigError(f"{path}:{line_num}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"{path}:{line_num}: duplicate key {key!r}")
        values[key] = value
    return values


def _parse_typed(values: dict[str, str], key: str, kind, default=None):
    if key not in values:
        return default
    raw = values[key]
    try:
        if kind is bool:
            lowered = raw.lower()
            if lowered not in ("true", "false"):
                raise ValueError
            return lowered == "true"
        return kind(raw)
    except ValueError:
        raise ConfigError(f"key {key!r}: cannot parse {raw!r} as {kind.__name__}") from None


def _parse_float_list(values: dict[str, str], key: str, default=None):
    if key not in values:
        return default
    try:
        return tuple(float(item.strip()) for item in values[key].split(",") if item.strip())
    except ValueError:
        raise ConfigError(f"key {key!r}: cannot parse {values[key]!r} as a float list") from None


def _build_modes(names, subset_size: int, iterations: int):
    modes = []
    for name in names:
        if name == "coarse":
            modes.append(harness.coarse_mode())
        elif name == "fixed_fine":
            modes.append(harness.fixed_fine_mode(subset_size))
        elif name == "adaptive_fine":
            modes.append(harness.adaptive_fine_mode(iterations))
        else:
            raise ConfigError(f"key 'modes': unknown estimator mode {name!r}")
    return tuple(modes)


def build_scenario(values: dict[str, str], args: argparse.Namespace) -> harness.Scenario:
    """Assemble a Scenario from config values plus flag overrides."""
    for key in _REQUIRED_KEYS:
        if key not in values:
            raise ConfigError(f"missing required key {key!r}")
    cfg = OfdmConfig(
        n_fft=_parse_typed(values, "n_fft", int),
        cp_len=_parse_typed(values, "cp_len", int),
        n_symbols=_parse_typed(values, "k_symbols", int),
        n_antennas=_parse_typed(values, "m_antennas", int),
        qam_order=_parse_typed(values, "qam_order", int, 16),
        signal_power=_parse_typed(values, "signal_power", float, 1.0),
    )
    tap_variances = _parse_float_list(values, "tap_variances")
    profile = PowerProfile(np.array(tap_variances)) if tap_variances else uniform_profile(5)

    subset_size = _parse_typed(values, "lambda", int, cfg.cp_len)
    iterations = _parse_typed(values, "iter", int, 2)
    if args.subset_size is not None:
        subset_size = args.subset_size
    if args.iterations is not None:
        iterations = args.iterations

    if args.mode is not None:
        mode_names = [args.mode]
    else:
        mode_names = [item.strip() for item in values["modes"].split(",") if item.strip()]
    modes = _build_modes(mode_names, subset_size, iterations)

    snr_db_list = _parse_float_list(values, "snr_db_list")
    if args.snr is not None:
        try:
            snr_db_list = tuple(float(item) for item in str(args.snr).split(","))
        except ValueError:
            raise ConfigError(f"flag --snr: cannot parse {args.snr!r} as a float list") from None

    return harness.Scenario(
        config=cfg,
        profile=profile,
        cfo=_parse_typed(values, "cfo", float),
        snr_db_list=snr_db_list,
        modes=modes,
        trials=args.trials if args.trials is not None else _parse_typed(values, "trials", int, 10_000),
        base_seed=args.seed if args.seed is not None else _parse_typed(values, "base_seed", int, 0),
        skip_first_symbol=_parse_typed(values, "skip_first_symbol", bool, True),
    )


def _output_path(values: dict[str, str], args: argparse.Namespace) -> Path:
    if args.out is not None:
        return Path(args.out)
    if "out" in values:
        return Path(values["out"])
    return Path(Path(args.config).stem + ".csv")


def _mode_title(mode: harness.EstimatorMode) -> str:
    if mode.kind == "fixed_fine":
        return f"fixed_fine(lambda={mode.subset_size})"
    if mode.kind == "adaptive_fine":
        return f"adaptive_fine(iter={mode.iterations})"
    return "coarse"


def cmd_sweep(args: argparse.Namespace) -> int:
    values = parse_config_file(args.config)
    scenario = build_scenario(values, args)
    out_path = _output_path(values, args)
    result = harness.run_sweep(scenario)
    harness.write_results(result, out_path)
    print(f"wrote {out_path} and {harness.sidecar_path(out_path)}")
    print(f"{'snr_db':>8} {'mode':<14} {'lambda':>6} {'iter':>4} {'mse':>24} {'crb_mean':>24}")
    for row in result.rows:
        lam = "" if row.subset_size is None else row.subset_size
        iters = "" if row.iterations is None else row.iterations
        print(
            f"{row.snr_db:>8g} {row.mode:<14} {lam!s:>6} {iters!s:>4} "
            f"{row.mse:>24.17g} {row.crb_mean:>24.17g}"
        )
    return 0


def cmd_trial(args: argparse.Namespace) -> int:
    scenario = build_scenario(parse_config_file(args.config), args)
    snr_db = scenario.snr_db_list[0]
    cfg = scenario.config
    rng = harness.trial_rng(scenario.base_seed, 0, 0)
    noise_power = harness.noise_power_for(snr_db, cfg.signal_power)
    frame, _ = harness.draw_trial_frame(rng, cfg, scenario.profile, scenario.cfo, noise_power)
    scored = harness._effective_frame(frame, scenario.skip_first_symbol)

    print(f"snr_db = {snr_db:g}, noise_power = {noise_power:.17g}")
    print(f"true_cfo = {scenario.cfo:.17g}")
    for mode in scenario.modes:
        estimate = mode.run(scored)
        print(f"{_mode_title(mode)}: xi = {estimate.xi:.17g}")
        if estimate.subset is not None:
            print(f"  S(lambda={estimate.lambda_used}) = {sorted(estimate.subset)}")
        if estimate.lambda_trace:
            print(f"  lambda_opt per iteration = {list(estimate.lambda_trace)}")
    coarse_xi = coarse_estimate(scored).xi
    profile = lag_energy_profile(scored, coarse_xi)
    formatted = ", ".join(f"{v:.6g}" for v in profile.r_of_l)
    print(f"R(l) at coarse xi = {coarse_xi:.17g}: [{formatted}]")
    return 0


def cmd_crb(args: argparse.Namespace) -> int:
    values = parse_config_file(args.config)
    scenario = build_scenario(values, args)
    cfg = scenario.config
    rows = []
    print(f"{'snr_db':>8} {'crb_mean':>24}")
    for snr_index, snr_db in enumerate(scenario.snr_db_list):
        noise_power = harness.noise_power_for(snr_db, cfg.signal_power)
        crbs = []
        for trial in range(scenario.trials):
            rng = harness.trial_rng(scenario.base_seed, snr_index, trial)
            channel = draw_channel(rng, cfg.n_antennas, scenario.profile, cfg.cp_len)
            crbs.append(
                bounds.crb(channel, cfg.signal_power, noise_power, scenario.effective_symbols)
            )
        crb_mean = float(np.mean(crbs))
        print(f"{snr_db:>8g} {crb_mean:>24.17g}")
        rows.append(
            harness.SweepRow(
                snr_db=float(snr_db),
                mode="crb_only",
                k_symbols=cfg.n_symbols,
                m_antennas=cfg.n_antennas,
                subset_size=None,
                iterations=None,
                trials=scenario.trials,
                mse=None,
                crb_mean=crb_mean,
            )
        )
    if args.out is not None or "out" in values:
        out_path = _output_path(values, args)
        result = harness.SweepResult(rows=rows, metadata=harness.scenario_metadata(scenario))
        harness.write_results(result, out_path)
        print(f"wrote {out_path}")
    return 0


def _add_common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", required=True, help="scenario config file")
    parser.add_argument("--out", default=None, help="output CSV path")
    parser.add_argument("--trials", type=int, default=None, help="override trial count")
    parser.add_argument("--seed", type=int, default=None, help="override base seed")
    parser.add_argument("--mode", default=None, choices=["coarse", "fixed_fine", "adaptive_fine"],
                        help="run only this estimator mode")
    parser.add_argument("--lambda", dest="subset_size", type=int, default=None,
                        help="subset size for fixed_fine")
    parser.add_argument("--iter", dest="iterations", type=int, default=None,
                        help="iteration count for adaptive_fine")
    parser.add_argument("--snr", default=None, help="override SNR list (comma-separated dB)")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="cfo-lab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, handler in (("sweep", cmd_sweep), ("trial", cmd_trial), ("crb", cmd_crb)):
        sp = sub.add_parser(name)
        _add_common_flags(sp)
        sp.set_defaults(handler=handler)
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except SingularFisher as exc:
        print(f"error: SingularFisher: {exc}", file=sys.stderr)
        return 1
    except CfoLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
