"""Blind CP-based CFO estimation lab for MIMO-OFDM systems."""

from .bounds import LagSignalEnergy, crb, eta_profile, fisher_information, lag_covariance
from .channel import (
    ChannelRealization,
    PowerProfile,
    ReceivedFrame,
    draw_channel,
    propagate,
    uniform_profile,
)
from .estimator import (
    CfoEstimate,
    LagEnergies,
    adaptive_fine,
    circular_distance,
    coarse_estimate,
    empirical_cost,
    fixed_fine,
    lag_energy_profile,
    lag_product_table,
    lag_products,
    select_subset,
    theoretical_cost,
    wrap_cfo,
)
from .frame import OfdmConfig, TxStream, draw_qam_symbols, modulate_stream, qam_constellation
from .harness import (
    ARTIFACT_VERSION,
    EstimatorMode,
    Scenario,
    SweepResult,
    SweepRow,
    adaptive_fine_mode,
    coarse_mode,
    fixed_fine_mode,
    noise_power_for,
    read_results,
    run_sweep,
    run_trial,
    trial_rng,
    write_results,
)

__version__ = ARTIFACT_VERSION

__all__ = [
    "ARTIFACT_VERSION",
    "CfoEstimate",
    "ChannelRealization",
    "EstimatorMode",
    "LagEnergies",
    "LagSignalEnergy",
    "OfdmConfig",
    "PowerProfile",
    "ReceivedFrame",
    "Scenario",
    "SweepResult",
    "SweepRow",
    "TxStream",
    "adaptive_fine",
    "adaptive_fine_mode",
    "circular_distance",
    "coarse_estimate",
    "coarse_mode",
    "crb",
    "draw_channel",
    "draw_qam_symbols",
    "empirical_cost",
    "eta_profile",
    "fisher_information",
    "fixed_fine",
    "fixed_fine_mode",
    "lag_covariance",
    "lag_energy_profile",
    "lag_product_table",
    "lag_products",
    "modulate_stream",
    "noise_power_for",
    "propagate",
    "qam_constellation",
    "read_results",
    "run_sweep",
    "run_trial",
    "select_subset",
    "theoretical_cost",
    "trial_rng",
    "uniform_profile",
    "wrap_cfo",
    "write_results",
]
