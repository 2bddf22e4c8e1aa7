"""Per-lag signal energies, Fisher information, and the Cramer-Rao bound.

For a fixed channel realization the lag pair (r[k*span+l], r[k*span+N+l])
is zero-mean complex Gaussian with covariance

    [[eta + s2,            eta_l * e^{-j*2*pi*theta}],
     [eta_l * e^{+j*2*pi*theta},            eta + s2]]

where eta = signal_power * sum |h_i|^2, s2 is the noise power, and eta_l
is the partial tap-energy sum below. The information each pair carries
about theta is 8*pi^2*eta_l^2 / ((eta+s2)^2 - eta_l^2); summing over K
symbols, M antennas, and the 2L lags gives the total Fisher information,
whose inverse is the CRB.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelRealization
from .errors import LagOutOfRange, ShapeError, SingularFisher


@dataclass(frozen=True)
class LagSignalEnergy:
    """Total channel energy and its lag-dependent partial sums (length 2L)."""

    eta_total: float
    eta_of_l: np.ndarray

    def __post_init__(self):
        eta = np.asarray(self.eta_of_l, dtype=np.float64)
        object.__setattr__(self, "eta_of_l", eta)
        if np.any(eta < -1e-15) or np.any(eta > self.eta_total * (1 + 1e-12) + 1e-15):
            raise ShapeError("per-lag energies must lie in [0, eta_total]")


def eta_profile(taps: np.ndarray, signal_power: float) -> LagSignalEnergy:
    """Per-lag correlation energies of one antenna's length-L tap vector.

    For lags inside the CP window the pair shares every tap arriving up to
    the lag, so the energy grows cumulatively; past the window only taps
    arriving after l-L+1 still overlap, so it shrinks back to zero:

        eta_l = signal_power * sum_{i=0}^{l} |h_i|^2          0 <= l <= L-1
        eta_l = signal_power * sum_{i=l-L+1}^{L-1} |h_i|^2    L <= l <= 2L-1

    The peak eta_{L-1} equals the total energy.
    """
    taps = np.asarray(taps, dtype=np.complex128)
    if taps.ndim != 1:
        raise ShapeError(f"taps must be one antenna's vector, got shape {taps.shape}")
    cp = taps.size
    powers = signal_power * np.abs(taps) ** 2
    rising = np.cumsum(powers)
    # suffix[j] = sum_{i=j}^{L-1} powers[i]; lag L+t keeps taps i >= t+1
    suffix = np.concatenate([np.cumsum(powers[::-1])[::-1], [0.0]])
    falling = suffix[1:]
    eta = np.concatenate([rising, falling])
    return LagSignalEnergy(eta_total=float(rising[-1]), eta_of_l=eta)


def lag_covariance(
    eta: LagSignalEnergy, lag: int, noise_power: float, theta: float
) -> np.ndarray:
    """2x2 covariance of one lag pair for a fixed channel realization."""
    n_lags = eta.eta_of_l.size
    if not 0 <= lag < n_lags:
        raise LagOutOfRange(f"lag must lie in [0, {n_lags}), got {lag}")
    diag = eta.eta_total + noise_power
    cross = eta.eta_of_l[lag] * np.exp(-2j * np.pi * theta)
    return np.array([[diag, cross], [np.conj(cross), diag]])


def fisher_information(
    channel: ChannelRealization,
    signal_power: float,
    noise_power: float,
    k_symbols: int,
) -> float:
    """Total Fisher information about the fractional CFO.

    8*K*pi^2 * sum_m sum_{l=0}^{2L-1} eta_l^2 / ((eta + s2)^2 - eta_l^2),
    evaluated for the given channel realization.
    """
    if k_symbols < 1:
        raise ShapeError(f"k_symbols must be >= 1, got {k_symbols}")
    total = 0.0
    for m in range(channel.n_antennas):
        profile = eta_profile(channel.taps[m], signal_power)
        denom = (profile.eta_total + noise_power) ** 2 - profile.eta_of_l**2
        if np.any(denom <= 0):
            raise SingularFisher(
                "zero noise with a fully correlated lag makes the information singular"
            )
        total += float(np.sum(profile.eta_of_l**2 / denom))
    info = 8.0 * k_symbols * np.pi**2 * total
    if info == 0.0:
        raise SingularFisher("channel carries no information about the CFO")
    return info


def crb(
    channel: ChannelRealization,
    signal_power: float,
    noise_power: float,
    k_symbols: int,
) -> float:
    """Cramer-Rao bound 1 / I(theta); independent of the true CFO value."""
    return 1.0 / fisher_information(channel, signal_power, noise_power, k_symbols)
