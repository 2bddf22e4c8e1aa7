"""Multipath Rayleigh channel, CFO rotation, and AWGN.

The received stream at antenna m is

    r[i] = sum_l psi[i-l] * x[i-l] * h_l + z[i],   psi[n] = exp(j*2*pi*theta*n/N)

with the CFO phase ramp applied as one continuous rotation over the whole
stream (all symbols belong to one user, so the per-symbol rotation
accumulates exactly like a single ramp), x taken as zero before the frame
starts, and z circularly symmetric complex Gaussian noise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CfoOutOfRange, FrameShapeError, InvalidProfile
from .frame import OfdmConfig, TxStream


@dataclass(frozen=True)
class PowerProfile:
    """Tap variance profile of the multipath channel; sums to one."""

    tap_variances: np.ndarray

    def __post_init__(self):
        variances = np.asarray(self.tap_variances, dtype=np.float64)
        object.__setattr__(self, "tap_variances", variances)
        if variances.ndim != 1 or variances.size < 1:
            raise InvalidProfile("profile needs at least one tap variance")
        if np.any(variances < 0):
            raise InvalidProfile("tap variances must be >= 0")
        total = float(variances.sum())
        if abs(total - 1.0) > 1e-12:
            raise InvalidProfile(f"tap variances must sum to 1, got {total!r}")

    @property
    def n_taps(self) -> int:
        return int(self.tap_variances.size)


def uniform_profile(n_taps: int) -> PowerProfile:
    """Uniform power-delay profile with ``n_taps`` equal-variance taps."""
    if n_taps < 1:
        raise InvalidProfile(f"n_taps must be >= 1, got {n_taps}")
    return PowerProfile(np.full(n_taps, 1.0 / n_taps))


@dataclass(frozen=True)
class ChannelRealization:
    """Per-antenna complex taps, zero-padded to the CP length."""

    taps: np.ndarray  # shape (n_antennas, cp_len)
    profile: PowerProfile

    def __post_init__(self):
        taps = np.asarray(self.taps, dtype=np.complex128)
        object.__setattr__(self, "taps", taps)
        if taps.ndim != 2:
            raise InvalidProfile(f"taps must be 2-D (antennas, cp_len), got {taps.shape}")
        t = self.profile.n_taps
        if taps.shape[1] < t:
            raise InvalidProfile(
                f"tap vectors shorter ({taps.shape[1]}) than the profile ({t} taps)"
            )
        if np.any(taps[:, t:] != 0):
            raise InvalidProfile("taps beyond the profile length must be exactly zero")

    @property
    def n_antennas(self) -> int:
        return int(self.taps.shape[0])


def draw_channel(
    rng: np.random.Generator, m_antennas: int, profile: PowerProfile, cp_len: int
) -> ChannelRealization:
    """Draw i.i.d. circularly symmetric Gaussian taps for each antenna.

    Tap (m, l) has variance ``profile.tap_variances[l]``; taps are
    independent across antennas and delays and zero-padded out to ``cp_len``.
    """
    if m_antennas < 1:
        raise InvalidProfile(f"m_antennas must be >= 1, got {m_antennas}")
    t = profile.n_taps
    if t > cp_len:
        raise InvalidProfile(f"profile has {t} taps but the CP only covers {cp_len}")
    scale = np.sqrt(profile.tap_variances / 2.0)
    real = rng.standard_normal((m_antennas, t))
    imag = rng.standard_normal((m_antennas, t))
    taps = np.zeros((m_antennas, cp_len), dtype=np.complex128)
    taps[:, :t] = (real + 1j * imag) * scale
    return ChannelRealization(taps=taps, profile=profile)


@dataclass(frozen=True)
class ReceivedFrame:
    """Per-antenna received samples plus the ground truth used for scoring."""

    samples: np.ndarray  # shape (n_antennas, n_symbols*span + 2*cp_len)
    true_cfo: float
    noise_power: float
    config: OfdmConfig

    def __post_init__(self):
        if not -0.5 <= self.true_cfo < 0.5:
            raise CfoOutOfRange(f"true_cfo must lie in [-0.5, 0.5), got {self.true_cfo}")
        if self.noise_power < 0:
            raise FrameShapeError(f"noise_power must be >= 0, got {self.noise_power}")
        expected = (
            self.config.n_antennas,
            self.config.n_symbols * self.config.symbol_span() + 2 * self.config.cp_len,
        )
        if self.samples.shape != expected:
            raise FrameShapeError(
                f"received samples must have shape {expected}, got {self.samples.shape}"
            )


def propagate(
    tx: TxStream,
    channel: ChannelRealization,
    cfo: float,
    noise_power: float,
    rng: np.random.Generator | None = None,
) -> ReceivedFrame:
    """Apply the CFO ramp, multipath convolution, and AWGN to a stream.

    Keeps ``n_symbols * span + 2*cp_len`` output samples per antenna, enough
    to evaluate every lag pair of every scored symbol.
    """
    if not -0.5 <= cfo < 0.5:
        raise CfoOutOfRange(f"cfo must lie in [-0.5, 0.5), got {cfo}")
    if noise_power < 0:
        raise FrameShapeError(f"noise_power must be >= 0, got {noise_power}")
    if noise_power > 0 and rng is None:
        raise FrameShapeError("an rng is required when noise_power > 0")
    config = tx.config
    if channel.taps.shape[1] != config.cp_len:
        raise InvalidProfile(
            f"channel taps cover {channel.taps.shape[1]} delays, config expects {config.cp_len}"
        )
    if channel.n_antennas != config.n_antennas:
        raise InvalidProfile(
            f"channel has {channel.n_antennas} antennas, config expects {config.n_antennas}"
        )

    n_out = config.n_symbols * config.symbol_span() + 2 * config.cp_len
    ramp = np.exp(2j * np.pi * cfo * np.arange(tx.samples.size) / config.n_fft)
    rotated = ramp * tx.samples
    received = np.empty((config.n_antennas, n_out), dtype=np.complex128)
    for m in range(config.n_antennas):
        received[m] = np.convolve(rotated, channel.taps[m])[:n_out]
    if noise_power > 0:
        noise = rng.standard_normal((config.n_antennas, n_out)) + 1j * rng.standard_normal(
            (config.n_antennas, n_out)
        )
        received += noise * np.sqrt(noise_power / 2.0)
    return ReceivedFrame(
        samples=received, true_cfo=float(cfo), noise_power=float(noise_power), config=config
    )
