"""Transmit-side OFDM frame synthesis.

Builds the contiguous time-domain sample stream: i.i.d. square-QAM symbols
per subcarrier, unitary inverse DFT per symbol, cyclic prefix insertion,
and concatenation of ``n_symbols + 1`` blocks (the trailing block is a
guard symbol so that lag pairs reaching into the next block stay defined
for every scored symbol).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import FrameShapeError, InvalidConstellation


@dataclass(frozen=True)
class OfdmConfig:
    """Static frame geometry and modulation parameters.

    n_fft        -- DFT size (samples per symbol body)
    cp_len       -- cyclic prefix length; must be < n_fft
    n_symbols    -- number of scored OFDM symbols per frame
    n_antennas   -- receive antennas sharing one oscillator
    qam_order    -- square-QAM constellation size (4, 16, 64, ...)
    signal_power -- average transmit power per time-domain sample
    """

    n_fft: int
    cp_len: int
    n_symbols: int
    n_antennas: int = 1
    qam_order: int = 16
    signal_power: float = 1.0

    def __post_init__(self):
        for name in ("n_fft", "cp_len", "n_symbols", "n_antennas"):
            value = getattr(self, name)
            if not isinstance(value, (int, np.integer)) or value < 1:
                raise FrameShapeError(f"{name} must be a positive integer, got {value!r}")
        if self.cp_len >= self.n_fft:
            raise FrameShapeError(
                f"cp_len must be smaller than n_fft, got {self.cp_len} >= {self.n_fft}"
            )
        side = math.isqrt(int(self.qam_order))
        if self.qam_order < 4 or side * side != self.qam_order:
            raise InvalidConstellation(
                f"qam_order must be a perfect square >= 4, got {self.qam_order}"
            )
        if not self.signal_power > 0:
            raise FrameShapeError(f"signal_power must be > 0, got {self.signal_power}")

    def symbol_span(self) -> int:
        """Samples per OFDM symbol including its cyclic prefix."""
        return self.n_fft + self.cp_len


@dataclass(frozen=True)
class TxStream:
    """Contiguous transmitted sample stream of (n_symbols + 1) OFDM symbols."""

    samples: np.ndarray
    config: OfdmConfig

    def __post_init__(self):
        expected = (self.config.n_symbols + 1) * self.config.symbol_span()
        if self.samples.shape != (expected,):
            raise FrameShapeError(
                f"stream must hold {expected} samples, got shape {self.samples.shape}"
            )


def qam_constellation(order: int, power: float = 1.0) -> np.ndarray:
    """Square-QAM grid scaled to the requested average power, zero mean.

    Points are odd-integer lattice coordinates (±1, ±3, ...) on each axis,
    scaled so the uniform average over all points has power ``power``.
    """
    side = math.isqrt(int(order))
    if order < 4 or side * side != order:
        raise InvalidConstellation(f"order must be a perfect square >= 4, got {order}")
    levels = np.arange(-(side - 1), side, 2, dtype=np.float64)
    points = (levels[:, None] + 1j * levels[None, :]).ravel()
    # Mean energy of the odd-integer grid is 2*(side^2 - 1)/3 per point.
    scale = math.sqrt(power / (2.0 * (side * side - 1) / 3.0))
    return points * scale


def draw_qam_symbols(rng: np.random.Generator, count: int, order: int, power: float = 1.0) -> np.ndarray:
    """Draw ``count`` i.i.d. symbols uniformly from the square-QAM grid."""
    if count < 1:
        raise FrameShapeError(f"count must be >= 1, got {count}")
    points = qam_constellation(order, power)
    return points[rng.integers(0, order, size=count)]


def modulate_stream(freq_symbols: np.ndarray, config: OfdmConfig) -> TxStream:
    """Modulate frequency-domain symbols into a CP-prefixed sample stream.

    Expects one guard symbol beyond the scored ones: ``(n_symbols + 1) * n_fft``
    values. Each block of ``n_fft`` values goes through a unitary inverse DFT
    (scaled by sqrt(n_fft) relative to numpy's ifft so per-symbol power is
    preserved), then the last ``cp_len`` time samples are prepended as the CP.
    """
    n, cp, k = config.n_fft, config.cp_len, config.n_symbols
    freq_symbols = np.asarray(freq_symbols, dtype=np.complex128)
    expected = (k + 1) * n
    if freq_symbols.shape != (expected,):
        raise FrameShapeError(
            f"freq_symbols must hold {expected} values ({k + 1} symbols of {n}), "
            f"got shape {freq_symbols.shape}"
        )
    blocks = freq_symbols.reshape(k + 1, n)
    time_blocks = np.fft.ifft(blocks, axis=1) * math.sqrt(n)
    with_cp = np.concatenate([time_blocks[:, n - cp:], time_blocks], axis=1)
    return TxStream(samples=with_cp.ravel(), config=config)
