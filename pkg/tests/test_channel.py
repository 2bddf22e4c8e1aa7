"""Tests for channel draws, CFO rotation, and noise injection."""

import numpy as np
import pytest

from cfolab import (
    ChannelRealization,
    OfdmConfig,
    PowerProfile,
    ReceivedFrame,
    draw_channel,
    draw_qam_symbols,
    modulate_stream,
    propagate,
    uniform_profile,
)
from cfolab.errors import CfoOutOfRange, FrameShapeError, InvalidProfile


def single_tap_channel(m=1, cp_len=16, gain=1.0 + 0j):
    taps = np.zeros((m, cp_len), dtype=complex)
    taps[:, 0] = gain
    return ChannelRealization(taps=taps, profile=PowerProfile([1.0]))


def make_tx(cfg, seed=0):
    rng = np.random.default_rng(seed)
    return modulate_stream(
        draw_qam_symbols(rng, (cfg.n_symbols + 1) * cfg.n_fft, cfg.qam_order, cfg.signal_power),
        cfg,
    )


class TestPowerProfile:
    def test_uniform(self):
        assert np.allclose(uniform_profile(5).tap_variances, 0.2)

    def test_rejects_empty(self):
        with pytest.raises(InvalidProfile):
            PowerProfile([])

    def test_rejects_negative(self):
        with pytest.raises(InvalidProfile):
            PowerProfile([1.5, -0.5])

    def test_rejects_unnormalized(self):
        with pytest.raises(InvalidProfile):
            PowerProfile([0.4, 0.4])


class TestDrawChannel:
    def test_single_tap_profile_zeroes_rest(self):
        rng = np.random.default_rng(2)
        ch = draw_channel(rng, 3, PowerProfile([1.0]), 16)
        assert np.all(ch.taps[:, 1:] == 0)
        assert np.all(ch.taps[:, 0] != 0)

    def test_per_tap_variance(self):
        rng = np.random.default_rng(3)
        draws = np.array([draw_channel(rng, 64, uniform_profile(5), 16).taps[:, :5]
                          for _ in range(10_000 // 64)])
        variances = np.mean(np.abs(draws) ** 2, axis=(0, 1))
        assert np.all(np.abs(variances - 0.2) / 0.2 < 0.05)

    def test_antennas_uncorrelated(self):
        rng = np.random.default_rng(4)
        taps = np.array([draw_channel(rng, 2, PowerProfile([1.0]), 16).taps[:, 0]
                         for _ in range(10_000)])
        cross = np.mean(taps[:, 0] * np.conj(taps[:, 1]))
        assert abs(cross) < 0.05

    def test_rejects_profile_longer_than_cp(self):
        rng = np.random.default_rng(0)
        with pytest.raises(InvalidProfile):
            draw_channel(rng, 1, uniform_profile(5), 4)

    def test_rejects_zero_antennas(self):
        with pytest.raises(InvalidProfile):
            draw_channel(np.random.default_rng(0), 0, PowerProfile([1.0]), 16)


class TestPropagate:
    def test_identity_channel_noiseless(self):
        cfg = OfdmConfig(n_fft=64, cp_len=16, n_symbols=2)
        tx = make_tx(cfg)
        frame = propagate(tx, single_tap_channel(), 0.0, 0.0)
        n = frame.samples.shape[1]
        assert np.allclose(frame.samples[0], tx.samples[:n], rtol=0, atol=1e-15)

    def test_pure_rotation(self):
        cfg = OfdmConfig(n_fft=64, cp_len=16, n_symbols=2)
        tx = make_tx(cfg, seed=1)
        frame = propagate(tx, single_tap_channel(), 0.295, 0.0)
        n = frame.samples.shape[1]
        ramp = np.exp(2j * np.pi * 0.295 * np.arange(n) / 64)
        assert np.allclose(frame.samples[0], ramp * tx.samples[:n], rtol=1e-12, atol=1e-12)

    def test_rotation_preserves_magnitude(self):
        cfg = OfdmConfig(n_fft=64, cp_len=16, n_symbols=2)
        tx = make_tx(cfg, seed=2)
        frame = propagate(tx, single_tap_channel(), -0.37, 0.0)
        n = frame.samples.shape[1]
        assert np.allclose(np.abs(frame.samples[0]), np.abs(tx.samples[:n]), atol=1e-12)

    def test_multipath_matches_bruteforce_convolution(self):
        cfg = OfdmConfig(n_fft=16, cp_len=4, n_symbols=2, qam_order=4)
        tx = make_tx(cfg, seed=3)
        taps = np.zeros((1, 4), dtype=complex)
        taps[0, :3] = [0.8, 0.4 - 0.2j, 0.1j]
        ch = ChannelRealization(taps=taps, profile=PowerProfile([0.6, 0.3, 0.1]))
        frame = propagate(tx, ch, 0.0, 0.0)
        n = frame.samples.shape[1]
        reference = np.zeros(n, dtype=complex)
        for i in range(n):
            for l in range(4):
                if i - l >= 0:
                    reference[i] += tx.samples[i - l] * taps[0, l]
        assert np.allclose(frame.samples[0], reference, atol=1e-12)

    def test_noise_variance(self):
        cfg = OfdmConfig(n_fft=64, cp_len=16, n_symbols=8)
        tx = modulate_stream(np.zeros(9 * 64, dtype=complex), cfg)
        rng = np.random.default_rng(9)
        frame = propagate(tx, single_tap_channel(), 0.0, 0.5, rng)
        measured = np.mean(np.abs(frame.samples) ** 2)
        assert abs(measured - 0.5) / 0.5 < 0.1

    def test_rejects_cfo_out_of_range(self):
        cfg = OfdmConfig(n_fft=64, cp_len=16, n_symbols=1)
        tx = make_tx(cfg)
        with pytest.raises(CfoOutOfRange):
            propagate(tx, single_tap_channel(), 0.5, 0.0)
        with pytest.raises(CfoOutOfRange):
            propagate(tx, single_tap_channel(), -0.51, 0.0)

    def test_noise_requires_rng(self):
        cfg = OfdmConfig(n_fft=64, cp_len=16, n_symbols=1)
        tx = make_tx(cfg)
        with pytest.raises(FrameShapeError):
            propagate(tx, single_tap_channel(), 0.0, 0.1, None)

    def test_received_frame_validates_cfo(self):
        cfg = OfdmConfig(n_fft=64, cp_len=16, n_symbols=1)
        samples = np.zeros((1, cfg.n_symbols * cfg.symbol_span() + 32), dtype=complex)
        with pytest.raises(CfoOutOfRange):
            ReceivedFrame(samples=samples, true_cfo=0.7, noise_power=0.0, config=cfg)
