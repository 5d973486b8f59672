"""SNR bookkeeping and AWGN injection tests."""

import math

import numpy as np
import pytest

from csmalink import SnrSpec, add_awgn, resolve_symbol_snr


class TestSnrSpec:
    """Per-symbol vs per-data-bit operating points."""

    def test_symbol_mode_is_plain_conversion(self):
        assert resolve_symbol_snr(SnrSpec("symbol", 10.0)) == pytest.approx(10.0)
        assert resolve_symbol_snr(SnrSpec("symbol", 0.0)) == pytest.approx(1.0)

    def test_databit_mode_counts_only_data_bits(self):
        """A 4-data-bit symbol at x dB per bit carries 4x the energy."""
        spec = SnrSpec("databit", 10.0, data_bits_per_symbol=4)
        assert resolve_symbol_snr(spec) == pytest.approx(40.0)
        assert resolve_symbol_snr(
            SnrSpec("databit", 10.0, data_bits_per_symbol=6)
        ) == pytest.approx(60.0)

    def test_infinite_snr_passes_through(self):
        assert resolve_symbol_snr(SnrSpec("symbol", math.inf)) == math.inf
        spec = SnrSpec("databit", math.inf, data_bits_per_symbol=3)
        assert resolve_symbol_snr(spec) == math.inf

    def test_validation(self):
        with pytest.raises(ValueError):
            SnrSpec("bogus", 10.0)
        with pytest.raises(ValueError):
            SnrSpec("symbol", math.nan)
        with pytest.raises(ValueError):
            SnrSpec("symbol", -math.inf)
        with pytest.raises(ValueError):
            SnrSpec("databit", 10.0)  # missing data_bits_per_symbol


class TestAddAwgn:
    """Complex white noise with the requested power split across axes."""

    def test_noise_power_calibrated(self):
        rng = np.random.default_rng(99)
        clean = np.ones(1_000_000, dtype=np.complex128)
        noisy = add_awgn(clean, 10.0, rng)
        noise = noisy - clean
        power = float(np.mean(np.abs(noise) ** 2))
        assert power == pytest.approx(0.1, rel=0.01)
        # equal split between real and imaginary parts
        assert float(np.var(noise.real)) == pytest.approx(0.05, rel=0.02)
        assert float(np.var(noise.imag)) == pytest.approx(0.05, rel=0.02)

    def test_reference_power_scales_noise(self):
        rng = np.random.default_rng(100)
        clean = np.zeros(500_000, dtype=np.complex128)
        noisy = add_awgn(clean, 4.0, rng, reference_power=2.0)
        assert float(np.mean(np.abs(noisy) ** 2)) == pytest.approx(0.5, rel=0.02)

    def test_infinite_snr_is_exact_copy(self):
        rng = np.random.default_rng(101)
        clean = np.exp(1j * np.linspace(0, 6, 50))
        out = add_awgn(clean, math.inf, rng)
        np.testing.assert_array_equal(out, clean)
        assert out is not clean  # caller may mutate the result safely

    def test_draw_order_is_real_then_imaginary(self):
        """The noise stream is reproducible from the same generator state."""
        clean = np.zeros(16, dtype=np.complex128)
        out = add_awgn(clean, 8.0, np.random.default_rng(7))
        rng = np.random.default_rng(7)
        sigma = math.sqrt(1.0 / 8.0 / 2.0)
        expected = rng.standard_normal(16) * sigma
        expected = expected + 1j * (rng.standard_normal(16) * sigma)
        np.testing.assert_array_equal(out, expected)

    def test_validation(self):
        rng = np.random.default_rng(0)
        clean = np.zeros(4, dtype=np.complex128)
        with pytest.raises(ValueError):
            add_awgn(clean, 0.0, rng)
        with pytest.raises(ValueError):
            add_awgn(clean, -1.0, rng)
        with pytest.raises(ValueError):
            add_awgn(clean, math.nan, rng)
        with pytest.raises(ValueError):
            add_awgn(clean, 10.0, rng, reference_power=0.0)

    def test_preserves_shape(self):
        rng = np.random.default_rng(11)
        clean = np.zeros((3, 5), dtype=np.complex128)
        assert add_awgn(clean, 2.0, rng).shape == (3, 5)
