"""Tests for single-carrier spectral efficiency and LMMSE design."""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.linalg import eigh

from sparselink.channel.cir import ChannelImpulseResponse
from sparselink.channel.presets import preset_ensemble
from sparselink.core.singlecarrier import (
    SnrPoint,
    convolution_rows,
    default_delay_search,
    design_lmmse,
    design_sweep,
    equalized_sinr,
    matched_filter_bound,
    postcursor_delay,
    se_from_sinr,
    se_no_eq,
    se_with_eq,
    sweep_n,
    sweep_snr_sc,
)

SE_AT_6DB = math.log2(1 + 10**0.6)


def _random_channel(rng: np.random.Generator, max_len: int = 16) -> np.ndarray:
    length = int(rng.integers(1, max_len + 1))
    h = rng.standard_normal(length) + 1j * rng.standard_normal(length)
    return h / np.linalg.norm(h)


class TestSnrPoint:
    """SNR conversions."""

    def test_linear(self):
        snr = SnrPoint(10.0)
        assert snr.snr_linear == pytest.approx(10.0)
        assert snr.noise_var == pytest.approx(0.1)

    def test_noiseless(self):
        snr = SnrPoint(math.inf)
        assert snr.noise_var == 0.0
        assert not snr.is_finite

    def test_from_linear(self):
        assert SnrPoint.from_linear(100.0).snr_db == pytest.approx(20.0)

    @pytest.mark.parametrize("value", [math.nan, -math.inf])
    def test_rejects_invalid(self, value):
        with pytest.raises(ValueError):
            SnrPoint(value)


class TestAnalyticAnchors:
    """Closed-form values at 6 dB."""

    def test_single_tap_everything_equals_awgn(self):
        """Single tap: no-eq, MFB and every equalizer length give log2(1+SNR)."""
        snr = SnrPoint(6.0)
        h = ChannelImpulseResponse([1.0])
        assert abs(se_no_eq(h, snr) - SE_AT_6DB) < 1e-9
        assert abs(matched_filter_bound(h, snr) - SE_AT_6DB) < 1e-9
        for n in range(1, 9):
            assert abs(design_lmmse(h, snr, n).se_bits - SE_AT_6DB) < 1e-9
        assert SE_AT_6DB == pytest.approx(2.31655, abs=1e-5)

    def test_two_tap_spot_value(self):
        """h = (√0.8, √0.2) without equalization."""
        h = np.array([math.sqrt(0.8), math.sqrt(0.2)])
        assert se_no_eq(h, SnrPoint(6.0)) == pytest.approx(1.47157, abs=1e-5)

    def test_explicit_decision_tap(self):
        h = np.array([math.sqrt(0.8), math.sqrt(0.2)])
        sinr = 0.2 / (0.8 + 10**-0.6)
        assert se_no_eq(h, SnrPoint(6.0), l0=1) == pytest.approx(math.log2(1 + sinr))

    def test_decision_tap_out_of_range(self):
        with pytest.raises(ValueError, match="outside"):
            se_no_eq([1.0, 0.5], SnrPoint(6.0), l0=2)

    def test_noiseless_single_tap_is_infinite(self):
        assert se_no_eq([1.0], SnrPoint(math.inf)) == math.inf

    def test_se_from_sinr(self):
        assert se_from_sinr(1.0) == 1.0
        assert se_from_sinr(math.inf) == math.inf


class TestConvolutionRows:
    """The Toeplitz convolution operator."""

    def test_matches_numpy_convolve(self):
        rng = np.random.default_rng(2)
        h = _random_channel(rng, 10)
        g = rng.standard_normal(5) + 1j * rng.standard_normal(5)
        c_mat = convolution_rows(h, 5)
        assert c_mat.shape == (h.size + 4, 5)
        assert_allclose(c_mat @ g, np.convolve(h, g), atol=1e-12)

    def test_rejects_zero_taps(self):
        with pytest.raises(ValueError, match="at least 1"):
            convolution_rows([1.0], 0)


class TestDelays:
    """Decision-delay windows."""

    def test_default_window(self):
        assert list(default_delay_search(10, 4, 5)) == [3, 4, 5, 6, 7, 8, 9]

    def test_default_window_clipped(self):
        assert list(default_delay_search(3, 2, 0)) == [0, 1, 2]

    def test_postcursor_delay(self):
        """Seven taps with two postcursors put the cursor four taps after the peak."""
        assert postcursor_delay(8, 7, 2) == 12

    def test_postcursor_delay_bounds(self):
        with pytest.raises(ValueError, match="n_postcursors"):
            postcursor_delay(0, 3, 3)


class TestDesignLmmse:
    """Closed-form LMMSE design."""

    def test_matches_generalized_eigenvalue(self):
        """SINR(d) should be the top generalized eigenvalue of (rᴴr, B_d)."""
        rng = np.random.default_rng(42)
        snr = SnrPoint(6.0)
        for _ in range(100):
            h = _random_channel(rng)
            n = int(rng.integers(1, 9))
            c_mat = convolution_rows(h, n)
            d = int(rng.integers(0, c_mat.shape[0]))
            design = design_lmmse(h, snr, n, delay_search=[d])

            r = c_mat[d]
            b_mat = c_mat.conj().T @ c_mat - np.outer(r.conj(), r) + snr.noise_var * np.eye(n)
            oracle = eigh(np.outer(r.conj(), r), b_mat, eigvals_only=True)[-1]
            assert design.sinr == pytest.approx(oracle, rel=1e-9)

    def test_two_tap_grid_search(self):
        """No N=2 equalizer on a fine grid should beat the closed form."""
        h = np.array([0.8, 0.5 - 0.3j, 0.2j])
        h = h / np.linalg.norm(h)
        snr = SnrPoint(6.0)
        design = design_lmmse(h, snr, 2, delay_search=[1])
        best = 0.0
        for magnitude in np.linspace(0.0, 2.0, 201):
            for phase in np.linspace(-np.pi, np.pi, 181):
                g = np.array([1.0, magnitude * np.exp(1j * phase)])
                sinr, _ = equalized_sinr(g, 1, h, snr)
                best = max(best, sinr)
                g_swapped = np.array([magnitude * np.exp(1j * phase), 1.0])
                sinr, _ = equalized_sinr(g_swapped, 1, h, snr)
                best = max(best, sinr)
        assert best <= design.sinr * (1 + 1e-12)
        assert best == pytest.approx(design.sinr, rel=1e-2)

    def test_cursor_gain_is_one(self):
        rng = np.random.default_rng(5)
        h = _random_channel(rng)
        design = design_lmmse(h, SnrPoint(10.0), 5)
        c = np.convolve(h, design.taps)
        assert c[design.decision_delay] == pytest.approx(1.0)

    def test_se_with_eq_agrees(self):
        """Evaluating the design through c = h * g should reproduce its SE."""
        rng = np.random.default_rng(6)
        snr = SnrPoint(3.0)
        for _ in range(20):
            h = _random_channel(rng, 12)
            design = design_lmmse(h, snr, int(rng.integers(1, 8)))
            assert se_with_eq(design, h, snr) == pytest.approx(design.se_bits, abs=1e-9)

    def test_ties_go_to_smallest_delay(self):
        design = design_lmmse([1.0], SnrPoint(6.0), 3, delay_search=[2, 0, 1])
        assert design.decision_delay == 0

    def test_empty_delay_search(self):
        with pytest.raises(ValueError, match="must not be empty"):
            design_lmmse([1.0, 0.5], SnrPoint(6.0), 2, delay_search=[])

    def test_delay_out_of_range(self):
        with pytest.raises(ValueError, match="Decision delays"):
            design_lmmse([1.0, 0.5], SnrPoint(6.0), 2, delay_search=[3])

    def test_noiseless_rank_deficient(self):
        with pytest.raises(ValueError, match="singular"):
            design_lmmse([1.0], SnrPoint(math.inf), 2, delay_search=[0])


class TestSweeps:
    """Monotonicity and sweep helpers."""

    def test_n_one_equals_no_equalization(self):
        cir = preset_ensemble("green", 1, seed=1)[0]
        snr = SnrPoint(6.0)
        ((n, se),) = sweep_n(cir, snr, [1])
        assert n == 1
        assert se == pytest.approx(se_no_eq(cir, snr), abs=1e-12)

    def test_monotone_and_bounded(self):
        """SE grows with N and SNR and never exceeds the matched filter bound."""
        rng = np.random.default_rng(11)
        channels = [_random_channel(rng) for _ in range(40)]
        channels += [c.taps for c in preset_ensemble("mixed", 12, seed=4)]
        snrs = [SnrPoint(v) for v in (0.0, 6.0, 12.0)]
        for h in channels:
            previous_by_n = None
            for snr in snrs:
                values = [se for _, se in sweep_n(h, snr, range(1, 9))]
                assert all(b >= a - 1e-9 for a, b in zip(values, values[1:]))
                assert max(values) <= matched_filter_bound(h, snr) + 1e-9
                if previous_by_n is not None:
                    assert all(now >= before - 1e-9 for before, now in zip(previous_by_n, values))
                previous_by_n = values

    def test_design_sweep_requires_sorted(self):
        with pytest.raises(ValueError, match="sorted"):
            design_sweep([1.0], SnrPoint(6.0), [3, 1])

    def test_sweep_snr(self):
        rows = sweep_snr_sc([1.0], [SnrPoint(0.0), SnrPoint(6.0)], 3)
        assert rows[0] == (0.0, pytest.approx(1.0))
        assert rows[1][1] == pytest.approx(SE_AT_6DB)
