"""Tests for the synthetic channel families."""

import numpy as np
import pytest
from numpy.testing import assert_array_equal

from sparselink.channel.cir import pdp
from sparselink.channel.presets import PresetRanges, preset_ensemble, preset_paths
from sparselink.core.singlecarrier import SnrPoint, design_lmmse, matched_filter_bound, se_no_eq


class TestPresetRanges:
    """Generator parameter validation."""

    def test_defaults_fit_the_grid(self):
        ranges = PresetRanges()
        assert ranges.num_taps == 64
        assert ranges.upsample_factor == 16

    def test_from_dict_rejects_unknown(self):
        with pytest.raises(ValueError, match="Unknown preset range keys"):
            PresetRanges.from_dict({"num_taps": 64, "colour": "red"})

    def test_round_trip(self):
        ranges = PresetRanges(green_power_db=(-12.0, -6.0))
        assert PresetRanges.from_dict(ranges.to_dict()) == ranges

    def test_rejects_unordered_pair(self):
        with pytest.raises(ValueError, match="ordered pair"):
            PresetRanges(green_delay=(2.5, 1.5))

    def test_rejects_positive_power(self):
        with pytest.raises(ValueError, match="must not exceed 0 dB"):
            PresetRanges(blue_far_power_db=(-10.0, 3.0))

    def test_rejects_delays_beyond_grid(self):
        with pytest.raises(ValueError, match="beyond num_taps"):
            PresetRanges(num_taps=32)


class TestPresetPaths:
    """Drawn path sets follow the family descriptions."""

    def test_red_background_below_minus_30(self):
        """Every non-reference path of a red channel should be at or below −30 dB."""
        ranges = PresetRanges()
        rng = np.random.default_rng(3)
        for _ in range(50):
            spec = preset_paths("red", rng, ranges)
            los = next(p for p in spec.paths if p.power_db == 0.0)
            others = [p for p in spec.paths if p is not los]
            assert 3 <= len(others) <= 6
            for p in others:
                assert p.power_db <= -30.0
                offset = (p.delay - los.delay) / ranges.sample_period
                assert 1.0 <= offset <= 40.0

    def test_green_has_echo_near_two_taps(self):
        ranges = PresetRanges(background_count=(0, 0))
        rng = np.random.default_rng(4)
        for _ in range(20):
            los, echo = preset_paths("green", rng, ranges).paths
            offset = (echo.delay - los.delay) / ranges.sample_period
            assert 1.5 <= offset <= 2.5
            assert -15.0 <= echo.power_db <= -3.0

    def test_unknown_family(self):
        with pytest.raises(ValueError, match="Unknown preset"):
            preset_paths("purple", np.random.default_rng(0), PresetRanges())


class TestPresetEnsemble:
    """Reproducible ensembles of normalized, synchronized channels."""

    def test_deterministic_in_seed(self):
        first = preset_ensemble("mixed", 6, seed=11)
        second = preset_ensemble("mixed", 6, seed=11)
        for a, b in zip(first, second):
            assert_array_equal(a.taps, b.taps)
            assert a.label == b.label

    def test_seed_changes_channels(self):
        a = preset_ensemble("green", 1, seed=1)[0]
        b = preset_ensemble("green", 1, seed=2)[0]
        assert not np.array_equal(a.taps, b.taps)

    def test_prefix_of_larger_ensemble(self):
        """Channel i should not depend on the ensemble size."""
        small = preset_ensemble("blue", 2, seed=5)
        large = preset_ensemble("blue", 4, seed=5)
        assert_array_equal(small[1].taps, large[1].taps)

    def test_mixed_cycles_families(self):
        labels = [c.label for c in preset_ensemble("mixed", 4, seed=0)]
        assert labels == ["red-000", "green-001", "blue-002", "red-003"]

    def test_channels_are_normalized_and_synced(self):
        for cir in preset_ensemble("mixed", 9, seed=2):
            assert abs(cir.energy - 1.0) < 1e-12
            assert cir.peak_index == int(np.argmax(np.abs(cir.taps)))
            assert cir.length == 64

    @pytest.mark.parametrize("count", [0, -3])
    def test_rejects_bad_count(self, count):
        with pytest.raises(ValueError, match="at least 1"):
            preset_ensemble("red", count, seed=0)

    def test_unknown_preset(self):
        with pytest.raises(ValueError, match="Unknown preset"):
            preset_ensemble("purple", 1, seed=0)

    def test_green_strong_component_after_peak(self):
        """Green channels should carry a strong component 1 to 3 taps after the peak."""
        for cir in preset_ensemble("green", 100, seed=0):
            profile = pdp(cir)
            l0 = cir.peak_index
            assert profile[l0 + 1 : l0 + 4].max() > -27.0

    def test_green_secondary_local_maximum(self):
        """With the echo at least two taps out, the PDP has its own local maximum at +2 or +3.

        Echoes near 1.5 taps merge into the falling edge of the main peak,
        so the default delay range cannot guarantee this.
        """
        ranges = PresetRanges(green_delay=(2.0, 2.5), background_count=(0, 0))
        for cir in preset_ensemble("green", 100, seed=9, ranges=ranges):
            profile = pdp(cir)
            l0 = cir.peak_index
            assert any(
                profile[j] > profile[j - 1] and profile[j] >= profile[j + 1]
                for j in range(l0 + 1, l0 + 4)
            ), cir.label

    def test_blue_components_near_2_and_30(self):
        """Blue channels should show energy near +2 and +30 taps and little in between."""
        ranges = PresetRanges(
            background_count=(0, 0),
            blue_near_power_db=(-6.0, -3.0),
            blue_far_power_db=(-12.0, -10.0),
        )
        for cir in preset_ensemble("blue", 10, seed=3, ranges=ranges):
            profile = pdp(cir)
            l0 = cir.peak_index
            assert profile[l0 + 1 : l0 + 4].max() > -16.0
            assert profile[l0 + 28 : l0 + 33].max() > -22.0
            assert profile[l0 + 10 : l0 + 21].max() < -20.0


class TestMixedEnsembleSpectralEfficiency:
    """Equalization needs of the default 46-channel mixed ensemble at 6 dB."""

    @pytest.fixture(scope="class")
    def ensemble(self):
        return preset_ensemble("mixed", 46, seed=0)

    def test_median_without_equalization(self, ensemble):
        snr = SnrPoint(6.0)
        values = [se_no_eq(cir, snr) for cir in ensemble]
        assert 1.8 <= float(np.median(values)) <= 2.35

    def test_six_taps_keep_every_channel_above_floor(self, ensemble):
        snr = SnrPoint(6.0)
        values = [design_lmmse(cir, snr, 6).se_bits for cir in ensemble]
        assert min(values) >= 1.4

    def test_six_taps_close_to_bound_for_half(self, ensemble):
        snr = SnrPoint(6.0)
        close = [
            matched_filter_bound(cir, snr) - design_lmmse(cir, snr, 6).se_bits <= 0.15
            for cir in ensemble
        ]
        assert sum(close) >= len(close) / 2

    def test_red_channels_need_no_equalization(self, ensemble):
        snr = SnrPoint(6.0)
        red = [cir for cir in ensemble if cir.label.startswith("red")]
        gaps = [matched_filter_bound(cir, snr) - se_no_eq(cir, snr) for cir in red]
        assert sum(g <= 0.15 for g in gaps) >= len(red) / 2
