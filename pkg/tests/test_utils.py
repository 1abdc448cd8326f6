"""Tests for formatting, settings, the worker pool and random streams."""

import logging
import math
import time

import numpy as np
import pytest
from numpy.testing import assert_array_equal

from sparselink.utils.config import Settings
from sparselink.utils.formatting import (
    format_count,
    format_duration,
    format_number,
    format_se,
    sanitize_filename,
    to_db,
)
from sparselink.utils.parallel import ordered_map
from sparselink.utils.rng import stream


class TestFormatting:
    """Display and CSV formatting helpers."""

    @pytest.mark.parametrize(
        "value, text",
        [(0.1, "0.1"), (2.0, "2.0"), (math.inf, "inf"), (-math.inf, "-inf"), (math.nan, "nan")],
    )
    def test_format_number(self, value, text):
        assert format_number(value) == text

    def test_format_number_round_trips(self):
        value = 1 / 3
        assert float(format_number(value)) == value

    @pytest.mark.parametrize("value, db", [(100.0, 20.0), (0.0, -120.0), (1e-20, -120.0), (-1.0, -120.0)])
    def test_to_db(self, value, db):
        assert to_db(value) == pytest.approx(db)

    def test_format_se(self):
        assert format_se(2.31655) == "2.317 bit/s/Hz"

    @pytest.mark.parametrize("seconds, text", [(83, "1:23"), (3723, "1:02:03"), (-4, "0:00")])
    def test_format_duration(self, seconds, text):
        assert format_duration(seconds) == text

    def test_format_count(self):
        assert format_count(1, "channel") == "1 channel"
        assert format_count(46, "channel") == "46 channels"
        assert format_count(2, "index", "indices") == "2 indices"

    def test_sanitize_filename(self):
        assert sanitize_filename("red/000 a?.csv") == "red_000_a_.csv"
        assert sanitize_filename("...") == "unnamed"


class TestSettings:
    """Persistent user defaults."""

    def test_save_and_load(self, tmp_path):
        path = tmp_path / "settings.json"
        Settings(threads=4, log_level="DEBUG", default_output_dir="/data/runs", _settings_path=path).save()
        loaded = Settings.load(path)
        assert (loaded.threads, loaded.log_level, loaded.default_output_dir) == (4, "DEBUG", "/data/runs")
        assert not path.with_suffix(".tmp").exists()

    def test_missing_file_gives_defaults(self, tmp_path):
        settings = Settings.load(tmp_path / "absent.json")
        assert (settings.threads, settings.log_level) == (1, "INFO")

    def test_corrupt_file_is_tolerated(self, tmp_path, caplog):
        path = tmp_path / "settings.json"
        path.write_text("{not json", encoding="utf-8")
        with caplog.at_level(logging.WARNING, logger="sparselink.utils.config"):
            settings = Settings.load(path)
        assert settings.threads == 1
        assert "Failed to load settings" in caplog.text

    def test_bad_values_are_clamped_or_ignored(self, tmp_path):
        path = tmp_path / "settings.json"
        path.write_text('{"threads": 0, "log_level": "loud"}', encoding="utf-8")
        settings = Settings.load(path)
        assert settings.threads == 1
        assert settings.log_level == "INFO"

    def test_output_dir(self, tmp_path, monkeypatch):
        assert Settings(default_output_dir=str(tmp_path / "x")).output_dir() == tmp_path / "x"
        monkeypatch.setenv("XDG_DATA_HOME", str(tmp_path / "data"))
        runs = Settings().output_dir()
        assert runs == tmp_path / "data" / "sparselink" / "runs"
        assert runs.is_dir()


class TestOrderedMap:
    """Order-preserving worker pool."""

    @pytest.mark.parametrize("threads", [1, 4])
    def test_preserves_order(self, threads):
        def slow_square(x):
            time.sleep(0.01 * (5 - x))
            return x * x

        assert ordered_map(slow_square, range(5), threads) == [0, 1, 4, 9, 16]

    def test_empty(self):
        assert ordered_map(str, [], 4) == []

    def test_failure_is_logged_and_raised(self, caplog):
        def fail_on_two(x):
            if x == 2:
                raise RuntimeError("boom")
            return x

        with caplog.at_level(logging.ERROR, logger="sparselink.utils.parallel"):
            with pytest.raises(RuntimeError, match="boom"):
                ordered_map(fail_on_two, range(4), threads=2)
        assert "Worker task failed" in caplog.text


class TestStream:
    """Keyed random streams."""

    def test_same_keys_same_draws(self):
        assert_array_equal(stream(5, 1, 2).random(8), stream(5, 1, 2).random(8))

    @pytest.mark.parametrize("other", [(6, 1, 2), (5, 2, 1), (5, 1, 2, 0), (5, 1)])
    def test_different_keys_differ(self, other):
        assert not np.array_equal(stream(5, 1, 2).random(8), stream(*other).random(8))

    def test_rejects_negative(self):
        with pytest.raises(ValueError, match="non-negative"):
            stream(0, -1)
