"""Tests for the command-line application."""

import json

import pytest

from sparselink import __version__
from sparselink.app import SparselinkApplication
from sparselink.utils.config import Settings


@pytest.fixture
def app(tmp_path):
    settings = Settings(
        default_output_dir=str(tmp_path / "default"), _settings_path=tmp_path / "settings.json"
    )
    return SparselinkApplication(settings)


class TestCapacity:
    """The capacity subcommand."""

    def test_prints_capacity(self, app, capsys):
        status = app.run(["capacity", "--bandwidth", "2e9", "--streams", "1", "--se", "2.4"])
        assert status == 0
        assert capsys.readouterr().out.startswith("4.8e+09 bit/s/km²")

    def test_invalid_input_is_an_error(self, app, capsys):
        status = app.run(["capacity", "--bandwidth", "0", "--streams", "1", "--se", "2.4"])
        assert status == 1
        assert "error: Bandwidth must be positive" in capsys.readouterr().err


class TestUsage:
    """Argument parsing."""

    def test_missing_command(self, app):
        with pytest.raises(SystemExit) as excinfo:
            app.run([])
        assert excinfo.value.code == 2

    def test_version(self, app, capsys):
        with pytest.raises(SystemExit) as excinfo:
            app.run(["--version"])
        assert excinfo.value.code == 0
        assert __version__ in capsys.readouterr().out


class TestSynth:
    """Ensemble generation."""

    def test_writes_cir_and_pdp_files(self, app, tmp_path, capsys):
        status = app.run(["--out", str(tmp_path), "synth", "--preset", "red", "--count", "2"])
        assert status == 0
        names = sorted(p.name for p in (tmp_path / "channels").iterdir())
        assert names == ["red-000.json", "red-000_pdp.csv", "red-001.json", "red-001_pdp.csv"]
        assert "2 channels written" in capsys.readouterr().out

    def test_default_output_from_settings(self, app, tmp_path):
        assert app.run(["synth", "--preset", "green", "--count", "1"]) == 0
        assert (tmp_path / "default" / "channels" / "green-000.json").is_file()

    def test_file_ensemble_rejects_preset(self, app, tmp_path, capsys):
        config = tmp_path / "c.json"
        config.write_text(
            json.dumps({"format_version": 1, "ensemble": {"files": ["a.json"]}}), encoding="utf-8"
        )
        assert app.run(["--config", str(config), "synth", "--preset", "red"]) == 1
        assert "cannot be used with a file ensemble" in capsys.readouterr().err


class TestAnalysisCommands:
    """Subcommands that run the campaign."""

    @pytest.fixture
    def config(self, tmp_path):
        path = tmp_path / "campaign.json"
        path.write_text(
            json.dumps(
                {
                    "format_version": 1,
                    "ensemble": {"preset": "red", "count": 2, "seed": 0},
                    "n_list": [1, 2],
                    "k_list": [4],
                    "analyses": ["se-mc"],
                }
            ),
            encoding="utf-8",
        )
        return path

    def test_se_sc(self, app, config, tmp_path, capsys):
        out = tmp_path / "out"
        status = app.run(["--config", str(config), "--out", str(out), "--threads", "2", "se-sc"])
        assert status == 0
        assert (out / "se_sc.csv").is_file()
        assert not (out / "se_mc.csv").exists()
        assert "2 files written" in capsys.readouterr().out

    def test_run_uses_config_analyses(self, app, config, tmp_path):
        out = tmp_path / "out"
        assert app.run(["--config", str(config), "--out", str(out), "run"]) == 0
        assert (out / "se_mc.csv").is_file()
        assert not (out / "se_sc.csv").exists()

    def test_seed_override_recorded(self, app, config, tmp_path):
        out = tmp_path / "out"
        assert app.run(["--config", str(config), "--out", str(out), "--seed", "7", "se-sc"]) == 0
        manifest = json.loads((out / "manifest.json").read_text(encoding="utf-8"))
        assert manifest["seeds"] == {"ensemble": 7, "link": 7}

    def test_missing_config(self, app, tmp_path, capsys):
        status = app.run(["--config", str(tmp_path / "absent.json"), "se-sc"])
        assert status == 1
        assert "error: Config file not found" in capsys.readouterr().err

    def test_bad_thread_count(self, app, config, tmp_path, capsys):
        status = app.run(["--config", str(config), "--out", str(tmp_path), "--threads", "0", "se-sc"])
        assert status == 1
        assert "--threads" in capsys.readouterr().err

    def test_ber_needs_link_snr_points(self, app, config, tmp_path, capsys):
        status = app.run(["--config", str(config), "--out", str(tmp_path / "out"), "ber"])
        assert status == 1
        assert "link.snr_db_list" in capsys.readouterr().err
        assert not (tmp_path / "out" / "ber.csv").exists()


class TestSettingsCommand:
    """Showing and storing user defaults."""

    def test_shows_current_defaults(self, app, tmp_path, capsys):
        assert app.run(["settings"]) == 0
        out = capsys.readouterr().out
        assert "threads: 1" in out
        assert "log_level: INFO" in out
        assert f"output_dir: {tmp_path / 'default'}" in out
        assert not (tmp_path / "settings.json").exists()

    def test_save_stores_global_flags(self, app, tmp_path):
        argv = ["--threads", "3", "--log-level", "WARNING", "--out", str(tmp_path / "runs"), "settings", "--save"]
        assert app.run(argv) == 0
        stored = Settings.load(tmp_path / "settings.json")
        assert stored.threads == 3
        assert stored.log_level == "WARNING"
        assert stored.default_output_dir == str(tmp_path / "runs")

    def test_save_keeps_unset_values(self, app, tmp_path):
        assert app.run(["--threads", "2", "settings", "--save"]) == 0
        stored = Settings.load(tmp_path / "settings.json")
        assert (stored.threads, stored.log_level) == (2, "INFO")
        assert stored.default_output_dir == str(tmp_path / "default")

    def test_save_rejects_bad_threads(self, app, tmp_path, capsys):
        assert app.run(["--threads", "0", "settings", "--save"]) == 1
        assert not (tmp_path / "settings.json").exists()
