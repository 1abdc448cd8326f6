"""User settings for sparselink.

Handles persistent user defaults (worker threads, log level, output
location) following the XDG Base Directory specification.
"""

import json
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

logger = logging.getLogger(__name__)

# Application name for XDG directories
APP_NAME = "sparselink"

LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")

SETTINGS_FILE = "settings.json"


def _xdg_dir(variable: str, fallback: Path, *parts: str) -> Path:
    """Resolve and create $variable/sparselink/<parts>, using fallback when unset."""
    root = os.environ.get(variable) or fallback
    directory = Path(root, APP_NAME, *parts)
    directory.mkdir(parents=True, exist_ok=True)
    return directory


def get_config_dir() -> Path:
    """Directory holding settings.json, ~/.config/sparselink by default."""
    return _xdg_dir("XDG_CONFIG_HOME", Path.home() / ".config")


def get_runs_dir() -> Path:
    """Default campaign output root, ~/.local/share/sparselink/runs."""
    return _xdg_dir("XDG_DATA_HOME", Path.home() / ".local" / "share", "runs")


@dataclass
class Settings:
    """Persistent user defaults, overridden by command-line flags."""

    threads: int = 1
    log_level: str = "INFO"
    default_output_dir: str = ""

    # Internal - not saved
    _settings_path: Path | None = field(default=None, repr=False)

    def output_dir(self) -> Path:
        """Resolve the default output directory."""
        if self.default_output_dir:
            return Path(self.default_output_dir).expanduser()
        return get_runs_dir()

    def save(self) -> None:
        """Save settings to disk."""
        path = self._settings_path or get_config_dir() / SETTINGS_FILE
        data = {
            "threads": self.threads,
            "log_level": self.log_level,
            "default_output_dir": self.default_output_dir,
        }

        try:
            # Temp file, then rename over the target
            tmp_path = path.with_suffix(".tmp")
            with open(tmp_path, "w", encoding="utf-8") as f:
                json.dump(data, f, indent=2)
            os.replace(tmp_path, path)
            logger.debug("Settings saved to %s", path)
        except OSError as e:
            logger.error("Failed to save settings: %s", e)

    @classmethod
    def load(cls, path: Path | None = None) -> "Settings":
        """Load settings from disk.

        A missing or unreadable file yields the defaults.

        Args:
            path: Settings file. Defaults to the XDG config location.

        Returns:
            Settings instance with loaded or default values.
        """
        settings_path = path or get_config_dir() / SETTINGS_FILE
        settings = cls(_settings_path=settings_path)

        if settings_path.exists():
            try:
                with open(settings_path, encoding="utf-8") as f:
                    data = json.load(f)
                settings._apply(data)
                logger.debug("Settings loaded from %s", settings_path)
            except (OSError, json.JSONDecodeError, TypeError, ValueError) as e:
                logger.warning("Failed to load settings: %s", e)

        return settings

    def _apply(self, data: dict[str, Any]) -> None:
        """Take recognised keys from a decoded settings file."""
        if "threads" in data:
            self.threads = max(1, int(data["threads"]))
        if "log_level" in data:
            level = str(data["log_level"]).upper()
            if level in LOG_LEVELS:
                self.log_level = level
            else:
                logger.warning("Ignoring unknown log level %r", data["log_level"])
        if "default_output_dir" in data:
            self.default_output_dir = str(data["default_output_dir"])
