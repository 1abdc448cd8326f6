"""Campaign configuration.

A campaign is described by a versioned JSON document. Unknown keys, bad
values, missing channel files and unwritable output directories are all
reported as ConfigError before any computation starts.
"""

import hashlib
import json
import logging
import os
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

from sparselink.channel.presets import PRESET_NAMES, PresetRanges
from sparselink.core.linksim import LinkConfig
from sparselink.core.multicarrier import PREFIX_KINDS

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1

ANALYSES = ("se-sc", "se-mc", "ber", "stats")
Q_POLICIES = ("none", "optimize")

_TOP_LEVEL_KEYS = {
    "format_version",
    "ensemble",
    "snr_db_list",
    "n_list",
    "k_list",
    "q_policy",
    "analyses",
    "link",
    "output_dir",
    "preset_ranges",
    "mc",
    "dump_subcarriers",
}


class ConfigError(ValueError):
    """Invalid campaign configuration."""


@dataclass(frozen=True)
class EnsembleSpec:
    """Where the channels come from: a preset family or a list of CIR files."""

    preset: str = "mixed"
    count: int = 46
    seed: int = 0
    files: tuple[str, ...] = ()

    @property
    def from_files(self) -> bool:
        """True when channels are loaded rather than synthesized."""
        return bool(self.files)

    def to_dict(self) -> dict[str, Any]:
        if self.from_files:
            return {"files": list(self.files)}
        return {"preset": self.preset, "count": self.count, "seed": self.seed}


@dataclass(frozen=True)
class CampaignConfig:
    """A validated campaign description."""

    ensemble: EnsembleSpec = field(default_factory=EnsembleSpec)
    snr_db_list: tuple[float, ...] = (6.0,)
    n_list: tuple[int, ...] = (1, 2, 3, 4, 5, 6, 7, 8)
    k_list: tuple[int, ...] = (1, 2, 4, 8, 16, 32, 64)
    q_policy: str = "none"
    analyses: tuple[str, ...] = ("se-sc",)
    link: LinkConfig = field(default_factory=LinkConfig)
    output_dir: str = ""
    preset_ranges: PresetRanges = field(default_factory=PresetRanges)
    mc_q_range: tuple[int, ...] | None = None
    mc_s_range: tuple[int, ...] | None = None
    prefix_kind: str = "cyclic"
    dump_subcarriers: bool = False

    def __post_init__(self) -> None:
        if not self.analyses:
            raise ConfigError("At least one analysis must be requested")
        unknown = sorted(set(self.analyses) - set(ANALYSES))
        if unknown:
            raise ConfigError(f"Unknown analyses: {', '.join(unknown)}")
        if self.q_policy not in Q_POLICIES:
            raise ConfigError(f"q_policy must be one of {', '.join(Q_POLICIES)}, got {self.q_policy!r}")
        if self.prefix_kind not in PREFIX_KINDS:
            raise ConfigError(f"Unknown prefix kind {self.prefix_kind!r}")
        if not self.snr_db_list:
            raise ConfigError("snr_db_list must not be empty")
        if "ber" in self.analyses and not self.link.snr_points:
            raise ConfigError("The ber analysis needs a non-empty link.snr_db_list")
        if not self.n_list or list(self.n_list) != sorted(set(self.n_list)) or self.n_list[0] < 1:
            raise ConfigError("n_list must be strictly ascending positive integers")
        for k in self.k_list:
            if k < 1 or k & (k - 1):
                raise ConfigError(f"k_list entries must be powers of two, got {k}")
        if not self.k_list:
            raise ConfigError("k_list must not be empty")
        ens = self.ensemble
        if not ens.from_files:
            if ens.preset not in PRESET_NAMES:
                raise ConfigError(f"Unknown preset {ens.preset!r}")
            if ens.count < 1:
                raise ConfigError("Ensemble count must be at least 1")
            if ens.seed < 0:
                raise ConfigError("Ensemble seed must be non-negative")

    @classmethod
    def from_dict(cls, data: dict[str, Any], base_dir: Path | None = None) -> "CampaignConfig":
        """Parse a config document.

        Args:
            data: The decoded JSON object.
            base_dir: Directory that relative file paths are resolved against.

        Raises:
            ConfigError: On any schema violation.
        """
        if not isinstance(data, dict):
            raise ConfigError("Config must be a JSON object")
        unknown = sorted(set(data) - _TOP_LEVEL_KEYS)
        if unknown:
            raise ConfigError(f"Unknown config keys: {', '.join(unknown)}")
        if data.get("format_version") != FORMAT_VERSION:
            raise ConfigError(f"format_version must be {FORMAT_VERSION}, got {data.get('format_version')!r}")

        kwargs: dict[str, Any] = {}
        try:
            if "ensemble" in data:
                kwargs["ensemble"] = _parse_ensemble(data["ensemble"], base_dir)
            if "snr_db_list" in data:
                kwargs["snr_db_list"] = tuple(float(v) for v in _list(data["snr_db_list"], "snr_db_list"))
            for key in ("n_list", "k_list"):
                if key in data:
                    kwargs[key] = tuple(_int(v, key) for v in _list(data[key], key))
            if "analyses" in data:
                kwargs["analyses"] = tuple(str(v) for v in _list(data["analyses"], "analyses"))
            if "q_policy" in data:
                kwargs["q_policy"] = str(data["q_policy"])
            if "output_dir" in data:
                output = str(data["output_dir"])
                if output and base_dir is not None and not Path(output).is_absolute():
                    output = str(base_dir / output)
                kwargs["output_dir"] = output
            if "dump_subcarriers" in data:
                if not isinstance(data["dump_subcarriers"], bool):
                    raise ConfigError("dump_subcarriers must be true or false")
                kwargs["dump_subcarriers"] = data["dump_subcarriers"]
            if "link" in data:
                kwargs["link"] = LinkConfig.from_dict(_dict(data["link"], "link"))
            if "preset_ranges" in data:
                kwargs["preset_ranges"] = PresetRanges.from_dict(_dict(data["preset_ranges"], "preset_ranges"))
            if "mc" in data:
                kwargs.update(_parse_mc(_dict(data["mc"], "mc")))
        except ConfigError:
            raise
        except (TypeError, ValueError) as e:
            raise ConfigError(str(e)) from e

        return cls(**kwargs)

    def to_dict(self) -> dict[str, Any]:
        """The config as a document; from_dict(to_dict()) is the identity."""
        mc: dict[str, Any] = {"prefix_kind": self.prefix_kind}
        if self.mc_q_range is not None:
            mc["q_range"] = list(self.mc_q_range)
        if self.mc_s_range is not None:
            mc["s_range"] = list(self.mc_s_range)
        return {
            "format_version": FORMAT_VERSION,
            "ensemble": self.ensemble.to_dict(),
            "snr_db_list": list(self.snr_db_list),
            "n_list": list(self.n_list),
            "k_list": list(self.k_list),
            "q_policy": self.q_policy,
            "analyses": list(self.analyses),
            "link": self.link.to_dict(),
            "output_dir": self.output_dir,
            "preset_ranges": self.preset_ranges.to_dict(),
            "mc": mc,
            "dump_subcarriers": self.dump_subcarriers,
        }

    def digest(self) -> str:
        """SHA-256 of the canonical JSON form, excluding the output directory."""
        document = self.to_dict()
        document.pop("output_dir")
        canonical = json.dumps(document, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    def with_overrides(
        self, output_dir: str | None = None, seed: int | None = None
    ) -> "CampaignConfig":
        """Apply command-line overrides; a seed replaces both ensemble and link seeds."""
        config = self
        if output_dir is not None:
            config = replace(config, output_dir=output_dir)
        if seed is not None:
            if seed < 0:
                raise ConfigError(f"Seed must be non-negative, got {seed}")
            config = replace(
                config,
                ensemble=replace(config.ensemble, seed=seed),
                link=replace(config.link, seed=seed),
            )
        return config

    def validate(self, output_dir: Path) -> None:
        """Check that channel files exist and the output directory is writable.

        Creates the output directory if needed.

        Raises:
            ConfigError: On the first problem found.
        """
        for name in self.ensemble.files:
            if not Path(name).is_file():
                raise ConfigError(f"Channel file not found: {name}")
        try:
            output_dir.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            raise ConfigError(f"Cannot create output directory {output_dir}: {e}") from e
        if not os.access(output_dir, os.W_OK):
            raise ConfigError(f"Output directory is not writable: {output_dir}")


def load_config(path: Path | str) -> CampaignConfig:
    """Read a campaign config file; relative paths resolve against its directory."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"Config file not found: {path}")
    try:
        with open(path, encoding="utf-8") as f:
            data = json.load(f)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: line {e.lineno}, column {e.colno}: {e.msg}") from e
    config = CampaignConfig.from_dict(data, base_dir=path.parent)
    logger.info("Loaded campaign config from %s", path)
    return config


def _parse_ensemble(value: Any, base_dir: Path | None) -> EnsembleSpec:
    data = _dict(value, "ensemble")
    if "files" in data:
        extra = sorted(set(data) - {"files"})
        if extra:
            raise ConfigError(f"ensemble.files cannot be combined with: {', '.join(extra)}")
        files = []
        for name in _list(data["files"], "ensemble.files"):
            p = Path(str(name))
            if base_dir is not None and not p.is_absolute():
                p = base_dir / p
            files.append(str(p))
        if not files:
            raise ConfigError("ensemble.files must not be empty")
        return EnsembleSpec(files=tuple(files))

    unknown = sorted(set(data) - {"preset", "count", "seed"})
    if unknown:
        raise ConfigError(f"Unknown ensemble keys: {', '.join(unknown)}")
    defaults = EnsembleSpec()
    return EnsembleSpec(
        preset=str(data.get("preset", defaults.preset)),
        count=_int(data.get("count", defaults.count), "ensemble.count"),
        seed=_int(data.get("seed", defaults.seed), "ensemble.seed"),
    )


def _parse_mc(data: dict[str, Any]) -> dict[str, Any]:
    unknown = sorted(set(data) - {"q_range", "s_range", "prefix_kind"})
    if unknown:
        raise ConfigError(f"Unknown mc keys: {', '.join(unknown)}")
    parsed: dict[str, Any] = {}
    if "q_range" in data:
        parsed["mc_q_range"] = tuple(_int(v, "mc.q_range") for v in _list(data["q_range"], "mc.q_range"))
    if "s_range" in data:
        parsed["mc_s_range"] = tuple(_int(v, "mc.s_range") for v in _list(data["s_range"], "mc.s_range"))
    if "prefix_kind" in data:
        parsed["prefix_kind"] = str(data["prefix_kind"])
    return parsed


def _list(value: Any, name: str) -> list[Any]:
    if not isinstance(value, list):
        raise ConfigError(f"'{name}' must be a list")
    return value


def _dict(value: Any, name: str) -> dict[str, Any]:
    if not isinstance(value, dict):
        raise ConfigError(f"'{name}' must be an object")
    return value


def _int(value: Any, name: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"'{name}' must be an integer, got {value!r}")
    return value
