"""Synthetic channel ensembles.

Three families mimic the representative measured channels of an indoor
D-band campaign: "red" (LoS with negligible multipath), "green" (a strong
component about two taps after the LoS) and "blue" (components near two
and thirty taps). "mixed" cycles through the three.
"""

import logging
from dataclasses import asdict, dataclass, fields
from typing import Any

import numpy as np

from sparselink.channel.cir import (
    DEFAULT_SAMPLE_PERIOD,
    DEFAULT_UPSAMPLE,
    ChannelImpulseResponse,
    PathSet,
    PropagationPath,
    normalize,
    sync_to_peak,
    synthesize,
)
from sparselink.utils.rng import stream

logger = logging.getLogger(__name__)

PRESET_NAMES = ("red", "green", "blue", "mixed")

_MIXED_CYCLE = ("red", "green", "blue")


@dataclass(frozen=True)
class PresetRanges:
    """Generator parameters. Delays are in taps relative to the LoS path."""

    num_taps: int = 64
    sample_period: float = DEFAULT_SAMPLE_PERIOD
    los_delay: float = 8.0
    los_jitter: float = 0.5
    background_count: tuple[int, int] = (3, 6)
    background_delay: tuple[float, float] = (1.0, 40.0)
    background_power_db: tuple[float, float] = (-45.0, -30.0)
    green_delay: tuple[float, float] = (1.5, 2.5)
    green_power_db: tuple[float, float] = (-15.0, -3.0)
    blue_near_delay: tuple[float, float] = (1.5, 2.5)
    blue_near_power_db: tuple[float, float] = (-30.0, -3.0)
    blue_far_delay: tuple[float, float] = (29.5, 30.5)
    blue_far_power_db: tuple[float, float] = (-30.0, -10.0)
    upsample_factor: int = DEFAULT_UPSAMPLE

    def __post_init__(self) -> None:
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, list):
                value = tuple(value)
                object.__setattr__(self, f.name, value)
            if isinstance(value, tuple) and (len(value) != 2 or value[0] > value[1]):
                raise ValueError(f"Preset range {f.name} must be an ordered pair, got {value}")
        for name in ("background_power_db", "green_power_db", "blue_near_power_db",
                     "blue_far_power_db"):
            if getattr(self, name)[1] > 0.0:
                raise ValueError(f"{name} must not exceed 0 dB")
        if self.los_delay - self.los_jitter < 0:
            raise ValueError("LoS delay must stay on the tap grid")
        latest = self.los_delay + self.los_jitter + max(
            self.background_delay[1], self.green_delay[1], self.blue_near_delay[1],
            self.blue_far_delay[1],
        )
        if latest >= self.num_taps:
            raise ValueError(f"Preset delays reach tap {latest:g}, beyond num_taps={self.num_taps}")

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "PresetRanges":
        """Build from a mapping, rejecting unknown keys."""
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ValueError(f"Unknown preset range keys: {', '.join(unknown)}")
        return cls(**data)

    def to_dict(self) -> dict[str, Any]:
        """Plain mapping (tuples become lists) for manifests."""
        return {k: list(v) if isinstance(v, tuple) else v for k, v in asdict(self).items()}


def preset_paths(name: str, rng: np.random.Generator, ranges: PresetRanges) -> PathSet:
    """Draw one multipath description from a preset family.

    Args:
        name: "red", "green" or "blue".
        rng: Random source.
        ranges: Generator parameters.

    Returns:
        The drawn path set.
    """
    ts = ranges.sample_period
    los = ranges.los_delay + rng.uniform(-ranges.los_jitter, ranges.los_jitter)

    def path(offset: float, power_db: float) -> PropagationPath:
        return PropagationPath((los + offset) * ts, power_db, rng.uniform(0.0, 2.0 * np.pi))

    paths = [PropagationPath(los * ts, 0.0, rng.uniform(0.0, 2.0 * np.pi))]
    if name == "green":
        paths.append(path(rng.uniform(*ranges.green_delay), rng.uniform(*ranges.green_power_db)))
    elif name == "blue":
        paths.append(path(rng.uniform(*ranges.blue_near_delay),
                          rng.uniform(*ranges.blue_near_power_db)))
        paths.append(path(rng.uniform(*ranges.blue_far_delay),
                          rng.uniform(*ranges.blue_far_power_db)))
    elif name != "red":
        raise ValueError(f"Unknown preset {name!r}; expected one of {', '.join(PRESET_NAMES)}")

    low, high = ranges.background_count
    for _ in range(int(rng.integers(low, high + 1))):
        paths.append(path(rng.uniform(*ranges.background_delay),
                          rng.uniform(*ranges.background_power_db)))
    return PathSet(tuple(paths), sample_period=ts, num_taps=ranges.num_taps)


def preset_ensemble(
    name: str,
    count: int,
    seed: int,
    ranges: PresetRanges | None = None,
) -> list[ChannelImpulseResponse]:
    """Draw a reproducible ensemble of synthetic channels.

    Each channel is synthesized, normalized, synchronized to its main peak
    and normalized again. Channel i uses its own keyed random stream, so
    ensembles with the same seed share their leading members.

    Args:
        name: "red", "green", "blue" or "mixed".
        count: Number of channels, at least 1.
        seed: Random seed.
        ranges: Generator parameters, defaults when None.

    Returns:
        The channels, labelled "<family>-<index>".
    """
    if name not in PRESET_NAMES:
        raise ValueError(f"Unknown preset {name!r}; expected one of {', '.join(PRESET_NAMES)}")
    if count < 1:
        raise ValueError(f"Ensemble count must be at least 1, got {count}")
    ranges = ranges or PresetRanges()

    channels = []
    for i in range(count):
        family = _MIXED_CYCLE[i % len(_MIXED_CYCLE)] if name == "mixed" else name
        spec = preset_paths(family, stream(seed, PRESET_NAMES.index(name), i), ranges)
        cir = synthesize(spec, label=f"{family}-{i:03d}")
        channels.append(normalize(sync_to_peak(normalize(cir), ranges.upsample_factor)))

    logger.info("Built %s ensemble of %d channels (seed %d)", name, count, seed)
    return channels
