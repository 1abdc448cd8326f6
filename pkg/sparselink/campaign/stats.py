"""Ensemble statistics and the network capacity model."""

import math
from collections.abc import Iterable
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np


@dataclass(frozen=True, eq=False)
class EnsembleStats:
    """Median and empirical CDF of one quantity over a channel ensemble.

    Attributes:
        median: Midpoint of the two central values for even counts.
        ecdf: (value, fraction of values ≤ value) for each distinct value,
            ascending; the last fraction is exactly 1.
        minimum: Smallest value.
        maximum: Largest value.
        count: Number of values.
    """

    median: float
    ecdf: tuple[tuple[float, float], ...]
    minimum: float
    maximum: float
    count: int

    def fraction_at_most(self, value: float) -> float:
        """ECDF evaluated at `value`."""
        fraction = 0.0
        for point, cumulative in self.ecdf:
            if point > value:
                break
            fraction = cumulative
        return fraction


class Summary(NamedTuple):
    """Median, worst and best value of an ensemble."""

    median: float
    worst: float
    best: float


def _values(values: Iterable[float]) -> np.ndarray:
    array = np.asarray(list(values), dtype=float)
    if array.size == 0:
        raise ValueError("Statistics need at least one value")
    if np.any(np.isnan(array)):
        raise ValueError("Statistics input contains NaN")
    return array


def ecdf(values: Iterable[float]) -> EnsembleStats:
    """Empirical CDF and median of a non-empty set of values."""
    array = _values(values)
    points, counts = np.unique(array, return_counts=True)
    cumulative = np.cumsum(counts)
    fractions = cumulative / cumulative[-1]
    return EnsembleStats(
        median=float(np.median(array)),
        ecdf=tuple((float(p), float(f)) for p, f in zip(points, fractions)),
        minimum=float(points[0]),
        maximum=float(points[-1]),
        count=int(array.size),
    )


def summarize(values: Iterable[float], higher_is_better: bool = True) -> Summary:
    """(median, worst, best); for error rates pass higher_is_better=False."""
    array = _values(values)
    low, high = float(array.min()), float(array.max())
    median = float(np.median(array))
    if higher_is_better:
        return Summary(median, low, high)
    return Summary(median, high, low)


def network_capacity(bandwidth_hz: float, streams_per_km2: float, se_bits: float) -> float:
    """Area capacity C = B·M·SE in bit/s/km².

    Raises:
        ValueError: For non-positive bandwidth or stream density, or negative SE.
    """
    if not bandwidth_hz > 0 or not math.isfinite(bandwidth_hz):
        raise ValueError(f"Bandwidth must be positive, got {bandwidth_hz}")
    if not streams_per_km2 > 0 or not math.isfinite(streams_per_km2):
        raise ValueError(f"Stream density must be positive, got {streams_per_km2}")
    if not se_bits >= 0:
        raise ValueError(f"Spectral efficiency must be non-negative, got {se_bits}")
    return bandwidth_hz * streams_per_km2 * se_bits
