"""Channel impulse responses.

Symbol-spaced complex tap vectors are the common currency of every
analysis in sparselink. This module holds the value types and the
preprocessing chain applied to raw responses: coherent averaging of
repeated soundings, power normalization and sub-sample synchronization to
the main peak.
"""

import logging
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np
from numpy.typing import ArrayLike
from scipy.interpolate import CubicSpline
from scipy.signal import resample

logger = logging.getLogger(__name__)

# One tap of a 4 GHz symbol-rate system
DEFAULT_SAMPLE_PERIOD = 0.25e-9

DEFAULT_UPSAMPLE = 16

PDP_FLOOR_DB = -120.0

# Below this the fractional shift is a no-op
_SHIFT_EPSILON = 1e-12


@dataclass(frozen=True, eq=False)
class ChannelImpulseResponse:
    """Symbol-spaced channel impulse response.

    Attributes:
        taps: Complex tap amplitudes (read-only copy of the input).
        sample_period: Seconds per tap.
        peak_index: Index of the main power-delay-profile peak. A negative
            value on construction means "use the strongest tap".
        label: Free-text identifier carried into exported files.
    """

    taps: np.ndarray
    sample_period: float = DEFAULT_SAMPLE_PERIOD
    peak_index: int = -1
    label: str = ""

    def __post_init__(self) -> None:
        taps = np.array(self.taps, dtype=np.complex128).ravel()
        if taps.size == 0:
            raise ValueError("Channel impulse response needs at least one tap")
        if not np.all(np.isfinite(taps)):
            raise ValueError("Channel taps must be finite")
        if not np.any(taps != 0):
            raise ValueError("Channel impulse response must contain a nonzero tap")
        if not self.sample_period > 0:
            raise ValueError(f"Sample period must be positive, got {self.sample_period}")
        taps.setflags(write=False)
        object.__setattr__(self, "taps", taps)

        peak = int(self.peak_index)
        if peak < 0:
            peak = int(np.argmax(np.abs(taps) ** 2))
        elif peak >= taps.size:
            raise ValueError(f"Peak index {peak} outside {taps.size} taps")
        object.__setattr__(self, "peak_index", peak)

    @property
    def length(self) -> int:
        """Number of taps L."""
        return int(self.taps.size)

    @property
    def energy(self) -> float:
        """Total power Σ|h_l|²."""
        return float(np.sum(np.abs(self.taps) ** 2))

    @property
    def sample_rate_hz(self) -> float:
        """Tap rate in Hz."""
        return 1.0 / self.sample_period

    def delays_ns(self) -> np.ndarray:
        """Delay of every tap in nanoseconds."""
        return np.arange(self.length) * self.sample_period * 1e9

    def with_taps(self, taps: ArrayLike, peak_index: int = -1) -> "ChannelImpulseResponse":
        """Copy with new taps, keeping sample period and label."""
        return replace(self, taps=np.asarray(taps), peak_index=peak_index)


class PropagationPath(NamedTuple):
    """One resolvable propagation path."""

    delay: float
    """Seconds from the start of the tap grid."""
    power_db: float
    """Power relative to the strongest path."""
    phase: float = 0.0
    """Radians."""


@dataclass(frozen=True)
class PathSet:
    """Parametric multipath description used for synthesis.

    Exactly one path carries 0 dB (the line-of-sight reference) and every
    delay lies on the tap grid [0, num_taps·sample_period).
    """

    paths: tuple[PropagationPath, ...]
    sample_period: float = DEFAULT_SAMPLE_PERIOD
    num_taps: int = 64

    def __post_init__(self) -> None:
        paths = tuple(PropagationPath(*p) for p in self.paths)
        object.__setattr__(self, "paths", paths)

        if self.num_taps < 1:
            raise ValueError(f"num_taps must be at least 1, got {self.num_taps}")
        if not self.sample_period > 0:
            raise ValueError(f"Sample period must be positive, got {self.sample_period}")
        references = sum(1 for p in paths if p.power_db == 0.0)
        if references != 1:
            raise ValueError(
                f"Exactly one path must have power_db = 0 (reference path), found {references}"
            )
        span = self.num_taps * self.sample_period
        for i, p in enumerate(paths):
            if not 0.0 <= p.delay < span:
                raise ValueError(
                    f"Path {i} delay {p.delay:.4g} s outside the tap grid [0, {span:.4g}) s"
                )


@dataclass(frozen=True, eq=False)
class SnapshotSet:
    """Repeated soundings of one stationary channel."""

    snapshots: np.ndarray

    def __post_init__(self) -> None:
        try:
            snapshots = np.array(self.snapshots, dtype=np.complex128)
        except ValueError as e:
            raise ValueError("All snapshots must share one length") from e
        if snapshots.ndim == 1:
            snapshots = snapshots[np.newaxis, :]
        if snapshots.ndim != 2 or snapshots.shape[0] < 1 or snapshots.shape[1] < 1:
            raise ValueError("Snapshot set needs at least one non-empty snapshot")
        snapshots.setflags(write=False)
        object.__setattr__(self, "snapshots", snapshots)

    @property
    def count(self) -> int:
        """Number of snapshots."""
        return int(self.snapshots.shape[0])


def synthesize(spec: PathSet, label: str = "") -> ChannelImpulseResponse:
    """Sample a multipath description with an ideal band-limited pulse.

    taps[l] = Σ_p a_p·e^{j·phase_p}·sinc(l − delay_p/T), a_p = 10^{power_db_p/20}.
    The result is not normalized.

    Args:
        spec: The path description.
        label: Label for the resulting channel.

    Returns:
        The synthesized channel impulse response.
    """
    grid = np.arange(spec.num_taps, dtype=float)
    taps = np.zeros(spec.num_taps, dtype=np.complex128)
    for p in spec.paths:
        amplitude = 10.0 ** (p.power_db / 20.0)
        taps += amplitude * np.exp(1j * p.phase) * np.sinc(grid - p.delay / spec.sample_period)
    return ChannelImpulseResponse(taps, sample_period=spec.sample_period, label=label)


def coherent_average(snapshot_set: SnapshotSet) -> np.ndarray:
    """Average repeated soundings after removing their common phase errors.

    Snapshot 0 is the phase reference. Each snapshot is derotated by the
    argument of its inner product with the reference before averaging.

    Args:
        snapshot_set: The soundings.

    Returns:
        The averaged complex tap vector.
    """
    snapshots = snapshot_set.snapshots
    reference = snapshots[0]
    total = np.zeros(snapshots.shape[1], dtype=np.complex128)
    skipped = 0
    for i, snapshot in enumerate(snapshots):
        inner = np.vdot(reference, snapshot)
        if abs(inner) == 0.0:
            logger.warning("Snapshot %d is orthogonal to the reference; not derotated", i)
            skipped += 1
            total += snapshot
            continue
        total += snapshot * np.exp(-1j * np.angle(inner))
    if skipped:
        logger.warning("Coherent average skipped derotation for %d of %d snapshots",
                       skipped, snapshot_set.count)
    return total / snapshot_set.count


def normalize(cir: ChannelImpulseResponse) -> ChannelImpulseResponse:
    """Scale a channel to unit total power.

    Raises:
        ValueError: If every tap is zero.
    """
    energy = cir.energy
    if energy == 0.0:
        raise ValueError("Cannot normalize an all-zero channel")
    return cir.with_taps(cir.taps / np.sqrt(energy), peak_index=cir.peak_index)


def locate_peak(cir: ChannelImpulseResponse, upsample_factor: int = DEFAULT_UPSAMPLE) -> tuple[int, float]:
    """Estimate the sub-sample position of the main peak.

    The zero-padded response is upsampled in the discrete frequency domain
    and |h|² is fitted with a cubic spline around its maximum.

    The estimate is accurate when one path clearly dominates. With two
    peaks of nearly equal power the maximum can land on either of them,
    and strong paths within a few samples bias the offset.

    Args:
        cir: The channel.
        upsample_factor: Upsampling factor, at least 2.

    Returns:
        (index, offset) with the peak at index + offset samples and
        offset in [-0.5, 0.5].
    """
    if upsample_factor < 2:
        raise ValueError(f"upsample_factor must be at least 2, got {upsample_factor}")

    n_fft = _padded_length(cir.length)
    padded = np.zeros(n_fft, dtype=np.complex128)
    padded[: cir.length] = cir.taps

    fine = resample(padded, n_fft * upsample_factor)
    power = np.abs(fine) ** 2
    m = int(np.argmax(power))
    window = np.arange(-2, 3)
    spline = CubicSpline(window, power[(m + window) % power.size])

    candidates = [0.0]
    candidates.extend(float(r) for r in spline.derivative().roots(extrapolate=False) if -1.0 <= r <= 1.0)
    offset = max(candidates, key=lambda x: float(spline(x)))

    position = (m + offset) / upsample_factor
    if position > n_fft / 2:
        position -= n_fft
    index = int(np.floor(position + 0.5))
    return index, position - index


def fractional_shift(cir: ChannelImpulseResponse, shift: float) -> ChannelImpulseResponse:
    """Delay a channel by a (possibly fractional) number of samples.

    Applied as a linear phase ramp on the FFT of the zero-padded response,
    then truncated back to the original length.

    Args:
        cir: The channel.
        shift: Delay in samples; negative values advance the response.

    Returns:
        The shifted channel (peak index re-evaluated).
    """
    n_fft = _padded_length(cir.length)
    spectrum = np.fft.fft(cir.taps, n_fft)
    ramp = np.exp(-2j * np.pi * np.fft.fftfreq(n_fft) * shift)
    shifted = np.fft.ifft(spectrum * ramp)[: cir.length]
    return cir.with_taps(shifted)


def sync_to_peak(cir: ChannelImpulseResponse, upsample_factor: int = DEFAULT_UPSAMPLE) -> ChannelImpulseResponse:
    """Move the main peak onto the sampling grid.

    Assumes a dominant main peak; see locate_peak.

    Args:
        cir: The channel.
        upsample_factor: Upsampling factor for peak estimation, at least 2.

    Returns:
        The synchronized channel; peak_index is its strongest tap.
    """
    index, offset = locate_peak(cir, upsample_factor)
    logger.debug("Peak of %r at %d%+.4f samples", cir.label, index, offset)
    if abs(offset) < _SHIFT_EPSILON:
        return cir.with_taps(cir.taps)
    return fractional_shift(cir, -offset)


def pdp(cir: ChannelImpulseResponse) -> np.ndarray:
    """Power delay profile in dB per tap, floored at PDP_FLOOR_DB."""
    power = np.abs(cir.taps) ** 2
    floor = 10.0 ** (PDP_FLOOR_DB / 10.0)
    return 10.0 * np.log10(np.maximum(power, floor))


def preprocess(
    snapshot_set: SnapshotSet,
    sample_period: float = DEFAULT_SAMPLE_PERIOD,
    label: str = "",
    upsample_factor: int = DEFAULT_UPSAMPLE,
) -> ChannelImpulseResponse:
    """Run the full chain: coherent average, normalize, synchronize, normalize."""
    averaged = ChannelImpulseResponse(coherent_average(snapshot_set), sample_period, label=label)
    return normalize(sync_to_peak(normalize(averaged), upsample_factor))


def _padded_length(length: int) -> int:
    """FFT length of at least four times the channel length (power of two)."""
    return 1 << int(np.ceil(np.log2(4 * length)))
