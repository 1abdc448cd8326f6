"""Single-carrier spectral efficiency with inter-symbol interference as noise.

An achievable rate for a symbol-spaced channel h is log2(1 + SINR) with
the decision cursor as signal and every other tap as Gaussian
interference. A linear N-tap equalizer g replaces h by c = h * g and adds
noise of power ‖g‖²/SNR; the SINR-optimal g is the LMMSE filter.
"""

import logging
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike
from scipy.linalg import LinAlgError, cho_factor, cho_solve, toeplitz

from sparselink.channel.cir import ChannelImpulseResponse

logger = logging.getLogger(__name__)

# Delay window around the peak: l0 + PRECURSOR_MARGIN .. l0 + N
PRECURSOR_MARGIN = 2


@dataclass(frozen=True)
class SnrPoint:
    """Receive SNR: unit symbol energy over complex noise variance."""

    snr_db: float

    def __post_init__(self) -> None:
        if math.isnan(self.snr_db) or self.snr_db == -math.inf:
            raise ValueError(f"SNR must be a number above -inf dB, got {self.snr_db}")
        object.__setattr__(self, "snr_db", float(self.snr_db))

    @classmethod
    def from_linear(cls, snr_linear: float) -> "SnrPoint":
        """Build from a linear ratio."""
        if not snr_linear > 0:
            raise ValueError(f"Linear SNR must be positive, got {snr_linear}")
        return cls(10.0 * math.log10(snr_linear))

    @property
    def snr_linear(self) -> float:
        """10^(snr_db/10); inf for a noiseless link."""
        if math.isinf(self.snr_db):
            return math.inf
        return 10.0 ** (self.snr_db / 10.0)

    @property
    def noise_var(self) -> float:
        """Complex noise variance 1/snr_linear (0 when noiseless)."""
        return 1.0 / self.snr_linear

    @property
    def is_finite(self) -> bool:
        """False for the noiseless point."""
        return not math.isinf(self.snr_db)


@dataclass(frozen=True, eq=False)
class EqualizerDesign:
    """Result of an LMMSE design.

    Attributes:
        taps: Equalizer coefficients g (length N), scaled so that the
            effective channel has unit gain at the decision delay.
        decision_delay: Index d of the cursor in the effective channel h * g.
        sinr: Achieved signal to interference-plus-noise ratio.
        se_bits: log2(1 + sinr).
    """

    taps: np.ndarray
    decision_delay: int
    sinr: float
    se_bits: float

    @property
    def n_taps(self) -> int:
        """Equalizer length N."""
        return int(self.taps.size)

    @property
    def sinr_db(self) -> float:
        """SINR in dB."""
        return 10.0 * math.log10(self.sinr) if self.sinr > 0 else -math.inf


def se_from_sinr(sinr: float) -> float:
    """Spectral efficiency log2(1 + SINR) in bit/s/Hz."""
    return math.log2(1.0 + sinr) if math.isfinite(sinr) else math.inf


def se_no_eq(cir: ChannelImpulseResponse | ArrayLike, snr: SnrPoint, l0: int | None = None) -> float:
    """Spectral efficiency without equalization.

    log2(1 + |h_l0|² / (Σ_{l≠l0}|h_l|² + 1/SNR)).

    Args:
        cir: The channel (normalized).
        snr: Receive SNR.
        l0: Decision tap; defaults to the channel's peak index.

    Returns:
        Spectral efficiency in bit/s/Hz.
    """
    h = as_taps(cir)
    if l0 is None:
        l0 = cir.peak_index if isinstance(cir, ChannelImpulseResponse) else int(np.argmax(np.abs(h)))
    if not 0 <= l0 < h.size:
        raise ValueError(f"Decision tap {l0} outside {h.size} taps")
    power = np.abs(h) ** 2
    signal = float(power[l0])
    interference = float(np.sum(power) - signal)
    return se_from_sinr(_ratio(signal, interference + snr.noise_var))


def matched_filter_bound(cir: ChannelImpulseResponse | ArrayLike, snr: SnrPoint) -> float:
    """AWGN capacity at the channel's total received SNR, log2(1 + SNR·Σ|h_l|²)."""
    energy = float(np.sum(np.abs(as_taps(cir)) ** 2))
    return se_from_sinr(snr.snr_linear * energy)


def convolution_rows(cir: ChannelImpulseResponse | ArrayLike, n_taps: int) -> np.ndarray:
    """Linear convolution operator of the channel as an (L+N−1)×N matrix.

    Entry (l, n) is h_{l−n}, so the effective channel of equalizer g is C @ g.
    """
    if n_taps < 1:
        raise ValueError(f"n_taps must be at least 1, got {n_taps}")
    h = as_taps(cir)
    column = np.concatenate([h, np.zeros(n_taps - 1, dtype=np.complex128)])
    row = np.zeros(n_taps, dtype=np.complex128)
    row[0] = h[0]
    return toeplitz(column, row)


def default_delay_search(length: int, n_taps: int, l0: int) -> range:
    """Decision delays l0−2 .. l0+N, clipped to [0, L+N−2].

    Windows for increasing N are nested, which keeps SE monotone in N.
    """
    low = max(0, l0 - PRECURSOR_MARGIN)
    high = min(length + n_taps - 2, l0 + n_taps)
    return range(low, high + 1)


def postcursor_delay(l0: int, n_taps: int, n_postcursors: int) -> int:
    """Decision delay that leaves exactly n_postcursors taps after the main tap.

    The main equalizer tap (index d − l0) meets the channel peak; taps with
    a larger index act on post-cursor samples.
    """
    if not 0 <= n_postcursors < n_taps:
        raise ValueError(f"n_postcursors must be in [0, {n_taps - 1}], got {n_postcursors}")
    return l0 + n_taps - 1 - n_postcursors


def design_lmmse(
    cir: ChannelImpulseResponse | ArrayLike,
    snr: SnrPoint,
    n_taps: int,
    delay_search: Iterable[int] | None = None,
) -> EqualizerDesign:
    """SINR-optimal N-tap linear equalizer with decision-delay search.

    For each delay d with r_d = row d of C and
    B_d = CᴴC − r_dᴴr_d + I/SNR, the optimum is g ∝ B_d⁻¹r_dᴴ with
    SINR(d) = r_d B_d⁻¹ r_dᴴ. The best delay wins; ties go to the
    smallest delay.

    Args:
        cir: The channel.
        snr: Receive SNR.
        n_taps: Equalizer length N.
        delay_search: Candidate decision delays in [0, L+N−2]; defaults to
            default_delay_search around the peak.

    Returns:
        The best design.

    Raises:
        ValueError: On an empty or out-of-range delay search, or when a
            noiseless design is rank deficient.
    """
    h = as_taps(cir)
    c_mat = convolution_rows(h, n_taps)
    if delay_search is None:
        delay_search = default_delay_search(h.size, n_taps, peak_of(cir))
    delays = sorted(set(int(d) for d in delay_search))
    if not delays:
        raise ValueError("Delay search must not be empty")
    if delays[0] < 0 or delays[-1] > c_mat.shape[0] - 1:
        raise ValueError(f"Decision delays must lie in [0, {c_mat.shape[0] - 1}], got {delays}")

    gram = c_mat.conj().T @ c_mat + snr.noise_var * np.eye(n_taps)
    best: tuple[float, int, np.ndarray] | None = None
    for d in delays:
        r = c_mat[d]
        b_mat = gram - np.outer(r.conj(), r)
        try:
            factor = cho_factor(b_mat, lower=True)
        except LinAlgError as e:
            raise ValueError(
                f"Interference-plus-noise matrix is singular at delay {d} "
                f"(N={n_taps}, SNR={snr.snr_db} dB)"
            ) from e
        direction = cho_solve(factor, r.conj())
        sinr = float(np.real(r @ direction))
        if best is None or sinr > best[0]:
            best = (sinr, d, direction)

    sinr, d, direction = best
    # Unit gain at the cursor: r_d·g = 1
    gain = c_mat[d] @ direction
    taps = direction / gain if gain != 0 else direction
    logger.debug("LMMSE N=%d: delay %d, SINR %.4f", n_taps, d, sinr)
    return EqualizerDesign(taps=taps, decision_delay=d, sinr=sinr, se_bits=se_from_sinr(sinr))


def equalized_sinr(
    taps: ArrayLike, decision_delay: int, cir: ChannelImpulseResponse | ArrayLike, snr: SnrPoint
) -> tuple[float, np.ndarray]:
    """SINR of an arbitrary equalizer evaluated through c = h * g.

    Returns:
        (sinr, c) with c the effective channel.
    """
    g = np.asarray(taps, dtype=np.complex128)
    c = np.convolve(as_taps(cir), g)
    if not 0 <= decision_delay < c.size:
        raise ValueError(f"Decision delay {decision_delay} outside {c.size} effective taps")
    power = np.abs(c) ** 2
    signal = float(power[decision_delay])
    interference = float(np.sum(power) - signal)
    noise = float(np.sum(np.abs(g) ** 2)) * snr.noise_var
    return _ratio(signal, interference + noise), c


def se_with_eq(design: EqualizerDesign, cir: ChannelImpulseResponse | ArrayLike, snr: SnrPoint) -> float:
    """Spectral efficiency of the equalized channel from its explicit c-vector."""
    sinr, _ = equalized_sinr(design.taps, design.decision_delay, cir, snr)
    return se_from_sinr(sinr)


def design_sweep(
    cir: ChannelImpulseResponse | ArrayLike, snr: SnrPoint, n_list: Sequence[int]
) -> list[EqualizerDesign]:
    """LMMSE designs for each equalizer length with nested default windows."""
    if list(n_list) != sorted(n_list):
        raise ValueError("n_list must be sorted ascending")
    return [design_lmmse(cir, snr, n) for n in n_list]


def sweep_n(
    cir: ChannelImpulseResponse | ArrayLike, snr: SnrPoint, n_list: Sequence[int]
) -> list[tuple[int, float]]:
    """Spectral efficiency versus equalizer length; N=1 means no equalization."""
    return [(d.n_taps, d.se_bits) for d in design_sweep(cir, snr, n_list)]


def sweep_snr_sc(
    cir: ChannelImpulseResponse | ArrayLike, snr_list: Sequence[SnrPoint], n_taps: int
) -> list[tuple[float, float]]:
    """Spectral efficiency versus SNR for a fixed equalizer length."""
    return [(snr.snr_db, design_lmmse(cir, snr, n_taps).se_bits) for snr in snr_list]


def as_taps(cir: ChannelImpulseResponse | ArrayLike) -> np.ndarray:
    """Tap vector of a channel or array."""
    if isinstance(cir, ChannelImpulseResponse):
        return cir.taps
    h = np.asarray(cir, dtype=np.complex128).ravel()
    if h.size == 0:
        raise ValueError("Channel needs at least one tap")
    return h


def peak_of(cir: ChannelImpulseResponse | ArrayLike) -> int:
    """Main peak index of a channel or array."""
    if isinstance(cir, ChannelImpulseResponse):
        return cir.peak_index
    return int(np.argmax(np.abs(as_taps(cir))))


def _ratio(signal: float, denominator: float) -> float:
    """signal/denominator with x/0 = inf for x > 0."""
    if denominator <= 0.0:
        return math.inf if signal > 0 else 0.0
    return signal / denominator
