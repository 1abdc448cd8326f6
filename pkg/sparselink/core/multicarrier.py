"""Multi-carrier spectral efficiency with short or absent prefixes.

Each block carries K unit-power symbols through a unitary inverse DFT and
is preceded by a guard of Q samples (a cyclic copy of its tail, or zeros).
When Q is shorter than the channel memory the received subcarriers see
inter-carrier interference (ICI) from the same block and inter-block
interference (IBI) from its neighbours. All three terms are computed
exactly from the stream model; no Monte Carlo is involved.
"""

import logging
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from numpy.typing import ArrayLike

from sparselink.channel.cir import ChannelImpulseResponse
from sparselink.core.singlecarrier import SnrPoint, as_taps, design_lmmse, peak_of

logger = logging.getLogger(__name__)

PREFIX_KINDS = ("cyclic", "zero")

DEFAULT_Q_CHOICES = (0, 1, 2, 4, 8)

# Window offsets searched around the channel peak
DEFAULT_S_SPAN = 4


@dataclass(frozen=True)
class McConfig:
    """One multi-carrier configuration.

    Attributes:
        k_subcarriers: Block size K, a power of two.
        prefix_len: Guard length Q < K.
        window_offset: Receive-window start relative to the end of the
            current block's guard, in samples; may be negative.
        prefix_kind: "cyclic" or "zero".
    """

    k_subcarriers: int
    prefix_len: int = 0
    window_offset: int = 0
    prefix_kind: str = "cyclic"

    def __post_init__(self) -> None:
        k = self.k_subcarriers
        if k < 1 or k & (k - 1):
            raise ValueError(f"K must be a power of two, got {k}")
        if not 0 <= self.prefix_len < k:
            raise ValueError(f"Prefix length must be in [0, {k - 1}], got {self.prefix_len}")
        if self.prefix_kind not in PREFIX_KINDS:
            raise ValueError(f"Unknown prefix kind {self.prefix_kind!r}")

    @property
    def block_len(self) -> int:
        """Transmitted samples per block, K + Q."""
        return self.k_subcarriers + self.prefix_len

    @property
    def prelog(self) -> float:
        """Rate loss K/(K+Q) from the guard."""
        return self.k_subcarriers / self.block_len


class BlockMatrices(NamedTuple):
    """Linear maps from transmitted symbol blocks to received subcarriers.

    v_prev[j] maps block −(j+1) and v_next[j] maps block +(j+1); each stack
    has at least one (possibly zero) K×K matrix.
    """

    w: np.ndarray
    v_prev: np.ndarray
    v_next: np.ndarray


@dataclass(frozen=True, eq=False)
class SubcarrierAnalysis:
    """Per-subcarrier powers for unit-power independent symbols."""

    signal_power: np.ndarray
    ici_power: np.ndarray
    ibi_power: np.ndarray
    prelog: float
    noise_power: float

    @property
    def k_subcarriers(self) -> int:
        """Number of subcarriers K."""
        return int(self.signal_power.size)

    @property
    def sinr(self) -> np.ndarray:
        """Per-subcarrier SINR."""
        denominator = self.ici_power + self.ibi_power + self.noise_power
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = self.signal_power / denominator
        return np.where(denominator > 0, ratio, np.where(self.signal_power > 0, np.inf, 0.0))

    def se_bits(self) -> float:
        """(1/(K+Q))·Σ_k log2(1 + SINR_k)."""
        sinr = self.sinr
        if np.any(np.isinf(sinr)):
            return math.inf
        return float(self.prelog * np.mean(np.log2(1.0 + sinr)))


def dft_matrix(k: int) -> np.ndarray:
    """Unitary K-point DFT matrix."""
    return np.fft.fft(np.eye(k), norm="ortho")


def transmit_matrix(cfg: McConfig) -> np.ndarray:
    """(K+Q)×K map from data symbols to one transmitted block with its guard."""
    k, q = cfg.k_subcarriers, cfg.prefix_len
    body = dft_matrix(k).conj().T
    if cfg.prefix_kind == "cyclic":
        guard = body[k - q :]
    else:
        guard = np.zeros((q, k), dtype=np.complex128)
    return np.vstack([guard, body])


def block_matrices(cir: ChannelImpulseResponse | ArrayLike, cfg: McConfig) -> BlockMatrices:
    """Exact current/previous/next block maps of the infinite block stream.

    Block b occupies transmit samples b(K+Q) .. b(K+Q)+K+Q−1. The receiver
    takes samples Q+s .. Q+s+K−1 of the current block and applies the
    unitary DFT. Every block that reaches the window through some channel
    tap gets its own matrix, however long the channel is.

    Args:
        cir: The channel.
        cfg: The configuration.

    Returns:
        The block matrices.
    """
    h = as_taps(cir)
    k, period = cfg.k_subcarriers, cfg.block_len
    tx = transmit_matrix(cfg)

    rows = np.arange(k)
    maps: dict[int, np.ndarray] = {}
    for lag, tap in enumerate(h):
        if tap == 0:
            continue
        t = cfg.prefix_len + cfg.window_offset + rows - lag
        blocks = np.floor_divide(t, period)
        positions = t - blocks * period
        for b in np.unique(blocks):
            sel = blocks == b
            m = maps.setdefault(int(b), np.zeros((k, k), dtype=np.complex128))
            m[rows[sel]] += tap * tx[positions[sel]]

    f = dft_matrix(k)
    zero = np.zeros((k, k), dtype=np.complex128)
    w = f @ maps.get(0, zero)
    earliest = min(min(maps), -1)
    latest = max(max(maps), 1)
    v_prev = np.stack([f @ maps.get(b, zero) for b in range(-1, earliest - 1, -1)])
    v_next = np.stack([f @ maps.get(b, zero) for b in range(1, latest + 1)])
    return BlockMatrices(w, v_prev, v_next)


def analyze(cir: ChannelImpulseResponse | ArrayLike, snr: SnrPoint, cfg: McConfig) -> SubcarrierAnalysis:
    """Signal, ICI and IBI power on every subcarrier.

    Args:
        cir: The channel.
        snr: Receive SNR; the unitary DFT keeps the noise variance 1/SNR.
        cfg: The configuration.

    Returns:
        The per-subcarrier analysis.
    """
    w, v_prev, v_next = block_matrices(cir, cfg)
    w_power = np.abs(w) ** 2
    signal = np.diag(w_power).copy()
    ici = w_power.sum(axis=1) - signal
    ibi = (np.abs(v_prev) ** 2).sum(axis=(0, 2)) + (np.abs(v_next) ** 2).sum(axis=(0, 2))
    return SubcarrierAnalysis(
        signal_power=signal,
        ici_power=np.maximum(ici, 0.0),
        ibi_power=ibi,
        prelog=cfg.prelog,
        noise_power=snr.noise_var,
    )


def se_mc(cir: ChannelImpulseResponse | ArrayLike, snr: SnrPoint, cfg: McConfig) -> float:
    """Achievable spectral efficiency with ICI and IBI treated as noise."""
    return analyze(cir, snr, cfg).se_bits()


def default_q_range(k: int) -> list[int]:
    """Prefix lengths {0, 1, 2, 4, 8} below K."""
    return [q for q in DEFAULT_Q_CHOICES if q < k]


def default_s_range(cir: ChannelImpulseResponse | ArrayLike) -> range:
    """Window offsets within ±4 samples of the channel peak."""
    l0 = peak_of(cir)
    return range(l0 - DEFAULT_S_SPAN, l0 + DEFAULT_S_SPAN + 1)


def optimize_cfg(
    cir: ChannelImpulseResponse | ArrayLike,
    snr: SnrPoint,
    k: int,
    q_range: Iterable[int] | None = None,
    s_range: Iterable[int] | None = None,
    prefix_kind: str = "cyclic",
) -> tuple[McConfig, float]:
    """Exhaustive search over prefix length and window offset.

    Ties go to the smaller Q, then the smaller |s|, then the smaller s.

    Returns:
        (best configuration, its spectral efficiency).
    """
    qs = sorted(set(default_q_range(k) if q_range is None else q_range))
    ss = sorted(set(default_s_range(cir) if s_range is None else s_range), key=lambda s: (abs(s), s))
    if not qs or not ss:
        raise ValueError("Prefix and offset ranges must not be empty")

    best: tuple[McConfig, float] | None = None
    for q in qs:
        for s in ss:
            cfg = McConfig(k, q, s, prefix_kind)
            se = se_mc(cir, snr, cfg)
            if best is None or se > best[1]:
                best = (cfg, se)
    logger.debug("Best K=%d config: Q=%d s=%d (%.4f bit/s/Hz)",
                 k, best[0].prefix_len, best[0].window_offset, best[1])
    return best


def sweep_k_configs(
    cir: ChannelImpulseResponse | ArrayLike,
    snr: SnrPoint,
    k_list: Sequence[int],
    q_policy: str = "none",
    s_range: Iterable[int] | None = None,
) -> list[tuple[McConfig, float]]:
    """Best configuration per K.

    Args:
        q_policy: "none" fixes Q = 0; "optimize" searches the default Q set.
    """
    if q_policy not in ("none", "optimize"):
        raise ValueError(f"Unknown q_policy {q_policy!r}; expected 'none' or 'optimize'")
    offsets = list(default_s_range(cir) if s_range is None else s_range)
    results = []
    for k in k_list:
        q_range = [0] if q_policy == "none" else None
        results.append(optimize_cfg(cir, snr, k, q_range, offsets))
    return results


def sweep_k(
    cir: ChannelImpulseResponse | ArrayLike,
    snr: SnrPoint,
    k_list: Sequence[int],
    q_policy: str = "none",
    s_range: Iterable[int] | None = None,
) -> list[tuple[int, float]]:
    """Spectral efficiency versus number of subcarriers."""
    return [
        (cfg.k_subcarriers, se)
        for cfg, se in sweep_k_configs(cir, snr, k_list, q_policy, s_range)
    ]


def compare_sc_mc(
    cir: ChannelImpulseResponse | ArrayLike, snr: SnrPoint, n_taps: int, k: int
) -> tuple[float, float]:
    """Single-carrier N-tap LMMSE versus prefix-less K-subcarrier spectral efficiency."""
    se_sc = design_lmmse(cir, snr, n_taps).se_bits
    _, se_multi = optimize_cfg(cir, snr, k, q_range=[0])
    return se_sc, se_multi
