"""LDPC-coded single-carrier QPSK link simulation over a tapped channel.

Each trial sends a continuous stream of a few codewords framed by random
padding symbols, passes it through the channel and AWGN, equalizes it with
an N-tap LMMSE filter whose decision delay leaves a fixed number of
postcursor taps, and decodes with residual ISI folded into the LLR noise
variance. Every trial draws from its own keyed random stream, so results
depend only on the seed and never on the thread count.
"""

import logging
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, fields
from typing import Any, NamedTuple

import numpy as np
from numpy.typing import ArrayLike
from scipy.special import erfc

from sparselink.channel.cir import ChannelImpulseResponse
from sparselink.core.ldpc import (
    DEFAULT_MAX_ITER,
    LdpcCode,
    LlrBlock,
    build_code,
    decode,
    encode,
    qpsk_llr,
    qpsk_modulate,
)
from sparselink.core.singlecarrier import (
    SnrPoint,
    as_taps,
    design_lmmse,
    peak_of,
    postcursor_delay,
)
from sparselink.utils.parallel import ordered_map
from sparselink.utils.rng import stream

logger = logging.getLogger(__name__)

# Equalizer design SNR used for a noiseless link
DESIGN_SNR_CAP_DB = 120.0

# Lower bound on the LLR noise variance
MIN_LLR_NOISE_VAR = 1e-10

# Returned by shannon_limit_snr when the limit underflows
SHANNON_FLOOR_DB = -300.0


@dataclass(frozen=True)
class LinkConfig:
    """Link simulation parameters.

    Attributes:
        n_taps: Equalizer length N.
        n_postcursors: Equalizer taps acting on post-cursor samples.
        snr_points: SNR grid, ascending.
        codewords_per_point: Codeword budget per SNR point.
        min_bit_errors: Stop a point once this many coded bit errors are seen.
        seed: Random seed.
        max_iterations: Decoder iteration cap.
        codewords_per_trial: Codewords sent back to back in one stream.
    """

    n_taps: int = 7
    n_postcursors: int = 2
    snr_points: tuple[SnrPoint, ...] = ()
    codewords_per_point: int = 20000
    min_bit_errors: int = 100
    seed: int = 0
    max_iterations: int = DEFAULT_MAX_ITER
    codewords_per_trial: int = 4

    def __post_init__(self) -> None:
        points = tuple(p if isinstance(p, SnrPoint) else SnrPoint(float(p)) for p in self.snr_points)
        object.__setattr__(self, "snr_points", points)
        if self.n_taps < 1:
            raise ValueError(f"n_taps must be at least 1, got {self.n_taps}")
        if not 0 <= self.n_postcursors < self.n_taps:
            raise ValueError(
                f"n_postcursors must be in [0, {self.n_taps - 1}], got {self.n_postcursors}"
            )
        if self.codewords_per_point < 1:
            raise ValueError("codewords_per_point must be at least 1")
        if self.min_bit_errors < 1:
            raise ValueError("min_bit_errors must be at least 1")
        if self.seed < 0:
            raise ValueError(f"Seed must be non-negative, got {self.seed}")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        if self.codewords_per_trial < 1:
            raise ValueError("codewords_per_trial must be at least 1")

    @property
    def trial_count(self) -> int:
        """Trials needed to exhaust the codeword budget."""
        return -(-self.codewords_per_point // self.codewords_per_trial)

    def codewords_in_trial(self, trial: int) -> int:
        """Codewords sent by trial `trial`; the last one may be short."""
        return min(self.codewords_per_trial, self.codewords_per_point - trial * self.codewords_per_trial)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "LinkConfig":
        """Build from a config mapping; `snr_db_list` gives the SNR grid."""
        data = dict(data)
        known = {f.name for f in fields(cls)} - {"snr_points"}
        snr_db = data.pop("snr_db_list", [])
        unknown = sorted(set(data) - known)
        if unknown:
            raise ValueError(f"Unknown link keys: {', '.join(unknown)}")
        return cls(snr_points=tuple(SnrPoint(float(v)) for v in snr_db), **data)

    def to_dict(self) -> dict[str, Any]:
        """Config mapping, inverse of from_dict."""
        return {
            "n_taps": self.n_taps,
            "n_postcursors": self.n_postcursors,
            "snr_db_list": [p.snr_db for p in self.snr_points],
            "codewords_per_point": self.codewords_per_point,
            "min_bit_errors": self.min_bit_errors,
            "seed": self.seed,
            "max_iterations": self.max_iterations,
            "codewords_per_trial": self.codewords_per_trial,
        }


@dataclass(frozen=True)
class BerRecord:
    """Error counts at one SNR point; rates are derived from the counts."""

    snr_db: float
    blocks_simulated: int
    bit_errors_coded: int
    bit_errors_uncoded: int
    info_bits: int
    coded_bits: int
    failed_blocks: int = 0

    @property
    def coded_ber(self) -> float:
        """Information-bit error rate after decoding."""
        return self.bit_errors_coded / self.info_bits if self.info_bits else 0.0

    @property
    def uncoded_ber(self) -> float:
        """Hard-decision error rate over all code bits before decoding."""
        return self.bit_errors_uncoded / self.coded_bits if self.coded_bits else 0.0


class _TrialCounts(NamedTuple):
    blocks: int
    coded_errors: int
    uncoded_errors: int
    failed: int


@dataclass(frozen=True, eq=False)
class _Receiver:
    """Equalizer and LLR scaling shared by all trials of one point."""

    taps: np.ndarray
    equalizer: np.ndarray
    decision_delay: int
    cursor_gain: complex
    llr_noise_var: float
    noise_var: float


def uncoded_qpsk_ber(snr_linear: float | ArrayLike) -> float | np.ndarray:
    """Per-bit BER of Gray QPSK in AWGN, Q(√snr) = ½·erfc(√(snr/2))."""
    snr = np.asarray(snr_linear, dtype=float)
    if np.any(snr < 0):
        raise ValueError("SNR must be non-negative")
    ber = 0.5 * erfc(np.sqrt(snr / 2.0))
    return float(ber) if ber.ndim == 0 else ber


def shannon_limit_snr(target_se: float, cir: ChannelImpulseResponse | ArrayLike) -> float:
    """Smallest SNR in dB at which the matched filter bound reaches target_se.

    10·log10((2^target_se − 1)/Σ|h_l|²). As target_se → 0 the limit tends
    to −∞; values below SHANNON_FLOOR_DB are returned as that floor.

    Raises:
        ValueError: If target_se is not positive.
    """
    if not target_se > 0:
        raise ValueError(f"Target spectral efficiency must be positive, got {target_se}")
    energy = float(np.sum(np.abs(as_taps(cir)) ** 2))
    if energy <= 0:
        raise ValueError("Channel has zero energy")
    ratio = math.expm1(target_se * math.log(2.0)) / energy
    if ratio <= 0:
        return SHANNON_FLOOR_DB
    return max(10.0 * math.log10(ratio), SHANNON_FLOOR_DB)


def _receiver(cir: ChannelImpulseResponse | ArrayLike, snr: SnrPoint, cfg: LinkConfig) -> _Receiver:
    h = as_taps(cir)
    design_snr = snr if snr.is_finite else SnrPoint(DESIGN_SNR_CAP_DB)
    delay = postcursor_delay(peak_of(cir), cfg.n_taps, cfg.n_postcursors)
    design = design_lmmse(h, design_snr, cfg.n_taps, delay_search=[delay])

    c = np.convolve(h, design.taps)
    cursor = complex(c[delay])
    if cursor == 0:
        raise ValueError("Equalized channel has zero gain at the decision delay")
    isi = float(np.sum(np.abs(c) ** 2) - abs(cursor) ** 2)
    noise = float(np.sum(np.abs(design.taps) ** 2)) * snr.noise_var
    llr_var = max((max(isi, 0.0) + noise) / abs(cursor) ** 2, MIN_LLR_NOISE_VAR)
    return _Receiver(h, design.taps, delay, cursor, llr_var, snr.noise_var)


def _run_trial(
    rx: _Receiver, code: LdpcCode, cfg: LinkConfig, rng: np.random.Generator, n_codewords: int
) -> _TrialCounts:
    """Send n_codewords back to back and count errors."""
    info = rng.integers(0, 2, size=(n_codewords, code.k), dtype=np.uint8)
    codewords = np.stack([encode(code, row) for row in info])
    data = qpsk_modulate(codewords.ravel())

    pad = cfg.n_taps + rx.taps.size
    lead = qpsk_modulate(rng.integers(0, 2, size=2 * pad))
    trail = qpsk_modulate(rng.integers(0, 2, size=2 * pad))
    x = np.concatenate([lead, data, trail])

    y = np.convolve(x, rx.taps)
    if rx.noise_var > 0:
        scale = math.sqrt(rx.noise_var / 2.0)
        y = y + scale * (rng.standard_normal(y.size) + 1j * rng.standard_normal(y.size))

    # Decision for x[m] sits at z[m + d]
    z = np.convolve(y, rx.equalizer)
    start = pad + rx.decision_delay
    estimates = z[start : start + data.size] / rx.cursor_gain
    llrs = qpsk_llr(estimates, rx.llr_noise_var).reshape(n_codewords, code.n)

    uncoded_errors = int(np.count_nonzero((llrs < 0).astype(np.uint8) != codewords))
    coded_errors = 0
    failed = 0
    for row, sent in zip(llrs, info):
        result = decode(code, LlrBlock(row), cfg.max_iterations)
        coded_errors += int(np.count_nonzero(result.info_bits != sent))
        failed += not result.converged
    return _TrialCounts(n_codewords, coded_errors, uncoded_errors, failed)


def simulate_point(
    cir: ChannelImpulseResponse | ArrayLike,
    snr: SnrPoint,
    cfg: LinkConfig,
    code: LdpcCode | None = None,
    snr_index: int = 0,
    stream_keys: Sequence[int] = (),
    threads: int = 1,
) -> BerRecord:
    """Monte Carlo coded and uncoded BER at one SNR point.

    Trials run in batches of `threads` and are reduced in trial order; the
    point stops after the first trial at which the codeword budget or the
    coded bit-error target is reached.

    Args:
        cir: Normalized, peak-synchronized channel.
        snr: Receive SNR; +inf dB simulates a noiseless link.
        cfg: Link parameters.
        code: LDPC code, the bundled one when None.
        snr_index: Position of this point in its sweep (stream key).
        stream_keys: Extra stream keys, e.g. the channel index.
        threads: Worker threads.

    Returns:
        The error counts.
    """
    code = code or build_code()
    rx = _receiver(cir, snr, cfg)

    def work(t: int) -> _TrialCounts:
        rng = stream(cfg.seed, *stream_keys, snr_index, t)
        return _run_trial(rx, code, cfg, rng, cfg.codewords_in_trial(t))

    blocks = coded = uncoded = failed = 0
    trial = 0
    done = False
    batch = max(1, threads)
    while not done and trial < cfg.trial_count:
        trials = range(trial, min(trial + batch, cfg.trial_count))
        for counts in ordered_map(work, trials, threads):
            blocks += counts.blocks
            coded += counts.coded_errors
            uncoded += counts.uncoded_errors
            failed += counts.failed
            trial += 1
            if coded >= cfg.min_bit_errors or blocks >= cfg.codewords_per_point:
                done = True
                break

    if failed:
        logger.warning("%d of %d blocks did not converge at %s dB", failed, blocks, snr.snr_db)
    logger.debug("SNR %s dB: %d blocks, %d coded / %d uncoded bit errors",
                 snr.snr_db, blocks, coded, uncoded)
    return BerRecord(
        snr_db=snr.snr_db,
        blocks_simulated=blocks,
        bit_errors_coded=coded,
        bit_errors_uncoded=uncoded,
        info_bits=blocks * code.k,
        coded_bits=blocks * code.n,
        failed_blocks=failed,
    )


def sweep_snr(
    cir: ChannelImpulseResponse | ArrayLike,
    cfg: LinkConfig,
    code: LdpcCode | None = None,
    stream_keys: Sequence[int] = (),
    threads: int = 1,
) -> list[BerRecord]:
    """One BerRecord per configured SNR point, in order."""
    values = [p.snr_db for p in cfg.snr_points]
    if values != sorted(values):
        raise ValueError("SNR points must be sorted ascending")
    code = code or build_code()
    records = [
        simulate_point(cir, snr, cfg, code, snr_index=i, stream_keys=stream_keys, threads=threads)
        for i, snr in enumerate(cfg.snr_points)
    ]
    logger.info("BER sweep over %d SNR points finished", len(records))
    return records


def required_snr(records: Iterable[BerRecord], target_ber: float) -> float | None:
    """SNR in dB at which the coded BER first reaches target_ber.

    Interpolates linearly in log10(BER) between the bracketing points. A
    zero error count is taken as half an error.

    Returns:
        The SNR, or None if no record reaches the target.
    """
    if not 0 < target_ber < 1:
        raise ValueError(f"Target BER must be in (0, 1), got {target_ber}")
    ordered = sorted((r for r in records if math.isfinite(r.snr_db) and r.info_bits),
                     key=lambda r: r.snr_db)
    previous: BerRecord | None = None
    for record in ordered:
        if record.coded_ber <= target_ber:
            if previous is None:
                return record.snr_db
            lo = math.log10(_positive_ber(previous))
            hi = math.log10(_positive_ber(record))
            goal = math.log10(target_ber)
            if lo == hi:
                return record.snr_db
            fraction = min(max((lo - goal) / (lo - hi), 0.0), 1.0)
            return previous.snr_db + fraction * (record.snr_db - previous.snr_db)
        previous = record
    return None


def shannon_gap(
    records: Iterable[BerRecord],
    target_ber: float,
    cir: ChannelImpulseResponse | ArrayLike,
    target_se: float = 1.0,
) -> float | None:
    """Distance in dB between the required SNR and the Shannon limit."""
    needed = required_snr(records, target_ber)
    if needed is None:
        return None
    return needed - shannon_limit_snr(target_se, cir)


def _positive_ber(record: BerRecord) -> float:
    return max(record.bit_errors_coded, 0.5) / record.info_bits
