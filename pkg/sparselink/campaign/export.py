"""Plot-ready CSV output.

All files are UTF-8 with a single header line and "\\n" line endings.
Floats are written in their shortest round-trip form so reruns are
byte-identical.
"""

import csv
import hashlib
import logging
from collections.abc import Iterable, Sequence
from pathlib import Path
from typing import NamedTuple

from sparselink.campaign.stats import EnsembleStats
from sparselink.core.linksim import BerRecord
from sparselink.core.multicarrier import SubcarrierAnalysis
from sparselink.utils.formatting import format_number, to_db

logger = logging.getLogger(__name__)

SE_SC_HEADER = ("channel_label", "snr_db", "n_taps", "decision_delay", "sinr_db", "se_bits")
SE_MC_HEADER = ("channel_label", "snr_db", "k", "q", "window_offset", "se_bits")
SUBCARRIER_HEADER = ("k_index", "signal_db", "ici_db", "ibi_db")
BER_HEADER = (
    "channel_label",
    "snr_db",
    "coded_ber",
    "uncoded_ber",
    "blocks",
    "coded_bit_errors",
    "uncoded_bit_errors",
    "shannon_limit_db",
)
STATS_HEADER = ("snr_db", "setting", "value", "count", "median", "minimum", "maximum")
ECDF_HEADER = ("snr_db", "setting", "value", "se_bits", "fraction")
BER_SUMMARY_HEADER = ("snr_db", "median_ber", "worst_ber", "best_ber")
COMPARE_HEADER = ("channel_label", "snr_db", "n_taps", "k", "se_sc", "se_mc", "mc_better")


class ScRow(NamedTuple):
    """One single-carrier result."""

    channel_label: str
    snr_db: float
    n_taps: int
    decision_delay: int
    sinr_db: float
    se_bits: float


class McRow(NamedTuple):
    """One multi-carrier result at the best (Q, s)."""

    channel_label: str
    snr_db: float
    k: int
    q: int
    window_offset: int
    se_bits: float


class CompareRow(NamedTuple):
    """Single- versus multi-carrier spectral efficiency on one channel."""

    channel_label: str
    snr_db: float
    n_taps: int
    k: int
    se_sc: float
    se_mc: float


def _cell(value: object) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return format_number(value)
    return str(value)


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[object]]) -> Path:
    """Write a header and rows, formatting floats for exact round trips."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        count = 0
        for row in rows:
            writer.writerow([_cell(v) for v in row])
            count += 1
    logger.debug("Wrote %d rows to %s", count, path)
    return path


def write_se_sc(path: Path, rows: Iterable[ScRow]) -> Path:
    return write_csv(path, SE_SC_HEADER, rows)


def write_se_mc(path: Path, rows: Iterable[McRow]) -> Path:
    return write_csv(path, SE_MC_HEADER, rows)


def write_subcarriers(path: Path, analysis: SubcarrierAnalysis) -> Path:
    """Per-subcarrier signal, ICI and IBI power in dB (floored at −120 dB)."""
    rows = (
        (k, to_db(float(s)), to_db(float(i)), to_db(float(b)))
        for k, (s, i, b) in enumerate(
            zip(analysis.signal_power, analysis.ici_power, analysis.ibi_power)
        )
    )
    return write_csv(path, SUBCARRIER_HEADER, rows)


def ber_rows(label: str, records: Iterable[BerRecord], shannon_limit_db: float) -> list[tuple]:
    """BER CSV rows for one channel."""
    return [
        (
            label,
            r.snr_db,
            r.coded_ber,
            r.uncoded_ber,
            r.blocks_simulated,
            r.bit_errors_coded,
            r.bit_errors_uncoded,
            shannon_limit_db,
        )
        for r in records
    ]


def write_ber(path: Path, rows: Iterable[tuple]) -> Path:
    return write_csv(path, BER_HEADER, rows)


def write_stats(path: Path, entries: Iterable[tuple[float, str, int, EnsembleStats]]) -> Path:
    """One line per (snr, setting, value) with the ensemble median and range.

    `setting` names the swept parameter ("n_taps" or "k").
    """
    rows = (
        (snr_db, setting, value, s.count, s.median, s.minimum, s.maximum)
        for snr_db, setting, value, s in entries
    )
    return write_csv(path, STATS_HEADER, rows)


def write_ecdf(path: Path, entries: Iterable[tuple[float, str, int, EnsembleStats]]) -> Path:
    """Every ECDF point, ready for a colour-map plot."""
    rows = (
        (snr_db, setting, value, point, fraction)
        for snr_db, setting, value, s in entries
        for point, fraction in s.ecdf
    )
    return write_csv(path, ECDF_HEADER, rows)


def write_ber_summary(path: Path, rows: Iterable[tuple[float, float, float, float]]) -> Path:
    return write_csv(path, BER_SUMMARY_HEADER, rows)


def write_compare(path: Path, rows: Iterable[CompareRow]) -> Path:
    return write_csv(
        path,
        COMPARE_HEADER,
        ((*row, row.se_mc > row.se_sc) for row in rows),
    )


def file_digest(path: Path) -> str:
    """SHA-256 of a file's bytes."""
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()
