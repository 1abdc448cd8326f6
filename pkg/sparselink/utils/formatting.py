"""Text formatting utilities for sparselink.

Provides helpers for numbers in log messages and CSV cells, durations,
counts and file names derived from channel labels.
"""

import math
import re


def format_number(value: float) -> str:
    """Format a float for CSV output with full round-trip precision.

    Args:
        value: The number to format.

    Returns:
        Shortest string that parses back to the same float.
    """
    value = float(value)
    if math.isnan(value):
        return "nan"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return repr(value)


def to_db(value: float, floor_db: float = -120.0) -> float:
    """Convert a linear power ratio to dB, clamped at a floor.

    Args:
        value: Linear power ratio.
        floor_db: Value returned for zero or negative inputs and the
            lower clamp for everything else.

    Returns:
        10·log10(value), not below floor_db.
    """
    if value <= 0.0:
        return floor_db
    return max(10.0 * math.log10(value), floor_db)


def format_se(value: float) -> str:
    """Format a spectral efficiency for display (e.g. "2.317 bit/s/Hz")."""
    return f"{value:.3f} bit/s/Hz"


def format_duration(seconds: float) -> str:
    """Render elapsed wall time as m:ss, or h:mm:ss past an hour."""
    total = max(0, int(round(seconds)))
    minutes, secs = divmod(total, 60)
    hours, minutes = divmod(minutes, 60)
    if hours:
        return f"{hours}:{minutes:02d}:{secs:02d}"
    return f"{minutes}:{secs:02d}"


def format_count(count: int, singular: str, plural: str | None = None) -> str:
    """Count with the matching noun form, e.g. "46 channels"."""
    noun = singular if count == 1 else (plural or f"{singular}s")
    return f"{count} {noun}"


# Characters that are unsafe in file names on common file systems
_UNSAFE_CHARS = re.compile(r'[<>:"/\\|?*\s]')

MAX_FILENAME_LEN = 200


def sanitize_filename(name: str) -> str:
    """Turn a channel label into a file-system-safe name.

    Unsafe characters and whitespace become underscores; leading and
    trailing dots or underscores are dropped.

    Args:
        name: The label or file name.

    Returns:
        The safe name, never empty.
    """
    cleaned = _UNSAFE_CHARS.sub("_", name).strip("._")[:MAX_FILENAME_LEN]
    return cleaned or "unnamed"
