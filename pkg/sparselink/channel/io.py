"""Channel file input/output.

CIR files are UTF-8 JSON documents::

    {"format_version": 1, "label": "...", "sample_rate_hz": 4e9,
     "sample_period_s": 2.5e-10, "taps": [[re, im], ...]}

Floats are written with Python's shortest round-trip representation, so a
store/load cycle reproduces every tap bit for bit. ``sample_period_s`` is
optional on input; when present it is used verbatim.
"""

import csv
import json
import logging
import math
from pathlib import Path
from typing import Any

from sparselink.channel.cir import ChannelImpulseResponse, pdp
from sparselink.utils.formatting import format_number

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1

PDP_HEADER = ("tap_index", "delay_ns", "power_db")


class CirFormatError(ValueError):
    """A CIR file does not follow the expected schema."""


def store_cir(cir: ChannelImpulseResponse, path: Path | str) -> Path:
    """Write a channel to a CIR file.

    Args:
        cir: The channel.
        path: Destination file; parent directories are created.

    Returns:
        The written path.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    document = {
        "format_version": FORMAT_VERSION,
        "label": cir.label,
        "sample_rate_hz": cir.sample_rate_hz,
        "sample_period_s": cir.sample_period,
        "taps": [[float(t.real), float(t.imag)] for t in cir.taps],
    }
    with open(path, "w", encoding="utf-8") as f:
        json.dump(document, f, indent=1)
        f.write("\n")
    logger.debug("Stored %r to %s", cir.label, path)
    return path


def load_cir(path: Path | str) -> ChannelImpulseResponse:
    """Read a channel from a CIR file.

    Args:
        path: The file.

    Returns:
        The channel; its peak index is the strongest tap.

    Raises:
        FileNotFoundError: If the file does not exist.
        CirFormatError: If the file is malformed; the message names the
            offending line or field.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"CIR file not found: {path}")

    try:
        with open(path, encoding="utf-8") as f:
            document = json.load(f)
    except json.JSONDecodeError as e:
        raise CirFormatError(f"{path}: line {e.lineno}, column {e.colno}: {e.msg}") from e

    if not isinstance(document, dict):
        raise CirFormatError(f"{path}: top level must be an object")

    version = _field(document, "format_version", path)
    if version != FORMAT_VERSION:
        raise CirFormatError(f"{path}: field 'format_version': unsupported version {version!r}")

    label = _field(document, "label", path)
    if not isinstance(label, str):
        raise CirFormatError(f"{path}: field 'label': expected a string")

    rate = _number(_field(document, "sample_rate_hz", path), "sample_rate_hz", path)
    if rate <= 0:
        raise CirFormatError(f"{path}: field 'sample_rate_hz': must be positive")
    period = 1.0 / rate
    if "sample_period_s" in document:
        period = _number(document["sample_period_s"], "sample_period_s", path)
        if period <= 0:
            raise CirFormatError(f"{path}: field 'sample_period_s': must be positive")

    raw_taps = _field(document, "taps", path)
    if not isinstance(raw_taps, list) or not raw_taps:
        raise CirFormatError(f"{path}: field 'taps': expected a non-empty array")
    taps = []
    for i, pair in enumerate(raw_taps):
        if not isinstance(pair, list) or len(pair) != 2:
            raise CirFormatError(f"{path}: field 'taps[{i}]': expected a [re, im] pair")
        re = _number(pair[0], f"taps[{i}][0]", path)
        im = _number(pair[1], f"taps[{i}][1]", path)
        taps.append(complex(re, im))

    try:
        return ChannelImpulseResponse(taps, sample_period=period, label=label)
    except ValueError as e:
        raise CirFormatError(f"{path}: field 'taps': {e}") from e


def export_pdp(cir: ChannelImpulseResponse, path: Path | str) -> Path:
    """Write the power delay profile as CSV (tap_index,delay_ns,power_db)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(PDP_HEADER)
        for index, (delay, power) in enumerate(zip(cir.delays_ns(), pdp(cir))):
            writer.writerow([index, format_number(delay), format_number(power)])
    return path


def _field(document: dict[str, Any], name: str, path: Path) -> Any:
    """Fetch a required field."""
    if name not in document:
        raise CirFormatError(f"{path}: missing field '{name}'")
    return document[name]


def _number(value: Any, name: str, path: Path) -> float:
    """Validate a finite JSON number."""
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise CirFormatError(f"{path}: field '{name}': expected a number")
    value = float(value)
    if not math.isfinite(value):
        raise CirFormatError(f"{path}: field '{name}': must be finite")
    return value
