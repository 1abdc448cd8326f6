"""Rate-1/2, n = 1296 quasi-cyclic LDPC code with belief-propagation decoding.

The prototype matrix is the IEEE 802.11n one, read from a bundled table.
Encoding uses the dual-diagonal parity structure (linear time); decoding
is flooding sum-product with the exact tanh rule.
"""

import functools
import logging
from dataclasses import dataclass
from importlib import resources
from typing import NamedTuple

import numpy as np
from numpy.typing import ArrayLike

logger = logging.getLogger(__name__)

BASE_MATRIX_RESOURCE = "ieee80211n_n1296_r12.txt"
BASE_ROWS = 12
BASE_COLS = 24
CIRCULANT_SIZE = 54

LLR_CLIP = 64.0
DEFAULT_MAX_ITER = 50

# Largest float below one; keeps atanh finite
_TANH_LIMIT = float(np.nextafter(1.0, 0.0))
_TINY = 1e-300


class LdpcTableError(ValueError):
    """The bundled base-matrix table failed its consistency checks."""


@dataclass(frozen=True, eq=False)
class LdpcCode:
    """Expanded quasi-cyclic LDPC code.

    Attributes:
        base_matrix: Circulant shifts, −1 for all-zero blocks.
        circulant_size: Z.
        parity_check: (n−k)×n binary matrix.
        edge_check: Check index of every Tanner-graph edge.
        edge_var: Variable index of every edge.
        p0_shift: Net circulant shift of the first parity column.
    """

    base_matrix: np.ndarray
    circulant_size: int
    parity_check: np.ndarray
    edge_check: np.ndarray
    edge_var: np.ndarray
    p0_shift: int

    @property
    def n(self) -> int:
        """Codeword length."""
        return int(self.parity_check.shape[1])

    @property
    def m(self) -> int:
        """Number of parity checks."""
        return int(self.parity_check.shape[0])

    @property
    def k(self) -> int:
        """Information length."""
        return self.n - self.m

    @property
    def rate(self) -> float:
        """k/n."""
        return self.k / self.n

    def syndrome(self, bits: ArrayLike) -> np.ndarray:
        """H·cᵀ over GF(2)."""
        word = np.asarray(bits, dtype=np.int64)
        return (self.parity_check.astype(np.int64) @ word) % 2


@dataclass(frozen=True, eq=False)
class LlrBlock:
    """Channel log-likelihood ratios log P(b=0)/P(b=1), saturated at ±64."""

    llrs: np.ndarray

    def __post_init__(self) -> None:
        values = np.array(self.llrs, dtype=float).ravel()
        if np.any(np.isnan(values)):
            raise ValueError("LLRs must not be NaN")
        values = np.clip(values, -LLR_CLIP, LLR_CLIP)
        values.setflags(write=False)
        object.__setattr__(self, "llrs", values)


class DecodeResult(NamedTuple):
    """Outcome of one decoder run."""

    bits: np.ndarray
    info_bits: np.ndarray
    converged: bool
    iterations: int


def load_base_matrix(text: str | None = None) -> np.ndarray:
    """Parse the base-matrix table.

    Args:
        text: Table contents; the bundled resource when None.

    Returns:
        12×24 integer matrix.

    Raises:
        LdpcTableError: On malformed rows.
    """
    if text is None:
        text = resources.files("sparselink.core.data").joinpath(BASE_MATRIX_RESOURCE).read_text(
            encoding="utf-8"
        )
    rows = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            row = [int(v) for v in line.split()]
        except ValueError as e:
            raise LdpcTableError(f"Base matrix line {lineno}: {e}") from e
        if len(row) != BASE_COLS:
            raise LdpcTableError(f"Base matrix line {lineno}: expected {BASE_COLS} entries, got {len(row)}")
        rows.append(row)
    if len(rows) != BASE_ROWS:
        raise LdpcTableError(f"Base matrix needs {BASE_ROWS} rows, got {len(rows)}")
    return np.array(rows, dtype=np.int64)


def expand(base: np.ndarray, z: int) -> np.ndarray:
    """Replace each entry e ≥ 0 by the Z×Z identity shifted right by e."""
    mb, nb = base.shape
    h = np.zeros((mb * z, nb * z), dtype=np.uint8)
    bi, bj = np.nonzero(base >= 0)
    shifts = base[bi, bj]
    idx = np.arange(z)
    rows = (bi[:, np.newaxis] * z + idx[np.newaxis, :]).ravel()
    cols = (bj[:, np.newaxis] * z + (idx[np.newaxis, :] + shifts[:, np.newaxis]) % z).ravel()
    h[rows, cols] = 1
    return h


def gf2_rank(matrix: np.ndarray) -> int:
    """Rank over GF(2) by Gaussian elimination on bit-packed rows."""
    m, n = matrix.shape
    rows = np.packbits(np.asarray(matrix, dtype=np.uint8) & 1, axis=1)
    rank = 0
    for col in range(n):
        byte, bit = divmod(col, 8)
        mask = np.uint8(0x80 >> bit)
        candidates = np.nonzero(rows[rank:, byte] & mask)[0]
        if candidates.size == 0:
            continue
        pivot = rank + int(candidates[0])
        if pivot != rank:
            rows[[rank, pivot]] = rows[[pivot, rank]]
        hits = np.nonzero(rows[:, byte] & mask)[0]
        hits = hits[hits != rank]
        rows[hits] ^= rows[rank]
        rank += 1
        if rank == m:
            break
    return rank


def _dual_diagonal_shift(base: np.ndarray, z: int) -> int:
    """Check the parity structure and return the net shift of parity column 0."""
    mb, nb = base.shape
    kb = nb - mb
    if np.any(base < -1) or np.any(base >= z):
        raise LdpcTableError(f"Base matrix entries must lie in [-1, {z - 1}]")

    first = base[:, kb]
    counts: dict[int, int] = {}
    for e in first[first >= 0]:
        counts[int(e)] = counts.get(int(e), 0) + 1
    odd = [e for e, c in counts.items() if c % 2]
    if len(odd) != 1:
        raise LdpcTableError("First parity column does not reduce to a single circulant")

    for j in range(1, mb):
        column = base[:, kb + j]
        expected = np.full(mb, -1)
        expected[j - 1] = expected[j] = 0
        if not np.array_equal(column, expected):
            raise LdpcTableError(f"Parity column {j} breaks the dual-diagonal structure")
    return odd[0]


@functools.lru_cache(maxsize=1)
def build_code() -> LdpcCode:
    """Load, expand and verify the rate-1/2, n = 1296 code.

    Raises:
        LdpcTableError: If the table fails its dimension, structure or rank checks.
    """
    base = load_base_matrix()
    z = CIRCULANT_SIZE
    p0_shift = _dual_diagonal_shift(base, z)
    h = expand(base, z)

    rank = gf2_rank(h)
    if rank != h.shape[0]:
        raise LdpcTableError(f"Parity-check matrix has GF(2) rank {rank}, expected {h.shape[0]}")
    if np.any(h.sum(axis=0) == 0):
        raise LdpcTableError("Parity-check matrix has an unconnected variable node")

    edge_check, edge_var = np.nonzero(h)
    logger.debug("Built LDPC code n=%d k=%d with %d edges", h.shape[1], h.shape[1] - h.shape[0],
                 edge_check.size)
    return LdpcCode(
        base_matrix=base,
        circulant_size=z,
        parity_check=h,
        edge_check=edge_check,
        edge_var=edge_var,
        p0_shift=p0_shift,
    )


def encode(code: LdpcCode, info_bits: ArrayLike) -> np.ndarray:
    """Systematic encoding by dual-diagonal back-substitution.

    Args:
        code: The code.
        info_bits: Exactly k bits.

    Returns:
        The n-bit codeword, information bits first.
    """
    info = np.asarray(info_bits).ravel()
    if info.size != code.k:
        raise ValueError(f"Expected {code.k} information bits, got {info.size}")
    if not np.all((info == 0) | (info == 1)):
        raise ValueError("Information bits must be 0 or 1")
    info = info.astype(np.uint8)

    base, z = code.base_matrix, code.circulant_size
    mb, nb = base.shape
    kb = nb - mb
    blocks = info.reshape(kb, z)

    # (P^e v)[r] = v[(r + e) mod Z]
    lam = np.zeros((mb, z), dtype=np.uint8)
    for i in range(mb):
        for j in np.nonzero(base[i, :kb] >= 0)[0]:
            lam[i] ^= np.roll(blocks[j], -base[i, j])

    parity = np.zeros((mb, z), dtype=np.uint8)
    parity[0] = np.roll(np.bitwise_xor.reduce(lam, axis=0), code.p0_shift)
    for i in range(mb - 1):
        acc = lam[i].copy()
        for j in range(i + 1):
            e = base[i, kb + j]
            if e >= 0:
                acc ^= np.roll(parity[j], -e)
        parity[i + 1] = np.roll(acc, base[i, kb + i + 1])

    return np.concatenate([info, parity.ravel()])


def decode(code: LdpcCode, llr: LlrBlock | ArrayLike, max_iter: int = DEFAULT_MAX_ITER) -> DecodeResult:
    """Flooding sum-product decoding.

    Stops as soon as the hard decision satisfies every check; otherwise
    returns the hard decision after max_iter iterations.

    Args:
        code: The code.
        llr: n channel LLRs.
        max_iter: Iteration cap, at least 1.

    Returns:
        The decoded word and convergence information.
    """
    if max_iter < 1:
        raise ValueError(f"max_iter must be at least 1, got {max_iter}")
    channel = llr.llrs if isinstance(llr, LlrBlock) else LlrBlock(np.asarray(llr)).llrs
    if channel.size != code.n:
        raise ValueError(f"Expected {code.n} LLRs, got {channel.size}")

    ec, ev = code.edge_check, code.edge_var
    m, n = code.m, code.n
    v2c = channel[ev].copy()
    bits = (channel < 0).astype(np.uint8)

    for iteration in range(1, max_iter + 1):
        t = np.tanh(0.5 * v2c)
        negative = (t < 0).astype(float)
        log_mag = np.log(np.maximum(np.abs(t), _TINY))
        total_log = np.bincount(ec, weights=log_mag, minlength=m)
        total_neg = np.bincount(ec, weights=negative, minlength=m)

        magnitude = np.minimum(np.exp(total_log[ec] - log_mag), _TANH_LIMIT)
        sign = 1.0 - 2.0 * ((total_neg[ec] - negative) % 2)
        c2v = 2.0 * sign * np.arctanh(magnitude)

        posterior = channel + np.bincount(ev, weights=c2v, minlength=n)
        v2c = np.clip(posterior[ev] - c2v, -LLR_CLIP, LLR_CLIP)

        bits = (posterior < 0).astype(np.uint8)
        syndrome = np.bincount(ec, weights=bits[ev], minlength=m).astype(np.int64) % 2
        if not syndrome.any():
            return DecodeResult(bits, bits[: code.k], True, iteration)

    return DecodeResult(bits, bits[: code.k], False, max_iter)


def qpsk_modulate(bits: ArrayLike) -> np.ndarray:
    """Gray-mapped unit-energy QPSK; bit 0 ↔ +1/√2, in-phase bit first."""
    b = np.asarray(bits, dtype=float).ravel()
    if b.size % 2:
        raise ValueError("QPSK needs an even number of bits")
    amplitude = (1.0 - 2.0 * b) / np.sqrt(2.0)
    return amplitude[0::2] + 1j * amplitude[1::2]


def qpsk_llr(symbols: ArrayLike, noise_var: float | ArrayLike) -> np.ndarray:
    """Per-bit LLRs of Gray QPSK in complex Gaussian noise.

    llr = 2√2·y/noise_var per real dimension y; in-phase bit first.

    Args:
        symbols: Received (unit-gain) symbols.
        noise_var: Complex noise variance per symbol, scalar or per symbol.

    Returns:
        Interleaved LLRs, two per symbol.
    """
    y = np.asarray(symbols, dtype=np.complex128).ravel()
    var = np.asarray(noise_var, dtype=float)
    if np.any(var <= 0):
        raise ValueError("Noise variance must be positive")
    scale = 2.0 * np.sqrt(2.0) / var
    llrs = np.empty(2 * y.size)
    llrs[0::2] = scale * y.real
    llrs[1::2] = scale * y.imag
    return llrs
