"""Per-slot baseband: Gray QAM, superposition precoding, reception,
zero-forcing equalization, hard demapping, and the block-error decision.

There is no channel coding chain.  A transport block is declared in error
when its raw bit-error count exceeds a rate-dependent budget
floor(eps * (1 - R) * TBS): higher code rates tighten the budget and higher
modulation orders raise the raw BER, which reproduces MCS-dependent BLER
waterfalls at negligible cost.
"""

from dataclasses import dataclass

import numpy as np

from .channel import add_awgn, apply_channel
from .codebook import get_precoder
from .mcs import sinr_threshold_db
from .scheduler import AllocMode

#: Per-axis amplitude normalizer per modulation order (unit average energy).
_QAM_NORM = {2: 2.0, 4: 10.0, 6: 42.0}

#: Effective-channel magnitude below which decoding is declared failed.
MIN_EFFECTIVE_GAIN = 1e-9

#: Default fraction of the (1-R) redundancy usable as bit-error budget.
DEFAULT_EPSILON = 0.5


@dataclass(frozen=True)
class TransportBlock:
    """Payload bits for one UE in one slot."""

    ue_id: int
    bits: np.ndarray
    tbs: int

    def __post_init__(self):
        if len(self.bits) != self.tbs:
            raise ValueError("bit count must equal tbs")


@dataclass(frozen=True)
class LinkResult:
    """Decode outcome of one transport block."""

    ue_id: int
    bit_errors: int
    total_bits: int
    block_error: bool
    post_sinr_db: float

    def __post_init__(self):
        if not 0 <= self.bit_errors <= self.total_bits:
            raise ValueError("bit_errors out of range")


def modulate(bits, qm):
    """Gray-map bits to unit-energy square QAM symbols (QPSK/16QAM/64QAM)."""
    if qm not in _QAM_NORM:
        raise ValueError(f"unsupported modulation order qm={qm}")
    bits = np.asarray(bits, dtype=np.int8)
    if bits.size % qm:
        raise ValueError(f"bit count {bits.size} not divisible by qm={qm}")
    b = bits.reshape(-1, qm)
    s = 1 - 2 * b.astype(np.float64)  # bit 0 -> +1, bit 1 -> -1
    if qm == 2:
        re, im = s[:, 0], s[:, 1]
    elif qm == 4:
        re = s[:, 0] * (2.0 - s[:, 2])
        im = s[:, 1] * (2.0 - s[:, 3])
    else:
        re = s[:, 0] * (4.0 - s[:, 2] * (2.0 - s[:, 4]))
        im = s[:, 1] * (4.0 - s[:, 3] * (2.0 - s[:, 5]))
    return (re + 1j * im) / np.sqrt(_QAM_NORM[qm])


def hard_demap(symbols, qm):
    """Nearest-point hard decision and Gray demap, inverse of `modulate`."""
    if qm not in _QAM_NORM:
        raise ValueError(f"unsupported modulation order qm={qm}")
    symbols = np.atleast_1d(np.asarray(symbols)) * np.sqrt(_QAM_NORM[qm])
    m = 2 ** (qm // 2)  # levels per axis
    out = np.empty((symbols.size, qm), dtype=np.int8)
    for axis, x in enumerate((symbols.real, symbols.imag)):
        level = np.clip(2 * np.round((x - 1) / 2) + 1, -(m - 1), m - 1)
        a = np.abs(level)
        out[:, axis] = level < 0
        if qm >= 4:
            out[:, axis + 2] = a > 2 if qm == 4 else a > 4
        if qm == 6:
            out[:, axis + 4] = np.abs(a - 4) == 3
    return out.reshape(-1)


def precode_superpose(x1, x2, alloc):
    """TX antenna samples per Eq.-style superposition: a1*w1*x1 (+ a2*w2*x2)."""
    x1 = np.atleast_1d(np.asarray(x1, dtype=complex))
    w1 = get_precoder(alloc.pmi_per_ue[0]).entries
    s = alloc.power_coeffs[0] * np.outer(x1, w1)
    if alloc.mode is AllocMode.MU_MIMO:
        if x2 is None:
            raise ValueError("MU-MIMO allocation requires x2")
        x2 = np.atleast_1d(np.asarray(x2, dtype=complex))
        w2 = get_precoder(alloc.pmi_per_ue[1]).entries
        s = s + alloc.power_coeffs[1] * np.outer(x2, w2)
    elif x2 is not None:
        raise ValueError("x2 given for a single-user allocation")
    return s


def receive(h, s, noise, rng):
    """UE receive samples: channel inner product plus AWGN."""
    return add_awgn(apply_channel(h, s), noise, rng)


@dataclass(frozen=True)
class EqualizedBlock:
    bits: np.ndarray
    post_sinr_db: float
    decode_failed: bool


def equalize_demap(y, h, alloc, ue_index, qm, noise_variance):
    """Scalar zero-forcing equalization and hard demap for one UE.

    Also reports the post-equalization SINR, counting residual cross-user
    interference from the paired UE's precoder.
    """
    w = get_precoder(alloc.pmi_per_ue[ue_index]).entries
    entries = getattr(h, "entries", h)
    g = alloc.power_coeffs[ue_index] * (entries @ w)

    interference = 0.0
    for other in range(len(alloc.ue_ids)):
        if other == ue_index:
            continue
        w_o = get_precoder(alloc.pmi_per_ue[other]).entries
        interference += abs(alloc.power_coeffs[other] * (entries @ w_o)) ** 2

    denom = noise_variance + interference
    sinr = abs(g) ** 2 / denom if denom > 0 else np.inf
    post_sinr_db = 10.0 * np.log10(sinr) if sinr > 0 else -np.inf

    y = np.atleast_1d(np.asarray(y))
    if abs(g) < MIN_EFFECTIVE_GAIN:
        return EqualizedBlock(
            bits=np.zeros(y.size * qm, dtype=np.int8),
            post_sinr_db=float(post_sinr_db) if np.isfinite(post_sinr_db) else -400.0,
            decode_failed=True,
        )
    bits = hard_demap(y / g, qm)
    return EqualizedBlock(bits=bits, post_sinr_db=float(post_sinr_db), decode_failed=False)


def decide_block_error(bit_errors, total_bits, mcs, epsilon=DEFAULT_EPSILON):
    """Declare a block error when raw errors exceed the redundancy budget."""
    if not 0 <= bit_errors <= total_bits:
        raise ValueError("bit_errors out of range")
    if not 0 < epsilon <= 1:
        raise ValueError(f"epsilon must be in (0, 1], got {epsilon}")
    budget = int(np.floor(epsilon * (1.0 - mcs.code_rate) * total_bits))
    return bit_errors > budget


def threshold_block_error(mean_post_sinr_db, mcs, margin_db=0.0):
    """Alternative link model: error iff SINR is under the Shannon threshold."""
    return bool(mean_post_sinr_db < sinr_threshold_db(mcs, margin_db))
