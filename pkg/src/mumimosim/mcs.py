"""MCS table (TS 38.214 Table 5.1.3.1-1) and simplified transport block sizing.

The full standard TBS procedure is replaced by a linear bits-per-RE rule,
floored to a whole number of bytes; throughput accounting in this simulator
only needs bits-per-RB consistency, not standard-exact quantization.
"""

from dataclasses import dataclass

import numpy as np

#: (Qm, code rate x 1024) rows for MCS indices 0..28, 64QAM table.
_MCS_ROWS = (
    (2, 120), (2, 157), (2, 193), (2, 251), (2, 308),
    (2, 379), (2, 449), (2, 526), (2, 602), (2, 679),
    (4, 340), (4, 378), (4, 434), (4, 490), (4, 553),
    (4, 616), (4, 658), (6, 438), (6, 466), (6, 517),
    (6, 567), (6, 616), (6, 666), (6, 719), (6, 772),
    (6, 822), (6, 873), (6, 910), (6, 948),
)

MAX_MCS = len(_MCS_ROWS) - 1

#: REs per RB in one slot: 12 subcarriers x 14 symbols.
RE_PER_RB = 168

#: Default data REs per RB after DMRS + control overhead (12 + 12 REs).
DEFAULT_DATA_RE_PER_RB = 144


@dataclass(frozen=True)
class McsEntry:
    """One row of the MCS table."""

    index: int
    qm: int
    code_rate_x1024: int

    @property
    def code_rate(self):
        return self.code_rate_x1024 / 1024.0

    @property
    def spectral_efficiency(self):
        return self.qm * self.code_rate


@dataclass(frozen=True)
class TbsParams:
    """Inputs to the transport-block sizing rule."""

    num_rb: int
    mcs: McsEntry
    data_re_per_rb: int = DEFAULT_DATA_RE_PER_RB

    def __post_init__(self):
        if self.num_rb < 1:
            raise ValueError(f"num_rb must be >= 1, got {self.num_rb}")
        if not 1 <= self.data_re_per_rb <= RE_PER_RB:
            raise ValueError(
                f"data_re_per_rb must be in 1..{RE_PER_RB}, got {self.data_re_per_rb}"
            )


def mcs_lookup(index):
    """Table row for an MCS index in 0..28."""
    if not isinstance(index, (int, np.integer)) or not 0 <= index <= MAX_MCS:
        raise ValueError(f"MCS index must be in 0..{MAX_MCS}, got {index!r}")
    qm, rate = _MCS_ROWS[index]
    return McsEntry(index=int(index), qm=qm, code_rate_x1024=rate)


def compute_tbs(p):
    """Transport block size in bits: RB count x data REs x Qm x R, byte-floored."""
    raw = p.num_rb * p.data_re_per_rb * p.mcs.qm * p.mcs.code_rate_x1024
    return 8 * (raw // 8192)  # raw / 1024 bits, floored to a byte multiple


def sinr_threshold_db(mcs, margin_db):
    """Shannon-inverse SINR (dB) for the MCS spectral efficiency, plus margin."""
    if not np.isfinite(margin_db):
        raise ValueError("margin_db must be finite")
    return 10.0 * np.log10(2.0**mcs.spectral_efficiency - 1.0) + margin_db
