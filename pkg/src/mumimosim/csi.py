"""CSI feedback loop: pilot generation, LS channel estimation, CQI/RI/PMI reports.

The gNB broadcasts known pilots on interleaved resource elements (antenna 0
on even REs, antenna 1 on odd REs), each UE least-squares estimates its
channel from them and reports back a CQI/RI/PMI triple.  RI is always 1
here: single RX antenna, single layer.
"""

from dataclasses import dataclass

import numpy as np

from .channel import PILOT_POWER_PER_ANTENNA, add_awgn
from .codebook import NUM_PMI, effective_gain

#: Spectral efficiency per 4-bit CQI index 1..15 (TS 38.214 Table 5.2.2.1-2).
CQI_EFFICIENCY = np.array([
    0.1523, 0.2344, 0.3770, 0.6016, 0.8770,
    1.1758, 1.4766, 1.9141, 2.4063, 2.7305,
    3.3223, 3.9023, 4.5234, 5.1152, 5.5547,
])

#: SNR back-off applied before comparing Shannon capacity to CQI efficiency.
CQI_GAP_DB = 3.0


@dataclass(frozen=True)
class CsiReport:
    """Per-UE feedback triple."""

    ue_id: int
    cqi: int
    ri: int
    pmi: int

    def __post_init__(self):
        if self.ri != 1:
            raise ValueError("only single-layer reports are supported (ri=1)")
        if not 0 <= self.cqi <= 15:
            raise ValueError(f"cqi out of range: {self.cqi}")
        if not 0 <= self.pmi < NUM_PMI:
            raise ValueError(f"pmi out of range: {self.pmi}")


@dataclass(frozen=True)
class PilotBlock:
    """Known pilot sequence with its per-RE transmit antenna assignment."""

    symbols: np.ndarray  # shape (length,), modulus sqrt(1/2) each
    antenna: np.ndarray  # shape (length,), 0 or 1, interleaved

    @property
    def length(self):
        return len(self.symbols)


def generate_csirs(seed, length):
    """Deterministic QPSK pilot block of `length` REs, antennas interleaved.

    Each pilot has power 1/2 (the per-antenna pilot power convention);
    antenna 0 owns even REs, antenna 1 odd REs.
    """
    if length < 1:
        raise ValueError(f"pilot length must be >= 1, got {length}")
    rng = np.random.default_rng(seed)
    phase = rng.integers(0, 4, size=length)
    symbols = np.sqrt(PILOT_POWER_PER_ANTENNA) * np.exp(1j * (np.pi / 4) * (2 * phase + 1))
    antenna = np.arange(length) % 2
    symbols.setflags(write=False)
    antenna.setflags(write=False)
    return PilotBlock(symbols=symbols, antenna=antenna)


def receive_pilots(pilots, h, noise, rng):
    """Pilot REs as seen by a UE: h_a * pilot on each RE, plus AWGN."""
    entries = getattr(h, "entries", h)
    rx = np.asarray(entries)[pilots.antenna] * pilots.symbols
    return add_awgn(rx, noise, rng)


def estimate_channel(rx, pilots):
    """Per-antenna least-squares channel estimate from received pilots."""
    rx = np.asarray(rx)
    if rx.shape != pilots.symbols.shape:
        raise ValueError("received samples not aligned with pilot block")
    estimate = np.empty(2, dtype=complex)
    for ant in (0, 1):
        mask = pilots.antenna == ant
        if not np.any(mask):
            raise ValueError(f"no pilot REs for antenna {ant}")
        estimate[ant] = np.mean(rx[mask] / pilots.symbols[mask])
    return estimate


def select_pmi(h_est):
    """Codebook index maximizing |h . w|; ties go to the lowest index."""
    gains = [effective_gain(h_est, pmi) for pmi in range(NUM_PMI)]
    return int(np.argmax(gains))


def compute_cqi(post_precoding_sinr_db):
    """Map a post-precoding SINR (dB) to a 4-bit CQI.

    Largest CQI whose table efficiency is at most log2(1 + sinr/10^0.3);
    0 if the SINR supports none.
    """
    if not np.isfinite(post_precoding_sinr_db):
        if post_precoding_sinr_db > 0:
            return 15
        raise ValueError("SINR must be finite or +inf")
    sinr = 10.0 ** ((post_precoding_sinr_db - CQI_GAP_DB) / 10.0)
    efficiency = np.log2(1.0 + sinr)
    return int(np.searchsorted(CQI_EFFICIENCY, efficiency, side="right"))


def build_report(ue_id, h_est, noise):
    """Full CSI report: best PMI, rank 1, CQI from the post-precoding SINR."""
    pmi = select_pmi(h_est)
    gain = effective_gain(h_est, pmi)
    if noise.variance == 0.0:
        sinr_db = np.inf
    else:
        sinr = gain**2 / noise.variance
        sinr_db = 10.0 * np.log10(sinr) if sinr > 0 else -np.inf
        if not np.isfinite(sinr_db):
            sinr_db = -400.0
    cqi = compute_cqi(sinr_db)
    return CsiReport(ue_id=int(ue_id), cqi=cqi, ri=1, pmi=pmi)
