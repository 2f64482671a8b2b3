"""Type I single-layer precoding codebook for a 2-TX-antenna transmitter.

Four rank-1 precoders (TS 38.214 Table 5.2.2.2.1-1), indexed by PMI 0..3:

    w_pmi = (1/sqrt(2)) * [1, phi_pmi]   with phi = 1, j, -1, -j

Indices {0,2} and {1,3} form the only orthogonal pairs, which is what
makes two-user spatial multiplexing possible with this codebook.
"""

from dataclasses import dataclass

import numpy as np

NUM_PMI = 4

#: Second-entry phase factor per PMI index.
_PHASES = np.array([1.0 + 0.0j, 1.0j, -1.0 + 0.0j, -1.0j])

#: Tolerance below which an analytically-zero inner product is treated as zero.
ZERO_TOL = 1e-12


@dataclass(frozen=True)
class PrecodingVector:
    """A unit-norm 2-entry precoding vector with its codebook index."""

    pmi_index: int
    entries: np.ndarray  # shape (2,), complex128, unit Euclidean norm


def _check_pmi(pmi):
    if not isinstance(pmi, (int, np.integer)) or not 0 <= pmi < NUM_PMI:
        raise ValueError(f"PMI must be an integer in 0..{NUM_PMI - 1}, got {pmi!r}")


def get_precoder(pmi):
    """Return the codebook precoder for the given PMI index.

    Raises ValueError for indices outside 0..3.
    """
    _check_pmi(pmi)
    w = np.array([1.0, _PHASES[pmi]]) / np.sqrt(2.0)
    w.setflags(write=False)
    return PrecodingVector(pmi_index=int(pmi), entries=w)


def is_orthogonal_pair(pmi_a, pmi_b):
    """True iff the two precoders are mutually orthogonal.

    Only {0,2} and {1,3} qualify.
    """
    _check_pmi(pmi_a)
    _check_pmi(pmi_b)
    inner = np.vdot(get_precoder(pmi_a).entries, get_precoder(pmi_b).entries)
    return bool(abs(inner) < ZERO_TOL)


def effective_gain(h, pmi):
    """Magnitude of the effective scalar channel |h . w_pmi|.

    `h` may be a ChannelVector or a length-2 complex array.
    """
    _check_pmi(pmi)
    entries = getattr(h, "entries", h)
    entries = np.asarray(entries, dtype=complex)
    if entries.shape != (2,):
        raise ValueError(f"channel must have 2 entries, got shape {entries.shape}")
    if not np.all(np.isfinite(entries.view(float))):
        raise ValueError("channel entries must be finite")
    return float(abs(entries @ get_precoder(pmi).entries))
