"""Downlink channel models and AWGN with pilot-referenced SNR normalization.

The noise level is defined relative to the receive power of the channel
state pilots: total pilot power 1 is split equally across the two TX
antennas (1/2 each), so a channel h sees a reference receive power of
||h||^2 / 2 and the per-sample noise variance at `snr_db` is
reference / 10^(snr_db/10).
"""

from dataclasses import dataclass

import numpy as np

#: Pilot power transmitted per antenna (total pilot power 1 over 2 antennas).
PILOT_POWER_PER_ANTENNA = 0.5


@dataclass(frozen=True)
class ChannelVector:
    """1x2 complex downlink channel row for one UE."""

    entries: np.ndarray  # shape (2,), complex128
    ue_id: int = 0

    def __post_init__(self):
        entries = np.asarray(self.entries, dtype=complex)
        if entries.shape != (2,):
            raise ValueError(f"channel must have 2 entries, got shape {entries.shape}")
        if not np.all(np.isfinite(entries.view(float))):
            raise ValueError("channel entries must be finite")
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)


@dataclass(frozen=True)
class NoiseSpec:
    """Complex AWGN level: SNR relative to pilot receive power, plus the
    resulting per-sample variance."""

    snr_db: float
    variance: float

    def __post_init__(self):
        if self.variance < 0:
            raise ValueError("noise variance must be non-negative")


def ideal_channels():
    """The fixed orthogonal channel pair h1=[1, j], h2=[1, -j]."""
    h1 = ChannelVector(np.array([1.0, 1.0j]), ue_id=1)
    h2 = ChannelVector(np.array([1.0, -1.0j]), ue_id=2)
    return h1, h2


def sample_rayleigh(seed, ue_id):
    """Draw a flat Rayleigh channel, i.i.d. CN(0,1) per antenna.

    The stream is derived from (seed, ue_id), so different UEs get
    statistically independent channels from the same master seed.
    """
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), int(ue_id)]))
    entries = (rng.standard_normal(2) + 1j * rng.standard_normal(2)) / np.sqrt(2.0)
    return ChannelVector(entries, ue_id=int(ue_id))


def apply_channel(h, s):
    """Noiseless receive sample(s): the inner product h . s.

    `s` has shape (2,) or (n, 2); returns a scalar or length-n array.
    """
    entries = getattr(h, "entries", h)
    return np.asarray(s) @ np.asarray(entries)


def add_awgn(y, noise, rng):
    """Add circularly-symmetric complex Gaussian noise of the given variance."""
    if noise.variance == 0.0:
        return y
    y = np.asarray(y)
    sigma = np.sqrt(noise.variance / 2.0)
    n = sigma * (rng.standard_normal(y.shape) + 1j * rng.standard_normal(y.shape))
    return y + n


def noise_from_snr(snr_db, h):
    """Noise variance for a UE at `snr_db` relative to its pilot receive power."""
    if not np.isfinite(snr_db):
        raise ValueError(f"snr_db must be finite, got {snr_db!r}")
    entries = getattr(h, "entries", h)
    reference_rx_power = PILOT_POWER_PER_ANTENNA * float(
        np.sum(np.abs(np.asarray(entries)) ** 2)
    )
    variance = reference_rx_power / 10.0 ** (snr_db / 10.0)
    return NoiseSpec(snr_db=float(snr_db), variance=variance)
