"""Link-level simulator for a 2x2 MU-MIMO downlink on the 5G NR PDSCH.

A 2-TX-antenna base station serves two single-antenna UEs on the same
resource blocks via orthogonal codebook precoders, driven by a CSI
feedback loop and a PMI-pairing scheduler with proportional-fair
fallback, evaluated by Monte-Carlo BLER / throughput sweeps.
"""

from .channel import ChannelVector, NoiseSpec, ideal_channels
from .codebook import PrecodingVector, effective_gain, get_precoder, is_orthogonal_pair
from .csi import CsiReport, build_report, select_pmi
from .mcs import McsEntry, TbsParams, compute_tbs, mcs_lookup
from .scheduler import Allocation, AllocMode, Policy, UeSchedState, schedule_slot
from .sim import RunMetrics, SimConfig, run_point, run_sweep

__all__ = [
    "Allocation",
    "AllocMode",
    "ChannelVector",
    "CsiReport",
    "McsEntry",
    "NoiseSpec",
    "Policy",
    "PrecodingVector",
    "RunMetrics",
    "SimConfig",
    "TbsParams",
    "UeSchedState",
    "build_report",
    "compute_tbs",
    "effective_gain",
    "get_precoder",
    "ideal_channels",
    "is_orthogonal_pair",
    "mcs_lookup",
    "run_point",
    "run_sweep",
    "schedule_slot",
    "select_pmi",
]

__version__ = "0.1.0"
