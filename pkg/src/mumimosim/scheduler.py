"""Per-slot downlink scheduling.

Policy: if two UEs report orthogonal PMIs and neither is waiting on a
retransmission, they are paired for MU-MIMO on the full band with equal
power split and UE_2's MCS forced equal to UE_1's.  Otherwise a single
UE gets the whole band, chosen by proportional fairness (or round robin
in the plain single-user policy).  A NACKed transport block is re-sent
as a fresh single-user transmission; retransmission slots never carry
MU-MIMO allocations.
"""

import enum
from dataclasses import dataclass, field, replace

import numpy as np

from .codebook import is_orthogonal_pair

#: Exponential-average smoothing factor for the PF throughput tracker.
PF_BETA = 0.05

#: Floor on the tracked average rate, avoids divide-by-zero at startup.
RATE_FLOOR = 1e-6

SQRT_HALF = float(np.sqrt(0.5))


class AllocMode(enum.Enum):
    SINGLE_USER = "single_user"
    MU_MIMO = "mu_mimo"


class Policy(enum.Enum):
    MU_MIMO = "mumimo"          # pair on orthogonal PMIs, PF fallback
    PROPORTIONAL_FAIR = "pf"    # always single-user PF
    SINGLE_USER = "su"          # round-robin single user


@dataclass(frozen=True)
class Allocation:
    """Scheduler output for one grant."""

    ue_ids: tuple
    start_rb: int
    num_rb: int
    mcs_index: int
    mode: AllocMode
    power_coeffs: tuple
    pmi_per_ue: tuple

    def __post_init__(self):
        total = sum(a**2 for a in self.power_coeffs)
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"power coefficients must satisfy sum(a^2)=1, got {total}")
        if self.mode is AllocMode.MU_MIMO:
            if len(self.ue_ids) != 2:
                raise ValueError("MU-MIMO allocation needs exactly 2 UEs")
            if not is_orthogonal_pair(*self.pmi_per_ue):
                raise ValueError("MU-MIMO allocation requires orthogonal PMIs")
        elif len(self.ue_ids) != 1:
            raise ValueError("single-user allocation needs exactly 1 UE")


@dataclass
class UeSchedState:
    """Per-UE scheduler bookkeeping."""

    ue_id: int
    avg_rate: float = RATE_FLOOR       # bits/slot, exponentially averaged
    pending_retx: bool = False
    last_report: object = None         # CsiReport
    buffered_bytes: int = 10**9        # full-buffer traffic by default
    inst_rate: float = 1.0             # achievable bits/symbol at last report
    last_served_slot: int = -1


def try_mu_pairing(states):
    """First UE pair (by ue_id) with orthogonal PMIs and no pending retx."""
    candidates = sorted(
        (s for s in states
         if s.last_report is not None and not s.pending_retx and s.buffered_bytes > 0),
        key=lambda s: s.ue_id,
    )
    for i, a in enumerate(candidates):
        for b in candidates[i + 1:]:
            if is_orthogonal_pair(a.last_report.pmi, b.last_report.pmi):
                return a, b
    return None


def pf_schedule(states, total_rb, mcs_index, slot_idx=0):
    """Whole-band single-user grant to the UE maximizing inst_rate / avg_rate.

    Ties go to the least recently served UE, then the lowest ue_id.
    """
    eligible = [s for s in states if s.buffered_bytes > 0]
    if not eligible:
        return []
    best = max(
        eligible,
        key=lambda s: (
            s.inst_rate / max(s.avg_rate, RATE_FLOOR),
            -s.last_served_slot,
            -s.ue_id,
        ),
    )
    return [_single_user_alloc(best, total_rb, mcs_index)]


def _round_robin(states, total_rb, mcs_index):
    eligible = [s for s in states if s.buffered_bytes > 0]
    if not eligible:
        return []
    best = min(eligible, key=lambda s: (s.last_served_slot, s.ue_id))
    return [_single_user_alloc(best, total_rb, mcs_index)]


def _single_user_alloc(state, total_rb, mcs_index):
    pmi = state.last_report.pmi if state.last_report is not None else 0
    return Allocation(
        ue_ids=(state.ue_id,),
        start_rb=0,
        num_rb=total_rb,
        mcs_index=mcs_index,
        mode=AllocMode.SINGLE_USER,
        power_coeffs=(1.0,),
        pmi_per_ue=(pmi,),
    )


def schedule_slot(states, total_rb, mcs_index, slot_idx=0, policy=Policy.MU_MIMO):
    """Build this slot's allocation list.

    Retransmissions take priority and are always single-user.  With the
    MU-MIMO policy, a valid orthogonal pairing yields one shared full-band
    allocation with equal power split and a common MCS.
    """
    if total_rb < 1:
        raise ValueError(f"total_rb must be >= 1, got {total_rb}")
    if not states:
        raise ValueError("no UEs to schedule")

    retx = sorted((s for s in states if s.pending_retx), key=lambda s: s.ue_id)
    if retx:
        return [_single_user_alloc(retx[0], total_rb, mcs_index)]

    if policy is Policy.MU_MIMO:
        pair = try_mu_pairing(states)
        if pair is not None:
            a, b = pair
            return [Allocation(
                ue_ids=(a.ue_id, b.ue_id),
                start_rb=0,
                num_rb=total_rb,
                mcs_index=mcs_index,
                mode=AllocMode.MU_MIMO,
                power_coeffs=(SQRT_HALF, SQRT_HALF),
                pmi_per_ue=(a.last_report.pmi, b.last_report.pmi),
            )]
        return pf_schedule(states, total_rb, mcs_index, slot_idx)

    if policy is Policy.SINGLE_USER:
        return _round_robin(states, total_rb, mcs_index)
    return pf_schedule(states, total_rb, mcs_index, slot_idx)


def on_harq_feedback(state, ack, delivered_bits=0):
    """Updated scheduler state after an ACK/NACK.

    ACK clears the retransmission flag and credits the delivered bits to
    the PF average; NACK sets the flag and credits zero.
    """
    bits = delivered_bits if ack else 0
    avg = (1.0 - PF_BETA) * state.avg_rate + PF_BETA * bits
    return replace(state, pending_retx=not ack, avg_rate=max(avg, RATE_FLOOR))
