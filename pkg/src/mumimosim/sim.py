"""Experiment engine: Monte-Carlo drops over an SNR x MCS grid.

Per grid point, slots are simulated until the requested number of
transport blocks has been attempted per UE.  Each drop fixes the channel,
runs the CSI loop once, and then schedules/transmits slot by slot with
HARQ fallback.  Throughput is bits ACKed divided by elapsed slot time,
normalized to all-downlink slots.
"""

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import channel as chan
from . import csi, phy
from .codebook import effective_gain
from .mcs import DEFAULT_DATA_RE_PER_RB, MAX_MCS, TbsParams, compute_tbs, mcs_lookup
from .scheduler import (
    AllocMode,
    Policy,
    UeSchedState,
    on_harq_feedback,
    schedule_slot,
)

DEFAULT_MCS_LIST = tuple(range(10, 29))
DEFAULT_SNR_GRID = tuple(range(0, 42, 2))


@dataclass(frozen=True)
class SimConfig:
    """Full experiment configuration; everything needed for a reproducible run."""

    num_rb: int = 106
    scs_khz: int = 30
    slot_duration_s: float = 5e-4
    channel_mode: str = "ideal"            # "ideal" | "rayleigh" | "forced"
    forced_channels: tuple = None          # (h1 entries, h2 entries) if "forced"
    snr_grid_db: tuple = DEFAULT_SNR_GRID
    mcs_list: tuple = DEFAULT_MCS_LIST
    scheduler_mode: str = "mumimo"         # "mumimo" | "pf" | "su"
    tb_per_point: int = 200
    seed: int = 1
    epsilon: float = phy.DEFAULT_EPSILON
    data_re_per_rb: int = DEFAULT_DATA_RE_PER_RB
    link_model: str = "bdd"                # "bdd" | "threshold"
    margin_db: float = 0.0
    pilot_len: int = 32
    slots_per_drop: int = 20
    max_harq_attempts: int = 4

    def validate(self):
        if self.num_rb < 1:
            raise ValueError(f"num_rb must be >= 1, got {self.num_rb}")
        if self.scs_khz not in (15, 30, 60, 120):
            raise ValueError(f"unsupported subcarrier spacing {self.scs_khz} kHz")
        mu = int(math.log2(self.scs_khz // 15))
        expected_slot = 1e-3 / 2**mu
        if abs(self.slot_duration_s - expected_slot) > 1e-12:
            raise ValueError(
                f"slot_duration_s must be {expected_slot} for {self.scs_khz} kHz SCS"
            )
        if self.channel_mode not in ("ideal", "rayleigh", "forced"):
            raise ValueError(f"unknown channel_mode {self.channel_mode!r}")
        if self.channel_mode == "forced" and self.forced_channels is None:
            raise ValueError("forced channel_mode requires forced_channels")
        if self.scheduler_mode not in tuple(p.value for p in Policy):
            raise ValueError(f"unknown scheduler_mode {self.scheduler_mode!r}")
        if not self.snr_grid_db:
            raise ValueError("snr_grid_db must be non-empty")
        if any(not np.isfinite(s) for s in self.snr_grid_db):
            raise ValueError("snr grid values must be finite")
        if not self.mcs_list or any(not 0 <= m <= MAX_MCS for m in self.mcs_list):
            raise ValueError(f"mcs_list entries must be in 0..{MAX_MCS}")
        if self.tb_per_point < 1:
            raise ValueError("tb_per_point must be >= 1")
        if not 0 < self.epsilon <= 1:
            raise ValueError("epsilon must be in (0, 1]")
        if not 1 <= self.data_re_per_rb <= 168:
            raise ValueError("data_re_per_rb must be in 1..168")
        if self.link_model not in ("bdd", "threshold"):
            raise ValueError(f"unknown link_model {self.link_model!r}")
        if self.pilot_len < 2:
            raise ValueError("pilot_len must be >= 2 (one RE per antenna)")
        if self.slots_per_drop < 1:
            raise ValueError("slots_per_drop must be >= 1")
        if self.max_harq_attempts < 1:
            raise ValueError("max_harq_attempts must be >= 1")
        return self


@dataclass
class PointMetrics:
    """Aggregates for one (snr, mcs) grid point."""

    snr_db: float
    mcs_index: int
    mode: str
    slots: int = 0
    ue_blocks: dict = field(default_factory=dict)        # ue_id -> initial attempts
    ue_block_errors: dict = field(default_factory=dict)  # ue_id -> failed first attempts
    ue_bits_acked: dict = field(default_factory=dict)

    def bler(self, ue_id):
        n = self.ue_blocks.get(ue_id, 0)
        return self.ue_block_errors.get(ue_id, 0) / n if n else 0.0

    @property
    def bler_avg(self):
        blers = [self.bler(u) for u in sorted(self.ue_blocks)]
        return float(np.mean(blers)) if blers else 0.0

    @property
    def bler_max(self):
        blers = [self.bler(u) for u in sorted(self.ue_blocks)]
        return max(blers) if blers else 0.0

    @property
    def bits_acked(self):
        return sum(self.ue_bits_acked.values())

    def throughput_bps(self, slot_duration_s, ue_id=None):
        bits = self.bits_acked if ue_id is None else self.ue_bits_acked.get(ue_id, 0)
        return throughput_from_counters(bits, self.slots, slot_duration_s)


@dataclass(frozen=True)
class RunMetrics:
    """Sweep output: one PointMetrics per (snr, mcs) grid point, in grid order."""

    config: SimConfig
    points: tuple

    def point(self, snr_db, mcs_index):
        for p in self.points:
            if p.snr_db == snr_db and p.mcs_index == mcs_index:
                return p
        raise KeyError((snr_db, mcs_index))


def throughput_from_counters(bits_acked, slots_elapsed, slot_duration_s):
    """Delivered rate in bits/s from ACKed-bit and slot counters."""
    if slots_elapsed < 1:
        raise ValueError("slots_elapsed must be >= 1")
    return bits_acked / (slots_elapsed * slot_duration_s)


def _point_seed_sequence(cfg, snr_db, mcs_index):
    # Mix the SNR bit pattern so grid points get independent streams.
    snr_bits = int(np.float64(snr_db).view(np.int64))
    return np.random.SeedSequence([cfg.seed, int(mcs_index), snr_bits & 0x7FFFFFFF])


def _drop_channels(cfg, drop_seed):
    if cfg.channel_mode == "ideal":
        return chan.ideal_channels()
    if cfg.channel_mode == "forced":
        h1, h2 = cfg.forced_channels
        return (
            chan.ChannelVector(np.asarray(h1, dtype=complex), ue_id=1),
            chan.ChannelVector(np.asarray(h2, dtype=complex), ue_id=2),
        )
    return (
        chan.sample_rayleigh(drop_seed, ue_id=1),
        chan.sample_rayleigh(drop_seed, ue_id=2),
    )


def simulate_allocation(alloc, channels, noises, cfg, rng):
    """Transmit and decode one allocation; returns {ue_id: LinkResult}."""
    mcs = mcs_lookup(alloc.mcs_index)
    tbs = compute_tbs(TbsParams(alloc.num_rb, mcs, cfg.data_re_per_rb))
    n_sym = -(-tbs // mcs.qm)  # ceil
    pad = n_sym * mcs.qm - tbs

    tx_bits = {}
    tx_syms = []
    for ue_id in alloc.ue_ids:
        bits = rng.integers(0, 2, size=tbs, dtype=np.int8)
        tx_bits[ue_id] = bits
        padded = np.concatenate([bits, np.zeros(pad, dtype=np.int8)]) if pad else bits
        tx_syms.append(phy.modulate(padded, mcs.qm))

    x2 = tx_syms[1] if alloc.mode is AllocMode.MU_MIMO else None
    s = phy.precode_superpose(tx_syms[0], x2, alloc)

    results = {}
    for idx, ue_id in enumerate(alloc.ue_ids):
        h = channels[ue_id]
        noise = noises[ue_id]
        y = phy.receive(h, s, noise, rng)
        eq = phy.equalize_demap(y, h, alloc, idx, mcs.qm, noise.variance)
        if eq.decode_failed:
            bit_errors = tbs
        else:
            bit_errors = int(np.count_nonzero(eq.bits[:tbs] != tx_bits[ue_id]))
        if cfg.link_model == "threshold":
            block_error = phy.threshold_block_error(eq.post_sinr_db, mcs, cfg.margin_db)
        else:
            block_error = phy.decide_block_error(bit_errors, tbs, mcs, cfg.epsilon)
        results[ue_id] = phy.LinkResult(
            ue_id=ue_id,
            bit_errors=bit_errors,
            total_bits=tbs,
            block_error=block_error,
            post_sinr_db=eq.post_sinr_db,
        )
    return results


def _run_csi_loop(cfg, channels, noises, states, rng):
    """One CSI reporting round: pilots out, LS estimate, report back."""
    pilot_seed = int(rng.integers(0, 2**31))
    for state in states:
        h = channels[state.ue_id]
        noise = noises[state.ue_id]
        pilots = csi.generate_csirs(pilot_seed, cfg.pilot_len)
        rx = csi.receive_pilots(pilots, h, noise, rng)
        h_est = csi.estimate_channel(rx, pilots)
        report = csi.build_report(state.ue_id, h_est, noise)
        gain = effective_gain(h_est, report.pmi)
        sinr = np.inf if noise.variance == 0 else gain**2 / noise.variance
        state.last_report = report
        state.inst_rate = float(np.log2(1.0 + sinr)) if np.isfinite(sinr) else 30.0
    return states


def run_point(cfg, snr_db, mcs_index):
    """Monte-Carlo one (snr, mcs) grid point; deterministic given cfg.seed."""
    cfg.validate()
    rng = np.random.default_rng(_point_seed_sequence(cfg, snr_db, mcs_index))
    policy = Policy(cfg.scheduler_mode)

    states = [UeSchedState(ue_id=1), UeSchedState(ue_id=2)]
    metrics = PointMetrics(snr_db=float(snr_db), mcs_index=int(mcs_index),
                           mode=cfg.scheduler_mode)
    for s in states:
        metrics.ue_blocks[s.ue_id] = 0
        metrics.ue_block_errors[s.ue_id] = 0
        metrics.ue_bits_acked[s.ue_id] = 0

    retx_attempts = {s.ue_id: 0 for s in states}
    slot_idx = 0
    slots_this_drop = cfg.slots_per_drop + 1  # force drop init on first slot
    channels = noises = None

    def done():
        if any(s.pending_retx for s in states):
            return False
        return all(metrics.ue_blocks[u] >= cfg.tb_per_point for u in metrics.ue_blocks)

    while not done():
        if slots_this_drop >= cfg.slots_per_drop and not any(
            s.pending_retx for s in states
        ):
            drop_seed = int(rng.integers(0, 2**31))
            h1, h2 = _drop_channels(cfg, drop_seed)
            channels = {1: h1, 2: h2}
            noises = {u: chan.noise_from_snr(snr_db, channels[u]) for u in channels}
            _run_csi_loop(cfg, channels, noises, states, rng)
            slots_this_drop = 0

        allocs = schedule_slot(states, cfg.num_rb, mcs_index, slot_idx, policy)
        for alloc in allocs:
            tbs = compute_tbs(TbsParams(alloc.num_rb, mcs_lookup(alloc.mcs_index),
                                        cfg.data_re_per_rb))
            results = simulate_allocation(alloc, channels, noises, cfg, rng)
            for ue_id, result in results.items():
                i = next(k for k, s in enumerate(states) if s.ue_id == ue_id)
                is_retx = states[i].pending_retx
                ack = not result.block_error
                if not is_retx:
                    # BLER counts first attempts only
                    metrics.ue_blocks[ue_id] += 1
                    if not ack:
                        metrics.ue_block_errors[ue_id] += 1
                        retx_attempts[ue_id] = 1
                elif not ack:
                    retx_attempts[ue_id] += 1
                states[i] = on_harq_feedback(states[i], ack, tbs if ack else 0)
                if ack:
                    metrics.ue_bits_acked[ue_id] += tbs
                    retx_attempts[ue_id] = 0
                elif retx_attempts[ue_id] >= cfg.max_harq_attempts:
                    # out of attempts: drop the block, no bits delivered
                    states[i].pending_retx = False
                    retx_attempts[ue_id] = 0
                states[i].last_served_slot = slot_idx
        metrics.slots += 1
        slot_idx += 1
        slots_this_drop += 1

    return metrics


def _run_point_args(args):
    cfg, snr_db, mcs_index = args
    return run_point(cfg, snr_db, mcs_index)


def run_sweep(cfg, workers=1):
    """Run the full SNR x MCS grid; points are independent and mergeable."""
    cfg.validate()
    grid = [(cfg, snr, mcs) for snr in cfg.snr_grid_db for mcs in cfg.mcs_list]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            points = list(pool.map(_run_point_args, grid))
    else:
        points = [_run_point_args(a) for a in grid]
    return RunMetrics(config=cfg, points=tuple(points))
