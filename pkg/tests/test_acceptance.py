"""Acceptance suite: one test per release criterion, each printing a
PASS/FAIL line (run with -s to see them).  The heavy SNR x MCS sweep is
shared between the frontier and monotonicity checks via a session fixture.
"""

import dataclasses
import itertools
import os

import numpy as np
import pytest

from mumimosim.channel import NoiseSpec, ideal_channels, noise_from_snr
from mumimosim.codebook import NUM_PMI, get_precoder, is_orthogonal_pair
from mumimosim.csi import (
    CsiReport,
    estimate_channel,
    generate_csirs,
    receive_pilots,
    select_pmi,
)
from mumimosim.cli import main as cli_main
from mumimosim.phy import modulate, precode_superpose
from mumimosim.scheduler import AllocMode, Allocation, UeSchedState, schedule_slot
from mumimosim.sim import SimConfig, run_point, run_sweep, simulate_allocation

SWEEP_MCS = (10, 16, 22, 28)
SWEEP_SNR = tuple(float(s) for s in range(0, 42, 2))
SQRT_HALF = np.sqrt(0.5)

_WORKERS = min(4, os.cpu_count() or 1)


def report(num, ok, text):
    print(f"\nACCEPTANCE {num:02d} {'PASS' if ok else 'FAIL'}: {text}")
    assert ok, text


@pytest.fixture(scope="session")
def sweep_metrics():
    cfg = SimConfig(tb_per_point=1000, snr_grid_db=SWEEP_SNR, mcs_list=SWEEP_MCS)
    return run_sweep(cfg, workers=_WORKERS)


def test_criterion_01_codebook_exactness():
    norms_ok = all(
        abs(np.linalg.norm(get_precoder(p).entries) - 1.0) < 1e-12
        for p in range(NUM_PMI)
    )
    pairs = {
        frozenset((a, b))
        for a, b in itertools.combinations(range(NUM_PMI), 2)
        if is_orthogonal_pair(a, b)
    }
    pairs_ok = pairs == {frozenset((0, 2)), frozenset((1, 3))}
    report(1, norms_ok and pairs_ok,
           "precoders unit-norm within 1e-12; orthogonal pairs are {0,2},{1,3}")


def test_criterion_02_ideal_channel_csi():
    h1, h2 = ideal_channels()
    rng = np.random.default_rng(2024)
    trials = 1000
    hits = 0
    for h, expected in ((h1, 3), (h2, 1)):
        noise = noise_from_snr(30.0, h)
        pilots = generate_csirs(17, 32)
        hits += sum(
            select_pmi(estimate_channel(receive_pilots(pilots, h, noise, rng), pilots))
            == expected
            for _ in range(trials)
        )
    report(2, hits == 2 * trials,
           f"PMIs 3/1 reported in {hits}/{2 * trials} trials at 30 dB SNR")


def test_criterion_03_zero_interference_identity():
    h1, h2 = ideal_channels()
    channels = {1: h1, 2: h2}
    noises = {u: NoiseSpec(snr_db=0.0, variance=0.0) for u in channels}
    cfg = SimConfig()
    rng = np.random.default_rng(3)
    clean = True
    for mcs_index in range(10, 29):
        alloc = Allocation(
            ue_ids=(1, 2), start_rb=0, num_rb=cfg.num_rb, mcs_index=mcs_index,
            mode=AllocMode.MU_MIMO, power_coeffs=(SQRT_HALF, SQRT_HALF),
            pmi_per_ue=(3, 1),
        )
        for _ in range(3):
            results = simulate_allocation(alloc, channels, noises, cfg, rng)
            clean &= all(r.bit_errors == 0 and not r.block_error
                         for r in results.values())
    report(3, clean, "zero-noise MU-MIMO decodes error-free at every MCS 10..28")


def test_criterion_04_power_conservation():
    rng = np.random.default_rng(4)
    n = 150_000
    mu_alloc = Allocation(
        ue_ids=(1, 2), start_rb=0, num_rb=106, mcs_index=10,
        mode=AllocMode.MU_MIMO, power_coeffs=(SQRT_HALF, SQRT_HALF),
        pmi_per_ue=(3, 1),
    )
    su_alloc = Allocation(
        ue_ids=(1,), start_rb=0, num_rb=106, mcs_index=10,
        mode=AllocMode.SINGLE_USER, power_coeffs=(1.0,), pmi_per_ue=(3,),
    )
    qm = 4
    x1 = modulate(rng.integers(0, 2, qm * n, dtype=np.int8), qm)
    x2 = modulate(rng.integers(0, 2, qm * n, dtype=np.int8), qm)
    mu_power = np.mean(np.sum(np.abs(precode_superpose(x1, x2, mu_alloc)) ** 2, axis=1))
    su_power = np.mean(np.sum(np.abs(precode_superpose(x1, None, su_alloc)) ** 2, axis=1))
    ok = abs(mu_power - 1.0) < 1e-3 and abs(su_power - 1.0) < 1e-3
    report(4, ok, f"per-RE TX power MU={mu_power:.6f}, SU={su_power:.6f} (1 +- 1e-3)")


def test_criterion_05_throughput_doubling():
    cfg = SimConfig(tb_per_point=1000, snr_grid_db=(20.0,), mcs_list=(10,))
    mu = run_point(cfg, 20.0, 10)
    su = run_point(dataclasses.replace(cfg, scheduler_mode="su"), 20.0, 10)
    blers_ok = mu.bler_max < 0.01 and su.bler_max < 0.01
    ratio = mu.throughput_bps(cfg.slot_duration_s) / su.throughput_bps(cfg.slot_duration_s)
    ok = blers_ok and abs(ratio - 2.0) <= 0.1
    report(5, ok, f"MU/SU throughput ratio {ratio:.4f} at BLER<0.01 (target 2.0 +- 5%)")


def test_criterion_06_reliability_frontier(sweep_metrics):
    frontiers = {}
    for mcs in SWEEP_MCS:
        frontier = None
        for snr in SWEEP_SNR:
            if sweep_metrics.point(snr, mcs).bler_max < 0.1:
                frontier = snr
                break
        frontiers[mcs] = frontier
    exists = all(f is not None for f in frontiers.values())
    ordered = exists and all(
        frontiers[a] <= frontiers[b] for a, b in zip(SWEEP_MCS, SWEEP_MCS[1:])
    )
    report(6, exists and ordered, f"BLER<0.1 frontier SNRs by MCS: {frontiers}")


def test_criterion_07_bler_monotonicity(sweep_metrics):
    violations = []
    step = 3  # +6 dB on the 2 dB grid
    for mcs in SWEEP_MCS:
        for i, snr in enumerate(SWEEP_SNR[:-step]):
            lo = sweep_metrics.point(snr, mcs)
            hi = sweep_metrics.point(SWEEP_SNR[i + step], mcs)
            for ue in (1, 2):
                if hi.bler(ue) > lo.bler(ue) + 0.03:
                    violations.append((mcs, snr, ue))
    report(7, not violations,
           f"per-UE BLER(snr+6dB) <= BLER(snr)+0.03 everywhere; violations={violations}")


def test_criterion_08_scheduler_exhaustive():
    ok = True
    for pmi1, pmi2 in itertools.product(range(NUM_PMI), repeat=2):
        for retx1, retx2 in itertools.product((False, True), repeat=2):
            states = [
                UeSchedState(ue_id=1, pending_retx=retx1,
                             last_report=CsiReport(1, 10, 1, pmi1)),
                UeSchedState(ue_id=2, pending_retx=retx2,
                             last_report=CsiReport(2, 10, 1, pmi2)),
            ]
            allocs = schedule_slot(states, 106, 13)
            should_pair = (
                {pmi1, pmi2} in ({0, 2}, {1, 3}) and not retx1 and not retx2
            )
            mu_allocs = [a for a in allocs if a.mode is AllocMode.MU_MIMO]
            ok &= bool(mu_allocs) == should_pair
            for a in mu_allocs:
                ok &= a.mcs_index == 13 and a.num_rb == 106 and a.start_rb == 0
                ok &= abs(sum(c**2 for c in a.power_coeffs) - 1.0) < 1e-12
    report(8, ok, "MU pairing iff orthogonal PMIs and no pending retransmission")


def test_criterion_09_determinism(tmp_path):
    args = ["--preset", "bler-vs-snr", "--snr", "10:30:10", "--mcs", "10,16",
            "--tb-per-point", "50"]
    outputs = []
    for name, workers in (("a.csv", 1), ("b.csv", 1), ("c.csv", 3)):
        out = tmp_path / name
        code = cli_main(args + ["--out", str(out), "--workers", str(workers)])
        assert code == 0
        outputs.append(out.read_bytes())
    ok = outputs[0] == outputs[1] == outputs[2]
    report(9, ok, "repeat runs and different worker counts give byte-identical CSV")


def test_criterion_10_channel_estimation_mse():
    h1, _ = ideal_channels()
    noise = noise_from_snr(60.0, h1)
    pilots = generate_csirs(10, 32)
    rng = np.random.default_rng(10)
    errs = [
        np.sum(np.abs(estimate_channel(receive_pilots(pilots, h1, noise, rng), pilots)
                      - h1.entries) ** 2)
        for _ in range(1000)
    ]
    mse = float(np.mean(errs))
    report(10, mse < 1e-3, f"LS estimate MSE {mse:.2e} < 1e-3 at 60 dB, 32 pilots")
