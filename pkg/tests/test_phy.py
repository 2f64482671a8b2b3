import numpy as np
import pytest

from mumimosim.channel import NoiseSpec, ideal_channels
from mumimosim.mcs import McsEntry, mcs_lookup
from mumimosim.phy import (
    decide_block_error,
    equalize_demap,
    hard_demap,
    modulate,
    precode_superpose,
    receive,
    threshold_block_error,
)
from mumimosim.scheduler import AllocMode, Allocation

SQRT_HALF = np.sqrt(0.5)

MU_ALLOC = Allocation(
    ue_ids=(1, 2), start_rb=0, num_rb=106, mcs_index=10,
    mode=AllocMode.MU_MIMO, power_coeffs=(SQRT_HALF, SQRT_HALF),
    pmi_per_ue=(3, 1),
)

SU_ALLOC = Allocation(
    ue_ids=(1,), start_rb=0, num_rb=106, mcs_index=10,
    mode=AllocMode.SINGLE_USER, power_coeffs=(1.0,), pmi_per_ue=(3,),
)

NO_NOISE = NoiseSpec(snr_db=0.0, variance=0.0)


def test_qpsk_gray_map():
    sym = modulate([0, 0], 2)
    assert sym[0] == pytest.approx((1 + 1j) / np.sqrt(2))
    sym = modulate([1, 1], 2)
    assert sym[0] == pytest.approx((-1 - 1j) / np.sqrt(2))


@pytest.mark.parametrize("qm", [2, 4, 6])
def test_constellation_unit_energy(qm):
    n_points = 2**qm
    bits = np.array(
        [[(i >> (qm - 1 - k)) & 1 for k in range(qm)] for i in range(n_points)]
    ).reshape(-1)
    symbols = modulate(bits, qm)
    assert np.mean(np.abs(symbols) ** 2) == pytest.approx(1.0, abs=1e-12)
    # all constellation points distinct
    assert len(np.unique(np.round(symbols, 9))) == n_points


@pytest.mark.parametrize("qm", [2, 4, 6])
def test_modulate_demap_round_trip(qm):
    rng = np.random.default_rng(qm)
    bits = rng.integers(0, 2, size=qm * 1000, dtype=np.int8)
    np.testing.assert_array_equal(hard_demap(modulate(bits, qm), qm), bits)


def test_modulate_rejects_bad_length():
    with pytest.raises(ValueError):
        modulate([0, 1, 0], 2)
    with pytest.raises(ValueError):
        modulate([0] * 8, 3)


def test_superposition_ideal_cancellation():
    # x1 = x2 = 1 with w^3 / w^1: antenna sums collapse to [1, 0]
    s = precode_superpose(1.0, 1.0, MU_ALLOC)
    np.testing.assert_allclose(s[0], [1.0, 0.0], atol=1e-12)


def test_superposition_single_user_term():
    s = precode_superpose(1.0, None, SU_ALLOC)
    np.testing.assert_allclose(s[0], np.array([1.0, -1.0j]) / np.sqrt(2), atol=1e-12)


def test_superposition_argument_validation():
    with pytest.raises(ValueError):
        precode_superpose(1.0, 1.0, SU_ALLOC)
    with pytest.raises(ValueError):
        precode_superpose(1.0, None, MU_ALLOC)


@pytest.mark.parametrize("alloc", [MU_ALLOC, SU_ALLOC])
def test_per_re_power_conservation(alloc):
    rng = np.random.default_rng(8)
    n = 200_000
    x1 = modulate(rng.integers(0, 2, 2 * n, dtype=np.int8), 2)
    x2 = modulate(rng.integers(0, 2, 2 * n, dtype=np.int8), 2)
    s = precode_superpose(x1, x2 if alloc.mode is AllocMode.MU_MIMO else None, alloc)
    mean_power = np.mean(np.sum(np.abs(s) ** 2, axis=1))
    assert mean_power == pytest.approx(1.0, abs=1e-9)


def test_receive_matches_closed_form():
    h1, h2 = ideal_channels()
    rng = np.random.default_rng(0)
    x1, x2 = 0.3 + 0.4j, -0.7 + 0.1j
    s = precode_superpose(x1, x2, MU_ALLOC)
    y1 = receive(h1, s, NO_NOISE, rng)
    y2 = receive(h2, s, NO_NOISE, rng)
    # each UE sees sqrt(2) * alpha * own symbol, zero cross term
    assert y1[0] == pytest.approx(np.sqrt(2) * SQRT_HALF * x1, abs=1e-12)
    assert y2[0] == pytest.approx(np.sqrt(2) * SQRT_HALF * x2, abs=1e-12)


def test_zero_noise_mu_mimo_decodes_clean():
    h1, h2 = ideal_channels()
    rng = np.random.default_rng(1)
    qm = 4
    bits1 = rng.integers(0, 2, qm * 500, dtype=np.int8)
    bits2 = rng.integers(0, 2, qm * 500, dtype=np.int8)
    s = precode_superpose(modulate(bits1, qm), modulate(bits2, qm), MU_ALLOC)
    for h, idx, bits in ((h1, 0, bits1), (h2, 1, bits2)):
        y = receive(h, s, NO_NOISE, rng)
        eq = equalize_demap(y, h, MU_ALLOC, idx, qm, 0.0)
        assert not eq.decode_failed
        np.testing.assert_array_equal(eq.bits, bits)


def test_su_and_mu_decisions_match_at_zero_noise():
    # same UE_1 symbols decode identically whether or not UE_2 is superposed
    h1, _ = ideal_channels()
    rng = np.random.default_rng(2)
    qm = 6
    bits1 = rng.integers(0, 2, qm * 300, dtype=np.int8)
    bits2 = rng.integers(0, 2, qm * 300, dtype=np.int8)
    x1 = modulate(bits1, qm)
    s_mu = precode_superpose(x1, modulate(bits2, qm), MU_ALLOC)
    s_su = precode_superpose(x1, None, SU_ALLOC)
    eq_mu = equalize_demap(receive(h1, s_mu, NO_NOISE, rng), h1, MU_ALLOC, 0, qm, 0.0)
    eq_su = equalize_demap(receive(h1, s_su, NO_NOISE, rng), h1, SU_ALLOC, 0, qm, 0.0)
    np.testing.assert_array_equal(eq_mu.bits, eq_su.bits)


def test_post_sinr_reference_value():
    # |g|^2 = |sqrt(1/2) * sqrt(2)|^2 = 1 over unit noise -> 0 dB
    h1, _ = ideal_channels()
    eq = equalize_demap(np.array([1.0 + 0j]), h1, MU_ALLOC, 0, 4, 1.0)
    assert eq.post_sinr_db == pytest.approx(0.0, abs=1e-9)


def test_non_orthogonal_pairing_lowers_sinr():
    # compare interference-free SINR against a hand-built non-orthogonal case
    h1, _ = ideal_channels()
    noise = 0.5
    eq_clean = equalize_demap(np.array([1.0 + 0j]), h1, MU_ALLOC, 0, 4, noise)
    # emulate PMI pair {3, 0}: cross precoder w^0 leaks |h1.w0|^2 / 2
    from mumimosim.codebook import get_precoder
    g_other = SQRT_HALF * (h1.entries @ get_precoder(0).entries)
    sinr_dirty = 1.0 / (noise + abs(g_other) ** 2)
    assert 10 * np.log10(sinr_dirty) < eq_clean.post_sinr_db


def test_equalize_flags_dead_channel():
    dead = np.array([0.0, 0.0])
    eq = equalize_demap(np.array([1.0 + 0j]), dead, SU_ALLOC, 0, 2, 1.0)
    assert eq.decode_failed
    assert len(eq.bits) == 2


def test_block_error_budget():
    half_rate = McsEntry(index=0, qm=2, code_rate_x1024=512)
    assert not decide_block_error(0, 1000, half_rate, 0.5)
    # budget = floor(0.5 * 0.5 * 1000) = 250
    assert not decide_block_error(250, 1000, half_rate, 0.5)
    assert decide_block_error(251, 1000, half_rate, 0.5)
    assert decide_block_error(300, 1000, half_rate, 0.5)


def test_block_error_budget_tightens_with_rate():
    def budget(index):
        mcs = mcs_lookup(index)
        return int(np.floor(0.5 * (1 - mcs.code_rate) * 10_000))

    # within one modulation band the code rate rises, the budget shrinks
    for band in (range(0, 10), range(10, 17), range(17, 29)):
        budgets = [budget(i) for i in band]
        assert all(a >= b for a, b in zip(budgets, budgets[1:]))


def test_block_error_input_validation():
    mcs = mcs_lookup(10)
    with pytest.raises(ValueError):
        decide_block_error(-1, 10, mcs)
    with pytest.raises(ValueError):
        decide_block_error(1, 10, mcs, epsilon=0.0)


def test_threshold_link_model():
    mcs = mcs_lookup(10)
    assert threshold_block_error(-10.0, mcs)
    assert not threshold_block_error(40.0, mcs)


def test_noise_increase_raises_ber():
    h1, _ = ideal_channels()
    rng = np.random.default_rng(3)
    qm = 4
    bits = rng.integers(0, 2, qm * 10_000, dtype=np.int8)
    x = modulate(bits, qm)
    s = precode_superpose(x, None, SU_ALLOC)

    def ber(variance):
        noise = NoiseSpec(snr_db=0.0, variance=variance)
        y = receive(h1, s, noise, np.random.default_rng(4))
        eq = equalize_demap(y, h1, SU_ALLOC, 0, qm, variance)
        return np.count_nonzero(eq.bits != bits) / bits.size

    assert ber(2.0) > ber(0.2)
