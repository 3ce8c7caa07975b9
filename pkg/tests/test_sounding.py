import math

import numpy as np
import pytest

from beamspace_sd.numerics import DimensionError
from beamspace_sd.sounding import (Combiner, Measurement, SoundingConfig,
                                   effective_noise_power, make_combiner,
                                   mutual_coherence, simulate_measurement,
                                   snr_to_noise_power)


def test_make_combiner_shape_and_entries():
    comb = make_combiner(np.random.default_rng(0), 32, 24, block_size=8)
    assert comb.matrix.shape == (24, 32)
    assert comb.n_blocks == 3
    assert comb.block_size == 8
    mags = np.unique(np.abs(comb.matrix))
    assert mags.size == 1
    assert mags[0] == pytest.approx(1 / math.sqrt(24), abs=1e-15)
    assert np.all(comb.matrix.imag == 0.0)


def test_make_combiner_row_norms():
    # every entry has the same magnitude, so row power is N/Q up to rounding
    comb = make_combiner(np.random.default_rng(1), 256, 96, block_size=16)
    assert np.unique(np.abs(comb.matrix)).size == 1
    norms = np.sum(np.abs(comb.matrix) ** 2, axis=1)
    assert np.max(np.abs(norms * 96 / 256 - 1.0)) <= 1e-12


def test_make_combiner_default_single_block():
    comb = make_combiner(np.random.default_rng(2), 16, 12)
    assert comb.n_blocks == 1
    assert comb.block_size == 12


def test_make_combiner_rejects_bad_blocks():
    with pytest.raises(DimensionError):
        make_combiner(np.random.default_rng(0), 16, 10, block_size=4)
    with pytest.raises(DimensionError):
        make_combiner(np.random.default_rng(0), 0, 10)


def test_make_combiner_deterministic_ident():
    a = make_combiner(np.random.default_rng(42), 32, 16)
    b = make_combiner(np.random.default_rng(42), 32, 16)
    c = make_combiner(np.random.default_rng(43), 32, 16)
    assert np.array_equal(a.matrix, b.matrix)
    assert a.ident == b.ident
    assert a.ident != c.ident


def test_blocks_iteration_covers_matrix():
    comb = make_combiner(np.random.default_rng(3), 16, 12, block_size=4)
    stacked = np.vstack(list(comb.blocks()))
    assert np.array_equal(stacked, comb.matrix)


def test_mutual_coherence_frozen_draw_is_moderate():
    comb = make_combiner(np.random.default_rng([303, 0]), 256, 96, 16)
    mu = mutual_coherence(comb)
    assert 0.0 < mu < 0.5


def test_sounding_config_derives_q():
    cfg = SoundingConfig(n_antennas=64, block_size=8, n_blocks=4,
                         uplink_noise_power=0.1)
    assert cfg.n_measurements == 32
    with pytest.raises(ValueError):
        SoundingConfig(n_antennas=64, block_size=8, n_blocks=4,
                       uplink_noise_power=0.0)


def test_noiseless_measurement_is_exact_and_skips_rng():
    comb = make_combiner(np.random.default_rng(4), 32, 16, 8)
    h = np.random.default_rng(5).standard_normal(32) * (1 + 0j)
    rng = np.random.default_rng(6)
    before = rng.bit_generator.state
    meas = simulate_measurement(h, comb, 0.0, rng)
    assert rng.bit_generator.state == before
    assert np.allclose(meas.z, comb.matrix @ h, atol=1e-14)
    assert meas.combiner_ref == comb.ident


def test_noisy_measurement_requires_rng():
    comb = make_combiner(np.random.default_rng(7), 16, 8)
    h = np.ones(16, dtype=np.complex128)
    with pytest.raises(ValueError):
        simulate_measurement(h, comb, 0.1)
    with pytest.raises(ValueError):
        simulate_measurement(h, comb, -0.1, np.random.default_rng(0))


def test_measurement_dimension_check():
    comb = make_combiner(np.random.default_rng(8), 16, 8)
    with pytest.raises(DimensionError):
        simulate_measurement(np.ones(17, dtype=np.complex128), comb, 0.0)


def test_noise_statistics_match_combined_model():
    """Noise realized through the combiner must show per-entry power
    sigma^2 N/Q, the per-block covariance sigma^2 W_m W_m^H, independence
    across blocks, and properness (vanishing pseudo-covariance)."""
    n, q, k = 256, 96, 16
    sigma2 = 0.5
    comb = make_combiner(np.random.default_rng([303, 0]), n, q, k)
    rng = np.random.default_rng([303, 1])
    h0 = np.zeros(n, dtype=np.complex128)
    trials = 2000
    samples = np.empty((trials, q), dtype=np.complex128)
    for t in range(trials):
        samples[t] = simulate_measurement(h0, comb, sigma2, rng).z

    target = effective_noise_power(sigma2, n, q)
    assert target == pytest.approx(sigma2 * n / q)
    emp = np.mean(np.abs(samples) ** 2, axis=0)
    assert abs(emp.mean() - target) / target < 0.02
    assert np.max(np.abs(emp - target)) / target < 0.10

    b0 = samples[:, :k]
    w0 = comb.matrix[:k]
    want_cov = sigma2 * (w0 @ w0.conj().T)
    got_cov = (b0.conj().T @ b0) / trials
    scale = np.linalg.norm(want_cov)
    assert np.linalg.norm(got_cov - want_cov) / scale < 0.15

    b1 = samples[:, k:2 * k]
    cross = (b0.conj().T @ b1) / trials
    assert np.linalg.norm(cross) / scale < 0.15

    pseudo = (b0.T @ b0) / trials
    assert np.linalg.norm(pseudo) / scale < 0.15


def test_snr_to_noise_power_values():
    assert snr_to_noise_power(0.0) == pytest.approx(1.0)
    assert snr_to_noise_power(10.0) == pytest.approx(0.1)
    assert snr_to_noise_power(20.0) == pytest.approx(0.01)
    assert snr_to_noise_power(-10.0) == pytest.approx(10.0)


def test_measurement_accepts_beamspace_channel_objects():
    class Shim:
        vector = np.ones(8, dtype=np.complex128)

    comb = make_combiner(np.random.default_rng(9), 8, 4)
    meas = simulate_measurement(Shim(), comb, 0.0)
    assert isinstance(meas, Measurement)
    assert np.allclose(meas.z, comb.matrix.sum(axis=1))


def test_combiner_dataclass_direct_construction():
    m = np.full((4, 8), 0.5, dtype=np.complex128)
    comb = Combiner(matrix=m, n_blocks=2, ident="abc")
    assert comb.n_measurements == 4
    assert comb.n_antennas == 8
    assert comb.block_size == 2
