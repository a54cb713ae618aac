import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hpb.channel_model import (ChannelRealization, SystemConfig, assemble_bs_ris_channel,
                               assemble_ris_user_channel, laplace_offsets, path_loss,
                               sample_realization, ula_steering, ura_steering)

angles = st.floats(-2 * np.pi, 2 * np.pi, allow_nan=False)


# -- oracles ----------------------------------------------------------------

def ura_entry(elev, azim, L, delta, i, j):
    """Element (i, j) of the arrival response, i, j in [1-L/2, L/2]."""
    ux = math.sin(elev) * math.cos(azim)
    uy = math.sin(elev) * math.sin(azim)
    return (np.exp(-2j * np.pi * delta * ((i - 0.5) * ux + (j - 0.5) * uy)) / L)


def bs_ris_oracle(real, n, cfg):
    half = cfg.L // 2
    G = np.zeros((cfg.L ** 2, cfg.M), dtype=complex)
    for row, (i, j) in enumerate((i, j) for i in range(1 - half, half + 1)
                                 for j in range(1 - half, half + 1)):
        for m in range(cfg.M):
            acc = 0j
            for d in range(real.D):
                a = ura_entry(real.ris_aoa_elev[n, d], real.ris_aoa_azim[n, d],
                              cfg.L, cfg.delta, i, j)
                b_conj = np.exp(1j * np.pi * m * math.sin(real.bs_aod[n, d])) / math.sqrt(cfg.M)
                acc += real.alpha[n, d] * a * b_conj
            G[row, m] = acc
    return G


def ris_user_oracle(real, n, cfg):
    half = cfg.L // 2
    f = np.zeros(cfg.L ** 2, dtype=complex)
    for row, (i, j) in enumerate((i, j) for i in range(1 - half, half + 1)
                                 for j in range(1 - half, half + 1)):
        for k in range(real.K):
            f[row] += real.beta[n, k] * ura_entry(
                real.ris_aod_elev[n, k], real.ris_aod_azim[n, k], cfg.L, cfg.delta, i, j)
    return f


def single_path(alpha=1.0, beta=1.0, N=1, angles=(0.3, 1.1, 0.2, 0.5, 2.0)):
    ea, aa, bs, eu, au = angles
    full = lambda x: np.full((N, 1), x)
    return ChannelRealization(
        alpha=full(alpha + 0j), ris_aoa_elev=full(ea), ris_aoa_azim=full(aa), bs_aod=full(bs),
        beta=full(beta + 0j), ris_aod_elev=full(eu), ris_aod_azim=full(au))


# -- steering vectors -------------------------------------------------------

def test_ula_broadside_is_flat():
    np.testing.assert_allclose(ula_steering(0.0, 8), np.full(8, 1 / np.sqrt(8)))


def test_ula_thirty_degrees():
    m = np.arange(4)
    np.testing.assert_allclose(ula_steering(np.pi / 6, 4), 0.5 * np.exp(-1j * np.pi * m / 2),
                               atol=1e-15)


@given(angles, st.integers(1, 64))
def test_ula_unit_norm(angle, M):
    assert np.linalg.norm(ula_steering(angle, M)) == pytest.approx(1.0, abs=1e-12)


def test_ura_zero_elevation_is_flat():
    np.testing.assert_allclose(ura_steering(0.0, 1.234, 4, 0.5), np.full(16, 0.25))


def test_ura_grazing_two_by_two():
    ax = np.array([np.exp(1j * np.pi / 2), np.exp(-1j * np.pi / 2)]) / np.sqrt(2)
    ay = np.ones(2) / np.sqrt(2)
    np.testing.assert_allclose(ura_steering(np.pi / 2, 0.0, 2, 0.5), np.kron(ax, ay),
                               atol=1e-15)


@given(angles, angles, st.integers(1, 16), st.floats(0.05, 2.0))
def test_ura_unit_norm(elev, azim, half, delta):
    a = ura_steering(elev, azim, 2 * half, delta)
    assert a.shape == (4 * half * half,)
    assert np.linalg.norm(a) == pytest.approx(1.0, abs=1e-12)


def test_ura_matches_entrywise_formula():
    L, delta = 6, 0.4
    a = ura_steering(0.7, 2.2, L, delta)
    half = L // 2
    expected = [ura_entry(0.7, 2.2, L, delta, i, j)
                for i in range(1 - half, half + 1) for j in range(1 - half, half + 1)]
    np.testing.assert_allclose(a, expected, atol=1e-15)


def test_ura_rejects_odd_side():
    with pytest.raises(ValueError):
        ura_steering(0.1, 0.2, 3, 0.5)


# -- configuration ----------------------------------------------------------

def test_config_validation():
    with pytest.raises(ValueError):
        SystemConfig(L=5)
    with pytest.raises(ValueError):
        SystemConfig(p=0)
    with pytest.raises(ValueError):
        SystemConfig(N=2, d1=(50.0, 50.0, 50.0))
    with pytest.raises(ValueError):
        SystemConfig(sigma_as=-0.1)
    assert SystemConfig(N=3).d1 == (50.0, 50.0, 50.0)


@pytest.mark.parametrize("delta, qbar", [(0.5, 1.0), (0.25, 2.0), (0.1, 2.0), (1.0, 0.5)])
def test_qbar(delta, qbar):
    assert SystemConfig(delta=delta).qbar == qbar


def test_replace_rebroadcasts_per_ris_fields():
    cfg = SystemConfig(N=1).replace(N=4)
    assert cfg.d2 == (50.0,) * 4 and len(cfg.g_ris) == 4


# -- sampling ---------------------------------------------------------------

def test_rejects_zero_paths():
    cfg = SystemConfig()
    object.__setattr__(cfg, "P", 0)
    with pytest.raises(ValueError):
        sample_realization(cfg, np.random.default_rng(0))


def test_single_path_variance_is_one():
    real = sample_realization(SystemConfig(N=3, P=1), np.random.default_rng(1))
    np.testing.assert_array_equal(real.alpha_var, 1.0)
    np.testing.assert_array_equal(real.beta_var, 1.0)


@pytest.mark.parametrize("P", [2, 5, 8])
def test_variances_sum_to_one(P):
    real = sample_realization(SystemConfig(N=4, P=P), np.random.default_rng(P))
    np.testing.assert_allclose(real.alpha_var.sum(axis=1), 1.0, rtol=0, atol=1e-15)
    np.testing.assert_allclose(real.beta_var.sum(axis=1), 1.0, rtol=0, atol=1e-15)


def test_laplacian_offset_spread():
    sigma = np.deg2rad(10.0)
    x = laplace_offsets(np.random.default_rng(3), 100_000, sigma)
    assert abs(x.std() / sigma - 1) < 0.05
    # Laplacian kurtosis is 6 (excess 3); a Gaussian would give 3
    assert 5.0 < np.mean(x ** 4) / np.mean(x ** 2) ** 2 < 7.0


def test_angle_ranges():
    cfg = SystemConfig(N=50, P=8, sigma_as=np.deg2rad(40))
    real = sample_realization(cfg, np.random.default_rng(11))
    for elev in (real.ris_aoa_elev, real.ris_aod_elev):
        assert elev.min() >= 0 and elev.max() < np.pi / 2
    for azim in (real.ris_aoa_azim, real.ris_aod_azim):
        assert azim.min() >= 0 and azim.max() < 2 * np.pi
    assert np.abs(real.bs_aod).max() < np.pi / 2


def test_sampling_is_deterministic():
    cfg = SystemConfig(N=2, P=4)
    a = sample_realization(cfg, np.random.default_rng(99))
    b = sample_realization(cfg, np.random.default_rng(99))
    for name in ("alpha", "beta", "ris_aoa_elev", "ris_aod_azim", "bs_aod"):
        np.testing.assert_array_equal(getattr(a, name), getattr(b, name))


def test_surfaces_are_prefix_stable():
    small = sample_realization(SystemConfig(N=2, P=4), np.random.default_rng(5))
    big = sample_realization(SystemConfig(N=4, P=4), np.random.default_rng(5))
    np.testing.assert_array_equal(big.truncated(2).alpha, small.alpha)
    np.testing.assert_array_equal(big.truncated(2).ris_aod_elev, small.ris_aod_elev)


def test_mean_link_power_is_one():
    cfg = SystemConfig(N=1, P=8)
    rng = np.random.default_rng(2024)
    power = [np.sum(np.abs(sample_realization(cfg, rng).alpha) ** 2) for _ in range(10_000)]
    assert abs(np.mean(power) - 1) < 0.05


# -- channel assembly -------------------------------------------------------

def test_single_path_bs_ris_is_rank_one_unit():
    cfg = SystemConfig(M=4, L=4, P=1)
    G = assemble_bs_ris_channel(single_path(), 0, cfg)
    assert np.linalg.matrix_rank(G) == 1
    assert np.linalg.norm(G) == pytest.approx(1.0, abs=1e-12)


def test_single_path_ris_user_unit():
    cfg = SystemConfig(M=4, L=4, P=1)
    assert np.linalg.norm(assemble_ris_user_channel(single_path(), 0, cfg)) == pytest.approx(1.0)


def test_assembly_is_linear_in_gains(small_config, small_realization):
    c = 0.3 - 1.7j
    G = assemble_bs_ris_channel(small_realization, 1, small_config)
    Gc = assemble_bs_ris_channel(small_realization.scaled(alpha_scale=c), 1, small_config)
    np.testing.assert_allclose(Gc, c * G, atol=1e-14)
    f = assemble_ris_user_channel(small_realization, 1, small_config)
    fc = assemble_ris_user_channel(small_realization.scaled(beta_scale=c), 1, small_config)
    np.testing.assert_allclose(fc, c * f, atol=1e-14)


@pytest.mark.parametrize("seed", range(3))
def test_assembly_matches_entrywise_oracle(seed):
    cfg = SystemConfig(M=3, N=2, L=4, P=3, delta=0.4)
    real = sample_realization(cfg, np.random.default_rng(seed))
    for n in range(cfg.N):
        G = assemble_bs_ris_channel(real, n, cfg)
        G_ref = bs_ris_oracle(real, n, cfg)
        assert np.linalg.norm(G - G_ref) <= 1e-12 * np.linalg.norm(G_ref)
        f = assemble_ris_user_channel(real, n, cfg)
        f_ref = ris_user_oracle(real, n, cfg)
        assert np.linalg.norm(f - f_ref) <= 1e-12 * np.linalg.norm(f_ref)


def test_assembly_index_errors(small_config, small_realization):
    with pytest.raises(IndexError):
        assemble_bs_ris_channel(small_realization, 2, small_config)
    with pytest.raises(IndexError):
        assemble_ris_user_channel(small_realization, -1, small_config)


# -- path loss --------------------------------------------------------------

def test_path_loss_scaling():
    base = SystemConfig(L=10)
    assert path_loss(base.replace(L=20), 0) == pytest.approx(16 * path_loss(base, 0))
    assert path_loss(base.replace(d1=100.0), 0) == pytest.approx(path_loss(base, 0) / 4)


def test_path_loss_reference_scenario():
    # 5 dBi * 5 dBi * 0 dBi = 10 (linear); delta^2 L^4 lambda^4 = 0.25 * 810000 * 1e-4
    expected = 10 * 0.25 * 810_000 * 1e-4 / (64 * math.pi ** 3 * 50 ** 2 * 50 ** 2)
    assert expected == pytest.approx(1.633e-8, rel=1e-3)
    assert path_loss(SystemConfig(L=30), 0) == pytest.approx(expected, rel=1e-12)
