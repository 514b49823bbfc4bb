import numpy as np
import pytest

from pregols import (
    CovariateConfig,
    InvalidInputError,
    Seed,
    gen_ate_dataset,
    gen_ate_design,
    gen_covariates,
    gen_response,
    numeric_rank,
    orthonormal_rows,
    splitmix64,
    standard_normal,
)
from pregols import dgp as dgp_module


def test_splitmix64_is_stable():
    # frozen reference values of the documented mixing function
    assert splitmix64(0) == 0xE220A8397B1DCDAF
    assert splitmix64(1) == 0x910A2DEC89025CC1
    assert splitmix64(2) == 0x975835DE1C9756CE


def test_seed_streams_deterministic_and_distinct():
    s = Seed(42)
    a = standard_normal(s.rng(3), (4, 3))
    b = standard_normal(s.rng(3), (4, 3))
    c = standard_normal(s.rng(4), (4, 3))
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
    assert Seed(42).stream_seed(7) == Seed(42).stream_seed(7)
    assert Seed(42).stream_seed(7) != Seed(43).stream_seed(7)


def test_seed_validation():
    with pytest.raises(InvalidInputError):
        Seed(-1)
    with pytest.raises(InvalidInputError):
        Seed(1 << 64)
    with pytest.raises(InvalidInputError):
        Seed(0).rng(-2)


def test_standard_normal_moments():
    x = standard_normal(Seed(1).rng(0), 100_000)
    assert abs(x.mean()) < 0.02
    assert abs(x.std() - 1.0) < 0.02
    assert np.all(np.isfinite(x))


def test_orthonormal_rows_orthonormal():
    u = orthonormal_rows(5, 9, Seed(2).rng(0))
    assert np.max(np.abs(u @ u.T - np.eye(5))) <= 1e-10


def test_orthonormal_rows_square_is_orthogonal():
    u = orthonormal_rows(6, 6, Seed(3).rng(0))
    assert abs(abs(np.linalg.det(u)) - 1.0) <= 1e-8


def test_orthonormal_rows_entry_moments():
    # mean squared entry of a Haar-like row frame is 1/q
    q = 30
    rng = Seed(4).rng(0)
    acc = 0.0
    draws = 1000
    for _ in range(draws):
        u = orthonormal_rows(3, q, rng)
        acc += float(np.mean(u**2))
    assert abs(acc / draws - 1.0 / q) <= 0.05 / q


def test_orthonormal_rows_requires_wide():
    with pytest.raises(InvalidInputError):
        orthonormal_rows(5, 3, Seed(5).rng(0))


def test_spiked_no_spikes_is_isotropic():
    cfg = CovariateConfig(model="spiked", n=6, q=12, k_spikes=0, sigma_x=1.5)
    w = gen_covariates(cfg, Seed(6).rng(0))
    assert np.max(np.abs(w @ w.T - 1.5**2 * np.eye(6))) <= 1e-8


def test_geometric_singular_values_exact():
    cfg = CovariateConfig(model="geometric", n=5, q=11, lambda_geo=1.3, rho=0.9)
    w = gen_covariates(cfg, Seed(7).rng(0))
    target = 1.3 * 0.9 ** (np.arange(1, 6) / 2.0)
    got = np.sort(np.linalg.svd(w, compute_uv=False))[::-1]
    assert np.max(np.abs(got - target)) <= 1e-8


def test_spiked_spectrum_has_k_large_eigenvalues():
    # at (n, q) = (80, 99) with spikes in [10, 20], exactly k compressed
    # spikes exceed 5 while the isotropic bulk stays at sigma_x^2 = 1
    cfg = CovariateConfig(model="spiked", n=80, q=99)
    rng = Seed(8).rng(0)
    counts = []
    for _ in range(10):
        w = gen_covariates(cfg, rng)
        evals = np.linalg.eigvalsh(w @ w.T)
        counts.append(int(np.sum(evals > 5.0)))
    assert np.mean(counts) == cfg.k_spikes


def test_standard_normal_model_full_rank():
    cfg = CovariateConfig(model="standard_normal", n=10, q=15)
    rng = Seed(9).rng(0)
    for _ in range(20):
        assert numeric_rank(gen_covariates(cfg, rng)) == 10


def test_gen_covariates_resamples_on_rank_failure(monkeypatch):
    cfg = CovariateConfig(model="standard_normal", n=4, q=6)
    calls = {"n": 0}
    real = dgp_module.numeric_rank

    def flaky(m, tol=None):
        calls["n"] += 1
        return 0 if calls["n"] == 1 else real(m, tol)

    monkeypatch.setattr(dgp_module, "numeric_rank", flaky)
    w = dgp_module.gen_covariates(cfg, Seed(10).rng(0))
    assert w.shape == (4, 6)
    assert calls["n"] == 2


def test_covariate_config_validation():
    with pytest.raises(InvalidInputError):
        CovariateConfig(model="lognormal", n=4, q=8)
    with pytest.raises(InvalidInputError):
        CovariateConfig(model="spiked", n=9, q=8)
    with pytest.raises(InvalidInputError):
        CovariateConfig(model="geometric", n=4, q=8, rho=1.0)
    with pytest.raises(InvalidInputError):
        CovariateConfig(model="spiked", n=4, q=8, sigma_x=0.0)


def test_gen_response_noise_free():
    rng = Seed(11).rng(0)
    w = standard_normal(rng, (5, 7))
    beta1 = np.arange(7, dtype=float) / 7
    y = gen_response(w, beta1, 2.0, 0.0, rng)
    assert np.array_equal(y, w @ beta1 + 2.0)


def test_gen_response_noise_is_centered():
    rng = Seed(12).rng(0)
    w = standard_normal(rng, (4, 6))
    beta1 = np.full(6, 0.5)
    draws = 10_000
    acc = np.zeros(4)
    for _ in range(draws):
        acc += gen_response(w, beta1, 1.0, 1.0, rng) - (w @ beta1 + 1.0)
    assert np.max(np.abs(acc / draws)) <= 3.0 / np.sqrt(draws)


def test_gen_response_validates():
    rng = Seed(13).rng(0)
    w = standard_normal(rng, (4, 6))
    with pytest.raises(InvalidInputError):
        gen_response(w, np.ones(5), 0.0, 1.0, rng)
    with pytest.raises(InvalidInputError):
        gen_response(w, np.ones(6), 0.0, -1.0, rng)


def test_ate_dataset_noise_free_hook():
    rng = Seed(14).rng(0)
    w, d, y = gen_ate_dataset(10, 20, 0.0, rng, noise_sd=0.0)
    alpha = np.full(20, 22**-0.5)
    assert np.array_equal(y, w @ alpha + 1.0)
    assert set(np.unique(d)) <= {0.0, 1.0}


def test_ate_dataset_treatment_balance():
    rng = Seed(15).rng(0)
    fractions = []
    for _ in range(20):
        _, d, _ = gen_ate_dataset(80, 98, 1.0, rng)
        fractions.append(d.mean())
    assert all(0.3 <= f <= 0.7 for f in fractions)


def test_ate_design_never_constant_treatment():
    rng = Seed(16).rng(0)
    for _ in range(50):
        _, d = gen_ate_design(4, 8, rng)
        assert 0.0 < d.mean() < 1.0


def test_ate_requires_wide():
    with pytest.raises(InvalidInputError):
        gen_ate_dataset(8, 8, 1.0, Seed(17).rng(0))
