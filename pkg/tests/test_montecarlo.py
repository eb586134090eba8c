import numpy as np
import pytest

from gaussnm.channels import gram_g
from gaussnm.errors import DomainError
from gaussnm.montecarlo import (
    Moments,
    NoisePath,
    block_moments,
    displacement_vector,
    empirical_g,
    jackknife,
    merge_all,
    sample_ou_path,
    sample_ou_paths,
    time_grid,
)
from gaussnm.noise import OUKernel, WhiteKernel


def test_time_grid():
    g = time_grid(1.0, 2.0, 0.25)
    np.testing.assert_allclose(g, [1.0, 1.25, 1.5, 1.75, 2.0])
    with pytest.raises(DomainError):
        time_grid(0.0, 1.0, 0.3)
    with pytest.raises(DomainError):
        time_grid(1.0, 1.0, 0.1)


def test_zero_noise_path():
    p = sample_ou_path(1.0, 0.0, 0.0, 0.0, 1.0, 0.01, seed=3)
    assert not p.samples.any()


def test_path_statistics():
    gamma, dt = 2.0, 0.05
    grid = time_grid(0.0, 1.0, dt)
    w = sample_ou_paths(gamma, 1.0, 3.0, grid, seed=5, indices=range(100000))
    n = w.shape[0]
    for comp, d in ((0, 1.0), (1, 3.0)):
        x = w[:, :, comp]
        var0 = 0.5 * gamma * d
        for lag in (0, 1, 7):
            prod = x[:, 0] * x[:, lag]
            expect = var0 * np.exp(-gamma * lag * dt)
            assert abs(prod.mean() - expect) <= 4 * prod.std() / np.sqrt(n)
        end = x[:, -1] ** 2
        assert abs(end.mean() - var0) <= 4 * end.std() / np.sqrt(n)
    cross = w[:, 3, 0] * w[:, 3, 1]
    assert abs(cross.mean()) <= 4 * cross.std() / np.sqrt(n)


def test_displacement_constant_noise(free):
    grid = time_grid(0.0, 2.0, 0.1)
    path = NoisePath(grid, np.tile([1.0, 0.0], (grid.size, 1)), 0)
    np.testing.assert_allclose(displacement_vector(path, free, 0.0), [2.0, 2.0], atol=1e-12)
    path = NoisePath(grid, np.tile([0.0, 1.0], (grid.size, 1)), 0)
    np.testing.assert_allclose(displacement_vector(path, free, 0.0), [0.0, 2.0], atol=1e-12)


def test_displacement_shifted_origin(free):
    grid = time_grid(1.0, 3.0, 0.5)
    path = NoisePath(grid, np.tile([1.0, 0.0], (grid.size, 1)), 0)
    # int_0^2 (1, u) du, exact for the trapezoid rule
    np.testing.assert_allclose(displacement_vector(path, free, 1.0), [2.0, 2.0], atol=1e-12)


def test_deterministic_seed():
    a = sample_ou_path(1.0, 1.0, 1.0, 0.0, 1.0, 0.01, seed=42, index=7)
    b = sample_ou_path(1.0, 1.0, 1.0, 0.0, 1.0, 0.01, seed=42, index=7)
    c = sample_ou_path(1.0, 1.0, 1.0, 0.0, 1.0, 0.01, seed=43, index=7)
    np.testing.assert_array_equal(a.samples, b.samples)
    assert not np.array_equal(a.samples, c.samples)


def test_paths_independent_of_batching():
    grid = time_grid(0.0, 1.0, 0.01)
    batch = sample_ou_paths(1.0, 1.0, 0.5, grid, 9, range(10))
    single = sample_ou_paths(1.0, 1.0, 0.5, grid, 9, [6])[0]
    np.testing.assert_array_equal(batch[6], single)


def test_subsample_is_coarser_path():
    p = sample_ou_path(1.0, 1.0, 0.0, 0.0, 1.0, 0.01, seed=1)
    q = p.subsample(10)
    assert q.grid.size == 11
    np.testing.assert_array_equal(q.samples, p.samples[::10])


def test_moments_merge_order():
    rng = np.random.default_rng(0)
    parts = [Moments.of(rng.normal(size=(rng.integers(2, 50), 2)) * 3 + 1) for _ in range(30)]
    forward = merge_all(parts)
    backward = merge_all(parts[::-1])
    shuffled = merge_all([parts[i] for i in rng.permutation(30)])
    tree = merge_all([merge_all(parts[i:i + 7]) for i in range(0, 30, 7)])
    for other in (backward, shuffled, tree):
        assert other.n == forward.n
        np.testing.assert_allclose(other.mean, forward.mean, atol=1e-12)
        np.testing.assert_allclose(other.m2, forward.m2, rtol=1e-12, atol=1e-12)
    assert Moments.empty().merge(forward) is forward


def test_moments_match_numpy():
    rng = np.random.default_rng(1)
    x = rng.normal(size=(500, 2))
    m = merge_all([Moments.of(c) for c in np.array_split(x, 9)])
    np.testing.assert_allclose(m.cov, np.cov(x.T), rtol=1e-12)
    np.testing.assert_allclose(m.mean, x.mean(axis=0), rtol=1e-12)


def test_jackknife_mean_stderr():
    rng = np.random.default_rng(2)
    x = rng.normal(size=(4000, 2)) * [1.0, 2.0]
    est = jackknife([Moments.of(c) for c in np.array_split(x, 100)])
    np.testing.assert_allclose(est.mean_stderr, [1.0, 2.0] / np.sqrt(4000), rtol=0.25)
    # cov of N(0, s^2) has stderr about s^2 sqrt(2 / n)
    assert est.stderr[1, 1] == pytest.approx(4.0 * np.sqrt(2 / 4000), rel=0.25)


def test_empirical_g_small(free):
    k = OUKernel(1.0, 1.0, 0.0)
    est = empirical_g(k, free, 0.0, 1.0, 1e-3, 2000, seed=0)
    g = gram_g(k, free, 1.0, 0.0).value
    assert est.n_paths == 2000
    assert np.all(np.abs(est.cov_v - g) <= 4 * est.stderr)
    assert np.linalg.eigvalsh(est.cov_v)[0] >= -1e-12


def test_empirical_g_zero_noise(free):
    est = empirical_g(OUKernel(1.0, 0.0, 0.0), free, 0.0, 1.0, 1e-2, 100, seed=0)
    assert not est.cov_v.any() and not est.stderr.any()


def test_trapezoid_bias_shrinks(free):
    # same paths integrated on coarser grids: the bias is O(dt^2)
    k = OUKernel(1.0, 1.0, 0.0)
    g = gram_g(k, free, 1.0, 0.0).value
    fine = merge_all(block_moments(k, free, 0.0, 1.0, 1e-3, 2000, 0)).cov
    coarse = merge_all(block_moments(k, free, 0.0, 1.0, 1e-3, 2000, 0, stride=100)).cov
    assert np.max(np.abs(fine - coarse)) < 0.05 * np.max(np.abs(g))
    assert abs(coarse[0, 0] - fine[0, 0]) > abs(fine[0, 0] - merge_all(
        block_moments(k, free, 0.0, 1.0, 1e-3, 2000, 0, stride=2)).cov[0, 0])


def test_block_moments_domain(free):
    with pytest.raises(DomainError):
        block_moments(WhiteKernel(np.eye(2)), free, 0.0, 1.0, 0.1, 200, 0)
    with pytest.raises(DomainError):
        block_moments(OUKernel(1.0, 1.0, 0.0), free, 0.0, 1.0, 0.1, 50, 0)
