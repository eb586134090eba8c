"""Monte Carlo oracle for the Gram matrix ``g(t, t0)``.

For one noise realisation the interaction-picture propagator is a phase-space
displacement by ``v = int_{t0}^t S_{u-t0}^T w(u) du``; averaging over the
noise, ``Cov[v]`` equals the double-integral Gram matrix. Sampling ``v`` for
exact OU paths therefore tests the analytic maps independently of the
master-equation route.
"""

from dataclasses import dataclass
from functools import reduce

import numpy as np
from scipy.signal import lfilter

from .errors import DomainError
from .noise import OUKernel
from .phase_space import symplectic_flow

N_BLOCKS = 100


@dataclass(frozen=True)
class NoisePath:
    grid: np.ndarray
    samples: np.ndarray
    seed: int
    index: int = 0

    def subsample(self, stride):
        """Every ``stride``-th sample; still an exact OU path on the coarser grid."""
        return NoisePath(self.grid[::stride], self.samples[::stride], self.seed, self.index)


def path_rng(seed, index):
    """Independent counter-based stream for path ``index`` of master ``seed``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(index)])))


def time_grid(t0, t, dt):
    if not (dt > 0 and t > t0):
        raise DomainError("need dt > 0 and t > t0")
    n = int(round((t - t0) / dt))
    if n < 1 or abs(n * dt - (t - t0)) > 1e-9 * max(1.0, abs(t - t0)):
        raise DomainError(f"(t - t0) = {t - t0} is not a multiple of dt = {dt}")
    return t0 + dt * np.arange(n + 1)


def sample_ou_paths(gamma, d_q, d_p, grid, seed, indices):
    """Exact OU samples on ``grid`` for each path index; shape ``(n, len(grid), 2)``.

    Each component starts from its stationary law ``N(0, gamma d / 2)`` and
    steps with ``w <- exp(-gamma dt) w + N(0, (gamma d / 2)(1 - exp(-2 gamma dt)))``.
    """
    if not gamma > 0:
        raise DomainError("gamma must be > 0")
    dt = grid[1] - grid[0]
    xi = np.stack([path_rng(seed, i).standard_normal((2, grid.size)) for i in indices])
    var = 0.5 * gamma * np.array([d_q, d_p])
    decay = np.exp(-gamma * dt)
    drive = np.sqrt(-np.expm1(-2.0 * gamma * dt))
    x = xi * drive
    x[:, :, 0] = xi[:, :, 0]
    w = lfilter([1.0], [1.0, -decay], x, axis=-1)
    w *= np.sqrt(var)[None, :, None]
    return np.swapaxes(w, 1, 2)


def sample_ou_path(gamma, d_q, d_p, t0, t, dt, seed, index=0):
    grid = time_grid(t0, t, dt)
    samples = sample_ou_paths(gamma, d_q, d_p, grid, seed, [index])[0]
    return NoisePath(grid, samples, int(seed), int(index))


def _trapezoid_weights(grid):
    dt = np.diff(grid)
    w = np.zeros(grid.size)
    w[:-1] += 0.5 * dt
    w[1:] += 0.5 * dt
    return w


def displacements(samples, grid, h, t0):
    """``v = int S_{u-t0}^T w(u) du`` by the trapezoid rule, batched over paths."""
    st = np.swapaxes(symplectic_flow(h, grid - t0), -1, -2)
    return np.einsum("k,kij,pkj->pi", _trapezoid_weights(grid), st, samples)


def displacement_vector(path, h, t0):
    return displacements(path.samples[None], path.grid, h, t0)[0]


@dataclass(frozen=True)
class Moments:
    """Mergeable count / mean / co-moment accumulator for 2-vectors."""

    n: int
    mean: np.ndarray
    m2: np.ndarray

    @classmethod
    def empty(cls):
        return cls(0, np.zeros(2), np.zeros((2, 2)))

    @classmethod
    def of(cls, vs):
        vs = np.asarray(vs, dtype=float)
        mean = vs.mean(axis=0)
        dev = vs - mean
        return cls(len(vs), mean, dev.T @ dev)

    def merge(self, other):
        if self.n == 0:
            return other
        if other.n == 0:
            return self
        n = self.n + other.n
        delta = other.mean - self.mean
        mean = self.mean + delta * (other.n / n)
        m2 = self.m2 + other.m2 + np.outer(delta, delta) * (self.n * other.n / n)
        return Moments(n, mean, m2)

    @property
    def cov(self):
        return self.m2 / (self.n - 1)


def merge_all(parts):
    return reduce(Moments.merge, parts, Moments.empty())


@dataclass(frozen=True)
class EnsembleEstimate:
    mean_v: np.ndarray
    cov_v: np.ndarray
    stderr: np.ndarray
    mean_stderr: np.ndarray
    n_paths: int


def jackknife(blocks):
    """Estimate plus delete-one-block jackknife standard errors."""
    b = len(blocks)
    total = merge_all(blocks)
    prefix = [Moments.empty()]
    for m in blocks:
        prefix.append(prefix[-1].merge(m))
    suffix = [Moments.empty()]
    for m in reversed(blocks):
        suffix.append(m.merge(suffix[-1]))
    suffix.reverse()
    loo = [prefix[i].merge(suffix[i + 1]) for i in range(b)]
    covs = np.array([m.cov for m in loo])
    means = np.array([m.mean for m in loo])
    factor = (b - 1) / b
    cov_se = np.sqrt(factor * ((covs - covs.mean(axis=0)) ** 2).sum(axis=0))
    mean_se = np.sqrt(factor * ((means - means.mean(axis=0)) ** 2).sum(axis=0))
    return EnsembleEstimate(total.mean, total.cov, cov_se, mean_se, total.n)


def block_moments(k, h, t0, t, dt, n_paths, seed, n_blocks=N_BLOCKS, stride=1):
    """Per-block displacement moments; ``stride > 1`` integrates on a subsampled grid."""
    if not isinstance(k, OUKernel):
        raise DomainError("Monte Carlo sampling supports OU kernels only")
    if n_paths < 100:
        raise DomainError("need n_paths >= 100")
    grid = time_grid(t0, t, dt)
    blocks = []
    for idx in np.array_split(np.arange(n_paths), min(n_blocks, n_paths)):
        w = sample_ou_paths(k.gamma, k.d_q, k.d_p, grid, seed, idx)
        blocks.append(Moments.of(displacements(w[:, ::stride], grid[::stride], h, t0)))
    return blocks


def empirical_g(k, h, t0, t, dt, n_paths, seed, n_blocks=N_BLOCKS):
    """Empirical covariance of the displacement over ``n_paths`` OU paths."""
    return jackknife(block_moments(k, h, t0, t, dt, n_paths, seed, n_blocks))
