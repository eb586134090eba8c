"""Two-time correlation kernels ``D(t, s)`` of the classical noise ``w(t)``.

Three kernel families are provided:

* :class:`WhiteKernel` -- ``delta(t - s) * d``; never sampled pointwise by
  the integrators, which branch on it and use the analytic white-noise limit.
* :class:`OUKernel` -- ``(gamma / 2) exp(-gamma |t - s|) diag(d_q, d_p)``.
* :class:`TabulatedKernel` -- blocks on a time grid, bilinear in ``(t, s)``.
"""

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DomainError
from .phase_space import symmetrize

POSITIVE_TYPE_FLOOR = -1e-10


@dataclass(frozen=True)
class WhiteKernel:
    d: np.ndarray

    def __post_init__(self):
        d = symmetrize(self.d)
        if d.shape != (2, 2) or np.linalg.eigvalsh(d)[0] < POSITIVE_TYPE_FLOOR:
            raise DomainError("white-noise weight must be a PSD 2x2 matrix")
        d.flags.writeable = False
        object.__setattr__(self, "d", d)

    @property
    def stationary(self):
        return True


@dataclass(frozen=True)
class OUKernel:
    gamma: float
    d_q: float = 0.0
    d_p: float = 0.0

    def __post_init__(self):
        if not self.gamma > 0:
            raise DomainError(f"gamma must be > 0, got {self.gamma}")
        if self.d_q < 0 or self.d_p < 0:
            raise DomainError("d_q and d_p must be >= 0")

    @property
    def stationary(self):
        return True

    @property
    def weights(self):
        return np.diag([self.d_q, self.d_p])

    def __call__(self, t, s):
        lag = np.abs(np.asarray(t, dtype=float) - np.asarray(s, dtype=float))
        amp = 0.5 * self.gamma * np.exp(-self.gamma * lag)
        return amp[..., None, None] * self.weights


class TabulatedKernel:
    """Kernel sampled on a tensor grid ``times x times``.

    Parameters
    ----------
    times : array_like, shape (n,)
        Strictly increasing grid, shared by both time arguments.
    blocks : array_like, shape (n, n, 2, 2)
        ``blocks[a, b] = D(times[a], times[b])``.
    """

    stationary = False

    def __init__(self, times, blocks):
        times = np.array(times, dtype=float)
        blocks = np.array(blocks, dtype=float)
        n = times.size
        if n < 2 or np.any(np.diff(times) <= 0):
            raise DomainError("tabulated grid needs >= 2 strictly increasing times")
        if blocks.shape != (n, n, 2, 2):
            raise DomainError(f"blocks must have shape {(n, n, 2, 2)}, got {blocks.shape}")
        if not np.allclose(blocks, np.swapaxes(np.swapaxes(blocks, 0, 1), 2, 3), atol=1e-12):
            raise DomainError("tabulated blocks violate D(t, s) = D(s, t)^T")
        self.times = times
        self.blocks = blocks
        self.times.flags.writeable = False
        self.blocks.flags.writeable = False

    def _interp(self, t, s):
        ts = self.times
        i = np.clip(np.searchsorted(ts, t, side="right") - 1, 0, ts.size - 2)
        j = np.clip(np.searchsorted(ts, s, side="right") - 1, 0, ts.size - 2)
        x = ((t - ts[i]) / (ts[i + 1] - ts[i]))[..., None, None]
        y = ((s - ts[j]) / (ts[j + 1] - ts[j]))[..., None, None]
        b = self.blocks
        return ((1 - x) * (1 - y) * b[i, j] + x * (1 - y) * b[i + 1, j]
                + (1 - x) * y * b[i, j + 1] + x * y * b[i + 1, j + 1])

    def __call__(self, t, s):
        t = np.asarray(t, dtype=float)
        s = np.asarray(s, dtype=float)
        t, s = np.broadcast_arrays(t, s)
        lo, hi = self.times[0], self.times[-1]
        if np.any((t < lo) | (t > hi) | (s < lo) | (s > hi)):
            raise DomainError(f"kernel query outside tabulated range [{lo}, {hi}]")
        fwd = self._interp(t, s)
        bwd = np.swapaxes(self._interp(s, t), -1, -2)
        return 0.5 * (fwd + bwd)


def eval_kernel(k, t, s):
    """``D(t, s)``; for white noise, the weight of the Dirac kernel."""
    if isinstance(k, WhiteKernel):
        t, s = np.broadcast_arrays(np.asarray(t, float), np.asarray(s, float))
        return np.broadcast_to(k.d, t.shape + (2, 2)).copy()
    return k(t, s)


def block_matrix(k, times):
    """The ``2n x 2n`` matrix ``[D(t_a, t_b)]``."""
    times = np.asarray(times, dtype=float)
    n = times.size
    ta, tb = np.meshgrid(times, times, indexing="ij")
    blocks = eval_kernel(k, ta, tb)
    return blocks.transpose(0, 2, 1, 3).reshape(2 * n, 2 * n)


def check_positive_type(k, times):
    """Discretised positive-type test on the sample times ``times``.

    The white kernel is tested through its weight only, since a Dirac
    kernel is block diagonal on distinct times.
    """
    times = np.asarray(times, dtype=float)
    if times.size < 1:
        raise DomainError("need at least one sample time")
    if isinstance(k, WhiteKernel):
        return bool(np.linalg.eigvalsh(k.d)[0] >= POSITIVE_TYPE_FLOOR)
    m = block_matrix(k, times)
    return bool(np.linalg.eigvalsh(symmetrize(m))[0] >= POSITIVE_TYPE_FLOOR)


def load_tabulated_csv(path):
    """Read a kernel from CSV with header ``t,s,D11,D12,D21,D22``.

    Rows may come in any order but must cover the full ``times x times``
    grid exactly once.
    """
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        need = {"t", "s", "D11", "D12", "D21", "D22"}
        if reader.fieldnames is None or not need.issubset(reader.fieldnames):
            raise DomainError(f"{path}: header must contain {sorted(need)}")
        rows = [{key: float(r[key]) for key in need} for r in reader]
    times = np.unique([r["t"] for r in rows] + [r["s"] for r in rows])
    n = times.size
    index = {float(x): i for i, x in enumerate(times)}
    blocks = np.full((n, n, 2, 2), np.nan)
    for r in rows:
        a, b = index[r["t"]], index[r["s"]]
        blocks[a, b] = [[r["D11"], r["D12"]], [r["D21"], r["D22"]]]
    if np.isnan(blocks).any():
        raise DomainError(f"{path}: grid incomplete, expected all {n}x{n} (t, s) pairs")
    return TabulatedKernel(times, blocks)
