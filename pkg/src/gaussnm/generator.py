"""Kossakowski matrix ``C(t, t0)`` of the time-local master equation.

``C(t, t0) = int_{t0}^t du [D(t, u) S_{u-t} + S_{u-t}^T D(t, u)^T]``

Closed forms are used for the Ornstein-Uhlenbeck kernel with the unit-mass
free particle and for white noise (``C = d``); everything else goes through
adaptive quadrature.
"""

from dataclasses import dataclass
import logging

import numpy as np

from . import quadrature
from .errors import ConsistencyError, DomainError
from .noise import OUKernel, TabulatedKernel, WhiteKernel, eval_kernel
from .phase_space import sym, sym_eigenvalues, symmetrize, symplectic_flow

log = logging.getLogger(__name__)

NEGATIVE_TOL = 1e-12
SYMMETRY_TOL = 1e-10


@dataclass(frozen=True)
class KossakowskiMatrix:
    value: np.ndarray
    t: float
    t0: float

    def __post_init__(self):
        v = symmetrize(self.value)
        v.flags.writeable = False
        object.__setattr__(self, "value", v)


def has_closed_form(k, h):
    return isinstance(k, WhiteKernel) or (isinstance(k, OUKernel) and h.is_free_particle)


def ou_free_kossakowski(gamma, d_q, d_p, tau):
    """Closed form for OU noise and the unit-mass free particle.

    Position coupling gives an indefinite matrix for every ``tau > 0``;
    momentum coupling gives ``(1 - exp(-gamma tau)) diag(0, 1)``.
    """
    x = gamma * tau
    grow = -np.expm1(-x)
    cross = (np.expm1(-x) + x * np.exp(-x)) / (2.0 * gamma)
    return d_q * sym(grow, cross, 0.0) + d_p * sym(0.0, 0.0, grow)


def kernel_breakpoints(k):
    if isinstance(k, TabulatedKernel):
        return tuple(k.times)
    return ()


def _quadrature_kossakowski(k, h, t, t0, tol):
    def integrand(us):
        d = eval_kernel(k, np.full_like(us, t), us)
        s = symplectic_flow(h, us - t)
        m = d @ s
        return m + np.swapaxes(m, -1, -2)

    val, _ = quadrature.integrate(integrand, t0, t, tol, breakpoints=kernel_breakpoints(k))
    defect = float(np.max(np.abs(val - val.T)))
    if defect > SYMMETRY_TOL:
        raise ConsistencyError(f"Kossakowski matrix asymmetric by {defect:.3g}", residual=defect)
    return symmetrize(val)


def kossakowski(k, h, t, t0, method="auto", tol=quadrature.DEFAULT_TOL):
    """Kossakowski matrix ``C(t, t0)``.

    Parameters
    ----------
    k : kernel
        Noise correlation kernel.
    h : QuadraticHamiltonian
    t, t0 : float
        Times with ``t >= t0``.
    method : {"auto", "quadrature"}
        ``"auto"`` takes the closed form when one exists.

    Raises
    ------
    DomainError
        If ``t < t0``.
    QuadratureError
        If the integral does not converge.
    """
    t, t0 = float(t), float(t0)
    if t < t0:
        raise DomainError(f"need t >= t0, got t={t}, t0={t0}")
    if t == t0:
        return KossakowskiMatrix(np.zeros((2, 2)), t, t0)
    if isinstance(k, WhiteKernel):
        return KossakowskiMatrix(k.d, t, t0)
    if method == "auto" and has_closed_form(k, h):
        return KossakowskiMatrix(ou_free_kossakowski(k.gamma, k.d_q, k.d_p, t - t0), t, t0)
    if method not in ("auto", "quadrature"):
        raise ValueError(f"unknown method {method!r}")
    return KossakowskiMatrix(_quadrature_kossakowski(k, h, t, t0, tol), t, t0)


def kossakowski_values(k, h, us, t0):
    """``C(u, t0)`` for an array of ``u`` (vectorised where a closed form exists)."""
    us = np.asarray(us, dtype=float)
    if isinstance(k, WhiteKernel):
        out = np.broadcast_to(k.d, us.shape + (2, 2)).copy()
        out[us == t0] = 0.0
        return out
    if has_closed_form(k, h):
        tau = us - t0
        x = k.gamma * tau
        grow = -np.expm1(-x)
        cross = (np.expm1(-x) + x * np.exp(-x)) / (2.0 * k.gamma)
        out = np.zeros(us.shape + (2, 2))
        out[..., 0, 0] = k.d_q * grow
        out[..., 0, 1] = out[..., 1, 0] = k.d_q * cross
        out[..., 1, 1] = k.d_p * grow
        return out
    return np.array([kossakowski(k, h, u, t0, method="quadrature").value for u in us.ravel()]
                    ).reshape(us.shape + (2, 2))


def kossakowski_negativity(c):
    """Smallest eigenvalue of ``C`` and whether it is negative beyond 1e-12."""
    value = c.value if isinstance(c, KossakowskiMatrix) else symmetrize(c)
    _, lo = sym_eigenvalues(value)
    return lo, bool(lo < -NEGATIVE_TOL)
