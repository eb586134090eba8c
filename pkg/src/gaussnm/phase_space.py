"""Single-mode phase-space linear algebra.

Conventions (fixed, hbar = 1, unit mass):

* phase-space vector ``r = (q, p)``
* symplectic form ``OMEGA = [[0, 1], [-1, 0]]``
* covariance matrices use the vacuum convention ``sigma_vac = I / 2``

Matrices are plain ``numpy`` arrays of shape ``(2, 2)``. Symmetric matrices
are built with :func:`sym` and are symmetric by construction.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

OMEGA = np.array([[0.0, 1.0], [-1.0, 0.0]])
OMEGA.flags.writeable = False

IDENTITY = np.eye(2)
IDENTITY.flags.writeable = False

STATE_TOL = 1e-12


def sym(xx, xp, pp):
    """Symmetric 2x2 matrix from its three independent entries."""
    return np.array([[xx, xp], [xp, pp]], dtype=float)


def symmetrize(m):
    m = np.asarray(m, dtype=float)
    return 0.5 * (m + np.swapaxes(m, -1, -2))


def _frozen(a):
    a = np.array(a, dtype=float)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class QuadraticHamiltonian:
    """``H = r^T hessian r / 2`` (linear terms are not represented)."""

    hessian: np.ndarray

    def __post_init__(self):
        h = symmetrize(self.hessian)
        if h.shape != (2, 2) or not np.all(np.isfinite(h)):
            raise DomainError("hessian must be a finite 2x2 matrix")
        object.__setattr__(self, "hessian", _frozen(h))

    @classmethod
    def free_particle(cls, mass=1.0):
        return cls(sym(0.0, 0.0, 1.0 / mass))

    @classmethod
    def oscillator(cls, omega=1.0):
        return cls(omega * IDENTITY)

    @property
    def is_free_particle(self):
        """True for the unit-mass free particle ``diag(0, 1)``."""
        return bool(np.array_equal(self.hessian, sym(0.0, 0.0, 1.0)))

    def __eq__(self, other):
        if not isinstance(other, QuadraticHamiltonian):
            return NotImplemented
        return bool(np.array_equal(self.hessian, other.hessian))

    def __hash__(self):
        return hash(self.hessian.tobytes())


def symplectic_flow(h, t):
    """Heisenberg flow ``S_t = expm(t * OMEGA @ H)``.

    ``A = OMEGA @ H`` is traceless, so ``A @ A = -det(H) I`` and the
    exponential has an exact closed form (elliptic, parabolic or
    hyperbolic according to the sign of ``det(H)``).

    Parameters
    ----------
    h : QuadraticHamiltonian
    t : float or array_like
        Time(s); negative values give the inverse flow.

    Returns
    -------
    numpy.ndarray
        Shape ``(2, 2)`` for scalar ``t``, else ``t.shape + (2, 2)``.
    """
    t = np.asarray(t, dtype=float)
    a = OMEGA @ h.hessian
    det = float(np.linalg.det(h.hessian))
    if det > 0.0:
        w = np.sqrt(det)
        c, s = np.cos(w * t), np.sin(w * t) / w
    elif det < 0.0:
        k = np.sqrt(-det)
        c, s = np.cosh(k * t), np.sinh(k * t) / k
    else:
        c, s = np.ones_like(t), t
    return c[..., None, None] * IDENTITY + s[..., None, None] * a


def symplectic_defect(m):
    """Max-abs deviation of ``m OMEGA m^T`` from ``OMEGA``."""
    return float(np.max(np.abs(m @ OMEGA @ m.T - OMEGA)))


def sym_eigenvalues(m):
    """Closed-form eigenvalues of a symmetric 2x2 matrix, descending."""
    m = np.asarray(m, dtype=float)
    a, b, c = m[0, 0], 0.5 * (m[0, 1] + m[1, 0]), m[1, 1]
    scale = max(abs(a), abs(b), abs(c))
    if scale == 0.0:
        return 0.0, 0.0
    a, b, c = a / scale, b / scale, c / scale
    mid = 0.5 * (a + c)
    rad = np.hypot(0.5 * (a - c), b)
    hi, lo = mid + rad, mid - rad
    # same-sign roots: take the smaller one from the product to avoid cancellation
    if mid > rad:
        lo = (a * c - b * b) / hi
    elif mid < -rad:
        hi = (a * c - b * b) / lo
    return float(hi * scale), float(lo * scale)


def rotation(theta):
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, s], [-s, c]])


def sym_eigh_rotation(m):
    """Rotation ``V`` and eigenvalues with ``m = V^T diag(hi, lo) V``.

    ``V`` is orthogonal with unit determinant, hence also symplectic.
    """
    m = symmetrize(m)
    hi, lo = sym_eigenvalues(m)
    theta = 0.5 * np.arctan2(2.0 * m[0, 1], m[0, 0] - m[1, 1])
    v = rotation(theta)
    return v, hi, lo


@dataclass(frozen=True)
class GaussianState:
    """Single-mode Gaussian state: covariance matrix and first moments."""

    cm: np.ndarray
    mean: np.ndarray = field(default_factory=lambda: np.zeros(2))

    def __post_init__(self):
        cm = symmetrize(self.cm)
        mean = np.asarray(self.mean, dtype=float)
        if cm.shape != (2, 2) or mean.shape != (2,):
            raise DomainError("cm must be 2x2 and mean a 2-vector")
        if not (np.all(np.isfinite(cm)) and np.all(np.isfinite(mean))):
            raise DomainError("state entries must be finite")
        object.__setattr__(self, "cm", _frozen(cm))
        object.__setattr__(self, "mean", _frozen(mean))

    @classmethod
    def vacuum(cls):
        return cls(0.5 * IDENTITY)

    @classmethod
    def squeezed(cls, r):
        """Squeezed vacuum with CM ``diag(exp(2r), exp(-2r)) / 2``."""
        return cls(0.5 * np.diag([np.exp(2 * r), np.exp(-2 * r)]))

    @classmethod
    def thermal(cls, nu):
        return cls(nu * IDENTITY)


def is_valid_state(s, tol=STATE_TOL):
    """Physicality test ``sigma + i OMEGA / 2 >= 0``.

    For one mode this is ``sigma > 0`` and ``det(sigma) >= 1/4``.

    Returns
    -------
    (bool, float)
        Verdict and the margin ``det(sigma) - 1/4``.
    """
    cm = s.cm if isinstance(s, GaussianState) else symmetrize(s)
    margin = float(np.linalg.det(cm) - 0.25)
    positive = cm[0, 0] > 0.0 and cm[1, 1] > 0.0
    return bool(positive and margin >= -tol), margin
