"""Gaussian dynamical maps ``Gamma_{t,t0}`` and intertwiners ``Lambda_{t,t0}``.

Every map here acts on covariance matrices as ``sigma -> a sigma a^T + b``
with ``a`` the Hamiltonian flow ``S_{t-t0}``. That pair determines the map on
all states, so density operators are never built.

Gram matrices:

* ``g(t, t0)   = int_{t0}^t int_{t0}^t S_{u-t0}^T D(u, v) S_{v-t0} du dv``
               ``= int_{t0}^t S_{u-t0}^T C(u, t0) S_{u-t0} du``
* ``ell(t, t0) = int_{t0}^t S_{u-t0}^T C(u, 0) S_{u-t0} du``

and the additive noise of the covariance map is the congruence
``b = S_tau OMEGA^T G OMEGA S_tau^T`` of ``G = g`` or ``G = ell``.
"""

from dataclasses import dataclass
import logging
import math

import numpy as np

from . import quadrature
from .errors import ConsistencyError, DomainError
from .generator import has_closed_form, kernel_breakpoints, kossakowski, kossakowski_values
from .noise import OUKernel, WhiteKernel, eval_kernel
from .phase_space import (
    IDENTITY,
    OMEGA,
    GaussianState,
    is_valid_state,
    sym,
    symmetrize,
    symplectic_defect,
    symplectic_flow,
)

log = logging.getLogger(__name__)

CROSS_CHECK_WARN = 1e-7
CROSS_CHECK_FAIL = 1e-6
CP_TOL = 1e-10
SYMPLECTIC_TOL = 1e-10
DOUBLE_TOL = 1e-9
SINGULAR_TOL = 1e-12


@dataclass(frozen=True)
class GramMatrix:
    value: np.ndarray
    kind: str
    t: float
    t0: float
    cross_check: float = 0.0


@dataclass(frozen=True)
class GaussianChannel:
    """``sigma -> a sigma a^T + b``, ``mean -> a mean``."""

    a: np.ndarray
    b: np.ndarray
    label: tuple = ()

    def __post_init__(self):
        a = np.array(self.a, dtype=float)
        b = symmetrize(self.b)
        a.flags.writeable = False
        b.flags.writeable = False
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)


def identity_channel():
    return GaussianChannel(IDENTITY, np.zeros((2, 2)), ("id",))


# -- closed forms: OU kernel, unit-mass free particle -------------------------

def _series(x, start, coef):
    return sum(coef(n) * x**n for n in range(start, start + 30))


def _phi0(x):
    """``x - 1 + exp(-x)``."""
    if x < 0.5:
        return _series(x, 2, lambda n: (-1) ** n / math.factorial(n))
    return x + math.expm1(-x)


def _phi2(x):
    """``x^3/3 - x^2/2 + 1 - (1 + x) exp(-x)``."""
    if x < 0.5:
        return _series(x, 4, lambda n: (-1) ** n * (n - 1) / math.factorial(n))
    return x**3 / 3 - x**2 / 2 - math.expm1(-x) - x * math.exp(-x)


def ou_free_gram(gamma, d_q, d_p, tau):
    """Closed form of ``g(t0 + tau, t0)`` for the stationary OU kernel."""
    x = gamma * tau
    i0 = _phi0(x) / gamma
    i1 = 0.5 * tau * i0
    i2 = _phi2(x) / gamma**3
    return d_q * sym(i0, i1, i2) + d_p * sym(0.0, 0.0, i0)


# -- integrands ---------------------------------------------------------------

def _congruence_integral(k, h, t, t0, base, method, tol):
    """``int_{t0}^t S_{u-t0}^T C(u, base) S_{u-t0} du``."""

    def integrand(us):
        if method == "auto":
            c = kossakowski_values(k, h, us, base)
        else:
            c = np.array([kossakowski(k, h, u, base, method="quadrature").value for u in us])
        s = symplectic_flow(h, us - t0)
        return np.swapaxes(s, -1, -2) @ c @ s

    val, _ = quadrature.integrate(integrand, t0, t, tol, breakpoints=kernel_breakpoints(k))
    return symmetrize(val)


def _white_gram(k, h, t, t0, tol):
    def integrand(us):
        s = symplectic_flow(h, us - t0)
        return np.swapaxes(s, -1, -2) @ k.d @ s

    val, _ = quadrature.integrate(integrand, t0, t, tol)
    return symmetrize(val)


def _double_g(k, h, t, t0, tol):
    brk = kernel_breakpoints(k)

    def f(u, vs):
        su = symplectic_flow(h, u - t0)
        sv = symplectic_flow(h, vs - t0)
        return su.T @ eval_kernel(k, np.full_like(vs, u), vs) @ sv

    val, _ = quadrature.integrate2(
        f, t0, t, lambda u: (t0, t), tol, inner_breaks=lambda u: (u,) + brk)
    return symmetrize(val)


def _double_ell(k, h, t, t0, tol):
    brk = kernel_breakpoints(k)

    def f(u, vs):
        su = symplectic_flow(h, u - t0)
        sv = symplectic_flow(h, vs - t0)
        x = su.T @ eval_kernel(k, np.full_like(vs, u), vs) @ sv
        return x + np.swapaxes(x, -1, -2)

    val, _ = quadrature.integrate2(
        f, t0, t, lambda u: (0.0, u), tol, inner_breaks=lambda u: brk)
    return symmetrize(val)


def _check_pair(name, primary, secondary, t, t0):
    diff = float(np.max(np.abs(primary - secondary)))
    if diff > CROSS_CHECK_FAIL:
        raise ConsistencyError(
            f"{name}({t}, {t0}): single- and double-integral forms differ by {diff:.3g}",
            residual=diff)
    if diff > CROSS_CHECK_WARN:
        log.warning("%s(%s, %s): integral forms differ by %.3g", name, t, t0, diff)
    return diff


def _check_times(t, t0, need_nonneg=False):
    t, t0 = float(t), float(t0)
    if t < t0:
        raise DomainError(f"need t >= t0, got t={t}, t0={t0}")
    if need_nonneg and t0 < 0:
        raise DomainError(f"need t0 >= 0, got {t0}")
    return t, t0


def gram_g(k, h, t, t0, method="auto", tol=quadrature.DEFAULT_TOL):
    """Gram matrix ``g(t, t0)`` of the map ``Gamma_{t,t0}``.

    Both the double integral of the kernel and the single integral of the
    Kossakowski matrix are evaluated; they must agree to 1e-6 (a warning is
    logged above 1e-7). The double-integral value is returned.

    Parameters
    ----------
    method : {"auto", "quadrature"}
        ``"auto"`` uses closed forms where available; ``"quadrature"``
        integrates everything numerically.
    """
    t, t0 = _check_times(t, t0)
    if t == t0:
        return GramMatrix(np.zeros((2, 2)), "g", t, t0)
    if isinstance(k, WhiteKernel):
        # the double integral collapses onto the diagonal: C(u, t0) = d
        return GramMatrix(_white_gram(k, h, t, t0, tol), "g", t, t0)
    if method == "auto" and has_closed_form(k, h):
        double = ou_free_gram(k.gamma, k.d_q, k.d_p, t - t0)
    else:
        double = _double_g(k, h, t, t0, DOUBLE_TOL)
    single = _congruence_integral(k, h, t, t0, t0, method, tol)
    diff = _check_pair("g", double, single, t, t0)
    return GramMatrix(double, "g", t, t0, diff)


def gram_ell(k, h, t, t0, method="auto", tol=quadrature.DEFAULT_TOL):
    """Gram matrix ``ell(t, t0)`` of the intertwiner ``Lambda_{t,t0}``.

    Unlike ``g`` it integrates ``C(u, 0)``: the memory of the noise since
    time zero. The double-integral form runs over ``t0 <= u <= t``,
    ``0 <= v <= u`` with the integrand symmetrised.
    """
    t, t0 = _check_times(t, t0, need_nonneg=True)
    if t == t0:
        return GramMatrix(np.zeros((2, 2)), "ell", t, t0)
    if t0 == 0.0:
        g = gram_g(k, h, t, 0.0, method, tol)
        return GramMatrix(g.value, "ell", t, t0, g.cross_check)
    if isinstance(k, WhiteKernel):
        return GramMatrix(_white_gram(k, h, t, t0, tol), "ell", t, t0)
    if method == "auto" and has_closed_form(k, h):
        inv = symplectic_flow(h, -t0)
        full = ou_free_gram(k.gamma, k.d_q, k.d_p, t) - ou_free_gram(k.gamma, k.d_q, k.d_p, t0)
        double = symmetrize(inv.T @ full @ inv)
    else:
        double = _double_ell(k, h, t, t0, DOUBLE_TOL)
    single = _congruence_integral(k, h, t, t0, 0.0, method, tol)
    diff = _check_pair("ell", double, single, t, t0)
    return GramMatrix(double, "ell", t, t0, diff)


def noise_from_gram(h, gram):
    """Covariance-map noise ``S_tau OMEGA^T G OMEGA S_tau^T`` from a Gram matrix."""
    s = symplectic_flow(h, gram.t - gram.t0)
    return symmetrize(s @ OMEGA.T @ gram.value @ OMEGA @ s.T)


def cm_noise(k, h, t, t0, which="g", method="auto", tol=quadrature.DEFAULT_TOL):
    """Additive covariance noise of ``Gamma`` (``which="g"``) or ``Lambda`` (``"ell"``).

    With ``method="direct"`` the defining integral
    ``int_{t0}^t OMEGA^T S_{u-t}^T C(u, base) S_{u-t} OMEGA du`` is evaluated
    by quadrature (``base = t0`` for ``g``, ``0`` for ``ell``). Otherwise the
    noise is obtained by congruence from :func:`gram_g` / :func:`gram_ell`.
    """
    if which not in ("g", "ell"):
        raise ValueError(f"which must be 'g' or 'ell', got {which!r}")
    t, t0 = _check_times(t, t0, need_nonneg=(which == "ell"))
    if t == t0:
        return np.zeros((2, 2))
    if method == "direct":
        base = t0 if which == "g" else 0.0

        def integrand(us):
            c = kossakowski_values(k, h, us, base)
            s = symplectic_flow(h, us - t)
            return OMEGA.T @ np.swapaxes(s, -1, -2) @ c @ s @ OMEGA

        val, _ = quadrature.integrate(integrand, t0, t, tol, breakpoints=kernel_breakpoints(k))
        return symmetrize(val)
    gram = gram_g(k, h, t, t0, method, tol) if which == "g" else gram_ell(k, h, t, t0, method, tol)
    return noise_from_gram(h, gram)


def gamma_channel(k, h, t, t0, method="auto"):
    """The dynamical map ``Gamma_{t,t0}`` (completely positive)."""
    t, t0 = _check_times(t, t0)
    b = cm_noise(k, h, t, t0, "g", method)
    return GaussianChannel(symplectic_flow(h, t - t0), b, ("Gamma", t, t0))


def lambda_channel(k, h, t, t0, method="auto"):
    """The intertwiner ``Lambda_{t,t0}`` with ``Gamma_{t,0} = Lambda_{t,t0} Gamma_{t0,0}``."""
    t, t0 = _check_times(t, t0, need_nonneg=True)
    b = cm_noise(k, h, t, t0, "ell", method)
    return GaussianChannel(symplectic_flow(h, t - t0), b, ("Lambda", t, t0))


def apply(c, s):
    """Push a state through a channel.

    The output may be unphysical for non-positive maps; it is returned
    anyway together with its validity flag.
    """
    cm = c.a @ s.cm @ c.a.T + c.b
    out = GaussianState(cm, c.a @ s.mean)
    valid, _ = is_valid_state(out)
    return out, valid


def compose(c2, c1):
    """``c2 o c1`` (apply ``c1`` first)."""
    return GaussianChannel(c2.a @ c1.a, c2.a @ c1.b @ c2.a.T + c2.b, ("compose", c2.label, c1.label))


def channel_defect(c1, c2):
    """Max-abs distance between two channels' ``(a, b)`` matrices."""
    return float(max(np.max(np.abs(c1.a - c2.a)), np.max(np.abs(c1.b - c2.b))))


def semigroup_defect_matrix(k, h, t0, t1, t2, method="auto"):
    """``S^T g(t2, t1) S + g(t1, t0) - g(t2, t0)`` with ``S = S_{t1-t0}``."""
    if not t0 <= t1 <= t2:
        raise DomainError(f"need t0 <= t1 <= t2, got {(t0, t1, t2)}")
    s = symplectic_flow(h, t1 - t0)
    late = gram_g(k, h, t2, t1, method).value
    early = gram_g(k, h, t1, t0, method).value
    full = gram_g(k, h, t2, t0, method).value
    return s.T @ late @ s + early - full


def semigroup_deviation(k, h, t0, t1, t2, method="auto"):
    """Max-abs failure of ``Gamma_{t2,t1} o Gamma_{t1,t0} = Gamma_{t2,t0}``."""
    return float(np.max(np.abs(semigroup_defect_matrix(k, h, t0, t1, t2, method))))


def is_cp(c):
    """Complete positivity of a channel with symplectic linear part.

    For symplectic ``a`` the condition ``b + i (OMEGA - a OMEGA a^T) / 2 >= 0``
    reduces to ``b >= 0``.

    Returns
    -------
    (bool, float)
        Verdict and the smallest eigenvalue of ``b``.
    """
    defect = symplectic_defect(c.a)
    if defect > SYMPLECTIC_TOL:
        raise DomainError(f"linear part not symplectic (defect {defect:.3g})")
    lo = float(np.linalg.eigvalsh(c.b)[0])
    return bool(lo >= -CP_TOL), lo


@dataclass(frozen=True)
class KrausWeight:
    """Gaussian weight ``F(y) = norm * exp(-y^T inv_cov y / 2)``."""

    norm: float
    inv_cov: np.ndarray

    def __call__(self, y):
        y = np.asarray(y, dtype=float)
        quad = np.einsum("...i,ij,...j->...", y, self.inv_cov, y)
        return self.norm * np.exp(-0.5 * quad)


def kraus_density(g):
    """Kraus weight of ``G(x) = exp(-x^T g x / 2)``.

    ``F(y) = int d^2x / (2 pi) exp(i y^T OMEGA x) G(x)
          = det(g)^{-1/2} exp(-y^T OMEGA g^{-1} OMEGA^T y / 2)``,
    positive everywhere, and ``int d^2y / (2 pi) F(y) = G(0) = 1``.
    """
    value = g.value if isinstance(g, GramMatrix) else symmetrize(g)
    eig = np.linalg.eigvalsh(value)
    if eig[0] <= SINGULAR_TOL * max(1.0, eig[-1]):
        raise DomainError(f"Gram matrix is singular (min eigenvalue {eig[0]:.3g}); weight is degenerate")
    inv_cov = symmetrize(OMEGA @ np.linalg.inv(value) @ OMEGA.T)
    return KrausWeight(float(1.0 / np.sqrt(np.linalg.det(value))), inv_cov)
