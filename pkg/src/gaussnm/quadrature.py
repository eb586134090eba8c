"""Adaptive Gauss-Legendre quadrature for array-valued integrands.

Integrands are vectorised: ``f(nodes)`` receives a 1-D array of abscissae and
returns an array whose leading axis indexes the nodes.
"""

import numpy as np

from .errors import QuadratureError

ORDER = 10
DEFAULT_TOL = 1e-10
MAX_DEPTH = 20

_X, _W = np.polynomial.legendre.leggauss(ORDER)


def _panel(f, a, b):
    half = 0.5 * (b - a)
    vals = np.asarray(f(a + half * (_X + 1.0)), dtype=float)
    return half * np.tensordot(_W, vals, axes=(0, 0))


def integrate(f, a, b, tol=DEFAULT_TOL, max_depth=MAX_DEPTH, breakpoints=()):
    """Integrate ``f`` over ``[a, b]`` to absolute tolerance ``tol``.

    Each panel is compared with the sum over its two halves; panels whose
    difference exceeds their share of ``tol`` are bisected, at most
    ``max_depth`` times.

    Parameters
    ----------
    f : callable
        Vectorised integrand.
    a, b : float
        Limits; ``a == b`` returns zeros of the integrand shape.
    tol : float
        Absolute tolerance on the max-abs entry of the result.
    max_depth : int
        Maximum bisection depth.
    breakpoints : iterable of float
        Interior points where the integrand is not smooth.

    Returns
    -------
    (numpy.ndarray, float)
        Integral estimate and the summed error estimate.

    Raises
    ------
    QuadratureError
        If a panel still fails the test at ``max_depth``; ``residual`` holds
        the accumulated error estimate.
    """
    a, b = float(a), float(b)
    if b < a:
        val, err = integrate(f, b, a, tol, max_depth, breakpoints)
        return -val, err
    cuts = [a] + sorted(float(p) for p in breakpoints if a < p < b) + [b]
    if b == a:
        shape = np.asarray(f(np.array([a]))).shape[1:]
        return np.zeros(shape), 0.0
    total = None
    err_total = 0.0
    length = b - a
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        val, err = _adaptive(f, lo, hi, tol * (hi - lo) / length, max_depth)
        total = val if total is None else total + val
        err_total += err
    return total, err_total


def _adaptive(f, a, b, tol, max_depth):
    whole = _panel(f, a, b)
    stack = [(a, b, whole, 0)]
    total = np.zeros_like(whole)
    err_total = 0.0
    length = b - a
    while stack:
        lo, hi, est, depth = stack.pop()
        mid = 0.5 * (lo + hi)
        left, right = _panel(f, lo, mid), _panel(f, mid, hi)
        refined = left + right
        err = float(np.max(np.abs(refined - est))) if refined.size else 0.0
        scale = float(np.max(np.abs(refined))) if refined.size else 0.0
        allowed = max(tol * (hi - lo) / length, 64.0 * np.finfo(float).eps * scale)
        if err <= allowed:
            total += refined
            err_total += err
        elif depth >= max_depth:
            raise QuadratureError(
                f"no convergence on [{lo:g}, {hi:g}] at depth {depth}",
                residual=err_total + err,
            )
        else:
            stack.append((lo, mid, left, depth + 1))
            stack.append((mid, hi, right, depth + 1))
    return total, err_total


def integrate2(f, a, b, inner_limits, tol=DEFAULT_TOL, inner_breaks=None):
    """Iterated integral ``int_a^b du int_{lo(u)}^{hi(u)} dv f(u, v)``.

    ``f(u, vs)`` is vectorised over ``vs`` for a scalar ``u``. The inner
    integrals run at a tolerance ten times tighter than the outer one.
    ``inner_breaks(u)`` may return kink locations for the inner integral.
    """
    outer_len = max(abs(b - a), 1.0)
    inner_tol = tol / (10.0 * outer_len)

    def outer(us):
        out = []
        for u in us:
            lo, hi = inner_limits(u)
            brk = inner_breaks(u) if inner_breaks is not None else ()
            val, _ = integrate(lambda vs: f(u, vs), lo, hi, inner_tol, breakpoints=brk)
            out.append(val)
        return np.array(out)

    return integrate(outer, a, b, tol)
