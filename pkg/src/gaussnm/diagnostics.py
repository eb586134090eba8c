"""Non-Markovianity witnesses built on the Gaussian maps."""

from dataclasses import dataclass, field

import numpy as np

from .channels import apply, gamma_channel, lambda_channel
from .errors import DomainError
from .generator import kossakowski
from .phase_space import (
    OMEGA,
    GaussianState,
    is_valid_state,
    sym_eigh_rotation,
    symplectic_flow,
)

VIOLATION_MARGIN = 1e-12
SEARCH_POINTS = 40
SEARCH_RATIO = 0.8


def fidelity(s1, s2):
    """Uhlmann fidelity ``(Tr sqrt(sqrt(rho1) rho2 sqrt(rho1)))^2`` of two
    zero-mean single-mode Gaussian states.

    With ``Delta = det(sigma1 + sigma2)`` and
    ``delta = 4 (det sigma1 - 1/4)(det sigma2 - 1/4)``::

        F = 1 / (sqrt(Delta + delta) - sqrt(delta))

    evaluated in the cancellation-free form
    ``(sqrt(Delta + delta) + sqrt(delta)) / Delta``.
    """
    for s in (s1, s2):
        if not is_valid_state(s)[0]:
            raise DomainError("fidelity needs physical states")
        if np.any(s.mean != 0.0):
            raise DomainError("fidelity is implemented for zero first moments only")
    big = float(np.linalg.det(s1.cm + s2.cm))
    small = 4.0 * _purity_margin(s1.cm) * _purity_margin(s2.cm)
    return float((np.sqrt(big + small) + np.sqrt(small)) / big)


def _purity_margin(cm):
    """``det(cm) - 1/4``, snapped to 0 when within determinant round-off.

    ``F`` depends on the margin through its square root, so round-off in a
    pure state's determinant would otherwise show up at the 1e-8 level.
    """
    a, b, c = cm[0, 0], cm[0, 1], cm[1, 1]
    margin = a * c - b * b - 0.25
    if margin <= 8.0 * np.finfo(float).eps * (abs(a * c) + b * b):
        return 0.0
    return float(margin)


@dataclass(frozen=True)
class FidelityTrajectory:
    times: np.ndarray
    values: np.ndarray
    gamma: float = float("nan")
    family: str = "Gamma_{t,0}"

    @property
    def derivative(self):
        """Central differences (one-sided at the ends)."""
        return np.gradient(self.values, self.times)


def fidelity_trajectory(k, h, s1, s2, times, method="auto"):
    """``F(t) = fidelity(Gamma_{t,0}[s1], Gamma_{t,0}[s2])`` on ``times``."""
    times = np.asarray(times, dtype=float)
    if times.size == 0 or times[0] != 0.0 or np.any(np.diff(times) <= 0):
        raise DomainError("times must start at 0 and increase strictly")
    values = []
    for t in times:
        c = gamma_channel(k, h, t, 0.0, method)
        values.append(fidelity(apply(c, s1)[0], apply(c, s2)[0]))
    return FidelityTrajectory(times, np.array(values), float(getattr(k, "gamma", np.inf)))


@dataclass(frozen=True)
class Monotonicity:
    intervals: list = field(default_factory=list)
    max_drop: float = 0.0

    @property
    def monotone(self):
        return not self.intervals


def detect_nonmonotonicity(traj, tol=1e-9):
    """Runs of samples where the finite-difference derivative is below ``-tol``.

    Returns
    -------
    Monotonicity
        ``intervals`` as ``(t_start, t_end)`` pairs and the largest fidelity
        drop across any of them.
    """
    if traj.times.size < 3:
        raise DomainError("need at least 3 samples")
    falling = traj.derivative < -tol
    intervals, max_drop = [], 0.0
    n = falling.size
    i = 0
    while i < n:
        if not falling[i]:
            i += 1
            continue
        j = i
        while j + 1 < n and falling[j + 1]:
            j += 1
        lo, hi = max(i - 1, 0), min(j + 1, n - 1)
        intervals.append((float(traj.times[lo]), float(traj.times[hi])))
        max_drop = max(max_drop, float(traj.values[lo] - traj.values[hi]))
        i = j + 1
    return Monotonicity(intervals, max_drop)


@dataclass(frozen=True)
class ViolationCertificate:
    """A pure state mapped by ``Lambda_{t,t0}`` to an unphysical covariance.

    ``sigma0`` is the target ``V^T diag(sigma_qq, sigma_pp) V``; the state
    actually fed to the map is ``sigma_in = S_{-dt} sigma0 S_{-dt}^T``.
    """

    t0: float
    t: float
    sigma0: np.ndarray
    sigma_in: np.ndarray
    v: np.ndarray
    lambda_pos: float
    mu_neg: float
    sigma_qq: float
    sigma_pp: float
    det_out: float

    @property
    def first_order_rate(self):
        """Predicted ``d det / dt`` at ``t0``: ``lambda sigma_pp - mu sigma_qq``."""
        return self.lambda_pos * self.sigma_pp - self.mu_neg * self.sigma_qq

    def to_dict(self):
        return {
            "t0": self.t0,
            "t": self.t,
            "sigma0": self.sigma0.tolist(),
            "sigma_in": self.sigma_in.tolist(),
            "v": self.v.tolist(),
            "lambda_pos": self.lambda_pos,
            "mu_neg": self.mu_neg,
            "sigma_qq": self.sigma_qq,
            "sigma_pp": self.sigma_pp,
            "det_out": self.det_out,
            "first_order_rate": self.first_order_rate,
        }


def lambda_output_det(k, h, sigma0, t0, dt, method="auto"):
    """Exact ``det`` of ``Lambda_{t0+dt,t0}`` applied to ``S_{-dt} sigma0 S_{-dt}^T``."""
    back = symplectic_flow(h, -dt)
    state = GaussianState(back @ sigma0 @ back.T)
    out, _ = apply(lambda_channel(k, h, t0 + dt, t0, method), state)
    return float(np.linalg.det(out.cm)), state


def find_positivity_violation(k, h, t0, dt, method="auto"):
    """Search for a physical state that ``Lambda_{t0+dt,t0}`` makes unphysical.

    To first order in ``dt`` the map adds ``dt * W`` with
    ``W = OMEGA^T C(t0, 0) OMEGA``. If ``W`` has eigenvalues ``lambda >= 0``
    and ``-mu < 0``, pure states squeezed along the ``-mu`` eigendirection
    with ``sigma_pp`` below ``sqrt(mu / lambda) / 2`` lose determinant. The
    candidates are checked with the exact map, largest ``sigma_pp`` first.

    Returns
    -------
    ViolationCertificate or None
    """
    if not t0 > 0 or not dt > 0:
        raise DomainError("need t0 > 0 and dt > 0")
    c = kossakowski(k, h, t0, 0.0).value
    w = OMEGA.T @ c @ OMEGA
    v, hi, lo = sym_eigh_rotation(w)
    if lo >= -VIOLATION_MARGIN:
        return None
    lam, mu = max(hi, 0.0), -lo
    threshold = 0.5 * np.sqrt(mu / lam) if lam > 0 else 1.0
    for n in range(SEARCH_POINTS):
        s_pp = 0.5 * threshold * SEARCH_RATIO**n
        s_qq = 0.25 / s_pp
        sigma0 = v.T @ np.diag([s_qq, s_pp]) @ v
        det_out, state = lambda_output_det(k, h, sigma0, t0, dt, method)
        if det_out < 0.25 - VIOLATION_MARGIN:
            return ViolationCertificate(
                float(t0), float(t0 + dt), sigma0, np.array(state.cm), v,
                float(lam), float(mu), float(s_qq), float(s_pp), det_out)
    return None


def verify_certificate(cert, k, h, method="auto"):
    """Re-run the exact map on a certificate; returns the recomputed ``det``."""
    det_out, _ = lambda_output_det(k, h, cert.sigma0, cert.t0, cert.t - cert.t0, method)
    return det_out


def first_order_rate_estimate(cert, k, h, dts=(1e-2, 5e-3, 2.5e-3)):
    """Richardson-extrapolated ``(det - 1/4) / dt`` as ``dt -> 0``.

    The quotient has an O(dt) error, so each halving step eliminates the
    leading term: ``R = 2 r(dt/2) - r(dt)``, repeated once more on the
    extrapolants.
    """
    rates = []
    for dt in dts:
        det_out, _ = lambda_output_det(k, h, cert.sigma0, cert.t0, dt)
        rates.append((det_out - 0.25) / dt)
    level = rates
    power = 1
    while len(level) > 1:
        f = 2.0**power
        level = [(f * b - a) / (f - 1.0) for a, b in zip(level[:-1], level[1:])]
        power += 1
    return float(level[0]), rates
