import numpy as np
import pytest

from gaussnm.errors import DomainError
from gaussnm.generator import kossakowski, kossakowski_negativity, ou_free_kossakowski
from gaussnm.noise import OUKernel, WhiteKernel
from gaussnm.phase_space import QuadraticHamiltonian

E = np.exp(-1.0)
GAMMAS = (0.1, 1.0, 10.0)
TAUS = (0.01, 0.1, 1.0, 10.0)


def test_position_example(free, position_noise):
    c = kossakowski(position_noise, free, 3.0, 2.0).value
    np.testing.assert_allclose(c, [[1 - E, (2 * E - 1) / 2], [(2 * E - 1) / 2, 0.0]], rtol=1e-14)
    assert c[0, 1] == pytest.approx(-0.13212, abs=1e-5)


def test_position_negativity_example(free, position_noise):
    lo, flag = kossakowski_negativity(kossakowski(position_noise, free, 1.0, 0.0))
    assert lo == pytest.approx(-0.02650, abs=1e-5)
    assert flag


def test_momentum_negativity_example(free, momentum_noise):
    c = kossakowski(momentum_noise, free, 1.0, 0.0)
    np.testing.assert_allclose(c.value, np.diag([0.0, 1 - E]), atol=1e-16)
    assert kossakowski_negativity(c) == (0.0, False)


def test_equal_times_zero(free, position_noise):
    c = kossakowski(position_noise, free, 4.0, 4.0)
    assert not c.value.any()
    assert kossakowski_negativity(c) == (0.0, False)


def test_white_noise_returns_weight():
    d = np.array([[1.0, 0.3], [0.3, 0.5]])
    for h in (QuadraticHamiltonian.free_particle(), QuadraticHamiltonian.oscillator(2.0)):
        np.testing.assert_array_equal(kossakowski(WhiteKernel(d), h, 3.0, 1.0).value, d)


def test_reversed_times_rejected(free, position_noise):
    with pytest.raises(DomainError):
        kossakowski(position_noise, free, 1.0, 2.0)


@pytest.mark.parametrize("gamma", GAMMAS)
@pytest.mark.parametrize("tau", TAUS)
def test_quadrature_matches_closed_form(free, gamma, tau):
    k = OUKernel(gamma, 0.7, 1.3)  # mixed coupling: sum of both closed forms
    quad = kossakowski(k, free, 1.0 + tau, 1.0, method="quadrature").value
    exact = ou_free_kossakowski(gamma, 0.7, 1.3, tau)
    assert np.max(np.abs(quad - exact)) <= 1e-8


def test_quadrature_for_general_flow_matches_direct_sum():
    # H = 1.5 I rotates phase space at rate 1.5; dense trapezoid reference
    h = QuadraticHamiltonian.oscillator(1.5)
    k = OUKernel(2.0, 1.0, 0.0)
    t, t0 = 2.0, 0.5
    c = kossakowski(k, h, t, t0).value
    u = np.linspace(t0, t, 200001)
    w = 1.5 * (u - t)
    s = np.stack([np.stack([np.cos(w), np.sin(w)], -1), np.stack([-np.sin(w), np.cos(w)], -1)], -2)
    integrand = k(np.full_like(u, t), u) @ s
    integrand = integrand + np.swapaxes(integrand, -1, -2)
    ref = np.trapezoid(integrand, u, axis=0) if hasattr(np, "trapezoid") else np.trapz(integrand, u, axis=0)
    np.testing.assert_allclose(c, ref, atol=1e-9)


@pytest.mark.parametrize("gamma", GAMMAS)
def test_position_determinant_negative(free, gamma):
    k = OUKernel(gamma, 1.0, 0.0)
    for tau in np.geomspace(1e-3, 20, 60):
        c = kossakowski(k, free, tau, 0.0).value
        assert np.linalg.det(c) < 0
        assert np.linalg.det(c) == pytest.approx(-c[0, 1] ** 2, rel=1e-12)


@pytest.mark.parametrize("gamma", GAMMAS)
def test_momentum_psd(free, gamma):
    k = OUKernel(gamma, 0.0, 1.0)
    for tau in np.concatenate([[0.0], np.geomspace(1e-3, 20, 60)]):
        assert not kossakowski_negativity(kossakowski(k, free, tau, 0.0))[1]


@pytest.mark.parametrize("gamma", (100.0, 1e3, 1e4))
def test_white_noise_limit(free, gamma):
    c = kossakowski(OUKernel(gamma, 1.0, 0.0), free, 1.0, 0.0).value
    assert np.max(np.abs(c - np.diag([1.0, 0.0]))) <= 10.0 / gamma
