import numpy as np
import pytest
from scipy import integrate

from zakharov_goursat.quadrature import hat_moments, prodint1, prodint2, prodint_modes


def _brute_1d(K, D, h, mu, j):
    """Integrate exp(mu x') * (piecewise-linear K(x') D(x_j - x')) with adaptive quadrature."""
    xs = h * np.arange(len(K))

    def f(x, part):
        kv = np.interp(x, xs, K.real) + 1j * np.interp(x, xs, K.imag)
        dv = np.interp(xs[j] - x, xs, D.real) + 1j * np.interp(xs[j] - x, xs, D.imag)
        val = np.exp(mu * x) * kv * dv
        return val.real if part == 0 else val.imag

    # the rule interpolates the product node-to-node, so compare cell by cell
    total = 0.0
    for m in range(j):
        a, b = xs[m], xs[m + 1]
        pa = K[m] * D[j - m]
        pb = K[m + 1] * D[j - m - 1]

        def g(x, part):
            s = (x - a) / h
            val = np.exp(mu * x) * ((1 - s) * pa + s * pb)
            return val.real if part == 0 else val.imag

        total += integrate.quad(g, a, b, args=(0,), epsabs=1e-14)[0]
        total += 1j * integrate.quad(g, a, b, args=(1,), epsabs=1e-14)[0]
    return total


def test_hat_moments_small_and_large_arguments_agree():
    x = np.array([1e-8, 0.05, 0.0999, 0.1001, 2.0, 3j, -1 + 4j])
    L, R = hat_moments(x)
    for xi, li, ri in zip(x, L, R):
        r = integrate.quad(lambda s: (np.exp(xi * s) * (1 - s)).real, 0, 1)[0] + 1j * integrate.quad(
            lambda s: (np.exp(xi * s) * (1 - s)).imag, 0, 1)[0]
        l = integrate.quad(lambda s: (np.exp(xi * s) * (1 + s)).real, -1, 0)[0] + 1j * integrate.quad(
            lambda s: (np.exp(xi * s) * (1 + s)).imag, -1, 0)[0]
        assert abs(ri - r) < 1e-13
        assert abs(li - l) < 1e-13


@pytest.mark.parametrize("mu", [0.0, 7j, -2.0 + 30j])
def test_prodint1_matches_cellwise_quadrature(mu):
    rng = np.random.default_rng(1)
    n, h = 12, 0.1
    K = rng.normal(size=n) + 1j * rng.normal(size=n)
    D = rng.normal(size=n) + 1j * rng.normal(size=n)
    out = prodint1(K, D, h, mu)
    for j in (0, 1, 5, n - 1):
        assert abs(out[j] - _brute_1d(K, D, h, mu, j)) < 1e-12


def test_prodint_modes_is_unit_kernel_case():
    rng = np.random.default_rng(2)
    D = rng.normal(size=(20, 3)) + 0j
    mu = np.array([0.5j, -1.0, 3j])
    out = prodint_modes(D, 0.05, mu, axis=0)
    for c in range(3):
        ref = prodint1(np.ones(20), D[:, c], 0.05, mu[c])
        np.testing.assert_allclose(out[:, c], ref, atol=1e-14)


def test_prodint1_integrates_exponential_exactly():
    # K = D = 1: int_0^x exp(mu x') dx' is reproduced to roundoff for any h
    h, mu = 0.3, 11j
    out = prodint1(np.ones(9), np.ones(9), h, mu)
    x = h * np.arange(9)
    np.testing.assert_allclose(out, np.expm1(mu * x) / mu, atol=1e-14)


def test_prodint2_separable_case_factorizes():
    rng = np.random.default_rng(3)
    nt, nz, ht, hz = 9, 7, 0.1, 0.05
    a, b = rng.normal(size=nt), rng.normal(size=nz)
    c, d = rng.normal(size=nt), rng.normal(size=nz)
    K = np.outer(a, b)
    D = np.outer(c, d)
    out = prodint2(K, D, ht, hz, 2j, -1.0)
    ref = np.outer(prodint1(a, c, ht, 2j), prodint1(b, d, hz, -1.0))
    np.testing.assert_allclose(out, ref, atol=1e-13)
