from fractions import Fraction

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zakharov_goursat.analytic import (
    C0_REFERENCE,
    MajorantSeries,
    cauchy_margin,
    compute_c0,
    estimate_norm_ER,
    existence_threshold,
    resonant_data,
    verify_majorant_calculus,
)


def _c0_closed_form(N):
    """min_n phi_n / (phi*phi)_n with unit c0, in exact rational arithmetic."""
    best = None
    for n in range(N + 1):
        conv = sum(Fraction(1, (j * j + 1) * ((n - j) ** 2 + 1)) for j in range(n + 1))
        val = Fraction(1, n * n + 1) / conv
        best = val if best is None or val < best else best
    return float(best)


def test_c0_matches_exact_minimum():
    assert compute_c0(64) == pytest.approx(_c0_closed_form(64), abs=2e-12)
    assert compute_c0(8) == pytest.approx(_c0_closed_form(8), abs=2e-12)
    assert 0 < compute_c0(64) <= 1


def test_c0_stable_and_admissible():
    assert abs(compute_c0(128) - compute_c0(64)) < 1e-6
    assert cauchy_margin(C0_REFERENCE, 64) >= -1e-12
    with pytest.raises(ValueError):
        compute_c0(4)


def test_series_coefficients_positive_decreasing():
    s = MajorantSeries()
    assert np.all(s.coeffs > 0) and np.all(np.diff(s.coeffs) < 0)
    assert s(0.0) == pytest.approx(s.c0)


@pytest.mark.parametrize("n,y", [(0, 0.0), (0, 0.5), (3, 0.3), (5, 0.8), (10, 0.9)])
def test_taylor_coefficients_against_series(n, y):
    s = MajorantSeries()
    ref = s.c0 * mp.nsum(lambda m: mp.binomial(m, n) * mp.mpf(y) ** (m - n) / (m**2 + 1), [n, mp.inf])
    assert float(s.taylor(n, y)) == pytest.approx(float(ref), rel=1e-12)


def test_taylor_is_derivative_of_shifted_series():
    s = MajorantSeries(R=2.0, lam=3.0)
    z = 0.1
    # coefficient of X^n in phi(R X + lam z) by finite differences of order n = 1
    h = 1e-6
    fd = (s.taylor(0, 3.0 * z + 2.0 * h) - s.taylor(0, 3.0 * z - 2.0 * h)) / (2 * h)
    assert float(s.E_coeff(1, z)) == pytest.approx(float(fd), rel=1e-6)
    assert float(s.F_coeff(0, z)) == pytest.approx(float(s.taylor(1, 0.3)), rel=1e-14)


def test_norm_of_constant():
    est = estimate_norm_ER(np.full(16, 2.5 + 0j), 3.0)
    assert est.C_E == pytest.approx(2.5 / C0_REFERENCE)


def test_norm_of_carrier_inside_width():
    k = 4
    x = 2 * np.pi * np.arange(32) / 32
    e = np.exp(1j * k * x)
    est = estimate_norm_ER(e, 2 * k)
    n = np.arange(25)
    ref = np.max(1.5 * 0.5**n * (n**2 + 1) / (C0_REFERENCE * np.array([float(mp.factorial(m)) for m in n])))
    assert est.C_E == pytest.approx(ref, rel=1e-12) and not est.divergent


def test_norm_diverges_outside_analyticity_width():
    # u = sum q^m e^{imx} extends to |Im x| < ln(1/q): divergence for R < 1/ln 2
    x = 2 * np.pi * np.arange(512) / 512
    u = sum(0.5**m * np.exp(1j * m * x) for m in range(200))
    assert estimate_norm_ER(u, 1.0).C_E == np.inf
    assert np.isfinite(estimate_norm_ER(u, 3.0).C_E)


def test_norm_monotone_in_order_and_width():
    x = 2 * np.pi * np.arange(64) / 64
    u = 1 + 0.3 * np.exp(2j * x) + 0.1 * np.exp(-5j * x)
    vals = [estimate_norm_ER(u, 4.0, alpha_max=a).C_E for a in (4, 8, 16, 24)]
    assert all(b >= a for a, b in zip(vals, vals[1:]))
    # a wider complex strip (smaller R) is harder to fit into
    widths = [estimate_norm_ER(u, R).C_E for R in (16.0, 8.0, 4.0, 2.0)]
    assert all(b >= a for a, b in zip(widths, widths[1:]))


def test_two_dimensional_norm():
    n = 16
    x = 2 * np.pi * np.arange(n) / n
    X, Y = np.meshgrid(x, x, indexing="ij")
    u = np.exp(1j * (2 * X + Y))
    est = estimate_norm_ER(u, 4.0, dims=2, alpha_max=6)
    one_d = estimate_norm_ER(np.exp(2j * x), 4.0, alpha_max=6)
    # mixed derivatives of e^{i(2x+y)} are bounded by the pure x-derivatives
    assert est.C_E >= one_d.C_E * 0.99


@settings(max_examples=15, deadline=None)
@given(
    a=st.lists(st.complex_numbers(max_magnitude=1, allow_nan=False, allow_infinity=False), min_size=5, max_size=5),
    b=st.lists(st.complex_numbers(max_magnitude=1, allow_nan=False, allow_infinity=False), min_size=5, max_size=5),
)
def test_submultiplicative(a, b):
    x = 2 * np.pi * np.arange(64) / 64
    modes = np.array([-2, -1, 0, 1, 3])
    u = sum(c * np.exp(1j * m * x) for c, m in zip(a, modes))
    v = sum(c * np.exp(1j * m * x) for c, m in zip(b, modes))
    if np.abs(u).max() < 1e-6 or np.abs(v).max() < 1e-6:
        return
    R = 4.0
    cu, cv, cuv = (estimate_norm_ER(f, R, alpha_max=12).C_E for f in (u, v, u * v))
    assert cuv <= cu * cv * (1 + 1e-9)


def test_calculus_report():
    rep = verify_majorant_calculus()
    assert rep.ok
    assert rep.product_margin >= -1e-12
    assert rep.integration_margin >= 0


def test_threshold_scaling_laws():
    base = existence_threshold(3.0, 2.0, 1.5)
    assert existence_threshold(3.0, 2.0, 3.0).lambda_min == pytest.approx(4 * base.lambda_min, rel=1e-15)
    assert existence_threshold(6.0, 2.0, 1.5).lambda_min == pytest.approx(2 * base.lambda_min, rel=1e-15)
    assert existence_threshold(3.0, 4.0, 1.5).lambda_min == pytest.approx(2 * base.lambda_min, rel=1e-15)
    zero = existence_threshold(3.0, 2.0, 0.0)
    assert zero.lambda_min == 0 and zero.Z_max == np.inf
    assert base.Z_max == pytest.approx(1 / base.lambda_min)
    with pytest.raises(ValueError):
        existence_threshold(0.0, 1.0, 1.0)


def test_threshold_reproduces_ZTkE2_law():
    # with R = k and ||E0|| proportional to Ebar, Z_max T k Ebar^2 is a constant
    products = []
    for k, E, T in [(8.0, 1.0, 1.0), (32.0, 2.0, 0.5), (16.0, 0.5, 2.0)]:
        norm = estimate_norm_ER(resonant_data(k, E, T=T), k, L=1 / k).C_E
        products.append(existence_threshold(k, T, norm).Z_max * T * k * E**2)
    assert max(products) / min(products) < 1.01
