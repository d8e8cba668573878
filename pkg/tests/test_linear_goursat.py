import csv

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zakharov_goursat.kernels import LinearizedSymbol
from zakharov_goursat.linear_goursat import (
    ModeProblem,
    asymptotic_density,
    conjugate_partner,
    fit_growth,
    growing_solution,
    growing_solution_grid,
    growth_rate_fit,
    lemma_integral_ratios,
    lemma_integrals,
    oracle_comparison,
    plane_wave_band,
    reassemble_density,
    solution_difference,
    solve_by_convolution,
    solve_direct_oracle,
    write_solution_csv,
)


def _onset_problem(sym, N=48, t0=0.3, **extra):
    ts = np.linspace(0.0, 1.0, N + 1)
    u0 = np.where(ts > t0, (ts - t0) ** 3, 0.0)
    return ModeProblem(sym, 1.0, 0.5, N, N, u0=u0, **extra)


def test_solvers_agree_and_converge_at_second_order():
    c = oracle_comparison(LinearizedSymbol(4.0, 1.0), sizes=(32, 64, 128))
    assert c.errors[-1] < 1e-4
    assert min(c.orders) > 1.8


def test_sampled_data_and_forcing_agree():
    sym = LinearizedSymbol(4.0, 0.5)
    N = 96
    ts = np.linspace(0, 1, N + 1)
    zs = np.linspace(0, 0.5, N + 1)
    T, Zg = np.meshgrid(ts, zs, indexing="ij")
    p = ModeProblem(sym, 1.0, 0.5, N, N, u0=np.sin(3 * ts) * ts, v0=0.2 * ts**2,
                    f=0.1 * T * Zg, h=0.05 * T**2)
    assert solution_difference(solve_by_convolution(p), solve_direct_oracle(p)) < 2e-3


def test_causality_before_onset():
    sym = LinearizedSymbol(4.0, 1.0)
    p = _onset_problem(sym)
    before = p.ts < 0.3 - 1e-12
    for sol in (solve_by_convolution(p), solve_direct_oracle(p)):
        scale = max(np.abs(sol.U).max(), np.abs(sol.n).max())
        assert np.abs(sol.U[:, before]).max() < 1e-10 * scale
        assert np.abs(sol.n[before]).max() < 1e-10 * scale


def test_boundary_conditions_hold():
    sym = LinearizedSymbol(8.0, 1.0)
    p = ModeProblem(sym, 1.0, 0.5, 64, 64, family="sine")
    sol = solve_by_convolution(p)
    np.testing.assert_allclose(sol.U[:, :, 0], p.boundary(), atol=1e-14)
    assert np.abs(sol.n[0]).max() == 0.0


@settings(max_examples=10, deadline=None)
@given(c=st.complex_numbers(min_magnitude=0.1, max_magnitude=10, allow_nan=False, allow_infinity=False))
def test_linearity(c):
    sym = LinearizedSymbol(4.0, 1.0)
    p = _onset_problem(sym, N=24)
    a = solve_by_convolution(p)
    b = solve_by_convolution(p.scaled(c))
    scale = abs(c) * max(np.abs(a.U).max(), np.abs(a.n).max())
    assert np.abs(b.U - c * a.U).max() <= 1e-12 * scale
    assert np.abs(b.n - c * a.n).max() <= 1e-12 * scale


def test_mirror_modes_give_real_density():
    sym = LinearizedSymbol(4.0, 1.0)
    p = _onset_problem(sym, N=32)
    plus = solve_by_convolution(p)
    minus = solve_by_convolution(conjugate_partner(p))
    x = np.linspace(0, 2 * np.pi, 16, endpoint=False)
    dens = reassemble_density(plus, minus, 1.0, x)
    assert np.abs(dens.imag).max() <= 1e-12 * np.abs(dens).max()


def test_growing_solution_boundary_density():
    sym = LinearizedSymbol(4.0, 1.0)
    for t in (0.3, 0.7, 1.0):
        ref = -sym.Ebar * (np.sin(4 * t) / 8.0 - t * np.cos(4 * t) / 2.0)
        assert growing_solution(sym, t, 0.0).n == pytest.approx(ref, abs=1e-12)


def test_growing_solution_matches_family_solver():
    sym = LinearizedSymbol(4.0, 1.0)
    p = ModeProblem(sym, 1.0, 0.5, 64, 64, family="sine")
    sol = solve_by_convolution(p)
    U, n = growing_solution_grid(sym, p.ts[::16], p.zs[::16])
    np.testing.assert_allclose(n, sol.n[::16, ::16], atol=1e-9)
    np.testing.assert_allclose(U, sol.U[:, ::16, ::16], atol=1e-9)


def test_large_k_density_follows_bessel_model():
    sym = LinearizedSymbol(400.0, 1.0)
    for rho in (6.0, 10.0):
        z = rho**2 / (2 * 400.0)
        ratio = abs(growing_solution(sym, 1.0, z).n) / asymptotic_density(sym, 1.0, z)
        assert ratio == pytest.approx(1.0, abs=5e-3)


def test_growth_fit_recovers_synthetic_law():
    rho = np.linspace(4, 12, 17)
    fit = fit_growth(rho, 0.97 * rho - 1.5 * np.log(rho) + 0.3)
    assert fit.slope == pytest.approx(0.97, abs=1e-12)
    assert fit.power == pytest.approx(-1.5, abs=1e-10)
    with pytest.raises(ValueError):
        fit_growth(rho[:3], rho[:3])


def test_growth_rate_slope_is_one():
    fit = growth_rate_fit(LinearizedSymbol(400.0, 1.0), 1.0, (4.0, 12.0))
    assert abs(fit.slope - 1.0) < 0.05


def test_plane_wave_band():
    sym = LinearizedSymbol(4.0, 1.0)
    mid = plane_wave_band(sym, np.sqrt(16.0 - 0.5))
    assert mid.amplified and mid.rate == pytest.approx(16.0)
    outside = plane_wave_band(sym, np.sqrt(16.0 - 1.5))
    assert not outside.amplified and outside.rate == 0.0
    assert outside.matrix_rate > 0.0  # the matrix band is twice as wide
    with pytest.raises(ValueError):
        plane_wave_band(sym, 4.0)


def test_lemma_integrals():
    i, iz, it = lemma_integrals(5.0, 0.4, 0.6)
    # cheap midpoint cross-check of the plain integral
    zz, tt = np.meshgrid((np.arange(400) + 0.5) * 0.4 / 400, (np.arange(400) + 0.5) * 0.6 / 400)
    assert i == pytest.approx(np.mean(np.exp(-np.sqrt(5 * zz * tt))) * 0.24, rel=1e-4)
    assert iz == pytest.approx(np.mean(zz * np.exp(-np.sqrt(5 * zz * tt))) * 0.24, rel=1e-4)
    assert it == pytest.approx(np.mean(tt * np.exp(-np.sqrt(5 * zz * tt))) * 0.24, rel=1e-4)
    ratios = lemma_integral_ratios(points=4)
    assert all(0 < v < 3 for v in ratios.values())


def test_problem_validation():
    sym = LinearizedSymbol(4.0, 1.0)
    with pytest.raises(ValueError):
        ModeProblem(sym, 1.0, 0.5, 8, 8, family="nope")
    with pytest.raises(ValueError):
        ModeProblem(sym, 1.0, 0.5, 8, 8, family="sine", u0=np.zeros(9))
    with pytest.raises(ValueError):
        ModeProblem(sym, 1.0, 0.5, 8, 8, f=np.zeros((3, 3)))
    with pytest.raises(ValueError):
        ModeProblem(sym, -1.0, 0.5, 8, 8)


def test_solution_csv_has_unit_headers(tmp_path):
    sym = LinearizedSymbol(4.0, 1.0)
    sol = solve_by_convolution(ModeProblem(sym, 1.0, 0.5, 8, 8, family="sine"))
    path = tmp_path / "sol.csv"
    write_solution_csv(sol, path)
    with open(path) as fh:
        rows = list(csv.reader(fh))
    assert all("[" in h and h.endswith("]") for h in rows[0])
    assert len(rows) == 1 + 9 * 9
