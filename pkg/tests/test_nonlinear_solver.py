import json

import numpy as np
import pytest

from zakharov_goursat.nonlinear_solver import (
    GoursatGrid,
    InstabilityParams,
    conservation_drift,
    energy_identity_residual,
    filtered_stability_check,
    instability_grid,
    mode_weights,
    picard_solve,
    read_field_binary,
    resonant_boundary,
    schrodinger_march,
    sine_boundary,
    structure_report,
    wave_solve,
    write_field_binary,
    write_iteration_log,
)


def test_free_march_is_exact_on_plane_waves():
    g = GoursatGrid(1.0, 0.3, 4, 30, 16, L=0.5)
    x = g.x
    xi = 3 / g.L
    E0 = np.tile(0.7 * np.exp(1j * xi * x), (g.Nt + 1, 1))
    E = schrodinger_march(np.zeros(g.field_shape), E0, g)
    exact = 0.7 * np.exp(1j * (xi * x[None, :] - xi**2 * g.zs[:, None]))
    assert np.abs(E - exact[None]).max() < 1e-12


def test_march_in_two_dimensions():
    g = GoursatGrid(1.0, 0.2, 2, 20, 8, dims=2)
    X, Y = g.mesh()
    E0 = np.broadcast_to(np.exp(1j * (X + 2 * Y)), (g.Nt + 1, 8, 8))
    E = schrodinger_march(np.zeros(g.field_shape), E0, g)
    exact = np.exp(1j * (X + 2 * Y - 5 * g.zs[:, None, None]))
    assert np.abs(E[1] - exact).max() < 1e-12


def test_march_conserves_l2_with_real_potential():
    rng = np.random.default_rng(0)
    g = GoursatGrid(1.0, 0.5, 6, 100, 32)
    n = rng.normal(size=g.field_shape)
    E0 = rng.normal(size=(g.Nt + 1, 32)) + 1j * rng.normal(size=(g.Nt + 1, 32))
    E = schrodinger_march(n, E0, g)
    assert conservation_drift(E, g) < 1e-10


def test_wave_solve_is_exact_for_linear_in_time_sources():
    # (d_t^2 - d_x^2) n = d_x^2 (t cos x)  =>  n = (sin t - t) cos x
    g = GoursatGrid(2.0, 0.1, 40, 2, 16)
    src = np.broadcast_to(g.ts[:, None, None] * np.cos(g.x)[None, None, :], g.field_shape).copy()
    n, residue = wave_solve(src, g, return_residue=True)
    exact = (np.sin(g.ts) - g.ts)[:, None, None] * np.cos(g.x)[None, None, :]
    assert np.abs(n - exact).max() < 1e-13
    assert residue < 1e-12


def test_wave_energy_identity_is_second_order():
    res = []
    for Nt in (128, 256):
        g = GoursatGrid(2.0, 0.1, Nt, 2, 16)
        T = g.ts[:, None, None]
        h = np.broadcast_to(np.sin(3 * T) * np.cos(g.x) + T**2 * np.sin(2 * g.x), g.field_shape).copy()
        n = wave_solve(h, g)
        res.append(energy_identity_residual(n, h, g))
    assert res[1] < 1e-3
    assert res[0] / res[1] > 3.0


def test_picard_structure_and_constant_data():
    g = GoursatGrid(1.0, 0.2, 32, 40, 16, L=1 / 4)
    E0 = sine_boundary(g, 1.0, 0.05, 4.0)
    res = picard_solve(E0, g, tol=1e-10)
    assert res.converged
    rep = structure_report(res.state)
    assert rep["is_real"] and rep["mean_residue"] < 1e-12 and rep["initial_residue"] < 1e-12
    flat = picard_solve(np.full((33, 16), 1.3 + 0j), g)
    assert flat.converged and flat.iterations == 1
    assert np.abs(flat.state.n).max() == 0.0


def test_filtered_stability_small_rho():
    k = 16.0
    Z = 0.005 / k
    g = GoursatGrid(1.0, Z, 128, 16, 8, L=1 / k)
    r = filtered_stability_check(resonant_boundary(g, 1.0, 1e-3, k), g, k_max=k)
    assert r.stable and r.iterations <= 20 and r.growth < 1.1


def test_field_binary_roundtrip(tmp_path):
    g = GoursatGrid(1.0, 0.1, 4, 5, 8)
    res = picard_solve(sine_boundary(g, 1.0, 0.1, 1.0), g, max_iter=3)
    path = tmp_path / "field.bin"
    write_field_binary(path, res.state)
    back = read_field_binary(path)
    assert np.array_equal(back.E, res.state.E) and np.array_equal(back.n, res.state.n)
    assert back.grid == g
    log = tmp_path / "log.jsonl"
    write_iteration_log(log, res.log)
    recs = [json.loads(line) for line in log.read_text().splitlines()]
    assert [r["iteration"] for r in recs] == list(range(1, len(res.log) + 1))


def test_grid_validation():
    with pytest.raises(ValueError):
        GoursatGrid(1.0, 1.0, 4, 4, 12)
    with pytest.raises(ValueError):
        GoursatGrid(1.0, 1.0, 4, 4, 8, dims=3)
    with pytest.raises(ValueError):
        GoursatGrid(1.0, 1.0, 1000, 1000, 1024)


def test_dealias_mask_two_thirds():
    g = GoursatGrid(1.0, 1.0, 2, 2, 16)
    keep = g.dealias_mask()
    modes = np.abs(np.fft.fftfreq(16, d=1 / 16))
    assert np.all(keep == (modes <= 16 / 3))


def test_instability_schedule():
    p = InstabilityParams(64.0)
    assert p.delta == pytest.approx(1 / 64) and p.b == pytest.approx(64**-0.5)
    assert p.alpha == pytest.approx(64**0.2 / 64)
    assert p.delta * np.exp(p.rho_gamma) == pytest.approx(1.0)
    rho_at = np.sqrt(2 * 64 * p.Ebar**2 * p.z_gamma(0.5) * 0.5)
    assert rho_at == pytest.approx(p.rho_gamma)
    with pytest.raises(ValueError):
        InstabilityParams(64.0, eps=0.5, eps_prime=0.3)
    g = instability_grid(p)
    assert g.Z <= p.b and g.L == pytest.approx(1 / 64)
    assert mode_weights(3, 0.1, 0.0) == pytest.approx(0.25 * 1e-3)
    assert mode_weights(1, 0.1, 0.0) == mode_weights(-2, 0.1, 0.0) * 3 / 2
