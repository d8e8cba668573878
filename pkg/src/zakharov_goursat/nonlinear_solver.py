"""Nonlinear Goursat problem for the dimensionless Zakharov system.

    i E_z + Lap_x E = n E,
    (d_t^2 - Lap_x) n = Lap_x |E|^2,
    n = n_t = 0 at t = 0,  E = E0 at z = 0,

with ``x`` periodic of period ``2 pi L`` in ``d = 1`` or ``2`` dimensions. The
Schroedinger part is marched in ``z`` by Strang splitting, the wave part is
solved mode by mode with the exact Duhamel kernel, and the two are coupled by
plain Picard iteration.
"""

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import trapezoid

from .kernels import LinearizedSymbol
from .linear_goursat import growing_solution_grid
from .quadrature import prodint_modes

DEFAULT_MEMORY_CAP = 60_000_000
WAVE_CHUNK = 4_000_000


class PicardDivergence(RuntimeError):
    """Raised on request when the Picard iterates blow up."""


@dataclass(frozen=True)
class GoursatGrid:
    """Uniform ``(t, z)`` grid with ``Nt x Nz`` intervals and ``Nx^d`` transverse points."""

    T: float
    Z: float
    Nt: int
    Nz: int
    Nx: int
    L: float = 1.0
    dims: int = 1
    memory_cap: int = DEFAULT_MEMORY_CAP

    def __post_init__(self):
        if self.T <= 0 or self.Z <= 0 or self.L <= 0:
            raise ValueError("T, Z and L must be positive")
        if self.Nx < 2 or self.Nx & (self.Nx - 1):
            raise ValueError(f"Nx must be a power of two, got {self.Nx}")
        if self.dims not in (1, 2):
            raise ValueError("dims must be 1 or 2")
        if self.Nt < 1 or self.Nz < 1:
            raise ValueError("Nt and Nz must be positive")
        size = (self.Nt + 1) * (self.Nz + 1) * self.Nx**self.dims
        if size > self.memory_cap:
            raise ValueError(f"grid has {size} points, above the memory cap {self.memory_cap}")

    @property
    def ts(self):
        return np.linspace(0.0, self.T, self.Nt + 1)

    @property
    def zs(self):
        return np.linspace(0.0, self.Z, self.Nz + 1)

    @property
    def dt(self):
        return self.T / self.Nt

    @property
    def dz(self):
        return self.Z / self.Nz

    @property
    def x(self):
        return 2.0 * np.pi * self.L * np.arange(self.Nx) / self.Nx

    @property
    def axes(self):
        return tuple(range(-self.dims, 0))

    @property
    def slice_shape(self):
        return (self.Nx,) * self.dims

    @property
    def field_shape(self):
        return (self.Nt + 1, self.Nz + 1) + self.slice_shape

    def mode_index(self):
        """Integer mode numbers per axis, broadcastable over a transverse slice."""
        m = np.fft.fftfreq(self.Nx, d=1.0 / self.Nx)
        if self.dims == 1:
            return (m,)
        return (m[:, None], m[None, :])

    def xi2(self):
        """``|xi|^2`` on the transverse spectral grid (``xi = m / L``)."""
        return sum((m / self.L) ** 2 for m in self.mode_index())

    def dealias_mask(self):
        """Two-thirds rule: keep ``|m| <= Nx/3`` on every axis."""
        mask = True
        for m in self.mode_index():
            mask = mask & (np.abs(m) <= self.Nx / 3.0)
        return np.broadcast_to(mask, self.slice_shape)

    def band_mask(self, k_max):
        """Keep ``|xi| <= k_max``."""
        return self.xi2() <= k_max**2 * (1.0 + 1e-12)

    def mesh(self):
        """Transverse coordinates as a tuple of broadcastable arrays."""
        x = self.x
        if self.dims == 1:
            return (x,)
        return (x[:, None], x[None, :])


@dataclass
class FieldState:
    """``E`` (complex) and ``n`` (real) on the full ``(t, z, x)`` grid."""

    grid: GoursatGrid
    E: np.ndarray
    n: np.ndarray
    diagnostics: dict = field(default_factory=dict)


@dataclass
class PicardResult:
    state: FieldState
    iterations: int
    converged: bool
    diverged: bool
    log: list

    @property
    def contraction(self):
        """Ratios of successive changes (the last few estimate the contraction factor)."""
        d = [rec["delta"] for rec in self.log if np.isfinite(rec["delta"])]
        return [b / a for a, b in zip(d[:-1], d[1:]) if a > 0]


def _fft(a, grid):
    return np.fft.fftn(a, axes=grid.axes)


def _ifft(a, grid):
    return np.fft.ifftn(a, axes=grid.axes)


def _spectral_filter(grid, k_max):
    if k_max is None:
        return None
    return grid.band_mask(k_max)


def schrodinger_march(n, E0, grid, k_max=None, out=None, track_change=False):
    """March ``i E_z + Lap E = n E`` from ``z = 0`` to ``Z`` for all ``t`` at once.

    Strang splitting: half dispersion step, potential step with the midpoint
    density ``exp(-i dz (n_j + n_{j+1})/2)``, half dispersion step. Every
    sub-step is unitary for real ``n``. With ``k_max`` the transverse modes
    ``|xi| > k_max`` are removed. ``out`` may be an existing field that is
    overwritten slice by slice; with ``track_change`` the sup-norm difference
    to its previous content is returned as well.
    """
    E0 = np.asarray(E0, dtype=complex)
    if E0.shape != (grid.Nt + 1,) + grid.slice_shape:
        raise ValueError(f"E0 must have shape {(grid.Nt + 1,) + grid.slice_shape}")
    half = np.exp(-0.5j * grid.xi2() * grid.dz)
    keep = _spectral_filter(grid, k_max)
    E = np.empty(grid.field_shape, dtype=complex) if out is None else out
    change = 0.0
    cur = _fft(E0, grid)
    if keep is not None:
        cur = cur * keep
    first = _ifft(cur, grid)
    if track_change:
        change = max(change, float(np.max(np.abs(first - E[:, 0]))))
    E[:, 0] = first
    for j in range(grid.Nz):
        nmid = 0.5 * (n[:, j] + n[:, j + 1])
        tmp = _ifft(cur * half, grid) * np.exp(-1j * grid.dz * nmid)
        cur = _fft(tmp, grid) * half
        if keep is not None:
            cur = cur * keep
        nxt = _ifft(cur, grid)
        if track_change:
            change = max(change, float(np.max(np.abs(nxt - E[:, j + 1]))))
        E[:, j + 1] = nxt
    return (E, change) if track_change else E


def wave_solve(source, grid, k_max=None, return_residue=False):
    """Solve ``(d_t^2 - Lap) n = Lap h`` with zero initial data, ``z`` as a parameter.

    Per transverse mode ``xi != 0``:
    ``n_xi(t) = -|xi| int_0^t sin(|xi| tau) h_xi(t - tau) d tau``, with ``h``
    interpolated linearly in ``t`` and the oscillation integrated exactly. The
    source spectrum is dealiased by the two-thirds rule (and cut at ``k_max``
    when given); the mean mode is zero.
    """
    source = np.asarray(source)
    if source.shape != grid.field_shape:
        raise ValueError(f"source must have shape {grid.field_shape}")
    omega = np.sqrt(grid.xi2())
    keep = grid.dealias_mask() & (omega > 0)
    if k_max is not None:
        keep = keep & grid.band_mask(k_max)
    n = np.empty(grid.field_shape, dtype=float)
    residue = 0.0
    per_z = (grid.Nt + 1) * grid.Nx**grid.dims
    chunk = max(1, WAVE_CHUNK // per_z)
    for j0 in range(0, grid.Nz + 1, chunk):
        sl = slice(j0, min(grid.Nz + 1, j0 + chunk))
        hh = _fft(source[:, sl], grid) * keep
        plus = prodint_modes(hh, grid.dt, 1j * omega[None], axis=0)
        minus = prodint_modes(hh, grid.dt, -1j * omega[None], axis=0)
        nh = -omega * (plus - minus) / 2j
        val = _ifft(nh, grid)
        if return_residue:
            scale = float(np.max(np.abs(val.real)))
            if scale > 0:
                residue = max(residue, float(np.max(np.abs(val.imag))) / scale)
        n[:, sl] = val.real
    return (n, residue) if return_residue else n


def _sup(a):
    return float(np.max(np.abs(a))) if a.size else 0.0


def picard_solve(E0, grid, tol=1e-10, max_iter=50, k_max=None, n_init=None, raise_on_divergence=False):
    """Fixed point ``E = march(n, E0)``, ``n = wave(|E|^2)`` by plain Picard iteration.

    The iteration starts from ``n = 0`` (or ``n_init``) and stops when both
    relative sup-norm changes, ``|dE|/|E|`` and ``|dn|/|n|``, are below
    ``tol``. Non-convergence is reported, not raised; a non-finite iterate
    marks the run as diverged.
    """
    E0 = np.asarray(E0, dtype=complex)
    n = np.zeros(grid.field_shape) if n_init is None else np.array(n_init, dtype=float)
    E = schrodinger_march(n, E0, grid, k_max)
    log = []
    converged = diverged = False
    it = 0
    for it in range(1, max_iter + 1):
        n_new = wave_solve(np.abs(E) ** 2, grid, k_max)
        dn = _sup(n_new - n)
        n = n_new
        E, dE = schrodinger_march(n, E0, grid, k_max, out=E, track_change=True)
        supE, supn = _sup(E), _sup(n)
        rel_E = dE / supE if supE > 0 else dE
        rel_n = dn / supn if supn > 0 else dn
        delta = max(rel_E, rel_n)
        log.append({"iteration": it, "delta_E": rel_E, "delta_n": rel_n, "delta": delta, "sup_n": supn})
        if not np.isfinite(delta) or not np.isfinite(supE):
            diverged = True
            break
        if delta < tol:
            converged = True
            break
    if diverged and raise_on_divergence:
        raise PicardDivergence(f"Picard iterates became non-finite at iteration {it}")
    state = FieldState(grid, E, n, {"iterations": it})
    return PicardResult(state, it, converged, diverged, log)


# --- diagnostics ----------------------------------------------------------------


def l2_norms(E, grid):
    """``L^2`` norm over the transverse torus of each ``(t, z)`` slice."""
    cell = (2.0 * np.pi * grid.L / grid.Nx) ** grid.dims
    return np.sqrt(np.sum(np.abs(E) ** 2, axis=grid.axes) * cell)


def conservation_drift(E, grid):
    """Largest relative change of the slice ``L^2`` norm along ``z``, per unit ``z``."""
    norms = l2_norms(E, grid)
    ref = np.maximum(norms[:, :1], 1e-300)
    return float(np.max(np.abs(norms - norms[:, :1]) / ref) / grid.Z)


def structure_report(state):
    """Reality and zero-mean residues of ``n``."""
    grid = state.grid
    n = state.n
    scale = max(_sup(n), 1e-300)
    mean = np.mean(n, axis=grid.axes)
    return {
        "is_real": bool(np.isrealobj(n)),
        "mean_residue": float(np.max(np.abs(mean)) / scale),
        "initial_residue": float(_sup(n[0]) / scale),
    }


def energy_identity_residual(n, h, grid):
    """Discrete check of ``dW/dt = int n_t Lap h`` with ``W = 1/2 int (n_t^2 + |grad n|^2)``.

    Time derivatives are second-order central differences, space derivatives
    spectral; returns the sup of the residual relative to the sup of the
    right-hand side, at interior time nodes.
    """
    dt = grid.dt
    cell = (2.0 * np.pi * grid.L / grid.Nx) ** grid.dims
    xi2 = grid.xi2()
    nt = np.gradient(n, dt, axis=0, edge_order=2)
    nh = _fft(n, grid)
    grad2 = np.sum(np.abs(nh) ** 2 * xi2, axis=grid.axes) * cell / grid.Nx**grid.dims
    W = 0.5 * np.sum(nt**2, axis=grid.axes) * cell + 0.5 * grad2
    dW = np.gradient(W, dt, axis=0, edge_order=2)
    lap_h = _ifft(-xi2 * _fft(h, grid), grid).real
    rhs = np.sum(nt * lap_h, axis=grid.axes) * cell
    res = np.abs(dW - rhs)[2:-2]
    return float(np.max(res) / max(np.max(np.abs(rhs)), 1e-300))


# --- boundary data families -------------------------------------------------------


def sine_boundary(grid, Ebar, alpha, k, ramp=None):
    """``Ebar + alpha sin(kt)/k e^{ikx}`` on ``t >= 0`` (optional ramp ``tanh(t/ramp)``)."""
    t = grid.ts[:, None]
    x = grid.mesh()[0]
    e = alpha * np.sin(k * t) / k * np.exp(1j * k * x)
    if grid.dims == 2:
        e = e[..., None] * np.ones(grid.Nx)
    E0 = Ebar + e
    if ramp:
        E0 = E0 * np.tanh(grid.ts / ramp).reshape((-1,) + (1,) * grid.dims)
    return E0.astype(complex)


def resonant_boundary(grid, Ebar, alpha, k):
    """``Ebar + alpha e^{ikt} e^{ikx}``, the acoustic-resonant perturbation."""
    t = grid.ts[:, None]
    x = grid.mesh()[0]
    e = alpha * np.exp(1j * k * t) * np.exp(1j * k * x)
    if grid.dims == 2:
        e = e[..., None] * np.ones(grid.Nx)
    return (Ebar + e).astype(complex)


# --- filtered stability -----------------------------------------------------------


@dataclass
class FilteredStability:
    rho_max: float
    stable: bool
    growth: float
    iterations: int
    converged: bool
    contraction: float


STABLE_GROWTH = 2.0 * np.exp(0.5)


def filtered_stability_check(E0, grid, k_max, tol=1e-10, max_iter=50):
    """Picard solve with all modes above ``k_max`` removed; measure mode growth.

    ``growth`` is the largest ratio, over nonzero modes with ``|xi| <= k_max``
    present in the data, of the sup over the grid of the mode amplitude to its
    sup on the boundary. ``Ebar`` is the sup over ``t`` of the boundary mean.
    """
    E0 = np.asarray(E0, dtype=complex)
    res = picard_solve(E0, grid, tol=tol, max_iter=max_iter, k_max=k_max)
    keep = grid.band_mask(k_max) & (grid.xi2() > 0)
    spec0 = np.fft.fftn(E0, axes=grid.axes) / grid.Nx**grid.dims
    Ebar = float(np.max(np.abs(spec0[(slice(None),) + (0,) * grid.dims])))
    rho_max = float(np.sqrt(2.0 * k_max * Ebar**2 * grid.Z * grid.T))
    amp_in = np.max(np.abs(spec0), axis=0)
    present = keep & (amp_in > 1e-12 * max(Ebar, 1e-300))
    growth = 1.0
    if np.any(present):
        best = 0.0
        for j in range(grid.Nz + 1):
            sp = np.max(np.abs(np.fft.fftn(res.state.E[:, j], axes=grid.axes)), axis=0) / grid.Nx**grid.dims
            best = np.maximum(best, sp)
        growth = float(np.max(best[present] / amp_in[present]))
    ratios = res.contraction
    contraction = float(max(ratios[-3:])) if ratios else 0.0
    stable = res.converged and growth <= STABLE_GROWTH
    return FilteredStability(rho_max, bool(stable), growth, res.iterations, res.converged, contraction)


# --- instability experiment ----------------------------------------------------------


@dataclass(frozen=True)
class InstabilityParams:
    """Parameter schedule ``delta = k^-sigma``, ``b = k^-eps``, ``gamma = k^eps'``."""

    k: float
    sigma: float = 1.0
    eps: float = 0.5
    eps_prime: float = 0.2
    Ebar: float = 1.5
    T: float = 1.0
    s: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.eps < 1.0:
            raise ValueError("eps must lie in (0, 1)")
        if not 0.0 < self.eps_prime < 0.5 * self.eps:
            raise ValueError("eps_prime must lie in (0, eps/2)")
        if self.sigma <= 0 or self.k < 2:
            raise ValueError("need sigma > 0 and k >= 2")

    @property
    def delta(self):
        return self.k ** (-self.sigma)

    @property
    def b(self):
        return self.k ** (-self.eps)

    @property
    def gamma(self):
        return self.k**self.eps_prime

    @property
    def alpha(self):
        return self.gamma * self.delta

    @property
    def rho_gamma(self):
        """Value of ``rho`` on the curve ``delta e^rho = 1``."""
        return self.sigma * np.log(self.k)

    def z_gamma(self, t):
        """``z`` on that curve at time ``t``."""
        return self.rho_gamma**2 / (2.0 * self.k * self.Ebar**2 * t)

    def smallness(self, C0=1.0, C1=1.0):
        """Left-hand sides of the two smallness conditions with unit constants."""
        k, g2 = self.k, self.gamma**2
        lhs1 = 4.0 * C0 * C1 * g2 * (self.b + np.log(k) / k)
        lhs2 = 4.0 * C0 * C1 * g2 * (np.log(abs(np.log(self.delta))) / k + 1.0 / k)
        return {
            "cond1_lhs": float(lhs1), "cond1_ok": bool(lhs1 <= 1.0),
            "cond2_lhs": float(lhs2), "cond2_rhs": self.Ebar**2, "cond2_ok": bool(lhs2 <= self.Ebar**2),
        }


def mode_weights(p, delta, rho, s=1.0):
    """Harmonic weights ``(1+|p|)^-s delta^<p> e^{<p> rho}``, ``<p> = max(2, |p|)``."""
    pa = max(2, abs(int(p)))
    return (1.0 + abs(p)) ** (-s) * delta**pa * np.exp(pa * rho)


def instability_grid(params, Nx=32, z_margin=1.1, kdt=0.35, k2dz=0.3):
    """Grid resolving the carrier: ``k dt <= kdt``, ``k^2 dz <= k2dz``, period ``2 pi / k``."""
    k = params.k
    Z = min(params.b, z_margin * params.z_gamma(params.T))
    Nt = int(np.ceil(params.T * k / kdt))
    Nz = int(np.ceil(Z * k**2 / k2dz))
    return GoursatGrid(T=params.T, Z=Z, Nt=Nt, Nz=Nz, Nx=Nx, L=1.0 / k, dims=1)


@dataclass
class InstabilityReport:
    k: float
    params: InstabilityParams
    Z: float
    boundary_H1: float
    sup_n_gamma: float
    sup_n1_gamma: float
    linear_n1_gamma: float
    ratio_range: tuple
    harmonic_C: dict
    remainder_C: float
    converged: bool
    iterations: int
    smallness: dict
    log: list

    def as_row(self):
        lo, hi = self.ratio_range
        return {
            "k": self.k, "Z": self.Z, "boundary_H1": self.boundary_H1,
            "sup_n_gamma": self.sup_n_gamma, "sup_n1_gamma": self.sup_n1_gamma,
            "linear_n1_gamma": self.linear_n1_gamma, "ratio_min": lo, "ratio_max": hi,
            "harmonic_C": max(self.harmonic_C.values()) if self.harmonic_C else 0.0,
            "remainder_C": self.remainder_C, "converged": self.converged, "iterations": self.iterations,
        }


def boundary_h1_norm(E0, grid, Ebar):
    """``H^1`` norm of the perturbation ``E0 - Ebar`` on ``[0,T] x (R / 2 pi Z)``.

    The transverse integral uses the spectral coefficients over a ``2 pi``
    torus; ``x``-derivatives are exact, ``t``-derivatives second-order.
    """
    e = np.asarray(E0) - Ebar
    coef = np.fft.fft(e, axis=-1) / grid.Nx
    xi = np.fft.fftfreq(grid.Nx, d=1.0 / grid.Nx) / grid.L
    et = np.gradient(coef, grid.dt, axis=0, edge_order=2)
    dens = 2.0 * np.pi * np.sum((1.0 + xi**2) * np.abs(coef) ** 2 + np.abs(et) ** 2, axis=-1)
    return float(np.sqrt(trapezoid(dens, dx=grid.dt)))


def instability_experiment(params, Nx=32, tol=1e-8, max_iter=60, grid=None):
    """Run the boundary data ``Ebar + alpha sin(kt)/k e^{ikx}`` and measure the trends.

    The computational torus has period ``2 pi / k`` (only harmonics of ``k``
    are excited); ``L^2`` norms are reported over the ``2 pi`` torus. The
    curve ``delta e^rho = 1`` is realized as the node nearest to it in ``z``
    for every time node.
    """
    grid = instability_grid(params, Nx) if grid is None else grid
    k, Ebar = params.k, params.Ebar
    E0 = sine_boundary(grid, Ebar, params.alpha, k)
    res = picard_solve(E0, grid, tol=tol, max_iter=max_iter)
    n = res.state.n
    ts, zs = grid.ts, grid.zs
    nh = np.fft.fft(n, axis=-1) / grid.Nx  # coefficient of e^{i p k x}
    p_of = np.fft.fftfreq(grid.Nx, d=1.0 / grid.Nx).astype(int)
    norm2pi = np.sqrt(2.0 * np.pi * np.sum(np.abs(nh) ** 2, axis=-1))
    sym = LinearizedSymbol(k, Ebar)
    _, nu = growing_solution_grid(sym, ts, zs)
    nu = params.alpha * nu
    rho = sym.rho(ts[:, None], zs[None, :])
    de = params.delta * np.exp(rho)
    # curve delta e^rho = 1
    gamma_pts = []
    for i, t in enumerate(ts):
        if t <= 0:
            continue
        zg = params.z_gamma(t)
        if zg <= grid.Z:
            gamma_pts.append((i, int(np.rint(zg / grid.dz))))
    if gamma_pts:
        gi, gj = np.array(gamma_pts).T
        sup_n_gamma = float(np.max(norm2pi[gi, gj]))
        sup_n1_gamma = float(np.max(np.abs(nh[gi, gj, 1])))
        lin_gamma = float(np.max(np.abs(nu[gi, gj])))
    else:
        sup_n_gamma = sup_n1_gamma = lin_gamma = float("nan")
    # linear agreement where delta^2 e^{2 rho} <= 0.1 delta e^rho
    region = de <= 0.1
    ratio_range = (float("nan"), float("nan"))
    if np.any(region):
        mag = np.abs(nu)
        col_max = np.max(np.where(region, mag, 0.0), axis=0, keepdims=True)
        sel = region & (mag >= 0.1 * col_max) & (col_max > 0)
        ratio = np.abs(nh[..., 1])[sel] / mag[sel]
        ratio_range = (float(np.min(ratio)), float(np.max(ratio)))
    # harmonic content of the remainder on Omega = {delta e^rho <= 1}; beyond
    # |p| = 4 the weights delta^|p| drop below the iteration tolerance
    omega = de <= 1.0
    harmonic_C = {}
    lin = {1: nu, -1: np.conj(nu)}
    for idx, p in enumerate(p_of):
        if p == 0 or abs(p) > 4 or abs(p) > grid.Nx / 3:
            continue
        rem = nh[..., idx] - lin.get(p, 0.0)
        w = mode_weights(p, params.delta, rho, params.s)
        harmonic_C[int(p)] = float(np.max(np.abs(rem)[omega] / w[omega]))
    rem1 = np.abs(nh[..., 1] - nu)[omega] / (params.delta**2 * np.exp(2.0 * rho[omega]))
    return InstabilityReport(
        k=k, params=params, Z=grid.Z,
        boundary_H1=boundary_h1_norm(E0, grid, Ebar),
        sup_n_gamma=sup_n_gamma, sup_n1_gamma=sup_n1_gamma, linear_n1_gamma=lin_gamma,
        ratio_range=ratio_range, harmonic_C=harmonic_C, remainder_C=float(np.max(rem1)),
        converged=res.converged, iterations=res.iterations,
        smallness=params.smallness(), log=res.log,
    )


def instability_sweep(ks=(32, 64, 128), **kw):
    """Run the experiment for each ``k`` with shared exponents."""
    extra = {key: kw.pop(key) for key in ("Nx", "tol", "max_iter") if key in kw}
    return [instability_experiment(InstabilityParams(k=float(k), **kw), **extra) for k in ks]


# --- Picard frontier -------------------------------------------------------------------


def frontier_grid(k, T, Z, Nx=8, kdt=0.3, k2dz=0.5, min_steps=16):
    Nt = max(min_steps, int(np.ceil(T * k / kdt)))
    Nz = max(min_steps, int(np.ceil(Z * k**2 / k2dz)))
    return GoursatGrid(T=T, Z=Z, Nt=Nt, Nz=Nz, Nx=Nx, L=1.0 / k)


def converges_within(k, Ebar, T, Z, alpha_rel=1e-3, max_iter=20, tol=1e-8):
    """Does Picard converge in ``max_iter`` iterations for resonant data on ``[0,T] x [0,Z]``?"""
    grid = frontier_grid(k, T, Z)
    E0 = resonant_boundary(grid, Ebar, alpha_rel * Ebar, k)
    res = picard_solve(E0, grid, tol=tol, max_iter=max_iter)
    return res.converged, res.iterations


@dataclass
class FrontierPoint:
    k: float
    Ebar: float
    T: float
    Z: float
    rho: float
    rho_bracket: tuple


def picard_frontier(k, Ebar, T, alpha_rel=1e-3, max_iter=20, tol=1e-8, rho_bracket=(4.0, 24.0), steps=3):
    """Largest ``Z`` for which Picard converges within ``max_iter`` iterations.

    Bisection is geometric in ``rho = sqrt(2 k Ebar^2 Z T)``, starting from a
    bracket whose lower end must converge (checked) and whose upper end is
    assumed to fail (not run: it is the most expensive solve). The returned
    ``Z`` is the geometric midpoint of the final bracket.
    """
    def z_of(rho):
        return rho**2 / (2.0 * k * Ebar**2 * T)

    lo, hi = rho_bracket
    if not converges_within(k, Ebar, T, z_of(lo), alpha_rel, max_iter, tol)[0]:
        return FrontierPoint(k, Ebar, T, z_of(lo), lo, (0.0, lo))
    for _ in range(steps):
        mid = np.sqrt(lo * hi)
        if converges_within(k, Ebar, T, z_of(mid), alpha_rel, max_iter, tol)[0]:
            lo = mid
        else:
            hi = mid
    rho = float(np.sqrt(lo * hi))
    return FrontierPoint(k, Ebar, T, z_of(rho), rho, (float(lo), float(hi)))


def frontier_sweep(points=None, **kw):
    return [picard_frontier(k, E, T, **kw) for k, E, T in (points or FRONTIER_SWEEP)]


# frontier sweep over (k, Ebar, T); every point satisfies k >= 4 Ebar^2
FRONTIER_SWEEP = ((8.0, 1.0, 1.0), (16.0, 1.0, 1.0), (16.0, 2.0, 1.0), (32.0, 2.0, 1.0), (16.0, 2.0, 2.0))


# --- export ------------------------------------------------------------------------------


def write_field_binary(path, state):
    """Flat binary snapshot: one JSON header line, then ``Re E, Im E, n`` as float64.

    Arrays are row-major over ``(t, z, x...)``; the header records the grid
    and the byte layout.
    """
    g = state.grid
    header = {
        "format": "zakharov-goursat-field/1",
        "T": g.T, "Z": g.Z, "Nt": g.Nt, "Nz": g.Nz, "Nx": g.Nx, "L": g.L, "dims": g.dims,
        "shape": list(g.field_shape), "dtype": "<f8", "order": "C",
        "blocks": ["re_E", "im_E", "n"],
    }
    with open(path, "wb") as fh:
        fh.write((json.dumps(header) + "\n").encode())
        for arr in (state.E.real, state.E.imag, state.n):
            fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())


def read_field_binary(path):
    with open(path, "rb") as fh:
        header = json.loads(fh.readline())
        shape = tuple(header["shape"])
        count = int(np.prod(shape))
        data = np.frombuffer(fh.read(), dtype="<f8")
    blocks = data.reshape(3, count)
    grid = GoursatGrid(header["T"], header["Z"], header["Nt"], header["Nz"], header["Nx"], header["L"], header["dims"])
    E = (blocks[0] + 1j * blocks[1]).reshape(shape)
    return FieldState(grid, E, blocks[2].reshape(shape).copy())


def write_iteration_log(path, log):
    """Iteration records as JSON lines."""
    with open(path, "w") as fh:
        for rec in log:
            fh.write(json.dumps(rec) + "\n")
