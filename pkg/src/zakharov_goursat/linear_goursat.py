"""Per-frequency linearized Goursat problem.

For one transverse frequency ``k`` the perturbation ``(u, v, n)`` of the
constant background ``Ebar`` satisfies

    i u_z - k^2 u - Ebar n = f,
    i v_z + k^2 v + Ebar n = g,
    n_tt + k^2 n + k^2 Ebar (u + v) = -k^2 h,

with ``n = n_t = 0`` at ``t = 0`` and ``(u, v) = (u0, v0)`` at ``z = 0``.
Two independent solvers are provided: assembly from the contour kernels of
:mod:`zakharov_goursat.kernels`, and a direct Picard iteration on the grid.
"""

import csv
import time
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, special

from .kernels import (
    LinearizedSymbol,
    QuadratureError,
    assemble_pieces,
    contour_point,
    converged_pieces,
    grid_radius,
    kernel_grid_pieces,
    select_radius,
)
from .quadrature import prodint1, prodint2, prodint_modes

ELL = np.array([1.0, 1.0])
MINUS_PLUS = np.array([-1.0, 1.0])


class ConvergenceError(RuntimeError):
    """Raised when the direct Picard iteration does not reach its tolerance."""


# --- boundary data families with analytic transforms -----------------------


def _sine_transform(sym):
    k2 = sym.k**2
    return lambda zeta: 1.0 / (k2 - zeta**2)


def _resonant_transform(sym):
    k = sym.k
    return lambda zeta: 1.0 / (1j * (zeta - k))


BOUNDARY_FAMILIES = {
    # name: (sampler u0(t, k), transform factory)
    "sine": (lambda t, k: np.sin(k * t) / k, _sine_transform),
    "resonant": (lambda t, k: np.exp(1j * k * t), _resonant_transform),
}


@dataclass
class ModeProblem:
    """One-frequency Goursat problem on ``[0,T] x [0,Z]`` with ``Nt x Nz`` intervals.

    Boundary data are either sampled arrays ``u0, v0`` of length ``Nt+1`` or a
    named family (``"sine"``: ``sin(kt)/k``, ``"resonant"``: ``exp(ikt)``)
    multiplied by ``amplitude`` and placed on the component
    ``family_vector`` (default ``(1, 0)``, i.e. on ``u``). Forcings are arrays of
    shape ``(Nt+1, Nz+1)`` or ``None``.
    """

    sym: LinearizedSymbol
    T: float
    Z: float
    Nt: int
    Nz: int
    u0: np.ndarray = None
    v0: np.ndarray = None
    f: np.ndarray = None
    g: np.ndarray = None
    h: np.ndarray = None
    family: str = None
    amplitude: complex = 1.0
    family_vector: tuple = (1.0, 0.0)

    def __post_init__(self):
        if self.T <= 0 or self.Z <= 0:
            raise ValueError("T and Z must be positive")
        if self.Nt < 2 or self.Nz < 2:
            raise ValueError("grid needs at least two intervals per axis")
        if self.family is not None and self.family not in BOUNDARY_FAMILIES:
            raise ValueError(f"unknown boundary family {self.family!r}")
        if self.family is not None and (self.u0 is not None or self.v0 is not None):
            raise ValueError("give either sampled boundary data or a family, not both")
        shape = (self.Nt + 1, self.Nz + 1)
        for name in ("f", "g", "h"):
            arr = getattr(self, name)
            if arr is not None:
                arr = np.asarray(arr, dtype=complex)
                if arr.shape != shape:
                    raise ValueError(f"{name} must have shape {shape}, got {arr.shape}")
                setattr(self, name, arr)
        for name in ("u0", "v0"):
            arr = getattr(self, name)
            if arr is not None:
                arr = np.asarray(arr, dtype=complex)
                if arr.shape != (self.Nt + 1,):
                    raise ValueError(f"{name} must have length Nt+1")
                setattr(self, name, arr)

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

    def boundary(self):
        """Sampled boundary pair, shape ``(2, Nt+1)``."""
        if self.family is not None:
            sampler, _ = BOUNDARY_FAMILIES[self.family]
            base = self.amplitude * sampler(self.ts, self.sym.k)
            vec = np.asarray(self.family_vector, dtype=complex)
            return vec[:, None] * base[None, :]
        out = np.zeros((2, self.Nt + 1), dtype=complex)
        if self.u0 is not None:
            out[0] = self.u0
        if self.v0 is not None:
            out[1] = self.v0
        return out

    def forcing(self):
        """Forcing triple ``(F, h)`` with ``F`` of shape ``(2, Nt+1, Nz+1)``."""
        shape = (self.Nt + 1, self.Nz + 1)
        F = np.zeros((2,) + shape, dtype=complex)
        if self.f is not None:
            F[0] = self.f
        if self.g is not None:
            F[1] = self.g
        h = np.zeros(shape, dtype=complex) if self.h is None else self.h
        return F, h

    def has_forcing(self):
        return any(getattr(self, n) is not None and np.any(getattr(self, n) != 0) for n in "fgh")

    def scaled(self, c):
        """Problem with all data multiplied by ``c`` (used by linearity checks)."""
        kw = dict(sym=self.sym, T=self.T, Z=self.Z, Nt=self.Nt, Nz=self.Nz,
                  family=self.family, family_vector=self.family_vector)
        if self.family is not None:
            kw["amplitude"] = c * self.amplitude
        for name in ("u0", "v0", "f", "g", "h"):
            arr = getattr(self, name)
            kw[name] = None if arr is None else c * arr
        return ModeProblem(**kw)


@dataclass
class ModeSolution:
    """Solution on the ``(t, z)`` grid: ``U`` has shape ``(2, Nt+1, Nz+1)``."""

    ts: np.ndarray
    zs: np.ndarray
    U: np.ndarray
    n: np.ndarray
    rho_grid: np.ndarray
    method: str
    info: dict = field(default_factory=dict)

    @property
    def u(self):
        return self.U[0]

    @property
    def v(self):
        return self.U[1]


def _rho_grid(sym, ts, zs):
    return sym.rho(ts[:, None], zs[None, :])


# --- convolution assembly ----------------------------------------------------


def _family_terms(p, tol):
    """Boundary propagation for an analytic family, by contour quadrature."""
    sym = p.sym
    ts, zs = p.ts, p.zs
    _, factory = BOUNDARY_FAMILIES[p.family]
    transform = factory(sym)
    radius = grid_radius(p.T, p.Z, sym)
    vec = p.amplitude * np.asarray(p.family_vector, dtype=complex)

    def w_U(zeta):
        return transform(zeta)

    def w_n(zeta):
        return sym.p_weight(zeta, 1) * transform(zeta)

    pu, info_u = converged_pieces(ts, zs, sym, w_U, radius, tol)
    pn, info_n = converged_pieces(ts, zs, sym, w_n, radius, tol)
    MU = assemble_pieces(pu, ts, zs, sym)
    Mn = assemble_pieces(pn, ts, zs, sym)
    U = np.moveaxis(MU @ vec, -1, 0)
    n = sym.Ebar * np.einsum("a,tzab,b->tz", ELL, Mn, vec)
    return U, n, {"boundary_nodes": max(info_u["nodes"], info_n["nodes"]), "radius": radius}


def _sampled_boundary_terms(p, K0, K1):
    """``exp(izA_inf) U0(t) + E0 *_t U0`` and ``Ebar ell E1 *_t U0``."""
    sym = p.sym
    k = sym.k
    ts, zs = p.ts, p.zs
    U0 = p.boundary()
    nt, nz = len(ts), len(zs)
    U = np.zeros((2, nt, nz), dtype=complex)
    U[0] = U0[0][:, None] * np.exp(-1j * k**2 * zs)[None, :]
    U[1] = U0[1][:, None] * np.exp(1j * k**2 * zs)[None, :]
    n = np.zeros((nt, nz), dtype=complex)
    D = U0.T[:, None, None, :]  # (nt, 1, 1, 2) indexed [t, -, a?, b]
    for (s, sig), piece in K0.items():
        zph = np.exp(1j * sig * k**2 * zs)[None, :, None]
        conv = prodint1(piece, D, p.dt, 1j * s * k, axis=0).sum(axis=-1)
        U += np.moveaxis(zph * conv, -1, 0)
    for (s, sig), piece in K1.items():
        zph = np.exp(1j * sig * k**2 * zs)[None, :]
        row = np.einsum("a,tzab->tzb", ELL, piece)
        conv = prodint1(row, U0.T[:, None, :], p.dt, 1j * s * k, axis=0).sum(axis=-1)
        n += sym.Ebar * zph * conv
    return U, n


def _forcing_terms(p, K0, K1, K2):
    sym = p.sym
    k, E = sym.k, sym.Ebar
    F, h = p.forcing()
    ht, hz = p.dt, p.dz
    nt, nz = p.Nt + 1, p.Nz + 1
    U = np.zeros((2, nt, nz), dtype=complex)
    n = np.zeros((nt, nz), dtype=complex)
    # free Schroedinger part: -i int_0^z exp(i(z-z')A_inf) F dz'
    U[0] += -1j * prodint1(1.0, F[0], hz, -1j * k**2, axis=1)
    U[1] += -1j * prodint1(1.0, F[1], hz, 1j * k**2, axis=1)
    # free wave part: -k int_0^t sin(k t') h(t - t') dt'
    n += -k / 2j * (prodint1(1.0, h, ht, 1j * k, axis=0) - prodint1(1.0, h, ht, -1j * k, axis=0))
    Fb = np.moveaxis(F, 0, -1)[:, :, None, :]  # (nt, nz, 1, 2)
    for key in K0:
        s, sig = key
        mt, mz = 1j * s * k, 1j * sig * k**2
        k0, k1, k2 = K0[key], K1[key], K2[key]
        U += np.moveaxis(-1j * prodint2(k0, Fb, ht, hz, mt, mz).sum(axis=-1), -1, 0)
        k1h = k1 @ MINUS_PLUS
        U += np.moveaxis(1j * E * prodint2(k1h, h[:, :, None], ht, hz, mt, mz), -1, 0)
        lk1 = np.einsum("a,tzab->tzb", ELL, k1)
        n += -1j * E * prodint2(lk1, np.moveaxis(F, 0, -1), ht, hz, mt, mz).sum(axis=-1)
        lk2h = np.einsum("a,tzab,b->tz", ELL, k2, MINUS_PLUS)
        n += 1j * E**2 * prodint2(lk2h, h, ht, hz, mt, mz)
    return U, n


def solve_by_convolution(p, tol=1e-12):
    """Assemble the solution from the contour kernels.

    ``U = exp(izA_inf) U0 + E0 *_t U0 - i int exp(i(z-z')A_inf) F - i E0 ** F
    + i Ebar E1 (-1,1)^T ** h`` and
    ``n = Ebar ell E1 *_t U0 - i Ebar ell E1 ** F + i Ebar^2 ell E2 (-1,1)^T ** h
    - k sin(k .) *_t h``, where ``**`` is the causal convolution in ``(t, z)``.
    Analytic boundary families are propagated by contour quadrature of their
    transform; sampled data by product integration in ``t``.
    """
    sym = p.sym
    ts, zs = p.ts, p.zs
    nt, nz = len(ts), len(zs)
    U = np.zeros((2, nt, nz), dtype=complex)
    n = np.zeros((nt, nz), dtype=complex)
    info = {}
    sampled = p.family is None and (p.u0 is not None or p.v0 is not None)
    need_kernels = sampled or p.has_forcing()
    if need_kernels:
        K0, i0 = kernel_grid_pieces(ts, zs, sym, 0, tol)
        K1, i1 = kernel_grid_pieces(ts, zs, sym, 1, tol)
        info.update(kernel_nodes=max(i0["nodes"], i1["nodes"]), radius=i0["radius"])
    if p.family is not None:
        Ub, nb, fam = _family_terms(p, tol)
        U += Ub
        n += nb
        info.update(fam)
    elif sampled:
        Ub, nb = _sampled_boundary_terms(p, K0, K1)
        U += Ub
        n += nb
    if p.has_forcing():
        K2, i2 = kernel_grid_pieces(ts, zs, sym, 2, tol)
        Uf, nf = _forcing_terms(p, K0, K1, K2)
        U += Uf
        n += nf
    # boundary values are data; pin them exactly
    U[:, :, 0] = p.boundary()
    n[0, :] = 0.0
    return ModeSolution(ts, zs, U, n, _rho_grid(sym, ts, zs), "convolution", info)


# --- direct grid oracle -------------------------------------------------------


def _carrier_split(p):
    """Split the boundary data into ``(omega, U0 component)`` pieces.

    Analytic families are split exactly into their time carriers
    (``sin(kt) = (e^{ikt} - e^{-ikt})/2i``); sampled data are kept whole with
    carrier ``omega = 0``.
    """
    k = p.sym.k
    U0 = p.boundary()
    if p.family == "sine":
        vec = p.amplitude * np.asarray(p.family_vector, dtype=complex)[:, None]
        ts = p.ts
        return [
            (k, vec * (np.exp(1j * k * ts) / (2j * k))[None, :]),
            (-k, vec * (-np.exp(-1j * k * ts) / (2j * k))[None, :]),
        ]
    if p.family == "resonant":
        return [(k, U0)]
    return [(0.0, U0)]


def _oracle_single(p, U0, F, h, omega, tol, max_iter):
    """Picard iteration in the frame of the carrier ``exp(i(omega t - k^2 z))``."""
    sym = p.sym
    k, E = sym.k, sym.Ebar
    ts, zs = p.ts, p.zs
    theta = omega * ts[:, None] - k**2 * zs[None, :]
    demod = np.exp(-1j * theta)
    ft, gt, htl = F[0] * demod, F[1] * demod, h * demod
    u_in = (U0[0] * np.exp(-1j * omega * ts))[:, None]
    v_in = (U0[1] * np.exp(-1j * omega * ts))[:, None]
    mu_v = 2j * k**2
    zfac = np.exp(mu_v * zs)[None, :]
    # demodulated density kernel (e^{i(k-omega)tau} - e^{-i(k+omega)tau}) / (2ik)
    rate_a, rate_b = 1j * (k - omega), -1j * (k + omega)
    nd = np.zeros(theta.shape, dtype=complex)
    u = v = None
    history = []
    for _ in range(max_iter):
        q_u = -1j * (E * nd + ft)
        u_new = u_in + integrate.cumulative_trapezoid(q_u, dx=p.dz, axis=1, initial=0)
        q_v = 1j * (E * nd - gt)
        v_new = zfac * v_in + prodint_modes(q_v, p.dz, mu_v, axis=1)
        S = -k**2 * (E * (u_new + v_new) + htl)
        n_new = (prodint_modes(S, p.dt, rate_a, axis=0) - prodint_modes(S, p.dt, rate_b, axis=0)) / (2j * k)
        if u is None:
            delta = np.inf
        else:
            delta = max(np.max(np.abs(u_new - u)), np.max(np.abs(v_new - v)), np.max(np.abs(n_new - nd)))
        u, v, nd = u_new, v_new, n_new
        history.append(float(delta))
        if delta < tol * (1.0 + np.max(np.abs(nd))):
            carrier = np.exp(1j * theta)
            return np.stack([u * carrier, v * carrier]), nd * carrier, history
    raise ConvergenceError(
        f"direct oracle did not converge in {max_iter} iterations (last delta {history[-1]:.3e})"
    )


def solve_direct_oracle(p, tol=1e-12, max_iter=200):
    """Picard iteration on the grid, independent of the contour kernels.

    Each boundary component is demodulated by its time carrier ``omega`` and
    by the ``exp(-i k^2 z)`` phase of ``u``. Given the density, ``u`` follows
    by trapezoid in ``z`` and ``v`` with the exact integrating factor
    ``exp(2ik^2 z)``; given ``(u, v)`` the density follows from the exact
    Duhamel kernel of the demodulated wave equation. Sources are interpolated
    linearly between nodes. Each sub-iteration stops when the sup-norm change
    is below ``tol * (1 + sup|n|)``.
    """
    F, h = p.forcing()
    zero_F = np.zeros_like(F)
    zero_h = np.zeros_like(h)
    U = 0.0
    n = 0.0
    histories = []
    for i, (omega, U0) in enumerate(_carrier_split(p)):
        Fi, hi = (F, h) if i == 0 else (zero_F, zero_h)
        Ui, ni, hist = _oracle_single(p, U0, Fi, hi, omega, tol, max_iter)
        U = U + Ui
        n = n + ni
        histories.append(hist)
    U[:, :, 0] = p.boundary()
    n[0, :] = 0.0
    info = {
        "iterations": max(len(hh) for hh in histories),
        "last_delta": max(hh[-1] for hh in histories),
        "history": histories,
    }
    return ModeSolution(p.ts, p.zs, U, n, _rho_grid(p.sym, p.ts, p.zs), "direct-oracle", info)


def solution_difference(a, b):
    """Sup-norm difference of two solutions relative to the size of ``a`` (``U`` and ``n`` jointly)."""
    scale = max(np.abs(a.U).max(), np.abs(a.n).max())
    diff = max(np.abs(a.U - b.U).max(), np.abs(a.n - b.n).max())
    return float(diff / scale) if scale > 0 else float(diff)


@dataclass
class OracleComparison:
    k: float
    Ebar: float
    sizes: tuple
    errors: tuple
    orders: tuple
    seconds: float


def oracle_comparison(sym, T=1.0, Z=0.5, sizes=(64, 128, 256), family="sine"):
    """Convolution solver against the grid oracle under grid doubling (``N x N`` grids)."""
    start = time.perf_counter()
    errs = []
    for N in sizes:
        p = ModeProblem(sym, T, Z, N, N, family=family)
        errs.append(solution_difference(solve_by_convolution(p), solve_direct_oracle(p)))
    errs = np.array(errs)
    orders = tuple(float(x) for x in np.log2(errs[:-1] / errs[1:])) if len(errs) > 1 else ()
    return OracleComparison(sym.k, sym.Ebar, tuple(sizes), tuple(float(e) for e in errs), orders,
                            time.perf_counter() - start)


# --- real-system structure -----------------------------------------------------


def conjugate_partner(p):
    """Problem for the mirror frequency ``-xi`` of a real system.

    If ``(u, v, n)`` solves ``p`` then ``(conj v, conj u, conj n)`` solves the
    returned problem, whose data are ``(conj v0, conj u0)``, ``f' = -conj g``,
    ``g' = -conj f`` and ``h' = conj h``.
    """
    if p.family is not None:
        U0 = p.boundary()
        u0, v0 = U0[0], U0[1]
    else:
        u0, v0 = p.u0, p.v0

    def conj(a):
        return None if a is None else np.conj(a)

    def neg_conj(a):
        return None if a is None else -np.conj(a)

    return ModeProblem(
        sym=p.sym, T=p.T, Z=p.Z, Nt=p.Nt, Nz=p.Nz,
        u0=conj(v0) if v0 is not None else None,
        v0=conj(u0) if u0 is not None else None,
        f=neg_conj(p.g), g=neg_conj(p.f), h=conj(p.h),
    )


def reassemble_density(sol_plus, sol_minus, xi, x):
    """Density ``n(t, z, x) = n_+ e^{i xi x} + n_- e^{-i xi x}`` of the two mirror modes."""
    x = np.asarray(x)
    return (sol_plus.n[..., None] * np.exp(1j * xi * x) + sol_minus.n[..., None] * np.exp(-1j * xi * x))


# --- growing solution ------------------------------------------------------------


@dataclass
class GrowingSample:
    """Growing solution at one point; ``log_abs_n`` stays finite for large ``rho``."""

    t: float
    z: float
    U: np.ndarray
    n: complex
    rho: float
    log_abs_n: float
    quad_error: float


def growing_solution(sym, t, z, tol=1e-12):
    """Solution with boundary data ``u0 = sin(kt)/k``, ``v0 = 0``, no forcing.

    The transform of the data is ``1/(k^2 - zeta^2)``, so
    ``U = (1/2pi) oint exp(itzeta + izA) R dzeta/(k^2-zeta^2)`` and
    ``n = Ebar (1/2pi) oint exp(itzeta + izA) ell.R p1 dzeta/(k^2-zeta^2)``
    with ``R = (1, 0)``.
    """
    if t < 0 or z < 0:
        raise ValueError("t and z must be nonnegative")
    k2 = sym.k**2
    radius = select_radius(t, z, sym, "E0") if (t > 0 or z > 0) else 1.0

    def w_U(zeta):
        return 1.0 / (k2 - zeta**2)

    def w_n(zeta):
        return sym.p_weight(zeta, 1) / (k2 - zeta**2)

    mU, sU, eU, _ = contour_point(t, z, sym, w_U, radius, tol=tol)
    mn, sn, en, _ = contour_point(t, z, sym, w_n, radius, tol=tol)
    err = max(eU, en)
    if err > 1e-6:
        raise QuadratureError(f"growing solution quadrature did not converge ({err:.2e})")
    n_mant = sym.Ebar * (mn[0, 0] + mn[1, 0])
    with np.errstate(over="ignore"):
        U = mU[:, 0] * np.exp(sU)
        n = n_mant * np.exp(sn)
    log_abs_n = float(np.log(abs(n_mant)) + sn) if n_mant != 0 else -np.inf
    return GrowingSample(float(t), float(z), U, complex(n), float(sym.rho(t, z)), log_abs_n, err)


def growing_solution_grid(sym, ts, zs, tol=1e-12):
    """Growing solution on a product grid; returns ``(U, n)`` with ``U`` of shape ``(2, nt, nz)``."""
    ts = np.asarray(ts, dtype=float)
    zs = np.asarray(zs, dtype=float)
    p = ModeProblem(sym=sym, T=float(ts[-1]), Z=float(zs[-1]), Nt=2, Nz=2, family="sine")
    p_ts, p_zs = ts, zs
    radius = grid_radius(p.T, p.Z, sym)
    k2 = sym.k**2
    pu, _ = converged_pieces(p_ts, p_zs, sym, lambda zeta: 1.0 / (k2 - zeta**2), radius, tol)
    pn, _ = converged_pieces(p_ts, p_zs, sym, lambda zeta: sym.p_weight(zeta, 1) / (k2 - zeta**2), radius, tol)
    MU = assemble_pieces(pu, p_ts, p_zs, sym)
    Mn = assemble_pieces(pn, p_ts, p_zs, sym)
    U = np.moveaxis(MU[..., :, 0], -1, 0)
    n = sym.Ebar * (Mn[..., 0, 0] + Mn[..., 1, 0])
    return U, n


@dataclass
class GrowthFit:
    slope: float
    power: float
    const: float
    rho: np.ndarray
    log_abs_n: np.ndarray
    residual: float


def fit_growth(rho, log_abs_n):
    """Least squares ``ln|n| = slope rho + power ln rho + const``."""
    rho = np.asarray(rho, dtype=float)
    y = np.asarray(log_abs_n, dtype=float)
    if rho.size < 4:
        raise ValueError("growth fit needs at least 4 samples")
    M = np.column_stack([rho, np.log(rho), np.ones_like(rho)])
    coef, *_ = np.linalg.lstsq(M, y, rcond=None)
    res = float(np.max(np.abs(M @ coef - y)))
    return GrowthFit(float(coef[0]), float(coef[1]), float(coef[2]), rho, y, res)


def growth_rate_fit(sym, t_fixed, rho_range, samples=17):
    """Fit the growth law of the growing solution's density along ``t = t_fixed``."""
    lo, hi = rho_range
    if samples < 4:
        raise ValueError("growth fit needs at least 4 samples")
    rho = np.linspace(lo, hi, samples)
    z = rho**2 / (2.0 * sym.k * sym.Ebar**2 * t_fixed)
    logs = np.array([growing_solution(sym, t_fixed, zi).log_abs_n for zi in z])
    return fit_growth(rho, logs)


def asymptotic_density(sym, t, z):
    """Large-``k`` model ``|n| ~ (Ebar t / 2) I1(rho) / rho`` of the growing density.

    It follows from the ``zeta = k`` circle with amplitude ``-Ebar/(4 w^2)`` and
    the Jacobian ``dzeta = i w d theta``; for large ``rho`` it behaves like
    ``rho^{-3/2} e^rho``.
    """
    rho = sym.rho(t, z)
    return sym.Ebar * t * special.i1(rho) / (2.0 * rho)


# --- plane-wave diagnostic ---------------------------------------------------------


@dataclass
class PlaneWaveBand:
    amplified: bool
    rate: float
    matrix_rate: float


def plane_wave_band(sym, tau):
    """Plane-wave amplification diagnostic for real time frequency ``tau``.

    ``rate`` is the textbook formula ``k^2 sqrt(Ebar^2 - k^2 + tau^2)/sqrt(k^2 - tau^2)``
    on the band ``0 < k^2 - tau^2 < Ebar^2``. ``matrix_rate`` is the largest
    ``|Im|`` eigenvalue of ``A(tau)`` itself, whose band is
    ``0 < k^2 - tau^2 < 2 Ebar^2``.
    """
    k, E = sym.k, sym.Ebar
    d = k**2 - tau**2
    if d == 0:
        raise ValueError("tau must avoid +-k")
    amplified = 0.0 < d < E**2
    rate = k**2 * np.sqrt(E**2 - d) / np.sqrt(d) if amplified else 0.0
    lam2 = 1.0 - 2.0 * E**2 / d  # lambda^2/k^2 with a = -k^2 E^2/d
    matrix_rate = k**2 * np.sqrt(-lam2) if lam2 < 0 else 0.0
    return PlaneWaveBand(bool(amplified), float(rate), float(matrix_rate))


# --- integral lemma envelopes -------------------------------------------------------


def _H(u):
    """``int_0^u exp(-sqrt(u')) du' = 2 (1 - (1 + sqrt u) e^{-sqrt u})``."""
    s = np.sqrt(u)
    return 2.0 * (1.0 - (1.0 + s) * np.exp(-s))


def lemma_integrals(lam, z, t):
    """Double integrals of ``exp(-sqrt(lam z' t'))`` over ``[0,z] x [0,t]``.

    Returns ``(I, Iz, It)``: the plain integral and those weighted by ``z'``
    and by ``t'``. The inner integral is done in closed form through ``_H``.
    """
    opts = dict(epsabs=1e-15, epsrel=1e-12, limit=200)

    def inner_t(zp):
        return t if zp == 0 else _H(lam * zp * t) / (lam * zp)

    i_plain = integrate.quad(inner_t, 0.0, z, **opts)[0]
    i_z = integrate.quad(lambda zp: _H(lam * zp * t) / lam, 0.0, z, **opts)[0]
    i_t = integrate.quad(lambda tp: _H(lam * z * tp) / lam, 0.0, t, **opts)[0]
    return i_plain, i_z, i_t


def lemma_integral_ratios(lambdas=(1.0, 10.0, 100.0), points=8):
    """Largest ratios of the double integrals to their envelopes on ``(0,1]^2``.

    Envelopes: ``(1/lam) ln(1 + lam z t)``, ``z/lam`` and ``t/lam``.
    """
    grid = np.linspace(1.0 / points, 1.0, points)
    worst = np.zeros(3)
    for lam in lambdas:
        for z in grid:
            for t in grid:
                env = np.array([np.log1p(lam * z * t) / lam, z / lam, t / lam])
                worst = np.maximum(worst, np.array(lemma_integrals(lam, z, t)) / env)
    return {"C_log": float(worst[0]), "C_z": float(worst[1]), "C_t": float(worst[2])}


# --- export -----------------------------------------------------------------------------


def write_solution_csv(sol, path):
    """Write ``t, z, Re/Im u, v, n`` rows (dimensionless units)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t [1]", "z [1]", "rho [1]", "re_u [1]", "im_u [1]", "re_v [1]", "im_v [1]", "re_n [1]", "im_n [1]"])
        for i, t in enumerate(sol.ts):
            for j, z in enumerate(sol.zs):
                u, v, n = sol.U[0, i, j], sol.U[1, i, j], sol.n[i, j]
                w.writerow([repr(float(t)), repr(float(z)), repr(float(sol.rho_grid[i, j])),
                            repr(u.real), repr(u.imag), repr(v.real), repr(v.imag), repr(n.real), repr(n.imag)])
