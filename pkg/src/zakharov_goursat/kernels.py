"""Fundamental-solution kernels of the linearized Goursat problem.

For one transverse frequency ``k`` and a real background amplitude ``Ebar``
the Fourier-Laplace symbol (transform ``exp(-i t zeta)``, ``Im zeta < 0``) of
the linearized system is

    d/dz U = i A(zeta) U + ...,   a = k^2 Ebar^2 / (zeta^2 - k^2),
    A = [[-k^2 - a, -a], [a, a + k^2]].

The kernels are inverse transforms of ``exp(i z A) p(zeta)`` with
``p in {1, k^2/(zeta^2-k^2), k^4/(zeta^2-k^2)^2}`` and reduce to contour
integrals over two circles around the poles ``zeta = +-k``. They are 2x2
matrices; the density-side quantities are obtained by contracting with
``ell = (1, 1)``.

Near ``zeta = s k`` the eigenvalues of ``A`` are ``+-k lambda`` with
``lambda = sqrt(k^2 + 2a)``, so each circle splits into two phase branches
``exp(i (s k t + sigma k^2 z))`` times a slowly varying amplitude. The split
form is what the convolution solvers consume.
"""

from dataclasses import dataclass

import numpy as np

NODE_CAP = 2**16
DEFAULT_NODES = 64
KERNEL_TOL = 1e-10
POLE_GUARD = 1e-14
LOG_SCALE_THRESHOLD = 25.0


class PoleProximityError(ValueError):
    """Raised when the symbol is evaluated too close to ``zeta = +-k``."""


class DomainError(ValueError):
    """Raised when a branch-sensitive quantity is requested outside its annulus."""


class QuadratureError(RuntimeError):
    """Raised when node doubling fails to converge."""


@dataclass(frozen=True)
class LinearizedSymbol:
    """Symbol data for one transverse frequency.

    ``Ebar`` is the modulus of the background field; its phase is removed by
    a gauge rotation.
    """

    k: float
    Ebar: float = 1.0

    def __post_init__(self):
        if not self.k > 0:
            raise ValueError(f"k must be positive, got {self.k}")
        if not self.Ebar >= 0:
            raise ValueError(f"Ebar must be nonnegative, got {self.Ebar}")

    @property
    def regime_ok(self):
        """Large-frequency regime ``k >= max(1, 4 Ebar^2)``."""
        return self.k >= max(1.0, 4.0 * self.Ebar**2)

    def rho(self, t, z):
        """Amplification factor ``sqrt(2 k Ebar^2 z t)``."""
        return np.sqrt(2.0 * self.k * self.Ebar**2 * np.asarray(z) * np.asarray(t))

    def a(self, zeta):
        zeta = np.asarray(zeta, dtype=complex)
        k2 = self.k**2
        d = zeta**2 - k2
        if np.any(np.abs(d) < POLE_GUARD * k2):
            raise PoleProximityError("zeta is within the pole guard of +-k")
        return k2 * self.Ebar**2 / d

    def p_weight(self, zeta, order):
        """Weight ``(k^2/(zeta^2-k^2))^order`` of the kernel of that order."""
        zeta = np.asarray(zeta, dtype=complex)
        if order == 0:
            return np.ones_like(zeta)
        k2 = self.k**2
        return (k2 / (zeta**2 - k2)) ** order


@dataclass(frozen=True)
class ContourSpec:
    """Circle of the quadrature contour.

    A kernel evaluation uses the two circles ``|zeta - center| = radius`` with
    ``center = +k`` and ``center = -k``; ``center`` records the first one.
    """

    radius: float
    nodes: int = DEFAULT_NODES
    center: complex = None

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("radius must be positive")
        n = self.nodes
        if n < 64 or n & (n - 1):
            raise ValueError(f"nodes must be a power of two >= 64, got {n}")


@dataclass
class KernelSample:
    """Kernel value at one point ``(t, z)``.

    ``value`` is the 2x2 matrix; ``log_abs`` is the log of its max-modulus
    entry, which remains finite when ``value`` would overflow.
    """

    t: float
    z: float
    value: np.ndarray
    rho: float
    quad_error: float
    nodes: int
    radius: float
    regime_ok: bool
    log_abs: float

    @property
    def density(self):
        """Contraction ``ell . value`` with ``ell = (1, 1)`` (a row vector)."""
        return self.value.sum(axis=0)


def A_infinity(sym):
    """Limit of ``A(zeta)`` as ``|zeta| -> infinity``."""
    return np.diag([-sym.k**2, sym.k**2]).astype(complex)


def matrix_A(zeta, sym):
    """Symbol matrix ``A(zeta)``; broadcasts over array ``zeta`` (leading dims)."""
    zeta = np.asarray(zeta, dtype=complex)
    a = sym.a(zeta)
    k2 = sym.k**2
    A = np.empty(zeta.shape + (2, 2), dtype=complex)
    A[..., 0, 0] = -k2 - a
    A[..., 0, 1] = -a
    A[..., 1, 0] = a
    A[..., 1, 1] = a + k2
    return A


def _sinc(x):
    x = np.asarray(x, dtype=complex)
    out = np.empty_like(x)
    small = np.abs(x) < 1e-4
    xs = x[small] ** 2
    out[small] = 1.0 - xs / 6.0 + xs**2 / 120.0
    out[~small] = np.sin(x[~small]) / x[~small]
    return out


def exp_izA(zeta, z, sym):
    """Matrix exponential ``exp(i z A(zeta))``.

    Uses ``A^2 = k^2 lambda^2 Id``: ``exp(izA) = cos(x) Id + i z sinc(x) A``
    with ``x = k z lambda``. Both functions are even in ``x``, so the branch
    of the square root is irrelevant.
    """
    zeta = np.asarray(zeta, dtype=complex)
    z = np.asarray(z, dtype=float)
    A = matrix_A(zeta, sym)
    a = sym.a(zeta)
    x = z * np.sqrt(sym.k**2 * (sym.k**2 + 2.0 * a))
    c = np.cos(x)[..., None, None]
    s = (z * _sinc(x))[..., None, None]
    eye = np.eye(2, dtype=complex)
    return c * eye + 1j * s * A


def lambda_principal(w, sym, check=True):
    """``lambda(k + w) = sqrt(k^2 + 2a)`` with the principal square root.

    On the annulus ``1 <= |w| <= k/2`` (large-frequency regime) the radicand
    stays in the right half plane, so the principal branch is holomorphic
    there and close to ``k``.
    """
    w = np.asarray(w, dtype=complex)
    if check:
        aw = np.abs(w)
        if not sym.regime_ok:
            raise DomainError("symbol outside the large-frequency regime")
        if np.any(aw < 1.0 - 1e-12) or np.any(aw > 0.5 * sym.k + 1e-12):
            raise DomainError("w outside the annulus 1 <= |w| <= k/2")
    return np.sqrt(sym.k**2 + 2.0 * sym.a(sym.k + w))


def phase_remainder_bound(sym):
    """Right-hand side ``Ebar^2/3 + Ebar^4/5`` of the phase approximation bound."""
    return sym.Ebar**2 / 3.0 + sym.Ebar**4 / 5.0


def select_radius(t, z, sym, kind="E0"):
    """Contour radius balancing the two exponential factors of the integrand.

    For ``k Ebar^2 z t >= 2`` both kinds use the saddle radius
    ``sqrt(k z Ebar^2 / (2 t))``. Below the switch the E0 kind uses
    ``max(1, k Ebar^2 z)`` and the E2 kind ``min(1/t, k/2)``. The result is
    clamped to ``[1, max(1, k/2)]``.
    """
    if kind not in ("E0", "E2"):
        raise ValueError(f"unknown radius kind {kind!r}")
    k, e2 = sym.k, sym.Ebar**2
    q = k * e2 * z * t
    if q >= 2.0:
        r = np.sqrt(k * z * e2 / (2.0 * t))
    elif kind == "E0":
        r = max(1.0, k * e2 * z)
    else:
        r = 0.5 * k if t <= 0 else min(1.0 / t, 0.5 * k)
    return float(np.clip(r, 1.0, max(1.0, 0.5 * k)))


# --- contour machinery -----------------------------------------------------


def circle_nodes(center, radius, nodes):
    """Trapezoid nodes and weights of ``(1/2pi) oint f dzeta`` on a circle."""
    theta = 2.0 * np.pi * np.arange(nodes) / nodes
    e = np.exp(1j * theta)
    zeta = center + radius * e
    weights = 1j * radius * e / nodes
    return zeta, weights


@dataclass
class _Branches:
    zeta: np.ndarray
    weights: np.ndarray
    w: np.ndarray
    delta: np.ndarray
    proj: dict


def _branch_data(sym, s, radius, nodes):
    """Nodes on the circle around ``s k`` with the split eigen-decomposition.

    ``delta = k lambda - k^2`` is computed as ``2 k a / (lambda + k)`` to avoid
    cancellation; ``proj[sigma] = (Id + sigma A/(k lambda))/2``.
    """
    k = sym.k
    zeta, weights = circle_nodes(s * k, radius, nodes)
    a = sym.a(zeta)
    rad = k**2 + 2.0 * a
    if np.any(rad.real <= 0.0):
        raise DomainError("principal branch of lambda is discontinuous on this contour")
    lam = np.sqrt(rad)
    delta = 2.0 * k * a / (lam + k)
    A = matrix_A(zeta, sym)
    eye = np.eye(2, dtype=complex)
    klam = (k * lam)[:, None, None]
    proj = {sig: 0.5 * (eye + sig * A / klam) for sig in (1, -1)}
    return _Branches(zeta, weights, zeta - s * k, delta, proj)


def split_pieces(ts, zs, sym, weight, radius, nodes):
    """Slow amplitudes of ``(1/2pi) oint exp(i t zeta) exp(i z A) weight(zeta) dzeta``.

    Returns a dict keyed by ``(s, sigma)`` of arrays ``(len(ts), len(zs), 2, 2)``
    such that the full integral is
    ``sum exp(i (s k t + sigma k^2 z)) * piece[(s, sigma)]``.
    ``weight`` maps an array of nodes to an array of scalars.
    """
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    zs = np.atleast_1d(np.asarray(zs, dtype=float))
    pieces = {}
    for s in (1, -1):
        br = _branch_data(sym, s, radius, nodes)
        c = br.weights * weight(br.zeta)
        et = np.exp(1j * np.outer(ts, br.w)) * c
        for sig in (1, -1):
            ez = np.exp(1j * sig * np.outer(zs, br.delta))
            amp = br.proj[sig].reshape(nodes, 4)
            # sum_j et[t,j] ez[z,j] amp[j,:]
            out = np.einsum("tj,zj,jm->tzm", et, ez, amp, optimize=True)
            pieces[(s, sig)] = out.reshape(len(ts), len(zs), 2, 2)
    return pieces


def assemble_pieces(pieces, ts, zs, sym):
    """Sum split pieces with their fast phases; returns ``(nt, nz, 2, 2)``."""
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    zs = np.atleast_1d(np.asarray(zs, dtype=float))
    k = sym.k
    total = 0.0
    for (s, sig), piece in pieces.items():
        ph = np.exp(1j * (s * k * ts[:, None] + sig * k**2 * zs[None, :]))
        total = total + ph[:, :, None, None] * piece
    return total


def _point_integral_split(t, z, sym, weight, radius, nodes):
    """Split-form point evaluation carried as (mantissa, log scale)."""
    k = sym.k
    terms = []
    for s in (1, -1):
        br = _branch_data(sym, s, radius, nodes)
        c = br.weights * weight(br.zeta)
        for sig in (1, -1):
            expo = 1j * t * br.w + 1j * sig * z * br.delta
            terms.append((s, sig, expo, c, br.proj[sig]))
    shift = max(float(np.max(e.real)) for _, _, e, _, _ in terms)
    total = np.zeros((2, 2), dtype=complex)
    for s, sig, expo, c, proj in terms:
        fast = np.exp(1j * (s * k * t + sig * k**2 * z))
        amp = np.exp(expo - shift) * c
        total += fast * np.einsum("j,jab->ab", amp, proj)
    return total, shift


def _point_integral_plain(t, z, sym, weight, radius, nodes):
    """Unsplit evaluation, used when the branch decomposition is unavailable."""
    total = np.zeros((2, 2), dtype=complex)
    shift = radius * t
    for s in (1, -1):
        zeta, wts = circle_nodes(s * sym.k, radius, nodes)
        amp = np.exp(1j * t * zeta - shift) * wts * weight(zeta)
        total += np.einsum("j,jab->ab", amp, exp_izA(zeta, z, sym))
    return total, shift


def contour_point(t, z, sym, weight, radius, nodes=DEFAULT_NODES, tol=KERNEL_TOL, cap=NODE_CAP):
    """Point evaluation with node doubling.

    Returns ``(mantissa, log_shift, quad_error, nodes_used)``; the integral is
    ``mantissa * exp(log_shift)``.
    """
    try:
        _branch_data(sym, 1, radius, 8)
        _branch_data(sym, -1, radius, 8)
        evaluate = _point_integral_split
    except DomainError:
        evaluate = _point_integral_plain
    prev, prev_shift = evaluate(t, z, sym, weight, radius, nodes)
    err = np.inf
    n = nodes
    while n < cap:
        n *= 2
        cur, shift = evaluate(t, z, sym, weight, radius, n)
        cur_al = cur * np.exp(shift - prev_shift) if shift != prev_shift else cur
        scale = max(np.max(np.abs(cur_al)), 1e-300)
        # values far below the integrand scale are only known absolutely
        floor = 1e-6 * _integrand_scale(t, z, sym, weight, radius, prev_shift)
        err = float(np.max(np.abs(cur_al - prev)) / max(scale, floor))
        prev, prev_shift = cur, shift
        if err < tol:
            break
    return prev, prev_shift, err, n


def _integrand_scale(t, z, sym, weight, radius, shift):
    """Max modulus of the scaled integrand on the contour (coarse)."""
    zeta = np.concatenate([circle_nodes(s * sym.k, radius, 64)[0] for s in (1, -1)])
    mags = np.abs(np.exp(1j * t * zeta - shift) * weight(zeta)) * radius
    grow = np.exp(np.abs(z * np.sqrt(sym.k**2 * (sym.k**2 + 2.0 * sym.a(zeta)))).imag)
    return float(np.max(mags * np.maximum(grow, 1.0)))


def _kernel(t, z, sym, order, spec, kind):
    if t < 0 or z < 0:
        raise ValueError("kernels are evaluated for t >= 0, z >= 0 only")
    if spec is None:
        spec = ContourSpec(select_radius(t, z, sym, kind) if (t > 0 or z > 0) else 1.0)

    def weight(zeta):
        return sym.p_weight(zeta, order)

    mant, shift, err, n = contour_point(t, z, sym, weight, spec.radius, spec.nodes)
    if err > 1e-6:
        raise QuadratureError(f"kernel quadrature did not converge (rel change {err:.2e})")
    peak = np.max(np.abs(mant))
    log_abs = float(np.log(peak) + shift) if peak > 0 else -np.inf
    with np.errstate(over="ignore"):
        value = mant * np.exp(shift)
    return KernelSample(
        t=float(t), z=float(z), value=value, rho=float(sym.rho(t, z)),
        quad_error=err, nodes=n, radius=spec.radius,
        regime_ok=sym.regime_ok, log_abs=log_abs,
    )


def kernel_E0(t, z, sym, spec=None):
    """Kernel ``(1/2pi) oint exp(i t zeta + i z A) dzeta`` (a 2x2 matrix)."""
    return _kernel(t, z, sym, 0, spec, "E0")


def kernel_E1(t, z, sym, spec=None):
    """Kernel with weight ``k^2/(zeta^2-k^2)`` (a 2x2 matrix)."""
    return _kernel(t, z, sym, 1, spec, "E0")


def kernel_E2(t, z, sym, spec=None):
    """Kernel with weight ``k^4/(zeta^2-k^2)^2`` (a 2x2 matrix)."""
    return _kernel(t, z, sym, 2, spec, "E2")


def converged_pieces(ts, zs, sym, weight, radius, tol=1e-12, nodes=DEFAULT_NODES):
    """Split pieces of an arbitrary scalar weight, with node doubling.

    Convergence is judged on a 5x5 subgrid that includes the corner
    ``(max t, max z)``, relative to the largest assembled value there.
    """
    ts = np.asarray(ts, dtype=float)
    zs = np.asarray(zs, dtype=float)
    probe_t = ts[np.unique(np.linspace(0, len(ts) - 1, 5).astype(int))]
    probe_z = zs[np.unique(np.linspace(0, len(zs) - 1, 5).astype(int))]

    def probe(n):
        pcs = split_pieces(probe_t, probe_z, sym, weight, radius, n)
        return assemble_pieces(pcs, probe_t, probe_z, sym)

    n = nodes
    prev = probe(n)
    err = np.inf
    while n < NODE_CAP:
        n *= 2
        cur = probe(n)
        err = float(np.max(np.abs(cur - prev)) / max(np.max(np.abs(cur)), 1e-300))
        prev = cur
        if err < tol:
            break
    if err > 1e-6:
        raise QuadratureError(f"grid quadrature did not converge (rel change {err:.2e})")
    pieces = split_pieces(ts, zs, sym, weight, radius, n)
    return pieces, {"radius": radius, "nodes": n, "quad_error": err}


def grid_radius(T, Z, sym):
    """Single contour radius for a whole ``[0,T] x [0,Z]`` grid."""
    if T <= 0 or Z <= 0:
        return 1.0
    return select_radius(T, Z, sym, "E0")


def kernel_grid_pieces(ts, zs, sym, order, tol=1e-12, nodes=DEFAULT_NODES, radius=None):
    """Split pieces of the kernel of the given order on a product grid."""
    if radius is None:
        radius = grid_radius(float(ts[-1]), float(zs[-1]), sym)

    def weight(zeta):
        return sym.p_weight(zeta, order)

    return converged_pieces(ts, zs, sym, weight, radius, tol, nodes)


# --- model kernel and envelopes ---------------------------------------------


def bessel_J(rho):
    """Series ``sum rho^n / (n!)^2``, summed until the tail is negligible.

    Equals ``I0(2 sqrt(rho))``. The model amplification kernel itself is
    ``I0(rho) = bessel_J(rho^2/4)``, see :func:`model_kernel`.
    """
    rho = np.asarray(rho, dtype=float)
    if np.any(rho < 0):
        raise ValueError("rho must be nonnegative")
    term = np.ones_like(rho)
    total = np.ones_like(rho)
    n = 0
    while True:
        n += 1
        term = term * rho / n**2
        total = total + term
        if np.all(term <= 1e-17 * total) and n > np.max(np.sqrt(rho), initial=0.0):
            break
    return total if total.ndim else float(total)


def model_kernel(rho):
    """Leading-order amplitude ``I0(rho)`` of the first-order kernel near ``zeta = k``."""
    rho = np.asarray(rho, dtype=float)
    return bessel_J(rho**2 / 4.0)


def model_kernel_contour(rho, nodes=256):
    """``(1/2pi i) oint exp(i rho/2 (w - 1/w)) dw / w`` on the unit circle."""
    theta = 2.0 * np.pi * np.arange(nodes) / nodes
    w = np.exp(1j * theta)
    vals = np.exp(0.5j * rho * (w - 1.0 / w))
    return float(np.mean(vals).real)


def model_kernel_integral(rho, nodes=256):
    """``int_0^{2pi} exp(rho sin theta) d theta`` by the trapezoid rule."""
    theta = 2.0 * np.pi * np.arange(nodes) / nodes
    return float(2.0 * np.pi * np.mean(np.exp(rho * np.sin(theta))))


def bound_envelopes(t, z, sym):
    """Envelopes (with unit constant) for the three kernels.

    ``E0``: ``r e^rho / sqrt(1+rho)`` with ``r = 1 + k Ebar^2 z / (1+rho)``;
    ``E1``: ``k e^rho / sqrt(1+rho)``;
    ``E2``: ``k^2 e^rho / (rtilde sqrt(1+rho))`` with ``1/rtilde = 1/k + t/(1+rho)``.
    """
    k, e2 = sym.k, sym.Ebar**2
    rho = sym.rho(t, z)
    g = np.exp(rho) / np.sqrt(1.0 + rho)
    r = 1.0 + k * e2 * np.asarray(z) / (1.0 + rho)
    inv_rt = 1.0 / k + np.asarray(t) / (1.0 + rho)
    in_regime = bool(
        sym.Ebar <= 1.0 and sym.regime_ok
        and np.all((np.asarray(t) >= 0) & (np.asarray(t) <= 1.0))
        and np.all((np.asarray(z) >= 0) & (np.asarray(z) <= 0.5))
    )
    return {
        "E0_bound": r * g,
        "E1_bound": k * g,
        "E2_bound": k**2 * inv_rt * g,
        "rho": rho,
        "regime_ok": in_regime,
    }


@dataclass
class EnvelopeCalibration:
    """Smallest constants ``C_j`` with ``|E_j| <= C_j * envelope_j`` over a sample grid."""

    C: dict
    C_max: float
    radius_change: float
    samples: int
    rows: list


def envelope_calibration(ks, Ebar=1.0, nt=20, nz=20, T=1.0, Z=0.5, radius_factor=1.2):
    """Calibrate the envelope constants on a ``(t, z, k)`` grid in the regime.

    ``t`` and ``z`` run over ``nt x nz`` interior nodes of ``(0, T] x (0, Z]``.
    ``radius_change`` is the largest relative change of the kernels when the
    contour radius is multiplied by ``radius_factor``.
    """
    ts = T * np.arange(1, nt + 1) / nt
    zs = Z * np.arange(1, nz + 1) / nz
    C = {"E0": 0.0, "E1": 0.0, "E2": 0.0}
    change = 0.0
    rows = []
    funcs = {"E0": kernel_E0, "E1": kernel_E1, "E2": kernel_E2}
    kinds = {"E0": "E0", "E1": "E0", "E2": "E2"}
    for k in ks:
        sym = LinearizedSymbol(float(k), Ebar)
        for t in ts:
            for z in zs:
                env = bound_envelopes(t, z, sym)
                row = {"k": float(k), "t": float(t), "z": float(z), "rho": float(env["rho"])}
                for name, fn in funcs.items():
                    smp = fn(t, z, sym)
                    ratio = float(np.exp(smp.log_abs - np.log(env[f"{name}_bound"])))
                    C[name] = max(C[name], ratio)
                    row[f"{name}_ratio"] = ratio
                    r2 = select_radius(t, z, sym, kinds[name]) * radius_factor
                    alt = fn(t, z, sym, ContourSpec(r2, nodes=smp.nodes))
                    scale = np.max(np.abs(smp.value))
                    if scale > 0:
                        change = max(change, float(np.max(np.abs(alt.value - smp.value)) / scale))
                rows.append(row)
    return EnvelopeCalibration(C, max(C.values()), change, len(rows), rows)
