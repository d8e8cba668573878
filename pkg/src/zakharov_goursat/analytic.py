"""Majorant-series calculus for analytic solutions of the Goursat problem.

A function ``u(x)`` on the torus is dominated by a power series
``phi(X) = sum phi_n X^n`` with nonnegative coefficients, written ``u << phi``,
when every derivative satisfies ``||d^alpha u||_s <= |alpha|! phi_|alpha|``.
The reference series is ``phi(X) = c0 sum X^n / (n^2 + 1)``, with ``c0``
chosen so that ``phi^2 << phi``. Its shifted and rescaled version
``phi(R X + lambda z)`` measures analyticity of width ``1/R`` in ``x`` and
propagation length ``1/lambda`` in ``z``.

The base norm is the weighted Wiener norm

    ||u||_s = sum_xi (1 + |xi| / R)^s |u_hat(xi)|,

an algebra norm because ``1 + |a + b| <= (1 + |a|)(1 + |b|)``. Measuring
frequencies in units of ``R`` keeps the norm dimensionless and makes a
carrier ``e^{ikx}`` cost ``O(1)`` at ``R = k``.
"""

from dataclasses import dataclass, field
from itertools import product as iproduct

import numpy as np
from scipy.special import gammaln

DEFAULT_TRUNCATION = 64
DEFAULT_ALPHA_MAX = 24
DEFAULT_S = 1.0

# Constant C in the existence threshold lambda >= C R T ||E0||^2, fitted to the
# Picard-convergence frontier of the nonlinear solver (see
# scripts/calibrate_threshold.py). Dimensionless.
THRESHOLD_CALIBRATION = 5.18e-4

# successive-order ratio above which a norm estimate is declared divergent
_DIVERGENCE_RATIO = 1.05
_DIVERGENCE_TAIL = 4
# relative size below which a Fourier coefficient is treated as zero
SPECTRAL_FLOOR = 1e-13


# --- the reference series ---------------------------------------------------------------


def cauchy_square(coeffs):
    """Coefficients of ``phi^2`` truncated to the length of ``coeffs``."""
    c = np.asarray(coeffs, dtype=float)
    return np.convolve(c, c)[: c.size]


def _base_coeffs(n_trunc):
    n = np.arange(n_trunc + 1, dtype=float)
    return 1.0 / (n**2 + 1.0)


def cauchy_margin(c0, n_trunc):
    """``min_n (phi_n - (phi^2)_n) / phi_n`` for ``phi_n = c0/(n^2+1)``."""
    base = _base_coeffs(n_trunc)
    return float(np.min(1.0 - c0 * cauchy_square(base) / base))


def compute_c0(n_trunc=DEFAULT_TRUNCATION, tol=1e-12):
    """Largest ``c0`` with ``phi^2 << phi`` coefficientwise up to order ``n_trunc``.

    Bisection on ``[0, 1]`` (the zeroth coefficient alone forces ``c0 <= 1``).
    """
    if n_trunc < 8:
        raise ValueError("n_trunc must be at least 8")
    lo, hi = 0.0, 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if cauchy_margin(mid, n_trunc) >= 0.0:
            lo = mid
        else:
            hi = mid
    return lo


C0_REFERENCE = compute_c0(DEFAULT_TRUNCATION)


@dataclass(frozen=True)
class MajorantSeries:
    """``phi(X) = c0 sum X^n/(n^2+1)`` with scales ``R`` (in ``x``) and ``lam`` (in ``z``)."""

    c0: float = C0_REFERENCE
    R: float = 1.0
    lam: float = 1.0
    n_trunc: int = DEFAULT_TRUNCATION
    coeffs: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.R <= 0 or self.lam <= 0:
            raise ValueError("R and lam must be positive")
        object.__setattr__(self, "coeffs", self.c0 * _base_coeffs(self.n_trunc))

    @property
    def Z(self):
        return 1.0 / self.lam

    def __call__(self, X):
        """Truncated ``phi(X)``; exact up to ``X^n_trunc``."""
        return np.polynomial.polynomial.polyval(X, self.coeffs)

    def taylor(self, n, y):
        """``phi_n(y)``: the coefficient of ``X^n`` in ``phi(X + y)``, for ``0 <= y < 1``.

        ``phi_n(y) = c0 sum_{m >= n} C(m, n) y^{m-n} / (m^2 + 1)``, summed in the
        log domain until the tail is below ``1e-17`` relative.
        """
        y = np.asarray(y, dtype=float)
        if np.any(y < 0) or np.any(y >= 1):
            raise ValueError("phi_n(y) needs 0 <= y < 1")
        n = int(n)
        ymax = float(np.max(y)) if y.size else 0.0
        if ymax == 0.0:
            return np.full(y.shape, self.c0 / (n * n + 1.0))
        # terms behave like m^n y^m: the tail is negligible past this index
        extra = int(np.ceil((40.0 + n * np.log(n + 10.0 / (1.0 - ymax))) / -np.log(ymax))) + n + 10
        m = np.arange(n, n + extra + 1, dtype=float)
        logc = gammaln(m + 1) - gammaln(n + 1) - gammaln(m - n + 1) - np.log(m**2 + 1.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            logy = np.log(y)[..., None]
            terms = np.exp(logc + (m - n) * np.where(np.isfinite(logy), logy, -np.inf))
        terms[..., 0] = np.exp(logc[0])
        return self.c0 * np.sum(terms, axis=-1)

    def E_coeff(self, n, z):
        """Coefficient of ``X^n`` in ``phi(R X + lam z)``."""
        return self.R**n * self.taylor(n, self.lam * np.asarray(z, dtype=float))

    def F_coeff(self, n, z):
        """Coefficient of ``X^n`` in ``phi'(R X + lam z)`` (derivative of ``phi``, then rescaled)."""
        return (n + 1) * self.R**n * self.taylor(n + 1, self.lam * np.asarray(z, dtype=float))


# --- norms ------------------------------------------------------------------------------


def _frequencies(shape, L):
    """Angular frequencies of the FFT grid on a torus of period ``2 pi L`` per axis."""
    return [np.fft.fftfreq(m, d=1.0 / m) / L for m in shape]


def derivative_norms(u, R, s=DEFAULT_S, alpha_max=DEFAULT_ALPHA_MAX, L=1.0, dims=1):
    """``max_{|alpha| = n} ||d^alpha u||_s`` for ``n = 0..alpha_max``, in log form.

    ``u`` has the transverse axes last (``dims`` of them); leading axes are
    parameters and the norm is taken as their supremum. Returns an array of
    ``log`` norms with shape ``(alpha_max + 1,)`` (``-inf`` for zero).
    """
    u = np.asarray(u)
    axes = tuple(range(u.ndim - dims, u.ndim))
    spec = np.fft.fftn(u, axes=axes) / np.prod([u.shape[a] for a in axes])
    # transform roundoff would otherwise dominate high derivatives
    spec = np.where(np.abs(spec) > SPECTRAL_FLOOR * np.max(np.abs(spec)), spec, 0.0)
    freqs = _frequencies([u.shape[a] for a in axes], L)
    mesh = np.meshgrid(*freqs, indexing="ij")
    absxi = np.sqrt(sum(f**2 for f in mesh))
    with np.errstate(divide="ignore"):
        logw = s * np.log1p(absxi / R) + np.log(np.abs(spec))
        logf = [np.log(np.abs(f)) for f in mesh]
    lead = u.ndim - dims
    flat = logw.reshape(logw.shape[:lead] + (-1,))
    out = np.full(alpha_max + 1, -np.inf)
    for n in range(alpha_max + 1):
        best = -np.inf
        for alpha in _multi_indices(n, dims):
            lx = sum(a * lf for a, lf in zip(alpha, logf) if a) if n else 0.0
            term = flat + np.reshape(lx, (-1,)) if n else flat
            best = max(best, float(np.max(_logsumexp(term))))
        out[n] = best
    return out


def _multi_indices(n, dims):
    if dims == 1:
        return [(n,)]
    return [a for a in iproduct(range(n + 1), repeat=dims) if sum(a) == n]


def _logsumexp(a):
    m = np.max(a, axis=-1, keepdims=True)
    m = np.where(np.isfinite(m), m, 0.0)
    with np.errstate(divide="ignore"):
        return (m + np.log(np.sum(np.exp(a - m), axis=-1, keepdims=True)))[..., 0]


@dataclass
class AnalyticNormEstimate:
    """Best constants in ``u << C phi_R`` (``C_E``) and ``u << C phi'_R`` (``C_F``)."""

    C_E: float
    C_F: float
    alpha_max: int
    s: float
    ratios: np.ndarray
    divergent: bool


def _best_constant(log_norms, log_env):
    """``max_n exp(log_norms - log n! - log_env)`` with the ratio-test guard."""
    n = np.arange(log_norms.size)
    logr = log_norms - gammaln(n + 1) - log_env
    with np.errstate(invalid="ignore"):
        steps = np.diff(logr)
    tail = steps[-_DIVERGENCE_TAIL:]
    finite = np.isfinite(logr)
    divergent = bool(
        tail.size == _DIVERGENCE_TAIL and np.all(finite[-_DIVERGENCE_TAIL - 1 :])
        and np.all(tail > np.log(_DIVERGENCE_RATIO))
    )
    with np.errstate(over="ignore"):
        ratios = np.exp(logr)
    value = np.inf if divergent else float(np.max(ratios))
    return value, ratios, divergent


def estimate_norm_ER(E0, R, s=DEFAULT_S, alpha_max=DEFAULT_ALPHA_MAX, L=1.0, dims=1, series=None):
    """Estimate ``||E0||_{E_R}``: the smallest ``C`` with ``E0(t, .) << C phi(R .)`` for all ``t``.

    ``E0`` is sampled on a uniform transverse grid (last ``dims`` axes) of a
    torus with period ``2 pi L``; derivatives are spectral. Orders above
    ``alpha_max`` are not examined; when the ratios grow geometrically over
    the last few orders the estimate is reported as ``inf``.
    """
    R = float(R)
    series = series or MajorantSeries(R=R)
    logn = derivative_norms(E0, R, s, alpha_max, L, dims)
    n = np.arange(alpha_max + 1)
    coeff = series.c0 * R**n / (n**2 + 1.0)
    C_E, ratios, div = _best_constant(logn, np.log(coeff))
    coeffF = (n + 1) * series.c0 * R**n / ((n + 1) ** 2 + 1.0)
    C_F, _, divF = _best_constant(logn, np.log(coeffF))
    return AnalyticNormEstimate(C_E, C_F, alpha_max, s, ratios, div or divF)


def estimate_norm_ERlam(u, zs, series, s=DEFAULT_S, alpha_max=DEFAULT_ALPHA_MAX, L=1.0, dims=1, kind="E"):
    """Best ``C`` with ``u(z) << C phi_{R,lam}(z, .)`` (``kind="E"``) or ``C phi'`` (``"F"``).

    ``u`` has axes ``(z, x...)`` (extra leading parameter axes are folded
    into the supremum by the caller); ``zs`` must satisfy ``lam z < 1``.
    """
    u = np.asarray(u)
    best = 0.0
    n = np.arange(alpha_max + 1)
    for j, z in enumerate(zs):
        logn = derivative_norms(u[j], series.R, s, alpha_max, L, dims)
        if kind == "E":
            env = np.array([series.E_coeff(m, z) for m in n], dtype=float)
        else:
            env = np.array([series.F_coeff(m, z) for m in n], dtype=float)
        val, _, div = _best_constant(logn, np.log(env))
        if div:
            return np.inf
        best = max(best, val)
    return best


# --- existence threshold ---------------------------------------------------------------


@dataclass(frozen=True)
class ThresholdResult:
    lambda_min: float
    Z_max: float
    C_cal: float


def existence_threshold(R, T, E0_norm, C_cal=THRESHOLD_CALIBRATION):
    """``lambda_min = C_cal R T ||E0||^2`` and the propagation length ``Z_max = 1/lambda_min``."""
    if R <= 0 or T <= 0 or E0_norm < 0:
        raise ValueError("need R > 0, T > 0 and E0_norm >= 0")
    lam = C_cal * R * T * E0_norm**2
    return ThresholdResult(lam, np.inf if lam == 0 else 1.0 / lam, C_cal)


def resonant_data(k, Ebar, alpha_rel=1e-3, Nt=64, Nx=8, T=1.0):
    """Samples of ``Ebar (1 + alpha_rel e^{ik(t+x)})`` on ``[0,T] x`` the ``2 pi / k`` torus."""
    t = np.linspace(0.0, T, Nt + 1)[:, None]
    x = (2.0 * np.pi / k) * np.arange(Nx)[None, :] / Nx
    return Ebar * (1.0 + alpha_rel * np.exp(1j * k * (t + x)))


@dataclass
class ThresholdComparison:
    """Measured frontier ``Z_frontier`` against ``Z_max`` of the threshold law."""

    k: float
    Ebar: float
    T: float
    E0_norm: float
    Z_frontier: float
    Z_max: float

    @property
    def ratio(self):
        return self.Z_frontier / self.Z_max


def threshold_comparison(frontier, C_cal=THRESHOLD_CALIBRATION, alpha_rel=1e-3, s=DEFAULT_S):
    """Compare frontier points (objects with ``k, Ebar, T, Z``) with ``existence_threshold``.

    The analyticity scale is ``R = k`` and the data norm is estimated from
    the same resonant family the frontier was measured on.
    """
    out = []
    for f in frontier:
        E0 = resonant_data(f.k, f.Ebar, alpha_rel, T=f.T)
        norm = estimate_norm_ER(E0, f.k, s=s, L=1.0 / f.k).C_E
        th = existence_threshold(f.k, f.T, norm, C_cal)
        out.append(ThresholdComparison(f.k, f.Ebar, f.T, norm, f.Z, th.Z_max))
    return out


def calibrate_threshold(comparisons):
    """``C_cal`` that centres ``log(Z_frontier / Z_max)`` on zero.

    Under a constant ``C`` the ratio is ``Z_frontier C k T ||E0||^2``, so the
    centring constant is a geometric mean.
    """
    logs = [-np.log(c.Z_frontier * c.k * c.T * c.E0_norm**2) for c in comparisons]
    return float(np.exp(np.mean(logs)))


# --- comparison rules --------------------------------------------------------------------


@dataclass
class CalculusReport:
    """Smallest relative margins of the comparison rules over a sample suite.

    ``product_margin``: ``min_n 1 - m_{uv,n} / (m_u * m_v)_n`` where ``m_f``
    are the minimal majorant coefficients ``||d^n f||_s / n!``.
    ``submultiplicative_margin``: ``min 1 - C(uv) / (C(u) C(v))`` in ``E_R``.
    ``integration_margin``: ``min 1 - lam C_E(int_0^z u) / C_F(u)``.
    """

    product_margin: float
    submultiplicative_margin: float
    integration_margin: float
    cases: list

    @property
    def ok(self):
        return min(self.product_margin, self.submultiplicative_margin, self.integration_margin) >= -1e-12


def minimal_majorant(u, R, s=DEFAULT_S, alpha_max=DEFAULT_ALPHA_MAX, L=1.0, dims=1):
    """Coefficients ``||d^n u||_s / n!`` of the smallest majorant of ``u`` (log form)."""
    logn = derivative_norms(u, R, s, alpha_max, L, dims)
    return logn - gammaln(np.arange(alpha_max + 1) + 1)


def _log_cauchy(la, lb):
    n = la.size
    out = np.full(n, -np.inf)
    for m in range(n):
        out[m] = float(_logsumexp(la[: m + 1] + lb[m::-1][None, :])[0])
    return out


def default_samples(nx=64, R=4.0):
    """Trigonometric-polynomial samples on the ``2 pi`` torus, paired for products."""
    x = 2.0 * np.pi * np.arange(nx) / nx
    u = {
        "const": np.full(nx, 1.5 + 0j),
        "carrier3": np.exp(3j * x),
        "carrier-2": 0.5 * np.exp(-2j * x),
        "mixed": 1.0 + 0.3 * np.cos(x) + 0.1j * np.sin(4 * x),
        "packet": sum(0.5**m * np.exp(1j * m * x) for m in range(8)),
    }
    pairs = [("const", "const"), ("carrier3", "carrier-2"), ("mixed", "packet"),
             ("carrier3", "mixed"), ("packet", "packet")]
    return {"x": x, "R": R, "functions": u, "pairs": pairs}


def verify_majorant_calculus(samples=None, alpha_max=16, s=DEFAULT_S, lam=2.0, nz=33):
    """Check the product rule, submultiplicativity and the ``z``-integration rule.

    The integration rule is tested on ``u(z, x) = e^{mu z} v(x)``, whose
    antiderivative ``(e^{mu z} - 1)/mu v`` is exact, over ``z < 0.9/lam``.
    """
    samples = samples or default_samples()
    R = samples["R"]
    funcs = samples["functions"]
    series = MajorantSeries(R=R, lam=lam)
    prod_margin = np.inf
    sub_margin = np.inf
    cases = []
    for a, b in samples["pairs"]:
        u, v = funcs[a], funcs[b]
        mu_, mv_ = (minimal_majorant(f, R, s, alpha_max) for f in (u, v))
        muv = minimal_majorant(u * v, R, s, alpha_max)
        bound = _log_cauchy(mu_, mv_)
        ok = np.isfinite(bound)
        m1 = float(np.min(1.0 - np.exp(muv[ok] - bound[ok]))) if np.any(ok) else 1.0
        Cu, Cv, Cuv = (estimate_norm_ER(f, R, s, alpha_max, series=series).C_E for f in (u, v, u * v))
        m2 = 1.0 - Cuv / (Cu * Cv)
        prod_margin = min(prod_margin, m1)
        sub_margin = min(sub_margin, m2)
        cases.append({"pair": (a, b), "product_margin": m1, "submultiplicative_margin": m2})
    zs = np.linspace(0.0, 0.9 / lam, nz)
    int_margin = np.inf
    for name, v in funcs.items():
        for mu in (0.0, 1.0, -3.0, 2j):
            growth = np.exp(mu * zs)[:, None]
            prim = (zs[:, None] if mu == 0 else (growth - 1.0) / mu) * v[None, :]
            CF = estimate_norm_ERlam(growth * v[None, :], zs, series, s, alpha_max, kind="F")
            CE = estimate_norm_ERlam(prim, zs, series, s, alpha_max, kind="E")
            m3 = 1.0 - lam * CE / CF
            int_margin = min(int_margin, m3)
            cases.append({"integrand": (name, mu), "integration_margin": m3})
    return CalculusReport(float(prod_margin), float(sub_margin), float(int_margin), cases)
