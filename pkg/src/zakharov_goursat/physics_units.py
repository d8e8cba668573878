"""From laser-plasma parameters to the dimensionless Goursat problem.

Variables are scaled with the transverse period ``X`` and the sound speed:

    x~ = x / X,    z~ = z / (2 k0 X^2),    t~ = c_s t / X,

which turns the paraxial Zakharov system into

    i (eps d_t + d_z) a + Lap a = n a,    (d_t^2 - Lap) n = Lap |a|^2

with ``eps = 2 omega0 c_s X / c^2``, ``n~ = alpha^2 dn/n0``,
``a~ = alpha sqrt(m_e/m_i) A / A_bar``, ``alpha = omega_pe X / c`` and the
voltage scale ``A_bar = m_e c c_s / e``.

The amplification factor is ``rho = sqrt(2 k~ |a~|^2 z~ t~)``; in physical
units it reads

    rho^2 = (|A| / A_bar)^2 (m_e c_s omega_pe^2 / (m_i c^2)) (k / k0) tau0 Z0.

A frequently quoted version of this formula carries an extra factor 2; it
is reported separately as ``rho_doubled``.
"""

from dataclasses import dataclass, field, fields, replace
from importlib import resources

import numpy as np
import pint
import yaml

UREG = pint.UnitRegistry()
DISPERSION_RTOL = 1e-12
# "much smaller than one" for the validity flags
SMALL = 1e-2

_UNITS = {
    "c": "m/s", "c_s": "m/s", "e": "C", "m_e": "kg", "m_i": "kg", "n0": "1/m**3",
    "omega_pe": "1/s", "lambda0": "m", "k0": "1/m", "omega0": "1/s", "X": "m",
    "tau0": "s", "Z0": "m", "k": "1/m", "A": "V", "R0": "m",
}


@dataclass(frozen=True)
class PlasmaParams:
    """Physical parameters in SI units.

    ``omega0`` and ``k0`` must satisfy ``k0 = 2 pi / lambda0`` and the
    dispersion relation ``omega0^2 = omega_pe^2 + k0^2 c^2``; use
    :meth:`from_dict` to have them derived.
    """

    c: float
    c_s: float
    e: float
    m_e: float
    m_i: float
    omega_pe: float
    lambda0: float
    k0: float
    omega0: float
    X: float
    tau0: float
    Z0: float
    k: float
    A: float
    R0: float = 5e-3
    n0: float = field(default=float("nan"))

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if f.name == "n0" and np.isnan(v):
                continue
            if f.name == "A":
                if v < 0:
                    raise ValueError("A must be nonnegative")
                continue
            if not v > 0:
                raise ValueError(f"{f.name} must be positive, got {v}")
        if abs(self.k0 * self.lambda0 - 2 * np.pi) > DISPERSION_RTOL * 2 * np.pi:
            raise ValueError("k0 must equal 2 pi / lambda0")
        lhs = self.omega0**2
        rhs = self.omega_pe**2 + (self.k0 * self.c) ** 2
        if abs(lhs - rhs) > DISPERSION_RTOL * rhs:
            raise ValueError("omega0 violates omega0^2 = omega_pe^2 + k0^2 c^2")

    @classmethod
    def from_dict(cls, d):
        """Build from a mapping; ``k0``, ``omega0``, ``m_i`` and ``n0`` are derived when absent."""
        d = {key: float(v) for key, v in d.items() if key not in ("name", "sweep")}
        if "m_i" not in d:
            d["m_i"] = d["m_e"] / d.pop("mass_ratio")
        else:
            d.pop("mass_ratio", None)
        d.setdefault("k0", 2 * np.pi / d["lambda0"])
        d.setdefault("omega0", float(np.sqrt(d["omega_pe"] ** 2 + (d["k0"] * d["c"]) ** 2)))
        if "n0" not in d:
            # SI plasma frequency: omega_pe^2 = n0 e^2 / (eps0 m_e)
            eps0 = (1.0 * UREG.vacuum_permittivity).to("F/m").magnitude
            d["n0"] = eps0 * d["m_e"] * d["omega_pe"] ** 2 / d["e"] ** 2
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown parameters: {sorted(unknown)}")
        return cls(**d)

    @property
    def mass_ratio(self):
        return self.m_e / self.m_i

    def with_(self, **changes):
        """Copy with changes; ``lambda0``/``omega_pe`` changes re-derive ``k0``/``omega0``."""
        if "lambda0" in changes and "k0" not in changes:
            changes["k0"] = 2 * np.pi / changes["lambda0"]
        p = {f.name: getattr(self, f.name) for f in fields(self)}
        p.update(changes)
        if "omega0" not in changes:
            p["omega0"] = float(np.sqrt(p["omega_pe"] ** 2 + (p["k0"] * p["c"]) ** 2))
        return replace(self, **{key: p[key] for key in p})


def load_reference(path=None):
    """Reference parameter set and its sweep ranges from YAML (bundled file by default)."""
    if path is None:
        text = resources.files("zakharov_goursat").joinpath("data/reference_plasma.yaml").read_text()
    else:
        with open(path) as fh:
            text = fh.read()
    raw = yaml.safe_load(text)
    sweep = raw.get("sweep", {})
    return PlasmaParams.from_dict(raw), sweep


@dataclass(frozen=True)
class DimensionlessGroups:
    epsilon: float
    alpha: float
    A_bar: float
    a: float
    a_tilde: float
    n_scale: float
    x_scale: float
    z_scale: float
    t_scale: float
    k_tilde: float
    T_tilde: float
    Z_tilde: float
    rho: float
    weak_coupling: float
    weak_coupling_ok: bool
    paraxial_ok: bool


def derive_groups(p: PlasmaParams) -> DimensionlessGroups:
    A_bar = p.m_e * p.c * p.c_s / p.e
    alpha = p.omega_pe * p.X / p.c
    a = p.A / A_bar
    a_tilde = alpha * np.sqrt(p.mass_ratio) * a
    k_t = p.X * p.k
    T_t = p.c_s * p.tau0 / p.X
    Z_t = p.Z0 / (2 * p.k0 * p.X**2)
    weak = p.mass_ratio * a**2
    return DimensionlessGroups(
        epsilon=2 * p.omega0 * p.c_s * p.X / p.c**2,
        alpha=alpha, A_bar=A_bar, a=a, a_tilde=a_tilde, n_scale=alpha**2,
        x_scale=p.X, z_scale=2 * p.k0 * p.X**2, t_scale=p.X / p.c_s,
        k_tilde=k_t, T_tilde=T_t, Z_tilde=Z_t,
        rho=float(np.sqrt(2 * k_t * a_tilde**2 * Z_t * T_t)),
        weak_coupling=weak, weak_coupling_ok=bool(weak <= SMALL),
        paraxial_ok=bool(p.k * p.Z0 <= p.k0 * p.R0),
    )


def coupling_rate(p: PlasmaParams):
    """``2 m_e c_s omega_pe^2 / (m_i c^2)`` in ``1/(m s)``."""
    return 2 * p.mass_ratio * p.c_s * p.omega_pe**2 / p.c**2


@dataclass(frozen=True)
class Amplification:
    rho: float
    beta: float
    gamma: float
    rho_doubled: float
    beta_doubled: float
    gamma_doubled: float


def amplification_rho(p: PlasmaParams) -> Amplification:
    """Physical amplification factor ``rho = (|A|/A_bar) sqrt(beta tau0 Z0)`` and ``gamma = sqrt(beta tau0 Z0)``."""
    A_bar = p.m_e * p.c * p.c_s / p.e
    beta = 0.5 * coupling_rate(p) * p.k / p.k0
    gamma = float(np.sqrt(beta * p.tau0 * p.Z0))
    rho = p.A / A_bar * gamma
    return Amplification(
        rho=rho, beta=beta, gamma=gamma,
        rho_doubled=np.sqrt(2.0) * rho, beta_doubled=2.0 * beta, gamma_doubled=np.sqrt(2.0) * gamma,
    )


def gamma_range(p: PlasmaParams, tau0_range, Z0_range, doubled=False):
    """``(gamma_min, gamma_max)`` over the corners of a ``(tau0, Z0)`` box."""
    vals = []
    for tau in tau0_range:
        for Z0 in Z0_range:
            amp = amplification_rho(p.with_(tau0=float(tau), Z0=float(Z0)))
            vals.append(amp.gamma_doubled if doubled else amp.gamma)
    return min(vals), max(vals)


def intensity_threshold(p: PlasmaParams, rho_target, gamma=None):
    """Largest ``|A|`` (V) and ``|E| = (omega0/c)|A|`` (V/m) keeping ``rho <= rho_target``."""
    if rho_target <= 0:
        raise ValueError("rho_target must be positive")
    A_bar = p.m_e * p.c * p.c_s / p.e
    gamma = amplification_rho(p).gamma if gamma is None else gamma
    A_max = rho_target * A_bar / gamma
    return {"A_max": A_max, "E_max": p.omega0 / p.c * A_max}


def scale_to_dimensionless(p: PlasmaParams, kdt=0.35, k2dz=0.3):
    """Dimensionless problem data and grid hints for the Goursat solvers."""
    g = derive_groups(p)
    k = g.k_tilde
    return {
        "Ebar": g.a_tilde, "k": k, "T": g.T_tilde, "Z": g.Z_tilde, "epsilon": g.epsilon,
        "rho": g.rho,
        "Nt": int(np.ceil(g.T_tilde * k / kdt)), "Nz": int(np.ceil(g.Z_tilde * k**2 / k2dz)), "Nx": 16,
    }


_FIELD_SCALES = {
    # name: (attribute of DimensionlessGroups, power); physical = scale^power * tilde
    "x": ("x_scale", 1), "z": ("z_scale", 1), "t": ("t_scale", 1),
    "k": ("x_scale", -1), "n": ("n_scale", -1),
}


def _field_factor(groups, name):
    attr, power = _FIELD_SCALES[name]
    return getattr(groups, attr) ** power


def _a_factor(groups, mass_ratio):
    """Volts per unit of scaled envelope ``a~``."""
    return groups.A_bar / (groups.alpha * np.sqrt(mass_ratio))


def scale_from_dimensionless(groups: DimensionlessGroups, fields_, mass_ratio):
    """Physical fields from scaled ones: ``x, z, t`` (m, m, s), ``k`` (1/m), ``n`` (dn/n0), ``A`` (V)."""
    out = {}
    for name, val in fields_.items():
        val = np.asarray(val)
        if name == "A":
            out[name] = _a_factor(groups, mass_ratio) * val
        else:
            out[name] = _field_factor(groups, name) * val
    return out


def scale_fields_to_dimensionless(groups: DimensionlessGroups, fields_, mass_ratio):
    """Inverse of :func:`scale_from_dimensionless`."""
    out = {}
    for name, val in fields_.items():
        val = np.asarray(val)
        if name == "A":
            out[name] = val / _a_factor(groups, mass_ratio)
        else:
            out[name] = val / _field_factor(groups, name)
    return out


def units_audit(p: PlasmaParams):
    """Recompute every derived quantity with unit-tagged arithmetic.

    Returns ``{name: (unit, ok)}`` where ``ok`` means the dimensionality is
    the expected one and the magnitude matches the plain computation.
    """
    q = {name: getattr(p, name) * UREG(unit) for name, unit in _UNITS.items() if not np.isnan(getattr(p, name))}
    g = derive_groups(p)
    amp = amplification_rho(p)
    checks = {
        "A_bar": (q["m_e"] * q["c"] * q["c_s"] / q["e"], "V", g.A_bar),
        "epsilon": (2 * q["omega0"] * q["c_s"] * q["X"] / q["c"] ** 2, "", g.epsilon),
        "alpha": (q["omega_pe"] * q["X"] / q["c"], "", g.alpha),
        "k_tilde": (q["X"] * q["k"], "", g.k_tilde),
        "T_tilde": (q["c_s"] * q["tau0"] / q["X"], "", g.T_tilde),
        "Z_tilde": (q["Z0"] / (2 * q["k0"] * q["X"] ** 2), "", g.Z_tilde),
        "coupling_rate": (2 * q["m_e"] / q["m_i"] * q["c_s"] * q["omega_pe"] ** 2 / q["c"] ** 2,
                          "1/(m*s)", coupling_rate(p)),
        "beta": (q["m_e"] / q["m_i"] * q["c_s"] * q["omega_pe"] ** 2 / q["c"] ** 2 * q["k"] / q["k0"],
                 "1/(m*s)", amp.beta),
        "rho": (q["A"] / (q["m_e"] * q["c"] * q["c_s"] / q["e"])
                * np.sqrt(q["m_e"] / q["m_i"] * q["c_s"] * q["omega_pe"] ** 2 / q["c"] ** 2
                          * q["k"] / q["k0"] * q["tau0"] * q["Z0"]), "", amp.rho),
        "E_max": (q["omega0"] / q["c"] * q["A"], "V/m", p.omega0 / p.c * p.A),
        "dispersion": (q["omega_pe"] ** 2 + (q["k0"] * q["c"]) ** 2 - q["omega0"] ** 2, "1/s**2", 0.0),
    }
    report = {}
    for name, (val, unit, plain) in checks.items():
        target = UREG(unit) if unit else UREG.dimensionless
        ok_dim = val.dimensionality == target.dimensionality
        mag = val.to(target).magnitude if ok_dim else np.nan
        scale = abs(plain) if plain else abs((q["omega0"] ** 2).to("1/s**2").magnitude)
        ok_val = ok_dim and abs(mag - plain) <= 1e-10 * scale
        report[name] = (unit or "1", bool(ok_dim and ok_val))
    return report
