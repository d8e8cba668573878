import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zakharov_goursat.physics_units import (
    PlasmaParams,
    amplification_rho,
    coupling_rate,
    derive_groups,
    gamma_range,
    intensity_threshold,
    load_reference,
    scale_fields_to_dimensionless,
    scale_from_dimensionless,
    scale_to_dimensionless,
    units_audit,
)


@pytest.fixture(scope="module")
def ref():
    return load_reference()


def test_reference_groups(ref):
    p, _ = ref
    g = derive_groups(p)
    assert g.A_bar == pytest.approx(2.53e3, rel=2e-3)
    assert g.epsilon == pytest.approx(9.13, rel=1e-2)
    assert g.T_tilde == pytest.approx(3.0, rel=1e-12)
    assert g.k_tilde == pytest.approx(30.0)
    # Z0 / (2 k0 X^2) with the reference inputs
    assert g.Z_tilde == pytest.approx(1e-2 / (2 * 2 * np.pi / 0.35e-6 * 2.5e-9), rel=1e-12)
    assert p.omega0 == pytest.approx(5.5e15, rel=1e-2)
    assert g.weak_coupling_ok and g.paraxial_ok


def test_coupling_rate(ref):
    p, _ = ref
    assert coupling_rate(p) == pytest.approx(3.33e15, rel=1e-2)


def test_gamma_range(ref):
    p, sweep = ref
    lo, hi = gamma_range(p, sweep["tau0"], sweep["Z0"])
    assert 5 <= lo <= 20 and 50 <= hi <= 200
    lo2, hi2 = gamma_range(p, sweep["tau0"], sweep["Z0"], doubled=True)
    assert lo2 == pytest.approx(np.sqrt(2) * lo)


def test_zero_field_gives_zero_rho(ref):
    p, _ = ref
    assert amplification_rho(p.with_(A=0.0)).rho == 0.0


def test_rho_consistency(ref):
    p, _ = ref
    for A in (1.0, 10.0, 300.0):
        q = p.with_(A=A)
        d = scale_to_dimensionless(q)
        rho_d = np.sqrt(2 * d["k"] * d["Ebar"] ** 2 * d["Z"] * d["T"])
        assert rho_d == pytest.approx(amplification_rho(q).rho, rel=1e-10)


@pytest.mark.parametrize("field", ["A", "k", "tau0", "Z0"])
def test_rho_monotone(ref, field):
    p, _ = ref
    base = getattr(p, field)
    vals = [amplification_rho(p.with_(**{field: base * f})).rho for f in (0.5, 1.0, 2.0)]
    assert vals[0] < vals[1] < vals[2]


def test_intensity_threshold(ref):
    p, _ = ref
    thr = intensity_threshold(p, 0.4, gamma=100.0)
    g = derive_groups(p)
    assert thr["A_max"] == pytest.approx(0.4 * g.A_bar / 100.0)
    assert thr["E_max"] == pytest.approx(p.omega0 / p.c * thr["A_max"])
    assert intensity_threshold(p.with_(omega_pe=p.omega_pe), 0.4, gamma=100)["E_max"] == pytest.approx(1.8e8, rel=0.05)
    # consistency: at A = A_max the amplification equals the target
    A_max = intensity_threshold(p, 0.7)["A_max"]
    assert amplification_rho(p.with_(A=A_max)).rho == pytest.approx(0.7)
    with pytest.raises(ValueError):
        intensity_threshold(p, 0.0)


def test_dispersion_relation_enforced(ref):
    p, _ = ref
    with pytest.raises(ValueError):
        PlasmaParams(**{**p.__dict__, "omega0": p.omega0 * (1 + 1e-9)})
    with pytest.raises(ValueError):
        PlasmaParams(**{**p.__dict__, "c_s": -1.0})
    with pytest.raises(ValueError):
        PlasmaParams.from_dict({"bogus": 1.0, "lambda0": 1e-6, "omega_pe": 1.0, "c": 1.0, "m_e": 1.0,
                                "mass_ratio": 1.0, "e": 1.0})


def test_units_audit(ref):
    p, _ = ref
    audit = units_audit(p)
    assert audit and all(ok for _, ok in audit.values())
    assert audit["A_bar"][0] == "V"


@settings(max_examples=25, deadline=None)
@given(
    scale=st.floats(0.3, 3.0),
    x=st.floats(-10, 10), z=st.floats(0, 5), t=st.floats(0, 5), n=st.floats(-1, 1), A=st.floats(0, 50),
)
def test_field_roundtrip(ref, scale, x, z, t, n, A):
    p, _ = ref
    q = p.with_(X=p.X * scale, tau0=p.tau0 * scale)
    g = derive_groups(q)
    f = {"x": x, "z": z, "t": t, "k": 30.0 * scale, "n": n, "A": A}
    back = scale_fields_to_dimensionless(g, scale_from_dimensionless(g, f, q.mass_ratio), q.mass_ratio)
    for key, val in f.items():
        assert float(back[key]) == pytest.approx(val, rel=1e-14, abs=1e-300)


def test_load_custom_file(tmp_path, ref):
    path = tmp_path / "p.yaml"
    path.write_text("c: 3.0e8\nc_s: 1.5e6\ne: 1.6e-19\nm_e: 0.9e-30\nmass_ratio: 1.0e-4\nomega_pe: 1.0e15\n"
                    "lambda0: 0.35e-6\nX: 50.0e-6\ntau0: 1.0e-9\nZ0: 1.0e-2\nk: 6.0e5\nA: 10.0\n")
    p, sweep = load_reference(path)
    assert p.tau0 == 1e-9 and sweep == {}
