import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dgeo import bertrand as B
from dgeo import curve as Cv
from dgeo import fixtures
from dgeo.errors import DegeneratePartner
from dgeo.oracle import partner_invariants


def test_plane_circle_partner_closed_form():
    ps = B.partner_sample(fixtures.curve("plane_circle"), 0.5, np.linspace(0, 6, 5))
    np.testing.assert_allclose(ps.k_g1, 2 / 3, atol=1e-14)
    np.testing.assert_allclose(ps.ds_ds1, 2 / 3, atol=1e-14)
    np.testing.assert_allclose(ps.theta, 0.0, atol=1e-14)
    np.testing.assert_allclose(np.linalg.norm(ps.x1, axis=-1), 1.5, atol=1e-14)


@given(st.floats(-0.9, 3.0).filter(lambda x: abs(x) > 1e-3), st.floats(0.0, 6.0))
def test_plane_circle_partner_any_lambda(lam, t):
    # the partner of the unit circle is the concentric circle of radius 1 + lam
    ps = B.partner_sample(fixtures.curve("plane_circle"), lam, t)
    assert float(ps.k_g1) == pytest.approx(1 / (1 + lam), rel=1e-12)
    assert float(ps.ds_ds1) == pytest.approx(1 / (1 + lam), rel=1e-12)


def test_sphere_equator_partner_is_cylinder_circle():
    lam = 0.3
    ts = np.linspace(0.2, 6.0, 6)
    ps = B.partner_sample(fixtures.curve("sphere_equator"), lam, ts)
    dd = Cv.darboux_data(fixtures.curve("cylinder_circle"), ts, with_arclength=False)
    np.testing.assert_allclose(ps.x1, dd.x, atol=1e-14)
    np.testing.assert_allclose(ps.g1, dd.g, atol=1e-14)
    # the partner frame is the cylinder's Darboux frame: same invariants
    np.testing.assert_allclose(ps.k_g1, dd.k_g, atol=1e-13)
    np.testing.assert_allclose(ps.k_n1, dd.k_n, atol=1e-13)
    np.testing.assert_allclose(ps.tau_g1, dd.tau_g, atol=1e-13)


def test_partner_frame_orthonormal():
    ps = B.partner_sample(fixtures.curve("torus_poly"), 0.2, np.linspace(-0.9, 0.9, 7))
    for a in (ps.T1, ps.g1, ps.n1):
        np.testing.assert_allclose(np.linalg.norm(a, axis=-1), 1.0, atol=1e-13)
    np.testing.assert_allclose(np.sum(ps.T1 * ps.g1, axis=-1), 0.0, atol=1e-13)
    np.testing.assert_allclose(np.sum(np.cross(ps.T1, ps.g1) * ps.n1, axis=-1), 1.0, atol=1e-13)


@pytest.mark.parametrize("name,lam,t", [("torus_poly", 0.2, 0.3), ("helix_c1", 0.1, 1.0), ("sphere_wavy", -0.4, 2.0)])
def test_partner_matches_oracle(name, lam, t):
    C = fixtures.curve(name)
    ps = B.partner_sample(C, lam, t)
    ref = partner_invariants(C, lam, t)
    pairs = {
        "k_g1": ps.k_g1,
        "k_n1": ps.k_n1,
        "tau_g1": ps.tau_g1,
        "theta": ps.theta,
        "a": ps.ds_ds1,
        "dk_g1": ps.dk_g1,
        "dk_n1": ps.dk_n1,
        "dtau_g1": ps.dtau_g1,
        "dtheta": ps.dtheta,
    }
    for k, v in pairs.items():
        assert float(v) == pytest.approx(ref[k], abs=1e-9), k


def test_lambda_zero_rejected():
    with pytest.raises(ValueError):
        B.partner_sample(fixtures.curve("plane_circle"), 0.0, 1.0)


def test_collapsing_partner():
    with pytest.raises(DegeneratePartner):
        B.partner_sample(fixtures.curve("plane_circle"), -1.0, 1.0)


def test_eq14_and_eq15_agree():
    """EQ14 times -(1 - lam k_g1) minus EQ15 is k_n a (D - a^2), which EQ23SYS_A sets to zero."""
    C = fixtures.curve("torus_poly")
    ps = B.partner_sample(C, 0.2, C.grid(32))
    q = B.Quantities.from_sample(ps)
    eq14 = sum(B.CATALOG["EQ14"].members(q)[0])
    eq15 = sum(B.CATALOG["EQ15"].members(q)[0])
    w = 1 - q.lam * q.k_g1
    assert np.max(np.abs(-w * eq14 - eq15)) <= 1e-9
    assert np.max(np.abs(eq15)) <= 1e-9
    r = B.verify(C, 0.2, C.grid(32))
    assert r["EQ14"].classification == r["EQ15"].classification == "CONFIRMED"


def test_every_formula_once():
    r = B.verify(fixtures.curve("helix_c1"), 0.1, fixtures.curve("helix_c1").grid(16))
    ids = [f["id"] for f in r.to_dict()["formulas"]]
    assert ids == list(B.FORMULA_IDS) and len(set(ids)) == len(ids)


def test_generic_curve_all_applicable_confirmed():
    """Away from premises the universal relations hold on a non-symmetric curve."""
    C = fixtures.curve("torus_poly")
    r = B.verify(C, 0.15, C.grid(48))
    bad = [fid for fid in r.discrepant(include_misprints=False)]
    assert bad == []
    assert r["THM3_II"].classification == "DISCREPANT"
    assert r["THM3_II"].readings["sign_corrected"] < 1e-9


def test_eq35_measures_radius():
    for R, name in ((1.0, "plane_circle"), (2.0, "plane_circle_r2")):
        C = fixtures.curve(name)
        for lam in (0.3, -0.25):
            r = B.verify(C, lam, C.grid(16))["EQ35"]
            assert r.classification == "DISCREPANT"
            assert r.mean_lhs == pytest.approx(1 / R, rel=1e-12)
            assert r.readings["lhs_equals_k_g"] < 1e-12


def test_total_degeneracy_reported():
    r = B.verify(fixtures.curve("plane_circle"), -1.0, np.linspace(0, 1, 4))
    assert {d["kind"] for d in r.degeneracies} == {"DegeneratePartner"}
    assert all(f.classification == "NOT_APPLICABLE" for f in r.formulas.values())


def test_degenerate_scan_brackets_crossings():
    C = fixtures.curve("sphere_wavy")
    rows = B.degenerate_scan(C, -2.0, C.grid(64))
    partner = [d["t"] for d in rows if d["kind"] == "DegeneratePartner"]
    assert len(partner) >= 2
    # 1 + lam k_g vanishes where k_g = tan(v) (latitude k_g) meets 1/2, up to the tilt term
    for t in partner:
        dd = Cv.darboux_data(C, t, with_arclength=False)
        assert abs(1 - 2.0 * float(dd.k_g)) < 1e-6


def test_unwrap_along():
    raw = np.array([3.0, -3.1, 3.0])
    np.testing.assert_allclose(B.unwrap_along(raw), [3.0, 2 * math.pi - 3.1, 3.0])


def test_misprint_list_is_data():
    assert set(B.MISPRINTS) == {"EQ35", "THM3_II"}
    assert all(len(v) > 40 for v in B.MISPRINTS.values())
