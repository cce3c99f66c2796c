"""Acceptance gate: criteria 1-10 at their stated tolerances.

Each test records one PASS/FAIL line; the lines are replayed in the pytest
terminal summary under "acceptance criteria".
"""

import math
import re

import numpy as np
import pytest

from dgeo import bertrand as B
from dgeo import curve as Cv
from dgeo import fieldlines as Fl
from dgeo import fixtures
from dgeo.cli import CSV_HEADER, main
from dgeo.curve import ClosedForm, SurfaceCurve
from dgeo.errors import FlatPoint, ZeroSpeed
from dgeo.oracle import base_invariants, partner_invariants

from .test_cli import CATALOG

FRAME_SURFACES = ("plane", "sphere", "cylinder", "helicoid", "torus")

# Closed-form curves named by the acceptance criteria; phi is constant along each.
REFERENCE_CURVES = (
    "plane_circle",
    "plane_circle_r2",
    "sphere_equator",
    "sphere_latitude",
    "sphere_meridian",
    "sphere_tilted",
    "cylinder_circle",
    "helix_c0.5",
    "helix_c1",
    "helix_c2",
    "helicoid_helix",
    "torus_parallel",
    "torus_meridian",
)
# Extra closed-form curves along which phi varies.
VARYING_PHI_CURVES = ("torus_poly", "sphere_wavy")

ANALYTIC_PAIRS = (
    ("plane_circle", 0.3),
    ("plane_circle", 0.5),
    ("plane_circle", -0.25),
    ("sphere_latitude", 0.2),
    ("helix_c1", 0.1),
)
REQUIRED = (
    "EQ12", "EQ13", "EQ14", "EQ15", "EQ23SYS_A", "EQ23SYS_B", "THM2",
    "THM3_I", "THM3_II", "THM3_III", "THM3_IV", "EQ28", "EQ30", "EQ31", "EQ33",
)  # fmt: skip
PREMISE_GATED = (
    "THM2_CASE_PRINCIPAL", "THM2_CASE_X1_GEODESIC", "THM2_CASE_X_GEODESIC",
    "THM1_CASE_GEODESIC", "THM1_CASE_ASYMPTOTIC", "THM1_CASE_PRINCIPAL", "EQ29", "EQ32", "EQ34",
)  # fmt: skip


def _random_points():
    for name in FRAME_SURFACES:
        for C in fixtures.random_curves(name, 100, seed=7):
            yield C


# -- 1 -------------------------------------------------------------------------------------


def test_criterion_1_frame_validity(record):
    ortho = extraction = 0.0
    for C in _random_points():
        dd = Cv.darboux_data(C, 0.0, with_arclength=False)
        F = np.stack([dd.T, dd.g, dd.n])
        ortho = max(ortho, np.max(np.abs(F @ F.T - np.eye(3))), abs(np.linalg.det(F) - 1.0))
        k_g, k_n, tau_g = float(dd.k_g), float(dd.k_n), float(dd.tau_g)
        scale = max(1.0, abs(k_g), abs(k_n), abs(tau_g))
        rhs = (
            k_g * dd.g + k_n * dd.n,
            -k_g * dd.T + tau_g * dd.n,
            -k_n * dd.T - tau_g * dd.g,
        )
        for lhs, r in zip((dd.dT, dd.dg, dd.dn), rhs):
            extraction = max(extraction, float(np.max(np.abs(lhs - r))) / scale)
    ok = ortho <= 1e-10 and extraction <= 1e-9
    record(1, ok, f"500 random points: frame error {ortho:.2e} (<=1e-10), derivative equations {extraction:.2e} (<=1e-9)")
    assert ok


# -- 2 -------------------------------------------------------------------------------------


def test_criterion_2_dual_route(record):
    worst = 0.0
    for C in _random_points():
        dd = Cv.darboux_data(C, 0.0, with_arclength=False)
        k_g, tau_g = Cv.darboux_via_eq3(C, 0.0)
        for a, b in ((k_g, dd.k_g), (tau_g, dd.tau_g)):
            worst = max(worst, abs(float(a) - float(b)) / max(1.0, abs(float(b))))
    ok = worst <= 1e-9
    record(2, ok, f"raw-derivative route vs frame route: max relative difference {worst:.2e} (<=1e-9)")
    assert ok


# -- 3 -------------------------------------------------------------------------------------


def _frenet_worst(names, corrected=False):
    worst = np.zeros(3)
    points = 0
    for name in names:
        C = fixtures.curve(name)
        ts = C.grid(64)
        ref = None
        for t in ts:
            try:
                dd = Cv.darboux_data(C, float(t), with_arclength=False)
                fd = Cv.frenet_data(C, float(t), dd, phi_ref=ref)
            except (FlatPoint, ZeroSpeed):
                continue
            if float(fd.kappa) <= 1e-6:
                continue
            # the unwrap is only trusted if adjacent samples stay within a quarter turn
            assert ref is None or abs(float(fd.phi) - float(ref)) < math.pi / 2, (name, t)
            ref = fd.phi
            res = list(Cv.frenet_residuals(dd, fd))
            if corrected:
                res[2] = Cv.frenet_torsion_corrected(dd, fd)
            worst = np.maximum(worst, [float(r) for r in res])
            points += 1
    return worst, points


def test_criterion_3_frenet_relations(record):
    worst, points = _frenet_worst(REFERENCE_CURVES)
    ok = bool(np.all(worst <= 1e-8))
    record(
        3,
        ok,
        f"{len(REFERENCE_CURVES)} reference curves, {points} points with kappa > 1e-6: "
        f"|k_g-kappa cos phi| {worst[0]:.1e}, |k_n-kappa sin phi| {worst[1]:.1e}, |tau_g-tau-dphi/ds| {worst[2]:.1e} (<=1e-8)",
    )
    assert ok


def test_criterion_3_varying_phi(record):
    """The torsion relation as stated fails where phi varies; the opposite sign holds.

    Recorded as a FAIL line so the acceptance summary shows it; the test
    itself asserts the diagnosis (oracle-backed) rather than the failure.
    """
    printed, points = _frenet_worst(VARYING_PHI_CURVES)
    fixed, _ = _frenet_worst(VARYING_PHI_CURVES, corrected=True)
    ok = bool(np.all(printed <= 1e-8))
    record(
        "3x",
        ok,
        f"varying-phi curves {', '.join(VARYING_PHI_CURVES)} ({points} points): |tau_g-tau-dphi/ds| {printed[2]:.2e}; "
        f"with tau_g = tau - dphi/ds {fixed[2]:.1e}; first two relations {max(printed[:2]):.1e}",
    )
    assert np.all(printed[:2] <= 1e-8)
    assert fixed[2] <= 1e-8
    from dgeo.oracle import frenet_invariants

    C = fixtures.curve("torus_poly")
    fr, b = frenet_invariants(C, -0.5), base_invariants(C, -0.5)
    assert abs(b["tau_g"] - fr["tau"] + fr["dphi"]) < 1e-9
    assert abs(b["tau_g"] - fr["tau"] - fr["dphi"]) > 0.1


# -- 4 -------------------------------------------------------------------------------------


def test_criterion_4_closed_form_values(record):
    expected = {
        "plane_circle": (1.0, 0.0, 0.0),
        "plane_circle_r2": (0.5, 0.0, 0.0),
        "sphere_equator": (0.0, -1.0, 0.0),
    }
    for c in (0.5, 1.0, 2.0):
        expected[f"helix_c{c:g}"] = (0.0, -1 / (1 + c * c), c / (1 + c * c))
    jet_err = oracle_err = 0.0
    for name, vals in expected.items():
        C = fixtures.curve(name)
        dd = Cv.darboux_data(C, C.grid(16), with_arclength=False)
        for got, want in zip((dd.k_g, dd.k_n, dd.tau_g), vals):
            jet_err = max(jet_err, float(np.max(np.abs(got - want))))
        if name.startswith("helix"):
            for t in (0.3, 2.0, 4.5):
                ref = base_invariants(C, t)
                for key, want in zip(("k_g", "k_n", "tau_g"), vals):
                    oracle_err = max(oracle_err, abs(ref[key] - want))
    ok = jet_err <= 1e-10 and oracle_err <= 1e-10
    record(4, ok, f"jet vs closed form {jet_err:.1e}; helix closed form vs oracle {oracle_err:.1e} (<=1e-10)")
    assert ok


# -- 5 -------------------------------------------------------------------------------------


def test_criterion_5_liouville(record):
    worst = {}
    for name in ("sphere_latitude", "sphere_tilted"):
        C = fixtures.curve(name)
        worst[name] = float(np.max(Cv.liouville_residual(C, C.grid(64))))
    ok = max(worst.values()) <= 1e-8
    record(5, ok, ", ".join(f"{k} {v:.1e}" for k, v in worst.items()) + " (<=1e-8)")
    assert ok


# -- 6 -------------------------------------------------------------------------------------


def test_criterion_6_partner_exactness(record):
    C = fixtures.curve("plane_circle")
    ps = B.partner_sample(C, 0.5, C.grid(64))
    errs = (
        float(np.max(np.abs(ps.k_g1 - 2 / 3))),
        float(np.max(np.abs(ps.theta))),
        float(np.max(np.abs(ps.ds_ds1 - 2 / 3))),
    )
    ok = max(errs) <= 1e-12
    record(6, ok, "plane circle lam=0.5: |k_g1-2/3| {:.1e}, |theta| {:.1e}, |ds/ds1-2/3| {:.1e} (<=1e-12)".format(*errs))
    assert ok


# -- 7 -------------------------------------------------------------------------------------


def _oracle_quantities(C, lam, ts):
    refs = [partner_invariants(C, lam, float(t)) for t in ts]
    col = lambda k: np.array([r[k] for r in refs])  # noqa: E731
    nan = np.full(len(refs), np.nan)
    return B.Quantities(
        lam=lam, k_g=col("k_g"), k_n=col("k_n"), tau_g=col("tau_g"),
        k_g1=col("k_g1"), k_n1=col("k_n1"), tau_g1=col("tau_g1"),
        dk_g1=col("dk_g1"), dtau_g1=col("dtau_g1"), theta=col("theta"), dtheta=col("dtheta"),
        a=col("a"), kappa1=nan, tau1=nan, dkappa1=nan, dtau1=nan, k_g_liouville=nan,
    )  # fmt: skip


def _oracle_attributes_to_sign(fid, C, lam):
    """The oracle's own values reproduce the failure, and the documented reading fixes it."""
    q = _oracle_quantities(C, lam, np.linspace(0.4, 5.5, 4))
    ev = B.evaluate_quantities(fid, q)
    reading = next(iter(ev.readings.values()), None)
    return bool(np.max(ev.residual) > 1e-5 and reading is not None and np.max(reading) < 1e-9)


def test_criterion_7_formula_catalog(record):
    failures, reclassified, exercised = [], set(), set()
    for name, lam in ANALYTIC_PAIRS:
        C = fixtures.curve(name)
        rep = B.verify(C, lam, C.grid(64), tol=1e-7)
        for fid in REQUIRED + PREMISE_GATED:
            r = rep[fid]
            if r.classification == "CONFIRMED":
                exercised.add(fid)
            elif r.classification == "DISCREPANT":
                if fid in B.MISPRINTS and _oracle_attributes_to_sign(fid, C, lam):
                    reclassified.add(fid)
                    exercised.add(fid)
                else:
                    failures.append(f"{fid}@{name},{lam}")
    never = [fid for fid in REQUIRED if fid not in exercised]
    ok = not failures and not never
    detail = (
        f"{len(ANALYTIC_PAIRS)} pairs x 64 points: all applicable formulas CONFIRMED at 1e-7"
        + (f"; oracle-backed misprint {', '.join(sorted(reclassified))}" if reclassified else "")
        + (f"; failures {failures}" if failures else "")
        + (f"; never applicable {never}" if never else "")
    )
    record(7, ok, detail)
    assert ok


# -- 8 -------------------------------------------------------------------------------------


def test_criterion_8_eq35_misprint(record, capsys):
    lhs = []
    ok = True
    for name, R in (("plane_circle", 1.0), ("plane_circle_r2", 2.0)):
        C = fixtures.curve(name)
        for lam in (0.3, 0.5, -0.25):
            r = B.verify(C, lam, C.grid(64))["EQ35"]
            ok &= r.classification == "DISCREPANT" and abs(r.mean_lhs - 1 / R) <= 1e-12
            lhs.append(r.mean_lhs)
    code = main(["bertrand", "--scene", CATALOG, "--curve", "plane_circle", "--lambda", "0.5", "--samples", "64", "--strict"])
    capsys.readouterr()
    ok &= code == 0
    record(8, ok, f"EQ35 DISCREPANT, measured left side {sorted(set(round(x, 12) for x in lhs))} (=1/R for all lam); --strict exit {code}")
    assert ok


# -- 9 -------------------------------------------------------------------------------------


def test_criterion_9_field_lines(record):
    sphere = fixtures.surface("sphere")
    geo = Fl.geodesic(sphere, (0.0, 0.0), (1.0, 1.0), math.pi, 1e-3)
    # at h = 1e-3 the drift sits at roundoff, so the order is measured where truncation dominates
    cfg = Fl.FieldLineConfig("geodesic", (0.0, 0.0), math.pi, 1e-2, (1.0, 1.0))
    _, _, factor = Fl.convergence_factor(sphere, cfg)

    torus = fixtures.surface("torus")
    pl = Fl.principal_line(torus, (0.3, 0.5), 1, 2.0, 1e-2)
    Cp = SurfaceCurve(torus, pl, "torus_principal")
    tau_g = max(pl.drift, float(np.max(np.abs(Cv.darboux_data(Cp, Cp.grid(64), with_arclength=False).tau_g))))

    helicoid = fixtures.surface("helicoid")
    al = Fl.asymptotic_line(helicoid, (1.0, 0.0), 1, 1.0, 1e-2)
    Ca = SurfaceCurve(helicoid, al, "helicoid_asymptotic")
    k_n = max(al.drift, float(np.max(np.abs(Cv.darboux_data(Ca, Ca.grid(64), with_arclength=False).k_n))))
    cor1 = B.verify(Ca, 0.1, Ca.grid(64), tol=1e-5)["COR1"]

    ok = geo.drift <= 1e-8 and factor >= 8 and tau_g <= 1e-6 and k_n <= 1e-6 and cor1.classification == "CONFIRMED"
    record(
        9,
        ok,
        f"geodesic |k_g| {geo.drift:.1e} (step 1e-3); RK4 factor {factor:.1f} (h 1e-2 -> 5e-3); "
        f"torus principal |tau_g| {tau_g:.1e}; helicoid asymptotic |k_n| {k_n:.1e}; "
        f"COR1 {cor1.classification} on {cor1.premise_count} points ({cor1.max_abs_residual:.1e})",
    )
    assert ok


# -- 10 ------------------------------------------------------------------------------------


def test_criterion_10_determinism_and_formats(record, tmp_path, capsys):
    def stdout(*argv):
        main(list(argv))
        return capsys.readouterr().out

    same = True
    for argv in (
        ("invariants", "--scene", CATALOG, "--curve", "torus_poly", "--samples", "32"),
        ("bertrand", "--scene", CATALOG, "--curve", "helix_c1", "--lambda", "0.1", "--samples", "32"),
    ):
        same &= stdout(*argv) == stdout(*argv)
    files = []
    for i in range(2):
        svg = tmp_path / f"p{i}.svg"
        geo = tmp_path / f"g{i}.json"
        stdout("plot", "--scene", CATALOG, "--curve", "plane_circle", "--lambda", "0.5", "--out", str(svg))
        stdout(
            "generate", "--scene", CATALOG, "--kind", "principal", "--surface", "torus", "--start", "0.3,0.5",
            "--branch", "1", "--length", "1", "--step", "0.01", "--out", str(geo),
        )  # fmt: skip
        files.append((svg.read_bytes(), geo.read_bytes()))
    same &= files[0] == files[1]

    once = True
    for name, lam in ANALYTIC_PAIRS:
        out = stdout("bertrand", "--scene", CATALOG, "--curve", name, "--lambda", str(lam), "--samples", "16")
        ids = re.findall(r'"id": "([A-Z0-9_]+)"', out.split('"misprints"')[0])
        once &= sorted(ids) == sorted(B.FORMULA_IDS) and len(ids) == len(set(ids))
    header = stdout("invariants", "--scene", CATALOG, "--curve", "plane_circle", "--samples", "2").splitlines()[0]
    ok = same and once and header == CSV_HEADER == "t,s,u,v,x,y,z,k_g,k_n,tau_g,kappa,tau,phi"
    record(10, ok, f"byte-identical reruns {same}; each FormulaId once {once}; CSV header {header!r}")
    assert ok
