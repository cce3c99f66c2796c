import math

import numpy as np
import pytest

from dgeo import curve as Cv
from dgeo import fieldlines as Fl
from dgeo import scene
from dgeo.curve import SurfaceCurve
from dgeo.errors import LeftDomain, NoRealDirection, ParabolicEncountered, UmbilicEncountered
from dgeo.fixtures import surface
from dgeo.surface import position


def _great_circle_error(path):
    """Max distance between the sampled geodesic and the exact great circle."""
    S = surface("sphere")
    w = np.array([0.0, 1.0, 1.0]) / math.sqrt(2)
    err = 0.0
    for t, u, v in zip(path.t, path.u[:, 0], path.v[:, 0]):
        exact = math.cos(t) * np.array([1.0, 0.0, 0.0]) + math.sin(t) * w
        err = max(err, float(np.linalg.norm(position(S, u, v) - exact)))
    return err


def test_sphere_geodesic_is_great_circle():
    p = Fl.geodesic(surface("sphere"), (0.0, 0.0), (1.0, 1.0), math.pi, 1e-2)
    assert _great_circle_error(p) < 1e-9
    assert p.meta["speed_drift"] < 1e-9
    assert p.drift < 1e-8


def test_rk4_global_error_order():
    S = surface("sphere")
    errs = [_great_circle_error(Fl.geodesic(S, (0.0, 0.0), (1.0, 1.0), math.pi, h)) for h in (0.1, 0.05)]
    assert errs[0] / errs[1] > 14


@pytest.mark.parametrize(
    "name,kind,start",
    [("paraboloid", "principal", (0.3, 0.4)), ("hyperboloid", "asymptotic", (0.2, 0.1))],
)
def test_field_line_drift_converges(name, kind, start):
    cfg = Fl.FieldLineConfig(kind, start, 1.0, 0.05)
    d1, d2, ratio = Fl.convergence_factor(surface(name), cfg)
    assert ratio >= 8, (d1, d2)


def test_integrated_jets_reproduce_invariant():
    """The stored jets, read back through the Darboux pipeline, keep tau_g ~ 0."""
    S = surface("paraboloid")
    p = Fl.principal_line(S, (0.3, 0.4), 1, 1.0, 1e-2)
    C = SurfaceCurve(S, p, "line")
    dd = Cv.darboux_data(C, C.grid(20), with_arclength=False)
    assert np.max(np.abs(dd.tau_g)) < 1e-7
    # k_g along the line is not forced to vanish
    assert np.max(np.abs(dd.k_g)) > 1e-3


def test_geodesic_jets_give_zero_geodesic_curvature():
    S = surface("torus")
    p = Fl.geodesic(S, (0.0, 0.4), (1.0, 0.3), 2.0, 1e-2)
    C = SurfaceCurve(S, p, "geo")
    dd = Cv.darboux_data(C, C.grid(25), with_arclength=False)
    assert np.max(np.abs(dd.k_g)) < 1e-8


def test_asymptotic_branches_differ():
    S = surface("hyperboloid")
    a = Fl.asymptotic_line(S, (0.0, 0.2), 1, 0.5, 1e-2)
    b = Fl.asymptotic_line(S, (0.0, 0.2), 2, 0.5, 1e-2)
    assert abs(a.u[-1, 0] - b.u[-1, 0]) > 0.1


def test_sphere_has_no_asymptotic_lines():
    with pytest.raises(NoRealDirection):
        Fl.asymptotic_line(surface("sphere"), (0.0, 0.3), 1, 1.0, 0.01)


def test_umbilic_start():
    with pytest.raises(UmbilicEncountered):
        Fl.principal_line(surface("sphere"), (0.0, 0.3), 1, 1.0, 0.01)


def test_parabolic_start():
    # the torus's top circle v = pi/2 is parabolic
    with pytest.raises(ParabolicEncountered):
        Fl.asymptotic_line(surface("torus"), (0.0, math.pi / 2), 1, 1.0, 0.01)


def test_leaving_domain_reports_last_good_t():
    with pytest.raises(LeftDomain) as info:
        Fl.geodesic(surface("sphere"), (0.0, 0.0), (0.0, 1.0), 3.0, 1e-2)
    assert info.value.t == pytest.approx(math.pi / 2, abs=0.02)


@pytest.mark.parametrize(
    "kw",
    [
        dict(kind="spiral", start=(0, 0), length=1, step=0.1),
        dict(kind="geodesic", start=(0, 0), length=1, step=0.1),
        dict(kind="principal", start=(0, 0), length=-1, step=0.1),
        dict(kind="principal", start=(0, 0), length=1, step=0.1, branch=3),
    ],
)
def test_config_validation(kw):
    with pytest.raises(ValueError):
        Fl.FieldLineConfig(**kw)


def test_curve_file_round_trip(tmp_path):
    S = surface("torus")
    C = SurfaceCurve(S, Fl.principal_line(S, (0.1, 0.3), 2, 1.0, 0.05), "tp")
    out = tmp_path / "c.json"
    scene.save_curve(C, out)
    back = scene.load_curve(out)
    np.testing.assert_array_equal(back.path.u, C.path.u)
    np.testing.assert_array_equal(back.path.v, C.path.v)
    assert back.path.jet_order_valid == C.path.jet_order_valid
    assert back.surface.name == "torus"
    assert out.read_text() == scene.dumps(scene.curve_file_dict(back))
