"""Reference surfaces and curves with known invariants.

Everything is declared in scene-file form so the same definitions drive the
library, the test-suite, the scripts and the shipped ``scenes/*.json``.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .curve import ClosedForm, SurfaceCurve
from .scene import Scene, scene_from_dict

TAU = "2*pi"

SURFACES = [
    {"name": "plane", "x": "u", "y": "v", "z": "0", "u_range": [-10, 10], "v_range": [-10, 10]},
    {
        "name": "sphere",
        "x": "cos(u)*cos(v)",
        "y": "sin(u)*cos(v)",
        "z": "sin(v)",
        "u_range": ["-2*pi", "2*pi"],
        "v_range": ["-pi/2", "pi/2"],
    },
    {
        # Mercator chart: orthogonal, and great circles have closed forms.
        "name": "sphere_mercator",
        "x": "cos(u)/cosh(v)",
        "y": "sin(u)/cosh(v)",
        "z": "sinh(v)/cosh(v)",
        "u_range": ["-2*pi", "2*pi"],
        "v_range": [-5, 5],
    },
    {"name": "cylinder", "x": "cos(u)", "y": "sin(u)", "z": "v", "u_range": ["-4*pi", "4*pi"], "v_range": [-20, 20]},
    {"name": "helicoid", "x": "u*cos(v)", "y": "u*sin(v)", "z": "v", "u_range": [-3, 3], "v_range": [-10, 10]},
    {
        "name": "torus",
        "x": "(2+cos(v))*cos(u)",
        "y": "(2+cos(v))*sin(u)",
        "z": "sin(v)",
        "u_range": ["-2*pi", "2*pi"],
        "v_range": ["-2*pi", "2*pi"],
    },
    {"name": "paraboloid", "x": "u", "y": "v", "z": "(u^2+2*v^2)/2", "u_range": [-5, 5], "v_range": [-5, 5]},
    {
        "name": "hyperboloid",
        "x": "cosh(v)*cos(u)",
        "y": "cosh(v)*sin(u)",
        "z": "sinh(v)",
        "u_range": ["-2*pi", "2*pi"],
        "v_range": [-3, 3],
    },
]

CURVES = [
    {"name": "plane_circle", "surface": "plane", "u": "cos(t)", "v": "sin(t)", "t_range": [0, TAU]},
    {"name": "plane_circle_r2", "surface": "plane", "u": "2*cos(t)", "v": "2*sin(t)", "t_range": [0, TAU]},
    {"name": "plane_line", "surface": "plane", "u": "t", "v": "0", "t_range": [0, 2]},
    {"name": "plane_point", "surface": "plane", "u": "1", "v": "2", "t_range": [0, 1]},
    {"name": "sphere_equator", "surface": "sphere", "u": "t", "v": "0", "t_range": [0, TAU]},
    {"name": "sphere_latitude", "surface": "sphere", "u": "t", "v": "pi/6", "t_range": [0, TAU]},
    {"name": "sphere_meridian", "surface": "sphere", "u": "0", "v": "t", "t_range": [-1, 1]},
    {"name": "sphere_wavy", "surface": "sphere", "u": "t", "v": "0.5+0.3*sin(t)", "t_range": [0, TAU]},
    {
        # Great circle inclined 45 degrees: sinh(v) = sin(u) in the Mercator chart.
        "name": "sphere_tilted",
        "surface": "sphere_mercator",
        "u": "t",
        "v": "log(sin(t)+sqrt(sin(t)^2+1))",
        "t_range": [0, TAU],
    },
    {"name": "cylinder_circle", "surface": "cylinder", "u": "t", "v": "-0.3", "t_range": [0, TAU]},
    {"name": "cylinder_ruling", "surface": "cylinder", "u": "0.5", "v": "t", "t_range": [-1, 1]},
    {"name": "helix_c0.5", "surface": "cylinder", "u": "t", "v": "0.5*t", "t_range": [0, TAU]},
    {"name": "helix_c1", "surface": "cylinder", "u": "t", "v": "t", "t_range": [0, TAU]},
    {"name": "helix_c2", "surface": "cylinder", "u": "t", "v": "2*t", "t_range": [0, TAU]},
    {"name": "helicoid_helix", "surface": "helicoid", "u": "1", "v": "t", "t_range": [0, TAU]},
    {"name": "torus_parallel", "surface": "torus", "u": "t", "v": "0.7", "t_range": [0, TAU]},
    {"name": "torus_meridian", "surface": "torus", "u": "0.3", "v": "t", "t_range": [0, TAU]},
    {"name": "torus_poly", "surface": "torus", "u": "0.3+t+0.2*t^2", "v": "0.1+0.7*t-0.3*t^3", "t_range": [-1, 1]},
]

# Which curves each scene file contains; the scene name doubles as the file stem.
SCENES = {
    "catalog": [c["name"] for c in CURVES],
    "plane_circle": ["plane_circle", "plane_circle_r2", "plane_point"],
    "sphere": ["sphere_equator", "sphere_latitude", "sphere_meridian", "sphere_wavy", "sphere_tilted"],
    "cylinder_helix": ["helix_c0.5", "helix_c1", "helix_c2", "cylinder_circle", "cylinder_ruling"],
}


def scene_dict(name: str = "catalog") -> dict:
    wanted = SCENES[name]
    curves = [c for c in CURVES if c["name"] in wanted]
    used = {c["surface"] for c in curves}
    surfaces = [s for s in SURFACES if name == "catalog" or s["name"] in used]
    return {"surfaces": surfaces, "curves": curves}


@lru_cache(maxsize=None)
def catalog() -> Scene:
    return scene_from_dict(scene_dict("catalog"), source="catalog")


def surface(name: str):
    return catalog().surface(name)


def curve(name: str) -> SurfaceCurve:
    return catalog().curve(name)


# Surfaces whose every chart point in these boxes is regular; used for random sampling.
REGULAR_BOXES = {
    "plane": ((-3, 3), (-3, 3)),
    "sphere": ((-3, 3), (-1.2, 1.2)),
    "cylinder": ((-3, 3), (-3, 3)),
    "helicoid": ((0.2, 2.5), (-3, 3)),
    "torus": ((-3, 3), (-3, 3)),
}


def random_curves(name: str, count: int, seed: int = 0) -> list[SurfaceCurve]:
    """Quadratic paths through random regular points; evaluate them at t = 0."""
    rng = np.random.default_rng(seed)
    S = surface(name)
    (u0, u1), (v0, v1) = REGULAR_BOXES[name]
    from . import expr as X

    out = []
    for i in range(count):
        u, v = float(rng.uniform(u0, u1)), float(rng.uniform(v0, v1))
        a, b, c, d = (float(x) for x in rng.normal(size=4))
        path = ClosedForm(
            X.parse(f"{u!r}+({a!r})*t+({b!r})*t^2"),
            X.parse(f"{v!r}+({c!r})*t+({d!r})*t^2"),
            (-0.05, 0.05),
        )
        out.append(SurfaceCurve(S, path, f"{name}_random_{i}"))
    return out
