"""Scene files and curve files (JSON), with line-anchored error messages."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import expr as X
from .curve import ClosedForm, IntegratedPath, SurfaceCurve
from .errors import ParseError, SceneError
from .surface import ParametricSurface

CURVE_FORMAT = "dgeo-curve"


@dataclass
class Scene:
    surfaces: dict = field(default_factory=dict)  # name -> ParametricSurface
    curves: dict = field(default_factory=dict)  # name -> SurfaceCurve
    source: str = "<scene>"

    def curve(self, name: str) -> SurfaceCurve:
        try:
            return self.curves[name]
        except KeyError:
            raise SceneError(f"{self.source}: no curve named {name!r}") from None

    def surface(self, name: str) -> ParametricSurface:
        try:
            return self.surfaces[name]
        except KeyError:
            raise SceneError(f"{self.source}: no surface named {name!r}") from None


class _Locator:
    """Maps JSON values back to line:column positions in the raw text."""

    def __init__(self, text: str, source: str):
        self.text = text
        self.source = source

    def where(self, value, offset: int = 0) -> str:
        needle = json.dumps(value)
        pos = self.text.find(needle)
        if pos < 0:
            return self.source
        pos += 1 + offset  # skip the opening quote
        line = self.text.count("\n", 0, pos) + 1
        col = pos - (self.text.rfind("\n", 0, pos) + 1) + 1
        return f"{self.source}:{line}:{col}"

    def fail(self, message: str, value=None, offset: int = 0):
        where = self.where(value, offset) if value is not None else self.source
        raise SceneError(f"{where}: {message}")


def _expr(loc: _Locator, text, what: str, allowed: set) -> X.Expr:
    if not isinstance(text, str):
        loc.fail(f"{what} must be a formula string", text)
    try:
        e = X.parse(text)
    except ParseError as err:
        loc.fail(f"{what}: {err.message} (offset {err.offset})", text, err.offset)
    extra = X.free_vars(e) - allowed
    if extra:
        loc.fail(f"{what} may only use {sorted(allowed)}, found {sorted(extra)}", text)
    return e


def constant(value) -> float:
    """A range endpoint: a JSON number or a constant DSL formula such as ``"pi/2"``."""
    if isinstance(value, bool):
        raise SceneError("range endpoints must be numbers")
    if isinstance(value, (int, float)):
        return float(value)
    e = X.parse(value)
    if X.free_vars(e):
        raise SceneError(f"range endpoint {value!r} must be constant")
    return float(X.eval_scalar(e, {}))


def _range(loc: _Locator, value, what: str) -> tuple[float, float]:
    if not isinstance(value, list) or len(value) != 2:
        loc.fail(f"{what} must be a two-element list", what)
    out = []
    for v in value:
        try:
            out.append(constant(v))
        except ParseError as err:
            loc.fail(f"{what}: {err.message} (offset {err.offset})", v, err.offset)
        except SceneError as err:
            loc.fail(f"{what}: {err}", v)
    if not (math.isfinite(out[0]) and math.isfinite(out[1]) and out[0] < out[1]):
        loc.fail(f"{what} [{out[0]}, {out[1]}] is empty", what)
    return out[0], out[1]


def _require(loc: _Locator, obj: dict, keys: tuple, what: str):
    if not isinstance(obj, dict):
        loc.fail(f"{what} entries must be objects")
    missing = [k for k in keys if k not in obj]
    if missing:
        loc.fail(f"{what} {obj.get('name', '?')!r} lacks {missing}", obj.get("name"))


def parse_surface(loc: _Locator, d: dict) -> ParametricSurface:
    _require(loc, d, ("name", "x", "y", "z", "u_range", "v_range"), "surface")
    name = d["name"]
    comps = [_expr(loc, d[k], f"surface {name}.{k}", {"u", "v"}) for k in ("x", "y", "z")]
    ur = _range(loc, d["u_range"], "u_range")
    vr = _range(loc, d["v_range"], "v_range")
    return ParametricSurface(name, *comps, ur, vr)


def scene_from_dict(data: dict, text: Optional[str] = None, source: str = "<scene>") -> Scene:
    loc = _Locator(text if text is not None else json.dumps(data, indent=2), source)
    if not isinstance(data, dict):
        loc.fail("scene must be a JSON object")
    scene = Scene(source=source)
    for d in data.get("surfaces", []):
        S = parse_surface(loc, d)
        if S.name in scene.surfaces:
            loc.fail(f"duplicate surface name {S.name!r}", S.name)
        scene.surfaces[S.name] = S
    for d in data.get("curves", []):
        _require(loc, d, ("name", "surface", "u", "v", "t_range"), "curve")
        name = d["name"]
        if name in scene.curves:
            loc.fail(f"duplicate curve name {name!r}", name)
        if d["surface"] not in scene.surfaces:
            loc.fail(f"curve {name!r} references unknown surface {d['surface']!r}", d["surface"])
        u = _expr(loc, d["u"], f"curve {name}.u", {"t"})
        v = _expr(loc, d["v"], f"curve {name}.v", {"t"})
        path = ClosedForm(u, v, _range(loc, d["t_range"], "t_range"))
        scene.curves[name] = SurfaceCurve(scene.surfaces[d["surface"]], path, name)
    if not scene.surfaces:
        loc.fail("scene declares no surfaces")
    return scene


def load_scene(path) -> Scene:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as err:
        raise SceneError(f"{path}: {err.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as err:
        raise SceneError(f"{path}:{err.lineno}:{err.colno}: {err.msg}") from None
    return scene_from_dict(data, text, str(path))


# -- curve files ---------------------------------------------------------------------


def surface_to_dict(S: ParametricSurface) -> dict:
    return {
        "name": S.name,
        "x": X.to_string(S.x),
        "y": X.to_string(S.y),
        "z": X.to_string(S.z),
        "u_range": list(S.u_range),
        "v_range": list(S.v_range),
    }


def curve_file_dict(C: SurfaceCurve) -> dict:
    p = C.path
    if not isinstance(p, IntegratedPath):
        raise TypeError("curve files hold integrated paths")
    return {
        "format": CURVE_FORMAT,
        "version": 1,
        "name": C.name,
        "kind": p.kind,
        "jet_order_valid": p.jet_order_valid,
        "step": p.step,
        "drift": p.drift,
        "meta": p.meta,
        "surface": surface_to_dict(C.surface),
        "samples": [
            {"t": float(t), "u": [float(x) for x in u], "v": [float(x) for x in v]} for t, u, v in zip(p.t, p.u, p.v)
        ],
    }


def _json_default(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    raise TypeError(f"cannot serialise {type(x).__name__}")


def _finite(obj):
    """Replace non-finite floats with None so the output is strict JSON."""
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return _finite(obj.item())
    return obj


def dumps(obj) -> str:
    """Deterministic strict JSON (repr floats round-trip exactly)."""
    return json.dumps(_finite(obj), indent=2, sort_keys=False, default=_json_default, allow_nan=False) + "\n"


def save_curve(C: SurfaceCurve, path) -> None:
    Path(path).write_text(dumps(curve_file_dict(C)))


def load_curve(path) -> SurfaceCurve:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as err:
        raise SceneError(f"{path}: {err.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as err:
        raise SceneError(f"{path}:{err.lineno}:{err.colno}: {err.msg}") from None
    loc = _Locator(text, str(path))
    if not isinstance(data, dict) or data.get("format") != CURVE_FORMAT:
        loc.fail(f"not a {CURVE_FORMAT} file")
    S = parse_surface(loc, data.get("surface"))
    samples = data.get("samples") or []
    try:
        t = np.array([s["t"] for s in samples], dtype=float)
        u = np.array([s["u"] for s in samples], dtype=float)
        v = np.array([s["v"] for s in samples], dtype=float)
        drift = data.get("drift")
        p = IntegratedPath(
            t,
            u,
            v,
            int(data["jet_order_valid"]),
            kind=data.get("kind", "custom"),
            drift=float("nan") if drift is None else float(drift),
            step=float(data.get("step") or float("nan")),
            meta=data.get("meta") or {},
        )
    except (KeyError, TypeError, ValueError) as err:
        loc.fail(f"malformed samples: {err}")
    return SurfaceCurve(S, p, data.get("name", path.stem))
