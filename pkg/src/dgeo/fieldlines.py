"""Geodesics, principal lines and asymptotic lines by fixed-step RK4.

All integrations run in the parameter domain with unit first-form speed, so
the integration parameter is arc length.  After integration, each sample's
(u, v) jets are rebuilt to order 4 by Taylor-mode evaluation of the same ODE
on jets; the defining-invariant drift is measured independently from the
sampled trajectory with 5-point finite differences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import jet as J
from .curve import IntegratedPath
from .errors import (
    AmbiguousDirection,
    LeftDomain,
    NoRealDirection,
    ParabolicEncountered,
    PlanarPoint,
    SingularPoint,
    Umbilic,
    UmbilicEncountered,
)
from .surface import (
    EPS_K,
    EPS_UMB,
    FundamentalForms,
    ParametricSurface,
    asymptotic_directions,
    first_form_normalize,
    fundamental_forms,
    principal_curvatures,
    principal_directions,
    quadratic_roots,
)

KINDS = ("geodesic", "principal", "asymptotic")


@dataclass(frozen=True)
class FieldLineConfig:
    """What to integrate and how; ``branch`` is ignored for geodesics."""

    kind: str
    start: tuple[float, float]
    length: float
    step: float
    direction: Optional[tuple[float, float]] = None
    branch: int = 1
    convergence: bool = False

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}")
        if not (self.length > 0 and self.step > 0):
            raise ValueError("length and step must be positive")
        if self.kind == "geodesic" and self.direction is None:
            raise ValueError("geodesic needs a start direction")
        if self.kind != "geodesic" and self.branch not in (1, 2):
            raise ValueError("branch must be 1 or 2")


# -- geodesic ODE ------------------------------------------------------------------------


def _geodesic_accel(S: ParametricSurface, u, v, p, q):
    su, sv = S.d(1, 0, u, v), S.d(0, 1, u, v)
    w = S.d(2, 0, u, v) * p * p + 2.0 * S.d(1, 1, u, v) * p * q + S.d(0, 2, u, v) * q * q
    E, F, G = su @ su, su @ sv, sv @ sv
    det = E * G - F * F
    if det <= 1e-20 * max(1.0, E * G):
        raise SingularPoint(f"metric degenerates at ({u}, {v})")
    b1, b2 = w @ su, w @ sv
    return -(G * b1 - F * b2) / det, -(E * b2 - F * b1) / det


def _geodesic_accel_jet(S: ParametricSurface, u: J.Jet, v: J.Jet, p: J.Jet, q: J.Jet):
    su, sv = S.d_jet(1, 0, u, v), S.d_jet(0, 1, u, v)
    suu, suv, svv = S.d_jet(2, 0, u, v), S.d_jet(1, 1, u, v), S.d_jet(0, 2, u, v)
    pp, pq, qq = p * p, p * q * 2.0, q * q
    w = tuple(a * pp + b * pq + c * qq for a, b, c in zip(suu, suv, svv))
    E, F, G = J.vdot(su, su), J.vdot(su, sv), J.vdot(sv, sv)
    b1, b2 = J.vdot(w, su), J.vdot(w, sv)
    inv = (E * G - F * F).reciprocal()
    return -(G * b1 - F * b2) * inv, -(E * b2 - F * b1) * inv


# -- direction fields --------------------------------------------------------------------


def _field_coeffs(kind: str, ff: FundamentalForms):
    if kind == "principal":
        return ff.E * ff.M - ff.F * ff.L, ff.E * ff.N - ff.G * ff.L, ff.F * ff.N - ff.G * ff.M
    return ff.L, 2.0 * ff.M, ff.N


def _check_field(kind: str, ff: FundamentalForms, u: float, v: float) -> None:
    if kind == "principal":
        k1, k2 = principal_curvatures(ff)
        if k1 - k2 < EPS_UMB:
            raise UmbilicEncountered(f"umbilic point at ({u:.6g}, {v:.6g})")
    else:
        scale = max(1.0, abs(ff.E), abs(ff.G)) ** 2
        if ff.K > -EPS_K * scale:
            raise ParabolicEncountered(f"K = {ff.K:.3g} at ({u:.6g}, {v:.6g}); asymptotic roots merge")


def _candidates(kind: str, ff: FundamentalForms):
    a, b, c = _field_coeffs(kind, ff)
    return [first_form_normalize(ff, d) for d in quadratic_roots(a, b, c) if np.linalg.norm(d) > 0.0]


def _ip(ff: FundamentalForms, a, b) -> float:
    return ff.E * a[0] * b[0] + ff.F * (a[0] * b[1] + a[1] * b[0]) + ff.G * a[1] * b[1]


def _follow(kind: str, S: ParametricSurface, u: float, v: float, ref) -> np.ndarray:
    """Unit field direction at (u, v) closest to ``ref``, sign-aligned with it."""
    ff = fundamental_forms(S, u, v)
    _check_field(kind, ff, u, v)
    cands = _candidates(kind, ff)
    dots = [_ip(ff, d, ref) for d in cands]
    i = int(np.argmax(np.abs(dots)))
    if len(cands) == 2 and abs(abs(dots[0]) - abs(dots[1])) < 1e-12:
        raise AmbiguousDirection(f"both {kind} directions equally aligned at ({u:.6g}, {v:.6g})")
    return cands[i] if dots[i] > 0 else -cands[i]


def _canonical(d: np.ndarray) -> np.ndarray:
    return d if d[np.argmax(np.abs(d))] > 0 else -d


def initial_direction(S: ParametricSurface, kind: str, start, branch: int) -> np.ndarray:
    u, v = start
    if kind == "principal":
        try:
            return principal_directions(S, u, v)[branch - 1][0]
        except Umbilic as err:
            raise UmbilicEncountered(str(err)) from None
    try:
        dirs = asymptotic_directions(S, u, v)
    except PlanarPoint as err:
        raise AmbiguousDirection(f"every direction is asymptotic: {err}") from None
    if len(dirs) < 2:
        raise ParabolicEncountered(f"K = 0 at ({u}, {v}); asymptotic directions coincide")
    return _canonical(dirs[branch - 1])


# -- integration -------------------------------------------------------------------------


def _steps(length: float, step: float) -> tuple[int, float]:
    n = max(1, int(math.ceil(length / step - 1e-9)))
    return n, length / n


def _check_domain(S: ParametricSurface, u: float, v: float, t: float) -> None:
    if not (np.isfinite(u) and np.isfinite(v) and S.in_domain(u, v)):
        raise LeftDomain(f"path left the parameter domain near ({u:.6g}, {v:.6g})", t=t)


def _rk4_geodesic(S, y0, n, h):
    def f(y):
        a, b = _geodesic_accel(S, *y)
        return np.array([y[2], y[3], a, b])

    ys = np.empty((n + 1, 4))
    ys[0] = y0
    for i in range(n):
        y = ys[i]
        try:
            k1 = f(y)
            k2 = f(y + 0.5 * h * k1)
            k3 = f(y + 0.5 * h * k2)
            k4 = f(y + h * k3)
        except SingularPoint as err:
            raise SingularPoint(str(err), t=i * h) from None
        ys[i + 1] = y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        _check_domain(S, ys[i + 1, 0], ys[i + 1, 1], i * h)
    return ys


def _rk4_field(S, kind, y0, d0, n, h):
    ys = np.empty((n + 1, 2))
    ds = np.empty((n + 1, 2))
    ys[0], ds[0] = y0, d0
    for i in range(n):
        y, ref = ys[i], ds[i]
        try:
            k1 = _follow(kind, S, *y, ref)
            k2 = _follow(kind, S, *(y + 0.5 * h * k1), ref)
            k3 = _follow(kind, S, *(y + 0.5 * h * k2), ref)
            k4 = _follow(kind, S, *(y + h * k3), ref)
        except (UmbilicEncountered, ParabolicEncountered, AmbiguousDirection, SingularPoint) as err:
            raise type(err)(str(err).split(" (t=")[0], t=i * h) from None
        ys[i + 1] = y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        _check_domain(S, ys[i + 1, 0], ys[i + 1, 1], i * h)
        try:
            ds[i + 1] = _follow(kind, S, *ys[i + 1], ref)
        except (UmbilicEncountered, ParabolicEncountered, AmbiguousDirection, SingularPoint) as err:
            raise type(err)(str(err).split(" (t=")[0], t=(i + 1) * h) from None
    return ys, ds


# -- Taylor-mode jets --------------------------------------------------------------------


def _geodesic_jets(S, ys):
    m = ys.shape[0]
    cu, cv, cp, cq = (np.zeros((J.ORDER + 1, m)) for _ in range(4))
    cu[0], cv[0], cp[0], cq[0] = ys.T
    for k in range(J.ORDER):
        a, b = _geodesic_accel_jet(S, J.Jet(cu), J.Jet(cv), J.Jet(cp), J.Jet(cq))
        cu[k + 1] = cp[k] / (k + 1)
        cv[k + 1] = cq[k] / (k + 1)
        cp[k + 1] = a.c[k] / (k + 1)
        cq[k + 1] = b.c[k] / (k + 1)
    return cu.T.copy(), cv.T.copy()


def _forms_jet(S, u: J.Jet, v: J.Jet):
    su, sv = S.d_jet(1, 0, u, v), S.d_jet(0, 1, u, v)
    n = S.normal_jet(u, v)
    E, F, G = J.vdot(su, su), J.vdot(su, sv), J.vdot(sv, sv)
    L = J.vdot(S.d_jet(2, 0, u, v), n)
    M = J.vdot(S.d_jet(1, 1, u, v), n)
    N = J.vdot(S.d_jet(0, 2, u, v), n)
    return E, F, G, L, M, N


def _field_jet(kind, S, u: J.Jet, v: J.Jet, choice):
    """Unit field direction on jets, following the per-sample root choice.

    ``choice`` holds boolean arrays (plus_root, use_p, flip) recorded from the
    scalar field at the sample values.
    """
    E, F, G, L, M, N = _forms_jet(S, u, v)
    if kind == "principal":
        a, b, c = E * M - F * L, E * N - G * L, F * N - G * M
    else:
        a, b, c = L, M * 2.0, N
    root = J.sqrt(b * b - a * c * 4.0)
    plus, use_p, flip = choice
    sgn_root = root.select(plus, -root)
    px, py = c * 2.0, -b + sgn_root
    qx, qy = -b - sgn_root, a * 2.0
    x = px.select(use_p, qx)
    y = py.select(use_p, qy)
    speed = J.sqrt(E * x * x + F * x * y * 2.0 + G * y * y)
    sign = np.where(flip, -1.0, 1.0)
    inv = speed.reciprocal() * sign
    return x * inv, y * inv


def _field_choice(kind, S, ys, ds):
    m = ys.shape[0]
    plus = np.zeros(m, dtype=bool)
    use_p = np.zeros(m, dtype=bool)
    flip = np.zeros(m, dtype=bool)
    for i, ((u, v), d) in enumerate(zip(ys, ds)):
        ff = fundamental_forms(S, u, v)
        a, b, c = _field_coeffs(kind, ff)
        root = math.sqrt(max(b * b - 4.0 * a * c, 0.0))
        best = None
        for is_plus in (True, False):
            sr = root if is_plus else -root
            p, q = np.array([2.0 * c, -b + sr]), np.array([-b - sr, 2.0 * a])
            is_p = np.linalg.norm(p) >= np.linalg.norm(q)
            cand = p if is_p else q
            if np.linalg.norm(cand) == 0.0:
                continue
            dot = _ip(ff, first_form_normalize(ff, cand), d)
            if best is None or abs(dot) > best[0]:
                best = (abs(dot), is_plus, is_p, dot < 0)
        _, plus[i], use_p[i], flip[i] = best
    return plus, use_p, flip


def _field_jets(kind, S, ys, ds):
    choice = _field_choice(kind, S, ys, ds)
    m = ys.shape[0]
    cu, cv = np.zeros((J.ORDER + 1, m)), np.zeros((J.ORDER + 1, m))
    cu[0], cv[0] = ys.T
    for k in range(J.ORDER):
        du, dv = _field_jet(kind, S, J.Jet(cu), J.Jet(cv), choice)
        cu[k + 1] = du.c[k] / (k + 1)
        cv[k + 1] = dv.c[k] / (k + 1)
    return cu.T.copy(), cv.T.copy()


# -- drift -------------------------------------------------------------------------------


def _fd5(values: np.ndarray, h: float) -> np.ndarray:
    """4th-order central first derivative at interior samples 2..n-3."""
    return (values[:-4] - 8.0 * values[1:-3] + 8.0 * values[3:-1] - values[4:]) / (12.0 * h)


def trajectory_drift(S: ParametricSurface, kind: str, ys: np.ndarray, h: float) -> float:
    """Max |k_g|, |tau_g| or |k_n| along the sampled trajectory.

    The tangent (and, for geodesics, the acceleration) comes from 5-point
    differences of the samples rather than from the ODE right-hand side, so
    the value measures how far the discrete path is from a true field line.
    """
    if ys.shape[0] < 5:
        return float("nan")
    inner = ys[2:-2]
    worst = 0.0
    if kind == "geodesic":
        vel = np.array([S.d(1, 0, u, v) * p + S.d(0, 1, u, v) * q for u, v, p, q in ys])
        acc = _fd5(vel, h)
        for (u, v, _, _), x1, x2 in zip(inner, vel[2:-2], acc):
            su, sv = S.d(1, 0, u, v), S.d(0, 1, u, v)
            n = np.cross(su, sv)
            n /= np.linalg.norm(n)
            worst = max(worst, abs(x1 @ np.cross(x2, n)) / np.linalg.norm(x1) ** 3)
        return worst
    tangent = _fd5(ys[:, :2], h)
    for (u, v), d in zip(inner, tangent):
        ff = fundamental_forms(S, u, v)
        I = _ip(ff, d, d)
        if kind == "asymptotic":
            val = (ff.L * d[0] ** 2 + 2.0 * ff.M * d[0] * d[1] + ff.N * d[1] ** 2) / I
        else:
            a, b, c = _field_coeffs("principal", ff)
            val = (a * d[0] ** 2 + b * d[0] * d[1] + c * d[1] ** 2) / (math.sqrt(ff.E * ff.G - ff.F**2) * I)
        worst = max(worst, abs(val))
    return worst


# -- public API --------------------------------------------------------------------------


def _integrate(S: ParametricSurface, cfg: FieldLineConfig):
    n, h = _steps(cfg.length, cfg.step)
    u0, v0 = (float(x) for x in cfg.start)
    _check_domain(S, u0, v0, 0.0)
    if cfg.kind == "geodesic":
        ff = fundamental_forms(S, u0, v0)
        d0 = first_form_normalize(ff, cfg.direction)
        ys = _rk4_geodesic(S, np.array([u0, v0, *d0]), n, h)
        return ys, None, h
    d0 = initial_direction(S, cfg.kind, (u0, v0), cfg.branch)
    ys, ds = _rk4_field(S, cfg.kind, np.array([u0, v0]), d0, n, h)
    return ys, ds, h


def integrate(S: ParametricSurface, cfg: FieldLineConfig) -> IntegratedPath:
    """Integrate a field line and package it as an IntegratedPath."""
    ys, ds, h = _integrate(S, cfg)
    if cfg.kind == "geodesic":
        cu, cv = _geodesic_jets(S, ys)
        speed = np.array([_ip(fundamental_forms(S, u, v), (p, q), (p, q)) for u, v, p, q in ys])
        meta = {"speed_drift": float(np.max(np.abs(np.sqrt(speed) - 1.0)))}
    else:
        cu, cv = _field_jets(cfg.kind, S, ys, ds)
        meta = {"branch": cfg.branch}
    drift = trajectory_drift(S, cfg.kind, ys, h)
    meta.update(start=[float(x) for x in cfg.start], length=float(cfg.length), surface=S.name)
    if cfg.convergence:
        half = FieldLineConfig(cfg.kind, cfg.start, cfg.length, h / 2.0, cfg.direction, cfg.branch)
        ys2, _, h2 = _integrate(S, half)
        drift2 = trajectory_drift(S, cfg.kind, ys2, h2)
        meta.update(drift_half_step=drift2, convergence_factor=drift / drift2 if drift2 > 0 else float("inf"))
    t = np.arange(ys.shape[0]) * h
    return IntegratedPath(t, cu, cv, J.ORDER, kind=cfg.kind, drift=float(drift), step=float(h), meta=meta)


def geodesic(S: ParametricSurface, start, direction, length: float, step: float, convergence: bool = False) -> IntegratedPath:
    return integrate(S, FieldLineConfig("geodesic", tuple(start), length, step, tuple(direction), convergence=convergence))


def principal_line(S: ParametricSurface, start, branch: int, length: float, step: float, convergence: bool = False) -> IntegratedPath:
    return integrate(S, FieldLineConfig("principal", tuple(start), length, step, branch=branch, convergence=convergence))


def asymptotic_line(S: ParametricSurface, start, branch: int, length: float, step: float, convergence: bool = False) -> IntegratedPath:
    u, v = start
    if fundamental_forms(S, u, v).K > EPS_K:
        raise NoRealDirection(f"K > 0 at ({u}, {v}); no asymptotic directions")
    return integrate(S, FieldLineConfig("asymptotic", tuple(start), length, step, branch=branch, convergence=convergence))


def convergence_factor(S: ParametricSurface, cfg: FieldLineConfig) -> tuple[float, float, float]:
    """(drift at h, drift at h/2, ratio) for the configured field line."""
    ys, _, h = _integrate(S, cfg)
    d1 = trajectory_drift(S, cfg.kind, ys, h)
    half = FieldLineConfig(cfg.kind, cfg.start, cfg.length, h / 2.0, cfg.direction, cfg.branch)
    ys2, _, h2 = _integrate(S, half)
    d2 = trajectory_drift(S, cfg.kind, ys2, h2)
    return d1, d2, d1 / d2 if d2 > 0 else float("inf")
