"""Curves on parametric surfaces: Darboux frame, Frenet frame, arc length.

Every derivative comes from order-4 Taylor jets of ``(u(t), v(t))`` pushed
through the surface expressions; derivatives with respect to arc length use
``d/ds = (1/speed) d/dt`` on those jets, so the curve is never resampled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Union

import numpy as np
from scipy import integrate

from . import expr as X
from . import jet as J
from .errors import (
    FlatPoint,
    FrameDegenerate,
    InsufficientOrder,
    OutOfRange,
    SingularPoint,
    ZeroSpeed,
)
from .surface import ParametricSurface, parametric_geodesic_curvatures

EPS_SPEED = 1e-10
EPS_FLAT = 1e-10
EPS_ORTHO = 1e-8

# Gauss-Legendre nodes for per-interval arc length on integrated paths.
_GL_X, _GL_W = np.polynomial.legendre.leggauss(8)


@dataclass(frozen=True)
class ClosedForm:
    u: X.Expr
    v: X.Expr
    t_range: tuple[float, float]

    def __post_init__(self):
        if not self.t_range[0] < self.t_range[1]:
            raise ValueError(f"degenerate t range {self.t_range}")

    @classmethod
    def from_strings(cls, u: str, v: str, t_range) -> "ClosedForm":
        return cls(X.parse(u), X.parse(v), tuple(float(x) for x in t_range))

    jet_order_valid = J.ORDER


@dataclass(frozen=True, eq=False)
class IntegratedPath:
    """Samples ``(t, u-jet, v-jet)`` produced by an integrator or loaded from file.

    ``u`` and ``v`` hold Taylor coefficients with shape ``(n_samples, order + 1)``.
    """

    t: np.ndarray
    u: np.ndarray
    v: np.ndarray
    jet_order_valid: int
    kind: str = "custom"
    drift: float = float("nan")
    step: float = float("nan")
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        if t.ndim != 1 or t.size < 2 or np.any(np.diff(t) <= 0):
            raise ValueError("integrated path needs >= 2 strictly increasing sample times")
        if not 0 <= self.jet_order_valid <= J.ORDER:
            raise ValueError(f"jet_order_valid must lie in [0, {J.ORDER}]")
        u = np.asarray(self.u, dtype=float)
        v = np.asarray(self.v, dtype=float)
        if u.shape != (t.size, J.ORDER + 1) or v.shape != u.shape:
            raise ValueError(f"sample jets must have shape ({t.size}, {J.ORDER + 1})")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)

    @property
    def t_range(self) -> tuple[float, float]:
        return float(self.t[0]), float(self.t[-1])

    def nearest(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        idx = np.clip(np.searchsorted(self.t, t), 1, self.t.size - 1)
        left = self.t[idx - 1]
        right = self.t[idx]
        return np.where(np.abs(t - left) <= np.abs(right - t), idx - 1, idx)

    def jets(self, t) -> tuple[J.Jet, J.Jet]:
        """Jets at ``t``: exact at sample times, Taylor-shifted from the nearest sample otherwise."""
        t = np.asarray(t, dtype=float)
        idx = self.nearest(t)
        dt = t - self.t[idx]
        uj = J.Jet(np.moveaxis(self.u[idx], -1, 0))
        vj = J.Jet(np.moveaxis(self.v[idx], -1, 0))
        if np.any(dt != 0.0):
            uj, vj = uj.shift(dt), vj.shift(dt)
        return uj, vj


CurvePath = Union[ClosedForm, IntegratedPath]


@dataclass(frozen=True, eq=False)
class SurfaceCurve:
    surface: ParametricSurface
    path: CurvePath
    name: str = "curve"

    @property
    def t_range(self) -> tuple[float, float]:
        return self.path.t_range

    @property
    def jet_order_valid(self) -> int:
        return self.path.jet_order_valid

    @cached_property
    def _speed_parts(self):
        if not isinstance(self.path, ClosedForm):
            return None
        p = self.path
        comp = lambda e: X.compile_scalar(e, ("t",))  # noqa: E731
        return comp(p.u), comp(p.v), comp(X.partial(p.u, "t")), comp(X.partial(p.v, "t"))

    def uv(self, t: float) -> tuple[float, float]:
        if isinstance(self.path, ClosedForm):
            fu, fv, _, _ = self._speed_parts
            return fu(t), fv(t)
        uj, vj = self.path.jets(t)
        return float(uj.value), float(vj.value)

    def speed(self, t: float) -> float:
        if isinstance(self.path, ClosedForm):
            fu, fv, fdu, fdv = self._speed_parts
            u, v = fu(t), fv(t)
            xd = self.surface.d(1, 0, u, v) * fdu(t) + self.surface.d(0, 1, u, v) * fdv(t)
            return float(np.linalg.norm(xd))
        uj, vj = self.path.jets(t)
        du, dv = uj.c[1], vj.c[1]
        u, v = float(uj.value), float(vj.value)
        xd = self.surface.d(1, 0, u, v) * du + self.surface.d(0, 1, u, v) * dv
        return float(np.linalg.norm(xd))

    @cached_property
    def _cumulative(self) -> np.ndarray:
        p = self.path
        out = np.zeros(p.t.size)
        for i in range(p.t.size - 1):
            out[i + 1] = out[i] + self._gl(p.t[i], p.t[i + 1])
        return out

    def _gl(self, a: float, b: float) -> float:
        half = 0.5 * (b - a)
        mid = 0.5 * (a + b)
        return half * sum(w * self.speed(mid + half * x) for x, w in zip(_GL_X, _GL_W))

    def grid(self, samples: int) -> np.ndarray:
        """Uniform grid over the parameter range; integrated paths snap to sample times."""
        if samples < 2:
            raise ValueError("need at least 2 samples")
        if isinstance(self.path, ClosedForm):
            return np.linspace(*self.t_range, samples)
        idx = np.unique(np.round(np.linspace(0, self.path.t.size - 1, samples)).astype(int))
        return self.path.t[idx]


# -- jets along the curve --------------------------------------------------------


def _check_range(C: SurfaceCurve, t) -> None:
    lo, hi = C.t_range
    slack = 1e-12 * (hi - lo)
    t = np.asarray(t)
    if np.any(t < lo - slack) or np.any(t > hi + slack):
        raise OutOfRange(f"t outside [{lo}, {hi}] on {C.name}", t=t.tolist())


def uv_jets(C: SurfaceCurve, t, check_range: bool = True) -> tuple[J.Jet, J.Jet]:
    if check_range:
        _check_range(C, t)
    if isinstance(C.path, ClosedForm):
        tj = J.Jet.variable(t)
        return X.eval_jet(C.path.u, {"t": tj}), X.eval_jet(C.path.v, {"t": tj})
    return C.path.jets(t)


def curve_jet(C: SurfaceCurve, t) -> tuple[J.Vec, J.Vec]:
    """Jets of the position x(t) = S(u(t), v(t)) (order 4) and of the unit normal (order 3)."""
    uj, vj = uv_jets(C, t)
    x = C.surface.d_jet(0, 0, uj, vj)
    n = J.vtruncate(C.surface.normal_jet(uj, vj), 3)
    return x, n


# -- Darboux frame -----------------------------------------------------------------


@dataclass
class DarbouxData:
    """Darboux frame and invariants; array fields broadcast over the t batch."""

    t: np.ndarray
    s: Optional[np.ndarray]
    speed: np.ndarray
    u: np.ndarray
    v: np.ndarray
    x: np.ndarray
    T: np.ndarray
    g: np.ndarray
    n: np.ndarray
    k_g: np.ndarray
    k_n: np.ndarray
    tau_g: np.ndarray
    dk_g: np.ndarray
    dk_n: np.ndarray
    dtau_g: np.ndarray
    dT: np.ndarray
    dg: np.ndarray
    dn: np.ndarray
    jets: dict = field(repr=False, default_factory=dict)


def _unit_tangent(x: J.Vec):
    xd = J.vderiv(x)
    if np.any(np.linalg.norm(J.vvalue(xd), axis=-1) < EPS_SPEED):
        raise ZeroSpeed("curve speed vanishes")
    speed = J.vnorm(xd)
    inv = speed.reciprocal()
    return xd, speed, inv, J.vscale(xd, inv)


def _d_ds(q, inv: J.Jet):
    """Arc-length derivative of a jet (or 3-vector of jets)."""
    if isinstance(q, J.Jet):
        d = q.deriv()
        return d * inv.truncate(min(inv.order, d.order))
    return tuple(_d_ds(c, inv) for c in q)


def darboux_from_uv(S: ParametricSurface, uj: J.Jet, vj: J.Jet, t=None, need_derivatives: bool = True) -> DarbouxData:
    """Darboux frame from jets of the parameter-domain path."""
    x = S.d_jet(0, 0, uj, vj)
    try:
        n = S.normal_jet(uj, vj)
        _, speed, inv, T = _unit_tangent(x)
    except (SingularPoint, ZeroSpeed) as err:
        if err.t is not None or t is None:
            raise
        raise type(err)(str(err), t=t) from None
    g = J.vcross(n, T)
    dT = _d_ds(T, inv)
    dg = _d_ds(g, inv)
    dn = _d_ds(n, inv)
    k_g = J.vdot(dT, g)
    k_n = J.vdot(dT, n)
    tau_g = J.vdot(dg, n)
    if need_derivatives and k_g.order < 1:
        raise InsufficientOrder("invariant derivatives need jets of order >= 3")
    nan = np.full(np.shape(k_g.value), np.nan)
    der = lambda q: _d_ds(q, inv).value if q.order >= 1 else nan  # noqa: E731
    return DarbouxData(
        t=np.asarray(t) if t is not None else None,
        s=None,
        speed=speed.value,
        u=uj.value,
        v=vj.value,
        x=J.vvalue(x),
        T=J.vvalue(T),
        g=J.vvalue(g),
        n=J.vvalue(n),
        k_g=k_g.value,
        k_n=k_n.value,
        tau_g=tau_g.value,
        dk_g=der(k_g),
        dk_n=der(k_n),
        dtau_g=der(tau_g),
        dT=J.vvalue(dT),
        dg=J.vvalue(dg),
        dn=J.vvalue(dn),
        jets=dict(x=x, n=n, T=T, g=g, speed=speed, inv=inv, k_g=k_g, k_n=k_n, tau_g=tau_g),
    )


def _require_order(C: SurfaceCurve, order: int) -> None:
    if C.jet_order_valid < order:
        raise InsufficientOrder(f"{C.name} provides jets of order {C.jet_order_valid}, {order} required")


def darboux_data(C: SurfaceCurve, t, with_arclength: bool = True, check_range: bool = True) -> DarbouxData:
    """Frame {T, g, n}, invariants (k_g, k_n, tau_g) and their s-derivatives at t."""
    _require_order(C, 3)
    uj, vj = uv_jets(C, t, check_range)
    dd = darboux_from_uv(C.surface, uj, vj, t=t)
    if with_arclength:
        t0 = C.t_range[0]
        ts = np.atleast_1d(np.asarray(t, dtype=float))
        s = np.array([arclength(C, t0, ti, check=False) for ti in ts])
        dd.s = s.reshape(np.shape(t))
    return dd


def darboux_via_eq3(C: SurfaceCurve, t) -> tuple[np.ndarray, np.ndarray]:
    """k_g and tau_g from the raw-derivative formulas, without frame jets.

    k_g = <x', x'' x n> / |x'|^3 and tau_g = <x', n x n'> / |x'|^2, where primes
    are t-derivatives; the tangential part of x'' drops out of the triple product.
    """
    x, n = curve_jet(C, t)
    xs = [c.derivatives() for c in x]
    ns = [c.derivatives() for c in n]
    x1 = np.stack([d[1] for d in xs], axis=-1)
    x2 = np.stack([d[2] for d in xs], axis=-1)
    n0 = np.stack([d[0] for d in ns], axis=-1)
    n1 = np.stack([d[1] for d in ns], axis=-1)
    speed = np.linalg.norm(x1, axis=-1)
    if np.any(speed < EPS_SPEED):
        raise ZeroSpeed("curve speed vanishes")
    k_g = np.sum(x1 * np.cross(x2, n0), axis=-1) / speed**3
    tau_g = np.sum(x1 * np.cross(n0, n1), axis=-1) / speed**2
    return k_g, tau_g


# -- Frenet frame --------------------------------------------------------------------


@dataclass
class FrenetData:
    kappa: np.ndarray
    tau: np.ndarray
    N: np.ndarray
    B: np.ndarray
    phi: np.ndarray
    dphi: np.ndarray
    dkappa: np.ndarray


def frenet_from_position(x: J.Vec) -> dict:
    """kappa and tau jets of a space curve from its position jet (needs order >= 3)."""
    x1 = J.vderiv(x)
    x2 = J.vderiv(x1)
    x3 = J.vderiv(x2)
    c12 = J.vcross(x1, x2)
    cn2 = J.vdot(c12, c12)
    if np.any(np.sqrt(cn2.value) < EPS_FLAT * np.maximum(1.0, J.vdot(x1, x1).value ** 1.5)):
        raise FlatPoint("curvature vanishes; Frenet frame undefined")
    speed = J.vnorm(x1)
    kappa = J.sqrt(cn2) / speed**3
    tau = J.vdot(c12, x3) / cn2.truncate(x3[0].order)
    return dict(kappa=kappa, tau=tau, speed=speed)


def frenet_data(C: SurfaceCurve, t, dd: Optional[DarbouxData] = None, phi_ref=None) -> FrenetData:
    """Frenet invariants plus the Darboux rotation angle phi = atan2(k_n, k_g).

    ``phi_ref`` selects the 2*pi branch nearest to a previous value.
    """
    _require_order(C, 3)
    if dd is None:
        dd = darboux_data(C, t, with_arclength=False)
    jets = dd.jets
    fr = frenet_from_position(jets["x"])
    kappa = fr["kappa"]
    if np.any(kappa.value <= EPS_FLAT):
        raise FlatPoint("curvature vanishes; Frenet frame undefined", t=t)
    inv = jets["inv"]
    dT = np.asarray(dd.dT)
    N = dT / np.asarray(kappa.value)[..., None]
    B = np.cross(dd.T, N)
    phi = J.atan2(jets["k_n"], jets["k_g"])
    val = phi.value
    if phi_ref is not None:
        val = val + 2.0 * np.pi * np.round((np.asarray(phi_ref) - val) / (2.0 * np.pi))
    return FrenetData(
        kappa=kappa.value,
        tau=fr["tau"].value,
        N=N,
        B=B,
        phi=val,
        dphi=_d_ds(phi, inv).value,
        dkappa=_d_ds(kappa, inv).value,
    )


def frenet_along(C: SurfaceCurve, ts) -> list[FrenetData]:
    """Frenet data on an ordered grid with phi unwrapped by nearest-branch continuation."""
    out = []
    ref = None
    for t in ts:
        fd = frenet_data(C, float(t), phi_ref=ref)
        ref = fd.phi
        out.append(fd)
    return out


def frenet_residuals(dd: DarbouxData, fd: FrenetData) -> tuple:
    """Residuals of k_g = kappa cos(phi), k_n = kappa sin(phi), tau_g = tau + dphi/ds.

    The third holds only where phi is constant; see :func:`frenet_torsion_corrected`.
    """
    return (
        np.abs(dd.k_g - fd.kappa * np.cos(fd.phi)),
        np.abs(dd.k_n - fd.kappa * np.sin(fd.phi)),
        np.abs(dd.tau_g - fd.tau - fd.dphi),
    )


def frenet_torsion_corrected(dd: DarbouxData, fd: FrenetData) -> np.ndarray:
    """|tau_g - tau + dphi/ds|: the torsion relation that holds when phi varies along the curve."""
    return np.abs(dd.tau_g - fd.tau + fd.dphi)


# -- arc length ----------------------------------------------------------------------


def _check_speed(C: SurfaceCurve, a: float, b: float) -> None:
    for t in np.linspace(a, b, 65):
        if C.speed(float(t)) < EPS_SPEED:
            raise ZeroSpeed(f"speed vanishes on [{a}, {b}]", t=float(t))


def arclength(C: SurfaceCurve, t_a: float, t_b: float, check: bool = True) -> float:
    if check:
        _check_range(C, [t_a, t_b])
        if t_a > t_b:
            raise ValueError("t_a must not exceed t_b")
        _check_speed(C, t_a, t_b)
    if t_a == t_b:
        return 0.0
    if isinstance(C.path, ClosedForm):
        val, _ = integrate.quad(C.speed, t_a, t_b, epsabs=1e-12, epsrel=1e-13, limit=500)
        return float(val)
    p = C.path

    def cum(t):
        i = int(p.nearest(t))
        if p.t[i] > t:
            i -= 1
        i = min(max(i, 0), p.t.size - 1)
        return C._cumulative[i] + (C._gl(p.t[i], t) if t != p.t[i] else 0.0)

    return float(cum(t_b) - cum(t_a))


def t_of_s(C: SurfaceCurve, s: float, t0: Optional[float] = None) -> float:
    """Invert arc length from ``t0`` (default: start of range) by safeguarded Newton."""
    lo, hi = C.t_range
    t0 = lo if t0 is None else t0
    total = arclength(C, t0, hi)
    if not 0.0 <= s <= total + 1e-12:
        raise OutOfRange(f"s={s} outside [0, {total}]")
    a, b = t0, hi
    t = t0 + (hi - t0) * (s / total if total > 0 else 0.0)
    for _ in range(100):
        f = arclength(C, t0, t, check=False) - s
        if abs(f) <= 1e-11:
            return t
        if f > 0:
            b = t
        else:
            a = t
        sp = C.speed(t)
        step = t - f / sp if sp > EPS_SPEED else None
        t = step if step is not None and a < step < b else 0.5 * (a + b)
    return t


# -- Liouville decomposition -----------------------------------------------------------


def liouville_terms(C: SurfaceCurve, t, dd: Optional[DarbouxData] = None) -> dict:
    """sigma, dsigma/ds and the parametric-curve geodesic curvatures at scalar t."""
    if dd is None:
        dd = darboux_data(C, t, with_arclength=False)
    S = C.surface
    uj, vj = uv_jets(C, t)
    su = S.d_jet(1, 0, uj, vj)
    sv = S.d_jet(0, 1, uj, vj)
    E, F, G = (J.vdot(a, b).value for a, b in ((su, su), (su, sv), (sv, sv)))
    if np.any(E * G - F * F <= 1e-12 * E * G):
        raise FrameDegenerate("parameter curves are tangent")
    if np.any(np.abs(F) > EPS_ORTHO * np.sqrt(E * G)):
        raise FrameDegenerate("Liouville decomposition needs an orthogonal chart (F = 0)")
    e1 = J.vscale(su, J.vnorm(su).reciprocal())
    n = dd.jets["n"]
    T = dd.jets["T"]
    sigma = J.atan2(J.vdot(T, J.vcross(n, e1)), J.vdot(T, e1))
    dsigma = _d_ds(sigma, dd.jets["inv"]).value
    u, v = np.atleast_1d(uj.value), np.atleast_1d(vj.value)
    kg12 = np.array([parametric_geodesic_curvatures(S, float(a), float(b)) for a, b in zip(u, v)])
    kg1 = kg12[:, 0].reshape(np.shape(uj.value))
    kg2 = kg12[:, 1].reshape(np.shape(uj.value))
    sig = sigma.value
    return dict(sigma=sig, dsigma=dsigma, kg1=kg1, kg2=kg2, k_g=dsigma + kg1 * np.cos(sig) + kg2 * np.sin(sig))


def liouville_residual(C: SurfaceCurve, t) -> float:
    dd = darboux_data(C, t, with_arclength=False)
    terms = liouville_terms(C, t, dd)
    return np.abs(dd.k_g - terms["k_g"])


def classify(C: SurfaceCurve, t: float, tol: float = 1e-8) -> dict:
    dd = darboux_data(C, t, with_arclength=False)
    scale = max(1.0, math.hypot(float(dd.k_g), float(dd.k_n)))
    return {
        "geodesic": bool(abs(dd.k_g) <= tol * scale),
        "asymptotic": bool(abs(dd.k_n) <= tol * scale),
        "principal": bool(abs(dd.tau_g) <= tol * scale),
    }
