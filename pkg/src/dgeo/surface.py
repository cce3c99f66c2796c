"""Parametric surfaces S(u, v) and their local differential geometry.

The unit normal is always ``S_u x S_v`` normalised; it is never flipped, so
every sign-sensitive quantity (normal curvature, geodesic torsion, principal
curvature signs) follows the chart orientation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import expr as X
from . import jet as J
from .errors import NoRealDirection, PlanarPoint, SingularPoint, Umbilic

EPS_REG = 1e-10
EPS_UMB = 1e-9
EPS_K = 1e-12
PARTIAL_ORDER = 4


@dataclass(frozen=True)
class FundamentalForms:
    E: float
    F: float
    G: float
    L: float
    M: float
    N: float
    K: float
    H: float


@dataclass(frozen=True)
class Christoffel:
    """Second-kind symbols; ``gamma[k][i][j]`` with indices 0 = u, 1 = v."""

    gamma: tuple

    def __call__(self, k: str, i: str, j: str) -> float:
        idx = {"u": 0, "v": 1}
        return self.gamma[idx[k]][idx[i]][idx[j]]


@dataclass(frozen=True)
class ParametricSurface:
    name: str
    x: X.Expr
    y: X.Expr
    z: X.Expr
    u_range: tuple[float, float]
    v_range: tuple[float, float]
    partials: dict = field(init=False, repr=False, compare=False)
    _fns: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        for lo, hi in (self.u_range, self.v_range):
            if not lo < hi:
                raise ValueError(f"degenerate parameter range [{lo}, {hi}] on {self.name}")
        for e in (self.x, self.y, self.z):
            extra = X.free_vars(e) - {"u", "v"}
            if extra:
                raise ValueError(f"surface {self.name} uses variables {sorted(extra)}")
        table = {(0, 0): (self.x, self.y, self.z)}
        for total in range(1, PARTIAL_ORDER + 1):
            for i in range(total, -1, -1):
                j = total - i
                src, var = ((i - 1, j), "u") if i > 0 else ((i, j - 1), "v")
                table[(i, j)] = tuple(X.partial(c, var) for c in table[src])
        fns = {
            key: tuple(X.compile_scalar(c, ("u", "v")) for c in comps)
            for key, comps in table.items()
            if sum(key) <= 2
        }
        object.__setattr__(self, "partials", table)
        object.__setattr__(self, "_fns", fns)

    @classmethod
    def from_strings(cls, name, x, y, z, u_range, v_range) -> "ParametricSurface":
        return cls(name, X.parse(x), X.parse(y), X.parse(z), tuple(u_range), tuple(v_range))

    # -- scalar evaluation ---------------------------------------------------
    def d(self, i: int, j: int, u: float, v: float) -> np.ndarray:
        """The partial derivative d^(i+j) S / du^i dv^j at (u, v)."""
        fns = self._fns.get((i, j))
        if fns is None:
            return np.array([X.eval_scalar(c, {"u": u, "v": v}) for c in self.partials[(i, j)]])
        return np.array([f(u, v) for f in fns])

    def in_domain(self, u: float, v: float) -> bool:
        return self.u_range[0] <= u <= self.u_range[1] and self.v_range[0] <= v <= self.v_range[1]

    # -- jet evaluation ------------------------------------------------------
    def d_jet(self, i: int, j: int, uj: J.Jet, vj: J.Jet) -> J.Vec:
        b = {"u": uj, "v": vj}
        return tuple(X.eval_jet(c, b) for c in self.partials[(i, j)])

    def normal_jet(self, uj: J.Jet, vj: J.Jet) -> J.Vec:
        su = self.d_jet(1, 0, uj, vj)
        sv = self.d_jet(0, 1, uj, vj)
        cr = J.vcross(su, sv)
        _check_regular(J.vvalue(su), J.vvalue(sv), J.vvalue(cr))
        return J.vscale(cr, J.vnorm(cr).reciprocal())


def _check_regular(su, sv, cr):
    scale = np.maximum(1.0, np.maximum(np.linalg.norm(su, axis=-1), np.linalg.norm(sv, axis=-1))) ** 2
    if np.any(np.linalg.norm(cr, axis=-1) / scale < EPS_REG):
        raise SingularPoint("|S_u x S_v| vanishes")


def position(S: ParametricSurface, u: float, v: float) -> np.ndarray:
    return S.d(0, 0, u, v)


def tangents(S: ParametricSurface, u: float, v: float):
    su, sv = S.d(1, 0, u, v), S.d(0, 1, u, v)
    cr = np.cross(su, sv)
    _check_regular(su, sv, cr)
    return su, sv, cr / np.linalg.norm(cr)


def unit_normal(S: ParametricSurface, u: float, v: float) -> np.ndarray:
    return tangents(S, u, v)[2]


def fundamental_forms(S: ParametricSurface, u: float, v: float) -> FundamentalForms:
    su, sv, n = tangents(S, u, v)
    E, F, G = su @ su, su @ sv, sv @ sv
    L = S.d(2, 0, u, v) @ n
    M = S.d(1, 1, u, v) @ n
    N = S.d(0, 2, u, v) @ n
    det = E * G - F * F
    K = (L * N - M * M) / det
    H = (E * N + G * L - 2.0 * F * M) / (2.0 * det)
    return FundamentalForms(*(float(q) for q in (E, F, G, L, M, N, K, H)))


def christoffel(S: ParametricSurface, u: float, v: float) -> Christoffel:
    """Solve g_kl Gamma^l_ij = <S_ij, S_k> for every symmetric pair (i, j)."""
    su, sv, _ = tangents(S, u, v)
    metric = np.array([[su @ su, su @ sv], [su @ sv, sv @ sv]])
    second = {(0, 0): S.d(2, 0, u, v), (0, 1): S.d(1, 1, u, v), (1, 1): S.d(0, 2, u, v)}
    out = np.zeros((2, 2, 2))
    for (i, j), sij in second.items():
        sol = np.linalg.solve(metric, np.array([sij @ su, sij @ sv]))
        out[:, i, j] = out[:, j, i] = sol
    return Christoffel(tuple(tuple(tuple(row) for row in plane) for plane in out))


def first_form_normalize(ff: FundamentalForms, d) -> np.ndarray:
    d = np.asarray(d, dtype=float)
    speed2 = ff.E * d[0] ** 2 + 2.0 * ff.F * d[0] * d[1] + ff.G * d[1] ** 2
    return d / math.sqrt(speed2)


def principal_curvatures(ff: FundamentalForms) -> tuple[float, float]:
    disc = max(ff.H * ff.H - ff.K, 0.0)
    r = math.sqrt(disc)
    return ff.H + r, ff.H - r


def principal_directions(S: ParametricSurface, u: float, v: float):
    """Shape-operator eigen-directions ``[(dir1, k1), (dir2, k2)]`` with k1 >= k2."""
    ff = fundamental_forms(S, u, v)
    k1, k2 = principal_curvatures(ff)
    if k1 - k2 < EPS_UMB:
        raise Umbilic(f"umbilic point at ({u}, {v})")
    out = []
    for k in (k1, k2):
        r1 = np.array([ff.M - k * ff.F, -(ff.L - k * ff.E)])
        r2 = np.array([ff.N - k * ff.G, -(ff.M - k * ff.F)])
        d = r1 if np.linalg.norm(r1) >= np.linalg.norm(r2) else r2
        d = first_form_normalize(ff, d)
        if d[np.argmax(np.abs(d))] < 0:
            d = -d
        out.append((d, k))
    return out


def quadratic_roots(a: float, b: float, c: float):
    """Directions (x, y) with a x^2 + b x y + c y^2 = 0, labelled + and -.

    The '+' root is ``(2c, -b + sqrt(D)) ~ (-b - sqrt(D), 2a)``; whichever
    representative has the larger norm is returned.  Requires D >= 0.
    """
    root = math.sqrt(max(b * b - 4.0 * a * c, 0.0))
    out = []
    for sgn in (1.0, -1.0):
        p = np.array([2.0 * c, -b + sgn * root])
        q = np.array([-b - sgn * root, 2.0 * a])
        out.append(p if np.linalg.norm(p) >= np.linalg.norm(q) else q)
    return out


def asymptotic_directions(S: ParametricSurface, u: float, v: float) -> list[np.ndarray]:
    ff = fundamental_forms(S, u, v)
    scale = max(1.0, abs(ff.E), abs(ff.G))
    if max(abs(ff.L), abs(ff.M), abs(ff.N)) < EPS_K * scale:
        raise PlanarPoint(f"second fundamental form vanishes at ({u}, {v})")
    if ff.K > EPS_K:
        raise NoRealDirection(f"K = {ff.K:.3g} > 0 at ({u}, {v})")
    roots = quadratic_roots(ff.L, 2.0 * ff.M, ff.N)
    dirs = [first_form_normalize(ff, d) for d in roots if np.linalg.norm(d) > 0.0]
    if ff.K > -EPS_K or len(dirs) == 1:
        return dirs[:1]
    return dirs


def parametric_geodesic_curvatures(S: ParametricSurface, u: float, v: float) -> tuple[float, float]:
    """Geodesic curvatures of the u-curve (v = const) and v-curve (u = const)."""
    su, sv, n = tangents(S, u, v)
    suu, svv = S.d(2, 0, u, v), S.d(0, 2, u, v)
    kg1 = su @ np.cross(suu, n) / np.linalg.norm(su) ** 3
    kg2 = sv @ np.cross(svv, n) / np.linalg.norm(sv) ** 3
    return float(kg1), float(kg2)


def gaussian_curvature(S: ParametricSurface, u: float, v: float) -> float:
    return fundamental_forms(S, u, v).K


