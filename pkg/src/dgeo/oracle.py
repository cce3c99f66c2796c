"""High-precision finite-difference oracle for closed-form curves.

Independent of the jet pipeline: expressions are walked in mpmath, surface
partials come from finite differences in (u, v), and every curve derivative
is a central difference in t at 60 significant digits.  Only scalar
evaluation of the expression trees is shared with the main code.
"""

from __future__ import annotations

from functools import lru_cache

import mpmath as mp

from . import expr as X
from .curve import ClosedForm, SurfaceCurve

DPS = 60
STEP = mp.mpf("1e-12")

_FUNCS = {
    "sin": mp.sin,
    "cos": mp.cos,
    "tan": mp.tan,
    "exp": mp.exp,
    "log": mp.log,
    "sqrt": mp.sqrt,
    "sinh": mp.sinh,
    "cosh": mp.cosh,
}


def mp_eval(e: X.Expr, env: dict):
    if isinstance(e, X.Const):
        return mp.mpf(e.value)
    if isinstance(e, X.Pi):
        return +mp.pi
    if isinstance(e, X.Var):
        return env[e.name]
    if isinstance(e, X.Unary):
        a = mp_eval(e.arg, env)
        return -a if e.op == "neg" else _FUNCS[e.op](a)
    a = mp_eval(e.left, env)
    if e.op == "^":
        p = e.right.value
        return a ** int(p) if float(p).is_integer() else a ** mp.mpf(p)
    b = mp_eval(e.right, env)
    if e.op == "+":
        return a + b
    if e.op == "-":
        return a - b
    if e.op == "*":
        return a * b
    return a / b


def _d1(f, t):
    return [(p - m) / (2 * STEP) for p, m in zip(f(t + STEP), f(t - STEP))]


def _d2(f, t):
    mid = f(t)
    return [(p - 2 * c + m) / STEP**2 for p, c, m in zip(f(t + STEP), mid, f(t - STEP))]


def _dot(a, b):
    return sum(x * y for x, y in zip(a, b))


def _cross(a, b):
    return [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]


def _norm(a):
    return mp.sqrt(_dot(a, a))


def _scale(a, k):
    return [x * k for x in a]


class CurveOracle:
    """Darboux and partner quantities of a closed-form curve at 60 digits."""

    def __init__(self, C: SurfaceCurve):
        if not isinstance(C.path, ClosedForm):
            raise TypeError("the oracle handles closed-form paths only")
        self.S = C.surface
        self.path = C.path

    def _surf(self, u, v):
        env = {"u": u, "v": v}
        return [mp_eval(c, env) for c in (self.S.x, self.S.y, self.S.z)]

    def _uv(self, t):
        env = {"t": t}
        return mp_eval(self.path.u, env), mp_eval(self.path.v, env)

    def x(self, t):
        return self._surf(*self._uv(t))

    def n(self, t):
        u, v = self._uv(t)
        su = [(p - m) / (2 * STEP) for p, m in zip(self._surf(u + STEP, v), self._surf(u - STEP, v))]
        sv = [(p - m) / (2 * STEP) for p, m in zip(self._surf(u, v + STEP), self._surf(u, v - STEP))]
        c = _cross(su, sv)
        return _scale(c, 1 / _norm(c))

    def T(self, t):
        xd = _d1(self.x, t)
        return _scale(xd, 1 / _norm(xd))

    def g(self, t):
        return _cross(self.n(t), self.T(t))

    def base(self, t) -> dict:
        with mp.workdps(DPS):
            t = mp.mpf(t)
            xd, xdd = _d1(self.x, t), _d2(self.x, t)
            n, nd = self.n(t), _d1(self.n, t)
            sp = _norm(xd)
            return dict(
                k_g=_dot(xd, _cross(xdd, n)) / sp**3,
                k_n=_dot(xdd, n) / sp**2,
                tau_g=_dot(xd, _cross(n, nd)) / sp**2,
                speed=sp,
            )

    def frenet(self, t) -> dict:
        """kappa, tau and d(phi)/ds with phi = atan2(k_n, k_g)."""
        with mp.workdps(DPS):
            t = mp.mpf(t)
            xd, xdd = _d1(self.x, t), _d2(self.x, t)
            x3 = _d1(lambda tt: _d2(self.x, tt), t)
            c = _cross(xd, xdd)
            sp = _norm(xd)

            def phi(tt):
                b = self.base(tt)
                return [mp.atan2(b["k_n"], b["k_g"])]

            return dict(
                kappa=_norm(c) / sp**3,
                tau=_dot(c, x3) / _dot(c, c),
                dphi=_d1(phi, t)[0] / sp,
            )

    def partner(self, lam: float, t) -> dict:
        """Partner invariants, theta, ds/ds1 and the s1-rates needed by the catalog."""
        with mp.workdps(DPS):
            lam = mp.mpf(lam)
            t = mp.mpf(t)

            def x1(tt):
                return [a - lam * b for a, b in zip(self.x(tt), self.g(tt))]

            def T1(tt):
                d = _d1(x1, tt)
                return _scale(d, 1 / _norm(d))

            def n1(tt):
                return _cross(T1(tt), self.g(tt))

            def inv(tt):
                x1d, x1dd = _d1(x1, tt), _d2(x1, tt)
                m1, m1d = n1(tt), _d1(n1, tt)
                sp1 = _norm(x1d)
                T, N, T_1 = self.T(tt), self.n(tt), _scale(x1d, 1 / sp1)
                return [
                    _dot(x1d, _cross(x1dd, m1)) / sp1**3,
                    _dot(x1dd, m1) / sp1**2,
                    _dot(x1d, _cross(m1, m1d)) / sp1**2,
                    mp.atan2(_dot(T_1, N), _dot(T, T_1)),
                    sp1,
                ]

            k_g1, k_n1, tau_g1, theta, sp1 = inv(t)
            rates = _d1(lambda tt: inv(tt)[:4], t)
            out = self.base(t)
            out.update(
                k_g1=k_g1,
                k_n1=k_n1,
                tau_g1=tau_g1,
                theta=theta,
                a=out["speed"] / sp1,
                dk_g1=rates[0] / sp1,
                dk_n1=rates[1] / sp1,
                dtau_g1=rates[2] / sp1,
                dtheta=rates[3] / sp1,
            )
            return out


@lru_cache(maxsize=32)
def _oracle(C: SurfaceCurve) -> CurveOracle:
    return CurveOracle(C)


def base_invariants(C: SurfaceCurve, t: float) -> dict:
    return {k: float(v) for k, v in _oracle(C).base(t).items()}


def partner_invariants(C: SurfaceCurve, lam: float, t: float) -> dict:
    return {k: float(v) for k, v in _oracle(C).partner(lam, t).items()}


def frenet_invariants(C: SurfaceCurve, t: float) -> dict:
    return {k: float(v) for k, v in _oracle(C).frenet(t).items()}
