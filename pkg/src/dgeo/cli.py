"""Command-line interface: ``dgeo check|invariants|bertrand|generate|plot``.

Exit codes: 0 ok, 1 usage, 2 scene error, 3 numerical failure, 4 strict-mode
discrepancy.  Results go to standard output unless ``--out`` is given;
diagnostics go to standard error.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from . import bertrand as B
from . import fieldlines as FL
from .curve import SurfaceCurve, arclength, darboux_data, frenet_data
from .errors import DgeoError, FlatPoint, NumericalError, ParseError, SceneError
from .scene import constant, dumps, load_curve, load_scene, save_curve
from .surface import tangents

EXIT_OK, EXIT_USAGE, EXIT_SCENE, EXIT_NUMERIC, EXIT_STRICT = 0, 1, 2, 3, 4
CSV_HEADER = "t,s,u,v,x,y,z,k_g,k_n,tau_g,kappa,tau,phi"
PLOT_POINTS = 256


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


@dataclass(frozen=True)
class RunConfig:
    samples: int = 128
    lam: Optional[float] = None
    tol: Optional[float] = None
    premise_tol: Optional[float] = None
    strict: bool = False

    def __post_init__(self):
        if self.samples < 2:
            raise UsageError("--samples must be at least 2")
        if self.lam is not None and (self.lam == 0 or not math.isfinite(self.lam)):
            raise UsageError("--lambda must be a finite nonzero number")


def fmt(x) -> str:
    x = float(x)
    return "nan" if not math.isfinite(x) else "%.17g" % x


def _pair(text: str) -> tuple[float, float]:
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected 'a,b', got {text!r}")
    try:
        return constant(parts[0].strip()), constant(parts[1].strip())
    except (ParseError, SceneError) as err:
        raise argparse.ArgumentTypeError(str(err)) from None


def _number(text: str) -> float:
    try:
        return constant(text)
    except (ParseError, SceneError) as err:
        raise argparse.ArgumentTypeError(str(err)) from None


def _curve(args) -> SurfaceCurve:
    if getattr(args, "curve_file", None):
        return load_curve(args.curve_file)
    if not args.scene or not args.curve:
        raise UsageError("give --scene and --curve, or --curve-file")
    return load_scene(args.scene).curve(args.curve)


# -- check ---------------------------------------------------------------------------------


def cmd_check(args) -> int:
    scene = load_scene(args.scene)
    print(f"scene {scene.source}: {len(scene.surfaces)} surface(s), {len(scene.curves)} curve(s)")
    for S in scene.surfaces.values():
        us = np.linspace(*S.u_range, 9)
        vs = np.linspace(*S.v_range, 9)
        bad = 0
        for u in us:
            for v in vs:
                try:
                    tangents(S, float(u), float(v))
                except NumericalError:
                    bad += 1
        print(
            f"  surface {S.name}: u in [{fmt(S.u_range[0])}, {fmt(S.u_range[1])}], "
            f"v in [{fmt(S.v_range[0])}, {fmt(S.v_range[1])}]; singular on 9x9 grid: {bad}"
        )
    for C in scene.curves.values():
        ts = C.grid(17)
        ok = 0
        first_err = None
        for t in ts:
            try:
                darboux_data(C, float(t), with_arclength=False)
                ok += 1
            except NumericalError as err:
                first_err = first_err or f"{type(err).__name__} at t={fmt(t)}"
        note = f" (first failure: {first_err})" if first_err else ""
        print(
            f"  curve {C.name} on {C.surface.name}: t in [{fmt(C.t_range[0])}, {fmt(C.t_range[1])}]; "
            f"regular samples {ok}/{len(ts)}{note}"
        )
    return EXIT_OK


# -- invariants ----------------------------------------------------------------------------


def invariant_rows(C: SurfaceCurve, samples: int) -> list[list[float]]:
    ts = C.grid(samples)
    rows = []
    s = 0.0
    phi_prev = None
    for i, t in enumerate(ts):
        t = float(t)
        dd = darboux_data(C, t, with_arclength=False)
        if i > 0:
            s += arclength(C, float(ts[i - 1]), t, check=False)
        try:
            fd = frenet_data(C, t, dd, phi_ref=phi_prev)
            kappa, tau, phi = float(fd.kappa), float(fd.tau), float(fd.phi)
            phi_prev = phi
        except FlatPoint:
            kappa = tau = phi = math.nan
        rows.append([t, s, float(dd.u), float(dd.v), *dd.x, float(dd.k_g), float(dd.k_n), float(dd.tau_g), kappa, tau, phi])
    return rows


def cmd_invariants(args) -> int:
    cfg = RunConfig(samples=args.samples)
    C = _curve(args)
    rows = invariant_rows(C, cfg.samples)
    out = [CSV_HEADER] + [",".join(fmt(x) for x in row) for row in rows]
    sys.stdout.write("\n".join(out) + "\n")
    return EXIT_OK


# -- bertrand ------------------------------------------------------------------------------


def cmd_bertrand(args) -> int:
    cfg = RunConfig(samples=args.samples, lam=args.lam, tol=args.tol, premise_tol=args.premise_tol, strict=args.strict)
    C = _curve(args)
    scene = args.scene or args.curve_file
    report = B.verify(C, cfg.lam, C.grid(cfg.samples), tol=cfg.tol, tol_premise=cfg.premise_tol, scene=str(scene))
    sys.stdout.write(dumps(report.to_dict()))
    if all(r.classification == "NOT_APPLICABLE" for r in report.formulas.values()) and report.degeneracies:
        print("error: no evaluable samples (total degeneracy)", file=sys.stderr)
        return EXIT_NUMERIC
    if cfg.strict:
        bad = report.discrepant()
        if bad:
            print(f"strict: DISCREPANT outside the misprint list: {', '.join(bad)}", file=sys.stderr)
            return EXIT_STRICT
    return EXIT_OK


# -- generate ------------------------------------------------------------------------------


def cmd_generate(args) -> int:
    scene = load_scene(args.scene)
    S = scene.surface(args.surface)
    if args.kind == "geodesic" and args.dir is None:
        raise UsageError("geodesic needs --dir")
    if args.kind != "geodesic" and args.branch is None:
        raise UsageError(f"{args.kind} lines need --branch")
    _check_out(args.out)
    cfg = FL.FieldLineConfig(
        args.kind,
        args.start,
        args.length,
        args.step,
        direction=args.dir,
        branch=args.branch or 1,
        convergence=args.convergence,
    )
    if args.kind == "asymptotic":
        u, v = args.start
        path = FL.asymptotic_line(S, (u, v), cfg.branch, cfg.length, cfg.step, cfg.convergence)
    else:
        path = FL.integrate(S, cfg)
    name = args.name or f"{S.name}_{args.kind}"
    save_curve(SurfaceCurve(S, path, name), args.out)
    print(f"kind {path.kind}; samples {path.t.size}; step {fmt(path.step)}; jet_order_valid {path.jet_order_valid}")
    print(f"drift {fmt(path.drift)}")
    if "convergence_factor" in path.meta:
        print(f"drift at half step {fmt(path.meta['drift_half_step'])}; convergence factor {fmt(path.meta['convergence_factor'])}")
    return EXIT_OK


# -- plot ----------------------------------------------------------------------------------


def _check_out(path: str) -> None:
    p = Path(path)
    if p.is_dir() or not p.parent.is_dir():
        raise UsageError(f"cannot write {path!r}")


def _panel(x0: float, polylines, size: float, colors) -> list[str]:
    pts = np.concatenate(polylines)
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    span = max(float(np.max(hi - lo)), 1e-12)
    margin = 0.05 * span
    w = float(hi[0] - lo[0]) + 2 * margin
    h = float(hi[1] - lo[1]) + 2 * margin
    vb = f"{lo[0] - margin:.6f} {-hi[1] - margin:.6f} {w:.6f} {h:.6f}"
    out = [
        f'  <svg x="{x0:.0f}" y="0" width="{size:.0f}" height="{size:.0f}" viewBox="{vb}" '
        'preserveAspectRatio="xMidYMid meet">'
    ]
    stroke = 0.006 * span
    for line, color in zip(polylines, colors):
        coords = " ".join(f"{x:.6f},{-y:.6f}" for x, y in line)
        out.append(f'    <polyline fill="none" stroke="{color}" stroke-width="{stroke:.6f}" points="{coords}"/>')
    out.append("  </svg>")
    return out


def plot_svg(C: SurfaceCurve, lam: Optional[float] = None, size: float = 400.0) -> str:
    ts = C.grid(PLOT_POINTS)
    dd = darboux_data(C, ts, with_arclength=False)
    uv = np.stack([np.atleast_1d(dd.u), np.atleast_1d(dd.v)], axis=-1)
    curves3 = [np.asarray(dd.x)]
    if lam is not None:
        curves3.append(np.asarray(B.partner_from_darboux(dd, lam).x1))
    allpts = np.concatenate(curves3)
    drop = int(np.argmin(allpts.var(axis=0)))
    keep = [i for i in range(3) if i != drop]
    proj = [c[:, keep] for c in curves3]
    colors = ["#1f4e9c", "#c0392b"]
    lines = [
        '<?xml version="1.0" encoding="UTF-8" standalone="no"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{2 * size:.0f}" height="{size:.0f}">',
        f"  <title>{C.name} on {C.surface.name}{'' if lam is None else f', lambda={fmt(lam)}'}</title>",
    ]
    lines += _panel(0.0, [uv], size, colors[:1])
    lines += _panel(size, proj, size, colors)
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def cmd_plot(args) -> int:
    cfg = RunConfig(lam=args.lam)
    _check_out(args.out)
    C = _curve(args)
    svg = plot_svg(C, cfg.lam)
    try:
        Path(args.out).write_text(svg)
    except OSError as err:
        raise UsageError(f"cannot write {args.out!r}: {err.strerror}") from None
    return EXIT_OK


# -- entry point ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="dgeo", description="Darboux-frame invariants and Bertrand partner D-curves.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("check", help="validate a scene file")
    c.add_argument("scene")
    c.set_defaults(func=cmd_check)

    def curve_args(q):
        q.add_argument("--scene")
        q.add_argument("--curve")
        q.add_argument("--curve-file", dest="curve_file")

    c = sub.add_parser("invariants", help="CSV of Darboux and Frenet invariants")
    curve_args(c)
    c.add_argument("--samples", type=int, default=128)
    c.set_defaults(func=cmd_invariants)

    c = sub.add_parser("bertrand", help="verify the partner-curve formula catalog")
    curve_args(c)
    c.add_argument("--lambda", dest="lam", type=_number, required=True)
    c.add_argument("--samples", type=int, default=128)
    c.add_argument("--tol", type=float)
    c.add_argument("--premise-tol", dest="premise_tol", type=float)
    c.add_argument("--strict", action="store_true")
    c.set_defaults(func=cmd_bertrand)

    c = sub.add_parser("generate", help="integrate a geodesic, principal or asymptotic line")
    c.add_argument("--scene", required=True)
    c.add_argument("--kind", choices=FL.KINDS, required=True)
    c.add_argument("--surface", required=True)
    c.add_argument("--start", type=_pair, required=True)
    g = c.add_mutually_exclusive_group()
    g.add_argument("--dir", type=_pair)
    g.add_argument("--branch", type=int, choices=(1, 2))
    c.add_argument("--length", type=_number, required=True)
    c.add_argument("--step", type=_number, required=True)
    c.add_argument("--out", required=True)
    c.add_argument("--name")
    c.add_argument("--convergence", action="store_true", help="rerun at half step and report the drift ratio")
    c.set_defaults(func=cmd_generate)

    c = sub.add_parser("plot", help="SVG of the curve (and partner) in the chart and in space")
    curve_args(c)
    c.add_argument("--lambda", dest="lam", type=_number)
    c.add_argument("--out", required=True)
    c.set_defaults(func=cmd_plot)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as err:
        print(f"dgeo: usage error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except (SceneError, ParseError) as err:
        print(f"dgeo: scene error: {err}", file=sys.stderr)
        return EXIT_SCENE
    except NumericalError as err:
        print(f"dgeo: numerical failure ({type(err).__name__}): {err}", file=sys.stderr)
        return EXIT_NUMERIC
    except DgeoError as err:
        print(f"dgeo: error: {err}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as err:
        print(f"dgeo: usage error: {err}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
