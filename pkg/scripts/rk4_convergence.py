"""Step-halving study of the field-line integrators.

For each (surface, kind, start) the defining-invariant drift is printed at a
sequence of steps together with the ratio to the next finer step; RK4 with
fourth-order differencing should approach 16 until roundoff takes over.
"""

import argparse
import math

from dgeo import fieldlines as Fl
from dgeo import fixtures

CASES = [
    ("sphere", "geodesic", (0.0, 0.0), math.pi, (1.0, 1.0)),
    ("torus", "geodesic", (0.0, 0.4), 2.0, (1.0, 0.3)),
    ("paraboloid", "principal", (0.3, 0.4), 1.0, None),
    ("hyperboloid", "asymptotic", (0.2, 0.1), 1.0, None),
]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--steps", type=float, nargs="+", default=[0.2, 0.1, 0.05, 0.025, 0.0125])
    args = ap.parse_args()
    for name, kind, start, length, direction in CASES:
        S = fixtures.surface(name)
        print(f"{name} {kind} from {start}, length {length:g}")
        for h in args.steps:
            cfg = Fl.FieldLineConfig(kind, start, length, h, direction)
            d1, d2, ratio = Fl.convergence_factor(S, cfg)
            print(f"  h={h:<8g} drift {d1:.3e}  drift(h/2) {d2:.3e}  ratio {ratio:6.2f}")


if __name__ == "__main__":
    main()
