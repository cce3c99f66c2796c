"""Independent high-precision check of the two sign findings.

1. THM3_II: residual of the stated relation and of the sign-corrected
   reading, with every input taken from the mpmath oracle.
2. Torsion/rotation relation: tau_g - tau - dphi/ds versus
   tau_g - tau + dphi/ds on curves where phi varies.
"""

import numpy as np

from dgeo import bertrand as B
from dgeo import fixtures
from dgeo.oracle import base_invariants, frenet_invariants, partner_invariants


def thm3_ii(name, lam, ts):
    C = fixtures.curve(name)
    print(f"THM3_II on {name}, lam={lam}")
    for t in ts:
        r = partner_invariants(C, lam, t)
        s, c = np.sin(r["theta"]), np.cos(r["theta"])
        stated = r["tau_g"] * r["a"] - r["k_g1"] * s - r["tau_g1"] * c
        fixed = r["tau_g"] * r["a"] + r["k_g1"] * s - r["tau_g1"] * c
        print(f"  t={t:5.2f}  stated {stated:+.3e}  corrected {fixed:+.3e}  2 k_g1 sin(theta) {2 * r['k_g1'] * s:+.3e}")


def torsion(name, ts):
    C = fixtures.curve(name)
    print(f"tau_g vs tau and dphi/ds on {name}")
    for t in ts:
        b, f = base_invariants(C, t), frenet_invariants(C, t)
        plus = b["tau_g"] - f["tau"] - f["dphi"]
        minus = b["tau_g"] - f["tau"] + f["dphi"]
        print(f"  t={t:5.2f}  dphi/ds {f['dphi']:+.3e}  tau_g-tau-dphi {plus:+.3e}  tau_g-tau+dphi {minus:+.3e}")


def main():
    thm3_ii("helix_c1", 0.1, [0.5, 2.0, 4.0])
    thm3_ii("torus_poly", 0.2, [-0.5, 0.3])
    torsion("torus_poly", [-0.5, 0.2, 0.7])
    torsion("sphere_wavy", [1.0, 3.0])
    print("misprint list:", ", ".join(sorted(B.MISPRINTS)))


if __name__ == "__main__":
    main()
