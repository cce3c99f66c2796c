"""Classify every catalogued relation on every fixture curve for one lambda.

Prints a compact table (one row per curve, one column per FormulaId):
C = CONFIRMED, D = DISCREPANT, . = NOT_APPLICABLE, x = no partner.
"""

import argparse

from dgeo import bertrand as B
from dgeo import fixtures
from dgeo.errors import NumericalError

CODE = {"CONFIRMED": "C", "DISCREPANT": "D", "NOT_APPLICABLE": "."}


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--lambda", dest="lam", type=float, default=0.2)
    ap.add_argument("--samples", type=int, default=64)
    args = ap.parse_args()

    width = max(len(c["name"]) for c in fixtures.CURVES)
    for i, fid in enumerate(B.FORMULA_IDS):
        print(f"{'':{width}}  {'  ' * i}{fid}")
    for spec in fixtures.CURVES:
        C = fixtures.curve(spec["name"])
        try:
            rep = B.verify(C, args.lam, C.grid(args.samples))
            cells = [CODE[rep[fid].classification] for fid in B.FORMULA_IDS]
        except NumericalError:
            cells = ["x"] * len(B.FORMULA_IDS)
        print(f"{C.name:{width}}  " + " ".join(cells))


if __name__ == "__main__":
    main()
