"""Regenerate scenes/*.json from the fixture catalog."""

import argparse
import json
from pathlib import Path

from dgeo import fixtures


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=str(Path(__file__).resolve().parent.parent / "scenes"))
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name in fixtures.SCENES:
        path = out / f"{name}.json"
        path.write_text(json.dumps(fixtures.scene_dict(name), indent=2) + "\n")
        print(path)


if __name__ == "__main__":
    main()
