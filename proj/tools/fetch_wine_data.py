#!/usr/bin/env python3
"""Fetch the wine tasting table and write it as data/wine.csv.

The table ships as an R data file inside the scientisttools wheel on PyPI.
This script downloads that wheel, extracts the .rda file and converts it
with pyreadr. The first CSV column, Wine, holds the row names.

    python3 tools/fetch_wine_data.py [--out data/wine.csv]
"""

import argparse
import pathlib
import subprocess
import sys
import tempfile
import zipfile

PACKAGE = "scientisttools==0.1.6"
MEMBER = "scientisttools/datasets/wine.rda"


def main() -> int:
    root = pathlib.Path(__file__).resolve().parent.parent
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", type=pathlib.Path, default=root / "data" / "wine.csv")
    args = parser.parse_args()

    try:
        import pyreadr
    except ImportError:
        sys.exit("pyreadr is required: pip install pyreadr")

    with tempfile.TemporaryDirectory() as tmp:
        tmp = pathlib.Path(tmp)
        subprocess.run(
            [sys.executable, "-m", "pip", "download", "-q", "--disable-pip-version-check",
             "--no-deps", "--only-binary=:all:", PACKAGE, "-d", str(tmp)],
            check=True,
            stdout=subprocess.DEVNULL,
        )
        wheel = next(tmp.glob("*.whl"))
        with zipfile.ZipFile(wheel) as zf:
            zf.extract(MEMBER, tmp)
        frames = pyreadr.read_r(str(tmp / MEMBER))
        table = next(iter(frames.values()))

    args.out.parent.mkdir(parents=True, exist_ok=True)
    table.to_csv(args.out, index_label="Wine")
    print(f"wrote {args.out} ({table.shape[0]} rows, {table.shape[1]} columns)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
