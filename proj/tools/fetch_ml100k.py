#!/usr/bin/env python3
"""Fetch MovieLens-100K `u.data` and `u.item` into a directory.

Tries the GroupLens archive first. When that host is unreachable, falls back
to the copy bundled with the pytorch-widedeep 1.7.0 wheel (downloaded with
pip, converted from parquet; needs pandas and pyarrow).

    python3 tools/fetch_ml100k.py /root/data/ml-100k
"""

import argparse
import io
import pathlib
import subprocess
import sys
import tempfile
import urllib.request
import zipfile

GROUPLENS_URL = "https://files.grouplens.org/datasets/movielens/ml-100k.zip"
WHEEL = "pytorch-widedeep==1.7.0"
WHEEL_DATA = "pytorch_widedeep/datasets/data/MovieLens100k_{}.parquet.brotli"


def from_grouplens(out: pathlib.Path) -> None:
    with urllib.request.urlopen(GROUPLENS_URL, timeout=30) as response:
        archive = zipfile.ZipFile(io.BytesIO(response.read()))
    for name in ("u.data", "u.item"):
        (out / name).write_bytes(archive.read(f"ml-100k/{name}"))


def from_wheel(out: pathlib.Path) -> None:
    import pandas as pd

    with tempfile.TemporaryDirectory() as tmp:
        subprocess.run(
            [sys.executable, "-m", "pip", "download", "--no-deps", "-q", WHEEL, "-d", tmp],
            check=True,
        )
        wheel = zipfile.ZipFile(next(pathlib.Path(tmp).glob("*.whl")))
        ratings = pd.read_parquet(io.BytesIO(wheel.read(WHEEL_DATA.format("data"))))
        items = pd.read_parquet(io.BytesIO(wheel.read(WHEEL_DATA.format("items"))))

    with open(out / "u.data", "w") as f:
        for r in ratings.itertuples(index=False):
            f.write(f"{r.user_id}\t{r.movie_id}\t{r.rating}\t{r.timestamp}\n")

    def text(value) -> str:
        return "" if pd.isna(value) else str(value)

    # Columns: id, title, release date, video release date, IMDb URL, 19 genre flags.
    with open(out / "u.item", "w", encoding="latin-1") as f:
        for r in items.itertuples(index=False):
            fields = [str(r[0]), text(r[1]), text(r[2]), "", text(r[4])]
            fields += [str(int(v)) for v in r[5:]]
            f.write("|".join(fields) + "\n")


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("out_dir", type=pathlib.Path)
    args = parser.parse_args()
    args.out_dir.mkdir(parents=True, exist_ok=True)
    try:
        from_grouplens(args.out_dir)
        source = "grouplens"
    except OSError as e:
        print(f"grouplens unavailable ({e}); using the {WHEEL} copy", file=sys.stderr)
        from_wheel(args.out_dir)
        source = WHEEL
    lines = sum(1 for _ in open(args.out_dir / "u.data"))
    print(f"wrote {args.out_dir}/u.data ({lines} ratings) and u.item from {source}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
