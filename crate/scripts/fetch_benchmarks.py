#!/usr/bin/env python3
"""Fetch the public regression benchmarks used by the acceptance suite.

The UCI mirrors are not always reachable, so both tables are pulled out of
Python packages that ship them verbatim:

  abalone  -> scikit-lego 0.9.10      (sklego/data/abalone.zip)
  boston   -> scikit-learn 1.1.3      (sklearn/datasets/data/boston_house_prices.csv)

Every extracted member is checked against a pinned SHA-256 before anything is
written. Output goes to ./data (not tracked by git):

  data/abalone.csv   target column "rings", sex encoded I=0, F=1, M=2
  data/boston.csv    target column "MEDV"

Usage: python3 scripts/fetch_benchmarks.py [--out DIR]
"""

import argparse
import csv
import glob
import hashlib
import io
import os
import subprocess
import sys
import tempfile
import zipfile

SOURCES = {
    "abalone": {
        "requirement": "scikit-lego==0.9.10",
        "wheel_glob": "scikit_lego-0.9.10-*.whl",
        "member": "sklego/data/abalone.zip",
        "sha256": "bb71e7da9981886496a020bad41f4a52a9cc13e6602e3390f81d5a9952b8b2f2",
    },
    "boston": {
        "requirement": "scikit-learn==1.1.3",
        "wheel_glob": "scikit_learn-1.1.3-*.whl",
        "member": "sklearn/datasets/data/boston_house_prices.csv",
        "sha256": "d98212636026544fc9b9c0f372e5f819872e6fa6fa757ab025efdda22180f2d6",
    },
}

SEX_CODE = {"I": "0", "F": "1", "M": "2"}


def fetch_member(spec, workdir):
    wheels = glob.glob(os.path.join(workdir, spec["wheel_glob"]))
    if not wheels:
        subprocess.run(
            [
                sys.executable, "-m", "pip", "download", "--no-deps",
                "--only-binary=:all:", "-q", "-d", workdir, spec["requirement"],
            ],
            check=True,
        )
        wheels = glob.glob(os.path.join(workdir, spec["wheel_glob"]))
    if not wheels:
        raise SystemExit(f"no wheel matched {spec['wheel_glob']}")
    payload = zipfile.ZipFile(wheels[0]).read(spec["member"])
    digest = hashlib.sha256(payload).hexdigest()
    if digest != spec["sha256"]:
        raise SystemExit(f"checksum mismatch for {spec['member']}: {digest}")
    return payload


def write_abalone(payload, out_dir):
    inner = zipfile.ZipFile(io.BytesIO(payload))
    text = inner.read(inner.namelist()[0]).decode("utf-8")
    rows = list(csv.reader(io.StringIO(text)))
    header, body = rows[0], [r for r in rows[1:] if r]
    path = os.path.join(out_dir, "abalone.csv")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in body:
            w.writerow([SEX_CODE[r[0]]] + r[1:])
    return path, len(body)


def write_boston(payload, out_dir):
    lines = payload.decode("utf-8").splitlines()
    # first line is "506,13,,,...", second the real header
    rows = list(csv.reader(lines[1:]))
    path = os.path.join(out_dir, "boston.csv")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        for r in rows:
            if r:
                w.writerow(r)
    return path, len(rows) - 1


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default=os.path.join(os.path.dirname(__file__), "..", "data"))
    args = ap.parse_args()
    out_dir = os.path.abspath(args.out)
    os.makedirs(out_dir, exist_ok=True)
    with tempfile.TemporaryDirectory() as work:
        for name, writer in (("abalone", write_abalone), ("boston", write_boston)):
            path, n = writer(fetch_member(SOURCES[name], work), out_dir)
            print(f"{name}: {n} rows -> {path}")


if __name__ == "__main__":
    main()
