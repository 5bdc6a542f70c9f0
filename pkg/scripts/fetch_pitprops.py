#!/usr/bin/env python3
"""Fetch the classical 13x13 pitprops correlation matrix and write it as
data/pitprops.csv with a header row of variable names.

The matrix (Jeffers, 1967) is distributed with several statistics packages
and repositories; this script tries a few public locations.  If none is
reachable, supply the file yourself: a CSV with the header

    topdiam,length,moist,testsg,ovensg,ringtop,ringbut,bowmax,bowdist,whorls,clear,knots,diaknot

followed by the 13 rows of the symmetric correlation matrix, and place it
at data/pitprops.csv (or point SPCAREC_PITPROPS at it).
"""

from __future__ import annotations

import csv
import io
import sys
import urllib.request
from pathlib import Path

VARIABLES = (
    "topdiam", "length", "moist", "testsg", "ovensg", "ringtop", "ringbut",
    "bowmax", "bowdist", "whorls", "clear", "knots", "diaknot",
)

# raw CSV mirrors of the elasticnet::pitprops data
URLS = (
    "https://raw.githubusercontent.com/vincentarelbundock/Rdatasets/master/csv/elasticnet/pitprops.csv",
    "https://vincentarelbundock.github.io/Rdatasets/csv/elasticnet/pitprops.csv",
)

OUT = Path(__file__).resolve().parent.parent / "data" / "pitprops.csv"


def _parse(text: str) -> list[list[float]]:
    rows = list(csv.reader(io.StringIO(text)))
    header = [tok.strip().strip('"').lower() for tok in rows[0]]
    # tolerate a leading row-name column
    offset = 1 if header and header[0] in ("", "rownames", "x") else 0
    names = header[offset:]
    if [n.lower() for n in names] != list(VARIABLES):
        raise ValueError(f"unexpected variable names: {names}")
    data = []
    for row in rows[1 : 14]:
        data.append([float(tok) for tok in row[offset:]])
    if len(data) != 13 or any(len(r) != 13 for r in data):
        raise ValueError("expected a 13x13 matrix")
    for i in range(13):
        for j in range(13):
            if abs(data[i][j] - data[j][i]) > 1e-9:
                raise ValueError(f"matrix not symmetric at ({i},{j})")
    return data


def main() -> int:
    for url in URLS:
        try:
            with urllib.request.urlopen(url, timeout=30) as resp:
                text = resp.read().decode("utf-8")
            data = _parse(text)
        except Exception as exc:  # noqa: BLE001 - report and try the next mirror
            print(f"failed {url}: {exc}", file=sys.stderr)
            continue
        OUT.parent.mkdir(parents=True, exist_ok=True)
        with OUT.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(VARIABLES)
            writer.writerows(data)
        print(f"wrote {OUT}")
        return 0
    print(
        "could not download the pitprops matrix; see the module docstring "
        "for the expected CSV format",
        file=sys.stderr,
    )
    return 1


if __name__ == "__main__":
    sys.exit(main())
