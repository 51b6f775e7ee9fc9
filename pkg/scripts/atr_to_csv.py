"""Convert a WFDB binary annotation file to the one-index-per-line CSV.

This is the offline conversion step; the package itself only reads CSV
annotations. Requires the ``wfdb`` package (not a runtime dependency).

    python scripts/atr_to_csv.py data/mitdb/100 > data/mitdb/100_ann.csv
"""

import argparse
import sys

import wfdb

# WFDB beat annotation symbols; rhythm/noise/comment labels are dropped.
BEAT_SYMBOLS = set("NLRBAaJSVrFejnE/fQ?")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("record", help="record path without extension")
    parser.add_argument("--extension", default="atr")
    args = parser.parse_args()

    ann = wfdb.rdann(args.record, args.extension)
    for sample, symbol in zip(ann.sample, ann.symbol):
        if symbol in BEAT_SYMBOLS:
            sys.stdout.write(f"{int(sample)}\n")


if __name__ == "__main__":
    main()
