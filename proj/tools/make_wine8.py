"""Writes data/wine8/wine8.csv: eight wine features plus the cultivar label."""

import csv
import pathlib
import sys

from sklearn.datasets import load_wine

FEATURES = [
    "alcohol",
    "malic_acid",
    "total_phenols",
    "flavanoids",
    "color_intensity",
    "hue",
    "od280/od315_of_diluted_wines",
    "proline",
]


def main(out):
    wine = load_wine()
    cols = [wine.feature_names.index(f) for f in FEATURES]
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f.replace("/", "_") for f in FEATURES] + ["cultivar"])
        for row, label in zip(wine.data, wine.target):
            w.writerow([repr(float(row[c])) for c in cols] + [int(label)])


if __name__ == "__main__":
    main(pathlib.Path(sys.argv[1] if len(sys.argv) > 1 else "data/wine8/wine8.csv"))
