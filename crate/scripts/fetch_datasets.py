#!/usr/bin/env python3
"""Regenerate the CSV datasets under data/ from scikit-learn's bundled copies.

Produces:
    data/wbc.csv            Wisconsin Breast Cancer (569 rows, 30 features, 2 classes)
    data/digits.csv         Optical digits (1797 rows, 64 features, 10 classes)
    data/wbc_golden.csv     50-row stratified subset (test fixture)
    data/digits_golden.csv  50-row stratified subset (test fixture)

Both datasets ship with scikit-learn, so this script needs no network access.
"""

import os

from sklearn.datasets import load_breast_cancer, load_digits

HERE = os.path.dirname(os.path.abspath(__file__))
DATA = os.path.join(HERE, "..", "data")


def write_csv(path, features, labels, int_features=False):
    n, chi = features.shape
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(f"f{j}" for j in range(chi)) + ",label\n")
        for i in range(n):
            if int_features:
                row = ",".join(str(int(v)) for v in features[i])
            else:
                row = ",".join(repr(float(v)) for v in features[i])
            fh.write(f"{row},{int(labels[i])}\n")


def golden_subset(features, labels, per_class):
    idx = []
    for cls in sorted(set(labels.tolist())):
        taken = [i for i, y in enumerate(labels) if y == cls][:per_class]
        idx.extend(taken)
    idx.sort()
    return features[idx], labels[idx]


def main():
    os.makedirs(DATA, exist_ok=True)

    wbc = load_breast_cancer()
    write_csv(os.path.join(DATA, "wbc.csv"), wbc.data, wbc.target)
    gx, gy = golden_subset(wbc.data, wbc.target, 25)
    write_csv(os.path.join(DATA, "wbc_golden.csv"), gx, gy)

    digits = load_digits()
    write_csv(os.path.join(DATA, "digits.csv"), digits.data, digits.target,
              int_features=True)
    gx, gy = golden_subset(digits.data, digits.target, 5)
    write_csv(os.path.join(DATA, "digits_golden.csv"), gx, gy,
              int_features=True)

    print("wrote wbc.csv, digits.csv and golden subsets under", DATA)


if __name__ == "__main__":
    main()
