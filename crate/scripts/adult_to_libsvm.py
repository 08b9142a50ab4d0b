#!/usr/bin/env python3
"""Binarize the UCI Adult census files into 123-feature LIBSVM files.

Layout (1-based feature ids): age 1-5, workclass 6-13, fnlwgt 14-18,
education 19-34, education-num 35-39, marital-status 40-46,
occupation 47-60, relationship 61-66, race 67-71, sex 72-73,
capital-gain 74-75, capital-loss 76-77, hours-per-week 78-82,
native-country 83-123. Continuous columns are split at training-set
quintiles, capital gain/loss into zero and nonzero. Missing categorical
values ("?") activate no feature. Labels: >50K is +1, otherwise -1.

usage: adult_to_libsvm.py adult.data adult.test OUT_DIR
"""

import bisect
import gzip
import sys
from pathlib import Path

CATEGORIES = {
    1: "Private, Self-emp-not-inc, Self-emp-inc, Federal-gov, Local-gov, State-gov, Without-pay, Never-worked",
    3: "Bachelors, Some-college, 11th, HS-grad, Prof-school, Assoc-acdm, Assoc-voc, 9th, 7th-8th, 12th, "
    "Masters, 1st-4th, 10th, Doctorate, 5th-6th, Preschool",
    5: "Married-civ-spouse, Divorced, Never-married, Separated, Widowed, Married-spouse-absent, Married-AF-spouse",
    6: "Tech-support, Craft-repair, Other-service, Sales, Exec-managerial, Prof-specialty, Handlers-cleaners, "
    "Machine-op-inspct, Adm-clerical, Farming-fishing, Transport-moving, Priv-house-serv, Protective-serv, "
    "Armed-Forces",
    7: "Wife, Own-child, Husband, Not-in-family, Other-relative, Unmarried",
    8: "White, Asian-Pac-Islander, Amer-Indian-Eskimo, Other, Black",
    9: "Female, Male",
    13: "United-States, Cambodia, England, Puerto-Rico, Canada, Germany, Outlying-US(Guam-USVI-etc), India, "
    "Japan, Greece, South, China, Cuba, Iran, Honduras, Philippines, Italy, Poland, Jamaica, Vietnam, Mexico, "
    "Portugal, Ireland, France, Dominican-Republic, Laos, Ecuador, Taiwan, Haiti, Columbia, Hungary, "
    "Guatemala, Nicaragua, Scotland, Thailand, Yugoslavia, El-Salvador, Trinadad&Tobago, Peru, Hong, "
    "Holand-Netherlands",
}
CATEGORIES = {k: [c.strip() for c in v.split(",")] for k, v in CATEGORIES.items()}
QUINTILE = {0, 2, 4, 12}
BINARY = {10, 11}


def read(path):
    rows = []
    for line in open(path):
        parts = [p.strip() for p in line.strip().split(",")]
        if len(parts) != 15:
            continue
        rows.append(parts)
    return rows


def quintiles(values):
    v = sorted(values)
    return [v[int(len(v) * q / 5)] for q in range(1, 5)]


def encode(rows, cuts):
    out = []
    for r in rows:
        feats = []
        base = 0
        for col in range(14):
            if col in QUINTILE:
                feats.append(base + bisect.bisect_left(cuts[col], float(r[col])))
                base += 5
            elif col in BINARY:
                feats.append(base + (0 if float(r[col]) == 0 else 1))
                base += 2
            else:
                cats = CATEGORIES[col]
                if r[col] in cats:
                    feats.append(base + cats.index(r[col]))
                base += len(cats)
        assert base == 123
        label = "+1" if r[14].rstrip(".") == ">50K" else "-1"
        out.append(label + " " + " ".join(f"{j + 1}:1" for j in feats) + "\n")
    return out


def main():
    train, test, out = read(sys.argv[1]), read(sys.argv[2]), Path(sys.argv[3])
    cuts = {c: quintiles([float(r[c]) for r in train]) for c in QUINTILE}
    for name, rows in (("a9a.gz", train), ("a9a.t.gz", test)):
        # mtime=0 keeps the archive bytes reproducible
        with open(out / name, "wb") as raw, gzip.GzipFile(fileobj=raw, mode="wb", mtime=0) as f:
            f.write("".join(encode(rows, cuts)).encode())
        print(name, len(rows))


if __name__ == "__main__":
    main()
