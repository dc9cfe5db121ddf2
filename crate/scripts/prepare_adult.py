#!/usr/bin/env python3
"""Convert the raw UCI Adult files into binary-indicator libsvm files.

Layout (123 columns, 1-based):
  age(5 quintile bins) workclass(8) fnlwgt(5) education(16) education-num(5)
  marital-status(7) occupation(14) relationship(6) race(5) sex(2)
  capital-gain(2: zero / non-zero) capital-loss(2) hours-per-week(5)
  native-country(41)

Quintile edges are computed on the training file only. Missing values ("?")
leave every indicator of that attribute at zero. Labels: ">50K" -> +1,
"<=50K" -> -1 (the test file's trailing "." is stripped).

Usage: prepare_adult.py adult.data adult.test OUT_DIR
"""
import os
import sys

CONTINUOUS_BINS = {0: "q5", 2: "q5", 4: "q5", 10: "nz", 11: "nz", 12: "q5"}
N_ATTRIBUTES = 14


def read_rows(path):
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("|"):
                continue
            fields = [t.strip() for t in line.split(",")]
            if len(fields) != N_ATTRIBUTES + 1:
                raise ValueError(f"{path}: bad row {line!r}")
            rows.append(fields)
    return rows


def quintile_edges(values):
    values = sorted(values)
    n = len(values)
    edges = []
    for q in (0.2, 0.4, 0.6, 0.8):
        # linear interpolation between order statistics
        pos = q * (n - 1)
        lo = int(pos)
        hi = min(lo + 1, n - 1)
        edges.append(values[lo] + (values[hi] - values[lo]) * (pos - lo))
    return edges


def build_layout(train, test):
    layout = []
    for col in range(N_ATTRIBUTES):
        kind = CONTINUOUS_BINS.get(col, "cat")
        if kind == "cat":
            cats = sorted({r[col] for r in train + test if r[col] != "?"})
            layout.append((col, kind, cats))
        elif kind == "q5":
            layout.append((col, kind, quintile_edges([float(r[col]) for r in train])))
        else:
            layout.append((col, kind, None))
    return layout


def encode(row, layout):
    active = []
    offset = 0
    for col, kind, param in layout:
        value = row[col]
        if kind == "cat":
            if value in param:
                active.append(offset + param.index(value))
            offset += len(param)
        elif kind == "q5":
            v = float(value)
            active.append(offset + sum(1 for e in param if v >= e))
            offset += 5
        else:
            active.append(offset + (1 if float(value) > 0 else 0))
            offset += 2
    label = "+1" if row[N_ATTRIBUTES].rstrip(".") == ">50K" else "-1"
    return label, active, offset


def write(path, rows, layout):
    width = None
    with open(path, "w") as fh:
        for row in rows:
            label, active, width = encode(row, layout)
            fh.write(label + "".join(f" {i + 1}:1" for i in active) + "\n")
    return width


def main():
    if len(sys.argv) != 4:
        sys.exit(__doc__)
    train = read_rows(sys.argv[1])
    test = read_rows(sys.argv[2])
    layout = build_layout(train, test)
    os.makedirs(sys.argv[3], exist_ok=True)
    d = write(os.path.join(sys.argv[3], "adult.train.libsvm"), train, layout)
    write(os.path.join(sys.argv[3], "adult.test.libsvm"), test, layout)
    print(f"train={len(train)} test={len(test)} d={d}")


if __name__ == "__main__":
    main()
