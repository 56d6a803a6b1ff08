"""Build the sonar and a1a-style sparse dataset files under data/.

Raw sources (no network needed once the wheels are on disk):

* sonar: ``keel_ds/data/balanced/raw/sonar.dat`` from the ``keel-ds`` wheel
  (208 rows, 60 features, labels R/M).
* adult: ``responsibly/dataset/adult/adult.data`` from the ``responsibly``
  wheel (UCI Adult training split).

Sonar features are min-max scaled to [-1, 1] per column (svm-scale's
default), mine (M) -> +1, rock (R) -> -1.

The a1a-style file takes the first 1605 Adult training rows and applies the
usual 123-way binarization: quintile bins for age, fnlwgt, education-num and
hours-per-week, zero/nonzero for capital-gain and capital-loss, one-hot for
the categorical columns. Missing values ('?') contribute no feature. The
resulting feature count differs slightly from the canonical a1a file.

Usage::

    pip download keel-ds responsibly --no-deps -d /tmp/raw
    python scripts/prepare_datasets.py /tmp/raw data/
"""

import argparse
import glob
import io
import os
import zipfile

import numpy as np

ADULT_COLUMNS = [
    ("age", "quantile"),
    ("workclass", ["Private", "Self-emp-not-inc", "Self-emp-inc", "Federal-gov",
                   "Local-gov", "State-gov", "Without-pay", "Never-worked"]),
    ("fnlwgt", "quantile"),
    ("education", ["Bachelors", "Some-college", "11th", "HS-grad", "Prof-school",
                   "Assoc-acdm", "Assoc-voc", "9th", "7th-8th", "12th", "Masters",
                   "1st-4th", "10th", "Doctorate", "5th-6th", "Preschool"]),
    ("education-num", "quantile"),
    ("marital-status", ["Married-civ-spouse", "Divorced", "Never-married",
                        "Separated", "Widowed", "Married-spouse-absent",
                        "Married-AF-spouse"]),
    ("occupation", ["Tech-support", "Craft-repair", "Other-service", "Sales",
                    "Exec-managerial", "Prof-specialty", "Handlers-cleaners",
                    "Machine-op-inspct", "Adm-clerical", "Farming-fishing",
                    "Transport-moving", "Priv-house-serv", "Protective-serv",
                    "Armed-Forces"]),
    ("relationship", ["Wife", "Own-child", "Husband", "Not-in-family",
                      "Other-relative", "Unmarried"]),
    ("race", ["White", "Asian-Pac-Islander", "Amer-Indian-Eskimo", "Other", "Black"]),
    ("sex", ["Female", "Male"]),
    ("capital-gain", "nonzero"),
    ("capital-loss", "nonzero"),
    ("hours-per-week", "quantile"),
    ("native-country", ["United-States", "Cambodia", "England", "Puerto-Rico",
                        "Canada", "Germany", "Outlying-US(Guam-USVI-etc)", "India",
                        "Japan", "Greece", "South", "China", "Cuba", "Iran",
                        "Honduras", "Philippines", "Italy", "Poland", "Jamaica",
                        "Vietnam", "Mexico", "Portugal", "Ireland", "France",
                        "Dominican-Republic", "Laos", "Ecuador", "Taiwan", "Haiti",
                        "Columbia", "Hungary", "Guatemala", "Nicaragua", "Scotland",
                        "Thailand", "Yugoslavia", "El-Salvador", "Trinadad&Tobago",
                        "Peru", "Hong", "Holand-Netherlands"]),
]
A1A_ROWS = 1605


def _read_member(raw_dir, wheel_glob, member):
    (path,) = glob.glob(os.path.join(raw_dir, wheel_glob))
    with zipfile.ZipFile(path) as zf:
        return zf.read(member).decode()


def _format_line(label, row):
    feats = " ".join(f"{j + 1}:{v:.6g}" for j, v in enumerate(row) if v != 0)
    return f"{label:+d} {feats}".rstrip()


def build_sonar(text):
    rows, labels = [], []
    for line in text.splitlines():
        if not line.strip() or line.startswith("@"):
            continue
        *vals, lab = [t.strip() for t in line.split(",")]
        rows.append([float(v) for v in vals])
        labels.append(1 if lab == "M" else -1)
    X = np.array(rows)
    lo, hi = X.min(axis=0), X.max(axis=0)
    X = 2.0 * (X - lo) / np.where(hi > lo, hi - lo, 1.0) - 1.0
    return [_format_line(y, x) for y, x in zip(labels, X)]


def build_a1a(text):
    records = [[t.strip() for t in line.split(",")]
               for line in text.splitlines() if line.count(",") == 14]
    blocks = []
    for col, (name, kind) in enumerate(ADULT_COLUMNS):
        values = [r[col] for r in records]
        if kind == "quantile":
            x = np.array([float(v) for v in values])
            edges = np.quantile(x, [0.2, 0.4, 0.6, 0.8])
            codes = np.searchsorted(edges, x, side="right")
            blocks.append((5, codes))
        elif kind == "nonzero":
            x = np.array([float(v) for v in values])
            blocks.append((2, (x > 0).astype(int)))
        else:
            lookup = {v: i for i, v in enumerate(kind)}
            blocks.append((len(kind), np.array([lookup.get(v, -1) for v in values])))
    width = sum(n for n, _ in blocks)
    lines = []
    for r in range(A1A_ROWS):
        row = np.zeros(width)
        offset = 0
        for n, codes in blocks:
            if codes[r] >= 0:
                row[offset + codes[r]] = 1.0
            offset += n
        label = 1 if records[r][14].startswith(">50K") else -1
        lines.append(_format_line(label, row))
    return lines


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("raw_dir")
    parser.add_argument("out_dir")
    args = parser.parse_args()
    os.makedirs(args.out_dir, exist_ok=True)
    sonar = build_sonar(_read_member(args.raw_dir, "keel_ds-*.whl",
                                     "keel_ds/data/balanced/raw/sonar.dat"))
    adult = build_a1a(_read_member(args.raw_dir, "responsibly-*.whl",
                                   "responsibly/dataset/adult/adult.data"))
    for name, lines in [("sonar_scale", sonar), ("a1a", adult)]:
        with io.open(os.path.join(args.out_dir, name), "w") as fh:
            fh.write("\n".join(lines) + "\n")
        print(f"{name}: {len(lines)} rows")


if __name__ == "__main__":
    main()
