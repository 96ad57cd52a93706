"""Input files and argument lists covering every CLI command."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from hackint.cli import main
from hackint.simulate import MONOMIAL_NAMES

FEATURES = ",".join(MONOMIAL_NAMES)
XNEW = "3,2,9,4,6,12,18,36"


def make_inputs(root: Path) -> dict[str, Path]:
    root.mkdir(parents=True, exist_ok=True)
    paths = {"s1": root / "s1.csv", "svm": root / "svm.csv", "queries": root / "q.csv", "pca": root / "pca.csv"}
    main(["simulate", "scenario1", "--seed", "3", "--deterministic", "--emit-data", str(paths["s1"]),
          "--out", str(root / "sim.json")])
    main(["simulate", "svm-figure", "--deterministic", "--emit-data", str(paths["svm"]),
          "--out", str(root / "svm.json")])
    paths["queries"].write_text("x1,x2,id\n0.5,0.5,1\n-2,-2,2\n3,3,3\n0,0,4\n", encoding="utf-8")
    rng = np.random.default_rng(1)
    x = rng.normal(size=(30, 6))
    x[:, 1] += x[:, 0]
    lines = ["a,b,c,d,e,f"] + [",".join(repr(float(v)) for v in row) for row in x]
    paths["pca"].write_text("\n".join(lines) + "\n", encoding="utf-8")
    return paths


def cases(paths: dict[str, Path], include_slow: bool = True) -> list[tuple[str, list[str]]]:
    s1 = ["--input", str(paths["s1"]), "--outcome", "y", "--treatment", "treated", "--features", FEATURES]
    svm = ["--input", str(paths["svm"]), "--outcome", "y", "--features", "x1,x2"]
    pca = ["--input", str(paths["pca"]), "--features", "a,b,c,d,e,f"]
    out = [
        ("ate", ["ate", *s1, "--theta-rel", "0.1"]),
        ("ate-alpha", ["ate", *s1, "--alpha", "0.05"]),
        ("ate-sign-flip", ["ate", *s1, "--sign-flip"]),
        ("predict", ["predict", *s1, "--xnew", XNEW, "--alpha", "0.05"]),
        ("ite", ["ite", *s1, "--xnew", XNEW, "--theta-rel", "0.1"]),
        ("svm", ["svm", *svm, "--xnew", "0.5,0.5", "--theta-rel", "0.05"]),
        ("svm-batch", ["svm-batch", *svm, "--queries", str(paths["queries"]), "--id-column", "id"]),
        ("knn", ["knn", *svm, "--xnew", "0.5,0.5", "--k-min", "3", "--k-max", "9"]),
        ("feature", ["feature", "--or-yw-x", "1.19", "--or-yu", "1.5", "--c", "0.3"]),
        ("pca", ["pca", *pca, "--q", "3", "--k", "2", "--theta-prime", "1", "--theta-prime-grid", "0,1,5"]),
        ("genbound", ["genbound", "--h", "50", "--n", "100", "--delta", "0.05"]),
        ("ci-check", ["ci-check", *s1, "--alpha", "0.05"]),
        ("variance", ["variance", *s1, "--theta-rel", "0.1"]),
        ("sweep-knn", ["sweep", "knn", *svm, "--xnew", "0.5,0.5", "--kstar-window", "1..5", "--format", "csv"]),
        ("sweep-feature", ["sweep", "feature", "--or-yw-x", "1.19", "--format", "csv"]),
        ("sweep-theta", ["sweep", "theta", *s1, "--r-values", "0,0.05,0.1", "--format", "csv"]),
        ("sweep-pca", ["sweep", "pca", *pca, "--q", "3", "--k", "2", "--format", "csv"]),
        ("simulate-scenario1", ["simulate", "scenario1", "--seed", "7", "--theta-rel", "0.1"]),
        ("simulate-scenario2", ["simulate", "scenario2", "--seed", "7", "--theta-rel", "0.1"]),
        ("simulate-svm-figure", ["simulate", "svm-figure"]),
    ]
    if include_slow:
        out.append(("simulate-kernel-figure", ["simulate", "kernel-figure", "--seed", "0"]))
    return [(name, argv + ["--deterministic"]) for name, argv in out]
