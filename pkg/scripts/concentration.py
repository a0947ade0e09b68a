"""Concentrating Beta(n, 1) densities: expectation, superlevel mass and likelihood ratio."""

import argparse
import csv
from pathlib import Path

from nearignorance.concentration import concentration_experiment, ratio_experiment
from nearignorance.channels import binary_test_channel
from nearignorance.core import CountVector, ManifestDataset


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n-list", default="1,2,5,10,20,50,100,200,500,1000")
    ap.add_argument("--delta", type=float, default=0.1)
    ap.add_argument("--out-dir", default="results")
    args = ap.parse_args()

    ns = [int(v) for v in args.n_list.split(",")]
    f = CountVector.of(1, 0)
    conc = concentration_experiment(ns, f, args.delta)
    ratio = ratio_experiment(ns, f, binary_test_channel(0.1, 0.1), ManifestDataset.discrete([0]))
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "concentration.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["n", "expectation", "exact_expectation", "mass", "exact_mass", "ratio"])
        for c, r in zip(conc, ratio):
            exact_mass = 1 - (1 - args.delta) ** c.n
            w.writerow([c.n, c.expectation, c.n / (c.n + 1), c.mass.value, exact_mass, r.ratio.value])
            print(f"n={c.n:5d}  E={c.expectation:.6f}  mass={c.mass.value:.6f} "
                  f"(exact {exact_mass:.6f})  ratio={r.ratio.value:.6f}")


if __name__ == "__main__":
    main()
