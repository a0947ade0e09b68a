"""Posterior bounds for a noisy diagnostic test along a ladder of boundary gaps.

Twenty positive results from a test with 10% false positives and negatives,
prior strength s = 1. Writes the ladder for both predictive monomials theta_1
and theta_2 as JSON and CSV.
"""

import argparse
import csv
import time
from pathlib import Path

from nearignorance.channels import binary_test_channel
from nearignorance.core import CountVector, ManifestDataset
from nearignorance.dirichlet import PriorSet
from nearignorance.fileio import atomic_write, dumps
from nearignorance.inference import OptimizerConfig, vacuity_check


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--eps", type=float, default=0.1)
    ap.add_argument("--positives", type=int, default=20)
    ap.add_argument("--s", type=float, default=1.0)
    ap.add_argument("--deepest", type=int, default=30, help="ladder runs to 10^-deepest")
    ap.add_argument("--out-dir", default="results")
    args = ap.parse_args()

    ch = binary_test_channel(args.eps, args.eps)
    data = ManifestDataset.discrete([0] * args.positives)
    ocfg = OptimizerConfig(boundary_ladder=tuple(10.0 ** -i for i in range(1, args.deepest + 1)))
    out = Path(args.out_dir)
    summary = {}
    for name, counts in (("theta1", (1, 0)), ("theta2", (0, 1))):
        start = time.perf_counter()
        rep = vacuity_check(PriorSet(args.s, 2), ch, data, CountVector(counts), ocfg=ocfg)
        rows = [(r.gap, r.lower.value, r.upper.value) for r in rep.ladder_values]
        summary[name] = {
            "verdict": rep.verdict,
            "hypothesis_holds": rep.hypothesis_holds,
            "prior_bounds": [rep.prior_bounds.lower, rep.prior_bounds.upper],
            "ladder": [{"gap": g, "lower": lo, "upper": hi} for g, lo, hi in rows],
            "seconds": time.perf_counter() - start,
        }
        out.mkdir(parents=True, exist_ok=True)
        with open(out / f"vacuity_{name}.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["gap", "lower", "upper"])
            w.writerows(rows)
        print(f"{name}: verdict {rep.verdict}")
        for g, lo, hi in rows:
            print(f"  gap {g:8.0e}  lower {lo:.6e}  upper {hi:.12f}")
    atomic_write(out / "vacuity_ladder.json", dumps(summary) + "\n")


if __name__ == "__main__":
    main()
