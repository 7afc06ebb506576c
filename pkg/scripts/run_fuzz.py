"""Run the cross-validation suites and write a JSON report.

    python3 scripts/run_fuzz.py --logic mb+ --count 1000 --seed 3 --out report.json
"""

import argparse
import json
import sys

from nsmb.harness import FuzzConfig, run_all


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--logic", default="mb", choices=["mb", "mb+"])
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--count", type=int, default=500)
    ap.add_argument("--depth", type=int, default=3)
    ap.add_argument("--tree-depth", type=int, default=2)
    ap.add_argument("--models", type=int, default=25)
    ap.add_argument("--out")
    a = ap.parse_args()
    cfg = FuzzConfig(
        seed=a.seed, count=a.count, max_formula_depth=a.depth,
        max_tree_depth=a.tree_depth, models=a.models, mode=a.logic,
    )
    reps = run_all(cfg)
    for r in reps:
        print(r.text())
    if a.out:
        with open(a.out, "w") as fh:
            json.dump([r.to_dict() for r in reps], fh, indent=2, default=str)
    return 0 if all(r.ok for r in reps) else 1


if __name__ == "__main__":
    sys.exit(main())
