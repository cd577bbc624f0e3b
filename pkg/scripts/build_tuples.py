"""Regenerate the bundled tuple witnesses in src/e2gaps/data/tuples.

Each target diameter is reached by the pinned residue-sieve descent; the
result is checked for admissibility and diameter before it is written.
"""

import argparse
import sys
import time
from pathlib import Path

from e2gaps.tuples import BUNDLED_DIAMETERS, is_admissible, residue_descent, tuple_from_classes

OUT = Path(__file__).resolve().parents[1] / "src" / "e2gaps" / "data" / "tuples"


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("k", nargs="*", type=int, default=sorted(BUNDLED_DIAMETERS))
    ap.add_argument("--steps", type=int, default=30_000_000)
    ap.add_argument("--seeds", type=int, default=20)
    args = ap.parse_args(argv)
    for k in args.k:
        d = BUNDLED_DIAMETERS[k]
        for seed in range(1, args.seeds + 1):
            t0 = time.time()
            run = residue_descent(k, d, args.steps, seed=seed)
            print(f"k={k} d={d} seed={seed} survivors={run.survivors} steps={run.steps} "
                  f"{time.time() - t0:.1f}s", flush=True)
            if run.survivors >= k:
                t = tuple_from_classes(k, d, run.classes)
                assert is_admissible(t) and t.diameter == d and len(t) == k
                (OUT / f"k{k}.txt").write_text(t.dumps())
                break
        else:
            print(f"k={k}: no tuple of diameter {d} found", file=sys.stderr)
            return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
