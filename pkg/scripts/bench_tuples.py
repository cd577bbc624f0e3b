"""Time the residue-sieve descent with the numba kernel and the numpy fallback.

Both paths consume the same pre-drawn random numbers, so the survivor counts
printed for each pair must agree.

    python scripts/bench_tuples.py --k 49 --d 240 --steps 20000
"""

import argparse
import time

from e2gaps.tuples import residue_descent


def timed(use_numba, k, d, steps, seed):
    t0 = time.perf_counter()
    run = residue_descent(k, d, steps, seed=seed, use_numba=use_numba)
    return run, time.perf_counter() - t0


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--k", type=int, default=49)
    ap.add_argument("--d", type=int, default=238)  # one below the target so every step runs
    ap.add_argument("--steps", type=int, default=20000)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args()

    timed(True, 5, 12, 10, 0)  # compile outside the timing
    nb, t_nb = timed(True, args.k, args.d, args.steps, args.seed)
    py, t_py = timed(False, args.k, args.d, args.steps, args.seed)
    print(f"k={args.k} d={args.d} steps={nb.steps}")
    print(f"numba  {t_nb:8.3f} s  {1e6 * t_nb / max(nb.steps, 1):8.2f} us/step  survivors {nb.survivors}")
    print(f"numpy  {t_py:8.3f} s  {1e6 * t_py / max(py.steps, 1):8.2f} us/step  survivors {py.survivors}")
    print(f"speedup {t_py / t_nb:.1f}x, identical: {bool((nb.classes == py.classes).all())}")


if __name__ == "__main__":
    main()
