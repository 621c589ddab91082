"""Compare the numba and pure-numpy kernels.

Run with ``python benchmarks/bench_kernels.py [--quick]``. Both paths are
timed in one process regardless of ``KVISITS_DISABLE_NUMBA``; that flag only
picks the default used by the library.
"""

import argparse
import json

from kvisits.bench import run_benchmarks


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--quick", action="store_true")
    args = ap.parse_args()
    print(json.dumps(run_benchmarks(args.repeat, args.quick), indent=2))


if __name__ == "__main__":
    main()
