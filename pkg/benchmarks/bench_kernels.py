"""Compiled vs numpy sampling kernels.

    python3 benchmarks/bench_kernels.py [--coords 2000] [--streams 5000] [--repeat 5]

Times each kernel in both backends on the same (key, coords, streams) block,
checks that the outputs are bit-identical, and finishes with an end-to-end
``stream_sums`` run under each backend (selected through VML_PURE_PYTHON in
a subprocess).
"""
import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from vml import _kernels_py as pyk
from vml import kernels

try:
    from vml import _ckernels as ck
except ImportError:
    ck = None

E2E = (
    "import time; from vml.measure import ProductMeasure, stream_sums; "
    "t=time.perf_counter(); stream_sums(ProductMeasure.gaussian('1'), lambda n: 1.0/n**2, [4096], 4000, 1, power=2); "
    "print(time.perf_counter()-t)"
)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--coords", type=int, default=2000)
    ap.add_argument("--streams", type=int, default=5000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if ck is None:
        sys.exit("compiled kernels are not built; run `pip install -e . --no-build-isolation` first")

    key = kernels.derive_key(42, kernels.DOMAIN_COORDS)
    coords = np.arange(1, args.coords + 1, dtype=np.int64)
    streams = np.arange(args.streams, dtype=np.int64)
    n = args.coords * args.streams
    print(f"block {args.coords} coords x {args.streams} streams ({n / 1e6:.1f}M draws), best of {args.repeat}")
    print(f"{'kernel':<20}{'cython s':>10}{'numpy s':>10}{'speedup':>9}  identical")
    for name in ("counter_uniforms", "standard_normals", "rademacher_signs"):
        fc, fp = getattr(ck, name), getattr(pyk, name)
        same = fc(key, coords, streams).tobytes() == fp(key, coords, streams).tobytes()
        tc = min(timeit.repeat(lambda: fc(key, coords, streams), number=1, repeat=args.repeat))
        tp = min(timeit.repeat(lambda: fp(key, coords, streams), number=1, repeat=args.repeat))
        print(f"{name:<20}{tc:>10.3f}{tp:>10.3f}{tp / tc:>8.1f}x  {same}")

    print("\nend to end: stream_sums, 4096 coordinates x 4000 streams")
    for label, env in (("cython", {}), ("numpy", {"VML_PURE_PYTHON": "1"})):
        out = subprocess.run([sys.executable, "-c", E2E], capture_output=True, text=True, env={**os.environ, **env}, check=True)
        print(f"  {label:<8}{float(out.stdout):.3f} s")


if __name__ == "__main__":
    main()
