"""Time the simulation kernels under the numba and pure-Python backends.

Each backend runs in its own interpreter because the backend is chosen at
import time (``FVTREE_DISABLE_NUMBA``).  Usage::

    python3 benchmarks/bench_kernels.py [--quick]
"""

import argparse
import json
import os
import subprocess
import sys

CHILD = r"""
import json, sys, time
from fvtree._jit import BACKEND
from fvtree.kernels.coalescent import kingman_merges, pair_laplace_sum
from fvtree import moran as mo
from fvtree.rng import replicate_rng

quick = sys.argv[1] == "1"
n0 = 2000 if quick else 20000
N, T = (200, 0.2) if quick else (1000, 0.5)

def best(fn, reps=3):
    out = []
    for _ in range(reps):
        t = time.perf_counter()
        fn()
        out.append(time.perf_counter() - t)
    return min(out)

# warm-up compiles the kernels when numba is active
kingman_merges(10, replicate_rng(0), 0.0)
st = mo.init(20, "stationary", replicate_rng(0))
st.reset_integrals(lam=1.0, eps=0.1)
st.advance(0.1, replicate_rng(0))

res = {"backend": BACKEND}
res["kingman_merges"] = best(lambda: kingman_merges(n0, replicate_rng(1), 0.0))
tree = kingman_merges(n0, replicate_rng(1), 0.0)
res["pair_laplace_sum"] = best(lambda: pair_laplace_sum(tree[3], tree[4], tree[5], 100.0))

def moran_run():
    s = mo.init(N, "stationary", replicate_rng(2))
    s.reset_integrals(lam=50.0, eps=0.02)
    s.advance(T, replicate_rng(3))
    return s.event_counts["neutral"]

res["moran_events"] = moran_run()
res["moran_advance"] = best(moran_run, reps=1 if not quick else 3)
res["sizes"] = {"n0": n0, "N": N, "T": T}
print(json.dumps(res))
"""


def run(disable: bool, quick: bool) -> dict:
    env = dict(os.environ, FVTREE_DISABLE_NUMBA="1" if disable else "0")
    out = subprocess.run([sys.executable, "-c", CHILD, "1" if quick else "0"], env=env, capture_output=True, text=True, check=True)
    return json.loads(out.stdout.strip().splitlines()[-1])


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--quick", action="store_true", help="small sizes (seconds instead of minutes)")
    args = p.parse_args(argv)
    fast, slow = run(False, args.quick), run(True, args.quick)
    print(f"sizes: {fast['sizes']}")
    print(f"{'kernel':<18}{fast['backend']:>12}{slow['backend']:>12}{'speed-up':>10}")
    for key in ("kingman_merges", "pair_laplace_sum", "moran_advance"):
        a, b = fast[key], slow[key]
        print(f"{key:<18}{a:>11.4f}s{b:>11.4f}s{b / a:>9.1f}x")
    ev = fast["moran_events"]
    print(f"moran: {ev} neutral events, {fast['moran_advance'] / ev * 1e9:.0f} ns/event ({fast['backend']})")


if __name__ == "__main__":
    main()
