"""Compare the gmpy2 and pure-Fraction elimination backends on representative workloads.

Each backend runs in a fresh interpreter because the choice is fixed at import
time by ``JETRIGIDITY_PURE``.  Usage::

    python benchmarks/bench_backends.py --repeat 3
"""
from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys

WORKLOAD = r"""
import json, sys, time
from jetrigidity import cartan, geometries, linalg
from jetrigidity.rigidity import killing_jets, subrigidity_infinitesimal

def timed(fn):
    t0 = time.perf_counter()
    out = fn()
    return time.perf_counter() - t0, out

cases = {
    "heisenberg killing k=9": lambda: killing_jets(geometries.heisenberg(9), 9).dim,
    "lightcone n=4 killing k=5 depth 2": lambda: killing_jets(geometries.lightcone(4, 7), 5, 2).dim,
    "flat R^5 killing k=5": lambda: killing_jets(geometries.flat(5, 5), 5).dim,
    "lightlike(4) prolongation k=4": lambda: cartan.prolongation(cartan.lightlike(4), 4).dim,
    "flat R^4 (4,1)": lambda: subrigidity_infinitesimal(geometries.flat(4, 4), 4, 1).holds,
}
res = {}
for name, fn in cases.items():
    t, out = timed(fn)
    res[name] = [t, repr(out)]
print(json.dumps({"backend": linalg.BACKEND, "cases": res}))
"""


def run(pure: bool) -> dict:
    env = dict(os.environ)
    env["JETRIGIDITY_PURE"] = "1" if pure else "0"
    out = subprocess.run([sys.executable, "-c", WORKLOAD], env=env, check=True, capture_output=True, text=True)
    return json.loads(out.stdout)


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=1, help="runs per backend; the minimum time is kept")
    args = p.parse_args(argv)
    best = {}
    for pure in (False, True):
        for _ in range(args.repeat):
            r = run(pure)
            slot = best.setdefault(r["backend"], {})
            for name, (t, val) in r["cases"].items():
                prev = slot.get(name)
                slot[name] = (min(t, prev[0]) if prev else t, val)
    backends = list(best)
    names = list(next(iter(best.values())))
    print(f"{'workload':38}" + "".join(f"{b:>12}" for b in backends) + "   result")
    for name in names:
        vals = {best[b][name][1] for b in backends}
        flag = "" if len(vals) == 1 else "  MISMATCH"
        print(f"{name:38}" + "".join(f"{best[b][name][0]:11.3f}s" for b in backends)
              + f"   {best[backends[0]][name][1]}{flag}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
