"""Time the compiled and pure-Python integer kernels on the workloads the checks produce.

Run with ``python3 benchmarks/bench_kernels.py``.
"""

import argparse
import importlib
import random
import timeit

from fractions import Fraction

from hirota_kdv.dynamics import ReductionSpec
from hirota_kdv.exact import RationalSampler
from hirota_kdv.poisson import _bracket_jets, _lcm_den, _scale_int, kdv2
from hirota_kdv.quiver import build_exchange


def _load(name):
    try:
        return importlib.import_module(f"hirota_kdv.{name}")
    except ImportError:
        return None


def jacobi_inputs(N, M):
    b = kdv2(ReductionSpec(N, M, Fraction(3)))
    P, G = _bracket_jets(b, RationalSampler(0).point(b.dim))
    d1 = _lcm_den(x for r in P for x in r)
    d2 = _lcm_den(x for r in G for g in r for x in g)
    return _scale_int(P, d1), [_scale_int(r, d2) for r in G]


def workloads():
    rng = random.Random(0)
    big = [[rng.randint(-10**6, 10**6) for _ in range(40)] for _ in range(40)]
    ex = build_exchange("t1", 17, 12).as_lists()
    P, G = jacobi_inputs(8, 5)
    A = [[rng.randint(-50, 50) for _ in range(20)] for _ in range(20)]
    S = [[rng.randint(-50, 50) for _ in range(20)] for _ in range(20)]
    return {
        "bareiss_rank 40x40 random": lambda k: k.bareiss_rank(big),
        "bareiss_rank exchange t1 (17,12)": lambda k: k.bareiss_rank(ex),
        "jacobi_violations KDV2 (8,5)": lambda k: k.jacobi_violations(P, G),
        "sandwich 20x20": lambda k: k.sandwich(A, S, A),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    backends = {"python": _load("_pykernels"), "cython": _load("_kernels")}
    if backends["cython"] is None:
        print("compiled extension not built; run `python3 setup.py build_ext --inplace` first")
    print(f"{'workload':36s} {'python (ms)':>12s} {'cython (ms)':>12s} {'speedup':>8s}")
    for name, fn in workloads().items():
        times = {}
        for label, mod in backends.items():
            if mod is None:
                continue
            if label == "cython" and fn(mod) != fn(backends["python"]):
                raise SystemExit(f"backends disagree on {name}")
            times[label] = min(timeit.repeat(lambda: fn(mod), number=1, repeat=args.repeat)) * 1e3
        py, cy = times["python"], times.get("cython")
        speed = f"{py / cy:7.1f}x" if cy else "    n/a"
        print(f"{name:36s} {py:12.2f} {cy if cy else float('nan'):12.2f} {speed}")


if __name__ == "__main__":
    main()
