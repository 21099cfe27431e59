"""Time the compiled kernels against the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--repeat 3] [--bnb-limit 20]

Both backends get identical inputs; results are checked to agree before
timings are reported.
"""
import argparse
import time

import numpy as np

from qot import kernels
from qot.solver import CoverInstance, _Arrays, _candidates, _greedy_enum_rows, lower_bound
from qot.targets import all_k_subsets, chain_windows


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def density_case(arr, backend):
    def run():
        covered = np.zeros(arr.E, dtype=np.uint8)
        noise = np.zeros(arr.n)
        for _ in range(20):
            axes = backend.density_setting(arr.n, arr.q_ptr, arr.q_elems, arr.q_axis, arr.elem_m,
                                           covered, noise, arr.wscale)
            covered[arr.ids_of(axes)[0]] = 1
        return covered.sum()
    return run


def gains_case(ids, backend):
    covered = np.zeros(int(ids.max()) + 1, dtype=np.uint8)
    covered[::3] = 1
    return lambda: backend.count_gains(ids, covered).tolist()


def bnb_case(arr, ids, incumbent, limit, backend):
    flat = ids.ravel()
    e_cands = (np.argsort(flat, kind="stable") // ids.shape[1]).astype(np.int32)
    e_ptr = np.zeros(arr.E + 1, dtype=np.int64)
    e_ptr[1:] = np.cumsum(np.bincount(flat, minlength=arr.E))

    def run():
        best, complete, nodes = backend.bnb_search(ids, arr.elem_subset, arr.sizes, e_ptr, e_cands,
                                                   incumbent, limit)
        return (None if best is None else len(best)), complete, nodes
    return run


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--bnb-limit", type=float, default=20.0, help="seconds per branch-and-bound run")
    args = ap.parse_args()

    backends = [kernels.python_backend]
    if kernels.compiled_backend is None:
        print("compiled extension not built; timing the Python fallback only")
    else:
        backends.append(kernels.compiled_backend)

    cases = []
    for spec in (all_k_subsets(10, 2), all_k_subsets(8, 3), chain_windows(14, 3)):
        arr = _Arrays(CoverInstance.from_spec(spec).universe)
        cases.append((f"density_setting x20  n={spec.n} |S|={len(spec.subsets)}",
                      lambda b, arr=arr: density_case(arr, b), args.repeat))
    for spec in (all_k_subsets(8, 2), all_k_subsets(7, 3)):
        arr = _Arrays(CoverInstance.from_spec(spec).universe)
        _, ids = _candidates(arr)
        cases.append((f"count_gains  n={spec.n} candidates={len(ids)}",
                      lambda b, ids=ids: gains_case(ids, b), args.repeat))
    for spec in (all_k_subsets(4, 3), all_k_subsets(5, 2)):
        inst = CoverInstance.from_spec(spec)
        arr = _Arrays(inst.universe)
        rows, ids = _candidates(arr)
        incumbent = len(_greedy_enum_rows(arr, rows, ids))
        label = f"bnb_search  n={spec.n} |S|={len(spec.subsets)} (incumbent {incumbent}, bound {lower_bound(inst.universe)})"
        cases.append((label, lambda b, a=arr, i=ids, inc=incumbent: bnb_case(a, i, inc, args.bnb_limit, b), 1))

    print(f"{'case':62s} " + " ".join(f"{b.NAME:>10s}" for b in backends) + "   speedup")
    for label, make, repeat in cases:
        timings, outputs = [], []
        for b in backends:
            t, out = best_of(make(b), repeat)
            timings.append(t)
            outputs.append(out)
        note = ""
        if isinstance(outputs[0], tuple):
            # a search cut off by the time limit is compared on node throughput
            note = "  nodes/s " + " ".join(f"{o[2] / t:,.0f}" for o, t in zip(outputs, timings))
            if all(o[1] for o in outputs) and len(set(outputs)) > 1:
                note += "  MISMATCH"
        elif len(outputs) == 2 and outputs[0] != outputs[1]:
            note = "  MISMATCH"
        speed = f"{timings[0] / timings[-1]:8.1f}x" if len(timings) == 2 else ""
        print(f"{label:62s} " + " ".join(f"{t:9.4f}s" for t in timings) + f" {speed}{note}")


if __name__ == "__main__":
    main()
