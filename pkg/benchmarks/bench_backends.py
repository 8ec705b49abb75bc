"""Time the jitted run loops against their plain-Python originals.

    python3 benchmarks/bench_backends.py [--T 10000] [--repeat 3]

Both backends receive the same stream indices and uniforms, so their
outputs are also compared; the script exits non-zero if they disagree.
"""

import argparse
import sys
import time

import numpy as np

from rejectron import _kernels
from rejectron._accel import HAVE_NUMBA, python_impl
from rejectron.data import resolve_dataset, stream_indices
from rejectron.query import SeededRng


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--T", type=int, default=10_000)
    ap.add_argument("--kernel-T", type=int, default=2_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if not HAVE_NUMBA:
        print("numba unavailable or disabled; nothing to compare", file=sys.stderr)
        return 1

    ds = resolve_dataset("synthetic:n=500,dim=10,radius=5")
    X, y = ds.dense(), ds.y.astype(float)
    sq = np.einsum("ij,ij->i", X, X)
    ok = True
    print(f"{'case':<16}{'T':>8}{'python s':>12}{'numba s':>12}{'speedup':>10}")
    cases = []
    for name, variant in (("dral", _kernels.DRAL), ("dsal", _kernels.DSAL), ("dsol", _kernels.DSOL)):
        cases.append((name, args.T, _kernels.run_linear, lambda v=variant: (v, 1.0)))
    for name, variant in (("kernel-dral", _kernels.DRAL), ("kernel-dsal", _kernels.DSAL)):
        cases.append((name, args.kernel_T, _kernels.run_kernel, lambda v=variant: (v, 1.0, _kernels.RBF, 2, 1.0, 0.5)))
    for name, T, fn, extra in cases:
        idx = stream_indices(ds.n, T, 1, "with-replacement")
        u = SeededRng(2).uniforms(T)
        etas = np.maximum(1e-3, 0.1 - 1e-5 * np.arange(T))
        if fn is _kernels.run_kernel:
            call_args = (X, sq, y, idx, u, etas, 0.25, 2.0) + extra()
        else:
            call_args = (X, y, idx, u, etas, 0.25, 2.0) + extra()
        fn(*call_args)  # compile outside the timed region
        t_jit, out_jit = best_of(lambda: fn(*call_args), args.repeat)
        t_py, out_py = best_of(lambda: python_impl(fn)(*call_args), max(1, args.repeat // 3))
        f_gap = float(np.max(np.abs(out_jit[0] - out_py[0])))
        same = bool(np.array_equal(out_jit[3], out_py[3]))
        ok &= same and f_gap <= 1e-9
        print(f"{name:<16}{T:>8}{t_py:>12.4f}{t_jit:>12.4f}{t_py / t_jit:>9.1f}x  f_gap={f_gap:.1e} same_queries={same}")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
