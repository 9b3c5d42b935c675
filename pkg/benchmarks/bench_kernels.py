"""Compare the compiled kernels with the pure-Python fallback.

Usage: python benchmarks/bench_kernels.py [--repeat N] [--quick]
"""

import argparse
import importlib
import timeit

import numpy as np

from cplab import _kernels_py, kernels
from cplab.model import Dataset, PenaltySpec
from cplab.segmentation import SegmentationConfig, fit_known_k

KERNEL_NAMES = ("bridge_prox", "cd_lasso", "prox_grad", "dp_suffix")


def _problem(rng, m, p):
    x = rng.normal(size=(m, p))
    y = x @ rng.uniform(-2, 2, size=p) + rng.normal(size=m)
    return x.T @ x, x.T @ y


def cases(quick):
    rng = np.random.default_rng(0)
    G, b = _problem(rng, 200, 8)
    step0 = 0.5 / float(np.linalg.eigvalsh(G)[-1])
    w = 2.0 * np.sqrt(200)
    n = 120 if quick else 300
    C = np.abs(rng.normal(size=(n + 1, n + 1)))
    yield "cd_lasso p=8", lambda k: k.cd_lasso(G, b, w, np.zeros(8), 10000, 1e-10)
    yield "prox_grad p=8 gamma=1.5", lambda k: k.prox_grad(G, b, w, 1.5, np.zeros(8), step0, 0.5, 10000, 1e-10)
    yield "bridge_prox x1000 gamma=0.5", lambda k: [k.bridge_prox(v, 0.7, 0.5) for v in np.linspace(-3, 3, 1000)]
    yield f"dp_suffix n={n} k=3", lambda k: k.dp_suffix(C, 3, 5)

    m = 80 if quick else 160
    x = np.c_[np.ones(m), rng.normal(size=m)]
    y = np.r_[x[: m // 2] @ [1.0, 1.0], x[m // 2:] @ [-1.0, 0.5]] + 0.3 * rng.normal(size=m)
    data = Dataset(x, y)
    cfg = SegmentationConfig(k=2, min_segment_length=6, penalty=PenaltySpec(1.0, 1.0))
    yield f"fit_known_k n={m} k=2 (end to end)", lambda k: _with_backend(k, lambda: fit_known_k(data, cfg).changepoints)


def _with_backend(module, fn):
    saved = {name: getattr(kernels, name) for name in KERNEL_NAMES}
    try:
        for name in KERNEL_NAMES:
            setattr(kernels, name, getattr(module, name))
        return fn()
    finally:
        for name, f in saved.items():
            setattr(kernels, name, f)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--quick", action="store_true", help="smaller DP instance")
    args = parser.parse_args(argv)
    try:
        compiled = importlib.import_module("cplab._kernels")
    except ImportError:
        print("compiled extension not built; nothing to compare")
        return 1
    print(f"{'kernel':36s} {'cython (ms)':>12s} {'python (ms)':>12s} {'speedup':>9s}")
    for name, call in cases(args.quick):
        # outputs must agree exactly before the timings mean anything
        a, b = call(compiled), call(_kernels_py)
        same = all(np.array_equal(np.asarray(u), np.asarray(v))
                   for u, v in zip(a if isinstance(a, tuple) else (a,), b if isinstance(b, tuple) else (b,)))
        tc = min(timeit.repeat(lambda: call(compiled), number=1, repeat=args.repeat)) * 1e3
        tp = min(timeit.repeat(lambda: call(_kernels_py), number=1, repeat=args.repeat)) * 1e3
        flag = "" if same else "  (outputs differ!)"
        print(f"{name:36s} {tc:12.3f} {tp:12.3f} {tp / tc:8.1f}x{flag}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
