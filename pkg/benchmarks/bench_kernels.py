"""Per-step kernel timings: compiled extension vs pure-numpy fallback.

Usage: python benchmarks/bench_kernels.py [--repeats N]

Times the three hot kernels and a full estimator step on the block/basis
shapes the experiments actually use. The compiled core pays off most at
small d and k, where dispatch overhead dominates the numpy path.
"""

import argparse
import time

import numpy as np

from streampca import _backend
from streampca.estimators import (LearningRateSchedule, StreamingEstimator,
                                  init_basis)
from streampca.linalg import DataBlock
from streampca.sources import make_spiked_model, spiked_matrix

SHAPES = [  # (d, k, B)
    (100, 1, 5),
    (100, 10, 5),
    (300, 20, 5),
    (1000, 10, 5),
]


def time_call(fn, repeats):
    fn()  # warm up
    t0 = time.perf_counter()
    for _ in range(repeats):
        fn()
    return (time.perf_counter() - t0) / repeats


def bench_kernels(d, k, B, repeats):
    rng = np.random.default_rng(0)
    X = np.ascontiguousarray(rng.standard_normal((d, B)))
    W = np.ascontiguousarray(np.linalg.qr(rng.standard_normal((d, k)))[0])
    M = np.ascontiguousarray(rng.standard_normal((d, k)))
    impl = _backend.active()
    out = {}
    out["gram_apply"] = time_call(lambda: impl.gram_apply(X, W, 1.0 / B),
                                  repeats)
    out["accelerate"] = time_call(lambda: impl.accelerate(M, W, 3.0), repeats)

    def run_mgs():
        impl.mgs(M.copy(), 1e-11)

    out["mgs"] = time_call(run_mgs, repeats)
    return out


def bench_step(d, k, B, repeats):
    model = make_spiked_model(d, k, 0.5, 1)
    X = spiked_matrix(model, B * 8, np.random.default_rng(2))
    block = DataBlock(np.ascontiguousarray(X[:, :B]), 0)

    est = StreamingEstimator(
        init_basis(d, k, 3), method="block-power", accelerated=True,
        schedule=LearningRateSchedule(2.0, np.random.default_rng(4)))

    def one_step():
        est.step(block)

    return time_call(one_step, repeats)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=2000)
    args = parser.parse_args()

    backends = _backend.available_backends()
    if len(backends) < 2:
        print(f"only {backends} available; build the extension to compare")

    print(f"{'shape (d,k,B)':>16} {'kernel':>12} "
          + " ".join(f"{b:>12}" for b in backends) + f" {'speedup':>9}")
    for d, k, B in SHAPES:
        rows = {}
        for name in backends:
            previous = _backend.use_backend(name)
            try:
                rows[name] = bench_kernels(d, k, B, args.repeats)
                rows[name]["full step"] = bench_step(d, k, B,
                                                     max(200, args.repeats // 4))
            finally:
                _backend.use_backend(previous)
        for kernel in ("gram_apply", "accelerate", "mgs", "full step"):
            times = [rows[b][kernel] for b in backends]
            speedup = (f"{times[-1] / times[0]:8.1f}x"
                       if len(times) == 2 and times[0] > 0 else "      n/a")
            print(f"{f'({d},{k},{B})':>16} {kernel:>12} "
                  + " ".join(f"{t * 1e6:10.1f}us" for t in times)
                  + f" {speedup}")


if __name__ == "__main__":
    main()
