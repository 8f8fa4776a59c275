"""Benchmark the compiled kernels against the numpy reference backend.

Times each hot-loop kernel on synthetic arrays and a full moment fit on
generated mixture data, once per available backend, and prints per-call
timings with the compiled speedup. Run from the repository root:

    python3 benchmarks/bench_kernels.py --n 200000 --repeats 5
"""

import argparse
import time

import numpy as np

from mommix import _kernels, moments
from mommix.simulation import ScenarioSpec, generate


def best_seconds(func, repeats, loops):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        for _ in range(loops):
            func()
        best = min(best, (time.perf_counter() - start) / loops)
    return best


def kernel_cases(n, seed):
    rng = np.random.default_rng(seed)
    eta = rng.standard_normal(n)
    y = rng.standard_normal(n)
    w = 1.0 / (1.0 + eta**4)
    x = np.column_stack([np.ones(n), rng.standard_normal(n)])
    lam1 = np.array([0.1, 0.5])
    mean1 = 0.3 + 0.9 * x[:, 1]
    return {
        "moment_sums": lambda: _kernels.moment_sums(eta, y, w),
        "profile_moments": lambda: _kernels.profile_moments(x, y, lam1),
        "em_estep": lambda: _kernels.em_estep(y, mean1, 1.0, 0.0, 0.5, 0.6),
    }


def fit_case(n, seed):
    data = generate(ScenarioSpec(kind="gaussian_mixture", n=n, p=0.5, seed=seed))
    return lambda: moments.fit(data)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n", type=int, default=200_000,
                        help="array length for the kernel timings")
    parser.add_argument("--fit-n", type=int, default=20_000,
                        help="sample size for the end-to-end fit timing")
    parser.add_argument("--repeats", type=int, default=5,
                        help="timing repetitions; the best is reported")
    parser.add_argument("--loops", type=int, default=20,
                        help="kernel calls per repetition")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    backends = _kernels.available_backends()
    print(f"backends: {', '.join(backends)}  (n={args.n}, fit n={args.fit_n})")
    if "compiled" not in backends:
        print("compiled extension not built; timing the reference backend only")

    cases = list(kernel_cases(args.n, args.seed).items())
    cases.append(("full moment fit", fit_case(args.fit_n, args.seed)))

    width = max(len(name) for name, _ in cases)
    original = _kernels.BACKEND
    results = {}
    for backend in backends:
        _kernels.set_backend(backend)
        for name, func in cases:
            loops = args.loops if name != "full moment fit" else max(1, args.loops // 10)
            results[(backend, name)] = best_seconds(func, args.repeats, loops)
    _kernels.set_backend(original)

    header = f"{'kernel':<{width}}  " + "".join(f"{b:>14}" for b in backends)
    if len(backends) > 1:
        header += f"{'speedup':>10}"
    print(header)
    for name, _ in cases:
        row = f"{name:<{width}}  "
        for backend in backends:
            row += f"{results[(backend, name)] * 1e6:>12.1f}us"
        if len(backends) > 1:
            ratio = results[("python", name)] / results[("compiled", name)]
            row += f"{ratio:>9.2f}x"
        print(row)


if __name__ == "__main__":
    main()
