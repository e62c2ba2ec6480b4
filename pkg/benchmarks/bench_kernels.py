"""Time the compiled kernels against the numpy fallback.

Run with ``python benchmarks/bench_kernels.py [--repeat N]``.  Each kernel is
timed on identical inputs through both backends, then one end-to-end
monodromy computation is run with each backend swapped in.
"""
import argparse
import timeit
from contextlib import contextmanager

import numpy as np

from flatcone import Path, PrymDifferential, develop, monodromy, prym
from flatcone import _pykernels

try:
    from flatcone import _ckernels
except ImportError:
    _ckernels = None

POS = np.array([0.0, 1.0, 0.3 + 0.8j, -1.2 - 0.4j, 2.0 - 1.0j])
EXPS = np.array([-2 / 3, -0.5, 1.0, -1.5, -1 / 3])
REF = 2.0 + 1.5j
ARGS = np.angle(REF - POS)
Z = REF + 0.3 * np.exp(1j * np.linspace(0, 6, 64))


def kernel_calls(k):
    return {
        "branch_log_sum (64 pts)": lambda: k.branch_log_sum(Z, REF, ARGS, POS, EXPS, -1, np.inf),
        "gk15_segment": lambda: k.gk15_segment(REF, REF + 0.2j, REF, ARGS, POS, EXPS, 0.0, np.inf),
        "segment_turns": lambda: k.segment_turns(REF, -REF, POS),
        "log_derivative_values (64 pts)": lambda: k.log_derivative_values(Z, POS, EXPS),
    }


@contextmanager
def backend(k):
    saved = develop.kernels, prym.kernels
    develop.kernels = prym.kernels = k
    try:
        yield
    finally:
        develop.kernels, prym.kernels = saved


def end_to_end():
    w = PrymDifferential.from_points([(0, "1/3"), (1, "1/2"), (1j, "2/3")])
    ring = [0.5 + 1.3 * np.exp(2j * np.pi * t / 24) for t in range(24)]
    return monodromy(w, Path(tuple(ring + ring[:1])), tol=1e-12)


def best_of(fn, repeat, number):
    return min(timeit.repeat(fn, repeat=repeat, number=number)) / number


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    backends = [("python", _pykernels)]
    if _ckernels is not None:
        backends.append(("cython", _ckernels))
    else:
        print("compiled kernels not built; timing the fallback only")

    print(f"{'kernel':34s}" + "".join(f"{name:>14s}" for name, _ in backends) + f"{'speedup':>10s}")
    names = list(kernel_calls(_pykernels))
    for name in names:
        times = [best_of(kernel_calls(k)[name], args.repeat, 2000) for _, k in backends]
        row = f"{name:34s}" + "".join(f"{t * 1e6:12.2f}us" for t in times)
        if len(times) == 2:
            row += f"{times[0] / times[1]:9.1f}x"
        print(row)

    times = []
    for _, k in backends:
        with backend(k):
            times.append(best_of(end_to_end, args.repeat, 1))
    row = f"{'monodromy, 3 points, 24-gon loop':34s}" + "".join(f"{t * 1e3:12.2f}ms" for t in times)
    if len(times) == 2:
        row += f"{times[0] / times[1]:9.1f}x"
    print(row)


if __name__ == "__main__":
    main()
