"""Compare the compiled and numpy kernel backends.

Usage::

    python benchmarks/bench_kernels.py [--batch 4096] [--n-ris 64] [--tx 4] [--rx 4]

Prints the best-of-N time per call for each kernel on each backend and
the speedup of the compiled one.
"""

import argparse
import timeit

import numpy as np

from rissim import kernels
from rissim.transceiver import build_codebook


def _cn(rng, shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def _best(fn, repeat):
    timer = timeit.Timer(fn)
    n, t = timer.autorange()
    return min(timer.repeat(repeat=repeat, number=n)) / n


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--batch", type=int, default=4096)
    p.add_argument("--n-ris", type=int, default=64)
    p.add_argument("--tx", type=int, default=4)
    p.add_argument("--rx", type=int, default=4)
    p.add_argument("--repeat", type=int, default=5)
    args = p.parse_args(argv)

    rng = np.random.default_rng(0)
    B, N, Tx, Rx = args.batch, args.n_ris, args.tx, args.rx
    H = _cn(rng, (B, N, Tx))
    G = _cn(rng, (B, N, Rx))
    phases = rng.uniform(-np.pi, np.pi, (B, N))
    book = build_codebook("mimo", Tx, 2)
    C = _cn(rng, (B, Rx, Tx))
    Y = _cn(rng, (B, Rx))

    backends = ["python"]
    try:
        kernels.get_backend("cython")
        backends.append("cython")
    except ImportError:
        print("compiled kernels not built; timing the numpy fallback only")

    cases = {
        "cosine_angles": lambda m: (lambda: m.cosine_angles(H, G)),
        "compose": lambda m: (lambda: m.compose(G, phases, H)),
        "ml_detect": lambda m: (lambda: m.ml_detect(Y, C, book.vectors)),
    }
    print(f"batch={B} N={N} Tx={Tx} Rx={Rx} codebook={book.size}")
    print(f"{'kernel':<14}" + "".join(f"{b:>12}" for b in backends) + ("     speedup" if len(backends) == 2 else ""))
    for name, make in cases.items():
        times = [_best(make(kernels.get_backend(b)), args.repeat) for b in backends]
        row = f"{name:<14}" + "".join(f"{t * 1e3:>10.2f}ms" for t in times)
        if len(times) == 2:
            row += f"{times[0] / times[1]:>11.1f}x"
        print(row)


if __name__ == "__main__":
    main()
