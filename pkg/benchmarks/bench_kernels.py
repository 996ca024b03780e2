"""Compare the compiled renewal kernels with the numpy fallback.

Run with ``python benchmarks/bench_kernels.py``. Each case reports the best
of several repeats and the largest relative difference between backends.
"""

import argparse
import sys
import timeit

import numpy as np

from dickman import kernels
from dickman.models import polymer_spacetime_law
from dickman.renewal import law_from_harmonic
from dickman.renewal.spacetime import _modes


def _best(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args(argv)
    try:
        from dickman import _kernels
    except ImportError:
        print("compiled extension not built; nothing to compare", file=sys.stderr)
        return 1

    cases = []
    for N in (1024, 8192):
        kernel = law_from_harmonic(N).pmf
        cases.append((
            f"scalar N={N}",
            lambda k=kernel, n=N: _kernels.renewal_recursion(k, 1.0, n),
            lambda k=kernel, n=N: kernels._py_renewal_recursion(k, 1.0, n),
        ))
    for N, L in ((64, 66), (256, 130)):
        law = polymer_spacetime_law(N)
        modes = _modes(L, 2, True)[:256]
        phi = np.ascontiguousarray(law.modes_fourier(N, L, modes) * law.base.pmf[:, None])
        cases.append((
            f"batched N={N} modes={modes.shape[0]}",
            lambda p=phi, n=N: _kernels.renewal_recursion_batched(p, 1.0, n),
            lambda p=phi, n=N: kernels._py_renewal_recursion_batched(p, 1.0, n),
        ))

    print(f"{'case':<28}{'compiled s':>12}{'python s':>12}{'speedup':>10}{'max rel diff':>14}")
    for name, fast, slow in cases:
        a, b = fast(), slow()
        diff = float(np.max(np.abs(a - b) / np.maximum(np.abs(b), 1e-300)))
        tf, ts = _best(fast, args.repeat), _best(slow, args.repeat)
        print(f"{name:<28}{tf:>12.4g}{ts:>12.4g}{ts / tf:>10.1f}{diff:>14.2e}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
