"""Time the compiled kernels against the pure-Python fallback.

Usage::

    python3 benchmarks/bench_kernels.py [--repeat 5] [--sizes 50,200,400]
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from hackint import _pykernels

try:
    from hackint import _ckernels
except ImportError:  # pragma: no cover
    _ckernels = None


def _smo_case(n: int, rng: np.random.Generator):
    x = rng.normal(size=(n, 2))
    y = np.where(np.arange(n) % 2 == 0, 1.0, -1.0)
    x += y[:, None]
    q = (y[:, None] * y[None, :]) * (x @ x.T)
    p = -np.ones(n) - 0.3 * y * (x @ np.array([0.5, -0.2]))
    a0 = np.zeros(n)
    a0[0] = 0.3
    return lambda mod: mod.smo_solve(q, p, y, 1.0, 0.3, a0.copy())


def _nw_cases(n: int, rng: np.random.Generator):
    z, y = rng.normal(size=(n, 2)), rng.normal(size=n)
    zq = rng.normal(size=2)
    return (
        ("nw_loo_predictions", lambda mod: mod.nw_loo_predictions(z, y, 0.8)),
        ("nw_predict", lambda mod: mod.nw_predict(z, y, zq, 0.8)),
    )


def best_time(fn, repeat: int) -> float:
    number = 1
    while timeit.timeit(fn, number=number) < 0.05 and number < 10_000:
        number *= 2
    return min(timeit.repeat(fn, number=number, repeat=repeat)) / number


def main(argv: list[str] | None = None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--sizes", default="50,200,400", help="comma-separated problem sizes n")
    args = ap.parse_args(argv)
    if _ckernels is None:
        print("compiled kernels not built; only the Python fallback is available")
        return 1
    rng = np.random.default_rng(0)
    print(f"{'kernel':<20}{'n':>6}{'python [s]':>14}{'cython [s]':>14}{'speedup':>10}")
    for n in (int(s) for s in args.sizes.split(",")):
        cases = [("smo_solve", _smo_case(n, rng)), *_nw_cases(n, rng)]
        for name, call in cases:
            t_py = best_time(lambda: call(_pykernels), args.repeat)
            t_c = best_time(lambda: call(_ckernels), args.repeat)
            print(f"{name:<20}{n:>6}{t_py:>14.3e}{t_c:>14.3e}{t_py / t_c:>9.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
