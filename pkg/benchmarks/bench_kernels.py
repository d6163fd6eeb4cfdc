"""Compare the numba and numpy wave-stepping backends.

Run with ``python3 benchmarks/bench_kernels.py [--grid 41 81 161] [--steps 2000]``.
Both backends advance the same Gaussian state; the script reports the best
wall time per backend and the largest difference between their results.
"""

import argparse
import time

import numpy as np

from modaldmd import _kernels
from modaldmd.membrane import GridDomain, WaveConfig, _coefficients, _stencil_sum, gaussian_ic


def best_time(fn, repeats):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--grid", type=int, nargs="+", default=[41, 81, 161])
    parser.add_argument("--steps", type=int, default=2000)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args(argv)

    if not _kernels.HAVE_NUMBA:
        raise SystemExit("numba is not importable; nothing to compare")

    print(f"{'grid':>6} {'steps':>6} {'numpy [s]':>10} {'numba [s]':>10} {'speedup':>8} {'max diff':>9}")
    for n in args.grid:
        d = GridDomain.square(n)
        cfg = WaveConfig(gamma=0.1)
        dt = cfg.time_grid(d).dt_sim
        coef, damp = _coefficients(d, cfg, dt)
        h = gaussian_ic(d, cfg)
        hp = h + 0.5 * coef * _stencil_sum(h, d.mask)

        _kernels.advance_numba(h, hp, d.mask, coef, damp, 1)  # compile outside the timing
        t_np, (a, _) = best_time(
            lambda: _kernels.advance_numpy(h, hp, d.mask, coef, damp, args.steps), args.repeats
        )
        t_nb, (b, _) = best_time(
            lambda: _kernels.advance_numba(h, hp, d.mask, coef, damp, args.steps), args.repeats
        )
        diff = float(np.max(np.abs(a - b)))
        print(f"{n:>6} {args.steps:>6} {t_np:>10.3f} {t_nb:>10.3f} {t_np / t_nb:>7.1f}x {diff:>9.1e}")


if __name__ == "__main__":
    main()
