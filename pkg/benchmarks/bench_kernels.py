"""Compare the compiled and numpy mode-sum kernels.

    python3 benchmarks/bench_kernels.py [--points N] [--repeat R]

Times the raw kernels on the 61-mode sidewall coupling set and a full
indistinguishability integral with each backend, and reports the largest
difference between backends.
"""

import argparse
import timeit

import numpy as np

from qdphonons import _kernels, load_catalog
from qdphonons.coupling import build_coupling_set
from qdphonons.indistinguishability import integrate_indistinguishability


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--points", type=int, default=200_000, help="time points per kernel call")
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    cs = build_coupling_set(load_catalog("no_dbr"), 4.0, "sidewall")
    t = np.linspace(0.0, 3e-7, args.points)
    omega, weight, eta_sq = cs.omegas, cs.dephasing_weights, cs.eta_sq
    backends = sorted(_kernels.BACKENDS)
    if len(backends) < 2:
        print("compiled kernel not built; timing the numpy backend only")

    print(f"{len(cs.active)} modes, {args.points} time points, best of {args.repeat}")
    print(f"{'backend':<8} {'phase_real':>12} {'phase_complex':>14} {'I (table1-b)':>13}")
    results = {}
    for name in backends:
        row = []
        for stmt in (
            lambda: _kernels.phase_real(t, omega, weight, backend=name),
            lambda: _kernels.phase_complex(t, omega, weight, eta_sq, backend=name),
            lambda: integrate_indistinguishability(cs, 0.08e9, backend=name),
        ):
            row.append(min(timeit.repeat(stmt, number=1, repeat=args.repeat)))
        results[name] = _kernels.phase_complex(t, omega, weight, eta_sq, backend=name)
        print(f"{name:<8} {row[0] * 1e3:10.2f} ms {row[1] * 1e3:12.2f} ms {row[2] * 1e3:11.2f} ms")

    if len(results) == 2:
        (re_a, im_a), (re_b, im_b) = results.values()
        print(f"max |diff| real {np.max(np.abs(re_a - re_b)):.2e}, imag {np.max(np.abs(im_a - im_b)):.2e}"
              f" (scales {weight.sum():.2e}, {eta_sq.sum():.2e})")


if __name__ == "__main__":
    main()
