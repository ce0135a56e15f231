"""Timing of transfer-matrix evaluation over a time grid.

Compares per-point probe evolution with the precomputed spectral kernel and
reports the scan time for several worker counts::

    python3 benchmarks/bench_scan.py --sites 4 6 8 --points 200 --workers 1 4
"""

import argparse
import time

import numpy as np

from spintransfer import ChainSpec, RestStateKind, TransferKernel, chain_propagator, compute_transfer_matrix, rest_state, scan_time


def _timed(fn):
    start = time.perf_counter()
    out = fn()
    return time.perf_counter() - start, out


def bench(n, points, workers_list, probe_points):
    spec = ChainSpec(n, omegas=(0.0,) * (n - 1) + (1.0,), beta=1.0)
    rest = rest_state(spec, RestStateKind.thermal())
    t_diag, p = _timed(lambda: chain_propagator(spec))
    t_kernel, kernel = _timed(lambda: TransferKernel(spec, rest, p))
    grid = np.linspace(0.0, 50.0, points)

    sample = grid[:probe_points]
    t_probe, probe = _timed(lambda: np.stack([compute_transfer_matrix(spec, rest, p, t).data for t in sample]))
    t_spec, fast = _timed(lambda: kernel.evaluate(sample))
    dev = float(np.max(np.abs(probe - fast)))

    print(f"N={n} dim={spec.dim}: diagonalize {t_diag:.3f} s, kernel setup {t_kernel:.3f} s")
    print(f"  per point: probe {t_probe / len(sample) * 1e3:.3f} ms, spectral {t_spec / len(sample) * 1e3:.3f} ms, "
          f"max dev {dev:.1e}")
    reference = None
    for w in workers_list:
        t_scan, res = _timed(lambda: scan_time(spec, rest, grid, kernel=kernel, workers=w))
        same = reference is None or res.to_csv() == reference
        reference = reference or res.to_csv()
        print(f"  scan {points} points, workers={w}: {t_scan:.3f} s, identical to first run: {same}")


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sites", type=int, nargs="+", default=[4, 6, 8])
    parser.add_argument("--points", type=int, default=200)
    parser.add_argument("--workers", type=int, nargs="+", default=[1, 4])
    parser.add_argument("--probe-points", type=int, default=10, help="grid points timed with probe evolution")
    args = parser.parse_args(argv)
    for n in args.sites:
        bench(n, args.points, args.workers, args.probe_points)


if __name__ == "__main__":
    main()
