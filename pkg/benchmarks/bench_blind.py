"""Throughput comparison of the tracking-kernel backends.

Runs the same cyclic tracking workload through the compiled kernel and
the numpy fallback and reports updates per second.  The workload matches
the trajectory experiment's hot loop: one weight vector updated in place
over a reused packet.

    python3 benchmarks/bench_blind.py
    python3 benchmarks/bench_blind.py --num-antennas 256 --updates 500000
"""

import argparse
import time

import numpy as np

from cmtmimo import _kernel_py

try:
    from cmtmimo import _kernel
except ImportError:
    _kernel = None


def make_workload(num_antennas, packet_len, seed):
    rng = np.random.default_rng(seed)
    h = (
        rng.standard_normal(num_antennas) + 1j * rng.standard_normal(num_antennas)
    ) / np.sqrt(2)
    w = h / np.real(np.vdot(h, h))
    s = rng.choice([-1.0, 1.0], size=packet_len)
    packet = np.outer(s + 1j * rng.standard_normal(packet_len), h)
    packet += 0.05 * (
        rng.standard_normal((packet_len, num_antennas))
        + 1j * rng.standard_normal((packet_len, num_antennas))
    )
    norms = np.ascontiguousarray(np.einsum("ij,ij->i", packet, packet.conj()).real)
    return w, packet, norms


def run_backend(impl, w0, packet, norms, updates, mu):
    w = w0.copy()
    start = time.perf_counter()
    impl.track_segment(w, packet, norms, 0, updates, mu, 1e-12, 1.0, True, None)
    elapsed = time.perf_counter() - start
    return elapsed, w


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--num-antennas", type=int, default=128)
    parser.add_argument("--packet-len", type=int, default=1000)
    parser.add_argument("--updates", type=int, default=200_000)
    parser.add_argument("--mu", type=float, default=0.05)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    w0, packet, norms = make_workload(args.num_antennas, args.packet_len, args.seed)
    backends = [("numpy", _kernel_py)]
    if _kernel is not None:
        backends.append(("cython", _kernel))
    else:
        print("compiled kernel not available; benchmarking the fallback only")

    print(
        f"N={args.num_antennas}, packet={args.packet_len}, "
        f"updates={args.updates}, mu={args.mu}"
    )
    results = {}
    final = {}
    for name, impl in backends:
        best = np.inf
        for _ in range(args.repeats):
            elapsed, w = run_backend(impl, w0, packet, norms, args.updates, args.mu)
            best = min(best, elapsed)
        results[name] = best
        final[name] = w
        print(f"{name:>7}: {best:8.3f} s   {args.updates / best:12.0f} updates/s")

    if len(results) == 2:
        drift = np.max(np.abs(final["cython"] - final["numpy"])) / np.max(
            np.abs(final["numpy"])
        )
        print(f"speedup: {results['numpy'] / results['cython']:.1f}x")
        print(f"final-weight relative difference: {drift:.2e}")


if __name__ == "__main__":
    main()
