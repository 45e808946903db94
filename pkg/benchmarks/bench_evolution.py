#!/usr/bin/env python3
"""Benchmark the stepped propagator: compiled extension vs numpy twin.

The stepped path is the hot loop of van der Waals pulse simulation (one
exact matrix exponential per nanosecond step).  Three implementations are
timed on the same 2*pi-pulse workload:

  dense     numpy eigendecomposition of the full Hamiltonian per step
            (the assumption-free reference),
  python    numpy twin of the blocked closed-form kernel,
  compiled  the Cython kernel, when built.

Also reports the end-to-end cost of one kernel-matrix entry on the
hard-blockade backend for context.

Usage: python benchmarks/bench_evolution.py [--steps N] [--repeats R]
"""

import argparse
import time

import numpy as np

from atomqke import CHADOQ2, triangle_register
from atomqke._evolution_py import evolve_stepped_blocked as blocked_python
from atomqke._evolution_py import evolve_stepped_dense
from atomqke.qke import FeatureMapSpec, KernelEstimator
from atomqke.simulator import LEVEL_G, LEVEL_H, LEVEL_R, BackendMode, PulseSimulator, _embed_drive
from atomqke.waveform import BlackmanWaveform, midpoint_areas

try:
    from atomqke._evolution import evolve_stepped_blocked as blocked_compiled
except ImportError:
    blocked_compiled = None


def _timed(fn) -> float:
    start = time.perf_counter()
    fn()
    return time.perf_counter() - start


def bench_stepped(steps: int, repeats: int):
    register = triangle_register()
    sim = PulseSimulator(register, CHADOQ2, BackendMode.vdw())
    waveform = BlackmanWaveform(amplitude=5.42, duration=steps)
    areas = midpoint_areas(waveform, 1.0)
    atom, phase = 1, 0.0

    psi = np.zeros(27, dtype=np.complex128)
    psi[0] = 1.0
    drive = _embed_drive(phase, atom, 3, LEVEL_R)
    interaction = sim._vdw_diag * 1e-3

    w_levels = sim._vdw_by_level[atom] * 1e-3
    psi_blocked = np.moveaxis(psi.reshape((3, 3, 3)), atom, -1).reshape(-1, 3, 1)
    blocked_args = (
        w_levels[:, LEVEL_G], w_levels[:, LEVEL_R], w_levels[:, LEVEL_H],
        areas, phase, psi_blocked,
    )

    candidates = [
        ("dense", lambda: evolve_stepped_dense(drive, interaction, areas, psi)),
        ("python", lambda: blocked_python(*blocked_args)),
    ]
    if blocked_compiled is not None:
        candidates.append(("compiled", lambda: blocked_compiled(*blocked_args)))

    results = {}
    for name, fn in candidates:
        fn()  # warm up
        results[name] = min(_timed(fn) for _ in range(repeats))
    return results


def bench_kernel_entry():
    estimator = KernelEstimator(
        spec=FeatureMapSpec(), mode=BackendMode.hard_blockade()
    )
    x1 = np.array([1.0, 2.0, 3.0])
    x2 = np.array([0.5, 1.5, 2.5])
    estimator.entry(x1, x2, 1000, seed=1)  # warm up
    start = time.perf_counter()
    n = 20
    for k in range(n):
        estimator.entry(x1, x2, 1000, seed=k)
    return (time.perf_counter() - start) / n


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--steps", type=int, default=2761,
                        help="integrator steps (default: one 2*pi pulse)")
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    print(f"stepped 2*pi pulse on the 3-atom register, {args.steps} steps of 1 ns:")
    results = bench_stepped(args.steps, args.repeats)
    for name, total in results.items():
        print(f"  {name:>8}: {total * 1e3:9.2f} ms  ({total / args.steps * 1e6:8.2f} us/step)")
    if "compiled" in results:
        print(f"  compiled speedup vs python twin: "
              f"{results['python'] / results['compiled']:.1f}x")
        print(f"  compiled speedup vs dense ref:   "
              f"{results['dense'] / results['compiled']:.0f}x")
    else:
        print("  compiled kernel not built; install with Cython to compare")

    per_entry = bench_kernel_entry()
    print(f"hard-blockade kernel entry (compile + evolve + 1000 shots): "
          f"{per_entry * 1e3:.1f} ms")


if __name__ == "__main__":
    main()
