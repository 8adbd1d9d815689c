#!/usr/bin/env python3
"""Benchmark the numba-jitted kernels against the pure-numpy fallback.

Run without arguments to time both backends (each in its own process, since
the backend is fixed at import) and print a comparison table:

    python3 benchmarks/bench_backends.py

`--single` times only the backend selected by MOIRE_LADDER_NUMBA and prints
JSON; the parent process uses it for the two children.
"""
import argparse
import json
import os
import subprocess
import sys
import time

import numpy as np

REPEATS = 3


def _time(fn):
    fn()  # warm-up / compilation
    best = float("inf")
    for _ in range(REPEATS):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def run_suite():
    import moire_ladder as ml

    rng = np.random.default_rng(1)
    results = {"backend": ml.backend()}

    a80 = rng.standard_normal((80, 80)) + 1j * rng.standard_normal((80, 80))
    results["eig dim-80 ladder"] = _time(lambda: ml.eig(a80))

    kernels = np.stack(
        [ml.crossover_kernel(
            ml.ModelParams(w=0.5, v=0.1, kappa_prime=0.37, gamma=0.3), k)
         for k in ml.k_grid(512)]
    )
    results["eigvals 512 x 4x4 kernels"] = _time(lambda: ml.eigvals_batch(kernels))

    a256 = rng.standard_normal((256, 256)) + 1j * rng.standard_normal((256, 256))
    a256 *= 2.0 / np.linalg.norm(a256, 1)
    results["expm dim-256"] = _time(lambda: ml.expm(a256))

    p = ml.ModelParams(w=0.5, v=0.1, kappa=1.0, gamma=0.395, cells=16)
    h64 = ml.build_tetramerized(p)
    psi64 = ml.uniform_state(64)
    results["rk4 dim-64, 2000 steps"] = _time(
        lambda: ml.integrate_schrodinger(h64, psi64, 2.0, 1e-3))

    spec = ml.MoireSpec(n_sites_1=224, mismatch=1.0 / 51.0)
    hm = ml.build_moire(spec, ml.ModelParams(w=0.5, v=0.1, gamma=0.2))
    psi = ml.uniform_state(hm.shape[0])
    results["evolve dim-451, 400 samples"] = _time(
        lambda: ml.evolve(hm, psi, 20.0, 0.05))

    results["gamma_c crossover (512-point scan)"] = _time(
        lambda: ml.critical_gamma("crossover", 0.1, 0.5, 0.37, tol=1e-6))

    return results


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--single", action="store_true",
                        help="time the current backend only, emit JSON")
    args = parser.parse_args()
    if args.single:
        print(json.dumps(run_suite()))
        return

    reports = {}
    for flag in ("1", "0"):
        env = dict(os.environ, MOIRE_LADDER_NUMBA=flag)
        out = subprocess.run(
            [sys.executable, os.path.abspath(__file__), "--single"],
            env=env, capture_output=True, text=True, check=True,
        )
        report = json.loads(out.stdout.splitlines()[-1])
        reports[report.pop("backend")] = report

    names = list(next(iter(reports.values())))
    width = max(len(n) for n in names)
    print(f"{'workload':<{width}}  {'numba':>10}  {'numpy':>10}  {'speedup':>8}")
    for name in names:
        t_nb = reports.get("numba", {}).get(name)
        t_np = reports.get("numpy", {}).get(name)
        if t_nb is None or t_np is None:
            continue
        print(f"{name:<{width}}  {t_nb * 1e3:>8.1f}ms  {t_np * 1e3:>8.1f}ms  "
              f"{t_np / t_nb:>7.1f}x")
    if "numba" not in reports:
        print("note: numba unavailable; only the numpy fallback was timed")


if __name__ == "__main__":
    main()
