"""Compare the compiled and numpy kernel backends.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--fits 2000]

Times the readout fit used inside sweeps (thousands of small least-squares
problems) and the batched outcome probabilities, then a short end-to-end
sweep under each backend in a fresh interpreter.
"""
import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from photonic_qelm import kernels

SWEEP = (
    "import time; from photonic_qelm import kernels, two_step_walk, CoinParams, PolarizationState;"
    "from photonic_qelm.harness import ExperimentConfig, run_sweep;"
    "w = two_step_walk(CoinParams(2.86, 3.69, 5.28), PolarizationState(2**-0.5, 2**-0.5));"
    "cfg = ExperimentConfig(w, n_train_grid=(2, 5, 10, 20, 50, 100), repetitions={reps});"
    "ts = [];\n"
    "for _ in range({repeat}): t = time.perf_counter(); run_sweep(cfg); ts.append(time.perf_counter() - t)\n"
    "print(kernels.BACKEND, min(ts))"
)


def bench_fits(mod, F, T, splits):
    def run():
        for tr, te in splits:
            mod.fit_predict_mse(F, T, tr, te, 1e-10, 0.0)

    return run


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--fits", type=int, default=2000)
    ap.add_argument("--reps", type=int, default=500, help="repetitions in the end-to-end sweep")
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    F = np.ascontiguousarray(np.hstack([rng.uniform(size=(450, 5)), np.ones((450, 1))]))
    T = np.ascontiguousarray(rng.uniform(-1, 1, size=(450, 3)))
    splits = []
    for k in range(args.fits):
        perm = rng.permutation(450)
        n = (2, 5, 10, 20, 50, 100)[k % 6]
        splits.append((perm[:n].astype(np.intp), perm[n : n + 150].astype(np.intp)))
    A = rng.standard_normal((5, 2)) + 1j * rng.standard_normal((5, 2))
    psi = rng.standard_normal((4500, 2)) + 1j * rng.standard_normal((4500, 2))

    print(f"{'kernel':28s}" + "".join(f"{b:>14s}" for b in kernels.available_backends()))
    rows = {
        f"fit_predict_mse x{args.fits}": lambda m: bench_fits(m, F, T, splits),
        "outcome_probabilities 4500": lambda m: (lambda: m.outcome_probabilities(A, psi)),
    }
    for label, make in rows.items():
        cells = []
        for name in kernels.available_backends():
            t = min(timeit.repeat(make(kernels.backend(name)), number=1, repeat=args.repeat))
            cells.append(f"{t * 1e3:11.2f} ms")
        print(f"{label:28s}" + "".join(f"{c:>14s}" for c in cells))

    print(f"\nend-to-end sweep, {args.reps} repetitions x 6 training sizes (best of {args.repeat}):")
    for flag in ("0", "1"):
        env = dict(os.environ, PHOTONIC_QELM_PURE_PYTHON=flag)
        out = subprocess.run([sys.executable, "-c", SWEEP.format(reps=args.reps, repeat=args.repeat)], env=env, capture_output=True,
                             text=True, check=True)
        name, secs = out.stdout.split()
        print(f"  {name:10s} {float(secs):8.3f} s")


if __name__ == "__main__":
    main()
