"""Time each hot kernel under the numba and pure-numpy backends.

    python3 benchmarks/bench_kernels.py [--repeat 3]

Numba compile time is excluded (one warm-up call per kernel) and reported
separately. Also checks that both backends return the same numbers.
"""
import argparse
import math
import time

import numpy as np

from bmfqfi import kernels


def cases():
    y_bmf = np.array([1.0, 0, 0, 0, 0, 0, 0, 0.005, 0.005])
    s0 = np.array([1.0, 0.0, 0.0])
    direction = np.array([0.0, 1.0, 1.0]) / math.sqrt(2)
    N = 200
    mu = np.arange(N + 1) - N / 2
    diag = -(1.0 / N) * mu**2
    off = 0.5 * np.sqrt((N / 2 - mu[:-1]) * (N / 2 + mu[:-1] + 1))
    psi = np.zeros(N + 1, dtype=complex)
    psi[-1] = 1.0
    return {
        "bmf_rk4 (20k steps)": lambda b: b.bmf_rk4(y_bmf, 0.4 * math.pi, 0.0, math.pi, 0.0, 1e-3, 20000),
        "hp_rk4 (20k steps)": lambda b: b.hp_rk4(np.array([0.5, 0.5, 0.0]), 1.0, 0.0, 2.0, 0.0, 1e-3, 20000),
        "mf_benettin (50 periods)": lambda b: b.mf_benettin(
            s0, direction, 0.4 * math.pi, 0.8 * math.pi, 1.0, 0.01, 200, 50, 1e-5),
        "ramp_rk4 (N=200, 2k steps)": lambda b: b.ramp_rk4(psi, diag, off, 0.0, 1e-3, 0.0, 1e-2, 2000)[0],
    }


def best_time(fn, repeat):
    best = math.inf
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return best, out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    backends = {"numpy": kernels.numpy_backend()}
    try:
        backends["numba"] = kernels.numba_backend()
    except RuntimeError:
        print("numba not installed; timing the numpy path only")
    print(f"{'kernel':30s} {'numpy [s]':>10s} {'numba [s]':>10s} {'speedup':>8s} {'compile [s]':>11s}")
    for name, case in cases().items():
        times, outs = {}, {}
        compile_s = math.nan
        for bname, b in backends.items():
            if bname == "numba":
                t = time.perf_counter()
                case(b)
                compile_s = time.perf_counter() - t
            times[bname], outs[bname] = best_time(lambda: case(b), args.repeat)
        nb = times.get("numba", math.nan)
        print(f"{name:30s} {times['numpy']:10.4f} {nb:10.4f} {times['numpy'] / nb:8.1f} {compile_s:11.2f}")
        if "numba" in outs:
            diff = np.max(np.abs(np.asarray(outs["numba"]) - np.asarray(outs["numpy"])))
            scale = max(1.0, np.max(np.abs(np.asarray(outs["numpy"]))))
            if diff > 1e-10 * scale:
                print(f"  backends disagree by {diff:.3g}")


if __name__ == "__main__":
    main()
