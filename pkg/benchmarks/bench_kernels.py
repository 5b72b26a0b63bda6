"""Time the compiled and numpy estimator kernels on the same inputs.

Usage: ``python3 benchmarks/bench_kernels.py [--trials T] [--sensors N] [--repeat R]``
"""
import argparse
import timeit

import numpy as np

from rssdoa import _pykernels, kernels
from rssdoa.scenario import PlacementDistribution, compute_geometry, sample_uniform_placement

try:
    from rssdoa import _ckernels
except ImportError:
    _ckernels = None


def make_inputs(trials, sensors, seed=0):
    rng = np.random.default_rng(seed)
    s = sample_uniform_placement(PlacementDistribution(), sensors, rng)
    g = compute_geometry(s)
    psi = 1e-9 * np.exp(rng.normal(0, 0.5, (trials, sensors)))
    theta_hat = g.theta + rng.normal(0, 0.02, (trials, sensors))
    return s, psi, theta_hat


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=2000)
    ap.add_argument("--sensors", type=int, default=15)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    s, psi, th = make_inputs(args.trials, args.sensors)
    impls = {"python": _pykernels}
    if _ckernels is not None:
        impls["cython"] = _ckernels
    cases = {
        "wcl_batch": lambda m: kernels.wcl_batch(s.positions, psi, impl=m),
        "stansfield_batch/optimal": lambda m: kernels.stansfield_batch(
            s.positions, s.orientations, psi, th, False, 0.0, impl=m),
        "stansfield_batch/music": lambda m: kernels.stansfield_batch(
            s.positions, s.orientations, psi, th, True, 5e-12, impl=m),
    }
    print(f"trials={args.trials} sensors={args.sensors} default backend={kernels.BACKEND}")
    print(f"{'kernel':<26}" + "".join(f"{k + ' [ms]':>14}" for k in impls) + f"{'speedup':>10}")
    for name, fn in cases.items():
        best = {}
        for label, mod in impls.items():
            n, _ = timeit.Timer(lambda: fn(mod)).autorange()
            best[label] = min(timeit.repeat(lambda: fn(mod), number=n, repeat=args.repeat)) / n
        ratio = best["python"] / best["cython"] if "cython" in best else float("nan")
        print(f"{name:<26}" + "".join(f"{1e3 * v:>14.3f}" for v in best.values())
              + f"{ratio:>9.1f}x")


if __name__ == "__main__":
    main()
