#!/usr/bin/env python3
"""Throughput of the trial kernels: compiled backend vs numpy lockstep.

Two workloads run on both backends (the numpy one in a subprocess with
SMOOTHSGD_NO_NUMBA=1):

  quadratic   arithmetic-only steps; checksums are bit-identical across
              backends, demonstrating the shared integer RNG and step order
  double-well exp on every step (iterates live inside the bump support);
              checksums may drift apart because numpy's vectorized exp and
              libm disagree in the last ulp and the dynamics are chaotic

The first compiled call is excluded from timing via a warmup run.

Usage: python3 benchmarks/kernel_throughput.py [--trials N] [--steps T]
"""

import argparse
import os
import subprocess
import sys

WORK = """
import time
import smoothsgd as sgd

cases = [
    ("quadratic", sgd.quadratic(1.0), sgd.RunConfig(eta=0.2, T={steps}, seed=1234,
     trials={trials}, w0_kind="uniform", w0_a=-1.0, w0_b=2.0)),
    ("double-well", sgd.sym_bump(0.2), sgd.RunConfig(eta=0.2, T={steps}, seed=1234,
     trials={trials}, w0_kind="uniform", w0_a=-1.5, w0_b=1.5)),
]
for name, spec, cfg in cases:
    warm = sgd.RunConfig(eta=0.2, T=64, seed=1, trials=2)
    sgd.run_trials(spec, sgd.uniform_noise(1.0), warm, 0.0)
    t0 = time.monotonic()
    trajs, _ = sgd.run_trials(spec, sgd.uniform_noise(1.0), cfg, 0.0)
    dt = time.monotonic() - t0
    total = cfg.T * cfg.trials
    print(f"{{sgd.backend():>6}} {{name:<11}} {{total/1e6:8.1f}}M steps in "
          f"{{dt:6.2f}}s -> {{total/dt/1e6:7.1f}}M steps/s  "
          f"(checksum {{sum(t.final_w for t in trajs):.12g}})")
"""


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--trials", type=int, default=200)
    parser.add_argument("--steps", type=int, default=100_000)
    args = parser.parse_args()
    code = WORK.format(steps=args.steps, trials=args.trials)
    for force_numpy in (False, True):
        env = dict(os.environ)
        env.pop("SMOOTHSGD_NO_NUMBA", None)
        if force_numpy:
            env["SMOOTHSGD_NO_NUMBA"] = "1"
        subprocess.run([sys.executable, "-c", code], env=env, check=True)
    return 0


if __name__ == "__main__":
    sys.exit(main())
