"""Benchmark: numba kernel vs pure-numpy fallback for hit-and-run.

Runs the same seeded sampling workload through both stepping kernels and
reports wall time and per-step cost.  The streams are bit-identical, so
the comparison is purely about speed.

    python3 benchmarks/bench_sampler.py [--dims 4,16,48] [--samples 1000]
"""
from __future__ import annotations

import argparse
import os
import time

# The kernel backend is chosen per call from the environment, so the flag
# must be managed around each timed run (not just at import time).
from fractions import Fraction

from ordpoly._kernels import numba_available
from ordpoly.model import ConstraintSet
from ordpoly.sampler import SamplerConfig, _Walk, _raw_samples


def chain_instance(d: int) -> ConstraintSet:
    """A d-unknown chain pinned between 1/10 and 9/10 — every step's chord
    must respect d+1 pair constraints, a representative dense-ish load."""
    names = ["lo"] + [f"u{i}" for i in range(d)] + ["hi"]
    edges = [(names[i], names[i + 1]) for i in range(len(names) - 1)]
    return ConstraintSet(names, edges, {"lo": Fraction(1, 10), "hi": Fraction(9, 10)})


def run(d: int, samples: int, force_numpy: bool) -> tuple[float, int]:
    if force_numpy:
        os.environ["ORDPOLY_NO_NUMBA"] = "1"
    else:
        os.environ.pop("ORDPOLY_NO_NUMBA", None)
    walk = _Walk(chain_instance(d))
    cfg = SamplerConfig(seed=2024)
    burn_in, thinning = cfg.resolved(walk.dimension)
    steps = burn_in + samples * thinning
    start = time.perf_counter()
    out = _raw_samples(walk, cfg, samples, cfg.seed)
    elapsed = time.perf_counter() - start
    assert out.shape == (samples, d)
    return elapsed, steps


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--dims", default="4,16,48", help="comma-separated dimensions")
    ap.add_argument("--samples", type=int, default=1000, help="kept samples per run")
    args = ap.parse_args()
    dims = [int(s) for s in args.dims.split(",")]

    if numba_available():
        # Warm the JIT cache outside the timed region.
        run(2, 10, force_numpy=False)
    else:
        print("numba is not importable; only the numpy path will run")

    header = f"{'dim':>5} {'steps':>9} {'numpy':>10} {'numba':>10} {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for d in dims:
        t_np, steps = run(d, args.samples, force_numpy=True)
        line = f"{d:>5} {steps:>9} {t_np:>9.3f}s"
        if numba_available():
            t_nb, _ = run(d, args.samples, force_numpy=False)
            line += f" {t_nb:>9.3f}s {t_np / t_nb:>7.1f}x"
        else:
            line += f" {'-':>10} {'-':>8}"
        print(line)


if __name__ == "__main__":
    main()
