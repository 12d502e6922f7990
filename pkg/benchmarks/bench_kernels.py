"""Compare the compiled polynomial kernels with the pure-Python fallback.

Two measurements:

* micro: ``poly_mul`` / ``poly_add_into`` on random sparse polynomials,
  calling both modules directly;
* end to end: ``expand_system`` run in a subprocess once per backend
  (``QKPZ_PURE_PYTHON=1`` forces the fallback).

Usage: ``python benchmarks/bench_kernels.py [--noises N] [--repeat R]``.
"""
from __future__ import annotations

import argparse
import os
import random
import subprocess
import sys
import timeit
from fractions import Fraction
from pathlib import Path

SRC = Path(__file__).resolve().parent.parent / "src"
sys.path.insert(0, str(SRC))

from qkpz import _kernels  # noqa: E402

try:
    from qkpz import _speedups  # noqa: E402
except ImportError:
    _speedups = None


def random_poly(rng: random.Random, terms: int, atoms: int = 12) -> dict:
    out = {}
    for _ in range(terms):
        codes = sorted(rng.sample(range(atoms), rng.randint(1, 4)))
        mono = tuple((c, rng.randint(1, 3)) for c in codes)
        grade = 0 if rng.random() < 0.8 else rng.randint(1, 2)
        out[(grade, mono)] = Fraction(rng.randint(-9, 9) or 1, rng.randint(1, 4))
    return out


def micro(mod, pairs, repeat: int) -> float:
    def work():
        acc = {}
        for p1, p2 in pairs:
            mod.poly_add_into(acc, mod.poly_mul(p1, p2))
    return min(timeit.repeat(work, number=1, repeat=repeat))


def end_to_end(noises: int, pure: bool) -> float:
    env = dict(os.environ, PYTHONPATH=str(SRC))
    if pure:
        env["QKPZ_PURE_PYTHON"] = "1"
    code = ("import time; from qkpz import BACKEND; from qkpz.coherence import expand_system;"
            f"t = time.perf_counter(); expand_system({noises}); print(BACKEND, time.perf_counter() - t)")
    out = subprocess.run([sys.executable, "-c", code], env=env, check=True,
                         capture_output=True, text=True).stdout.split()
    return float(out[1])


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--noises", type=int, default=3)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--pairs", type=int, default=200)
    args = ap.parse_args(argv)

    rng = random.Random(0)
    pairs = [(random_poly(rng, 20), random_poly(rng, 20)) for _ in range(args.pairs)]
    py = micro(_kernels, pairs, args.repeat)
    print(f"micro  python   {py * 1e3:9.2f} ms")
    if _speedups is None:
        print("compiled kernels not built; run `python setup.py build_ext --inplace`")
        return
    for p1, p2 in pairs[:20]:
        assert _speedups.poly_mul(p1, p2) == _kernels.poly_mul(p1, p2)
    cy = micro(_speedups, pairs, args.repeat)
    print(f"micro  compiled {cy * 1e3:9.2f} ms  speedup {py / cy:.2f}x")

    e_py = end_to_end(args.noises, pure=True)
    e_cy = end_to_end(args.noises, pure=False)
    print(f"expand_system({args.noises})  python {e_py:.2f} s  compiled {e_cy:.2f} s  "
          f"speedup {e_py / e_cy:.2f}x")


if __name__ == "__main__":
    main()
