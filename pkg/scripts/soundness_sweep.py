#!/usr/bin/env python3
"""Prove many small random theories and cross-check every proof found
against the replay checker and an exhaustive finite-model search."""
import argparse
import sys
import time
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "tests"))

from oracle import countermodel  # noqa: E402
from test_prover import random_problem  # noqa: E402

from proofsketch.prover import Proof, SearchLimits, check_proof, prove  # noqa: E402


def run(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--start", type=int, default=0)
    ap.add_argument("-n", type=int, default=500)
    ap.add_argument("--max-domain", type=int, default=3)
    args = ap.parse_args(argv)
    t0 = time.perf_counter()
    proved = unsound = 0
    for seed in range(args.start, args.start + args.n):
        theory, conj = random_problem(seed)
        p = prove(theory, conj, SearchLimits(3, 2.0))
        if not isinstance(p, Proof):
            continue
        proved += 1
        if not check_proof(theory, conj, p) or countermodel(theory, conj, args.max_domain):
            unsound += 1
            print(f"seed {seed}: unsound proof", file=sys.stderr)
    print(f"{args.n} theories, {proved} proved, {unsound} unsound, "
          f"{time.perf_counter() - t0:.1f} s")
    return 1 if unsound else 0


if __name__ == "__main__":
    sys.exit(run())
