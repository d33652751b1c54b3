#!/usr/bin/env python3
"""Varignon's theorem: prove the first formulation, check the hand-transcribed
second proof, and illustrate the first on a generic quadrilateral."""
import argparse
import sys
from pathlib import Path

from proofsketch.cli import main
from proofsketch.interp import default_data_dir
from proofsketch.prover import check_proof
from proofsketch.tptp import load_problem

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "tests"))
import transcribed  # noqa: E402


def run(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=Path("out/varignon"))
    ap.add_argument("--square", action="store_true", help="use the unit-square premise model")
    args = ap.parse_args(argv)
    data = default_data_dir()
    exists = "varignon_square_exists.gcl" if args.square else "th_varignon_exists.gcl"
    code = main(["illustrate", str(data / "tptp" / "varignon_1.p"), "--animate",
                 "--exists", str(data / "gcl" / exists), "--out", str(args.out)])
    if code:
        return code
    print((args.out / "th_varignon.proof.txt").read_text(), end="")
    prob = load_problem((data / "tptp" / "varignon_2.p").read_text())
    second = transcribed.varignon2(prob.theory, prob.conjecture())
    print(f"second proof, transcribed by hand: "
          f"{check_proof(prob.theory, prob.conjecture(), second)}")
    return 0


if __name__ == "__main__":
    sys.exit(run())
