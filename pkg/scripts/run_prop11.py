#!/usr/bin/env python3
"""Prove Euclid I.11 and write its animated illustration.

By default the premise points come from the bundled hand-written
procedure; pass --kit to construct them from a proof of their existence.
"""
import argparse
import sys
from pathlib import Path

from proofsketch.cli import main
from proofsketch.interp import default_data_dir


def run(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=Path("out/proposition_11"))
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--kit", action="store_true", help="realize the premises by proof search")
    args = ap.parse_args(argv)
    data = default_data_dir()
    cmd = ["illustrate", str(data / "tptp" / "proposition_11.p"), "--animate",
           "--seed", str(args.seed), "--out", str(args.out)]
    if not args.kit:
        cmd += ["--exists", str(data / "gcl" / "proposition_11_exists.gcl")]
    code = main(cmd)
    if code == 0:
        print((args.out / "proposition_11.proof.txt").read_text(), end="")
        print((args.out / "proposition_11.gcl").read_text(), end="")
    return code


if __name__ == "__main__":
    sys.exit(run())
