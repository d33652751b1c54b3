"""Command line: prove, illustrate and render.

Exit codes: 0 success, 1 input error, 2 no proof found, 3 illustration
failure.  The default output directory comes from ``PROOFSKETCH_OUT``
(falling back to ``./out``).
"""

from __future__ import annotations

import argparse
import logging
import os
import random
import sys
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from . import gcl
from .formula import FormulaError
from .illustrate import (
    BranchPolicy,
    CompileOptions,
    IllustrationError,
    compile_proof,
    contradictory,
)
from .interp import (
    InterpError,
    NondegeneracyOptions,
    default_data_dir,
    exists_procedure_text,
    load_registry,
    premises_conjecture,
    realize_from_gcl,
    realize_from_proof,
)
from .geometry import GeometryError
from .proofdoc import RenderOptions, render_text, used_axioms
from .prover import (
    Proof,
    SearchLimits,
    check_proof,
    proof_from_json,
    proof_to_json,
    prove,
)
from .tptp import Problem, TptpError, format_tptp, load_problem

log = logging.getLogger("proofsketch")

EXIT_OK, EXIT_INPUT, EXIT_UNPROVABLE, EXIT_ILLUSTRATE = 0, 1, 2, 3
EMIT_CHOICES = ("gcl", "svg", "proof-text", "proof-json")


class InputError(Exception):
    pass


@dataclass
class PipelineConfig:
    input: Path
    conjecture: Optional[str] = None
    extra_inputs: list[Path] = field(default_factory=list)
    manifests: list[Path] = field(default_factory=list)
    gcl_dirs: list[Path] = field(default_factory=list)
    exists: Optional[Path] = None
    proof: Optional[Path] = None
    seed: int = 0
    max_mp_steps: int = 12
    timeout: float = 60.0
    max_constants: int = 40
    fallback: str = "prefer-complement"
    out: Path = Path("out")
    animate: bool = False
    hide_simple: bool = True
    text_format: str = "plain"
    emit: tuple[str, ...] = EMIT_CHOICES
    pairwise_neq: bool = True
    ncol: list[tuple[str, str, str]] = field(default_factory=list)

    @property
    def limits(self) -> SearchLimits:
        return SearchLimits(self.max_mp_steps, self.timeout, self.max_constants)


def write_atomic(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _read(path: Path) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise InputError(f"cannot read {path}: {e.strerror}") from None


def load(cfg: PipelineConfig, extra_texts: Sequence[str] = ()) -> Problem:
    texts = [_read(cfg.input), *(_read(p) for p in cfg.extra_inputs), *extra_texts]
    try:
        return load_problem(texts)
    except (TptpError, FormulaError) as e:
        raise InputError(str(e)) from None


def obtain_proof(cfg: PipelineConfig, problem: Problem):
    """(conjecture, proof or Unprovable)."""
    try:
        conj = problem.conjecture(cfg.conjecture)
    except (TptpError, KeyError) as e:
        raise InputError(f"conjecture: {e}") from None
    if cfg.proof is not None:
        try:
            p = proof_from_json(_read(cfg.proof))
        except (ValueError, KeyError, TypeError) as e:
            raise InputError(f"cannot read proof {cfg.proof}: {e}") from None
        verdict = check_proof(problem.theory, conj, p)
        if not verdict:
            raise InputError(f"proof {cfg.proof} does not check: step {verdict.step_index}: "
                             f"{verdict.reason}")
        return conj, p
    return conj, prove(problem.theory, conj, cfg.limits)


def cmd_prove(cfg: PipelineConfig) -> int:
    problem = load(cfg)
    conj, p = obtain_proof(cfg, problem)
    if not isinstance(p, Proof):
        print(f"no proof of {conj.name}: {p.reason}", file=sys.stderr)
        return EXIT_UNPROVABLE
    verdict = check_proof(problem.theory, conj, p)
    if not verdict:  # pragma: no cover - prove() only returns checked-shape proofs
        print(f"internal error: proof rejected at step {verdict.step_index}: {verdict.reason}",
              file=sys.stderr)
        return EXIT_UNPROVABLE
    if "proof-json" in cfg.emit:
        write_atomic(cfg.out / f"{conj.name}.proof.json", proof_to_json(p))
    if "proof-text" in cfg.emit:
        text = render_text(p, problem.theory, RenderOptions(cfg.hide_simple, cfg.text_format))
        write_atomic(cfg.out / f"{conj.name}.proof.txt", text)
    print(f"{conj.name}: proved ({p.statistics['mp_count']} MP steps, "
          f"choice depth {p.statistics['choice_depth']})")
    print("used axioms: " + ", ".join(used_axioms(p, problem.theory)))
    return EXIT_OK


def _exists_override(path: Path, name: str) -> tuple[str, str]:
    """(text, procedure name) of a hand-written existence procedure."""
    text = _read(path)
    try:
        procs = gcl.parse_gcl(text, None, source=str(path)).procedures()
    except gcl.GclError as e:
        raise InputError(str(e)) from None
    if name in procs:
        return text, name
    if len(procs) == 1:
        return text, next(iter(procs))
    raise InputError(f"{path}: expected a procedure named {name}")


def cmd_illustrate(cfg: PipelineConfig) -> int:
    problem = load(cfg)
    conj, p = obtain_proof(cfg, problem)
    if not isinstance(p, Proof):
        print(f"no proof of {conj.name}: {p.reason}", file=sys.stderr)
        return EXIT_UNPROVABLE
    if "proof-json" in cfg.emit:
        write_atomic(cfg.out / f"{conj.name}.proof.json", proof_to_json(p))
    if "proof-text" in cfg.emit:
        text = render_text(p, problem.theory, RenderOptions(cfg.hide_simple, cfg.text_format))
        write_atomic(cfg.out / f"{conj.name}.proof.txt", text)

    if contradictory(list(p.body)):
        print(f"illustration failed: the premises of {conj.name} are contradictory, "
              "so there is nothing to illustrate", file=sys.stderr)
        return EXIT_ILLUSTRATE
    consts = list(p.intro.constants)
    var_to_const = dict(zip(conj.universals, consts))
    ncol_vars = []
    for t in cfg.ncol:
        # triples may name either conjecture variables or premise constants
        inv = {c: v for v, c in var_to_const.items()}
        ncol_vars.append(tuple(inv.get(x, x) for x in t))
    nd = NondegeneracyOptions(cfg.pairwise_neq, tuple(ncol_vars))
    exists_conj = premises_conjecture(conj, nd)
    write_atomic(cfg.out / f"{exists_conj.name}.tptp",
                 format_tptp(exists_conj, "conjecture", problem.theory.signature) + "\n")
    ncol_consts = [tuple(var_to_const.get(v, v) for v in t) for t in ncol_vars]
    try:
        reg = load_registry(cfg.manifests, cfg.gcl_dirs)
        if cfg.exists is not None:
            ex_text, ex_name = _exists_override(cfg.exists, exists_conj.name)
            model = realize_from_gcl(ex_text, ex_name, consts, reg, cfg.seed, ncol_consts)
        else:
            kit = (default_data_dir() / "tptp" / "construction_kit.p").read_text()
            kit_problem = load(cfg, [kit])
            ep = prove(kit_problem.theory, exists_conj, cfg.limits)
            if not isinstance(ep, Proof):
                print(f"cannot realize the premises of {conj.name}: {ep.reason}", file=sys.stderr)
                return EXIT_ILLUSTRATE
            model = realize_from_proof(ep, consts, reg, cfg.seed, ncol_consts)
            ex_name = exists_conj.name
            ex_text = exists_procedure_text(ex_name, consts, model)
        doc, final = compile_proof(p, problem.theory, model, reg, BranchPolicy(cfg.fallback),
                                   CompileOptions(animate=cfg.animate), ex_text, ex_name)
        if "gcl" in cfg.emit:
            for name, text in doc.files().items():
                write_atomic(cfg.out / name, text)
        if "svg" in cfg.emit:
            scene = doc.scene(reg, cfg.seed)
            _write_frames(scene, cfg.out, conj.name, cfg.animate)
    except (IllustrationError, InterpError, GeometryError, gcl.GclError) as e:
        print(f"illustration failed: {e}", file=sys.stderr)
        return EXIT_ILLUSTRATE
    print(f"{conj.name}: illustration written to {cfg.out}")
    return EXIT_OK


def _write_frames(scene: gcl.Scene, out: Path, stem: str, all_frames: bool) -> int:
    frames = gcl.frames(scene)
    if all_frames:
        for fr in frames:
            write_atomic(out / "frames" / f"frame_{fr.index}.svg", gcl.render_svg(scene, fr))
        return len(frames)
    write_atomic(out / f"{stem}.svg", gcl.render_svg(scene, frames[-1]))
    return 1


def _file_resolver(base: Path):
    lib = default_data_dir() / "gcl"

    def resolve(name: str) -> str:
        for d in (base, lib):
            f = d / name
            if f.is_file():
                return f.read_text(encoding="utf-8")
        raise KeyError(name)
    return resolve


def cmd_render(path: Path, out: Path, frames: bool = False, seed: int = 0) -> int:
    try:
        text = _read(path)
        prog = gcl.parse_gcl(text, _file_resolver(path.parent), source=path.name)
        top = [it for it in prog.items if isinstance(it, (gcl.Command, gcl.Call))]
        procs = prog.procedures()
        if not top and len(procs) == 1:
            # a lone procedure file: call it on random points named after its
            # parameters (outputs are simply overwritten)
            proc = next(iter(procs.values()))
            rng = random.Random(seed)
            setup = tuple(gcl.Command("point", (q, f"{rng.uniform(0, 20):.3f}",
                                                 f"{rng.uniform(0, 20):.3f}"))
                          for q in proc.params)
            prog = gcl.GCLProgram(prog.items + setup + (gcl.Call(proc.name, proc.params),))
        scene = gcl.evaluate(prog, seed)
    except (InputError, gcl.GclError, GeometryError) as e:
        print(f"render failed: {e}", file=sys.stderr)
        return EXIT_INPUT
    n = _write_frames(scene, out, path.stem, frames)
    print(f"{path.name}: {n} SVG file(s) written to {out}")
    return EXIT_OK


# --- argument parsing ----------------------------------------------------------------

def _default_out() -> Path:
    return Path(os.environ.get("PROOFSKETCH_OUT", "out"))


def _triple(s: str) -> tuple[str, str, str]:
    parts = [x.strip() for x in s.split(",")]
    if len(parts) != 3 or not all(parts):
        raise argparse.ArgumentTypeError(f"expected three comma-separated names, got {s!r}")
    return tuple(parts)  # type: ignore[return-value]


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="proofsketch",
                                 description="Coherent-logic prover with proof illustrations.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("input", type=Path, help="TPTP file with axioms and a conjecture")
        p.add_argument("--also", dest="extra_inputs", type=Path, action="append", default=[],
                       help="additional TPTP file (repeatable)")
        p.add_argument("--conjecture", help="conjecture name (default: the only one)")
        p.add_argument("--proof", type=Path, help="use this proof-json instead of searching")
        p.add_argument("--max-mp-steps", type=int, default=12)
        p.add_argument("--timeout", type=float, default=60.0)
        p.add_argument("--max-constants", type=int, default=40)
        p.add_argument("--out", type=Path, default=None,
                       help="output directory (default: $PROOFSKETCH_OUT or ./out)")
        p.add_argument("--show-simple", dest="hide_simple", action="store_false",
                       help="list simple-axiom steps in the proof text")
        p.add_argument("--format", dest="text_format", choices=("plain", "latex"),
                       default="plain")
        p.add_argument("--emit", action="append", choices=EMIT_CHOICES,
                       help="artifact kinds to write (repeatable; default: all)")

    p = sub.add_parser("prove", help="search for a proof and write it as text and JSON")
    common(p)

    p = sub.add_parser("illustrate", help="prove, then compile the proof into GCL and SVG")
    common(p)
    p.add_argument("--manifest", dest="manifests", type=Path, action="append", default=[],
                   help="interpretation manifest (repeatable; overrides the defaults)")
    p.add_argument("--gcl-dir", dest="gcl_dirs", type=Path, action="append", default=[])
    p.add_argument("--exists", type=Path, help="hand-written premise procedure (GCL)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--fallback", choices=("prefer-complement", "first-open"),
                   default="prefer-complement")
    p.add_argument("--animate", action="store_true", help="layered animation frames")
    p.add_argument("--no-neq", dest="pairwise_neq", action="store_false",
                   help="do not require premise points to be pairwise distinct")
    p.add_argument("--ncol", type=_triple, action="append", default=[],
                   help="require three premise points to be non-collinear, e.g. A,B,C")

    p = sub.add_parser("render", help="evaluate a GCL file and write SVG")
    p.add_argument("gcl", type=Path)
    p.add_argument("--frames", action="store_true", help="one SVG per animation frame")
    p.add_argument("--out", type=Path, default=None)
    p.add_argument("--seed", type=int, default=0)
    return ap


def config_from_args(ns: argparse.Namespace) -> PipelineConfig:
    cfg = PipelineConfig(input=ns.input)
    for name in ("conjecture", "extra_inputs", "proof", "max_mp_steps", "timeout",
                 "max_constants", "hide_simple", "text_format", "manifests", "gcl_dirs",
                 "exists", "seed", "fallback", "animate", "pairwise_neq", "ncol"):
        if hasattr(ns, name):
            setattr(cfg, name, getattr(ns, name))
    cfg.out = ns.out or _default_out()
    if ns.emit:
        cfg.emit = tuple(ns.emit)
    return cfg


def main(argv: Optional[Sequence[str]] = None) -> int:
    ns = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        if ns.command == "render":
            return cmd_render(ns.gcl, ns.out or _default_out(), ns.frames, ns.seed)
        cfg = config_from_args(ns)
        try:
            cfg.limits
        except ValueError as e:
            raise InputError(str(e)) from None
        if ns.command == "prove":
            return cmd_prove(cfg)
        return cmd_illustrate(cfg)
    except InputError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
