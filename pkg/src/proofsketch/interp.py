"""Visual interpretations: from proof steps to points on the plane.

An interpretation registry maps axiom names to GCL procedures.  The
manifest format is one record per line::

    interp <axiom> inputs(<V>,...) outputs(<V>,...) = <procedure>

``inputs`` name the axiom's universal variables whose values are passed
to the procedure, ``outputs`` its existential variables (bound to the
step's witnesses).  Procedure ``p`` is looked up in ``p.gcl`` in the GCL
library directories.  ``%`` and ``#`` start comments.  Records starting
with ``free`` are reserved for free-point premise schemes and rejected.
"""

from __future__ import annotations

import itertools
import random
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

from . import gcl
from .formula import NEQ, Atom, CoherentFormula, Conjunction, Theory, Var
from .geometry import (
    TOL_BRANCH,
    TOL_CHECK,
    GeoPoint,
    GeometryError,
    area2,
    dist,
    dot,
)
from .prover import MP


class InterpError(Exception):
    pass


class MissingInterpretation(InterpError):
    def __init__(self, axiom: str):
        super().__init__(f"no visual interpretation for {axiom}")
        self.axiom = axiom


class DegenerateModel(InterpError):
    def __init__(self, which: str):
        super().__init__(f"degenerate premise model: {which}")
        self.which = which


class ManifestError(InterpError):
    pass


# --- model ---------------------------------------------------------------------------

@dataclass
class GeoModel:
    points: dict[str, GeoPoint] = field(default_factory=dict)
    ops: list = field(default_factory=list)
    next_layer: int = 0
    rng: random.Random = field(default_factory=lambda: random.Random(0))
    tol_branch: float = TOL_BRANCH
    tol_check: float = TOL_CHECK

    @classmethod
    def seeded(cls, seed: int = 0) -> "GeoModel":
        return cls(rng=random.Random(seed))

    def copy(self) -> "GeoModel":
        rng = random.Random()
        rng.setstate(self.rng.getstate())
        return GeoModel(dict(self.points), list(self.ops), self.next_layer, rng,
                        self.tol_branch, self.tol_check)

    def serialize(self) -> str:
        """Canonical text of points and ops (for determinism checks)."""
        lines = [f"{k} {v.x!r} {v.y!r}" for k, v in sorted(self.points.items())]
        lines += [repr(op) for op in self.ops]
        return "\n".join(lines) + "\n"


def random_unit(model: GeoModel) -> float:
    return model.rng.random()


# --- registry -------------------------------------------------------------------

@dataclass(frozen=True)
class InterpProcedure:
    axiom: str
    inputs: tuple[str, ...]
    outputs: tuple[str, ...]
    procedure: str


_RECORD = re.compile(
    r"^interp\s+(\S+)\s+inputs\(([^)]*)\)\s+outputs\(([^)]*)\)\s*=\s*(\S+)\s*$")


def parse_manifest(text: str) -> list[InterpProcedure]:
    out = []
    for n, raw in enumerate(text.splitlines(), 1):
        line = re.split(r"[%#]", raw, maxsplit=1)[0].strip()
        if not line:
            continue
        if line.split()[0] == "free":
            raise ManifestError(f"line {n}: free-point records are not supported")
        m = _RECORD.match(line)
        if not m:
            raise ManifestError(f"line {n}: cannot parse {raw.strip()!r}")
        names = lambda s: tuple(x.strip() for x in s.split(",") if x.strip())  # noqa: E731
        out.append(InterpProcedure(m.group(1), names(m.group(2)), names(m.group(3)), m.group(4)))
    return out


def format_manifest(entries: Iterable[InterpProcedure]) -> str:
    return "".join(f"interp {e.axiom} inputs({','.join(e.inputs)}) "
                   f"outputs({','.join(e.outputs)}) = {e.procedure}\n" for e in entries)


class InterpRegistry:
    """Axiom name -> procedure, plus the GCL text of every procedure."""

    def __init__(self, entries: Iterable[InterpProcedure] = (),
                 library: Optional[Mapping[str, str]] = None):
        self.entries: dict[str, InterpProcedure] = {}
        for e in entries:
            self.entries[e.axiom] = e
        self.library: dict[str, str] = dict(library or {})  # file name -> text
        self._procs: Optional[dict] = None

    def get(self, axiom: str) -> Optional[InterpProcedure]:
        return self.entries.get(axiom)

    def with_entries(self, entries: Iterable[InterpProcedure],
                     library: Optional[Mapping[str, str]] = None) -> "InterpRegistry":
        lib = dict(self.library)
        lib.update(library or {})
        return InterpRegistry([*self.entries.values(), *entries], lib)

    def resolver(self, name: str) -> str:
        if name not in self.library:
            raise KeyError(name)
        return self.library[name]

    def procedures(self) -> dict[str, gcl.Procedure]:
        if self._procs is None:
            procs: dict[str, gcl.Procedure] = {}
            for fname in sorted(self.library):
                prog = gcl.parse_gcl(self.library[fname], self.resolver, source=fname)
                for name, p in prog.procedures().items():
                    procs.setdefault(name, p)
            self._procs = procs
        return self._procs

    def validate(self, theory: Theory) -> list[str]:
        """Problems found when checking the registry against ``theory``."""
        problems = []
        procs = self.procedures()
        for e in self.entries.values():
            if e.procedure not in procs:
                problems.append(f"{e.axiom}: procedure {e.procedure} not found")
                continue
            nparams = len(procs[e.procedure].params)
            if nparams != len(e.inputs) + len(e.outputs):
                problems.append(f"{e.axiom}: procedure {e.procedure} takes {nparams} points, "
                                f"manifest declares {len(e.inputs) + len(e.outputs)}")
            if e.axiom not in theory.names():
                continue
            ax = theory.axiom(e.axiom)
            if not set(e.inputs) <= set(ax.universals):
                problems.append(f"{e.axiom}: inputs are not universals of the axiom")
            if tuple(e.outputs) != tuple(ax.existentials):
                problems.append(f"{e.axiom}: outputs differ from the axiom's existentials")
        return problems


def default_data_dir() -> Path:
    return Path(str(resources.files("proofsketch") / "data"))


def load_library(dirs: Sequence[Path]) -> dict[str, str]:
    """All ``*.gcl`` files of ``dirs``; earlier directories win."""
    lib: dict[str, str] = {}
    for d in dirs:
        for f in sorted(Path(d).glob("*.gcl")):
            lib.setdefault(f.name, f.read_text())
    return lib


def load_registry(manifests: Sequence[Path] = (), gcl_dirs: Sequence[Path] = (),
                  defaults: bool = True) -> InterpRegistry:
    """Registry from manifests (later records override earlier ones); the
    bundled defaults come first when ``defaults`` is set."""
    entries: list[InterpProcedure] = []
    dirs = list(gcl_dirs)
    if defaults:
        data = default_data_dir()
        entries += parse_manifest((data / "default.interp").read_text())
        dirs.append(data / "gcl")
    for m in manifests:
        entries += parse_manifest(Path(m).read_text())
        dirs.insert(0, Path(m).parent)
    return InterpRegistry(entries, load_library(dirs))


# --- applying steps --------------------------------------------------------------

def run_procedure(model: GeoModel, reg: InterpRegistry, procedure: str, args: Sequence[str],
                  layer: Optional[int] = None) -> GeoModel:
    """Execute ``call procedure { args }`` on a copy of ``model``."""
    out = model.copy()
    scene = gcl.Scene(objects=dict(out.points))
    ev = gcl.Evaluator(reg.procedures(), out.rng, scene,
                       layer=out.next_layer if layer is None else layer)
    ev.call(gcl.Call(procedure, tuple(args)), None)
    for k, v in scene.objects.items():
        if isinstance(v, GeoPoint) and "@" not in k and k not in out.points:
            out.points[k] = v
    out.ops.extend(scene.ops)
    return out


def apply_step(model: GeoModel, step: MP, reg: InterpRegistry,
               advance_layer: bool = True) -> GeoModel:
    """Interpret one MP step; returns the extended model (the input is left alone)."""
    entry = reg.get(step.axiom)
    if entry is None:
        if step.witnesses:
            raise MissingInterpretation(step.axiom)
        return model
    try:
        args = [step.instantiation[v] for v in entry.inputs]
    except KeyError as e:
        raise InterpError(f"{step.axiom}: manifest input {e.args[0]} not in the step") from None
    if len(entry.outputs) != len(step.witnesses):
        raise InterpError(f"{step.axiom}: manifest declares {len(entry.outputs)} outputs, "
                          f"step has {len(step.witnesses)} witnesses")
    for c in args:
        if c not in model.points:
            raise InterpError(f"{step.axiom}: point {c} is not in the model")
    try:
        out = run_procedure(model, reg, entry.procedure, [*args, *step.witnesses])
    except (GeometryError, gcl.GclError) as e:
        inst = ", ".join(f"{v}={c}" for v, c in step.instantiation.items())
        e.args = (f"step {step.axiom}({inst}): {e}",)
        raise
    for w in step.witnesses:
        if w not in out.points:
            raise InterpError(f"{step.axiom}: procedure {entry.procedure} did not place {w}")
    if advance_layer:
        out.next_layer += 1
    return out


# --- numeric facts --------------------------------------------------------------

def evaluate_fact(a: Atom, points: Mapping[str, GeoPoint], tol: float = TOL_BRANCH
                  ) -> Optional[bool]:
    """Truth of a ground atom in the model, or None when it cannot be judged."""
    names = [t.name for t in a.args]
    if any(n not in points for n in names):
        return None
    ps = [points[n] for n in names]
    pred = a.pred
    if pred in ("eq", "neq") and len(ps) == 2:
        same = dist(ps[0], ps[1]) <= tol
        return same if pred == "eq" else not same
    if pred in ("col", "ncol") and len(ps) == 3:
        return _collinear(*ps, tol) == (pred == "col")
    if pred in ("betS", "nbetS") and len(ps) == 3:
        return _between(*ps, tol) == (pred == "betS")
    if pred in ("cong", "ncong") and len(ps) == 4:
        scale = max(1.0, dist(ps[0], ps[1]), dist(ps[2], ps[3]))
        same = abs(dist(ps[0], ps[1]) - dist(ps[2], ps[3])) <= tol * scale
        return same == (pred == "cong")
    if pred == "midpoint" and len(ps) == 3:
        a0, m, b0 = ps
        return dist(m, GeoPoint((a0.x + b0.x) / 2, (a0.y + b0.y) / 2)) <= tol * max(1.0, dist(a0, b0))
    if pred == "per" and len(ps) == 3:
        u, v = ps[0] - ps[1], ps[2] - ps[1]
        if u.norm() <= tol or v.norm() <= tol:
            return False
        return abs(dot(u, v)) <= tol * u.norm() * v.norm()
    return None


def _collinear(a, b, c, tol) -> bool:
    scale = max(dist(a, b), dist(b, c), dist(a, c), 1.0)
    return abs(area2(a, b, c)) <= tol * scale * scale


def _between(a, b, c, tol) -> bool:
    if not _collinear(a, b, c, tol):
        return False
    return dot(b - a, c - b) > tol and dist(a, b) > tol and dist(b, c) > tol


# --- premise models -------------------------------------------------------------

@dataclass(frozen=True)
class NondegeneracyOptions:
    pairwise_neq: bool = True
    ncol_triples: tuple[tuple[str, str, str], ...] = ()  # variable names of the conjecture


def premises_conjecture(c: CoherentFormula, opts: NondegeneracyOptions | None = None
                        ) -> CoherentFormula:
    """``exists vars. premises & extra`` for the premises of ``c``."""
    opts = opts or NondegeneracyOptions()
    atoms: list[Atom] = list(dict.fromkeys(c.premises))
    have = {a.key() for a in atoms}
    extra = []
    if opts.pairwise_neq:
        for x, y in itertools.combinations(c.universals, 2):
            if (NEQ, (x, y)) not in have and (NEQ, (y, x)) not in have:
                extra.append(Atom(NEQ, (Var(x), Var(y))))
    for t in opts.ncol_triples:
        a = Atom("ncol", tuple(Var(v) for v in t))
        if a.key() not in have:
            extra.append(a)
    return CoherentFormula(f"{c.name}_exists", (), (), tuple(c.universals),
                           (Conjunction(tuple(atoms + extra)),))


def check_nondegenerate(model: GeoModel, constants: Sequence[str],
                        ncol: Sequence[tuple[str, str, str]] = ()):
    for c in constants:
        if c not in model.points:
            raise DegenerateModel(f"{c} not placed")
    for x, y in itertools.combinations(constants, 2):
        if dist(model.points[x], model.points[y]) <= model.tol_branch:
            raise DegenerateModel(f"{x} = {y}")
    for t in ncol:
        if _collinear(*(model.points[v] for v in t), model.tol_branch):
            raise DegenerateModel(f"{' '.join(t)} collinear")


def realize_from_gcl(text: str, procedure: str, constants: Sequence[str], reg: InterpRegistry,
                     seed: int = 0, ncol: Sequence[tuple[str, str, str]] = ()) -> GeoModel:
    """Premise model from a hand-written existence procedure (layer 0)."""
    prog = gcl.parse_gcl(text, reg.resolver, source=f"{procedure}.gcl")
    procs = dict(reg.procedures())
    procs.update(prog.procedures())
    model = GeoModel.seeded(seed)
    scene = gcl.Scene()
    ev = gcl.Evaluator(procs, model.rng, scene, layer=0)
    ev.call(gcl.Call(procedure, tuple(constants)), None)
    model.points = {k: v for k, v in scene.objects.items()
                    if isinstance(v, GeoPoint) and "@" not in k}
    model.ops = list(scene.ops)
    model.next_layer = 1
    check_nondegenerate(model, constants, ncol)
    return model


def realize_from_proof(proof, constants: Sequence[str], reg: InterpRegistry, seed: int = 0,
                       ncol: Sequence[tuple[str, str, str]] = ()) -> GeoModel:
    """Premise model from a proof of the existence conjecture.

    ``constants`` name the premise points in the order of the existence
    conjecture's variables.  Every step is interpreted at layer 0.
    """
    from .illustrate import BranchPolicy, select_branch
    from .prover import CaseSplit, QedAssumption

    model = GeoModel.seeded(seed)
    steps = list(proof.body)
    sub = None
    while steps:
        st = steps.pop(0)
        if isinstance(st, MP):
            model = apply_step(model, st, reg, advance_layer=False)
        elif isinstance(st, CaseSplit):
            k = select_branch(st, model, BranchPolicy())
            steps = list(st.cases[k].steps)
        elif isinstance(st, QedAssumption):
            sub = st.goal_substitution
    if sub is None:
        raise InterpError("existence proof does not end by assumption on the chosen branch")
    # the illustration replays a concrete copy of these points, so later
    # random draws start from the seed as they do when the GCL is evaluated
    out = GeoModel(rng=random.Random(seed), tol_branch=model.tol_branch,
                   tol_check=model.tol_check)
    for v, c in zip(proof.goal.existentials, constants):
        if sub.get(v) not in model.points:
            raise MissingInterpretation(f"(no point for {v})")
        out.points[c] = model.points[sub[v]]
    out.next_layer = 1
    check_nondegenerate(out, constants, ncol)
    return out


def exists_procedure_text(name: str, constants: Sequence[str], model: GeoModel) -> str:
    """Concrete GCL procedure placing the premise points of ``model``."""
    lines = [f"procedure {name} {{ {' '.join(constants)} }} {{"]
    for c in constants:
        p = model.points[c]
        lines.append(f"  point {c} {p.x!r} {p.y!r}")
    for c in constants:
        lines.append(f"  cmark_t {c}")
    lines.append("}")
    return "\n".join(lines) + "\n"
