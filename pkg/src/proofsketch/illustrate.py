"""Compile a checked proof into GCL: a theorem procedure, a premise
(existence) procedure and a main file, optionally animated by layers."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from . import gcl
from .formula import CoherentFormula, Theory
from .geometry import MarkPoint
from .interp import (
    GeoModel,
    InterpProcedure,
    InterpRegistry,
    MissingInterpretation,
    apply_step,
    evaluate_fact,
)
from .prover import (
    MP,
    CaseSplit,
    Proof,
    QedAssumption,
    QedCaseSplit,
    QedContradiction,
    SearchLimits,
    check_proof,
    prove,
)
from .tptp import is_support_axiom

FALLBACKS = ("prefer-complement", "first-open")
MAX_LEMMA_DEPTH = 8


class IllustrationError(Exception):
    pass


class AllContradictory(IllustrationError):
    def __init__(self, msg: str = "every case closes by contradiction"):
        super().__init__(msg)


class AmbiguousBranch(IllustrationError):
    pass


@dataclass(frozen=True)
class BranchPolicy:
    fallback: str = "prefer-complement"

    def __post_init__(self):
        if self.fallback not in FALLBACKS:
            raise ValueError(f"unknown fallback {self.fallback!r}; expected one of {FALLBACKS}")


def contradictory(steps) -> bool:
    """True when the branch ends, transitively, only in contradictions."""
    if not steps:
        return False
    last = steps[-1]
    if isinstance(last, QedContradiction):
        return True
    if isinstance(last, QedCaseSplit):
        split = next((s for s in reversed(steps) if isinstance(s, CaseSplit)), None)
        return split is not None and all(contradictory(c.steps) for c in split.cases)
    return False


def _is_complement_case(case) -> bool:
    return any(a.pred == "neq" or (a.pred.startswith("n") and a.pred != "neq")
               for a in case.facts.atoms)


def select_branch(split: CaseSplit, model: GeoModel, policy: BranchPolicy | None = None) -> int:
    """Index of the case to illustrate."""
    policy = policy or BranchPolicy()
    open_cases = [k for k, c in enumerate(split.cases) if not contradictory(c.steps)]
    if not open_cases:
        raise AllContradictory()
    if len(open_cases) == 1:
        return open_cases[0]
    holds, unknown = [], []
    for k in open_cases:
        vals = [evaluate_fact(a, model.points, model.tol_branch) for a in split.cases[k].facts.atoms]
        if any(v is False for v in vals):
            continue
        (holds if all(v is True for v in vals) else unknown).append(k)
    if len(holds) > 1:
        raise AmbiguousBranch(f"cases {[k + 1 for k in holds]} all hold in the model")
    if holds:
        return holds[0]
    pool = unknown or open_cases
    if policy.fallback == "prefer-complement":
        for k in pool:
            if _is_complement_case(split.cases[k]):
                return k
    return pool[0]


# --- documents ------------------------------------------------------------------

@dataclass
class GCLDocument:
    name: str
    params: tuple[str, ...]
    body: list[str]
    exists_name: str
    exists_text: str
    includes: list[str]  # procedure names, theorem and exists first
    constants: tuple[str, ...]
    animation: list[str] = field(default_factory=list)
    extra_files: dict[str, str] = field(default_factory=dict)  # generated lemma procedures

    @property
    def theorem_text(self) -> str:
        lines = [f"procedure {self.name} {{ {' '.join(self.params)} }} {{"]
        lines += [f"  {b}" for b in self.body]
        lines.append("}")
        return "\n".join(lines) + "\n"

    @property
    def main_text(self) -> str:
        lines = ["% ----- Proof illustration -----"]
        lines += [f"include {n}.gcl" for n in self.includes]
        lines.append("%-----")
        lines.append(f"call {self.exists_name} {{ {' '.join(self.constants)} }}")
        lines.append(f"call {self.name} {{ {' '.join(self.params)} }}")
        lines += self.animation
        return "\n".join(lines) + "\n"

    def files(self) -> dict[str, str]:
        out = {f"{self.name}.gcl": self.theorem_text,
               f"{self.exists_name}.gcl": self.exists_text,
               f"main_{self.name}.gcl": self.main_text}
        out.update(self.extra_files)
        return out

    def resolver(self, reg: InterpRegistry):
        files = self.files()

        def resolve(name: str) -> str:
            if name in files:
                return files[name]
            return reg.resolver(name)
        return resolve

    def scene(self, reg: InterpRegistry, seed: int = 0) -> gcl.Scene:
        prog = gcl.parse_gcl(self.main_text, self.resolver(reg), source=f"main_{self.name}.gcl")
        return gcl.evaluate(prog, seed)


@dataclass(frozen=True)
class CompileOptions:
    animate: bool = False
    lemma_limits: SearchLimits = SearchLimits(max_mp_steps=8, timeout=20.0)


class _Compiler:
    def __init__(self, theory: Theory, reg: InterpRegistry, policy: BranchPolicy,
                 opts: CompileOptions, depth: int = 0):
        self.theory = theory
        self.reg = reg
        self.policy = policy
        self.opts = opts
        self.depth = depth
        self.body: list[str] = []
        self.used: list[str] = []  # procedure names in first-use order
        self.extra: dict[str, str] = {}
        self.leaf: Optional[QedAssumption] = None

    def note_use(self, proc: str):
        if proc in self.used:
            return
        self.used.append(proc)
        p = self.reg.procedures().get(proc)
        if p is None:
            return
        for it in p.body:
            if isinstance(it, gcl.Call):
                self.note_use(it.name)

    def line(self, model: GeoModel, text: str):
        if self.opts.animate:
            self.body.append(f"layer {model.next_layer}")
        self.body.append(text)

    def walk(self, steps, model: GeoModel) -> GeoModel:
        for st in steps:
            if isinstance(st, MP):
                model = self.step(st, model)
            elif isinstance(st, CaseSplit):
                k = select_branch(st, model, self.policy)
                self.body.append(f"% --- Illustration for branch {k + 1}")
                return self.walk(st.cases[k].steps, model)
            elif isinstance(st, QedAssumption):
                self.leaf = st
        return model

    def step(self, st: MP, model: GeoModel) -> GeoModel:
        entry = self.reg.get(st.axiom)
        if entry is None:
            if not st.witnesses:
                return model
            entry = self.compile_lemma(st.axiom, st, model)
        args = [st.instantiation[v] for v in entry.inputs] + list(st.witnesses)
        self.line(model, f"call {entry.procedure} {{ {' '.join(args)} }}")
        self.note_use(entry.procedure)
        model = apply_step(model, st, self.reg)
        for w in st.witnesses:
            self.line(model, f"mark_t {w}")
            model = model.copy()
            model.ops.append(MarkPoint(model.points[w], w, "plain-label", "t", model.next_layer))
            model.next_layer += 1
        return model

    def compile_lemma(self, name: str, st: MP, model: GeoModel) -> InterpProcedure:
        """Prove a used lemma from the rest of the theory and turn its proof
        into a procedure (registered for the rest of this compilation)."""
        if self.depth + 1 > MAX_LEMMA_DEPTH or is_support_axiom(name):
            raise MissingInterpretation(name)
        try:
            ax = self.theory.axiom(name)
        except KeyError:
            raise MissingInterpretation(name) from None
        sub_theory = self.theory.without(name)
        p = prove(sub_theory, ax, self.opts.lemma_limits)
        if not p or not check_proof(sub_theory, ax, p):
            raise MissingInterpretation(name)
        inner_model = GeoModel(rng=model.rng, tol_branch=model.tol_branch,
                               tol_check=model.tol_check)
        used_univ = [v for v in ax.universals if any(
            v in (t.name for t in a.args) for a in ax.premises)]
        consts = dict(zip(ax.universals, p.intro.constants))
        for v in used_univ:
            inner_model.points[consts[v]] = model.points[st.instantiation[v]]
        sub = _Compiler(sub_theory, self.reg, self.policy, CompileOptions(
            animate=False, lemma_limits=self.opts.lemma_limits), self.depth + 1)
        sub.walk(p.body, inner_model)
        if sub.leaf is None or set(sub.leaf.goal_substitution) != set(ax.existentials):
            raise MissingInterpretation(name)
        params = [consts[v] for v in used_univ] + [sub.leaf.goal_substitution[e]
                                                    for e in ax.existentials]
        text = "\n".join([f"procedure {name} {{ {' '.join(params)} }} {{",
                          *[f"  {b}" for b in sub.body], "}"]) + "\n"
        self.extra.update(sub.extra)
        self.extra[f"{name}.gcl"] = text
        entry = InterpProcedure(name, tuple(used_univ), tuple(ax.existentials), name)
        self.reg = self.reg.with_entries([entry], {**sub.extra, f"{name}.gcl": text})
        for u in sub.used:
            self.note_use(u)
        return entry


def compile_proof(p: Proof, t: Theory, model: GeoModel, reg: InterpRegistry,
                  policy: BranchPolicy | None = None, opts: CompileOptions | None = None,
                  exists_text: Optional[str] = None, exists_name: Optional[str] = None
                  ) -> tuple[GCLDocument, GeoModel]:
    """Walk the selected branch of ``p`` on ``model``; returns the document and
    the final model."""
    policy = policy or BranchPolicy()
    opts = opts or CompileOptions()
    if contradictory(list(p.body)):
        raise AllContradictory("the premises are contradictory; there is nothing to illustrate")
    comp = _Compiler(t, reg, policy, opts)
    final = comp.walk(p.body, model)
    exported: list[str] = []
    if comp.leaf is not None:
        for e in p.goal.existentials:
            c = comp.leaf.goal_substitution.get(e)
            if c is not None and c not in p.intro.constants and c not in exported:
                exported.append(c)
    ename = exists_name or f"{p.conjecture_name}_exists"
    doc = GCLDocument(
        name=p.conjecture_name,
        params=tuple(p.intro.constants) + tuple(exported),
        body=comp.body,
        exists_name=ename,
        exists_text=exists_text or "",
        includes=[p.conjecture_name, ename, *comp.used],
        constants=tuple(p.intro.constants),
        extra_files=dict(comp.extra),
    )
    if opts.animate:
        assign_layers(doc, final)
    return doc, final


def assign_layers(doc: GCLDocument, model: GeoModel) -> GCLDocument:
    """Append the animation header: N = layers + 1 frames."""
    if not model.ops:
        doc.animation = []
        return doc
    n = max(op.layer for op in model.ops) + 2
    doc.animation = [
        f"animation_frames {n} 1",
        "point A0 0 0",
        f"point A1 1 0 {n} 0",
        "distance dA A0 A1",
        "hide_layers_from dA",
    ]
    return doc


def conjecture_constants(c: CoherentFormula, t: Theory) -> tuple[str, ...]:
    from .prover import skolemize_conjecture, theory_constants
    intro, _ = skolemize_conjecture(c, theory_constants(t))
    return intro.constants
