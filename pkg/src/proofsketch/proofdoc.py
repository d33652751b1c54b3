"""Numbered, human-readable proof text.

Layout follows the usual Larus-style presentation::

    Consider arbitrary a such that: p(a). It should be proved that r(a).
    1. r(a) \\/ q(a) (by MP, from p(a) using axiom ax1; instantiation: X -> a)
    2. Case r(a):
     3. Proved by assumption! (by QEDas)
    ...

Steps using simple axioms (one atom to one atom) are hidden by default; a
fact they produced is cited through the facts it was derived from.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .formula import EQ, NEQ, CoherentFormula, Conjunction, Const, Theory, apply_substitution
from .prover import (
    MP,
    CaseSplit,
    Proof,
    QedAssumption,
    QedCaseSplit,
    QedContradiction,
)
from .tptp import is_support_axiom

FORMATS = ("plain", "latex")

_SYMBOLS = {
    "plain": {"and": " /\\ ", "or": " \\/ ", "bot": "_|_", "neq": "!=", "to": "->",
              "exists": "exists "},
    "latex": {"and": " \\wedge ", "or": " \\vee ", "bot": "\\perp", "neq": "\\neq",
              "to": "\\mapsto", "exists": "\\exists "},
}


@dataclass(frozen=True)
class RenderOptions:
    hide_simple_axioms: bool = True
    format: str = "plain"

    def __post_init__(self):
        if self.format not in FORMATS:
            raise ValueError(f"unknown format {self.format!r}; expected one of {FORMATS}")


def is_simple_axiom(ax: CoherentFormula) -> bool:
    return (len(ax.premises) == 1 and not ax.existentials and len(ax.disjuncts) == 1
            and len(ax.disjuncts[0].atoms) == 1)


def _hidden(ax: Optional[CoherentFormula]) -> bool:
    # eq_reflexive has no premises but is just as uninformative
    return ax is not None and (is_simple_axiom(ax) or ax.name == "eq_reflexive")


class _Writer:
    def __init__(self, theory: Theory, opts: RenderOptions):
        self.theory = theory
        self.opts = opts
        self.sym = _SYMBOLS[opts.format]
        self.lines: list[str] = []
        self.n = 0

    def math(self, text: str) -> str:
        return f"${text}$" if self.opts.format == "latex" else text

    def atom(self, a) -> str:
        args = [t.name for t in a.args]
        if a.pred == EQ:
            return f"{args[0]} = {args[1]}"
        if a.pred == NEQ:
            return f"{args[0]} {self.sym['neq']} {args[1]}"
        return f"{a.pred}({', '.join(args)})"

    def conj(self, c: Conjunction) -> str:
        return self.sym["and"].join(self.atom(a) for a in c.atoms)

    def disj(self, ds) -> str:
        if not ds:
            return self.sym["bot"]
        if len(ds) == 1:
            return self.conj(ds[0])
        return self.sym["or"].join(
            f"({self.conj(d)})" if len(d.atoms) > 1 else self.conj(d) for d in ds)

    def emit(self, depth: int, text: str):
        self.n += 1
        self.lines.append(f"{' ' * depth}{self.n}. {text}")

    def axiom(self, name: str) -> Optional[CoherentFormula]:
        try:
            return self.theory.axiom(name)
        except KeyError:
            return None

    # body ---------------------------------------------------------------
    def branch(self, steps, sources: dict, depth: int):
        sources = dict(sources)
        last_split = None
        for st in steps:
            if isinstance(st, MP):
                ax = self.axiom(st.axiom)
                prem = self._premises(st, ax)
                cited = [s for k in prem for s in sources.get(k, [])]
                if self.opts.hide_simple_axioms and _hidden(ax):
                    for c in st.concluded:
                        for a in c.atoms:
                            sources.setdefault(a.key(), list(dict.fromkeys(cited)))
                    continue
                for c in st.concluded:
                    text = self.math(self.conj(c))
                    for a in c.atoms:
                        sources.setdefault(a.key(), [text])
                self.emit(depth, self._mp_line(st, cited))
                last_split = st
            elif isinstance(st, CaseSplit):
                for case in st.cases:
                    text = self.math(self.conj(case.facts))
                    self.emit(depth, f"Case {text}:")
                    inner = dict(sources)
                    for a in case.facts.atoms:
                        inner[a.key()] = [text]
                    self.branch(case.steps, inner, depth + 1)
                last_split = st
            elif isinstance(st, QedAssumption):
                self.emit(depth, "Proved by assumption! (by QEDas)")
            elif isinstance(st, QedContradiction):
                self.emit(depth, "Contradiction! (by QEDefq)")
            elif isinstance(st, QedCaseSplit):
                facts = ", ".join(self.math(self.conj(c.facts)) for c in last_split.cases) \
                    if isinstance(last_split, CaseSplit) else ""
                self.emit(depth, f"Proved by case split! (by QEDcs, by {facts})")

    def _premises(self, st: MP, ax) -> list:
        if ax is None:
            return []
        sub = {v: Const(c) for v, c in st.instantiation.items()}
        return [apply_substitution(a, sub).key() for a in ax.premises]

    def _mp_line(self, st: MP, cited: list) -> str:
        body = self.math(self.disj(st.concluded))
        if st.witnesses:
            body = f"Let {', '.join(st.witnesses)} be such that {body}"
        inst = ", ".join(f"{v} {self.sym['to']} {c}" for v, c in st.instantiation.items())
        src = f"from {', '.join(cited)} " if cited else ""
        inst = f"; instantiation: {inst}" if inst else ""
        return f"{body} (by MP, {src}using axiom {st.axiom}{inst})"


def render_text(p: Proof, t: Theory, opts: RenderOptions | None = None) -> str:
    opts = opts or RenderOptions()
    w = _Writer(t, opts)
    facts = ", ".join(w.math(w.atom(a)) for a in p.intro.facts)
    goal = w.disj(p.goal.disjuncts)
    if p.goal.existentials:
        goal = f"{w.sym['exists']}{','.join(p.goal.existentials)} {goal}"
    head = []
    if p.intro.constants:
        consider = f"Consider arbitrary {', '.join(p.intro.constants)}"
        head.append(f"{consider} such that: {facts}." if facts else f"{consider}.")
    elif facts:
        head.append(f"Assume: {facts}.")
    head.append(f"It should be proved that {w.math(goal)}.")
    sources = {a.key(): [w.math(w.atom(a))] for a in p.intro.facts}
    w.branch(p.body, sources, 0)
    return "\n".join([" ".join(head), *w.lines]) + "\n"


def used_axioms(p: Proof, t: Theory | None = None, include_simple: bool = False) -> list[str]:
    """Axiom names in first-use order (pre-order over the proof tree).

    Without ``include_simple``, simple axioms and generated support axioms
    are left out; judging simplicity needs the theory ``t``.
    """
    out: dict[str, None] = {}

    def walk(steps):
        for st in steps:
            if isinstance(st, MP):
                if not include_simple:
                    if is_support_axiom(st.axiom):
                        continue
                    if t is not None and st.axiom in t.names() and is_simple_axiom(t.axiom(st.axiom)):
                        continue
                out.setdefault(st.axiom)
            elif isinstance(st, CaseSplit):
                for c in st.cases:
                    walk(c.steps)

    walk(p.body)
    return list(out)
