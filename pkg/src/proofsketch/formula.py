"""Coherent-logic sentences: terms, atoms, substitutions and theories.

A coherent formula has the shape

    forall xs. A0 & ... & An-1 => exists ys. (B0 | ... | Bm-1)

where each Ai is an atom and each Bj a conjunction of atoms.  An empty
premise list stands for "true" and an empty disjunct list for "false".
There are no function symbols, so a term is a variable or a constant.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Union

EQ = "eq"
NEQ = "neq"


class FormulaError(Exception):
    pass


class UnboundVariable(FormulaError):
    def __init__(self, name: str):
        super().__init__(f"unbound variable {name}")
        self.name = name


@dataclass(frozen=True, order=True)
class Var:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True, order=True)
class Const:
    name: str

    def __str__(self):
        return self.name


Term = Union[Var, Const]


def term(name: str) -> Term:
    """TPTP convention: uppercase initial is a variable."""
    return Var(name) if name[:1].isupper() else Const(name)


@dataclass(frozen=True)
class Atom:
    pred: str
    args: tuple[Term, ...]

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))

    @property
    def is_ground(self) -> bool:
        return all(isinstance(a, Const) for a in self.args)

    def key(self) -> tuple[str, tuple[str, ...]]:
        return (self.pred, tuple(a.name for a in self.args))

    def __str__(self):
        return format_atom(self.pred, [a.name for a in self.args])


def format_atom(pred: str, args, ascii: bool = True) -> str:
    if pred == EQ and len(args) == 2:
        return f"{args[0]} = {args[1]}"
    if pred == NEQ and len(args) == 2:
        return f"{args[0]} != {args[1]}" if ascii else f"{args[0]} ≠ {args[1]}"
    return f"{pred}({', '.join(args)})"


def atom(pred: str, *args: str) -> Atom:
    """Shorthand: atom("betS", "A", "c", "B")."""
    return Atom(pred, tuple(term(a) for a in args))


_ATOM_RE = re.compile(r"^\s*([a-z][A-Za-z0-9_]*)\s*\(([^()]*)\)\s*$")


def parse_atom(text: str) -> Atom:
    """Parse ``p(a,B)``, ``x = y`` or ``x != y``."""
    if "!=" in text:
        lhs, rhs = text.split("!=")
        return atom(NEQ, lhs.strip(), rhs.strip())
    if "=" in text:
        lhs, rhs = text.split("=")
        return atom(EQ, lhs.strip(), rhs.strip())
    m = _ATOM_RE.match(text)
    if not m:
        raise FormulaError(f"cannot parse atom {text!r}")
    args = [a.strip() for a in m.group(2).split(",") if a.strip()]
    return atom(m.group(1), *args)


@dataclass(frozen=True)
class Conjunction:
    atoms: tuple[Atom, ...]  # empty: true

    def __post_init__(self):
        object.__setattr__(self, "atoms", tuple(self.atoms))

    def __str__(self):
        return " & ".join(str(a) for a in self.atoms) or "true"


@dataclass(frozen=True)
class CoherentFormula:
    name: str
    universals: tuple[str, ...]
    premises: tuple[Atom, ...]
    existentials: tuple[str, ...]
    disjuncts: tuple[Conjunction, ...]

    def __post_init__(self):
        for f in ("universals", "premises", "existentials", "disjuncts"):
            object.__setattr__(self, f, tuple(getattr(self, f)))
        self.validate()

    def validate(self):
        us, es = self.universals, self.existentials
        if len(set(us)) != len(us) or len(set(es)) != len(es):
            raise FormulaError(f"{self.name}: duplicate bound variable")
        if set(us) & set(es):
            raise FormulaError(f"{self.name}: variable bound twice")
        for a in self.premises:
            for v in free_variables(a):
                if v not in us:
                    raise FormulaError(f"{self.name}: premise variable {v} not universal")
        for d in self.disjuncts:
            for v in free_variables(d):
                if v not in us and v not in es:
                    raise FormulaError(f"{self.name}: conclusion variable {v} unbound")

    @property
    def is_bottom(self) -> bool:
        return not self.disjuncts

    def predicates(self) -> set[str]:
        out = {a.pred for a in self.premises}
        for d in self.disjuncts:
            out.update(a.pred for a in d.atoms)
        return out

    def __str__(self):
        prem = " & ".join(str(a) for a in self.premises) or "true"
        if self.disjuncts:
            concl = " | ".join(
                f"({d})" if len(d.atoms) > 1 and len(self.disjuncts) > 1 else str(d)
                for d in self.disjuncts
            )
        else:
            concl = "false"
        if self.existentials:
            concl = f"exists {','.join(self.existentials)}. {concl}"
        head = f"forall {','.join(self.universals)}. " if self.universals else ""
        return f"{self.name}: {head}{prem} => {concl}"


Substitution = Mapping[str, Const]


def _subst_term(t: Term, s: Substitution) -> Term:
    if isinstance(t, Var):
        if t.name not in s:
            raise UnboundVariable(t.name)
        return s[t.name]
    return t


def apply_substitution(a, s: Substitution):
    """Ground instance of an atom or conjunction.

    Every variable of ``a`` must be bound; raises UnboundVariable otherwise.
    """
    if isinstance(a, Atom):
        return Atom(a.pred, tuple(_subst_term(t, s) for t in a.args))
    if isinstance(a, Conjunction):
        return Conjunction(tuple(apply_substitution(x, s) for x in a.atoms))
    raise TypeError(f"cannot substitute into {type(a).__name__}")


def free_variables(f) -> list[str]:
    """Variables in first-occurrence order (universals, then existentials,
    for a coherent formula)."""
    seen: dict[str, None] = {}
    if isinstance(f, Atom):
        for t in f.args:
            if isinstance(t, Var):
                seen.setdefault(t.name)
    elif isinstance(f, Conjunction):
        for a in f.atoms:
            for v in free_variables(a):
                seen.setdefault(v)
    elif isinstance(f, CoherentFormula):
        occurring = set()
        for a in f.premises:
            occurring.update(free_variables(a))
        for d in f.disjuncts:
            occurring.update(free_variables(d))
        return [v for v in (*f.universals, *f.existentials) if v in occurring]
    else:
        raise TypeError(f"no variables in {type(f).__name__}")
    return list(seen)


def _rename_atom(a: Atom, m: Mapping[str, str]) -> Atom:
    return Atom(a.pred, tuple(Var(m.get(t.name, t.name)) if isinstance(t, Var) else t
                              for t in a.args))


def rename_apart(f: CoherentFormula, avoid: Iterable[str]) -> CoherentFormula:
    """Alpha-rename bound variables of ``f`` away from ``avoid``.

    A clashing variable V becomes V<k> for the smallest k >= 1 that is free.
    """
    avoid = set(avoid)
    taken = set(avoid) | set(f.universals) | set(f.existentials)
    m: dict[str, str] = {}
    for v in (*f.universals, *f.existentials):
        if v in avoid:
            k = 1
            while f"{v}{k}" in taken:
                k += 1
            m[v] = f"{v}{k}"
            taken.add(m[v])
    if not m:
        return f
    return CoherentFormula(
        f.name,
        tuple(m.get(v, v) for v in f.universals),
        tuple(_rename_atom(a, m) for a in f.premises),
        tuple(m.get(v, v) for v in f.existentials),
        tuple(Conjunction(tuple(_rename_atom(a, m) for a in d.atoms)) for d in f.disjuncts),
    )


def complement_name(pred: str) -> str:
    if pred == EQ:
        return NEQ
    if pred == NEQ:
        return EQ
    return "n" + pred


@dataclass
class Signature:
    """Predicate arities plus the complement pairing R <-> nR."""

    predicates: dict[str, int] = field(default_factory=dict)
    complements: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        self.predicates.setdefault(EQ, 2)
        self.predicates.setdefault(NEQ, 2)
        self.complements.setdefault(EQ, NEQ)
        self.complements.setdefault(NEQ, EQ)

    def declare(self, pred: str, arity: int):
        known = self.predicates.get(pred)
        if known is not None and known != arity:
            raise FormulaError(f"predicate {pred} used with arities {known} and {arity}")
        self.predicates[pred] = arity

    def complement(self, pred: str) -> str:
        """Name of the complement predicate, registering the pair on first use."""
        if pred in self.complements:
            return self.complements[pred]
        arity = self.predicates[pred]
        neg = complement_name(pred)
        while neg in self.predicates and self.complements.get(neg) not in (None, pred):
            neg = "n" + neg
        self.declare(neg, arity)
        self.complements[pred] = neg
        self.complements[neg] = pred
        return neg

    def complement_pairs(self) -> list[tuple[str, str]]:
        """Each pair once, positive member first, in declaration order."""
        out = []
        for p in self.predicates:
            q = self.complements.get(p)
            if q is None or (q, p) in out:
                continue
            out.append((p, q))
        return out

    def copy(self) -> "Signature":
        return Signature(dict(self.predicates), dict(self.complements))


@dataclass
class Theory:
    signature: Signature
    axioms: list[CoherentFormula]

    def __post_init__(self):
        names = [a.name for a in self.axioms]
        dup = {n for n in names if names.count(n) > 1}
        if dup:
            raise FormulaError(f"duplicate axiom names: {sorted(dup)}")
        for ax in self.axioms:
            for a in (*ax.premises, *(x for d in ax.disjuncts for x in d.atoms)):
                ar = self.signature.predicates.get(a.pred)
                if ar is None:
                    raise FormulaError(f"{ax.name}: undeclared predicate {a.pred}")
                if ar != len(a.args):
                    raise FormulaError(f"{ax.name}: {a.pred} expects {ar} arguments")

    def axiom(self, name: str) -> CoherentFormula:
        for a in self.axioms:
            if a.name == name:
                return a
        raise KeyError(name)

    def names(self) -> list[str]:
        return [a.name for a in self.axioms]

    def without(self, name: str) -> "Theory":
        return Theory(self.signature, [a for a in self.axioms if a.name != name])
