"""The FOF subset of TPTP, and its translation into coherent logic.

Only ``fof(name, axiom|conjecture, formula).`` entries are accepted.  The
translation pushes negations down to atoms (``~R(..)`` becomes the
complement predicate ``nR(..)``, ``~(x = y)`` becomes ``x != y``), hoists
existentials that sit between the universal prefix and the implication,
and puts the conclusion in disjunctive normal form.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterator, Union

from .formula import (
    EQ,
    NEQ,
    Atom,
    CoherentFormula,
    Conjunction,
    Signature,
    Theory,
    Var,
    complement_name,
    term,
)


class TptpError(Exception):
    pass


class ParseError(TptpError):
    def __init__(self, line: int, column: int, expected: str, found: str = ""):
        msg = f"line {line}, column {column}: expected {expected}"
        if found:
            msg += f", found {found!r}"
        super().__init__(msg)
        self.line, self.column, self.expected = line, column, expected


class UnsupportedRole(TptpError):
    def __init__(self, name: str, role: str = ""):
        super().__init__(f"{name}: unsupported role {role!r}")
        self.name = name


class FunctionSymbolsUnsupported(TptpError):
    def __init__(self, name: str):
        super().__init__(f"function symbols are not supported (in {name})")
        self.name = name


class NotCoherent(TptpError):
    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


class UnknownPredicate(TptpError):
    def __init__(self, name: str):
        super().__init__(f"unknown predicate {name}")
        self.name = name


# --- FOF trees -------------------------------------------------------------

@dataclass(frozen=True)
class Quant:
    kind: str  # "!" or "?"
    variables: tuple[str, ...]
    body: "Fof"


@dataclass(frozen=True)
class Not:
    body: "Fof"


@dataclass(frozen=True)
class And:
    items: tuple["Fof", ...]


@dataclass(frozen=True)
class Or:
    items: tuple["Fof", ...]


@dataclass(frozen=True)
class Implies:
    lhs: "Fof"
    rhs: "Fof"


@dataclass(frozen=True)
class Pred:
    name: str
    args: tuple[str, ...]


@dataclass(frozen=True)
class Equal:
    lhs: str
    rhs: str
    negated: bool = False


Fof = Union[Quant, Not, And, Or, Implies, Pred, Equal]


@dataclass(frozen=True)
class AnnotatedFormula:
    name: str
    role: str
    body: Fof


# --- lexer -----------------------------------------------------------------

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<comment>%[^\n]*)
  | (?P<op><=>|=>|<=|!=|[!?~&|=(),.:\[\]])
  | (?P<word>\$?[A-Za-z][A-Za-z0-9_]*)
    """,
    re.VERBOSE,
)


@dataclass
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _lex(text: str) -> list[_Tok]:
    toks = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(line, pos - line_start + 1, "a token", text[pos])
        kind = m.lastgroup
        if kind in ("op", "word"):
            toks.append(_Tok(kind, m.group(), line, pos - line_start + 1))
        chunk = m.group()
        nl = chunk.count("\n")
        if nl:
            line += nl
            line_start = pos + chunk.rindex("\n") + 1
        pos = m.end()
    toks.append(_Tok("eof", "", line, pos - line_start + 1))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.toks = _lex(text)
        self.i = 0
        self.entry = "?"

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> _Tok:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def fail(self, expected: str):
        t = self.tok
        raise ParseError(t.line, t.col, expected, t.text or "end of input")

    def expect(self, text: str) -> _Tok:
        if self.tok.text != text:
            self.fail(repr(text))
        t = self.tok
        self.i += 1
        return t

    def word(self, what: str, upper: bool | None = None) -> str:
        t = self.tok
        if t.kind != "word":
            self.fail(what)
        if upper is not None and t.text[0].isupper() != upper:
            self.fail(what)
        self.i += 1
        return t.text

    def parse_file(self) -> list[AnnotatedFormula]:
        out = []
        while self.tok.kind != "eof":
            out.append(self.annotated())
        return out

    def annotated(self) -> AnnotatedFormula:
        if self.tok.text != "fof":
            self.fail("'fof'")
        self.i += 1
        self.expect("(")
        name = self.word("a formula name", upper=False)
        self.entry = name
        self.expect(",")
        role = self.word("a role")
        if role not in ("axiom", "conjecture"):
            raise UnsupportedRole(name, role)
        self.expect(",")
        body = self.formula(bound=())
        self.expect(")")
        self.expect(".")
        return AnnotatedFormula(name, role, body)

    def formula(self, bound) -> Fof:
        lhs = self.disjunction(bound)
        if self.tok.text == "=>":
            self.i += 1
            return Implies(lhs, self.formula(bound))
        if self.tok.text in ("<=>", "<="):
            self.fail("a connective other than " + self.tok.text)
        return lhs

    def disjunction(self, bound) -> Fof:
        items = [self.conjunction(bound)]
        while self.tok.text == "|":
            self.i += 1
            items.append(self.conjunction(bound))
        return items[0] if len(items) == 1 else Or(tuple(items))

    def conjunction(self, bound) -> Fof:
        items = [self.unary(bound)]
        while self.tok.text == "&":
            self.i += 1
            items.append(self.unary(bound))
        return items[0] if len(items) == 1 else And(tuple(items))

    def unary(self, bound) -> Fof:
        t = self.tok
        if t.text == "~":
            self.i += 1
            return Not(self.unary(bound))
        if t.text in ("!", "?"):
            self.i += 1
            self.expect("[")
            vs = [self.word("a variable", upper=True)]
            while self.tok.text == ",":
                self.i += 1
                vs.append(self.word("a variable", upper=True))
            self.expect("]")
            self.expect(":")
            return Quant(t.text, tuple(vs), self.unary(bound + tuple(vs)))
        if t.text == "(":
            self.i += 1
            f = self.formula(bound)
            self.expect(")")
            return f
        if t.text in ("$true", "$false"):
            self.i += 1
            return Pred(t.text, ())
        return self.atomic(bound)

    def term(self, bound) -> str:
        name = self.word("a term")
        if self.tok.text == "(":
            raise FunctionSymbolsUnsupported(self.entry)
        if name[0].isupper() and name not in bound:
            t = self.toks[self.i - 1]
            raise ParseError(t.line, t.col, "a bound variable", name)
        return name

    def atomic(self, bound) -> Fof:
        t = self.tok
        if t.kind != "word":
            self.fail("an atomic formula")
        if t.text[0].islower() and self.peek().text == "(":
            self.i += 2
            args = [self.term(bound)]
            while self.tok.text == ",":
                self.i += 1
                args.append(self.term(bound))
            self.expect(")")
            if self.tok.text in ("=", "!="):
                raise FunctionSymbolsUnsupported(self.entry)
            return Pred(t.text, tuple(args))
        lhs = self.term(bound)
        if self.tok.text in ("=", "!="):
            neg = self.tok.text == "!="
            self.i += 1
            return Equal(lhs, self.term(bound), neg)
        if lhs[0].islower():
            return Pred(lhs, ())
        self.fail("'=' or '!='")


def parse_tptp(text: str) -> list[AnnotatedFormula]:
    """Parse FOF entries in file order."""
    return _Parser(text).parse_file()


# --- coherentization -------------------------------------------------------

def _nnf(f: Fof, positive: bool = True):
    """Negation normal form; returns nested ('and'|'or', [...]) / ('lit', Pred|Equal, sign)."""
    if isinstance(f, Not):
        return _nnf(f.body, not positive)
    if isinstance(f, (Pred, Equal)):
        return ("lit", f, positive)
    if isinstance(f, And):
        return ("and" if positive else "or", [_nnf(x, positive) for x in f.items])
    if isinstance(f, Or):
        return ("or" if positive else "and", [_nnf(x, positive) for x in f.items])
    if isinstance(f, Implies):
        raise NotCoherent("nested implication")
    if isinstance(f, Quant):
        if not positive:
            raise NotCoherent("negation over a quantifier")
        raise NotCoherent("quantifier below the conclusion prefix")
    raise TypeError(f)


def _dnf(n) -> list[list]:
    tag = n[0]
    if tag == "lit":
        f = n[1]
        if isinstance(f, Pred) and f.name in ("$true", "$false"):
            return [[]] if (f.name == "$true") == n[2] else []
        return [[n]]
    if tag == "or":
        out = []
        for x in n[1]:
            out.extend(_dnf(x))
        return out
    acc = [[]]
    for x in n[1]:
        acc = [a + b for a in acc for b in _dnf(x)]
    return acc


def _literal_atom(lit, sig: Signature) -> Atom:
    _, f, positive = lit
    if isinstance(f, Equal):
        pred = EQ if positive != f.negated else NEQ
        return Atom(pred, (term(f.lhs), term(f.rhs)))
    sig.declare(f.name, len(f.args))
    pred = f.name if positive else sig.complement(f.name)
    return Atom(pred, tuple(term(a) for a in f.args))


def _vars_of(atoms) -> set[str]:
    return {t.name for a in atoms for t in a.args if isinstance(t, Var)}


def _conjunction(lits, sig) -> tuple[Atom, ...]:
    seen: dict[Atom, None] = {}
    for lit in lits:
        seen.setdefault(_literal_atom(lit, sig))
    return tuple(seen)


def coherentize(
    f: AnnotatedFormula, sig: Signature, split_simple: bool = True
) -> tuple[list[CoherentFormula], Signature]:
    """Translate one FOF entry into coherent formulas.

    With ``split_simple``, an existential-free axiom with one premise atom and a
    conjunctive conclusion is split into single-atom implications named
    ``<name>_1``, ``<name>_2``, ...
    """
    sig = sig.copy()
    body = f.body
    universals: list[str] = []
    existentials: list[str] = []
    while isinstance(body, Quant) and body.kind == "!":
        universals.extend(body.variables)
        body = body.body
    while isinstance(body, Quant) and body.kind == "?":
        existentials.extend(body.variables)
        body = body.body
    if isinstance(body, Quant):
        raise NotCoherent("universal quantifier under an existential")

    if isinstance(body, Implies):
        prem_tree, concl = body.lhs, body.rhs
        prem = _nnf(prem_tree)
        conj = _dnf(prem)
        if len(conj) != 1:
            raise NotCoherent("disjunction in the premise")
        premises = _conjunction(conj[0], sig)
        clash = _vars_of(premises) & set(existentials)
        if clash:
            raise NotCoherent(f"existential {sorted(clash)[0]} occurs in the premise")
    else:
        premises, concl = (), body

    while isinstance(concl, Quant) and concl.kind == "?":
        for v in concl.variables:
            if v in universals or v in existentials:
                raise NotCoherent(f"variable {v} bound twice")
        existentials.extend(concl.variables)
        concl = concl.body
    disjuncts: list[Conjunction] = []
    for lits in _dnf(_nnf(concl)):
        if not lits:
            raise NotCoherent("conclusion is trivially true")
        c = Conjunction(_conjunction(lits, sig))
        if c not in disjuncts:
            disjuncts.append(c)

    out = CoherentFormula(f.name, tuple(universals), premises, tuple(existentials),
                          tuple(disjuncts))
    if (split_simple and f.role == "axiom" and len(premises) == 1 and not existentials
            and len(disjuncts) == 1 and len(disjuncts[0].atoms) > 1):
        parts = [
            CoherentFormula(f"{f.name}_{k}", tuple(universals), premises, (),
                            (Conjunction((a,)),))
            for k, a in enumerate(disjuncts[0].atoms, 1)
        ]
        return parts, sig
    return [out], sig


# --- support axioms ----------------------------------------------------------

@dataclass
class SupportAxiomOptions:
    excluded_middle_for: frozenset = frozenset({EQ})
    substitution_axioms: bool = True
    symmetry_for_neq: bool = True


def _letters(n: int) -> list[str]:
    out = []
    for i in range(n):
        s = chr(ord("A") + i % 26)
        out.append(s if i < 26 else f"{s}{i // 26}")
    return out


def _cf(name, us, prem, ex, disj) -> CoherentFormula:
    return CoherentFormula(name, tuple(us), tuple(prem), tuple(ex),
                           tuple(Conjunction(tuple(d)) for d in disj))


def _at(pred, names) -> Atom:
    return Atom(pred, tuple(Var(n) for n in names))


SUPPORT_PREFIXES = ("eq_reflexive", "eq_symmetric", "neq_symmetric")
SUPPORT_SUFFIXES = ("_neg_contradiction", "_excluded_middle")


def is_support_axiom(name: str) -> bool:
    return (name in SUPPORT_PREFIXES or name.endswith(SUPPORT_SUFFIXES)
            or re.search(r"_eqsub_\d+$", name) is not None)


def generate_support_axioms(sig: Signature, opts: SupportAxiomOptions | None = None
                            ) -> list[CoherentFormula]:
    """Complement, excluded-middle and equality axioms for ``sig``.

    Complements needed for excluded middle are registered in ``sig``.
    """
    opts = opts or SupportAxiomOptions()
    for p in opts.excluded_middle_for:
        if p not in sig.predicates:
            raise UnknownPredicate(p)
    for p in sorted(opts.excluded_middle_for):
        sig.complement(p)

    out = [
        _cf("eq_reflexive", ["A"], [], [], [[_at(EQ, "AA")]]),
        _cf("eq_symmetric", ["A", "B"], [_at(EQ, "AB")], [], [[_at(EQ, "BA")]]),
    ]
    if opts.symmetry_for_neq:
        out.append(_cf("neq_symmetric", ["A", "B"], [_at(NEQ, "AB")], [], [[_at(NEQ, "BA")]]))
    pairs = sig.complement_pairs()
    for pos, neg in pairs:
        vs = _letters(sig.predicates[pos])
        out.append(_cf(f"{pos}_neg_contradiction", vs, [_at(pos, vs), _at(neg, vs)], [], []))
    for pos, neg in pairs:
        if pos in opts.excluded_middle_for or neg in opts.excluded_middle_for:
            vs = _letters(sig.predicates[pos])
            out.append(_cf(f"{pos}_excluded_middle", vs, [], [],
                           [[_at(pos, vs)], [_at(neg, vs)]]))
    if opts.substitution_axioms:
        for p, n in sig.predicates.items():
            if p in (EQ, NEQ) or n == 0:
                continue
            vs = _letters(n)
            new = "X" if "X" not in vs else "Y"
            for i in range(n):
                moved = vs[:i] + [new] + vs[i + 1:]
                out.append(_cf(f"{p}_eqsub_{i + 1}", vs + [new],
                               [_at(p, vs), _at(EQ, [vs[i], new])], [], [[_at(p, moved)]]))
    return out


# --- whole problems ----------------------------------------------------------

@dataclass
class Problem:
    theory: Theory
    conjectures: dict[str, CoherentFormula] = field(default_factory=dict)
    axioms: list[CoherentFormula] = field(default_factory=list)  # user axioms only

    def conjecture(self, name: str | None = None) -> CoherentFormula:
        if name is None:
            if len(self.conjectures) != 1:
                raise TptpError(f"expected exactly one conjecture, found {len(self.conjectures)}")
            return next(iter(self.conjectures.values()))
        return self.conjectures[name]


def load_problem(texts: Union[str, list[str]], opts: SupportAxiomOptions | None = None,
                 support: bool = True, split_simple: bool = True) -> Problem:
    """Parse, coherentize and complete one or more TPTP texts into a theory."""
    if isinstance(texts, str):
        texts = [texts]
    sig = Signature()
    axioms: list[CoherentFormula] = []
    conjectures: dict[str, CoherentFormula] = {}
    for text in texts:
        for entry in parse_tptp(text):
            fs, sig = coherentize(entry, sig, split_simple=split_simple)
            if entry.role == "conjecture":
                conjectures[entry.name] = fs[0]
            else:
                axioms.extend(fs)
    extra = generate_support_axioms(sig, opts) if support else []
    names = {a.name for a in axioms}
    extra = [a for a in extra if a.name not in names]
    return Problem(Theory(sig, axioms + extra), conjectures, axioms)


def iter_atoms(f: CoherentFormula) -> Iterator[Atom]:
    yield from f.premises
    for d in f.disjuncts:
        yield from d.atoms


def _tptp_atom(a: Atom, sig: Signature | None) -> str:
    args = [t.name for t in a.args]
    if a.pred == EQ:
        return f"{args[0]} = {args[1]}"
    if a.pred == NEQ:
        return f"{args[0]} != {args[1]}"
    pos = sig.complements.get(a.pred) if sig is not None else None
    if pos is not None and a.pred == complement_name(pos):
        return f"~{pos}({','.join(args)})"
    return f"{a.pred}({','.join(args)})" if args else a.pred


def format_tptp(f: CoherentFormula, role: str = "axiom", sig: Signature | None = None) -> str:
    """One ``fof(...)`` line; complement predicates print as negations when
    ``sig`` records the pairing."""
    def conj(c: Conjunction) -> str:
        return " & ".join(_tptp_atom(a, sig) for a in c.atoms) or "$true"

    if not f.disjuncts:
        body = "$false"
    else:
        body = " | ".join(f"({conj(d)})" for d in f.disjuncts)
    if f.existentials:
        body = f"? [{','.join(f.existentials)}] : ({body})"
    if f.premises:
        prem = " & ".join(_tptp_atom(a, sig) for a in f.premises)
        body = f"({prem}) => ({body})"
    if f.universals:
        body = f"! [{','.join(f.universals)}] : ({body})"
    return f"fof({f.name},{role},({body}))."
