"""Forward-chaining proof search for coherent logic.

Search strategy
---------------
Axioms are divided into *definite* rules (no existential, at most one
disjunct) and *choice* rules (witnesses and/or a case split).  At every
search node the definite rules are applied to a fixpoint; a choice is then
made among the applicable choice instances, in theory order with
excluded-middle axioms last.  Iterative deepening bounds the number of
choices along any branch.  Once a proof is found it is sliced: only the
definite steps that some later step (or the closing leaf) depends on are
kept.

Two redundancy filters keep the branching factor down, neither of which
loses proofs:

* a choice instance whose conclusion already holds (some disjunct is true,
  with existing constants for its existentials) is skipped;
* two consecutive witness steps that do not depend on each other are only
  tried in one order.
"""

from __future__ import annotations

import itertools
import json
import time
from dataclasses import dataclass, field
from typing import Iterator, Optional, Union

from .formula import (
    Atom,
    CoherentFormula,
    Conjunction,
    Const,
    Theory,
    Var,
    apply_substitution,
)

# --- proof objects -----------------------------------------------------------


@dataclass(frozen=True)
class Intro:
    constants: tuple[str, ...]
    facts: tuple[Atom, ...]


@dataclass(frozen=True)
class MP:
    axiom: str
    instantiation: dict  # universal variable -> constant name
    witnesses: tuple[str, ...]
    concluded: tuple[Conjunction, ...]  # empty: the step derives false


@dataclass(frozen=True)
class Case:
    facts: Conjunction
    steps: tuple


@dataclass(frozen=True)
class CaseSplit:
    from_step: int  # index, in the same branch, of the disjunctive MP
    cases: tuple[Case, ...]


@dataclass(frozen=True)
class QedAssumption:
    goal_disjunct_index: int
    goal_substitution: dict  # goal existential -> constant name


@dataclass(frozen=True)
class QedContradiction:
    pass


@dataclass(frozen=True)
class QedCaseSplit:
    pass


ProofStep = Union[MP, CaseSplit, QedAssumption, QedContradiction, QedCaseSplit]


@dataclass(frozen=True)
class Goal:
    existentials: tuple[str, ...]
    disjuncts: tuple[Conjunction, ...]  # universals already replaced


@dataclass
class Proof:
    conjecture_name: str
    intro: Intro
    body: tuple
    goal: Goal
    statistics: dict = field(default_factory=dict)


@dataclass(frozen=True)
class Unprovable:
    reason: str  # "limit-exhausted" | "timeout"

    def __bool__(self):
        return False


@dataclass(frozen=True)
class SearchLimits:
    max_mp_steps: int = 12
    timeout: float = 60.0
    max_constants: int = 40

    def __post_init__(self):
        if self.max_mp_steps < 0 or self.timeout <= 0 or self.max_constants <= 0:
            raise ValueError("search limits must be positive (the step bound may be 0)")


class _Timeout(Exception):
    pass


# --- helpers -----------------------------------------------------------------

def _fresh_name(base: str, taken) -> str:
    if base not in taken:
        return base
    k = 1
    while f"{base}{k}" in taken:
        k += 1
    return f"{base}{k}"


def theory_constants(theory: Theory) -> list[str]:
    out: dict[str, None] = {}
    for ax in theory.axioms:
        for a in (*ax.premises, *(x for d in ax.disjuncts for x in d.atoms)):
            for t in a.args:
                if isinstance(t, Const):
                    out.setdefault(t.name)
    return list(out)


def _letters():
    for k in itertools.count():
        suffix = str(k) if k else ""
        for ch in "abcdefghijklmnopqrstuvxyz":  # w is kept for witnesses
            yield ch + suffix


def skolemize_conjecture(c: CoherentFormula, taken=()) -> tuple[Intro, Goal]:
    """One fresh constant per universal: a, b, c, ... in quantifier order."""
    taken = set(taken)
    s = {}
    names = _letters()
    for v in c.universals:
        name = next(n for n in names if n not in taken)
        taken.add(name)
        s[v] = Const(name)
    facts = tuple(apply_substitution(a, s) for a in c.premises)
    part = dict(s)
    for e in c.existentials:
        part[e] = Var(e)
    disj = tuple(Conjunction(tuple(_partial(a, part) for a in d.atoms)) for d in c.disjuncts)
    return Intro(tuple(x.name for x in s.values()), facts), Goal(tuple(c.existentials), disj)


def _partial(a: Atom, s) -> Atom:
    return Atom(a.pred, tuple(s.get(t.name, t) if isinstance(t, Var) else t for t in a.args))


# --- fact base -----------------------------------------------------------------

Key = tuple  # (pred, (arg, ...))


class FactBase:
    """Ground facts indexed by predicate, with constants in creation order.

    Mutations are logged so that search can roll back to a mark.
    """

    def __init__(self, facts=(), constants=()):
        self.log: list[Key] = []
        self.info: dict[Key, tuple] = {}  # key -> (position, derivation)
        self.by_pred: dict[str, list[tuple]] = {}
        self.by_arg: dict[tuple, list[tuple]] = {}  # (pred, position, constant) -> args
        self.constants: list[str] = []
        self.cindex: dict[str, int] = {}
        for c in constants:
            self.add_constant(c)
        for f in facts:
            k = f.key() if isinstance(f, Atom) else f
            for c in k[1]:
                if c not in self.cindex:
                    self.add_constant(c)
            self.add(k, ("given",))

    def add_constant(self, name: str):
        self.cindex[name] = len(self.constants)
        self.constants.append(name)

    def add(self, key: Key, derivation) -> bool:
        if key in self.info:
            return False
        self.info[key] = (len(self.log), derivation)
        self.log.append(key)
        pred, args = key
        self.by_pred.setdefault(pred, []).append(args)
        by_arg = self.by_arg
        for i, c in enumerate(args):
            k = (pred, i, c)
            lst = by_arg.get(k)
            if lst is None:
                by_arg[k] = [args]
            else:
                lst.append(args)
        return True

    def __contains__(self, key) -> bool:
        if isinstance(key, Atom):
            key = key.key()
        return key in self.info

    def __len__(self):
        return len(self.log)

    def mark(self) -> tuple[int, int]:
        return len(self.log), len(self.constants)

    def undo(self, mark):
        nf, nc = mark
        while len(self.log) > nf:
            key = self.log.pop()
            del self.info[key]
            pred, args = key
            self.by_pred[pred].pop()
            for i, c in enumerate(args):
                self.by_arg[(pred, i, c)].pop()
        while len(self.constants) > nc:
            del self.cindex[self.constants.pop()]

    def atoms(self) -> list[Atom]:
        return [Atom(p, tuple(Const(a) for a in args)) for p, args in self.log]


# --- compiled rules ---------------------------------------------------------------

def _pattern(a: Atom) -> tuple:
    return (a.pred, tuple((isinstance(t, Var), t.name) for t in a.args))


class _Rule:
    def __init__(self, idx: int, ax: CoherentFormula):
        self.idx = idx
        self.ax = ax
        self.name = ax.name
        self.universals = ax.universals
        self.premises = [_pattern(a) for a in ax.premises]
        self.disjuncts = [[_pattern(a) for a in d.atoms] for d in ax.disjuncts]
        in_prem = {n for _, args in self.premises for isv, n in args if isv}
        self.free = [v for v in ax.universals if v not in in_prem]
        self.premise_preds = {p for p, _ in self.premises}
        self.existentials = ax.existentials
        self.definite = not ax.existentials and len(ax.disjuncts) <= 1
        self.excluded_middle = ax.name.endswith("_excluded_middle")


def _unify(pat, args, b):
    nb = None
    for (isv, n), c in zip(pat, args):
        if isv:
            cur = (b if nb is None else nb).get(n)
            if cur is None:
                if nb is None:
                    nb = dict(b)
                nb[n] = c
            elif cur != c:
                return None
        elif n != c:
            return None
    return b if nb is None else nb


def _ground(pat, b) -> Key:
    pred, args = pat
    return (pred, tuple(b[n] if isv else n for isv, n in args))


def _join(fb: FactBase, pats: list, b: dict) -> Iterator[dict]:
    """All extensions of ``b`` matching every pattern against ``fb``."""
    if not pats:
        yield b
        return
    # most-bound pattern first
    best, score, probe = 0, -1, None
    for i, (_, args) in enumerate(pats):
        s, first = 0, None
        for j, (isv, n) in enumerate(args):
            if not isv:
                s += 1
                first = (j, n) if first is None else first
            elif n in b:
                s += 1
                first = (j, b[n]) if first is None else first
        if s > score:
            best, score, probe = i, s, first
    pred, args = pats[best]
    rest = pats[:best] + pats[best + 1:]
    if score == len(args):
        if _ground(pats[best], b) in fb.info:
            yield from _join(fb, rest, b)
        return
    if probe is None:
        cands = fb.by_pred.get(pred, ())
    else:
        cands = fb.by_arg.get((pred, probe[0], probe[1]), ())
    for fargs in cands[:]:
        nb = _unify(args, fargs, b)
        if nb is not None:
            yield from _join(fb, rest, nb)


def _rule_matches(fb: FactBase, rule: _Rule, delta: Optional[tuple[int, int]] = None,
                  new_consts_from: int = 0) -> Iterator[dict]:
    """Premise matches of ``rule``, extended over constants for free universals.

    With ``delta=(lo, hi)`` only matches using a fact at a log position in
    [lo, hi) or a constant created at or after ``new_consts_from`` are
    guaranteed to be produced (others may be too).
    """
    pats = rule.premises
    if isinstance(delta, dict) and not rule.free:
        yield from _delta_join(fb, pats, delta)
        return
    if isinstance(delta, dict):
        delta = delta["__range__"]
    if delta is None or rule.free:
        base = _join(fb, pats, {})
        if rule.free and delta is not None and new_consts_from >= len(fb.constants):
            # no new constants: only premise matches from the delta can be new
            base = _delta_join(fb, pats, delta)
        for b in base:
            if not rule.free:
                yield b
                continue
            for combo in itertools.product(fb.constants, repeat=len(rule.free)):
                nb = dict(b)
                nb.update(zip(rule.free, combo))
                yield nb
        return
    yield from _delta_join(fb, pats, delta)


def _delta_join(fb: FactBase, pats, delta) -> Iterator[dict]:
    if isinstance(delta, dict):
        by_pred = delta
    else:
        by_pred = _delta_index(fb, *delta)
    for i, (pred, args) in enumerate(pats):
        rest = pats[:i] + pats[i + 1:]
        for fargs in by_pred.get(pred, ()):
            b = _unify(args, fargs, {})
            if b is not None:
                yield from _join(fb, rest, b)


def _delta_index(fb: FactBase, lo: int, hi: int) -> dict:
    out: dict[str, list] = {}
    for pos in range(lo, hi):
        pred, args = fb.log[pos]
        out.setdefault(pred, []).append(args)
    return out


def _holds(fb: FactBase, disj_pats, b: dict) -> bool:
    """Some disjunct already true, existentials ranging over known constants."""
    for d in disj_pats:
        for _ in _join(fb, d, b):
            return True
    return False


def applicable_instances(fb: FactBase, ax: CoherentFormula) -> list[dict]:
    """Productive instances of ``ax`` over ``fb``, lexicographic in constant order."""
    rule = _Rule(0, ax)
    seen, out = set(), []
    for b in _rule_matches(fb, rule):
        key = tuple(fb.cindex[b[v]] for v in rule.universals)
        if key in seen:
            continue
        seen.add(key)
        if rule.disjuncts and not rule.existentials:
            productive = any(any(_ground(p, b) not in fb.info for p in d) for d in rule.disjuncts)
            if not productive:
                continue
        out.append((key, b))
    out.sort(key=lambda kb: kb[0])
    return [{v: Const(b[v]) for v in rule.universals} for _, b in out]


# --- search -----------------------------------------------------------------------

@dataclass
class _Step:
    rule: _Rule
    binding: dict
    witnesses: tuple = ()
    seq: int = 0
    premises: tuple = ()  # ground premise keys


@dataclass
class _Result:
    steps: list  # proof steps of this branch suffix
    needed: set  # fact keys this suffix relies on from above


class _Search:
    def __init__(self, theory: Theory, conj: CoherentFormula, lim: SearchLimits):
        self.theory = theory
        self.lim = lim
        rules = [_Rule(i, ax) for i, ax in enumerate(theory.axioms)]
        self.definite = [r for r in rules if r.definite]
        choice = [r for r in rules if not r.definite]
        self.choice = [r for r in choice if not r.excluded_middle] + \
                      [r for r in choice if r.excluded_middle]
        self.priority = {r.name: i for i, r in enumerate(self.choice)}
        consts = theory_constants(theory)
        self.intro, self.goal = skolemize_conjecture(conj, consts)
        self.fb = FactBase(constants=consts + list(self.intro.constants))
        self.n_base = len(self.fb.constants)
        for a in self.intro.facts:
            self.fb.add(a.key(), ("intro",))
        self.goal_pats = [[_pattern(a) for a in d.atoms] for d in self.goal.disjuncts]
        self.focus = {t.name for d in self.goal.disjuncts for a in d.atoms
                      for t in a.args if isinstance(t, Const)} or set(self.intro.constants)
        self.seq = 0
        self.nodes = 0
        self.deadline = 0.0

    # saturation -------------------------------------------------------------
    def saturate(self, lo: int, clo: int) -> Optional[_Step]:
        fb = self.fb
        while True:
            hi = len(fb.log)
            nconst = len(fb.constants)
            if lo >= hi and clo >= nconst:
                return None
            dindex = _delta_index(fb, lo, hi)
            new_consts = clo < nconst
            dindex["__range__"] = (lo, hi)
            for rule in self.definite:
                if not (rule.free and new_consts) and not any(
                        p in dindex for p in rule.premise_preds):
                    continue
                for b in _rule_matches(fb, rule, dindex, clo):
                    if not rule.disjuncts:
                        return self._record(rule, b)
                    concl = [_ground(p, b) for p in rule.disjuncts[0]]
                    if all(k in fb.info for k in concl):
                        continue
                    step = self._record(rule, b)
                    for k in concl:
                        fb.add(k, step)
            lo, clo = hi, nconst

    def _record(self, rule, b, witnesses=()) -> _Step:
        self.seq += 1
        prem = tuple(_ground(p, b) for p in rule.premises)
        return _Step(rule, dict(b), tuple(witnesses), self.seq, prem)

    # goal -------------------------------------------------------------------
    def match_goal(self):
        fb = self.fb
        for i, pats in enumerate(self.goal_pats):
            best = None
            for b in _join(fb, pats, {}):
                key = tuple(fb.cindex[b[v]] for v in self.goal.existentials if v in b)
                if best is None or key < best[0]:
                    best = (key, b)
            if best is not None:
                b = best[1]
                needed = {_ground(p, b) for p in pats}
                sub = {v: b[v] for v in self.goal.existentials if v in b}
                return i, sub, needed
        return None

    # choices ----------------------------------------------------------------
    def choices(self, last):
        fb = self.fb
        out = []
        for rule in self.choice:
            if rule.existentials and len(fb.constants) + len(rule.existentials) > self.lim.max_constants:
                continue
            seen = set()
            for b in _rule_matches(fb, rule):
                idx = tuple(fb.cindex[b[v]] for v in rule.universals)
                if idx in seen:
                    continue
                seen.add(idx)
                if _holds(fb, rule.disjuncts, b):
                    continue
                key = (self.priority[rule.name], idx)
                dep = last is not None and self._depends(rule, b, last)
                if last is not None and key <= last[0] and not dep:
                    continue
                # goal-directed order: instances over goal constants first,
                # then those building on the previous construction
                off = sum(1 for v in rule.universals if b[v] not in self.focus)
                out.append(((rule.excluded_middle, off, not dep, key), key, rule, b))
        out.sort(key=lambda x: x[0])
        return [x[1:] for x in out]

    def _depends(self, rule, b, last) -> bool:
        _, fact_from, const_from = last
        if any(self.fb.cindex[b[v]] >= const_from for v in rule.universals):
            return True
        return any(self.fb.info[_ground(p, b)][0] >= fact_from for p in rule.premises)

    # recursion ----------------------------------------------------------------
    def tick(self):
        self.nodes += 1
        if self.nodes % 64 == 0 and time.monotonic() > self.deadline:
            raise _Timeout

    def solve(self, budget: int, lo: int, clo: int, last) -> Optional[_Result]:
        self.tick()
        fb = self.fb
        mark = fb.mark()
        try:
            bottom = self.saturate(lo, clo)
            if bottom is not None:
                return self._close([bottom], set(bottom.premises), [QedContradiction()], mark)
            g = self.match_goal()
            if g is not None:
                i, sub, needed = g
                leaf = QedAssumption(i, {v: c for v, c in sub.items()})
                return self._close([], needed, [leaf], mark)
            if budget == 0:
                return None
            done = (len(fb.log), len(fb.constants))
            for key, rule, b in self.choices(last):
                res = self.try_choice(rule, b, key, budget, done)
                if res is not None:
                    return self._close([], res.needed, res.steps, mark)
            return None
        finally:
            fb.undo(mark)

    def try_choice(self, rule: _Rule, b: dict, key, budget: int, done) -> Optional[_Result]:
        fb = self.fb
        mark = fb.mark()
        names = []
        taken = set(fb.cindex)
        b = dict(b)
        for v in rule.existentials:
            name = self.witness_name(taken)
            taken.add(name)
            names.append(name)
            b[v] = name
        step = self._record(rule, {v: b[v] for v in rule.universals}, names)
        for n in names:
            fb.add_constant(n)
        concluded = tuple(Conjunction(tuple(_key_atom(_ground(p, b)) for p in d))
                          for d in rule.disjuncts)
        mp = _mp_of(step, concluded)
        try:
            if len(rule.disjuncts) == 1:
                for p in rule.disjuncts[0]:
                    fb.add(_ground(p, b), step)
                sub = self.solve(budget - 1, done[0], done[1],
                                 (key, done[0], done[1]) if rule.existentials else None)
                if sub is None:
                    return None
                own = {_ground(p, b) for p in rule.disjuncts[0]}
                return _Result([mp] + sub.steps, (sub.needed - own) | set(step.premises))
            cases, needed = [], set(step.premises)
            for k, d in enumerate(rule.disjuncts):
                inner = fb.mark()
                own = set()
                for p in d:
                    kk = _ground(p, b)
                    if fb.add(kk, ("case", step, k)):
                        own.add(kk)
                sub = self.solve(budget - 1, done[0], done[1], None)
                fb.undo(inner)
                if sub is None:
                    return None
                cases.append(Case(concluded[k], tuple(sub.steps)))
                needed |= sub.needed - own
            split = CaseSplit(0, tuple(cases))
            return _Result([mp, split, QedCaseSplit()], needed)
        finally:
            fb.undo(mark)

    def witness_name(self, taken) -> str:
        if "w" not in taken:
            return "w"
        k = 1
        while f"w{k}" in taken:
            k += 1
        return f"w{k}"

    def _close(self, tail_mps: list, needed: set, tail, mark) -> _Result:
        """Prefix the saturation steps of this node that the suffix relies on."""
        fb = self.fb
        lo = mark[0]
        keep: dict[int, _Step] = {s.seq: s for s in tail_mps}
        work = list(needed)
        for s in tail_mps:
            work.extend(s.premises)
        seen, out_needed = set(), set()
        while work:
            k = work.pop()
            if k in seen:
                continue
            seen.add(k)
            pos, der = fb.info[k]
            if pos >= lo and isinstance(der, _Step):
                keep.setdefault(der.seq, der)
                work.extend(der.premises)
            else:
                out_needed.add(k)
        steps = []
        for seq in sorted(keep):
            s = keep[seq]
            concl = ()
            if s.rule.disjuncts:
                concl = (Conjunction(tuple(_key_atom(_ground(p, s.binding))
                                           for p in s.rule.disjuncts[0])),)
            steps.append(_mp_of(s, concl))
        return _Result(steps + list(tail), out_needed)


def _key_atom(k: Key) -> Atom:
    return Atom(k[0], tuple(Const(a) for a in k[1]))


def _mp_of(step: _Step, concluded) -> MP:
    inst = {v: step.binding[v] for v in step.rule.universals}
    return MP(step.rule.name, inst, tuple(step.witnesses), tuple(concluded))


def _fix_splits(steps: tuple) -> tuple:
    out = []
    for s in steps:
        if isinstance(s, CaseSplit):
            s = CaseSplit(len(out) - 1, tuple(Case(c.facts, _fix_splits(c.steps)) for c in s.cases))
        out.append(s)
    return tuple(out)


def _rename_witnesses(body: tuple, taken: set) -> tuple:
    """Rename witnesses so each is unique across the whole proof, numbered
    in pre-order (sibling branches are searched independently and may reuse
    names)."""
    taken = set(taken)

    def sub_atom(a, m):
        return Atom(a.pred, tuple(Const(m.get(t.name, t.name)) for t in a.args))

    def sub_conj(c, m):
        return Conjunction(tuple(sub_atom(a, m) for a in c.atoms))

    def walk(steps, m):
        out = []
        for st in steps:
            if isinstance(st, MP):
                m = dict(m)
                new = []
                for w in st.witnesses:
                    n = _fresh_name("w", taken)
                    taken.add(n)
                    m[w] = n
                    new.append(n)
                st = MP(st.axiom, {v: m.get(c, c) for v, c in st.instantiation.items()},
                        tuple(new), tuple(sub_conj(c, m) for c in st.concluded))
            elif isinstance(st, CaseSplit):
                st = CaseSplit(st.from_step, tuple(Case(sub_conj(c.facts, m), walk(c.steps, m))
                                                   for c in st.cases))
            elif isinstance(st, QedAssumption):
                st = QedAssumption(st.goal_disjunct_index,
                                   {v: m.get(c, c) for v, c in st.goal_substitution.items()})
            out.append(st)
        return tuple(out)

    return walk(body, {})


def proof_statistics(body) -> dict:
    def walk(steps):
        mps, depth, choices = 0, 0, 0
        for s in steps:
            if isinstance(s, MP):
                mps += 1
                depth += 1
                if s.witnesses or len(s.concluded) > 1:
                    choices += 1
            elif isinstance(s, CaseSplit):
                sub = [walk(c.steps) for c in s.cases]
                mps += sum(x[0] for x in sub)
                return mps, depth + max(x[1] for x in sub), choices + max(x[2] for x in sub)
        return mps, depth, choices

    mps, depth, choices = walk(body)
    return {"mp_count": mps, "max_depth": depth, "choice_depth": choices}


def prove(theory: Theory, conj: CoherentFormula, lim: SearchLimits | None = None):
    """Search for a proof of ``conj``; returns a Proof or an Unprovable value."""
    lim = lim or SearchLimits()
    search = _Search(theory, conj, lim)
    search.deadline = time.monotonic() + lim.timeout
    try:
        for depth in range(0, lim.max_mp_steps + 1):
            res = search.solve(depth, 0, 0, None)
            if res is not None:
                body = _rename_witnesses(_fix_splits(tuple(res.steps)),
                                         set(search.fb.constants[:search.n_base]))
                stats = proof_statistics(body)
                stats["deepening_level"] = depth
                stats["search_nodes"] = search.nodes
                return Proof(conj.name, search.intro, body, search.goal, stats)
    except _Timeout:
        return Unprovable("timeout")
    return Unprovable("limit-exhausted")


# --- checking ------------------------------------------------------------------

@dataclass(frozen=True)
class Valid:
    def __bool__(self):
        return True


@dataclass(frozen=True)
class Invalid:
    step_index: int  # pre-order position of the offending step (-1: the intro)
    reason: str

    def __bool__(self):
        return False


class _Reject(Exception):
    def __init__(self, index: int, reason: str):
        super().__init__(reason)
        self.index = index
        self.reason = reason


def check_proof(theory: Theory, conj: CoherentFormula, proof: Proof) -> Union[Valid, Invalid]:
    """Replay ``proof`` step by step; independent of the search code."""
    intro, goal = skolemize_conjecture(conj, theory_constants(theory))
    if proof.intro != intro:
        return Invalid(-1, "intro does not match the skolemized conjecture")
    if tuple(proof.goal.existentials) != goal.existentials or \
            tuple(proof.goal.disjuncts) != goal.disjuncts:
        return Invalid(-1, "goal does not match the conjecture")
    axioms = {a.name: a for a in theory.axioms}
    consts = set(theory_constants(theory)) | set(intro.constants)
    facts = {a.key() for a in intro.facts}
    counter = itertools.count()
    used = set(consts)  # every constant mentioned so far, in any branch
    try:
        _check_branch(list(proof.body), facts, consts, axioms, goal, counter, used)
    except _Reject as r:
        return Invalid(r.index, r.reason)
    return Valid()


def _check_branch(steps, facts, consts, axioms, goal, counter, used):
    facts, consts = set(facts), set(consts)
    bottom = False
    pending = None  # (branch position, axiom, substitution) of a disjunctive MP
    closed_split = False
    for pos, st in enumerate(steps):
        idx = next(counter)
        if bottom or (closed_split and not isinstance(st, QedCaseSplit)):
            raise _Reject(idx, "step after the branch was closed")
        if isinstance(st, MP):
            if pending is not None:
                raise _Reject(idx, "disjunctive step not followed by its case split")
            ax = axioms.get(st.axiom)
            if ax is None:
                raise _Reject(idx, f"unknown axiom {st.axiom}")
            inst = dict(st.instantiation)
            if set(inst) != set(ax.universals):
                raise _Reject(idx, "instantiation does not cover exactly the universals")
            for v, c in inst.items():
                if c not in consts:
                    raise _Reject(idx, f"{v} instantiated to unknown constant {c}")
            sub = {v: Const(c) for v, c in inst.items()}
            for a in ax.premises:
                if apply_substitution(a, sub).key() not in facts:
                    raise _Reject(idx, f"premise {apply_substitution(a, sub)} not established")
            if len(st.witnesses) != len(ax.existentials):
                raise _Reject(idx, "wrong number of witnesses")
            for e, w in zip(ax.existentials, st.witnesses):
                if w in used or w in sub.values():
                    raise _Reject(idx, f"witness {w} is not fresh")
                sub[e] = Const(w)
                used.add(w)
                consts.add(w)
            expect = tuple(apply_substitution(d, sub) for d in ax.disjuncts)
            if tuple(st.concluded) != expect:
                raise _Reject(idx, "concluded facts differ from the axiom instance")
            if not expect:
                bottom = True
            elif len(expect) == 1:
                facts.update(a.key() for a in expect[0].atoms)
            else:
                pending = (pos, expect)
        elif isinstance(st, CaseSplit):
            if pending is None:
                raise _Reject(idx, "case split without a disjunctive step")
            src, expect = pending
            if st.from_step != src:
                raise _Reject(idx, f"case split refers to step {st.from_step}, expected {src}")
            if tuple(c.facts for c in st.cases) != expect:
                raise _Reject(idx, "cases do not match the disjuncts in order")
            for case in st.cases:
                _check_branch(list(case.steps), facts | {a.key() for a in case.facts.atoms},
                              consts, axioms, goal, counter, used)
            pending = None
            closed_split = True
        elif isinstance(st, QedCaseSplit):
            if not closed_split:
                raise _Reject(idx, "QED by case split without a case split")
            if pos != len(steps) - 1:
                raise _Reject(idx, "QED step is not last")
            return
        elif isinstance(st, QedContradiction):
            raise _Reject(idx, "contradiction claimed but false was not derived")
        elif isinstance(st, QedAssumption):
            if pending is not None:
                raise _Reject(idx, "disjunctive step not followed by its case split")
            i = st.goal_disjunct_index
            if not 0 <= i < len(goal.disjuncts):
                raise _Reject(idx, "goal disjunct index out of range")
            sub = {v: Const(c) for v, c in st.goal_substitution.items()}
            if not set(sub) <= set(goal.existentials):
                raise _Reject(idx, "substitution binds a non-goal variable")
            for c in sub.values():
                if c.name not in consts:
                    raise _Reject(idx, f"goal instantiated to unknown constant {c.name}")
            try:
                atoms = apply_substitution(goal.disjuncts[i], sub).atoms
            except Exception:
                raise _Reject(idx, "goal substitution leaves a variable unbound") from None
            for a in atoms:
                if a.key() not in facts:
                    raise _Reject(idx, f"goal atom {a} not established")
            if pos != len(steps) - 1:
                raise _Reject(idx, "QED step is not last")
            return
        else:
            raise _Reject(idx, f"unknown step {type(st).__name__}")
        if bottom:
            # the only admissible continuation is the contradiction leaf
            if pos + 1 < len(steps) and isinstance(steps[pos + 1], QedContradiction):
                next(counter)
                if pos + 2 != len(steps):
                    raise _Reject(idx + 2, "QED step is not last")
                return
            raise _Reject(idx, "false derived but branch not closed by contradiction")
    raise _Reject(next(counter) - 1, "branch does not end with a QED step")


# --- serialization ---------------------------------------------------------------

def _atom_json(a: Atom):
    return [a.pred, [t.name for t in a.args]]


def _json_atom(x) -> Atom:
    from .formula import term
    return Atom(x[0], tuple(term(n) for n in x[1]))


def _conj_json(c: Conjunction):
    return [_atom_json(a) for a in c.atoms]


def _step_json(s):
    if isinstance(s, MP):
        return {"kind": "mp", "axiom": s.axiom, "instantiation": dict(s.instantiation),
                "witnesses": list(s.witnesses), "concluded": [_conj_json(c) for c in s.concluded]}
    if isinstance(s, CaseSplit):
        return {"kind": "case_split", "from_step": s.from_step,
                "cases": [{"facts": _conj_json(c.facts), "steps": [_step_json(x) for x in c.steps]}
                          for c in s.cases]}
    if isinstance(s, QedAssumption):
        return {"kind": "qed_assumption", "disjunct": s.goal_disjunct_index,
                "instantiation": dict(s.goal_substitution)}
    if isinstance(s, QedContradiction):
        return {"kind": "qed_contradiction"}
    if isinstance(s, QedCaseSplit):
        return {"kind": "qed_case_split"}
    raise TypeError(s)


def _json_step(d):
    kind = d["kind"]
    if kind == "mp":
        return MP(d["axiom"], dict(d["instantiation"]), tuple(d["witnesses"]),
                  tuple(Conjunction(tuple(_json_atom(a) for a in c)) for c in d["concluded"]))
    if kind == "case_split":
        return CaseSplit(d["from_step"], tuple(
            Case(Conjunction(tuple(_json_atom(a) for a in c["facts"])),
                 tuple(_json_step(x) for x in c["steps"])) for c in d["cases"]))
    if kind == "qed_assumption":
        return QedAssumption(d["disjunct"], dict(d["instantiation"]))
    if kind == "qed_contradiction":
        return QedContradiction()
    if kind == "qed_case_split":
        return QedCaseSplit()
    raise ValueError(f"unknown step kind {kind!r}")


def proof_to_json(p: Proof) -> str:
    doc = {
        "conjecture": p.conjecture_name,
        "intro": {"kind": "intro", "constants": list(p.intro.constants),
                  "facts": [_atom_json(a) for a in p.intro.facts]},
        "goal": {"existentials": list(p.goal.existentials),
                 "disjuncts": [_conj_json(c) for c in p.goal.disjuncts]},
        "steps": [_step_json(s) for s in p.body],
        "statistics": p.statistics,
    }
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"


def proof_from_json(text: str) -> Proof:
    d = json.loads(text)
    intro = Intro(tuple(d["intro"]["constants"]), tuple(_json_atom(a) for a in d["intro"]["facts"]))
    goal = Goal(tuple(d["goal"]["existentials"]),
                tuple(Conjunction(tuple(_json_atom(a) for a in c)) for c in d["goal"]["disjuncts"]))
    return Proof(d["conjecture"], intro, tuple(_json_step(s) for s in d["steps"]), goal,
                 d.get("statistics", {}))
