"""Finite-model oracle shared by the soundness and translation tests.

Formulas are grounded over a domain {0..n-1} into propositional formulas
whose atoms are ground predicate instances; a SAT solver then searches all
interpretations of that domain at once.  Equality is identity, ``neq`` is
its negation and a complement predicate is the negation of its partner.
Nothing here touches the prover.
"""

from __future__ import annotations

import itertools

from pysat.formula import PYSAT_FALSE, PYSAT_TRUE, And, Atom, Formula, Neg, Or, XOr
from pysat.solvers import Solver

from proofsketch import tptp as T
from proofsketch.formula import Const, Signature


class Grounder:
    def __init__(self, sig: Signature, n: int, constants: dict[str, int] | None = None):
        self.n = n
        self.constants = constants or {}
        # nR -> R for every complement pair (positive member first)
        self.negative = {neg: pos for pos, neg in sig.complement_pairs() if pos not in ("eq", "neq")}

    def value(self, name: str, env: dict) -> int:
        if name in env:
            return env[name]
        return self.constants[name]

    def atom(self, pred: str, tup: tuple[int, ...]):
        if pred == "eq":
            return PYSAT_TRUE if tup[0] == tup[1] else PYSAT_FALSE
        if pred == "neq":
            return PYSAT_FALSE if tup[0] == tup[1] else PYSAT_TRUE
        if pred in self.negative:
            return Neg(Atom(f"{self.negative[pred]}{tup}"))
        return Atom(f"{pred}{tup}")

    def _all(self, items):
        items = list(items)
        return And(*items) if items else PYSAT_TRUE

    def _any(self, items):
        items = list(items)
        return Or(*items) if items else PYSAT_FALSE

    # FOF trees straight from the parser
    def fof(self, f, env: dict):
        if isinstance(f, T.Pred) and f.name in ("$true", "$false"):
            return PYSAT_TRUE if f.name == "$true" else PYSAT_FALSE
        if isinstance(f, T.Pred):
            return self.atom(f.name, tuple(self.value(a, env) for a in f.args))
        if isinstance(f, T.Equal):
            same = self.value(f.lhs, env) == self.value(f.rhs, env)
            return PYSAT_TRUE if same != f.negated else PYSAT_FALSE
        if isinstance(f, T.Not):
            return Neg(self.fof(f.body, env))
        if isinstance(f, T.And):
            return self._all(self.fof(x, env) for x in f.items)
        if isinstance(f, T.Or):
            return self._any(self.fof(x, env) for x in f.items)
        if isinstance(f, T.Implies):
            return Or(Neg(self.fof(f.lhs, env)), self.fof(f.rhs, env))
        if isinstance(f, T.Quant):
            combine = self._all if f.kind == "!" else self._any
            return combine(self.fof(f.body, {**env, **dict(zip(f.variables, vals))})
                           for vals in itertools.product(range(self.n), repeat=len(f.variables)))
        raise TypeError(f)

    def _ground_atom(self, a, env):
        return self.atom(a.pred, tuple(
            self.constants[t.name] if isinstance(t, Const) else env[t.name] for t in a.args))

    def coherent(self, cf, env: dict | None = None):
        """The universal closure of a coherent formula."""
        env = env or {}
        out = []
        for us in itertools.product(range(self.n), repeat=len(cf.universals)):
            e = {**env, **dict(zip(cf.universals, us))}
            prem = self._all(self._ground_atom(a, e) for a in cf.premises)
            concl = []
            for xs in itertools.product(range(self.n), repeat=len(cf.existentials)):
                e2 = {**e, **dict(zip(cf.existentials, xs))}
                concl.extend(self._all(self._ground_atom(a, e2) for a in d.atoms)
                             for d in cf.disjuncts)
            out.append(Or(Neg(prem), self._any(concl)))
        return self._all(out)


def satisfiable(f) -> bool:
    if f is PYSAT_TRUE:
        return True
    if f is PYSAT_FALSE:
        return False
    try:
        with Solver(name="m22", bootstrap_with=f) as s:
            return s.solve()
    finally:
        Formula.cleanup()


def restricted_growth(k: int, n: int):
    """Assignments of k constants to a domain of n elements up to renaming."""
    def rec(prefix, top):
        if len(prefix) == k:
            yield tuple(prefix)
            return
        for v in range(min(top + 2, n)):
            yield from rec(prefix + [v], max(top, v))
    yield from rec([], -1)


def countermodel(theory, conj, max_domain: int = 3):
    """(n, constant map) of a model of ``theory`` falsifying ``conj``, or None."""
    names = set()
    for ax in [*theory.axioms, conj]:
        for a in (*ax.premises, *(x for d in ax.disjuncts for x in d.atoms)):
            names.update(t.name for t in a.args if isinstance(t, Const))
    names = sorted(names)
    for n in range(1, max_domain + 1):
        for vals in restricted_growth(len(names), n):
            g = Grounder(theory.signature, n, dict(zip(names, vals)))
            f = And(*[g.coherent(ax) for ax in theory.axioms], Neg(g.coherent(conj)))
            if satisfiable(f):
                return n, dict(zip(names, vals))
    return None


def equivalent(sig, fof_body, coherent_formulas, extra=(), n: int = 2) -> bool:
    """Does the FOF sentence agree with the conjunction of its translations in
    every interpretation over an n-element domain?"""
    g = Grounder(sig, n)
    lhs = g.fof(fof_body, {})
    rhs = And(*[g.coherent(c) for c in [*coherent_formulas, *extra]])
    return not satisfiable(XOr(lhs, rhs))
