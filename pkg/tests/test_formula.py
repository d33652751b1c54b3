import pytest
from hypothesis import given, strategies as st

from proofsketch.formula import (
    Atom,
    CoherentFormula,
    Conjunction,
    Const,
    FormulaError,
    Signature,
    Theory,
    UnboundVariable,
    Var,
    apply_substitution,
    atom,
    free_variables,
    parse_atom,
    rename_apart,
)
from proofsketch.prover import prove


def C(*names):
    return {n: Const(v) for n, v in names}


def test_substitute_example1_instantiation():
    assert apply_substitution(atom("p", "X"), {"X": Const("a")}) == atom("p", "a")


def test_substitute_ground_is_identity():
    assert apply_substitution(atom("q", "c"), {}) == atom("q", "c")


def test_substitute_prop11_premise():
    s = C(("A", "a"), ("B", "b"), ("C", "c"))
    assert apply_substitution(atom("betS", "A", "C", "B"), s) == atom("betS", "a", "c", "b")


def test_substitute_conjunction_and_unbound():
    c = Conjunction((atom("p", "X"), atom("q", "X", "Y")))
    got = apply_substitution(c, C(("X", "a"), ("Y", "b")))
    assert got == Conjunction((atom("p", "a"), atom("q", "a", "b")))
    with pytest.raises(UnboundVariable):
        apply_substitution(atom("p", "X"), {})


def test_free_variables_examples(p11):
    assert free_variables(atom("betS", "A", "C", "B")) == ["A", "C", "B"]
    assert free_variables(atom("p", "a")) == []
    ext = p11.theory.axiom("lemma_extension")
    assert set(free_variables(ext)) == {"A", "B", "P", "Q", "X"}


def _px():
    return CoherentFormula("f", ("X",), (atom("p", "X"),), (), (Conjunction((atom("r", "X"),)),))


def test_rename_apart_suffix_rule():
    g = rename_apart(_px(), {"X"})
    assert g.universals == ("X1",)
    assert g.premises == (atom("p", "X1"),)
    assert g.disjuncts[0].atoms == (atom("r", "X1"),)


def test_rename_apart_identity():
    f = _px()
    assert rename_apart(f, set()) == f


def test_successive_renames_are_disjoint():
    f = _px()
    seen = set(f.universals)
    for _ in range(5):
        f = rename_apart(f, seen)
        assert set(f.universals).isdisjoint(seen)
        seen |= set(f.universals)


def test_rename_apart_preserves_provability(example1, varignon1):
    for prob in (example1, varignon1):
        conj = prob.conjecture()
        renamed = rename_apart(conj, set(conj.universals) | set(conj.existentials))
        assert renamed.universals != conj.universals
        assert bool(prove(prob.theory, conj)) == bool(prove(prob.theory, renamed))


def test_formula_invariants_rejected():
    with pytest.raises(FormulaError):  # premise variable not universal
        CoherentFormula("bad", (), (atom("p", "X"),), (), ())
    with pytest.raises(FormulaError):  # conclusion variable unbound
        CoherentFormula("bad", ("X",), (atom("p", "X"),), (), (Conjunction((atom("q", "Y"),)),))
    with pytest.raises(FormulaError):  # bound twice
        CoherentFormula("bad", ("X",), (), ("X",), ())
    with pytest.raises(FormulaError):
        CoherentFormula("bad", ("X", "X"), (), (), ())


def test_top_and_bottom_are_structural():
    bot = CoherentFormula("b", ("X",), (atom("q", "X"),), (), ())
    assert bot.is_bottom
    top = CoherentFormula("t", (), (), ("X",), (Conjunction((atom("q", "X"),)),))
    assert top.premises == ()


def test_signature_complements():
    sig = Signature()
    assert sig.complement("eq") == "neq" and sig.complement("neq") == "eq"
    sig.declare("col", 3)
    assert sig.complement("col") == "ncol"
    assert sig.complement("ncol") == "col"
    assert sig.predicates["ncol"] == 3
    with pytest.raises(FormulaError):
        sig.declare("col", 2)


def test_theory_checks_arity_and_names():
    sig = Signature({"p": 1})
    f = CoherentFormula("f", ("X",), (atom("p", "X", "X"),), (), ())
    with pytest.raises(FormulaError):
        Theory(sig, [f])
    g = CoherentFormula("g", ("X",), (atom("p", "X"),), (), ())
    with pytest.raises(FormulaError):
        Theory(sig, [g, g])


def test_parse_atom():
    assert parse_atom("betS(a, c, B)") == Atom("betS", (Const("a"), Const("c"), Var("B")))
    assert parse_atom("a != b") == atom("neq", "a", "b")
    assert parse_atom("X = c") == atom("eq", "X", "c")
    with pytest.raises(FormulaError):
        parse_atom("p(f(x))")


# --- properties -----------------------------------------------------------------

VARS = ["X", "Y", "Z", "W"]
CONSTS = ["a", "b", "c", "d"]

atoms_st = st.builds(
    lambda p, args: atom(p, *args),
    st.sampled_from(["p", "q", "r"]),
    st.lists(st.sampled_from(VARS + CONSTS), min_size=1, max_size=3),
)


@given(st.lists(atoms_st, min_size=1, max_size=4),
       st.dictionaries(st.sampled_from(VARS), st.sampled_from(CONSTS).map(Const), min_size=4),
       st.dictionaries(st.sampled_from(["U", "V"]), st.sampled_from(CONSTS).map(Const)))
def test_substitution_is_compositional(atoms, s, extra):
    # grounding is total, so composition of disjoint maps reduces to: the
    # union acts like each part on the variables it owns
    conj = Conjunction(tuple(atoms))
    union = {**s, **extra}
    assert apply_substitution(conj, union) == Conjunction(
        tuple(apply_substitution(a, s) for a in atoms))
    for a in atoms:
        own = {v: union[v] for v in free_variables(a)}
        assert apply_substitution(a, own) == apply_substitution(a, union)
        assert apply_substitution(a, union).is_ground


@given(st.sets(st.sampled_from(VARS + ["X1", "Y1"]), max_size=6))
def test_rename_apart_avoids(avoid):
    f = CoherentFormula("f", ("X", "Y"), (atom("p", "X", "Y"),), ("Z",),
                        (Conjunction((atom("q", "Z", "X"),)),))
    g = rename_apart(f, avoid)
    assert set(g.universals + g.existentials).isdisjoint(avoid)
    assert len(set(g.universals + g.existentials)) == 3
