import re
from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st

from proofsketch.formula import Conjunction, Signature, atom
from proofsketch.tptp import (
    FunctionSymbolsUnsupported,
    NotCoherent,
    ParseError,
    SupportAxiomOptions,
    UnknownPredicate,
    UnsupportedRole,
    coherentize,
    format_tptp,
    generate_support_axioms,
    is_support_axiom,
    load_problem,
    parse_tptp,
)

from conftest import TPTP
from oracle import equivalent

PUBLISHED = Path(__file__).resolve().parents[1] / "paper.md"
FIXTURE_FILES = ["proposition_11.p", "varignon_1.p", "varignon_2.p", "example1.p",
                 "construction_kit.p"]


def one(text):
    (e,) = parse_tptp(text)
    return coherentize(e, Signature())


def test_prop11_listing_names_and_roles():
    entries = parse_tptp((TPTP / "proposition_11.p").read_text())
    published = re.findall(r"^fof\((\w+),(\w+)", PUBLISHED.read_text(), re.M)
    # the listing in the text, before the existence variant further down
    listing = published[:published.index(("proposition_11", "conjecture")) + 1]
    assert [(e.name, e.role) for e in entries] == listing
    assert sum(e.role == "axiom" for e in entries) == 19
    assert [e.name for e in entries if e.role == "conjecture"] == ["proposition_11"]


def test_minimal_entry():
    (e,) = parse_tptp("fof(a,axiom,(! [X] : (p(X) => r(X)))).")
    assert e.name == "a" and e.role == "axiom"
    (f,), _ = coherentize(e, Signature())
    assert f.universals == ("X",)


def test_function_symbols_rejected():
    with pytest.raises(FunctionSymbolsUnsupported):
        parse_tptp("fof(a,axiom,(p(f(X)))).")


def test_parse_errors():
    with pytest.raises(ParseError) as ei:
        parse_tptp("fof(a,axiom,(! [X] : (p(X) => r(X))).")
    assert ei.value.line == 1
    with pytest.raises(UnsupportedRole):
        parse_tptp("fof(a,hypothesis,(p(c))).")
    with pytest.raises(ParseError):  # free variable
        parse_tptp("fof(a,axiom,(p(X))).")


def test_comments_and_multiline():
    es = parse_tptp("% header\nfof(a,axiom,\n  (! [X] :  % trailing\n (p(X) => q(X)))).\n")
    assert [e.name for e in es] == ["a"]


def test_extension_hoists_existential(p11):
    ext = p11.theory.axiom("lemma_extension")
    assert ext.universals == ("A", "B", "P", "Q")
    assert ext.premises == (atom("neq", "A", "B"), atom("neq", "P", "Q"))
    assert ext.existentials == ("X",)
    assert ext.disjuncts == (Conjunction((atom("betS", "A", "B", "X"),
                                          atom("cong", "B", "X", "P", "Q"))),)


def test_deftriangle_complement(p11):
    f = p11.theory.axiom("deftriangle")
    assert f.premises == (atom("triangle", "A", "B", "C"),)
    assert f.disjuncts == (Conjunction((atom("ncol", "A", "B", "C"),)),)
    sig = p11.theory.signature
    assert sig.complements["col"] == "ncol" and sig.complements["ncol"] == "col"
    assert "col_neg_contradiction" in p11.theory.names()
    g = p11.theory.axiom("deftriangle2")
    assert g.premises == (atom("ncol", "A", "B", "C"),)


def test_defcollinear_six_disjuncts(p11):
    f = p11.theory.axiom("defcollinear")
    assert len(f.disjuncts) == 6
    assert all(len(d.atoms) == 1 for d in f.disjuncts)
    assert f.disjuncts[0].atoms == (atom("eq", "A", "B"),)


def test_conjunctive_simple_axioms_are_split(p11):
    names = p11.theory.names()
    assert {"lemma_betweennotequal_1", "lemma_betweennotequal_2",
            "lemma_betweennotequal_3"} <= set(names)
    assert "lemma_betweennotequal" not in names
    assert len(p11.theory.axiom("lemma_collinearorder_5").disjuncts[0].atoms) == 1


def test_support_axioms_contain_excluded_middle(p11):
    names = p11.theory.names()
    assert "eq_excluded_middle" in names
    eqsub = p11.theory.axiom("col_eqsub_3")
    assert eqsub.premises == (atom("col", "A", "B", "C"), atom("eq", "C", "X"))
    assert eqsub.disjuncts == (Conjunction((atom("col", "A", "B", "X"),)),)


def test_support_axioms_for_empty_signature():
    names = {a.name for a in generate_support_axioms(Signature())}
    assert names == {"eq_reflexive", "eq_symmetric", "neq_symmetric", "eq_neg_contradiction",
                     "eq_excluded_middle"}
    assert all(is_support_axiom(n) for n in names)


def test_support_axiom_options():
    sig = Signature({"p": 1})
    names = {a.name for a in generate_support_axioms(
        sig, SupportAxiomOptions(excluded_middle_for=frozenset({"eq", "p"})))}
    assert {"p_excluded_middle", "p_neg_contradiction", "p_eqsub_1"} <= names
    with pytest.raises(UnknownPredicate):
        generate_support_axioms(Signature(), SupportAxiomOptions(frozenset({"zz"})))


def test_not_coherent_inputs():
    with pytest.raises(NotCoherent):
        one("fof(a,axiom,(! [X] : ((p(X) | q(X)) => r(X)))).")
    with pytest.raises(NotCoherent):
        one("fof(a,axiom,(! [X] : (p(X) => (q(X) => r(X))))).")
    with pytest.raises(NotCoherent):
        one("fof(a,axiom,(! [X] : (p(X) => ~(? [Y] : q(Y))))).")


def test_true_false_constants():
    (f,), _ = one("fof(a,axiom,(! [X] : (q(X) => $false))).")
    assert f.is_bottom
    (g,), _ = one("fof(a,axiom,(? [X] : ($true => q(X)))).")
    assert g.premises == () and g.existentials == ("X",)


@pytest.mark.parametrize("fname", FIXTURE_FILES)
def test_fixtures_load_with_unique_names(fname):
    prob = load_problem((TPTP / fname).read_text())
    names = prob.theory.names()
    assert len(names) == len(set(names))
    for ax in prob.theory.axioms:
        ax.validate()
        for a in (*ax.premises, *(x for d in ax.disjuncts for x in d.atoms)):
            assert a.pred in prob.theory.signature.predicates
            assert "~" not in a.pred


def _fixture_entries():
    for fname in FIXTURE_FILES:
        for e in parse_tptp((TPTP / fname).read_text()):
            yield pytest.param(fname, e, id=f"{fname}:{e.name}")


@pytest.mark.parametrize("fname,entry", list(_fixture_entries()))
def test_translation_agrees_on_small_domains(fname, entry):
    prob = load_problem((TPTP / fname).read_text())
    sig = prob.theory.signature
    outs, _ = coherentize(entry, Signature())
    extra = [prob.theory.axiom(n) for n in prob.theory.names()
             if n.endswith(("_neg_contradiction", "_excluded_middle"))]
    for n in (1, 2):
        assert equivalent(sig, entry.body, outs, extra, n=n), (entry.name, n)


@pytest.mark.parametrize("fname", FIXTURE_FILES)
def test_format_roundtrip(fname):
    prob = load_problem((TPTP / fname).read_text())
    sig = prob.theory.signature
    for ax in prob.axioms:
        text = format_tptp(ax, "axiom", sig)
        (e,) = parse_tptp(text)
        back, _ = coherentize(e, sig, split_simple=False)
        assert back == [ax]


@settings(max_examples=60, deadline=None)
@given(st.lists(st.sampled_from(["p(X)", "q(X,Y)", "X = Y", "X != Y", "~ r(Y)"]),
                min_size=1, max_size=3),
       st.lists(st.lists(st.sampled_from(["p(Y)", "q(Y,Z)", "Z = X", "~ p(Z)", "r(X)"]),
                         min_size=1, max_size=2), min_size=1, max_size=3),
       st.booleans())
def test_random_translation_agrees(prem, concl, with_exists):
    body = " | ".join("(" + " & ".join(c) + ")" for c in concl)
    if with_exists:
        body = f"? [Z] : ({body})"
    else:
        body = body.replace("Z", "X")
    text = f"fof(h,axiom,(! [X,Y] : (({' & '.join(prem)}) => ({body}))))."
    (e,) = parse_tptp(text)
    outs, sig = coherentize(e, Signature())
    for n in (1, 2):
        assert equivalent(sig, e.body, outs, n=n)
