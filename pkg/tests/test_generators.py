import random

import pytest

from refleqt.calculus import TheoryPresentation, all_numeral_instances, check_proof, computation_leaf
from refleqt.codec import encode_formula, quote
from refleqt.errors import ArithmetizationError, ArityError
from refleqt.generators import (
    CON,
    FALSUM,
    RFN,
    RFN_LOCAL,
    CompositionalFamily,
    ReflectionFamily,
    ReflectionKind,
    ReflectionTag,
    SmallReflectionFamily,
    TruthInclusionFamily,
    TruthTag,
    TruthTheoryKind,
    ct_instance,
    gen_consistency,
    gen_ct,
    gen_reflection_instance,
    gen_sc,
    gen_small_reflection_theory,
    gen_truth_theory,
    gen_utb,
    reflected_formula,
    rfn_from_uniform,
    small_reflection_bridge,
    tarski_truth_definition,
    truth,
    utb_instance,
)
from refleqt.evaluation import Evaluator
from refleqt.syntax import (
    Atom,
    BExists,
    Exists,
    Forall,
    Implies,
    Not,
    Numeral,
    Or,
    Signature,
    Var,
    alpha_equal,
    free_variables,
    split_iff,
    strip_foralls,
    substitute,
)


SAMPLED_PHIS = (
    "(= (+ v 0) v)",
    "(<= v (S v))",
    "(= (* v 0) 0)",
    "(not (= (S v) 0))",
    "(<= v v)",
    "(= (+ 0 v) (+ 0 v))",
    "(<= 0 v)",
    "(= (* v 1) (* v 1))",
    "(not (= (S (S v)) 0))",
    "(<= v (+ v 1))",
    "(= (+ v v) (* v 2))",
    "(or (= v 0) (not (= v 0)))",
    "(-> (= v 0) (<= v 1))",
    "(and (<= v v) (= v v))",
    "(ex y (= (+ y y) v))",
    "(all y (<= v (+ v y)))",
    "(= (fst (pair v 0)) v)",
    "(<= (len v) v)",
    "(= (half (* v 2)) v)",
    "(not (<= (S v) v))",
)


@pytest.fixture
def phi(parse):
    return parse("(= (+ v 0) v)")


def test_consistency_statements(s12):
    con = gen_consistency(s12)
    assert isinstance(con, Not) and isinstance(con.body, Exists)
    assert con.body.body.rel == "Proof:S12"
    assert con.body.body.args[1] == quote(FALSUM)
    assert gen_reflection_instance(CON, s12) == con

    bounded = gen_consistency(s12, 5)
    assert isinstance(bounded.body, BExists) and bounded.body.bound == Numeral(5)
    with pytest.raises(ValueError):
        gen_consistency(s12, -1)


def test_bounded_consistency_is_a_true_computation(s12):
    restricted = ReflectionKind(ReflectionTag.CON_RESTRICTED, bound=5)
    assert check_proof(computation_leaf(gen_reflection_instance(restricted, s12)), s12).accepted


def test_reflection_needs_arithmetization(graph_sig):
    bare = TheoryPresentation(name="G", signature=graph_sig)
    with pytest.raises(ArithmetizationError):
        gen_consistency(bare)
    with pytest.raises(ValueError):
        ReflectionKind(ReflectionTag.CON_RESTRICTED)


def test_local_reflection(s12, parse):
    s = parse("(= (+ 2 0) 2)")
    local = gen_reflection_instance(RFN_LOCAL, s12, s)
    assert isinstance(local, Implies) and local.right == s
    assert local.left.body.args[1] == quote(s)
    with pytest.raises(ArityError):
        gen_reflection_instance(RFN_LOCAL, s12, parse("(= x 0)"))
    with pytest.raises(ArityError):
        gen_reflection_instance(RFN, s12)


def test_uniform_reflection_shape(s12, phi):
    rfn = gen_reflection_instance(RFN, s12, phi)
    assert isinstance(rfn, Forall) and not free_variables(rfn)
    hypothesis, conclusion = rfn.body.left, rfn.body.right
    assert isinstance(hypothesis, Exists)
    assert hypothesis.body.args[1].fn == "sub"
    assert alpha_equal(conclusion, substitute(phi, Var("v"), rfn.var))
    assert alpha_equal(reflected_formula(rfn, s12), phi)


def test_reflection_family_membership(s12, nat_theory, phi, parse):
    family = ReflectionFamily(s12)
    assert family.recognizes(gen_reflection_instance(RFN, s12, phi))
    assert family.recognizes(gen_reflection_instance(RFN, s12, parse("(<= v (S v))")))
    assert not family.recognizes(gen_reflection_instance(RFN, nat_theory, phi))
    assert not family.recognizes(phi)
    assert family.describe() == "RFN(S12)"


def test_uniform_reflection_yields_local_reflection(s12, phi):
    proof = rfn_from_uniform(s12, phi, 3)
    assert check_proof(proof, s12).accepted
    local = gen_reflection_instance(RFN_LOCAL, s12, substitute(phi, Var("v"), Numeral(3)))
    assert alpha_equal(proof.conclusion.right, local)


def test_uniform_reflection_yields_local_reflection_across_formulas(s12, parse):
    rng = random.Random(7)
    for text in SAMPLED_PHIS:
        phi = parse(text)
        n = rng.randrange(40)
        proof = rfn_from_uniform(s12, phi, n)
        assert check_proof(proof, s12).accepted, text
        local = gen_reflection_instance(RFN_LOCAL, s12, substitute(phi, Var("v"), Numeral(n)))
        assert alpha_equal(proof.conclusion.right, local), text


def test_small_reflection_members(s12, phi, parse):
    family = SmallReflectionFamily(s12, phi)
    assert family.recognizes(family.instance(2, 3))
    assert family.recognizes(family.instance(2, 3, spliced=False))
    assert family.recognizes(substitute(family.template, family.pair_var, Numeral(17)))
    assert not family.recognizes(family.closure)

    wrong = Implies(family.instance(2, 3).left, parse("(= (+ 4 0) 4)"))
    assert not family.recognizes(wrong)


def test_small_reflection_theory_and_bridge(s12, phi):
    theory = gen_small_reflection_theory(s12, phi)
    assert theory.name == "S12'"
    family = [f for f in theory.families if isinstance(f, SmallReflectionFamily)][0]
    assert theory.recognize(family.instance(0, 9))
    assert all_numeral_instances(theory, family.template)

    bridge = small_reflection_bridge(family)
    assert check_proof(bridge, theory).accepted
    assert alpha_equal(bridge.conclusion.left, family.closure)
    assert alpha_equal(bridge.conclusion.right, gen_reflection_instance(RFN, s12, phi))


def test_small_reflection_template_instances_are_axioms(s12, phi):
    theory = gen_small_reflection_theory(s12, phi)
    family = [f for f in theory.families if isinstance(f, SmallReflectionFamily)][0]
    assert all_numeral_instances(theory, family.template)
    for n in range(201):
        assert theory.recognize(substitute(family.template, family.pair_var, Numeral(n))), n


def test_relativized_small_reflection(nat_theory, nat_translation, phi):
    family = SmallReflectionFamily(nat_theory, phi, nat_translation)
    member = family.instance(1, 4)
    assert isinstance(member, Implies)
    assert family.recognizes(member)
    assert "through N" in family.describe()


def test_disquotation(s12, parse):
    utb = gen_utb(s12)
    assert utb.name == "UTB[S12]"
    assert utb.signature.has_truth
    instance = utb_instance(parse("(= (+ v 0) v)"))
    assert utb.recognize(instance)

    x = Var("x")
    self_applied = utb_instance(truth(x))
    assert not utb.recognize(self_applied)

    with pytest.raises(ArithmetizationError):
        gen_utb(utb)


def test_truth_of_axioms(s12, parse):
    sc = gen_sc(s12)
    assert sc.name == "SC[S12]"
    family = TruthInclusionFamily(s12)
    assert sc.recognize(family.instance(parse("(= (+ x 0) x)")))
    assert not sc.recognize(family.instance(parse("(= x 0)")))
    assert sc.recognize(utb_instance(parse("(<= v v)")))


def test_compositional_truth(s12, parse):
    ct = gen_ct(s12)
    assert ct.name == "CT[S12]"
    assert ct.axioms and len(free_variables(ct.axioms[0])) == 0

    s, t = parse("(= 1 1)"), parse("(<= 0 2)")
    assert ct.recognize(ct_instance("not", s))
    assert ct.recognize(ct_instance("and", s, t))
    assert ct.recognize(ct_instance("all", parse("(all x (= x x))")))
    assert ct.recognize(ct_instance("not", parse("(= x 0)")))
    assert not ct.recognize(ct_instance("and", t, s).left)

    with pytest.raises(ArityError):
        ct_instance("and", parse("(= x 0)"), s)
    with pytest.raises(ValueError):
        CompositionalFamily(s12, "or")


def test_compositional_truth_covers_every_relation_arity():
    sig = Signature("tern", relations=(("B", 3), ("Q", 0)), has_arithmetic=True, has_coding=True)
    ct = gen_ct(TheoryPresentation(name="Tern", signature=sig))
    clauses = {}
    for axiom in ct.axioms:
        variables, body = strip_foralls(axiom)
        coded, plain = split_iff(body)
        clauses[getattr(plain, "rel", "=")] = (variables, coded, plain)
    assert {"=", "<=", "B", "Q"} <= set(clauses)
    assert all(ct.recognize(axiom) for axiom in ct.axioms)

    variables, _, plain = clauses["Q"]
    assert variables == [] and plain == Atom("Q", ())

    variables, coded, plain = clauses["B"]
    assert len(variables) == 3 and plain == Atom("B", tuple(variables))
    env = dict(zip(variables, (4, 1, 7)))
    filled = Evaluator(sig=sig).term(coded.args[0], env)
    assert filled == encode_formula(Atom("B", (Numeral(4), Numeral(1), Numeral(7))))


def test_truth_theory_dispatch(s12):
    assert gen_truth_theory(TruthTheoryKind(TruthTag.UTB, s12)).name == "UTB[S12]"
    assert gen_truth_theory(TruthTheoryKind(TruthTag.CT, s12)).name == "CT[S12]"


def test_tarski_truth_definition(parse):
    psis = [parse("(= v 0)"), parse("(<= v 3)")]
    definition = tarski_truth_definition(psis)
    assert isinstance(definition, Or)
    assert free_variables(definition) == [Var("z")]
    assert isinstance(definition.left, Exists)
    with pytest.raises(ValueError):
        tarski_truth_definition([])
