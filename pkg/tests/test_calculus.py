import pytest

from refleqt.builder import (
    by_tautology,
    exists_elimination,
    forall_under_hypothesis,
    generalize,
    identity_derivation,
    instantiate,
    mp,
    refl,
    symmetry_axiom,
    taut,
    thy,
)
from refleqt.calculus import (
    RULE_OBLIGATION,
    NumeralInstanceFamily,
    TheoryPresentation,
    all_numeral_instances,
    check_proof,
    computation_leaf,
    decode_proof,
    discharge,
    encode_proof,
    finite_axioms,
    gen_node,
    is_tautology,
    iter_families,
    match_logical_axiom,
    mp_node,
    obligation_leaf,
    obligations,
    parse_proof,
    print_proof,
)
from refleqt.codec import CODING_TABLE, encode_formula
from refleqt.errors import CodecError, MalformedProofError
from refleqt.syntax import (
    Atom,
    Const,
    Eq,
    Implies,
    Numeral,
    Var,
    alpha_equal,
    free_variables,
    parse_formula,
    substitute,
)


@pytest.fixture
def graph_theory(graph_sig):
    axiom = parse_formula("(all x (-> (P x) (E x c)))", graph_sig)
    return TheoryPresentation(name="G", signature=graph_sig, axioms=(axiom,))


def test_identity_derivation_checks(s12, parse):
    p = identity_derivation(parse("(= x 0)"))
    verdict = check_proof(p, s12)
    assert verdict.accepted
    assert verdict.describe() == "accepted"


def test_derived_rules_check(s12, parse):
    two = instantiate(thy(parse("(all x (= (+ x 0) x))")), Numeral(2))
    assert alpha_equal(two.conclusion, parse("(= (+ 2 0) 2)"))
    swapped = mp(two, symmetry_axiom(two.conclusion.left, Numeral(2)))
    assert alpha_equal(swapped.conclusion, parse("(= 2 (+ 2 0))"))
    under = forall_under_hypothesis(taut(parse("(-> (= 0 0) (or (= x 0) (not (= x 0))))")), Var("x"))
    assert alpha_equal(under.conclusion, parse("(-> (= 0 0) (all x (or (= x 0) (not (= x 0)))))"))
    witness = exists_elimination(taut(parse("(-> (= x 0) (or (= 0 0) (not (= 0 0))))")), Var("x"))
    assert alpha_equal(witness.conclusion, parse("(-> (ex x (= x 0)) (or (= 0 0) (not (= 0 0))))"))
    for proof in (two, swapped, under, witness):
        assert check_proof(proof, s12).accepted


def test_derived_rules_reject_misuse(parse):
    zero = refl(Numeral(0))
    with pytest.raises(MalformedProofError):
        mp(zero, zero)
    with pytest.raises(MalformedProofError):
        instantiate(zero, Numeral(1))
    with pytest.raises(MalformedProofError):
        forall_under_hypothesis(taut(parse("(-> (= x 0) (= x 0))")), Var("x"))
    with pytest.raises(MalformedProofError):
        exists_elimination(taut(parse("(-> (= x 0) (= x 0))")), Var("x"))


def test_instantiating_a_theory_axiom(s12, parse):
    p = instantiate(thy(parse("(all x (not (= (S x) 0)))")), Numeral(0))
    assert alpha_equal(p.conclusion, parse("(not (= (S 0) 0))"))
    assert check_proof(p, s12).accepted


def test_non_axiom_theory_leaf_is_rejected(s12, parse):
    verdict = check_proof(thy(parse("(= 0 1)")), s12)
    assert not verdict.accepted
    assert verdict.failing_step.path == ()
    assert "not an axiom of S12" in verdict.describe()


def test_bad_modus_ponens_points_at_the_node(s12, parse):
    a = parse("(= x x)")
    bad = mp_node(parse("(= y y)"), refl(Var("x")), taut(Implies(a, a)))
    verdict = check_proof(bad, s12)
    assert not verdict.accepted
    assert verdict.failing_step.rule == "mp"
    assert verdict.describe().startswith("rejected at root")


def test_generalization(s12):
    p = generalize(refl(Var("x")), Var("x"))
    assert check_proof(p, s12).accepted
    wrong = gen_node(p.conclusion, Var("y"), refl(Var("x")))
    assert not check_proof(wrong, s12).accepted


def test_computation_leaves(s12, parse):
    assert check_proof(computation_leaf(parse("(= (+ 2 3) 5)")), s12).accepted
    assert check_proof(computation_leaf(parse("(ball x 4 (<= x (* 2 2)))")), s12).accepted

    false = check_proof(computation_leaf(parse("(= (+ 2 2) 5)")), s12)
    assert "evaluates to false" in false.failing_step.reason

    unbounded = check_proof(computation_leaf(parse("(all x (= x x))")), s12)
    assert "outside the decidable fragment" in unbounded.failing_step.reason


def test_provability_atoms_are_decided_by_checking(s12, parse):
    inner = identity_derivation(parse("(= 0 0)"))
    holds = Atom("Proof:S12", (Numeral(encode_proof(inner)), Numeral(encode_formula(inner.conclusion))))
    assert check_proof(computation_leaf(holds), s12).accepted

    wrong = Atom("Proof:S12", (Numeral(encode_proof(inner)), Numeral(encode_formula(parse("(= 0 0)")))))
    assert not check_proof(computation_leaf(wrong), s12).accepted


def test_signature_is_enforced(graph_theory, graph_sig):
    verdict = check_proof(thy(parse_formula("(E c c)", graph_sig)), graph_theory)
    assert "not an axiom" in verdict.failing_step.reason

    arith_step = check_proof(refl(Numeral(2)), graph_theory)
    assert not arith_step.accepted
    assert "ill-formed" in arith_step.failing_step.reason

    instance = instantiate(thy(graph_theory.axioms[0]), Const("c"))
    assert check_proof(instance, graph_theory).accepted


def test_obligations_and_discharge(s12, parse):
    a = parse("(= 0 0)")
    skeleton = mp(obligation_leaf(a), taut(Implies(a, a)))
    verdict = check_proof(skeleton, s12)
    assert verdict.failing_step.rule == RULE_OBLIGATION
    assert verdict.failing_step.path == (0,)
    assert obligations(skeleton) == [a]

    done = discharge(skeleton, [refl(Numeral(0))])
    assert obligations(done) == []
    assert check_proof(done, s12).accepted

    untouched = discharge(skeleton, [refl(Numeral(1))])
    assert obligations(untouched) == [a]


def test_proof_text_and_code_round_trip(arith, parse):
    p = by_tautology(parse("(-> (= x 0) (= x 0))"), identity_derivation(parse("(= x 0)")))
    assert parse_proof(print_proof(p), arith) == p
    assert decode_proof(encode_proof(p), arith) == p


def test_garbage_proof_code():
    code = CODING_TABLE.encode_tokens(["(", "mp", ")"])
    with pytest.raises(CodecError):
        decode_proof(code)


def test_tautologies(parse):
    assert is_tautology(parse("(-> (-> (-> (= x 0) (= y 0)) (= x 0)) (= x 0))"))
    assert is_tautology(parse("(-> (all x (= x x)) (all y (= y y)))"))
    assert not is_tautology(parse("(-> (= x 0) (= y 0))"))
    assert not is_tautology(parse("(or (= x 0) (not (= y 0)))"))
    assert not is_tautology(parse("(-> (-> (-> (= x 0) (= y 0)) (= x 0)) (= x 0))"), atom_limit=1)


@pytest.mark.parametrize(
    "scheme,text",
    [
        ("inst", "(-> (all x (= (+ x 0) x)) (= (+ 3 0) 3))"),
        ("exi", "(-> (= 2 2) (ex y (= y 2)))"),
        ("refl", "(= (S x) (S x))"),
        ("ball", "(iff (ball x 3 (= x x)) (all x (-> (<= x 3) (= x x))))"),
        ("bex", "(iff (bex x y (= x 0)) (ex x (and (<= x y) (= x 0))))"),
        ("leibniz", "(-> (= x y) (-> (= (S x) 0) (= (S y) 0)))"),
        ("all-dist", "(-> (all x (-> (= y 0) (= x x))) (-> (= y 0) (all x (= x x))))"),
        ("ex-elim", "(-> (all x (-> (= x y) (= y y))) (-> (ex x (= x y)) (= y y)))"),
    ],
)
def test_logical_axiom_instances(parse, scheme, text):
    assert match_logical_axiom(scheme, parse(text)) is None


@pytest.mark.parametrize(
    "scheme,text",
    [
        ("inst", "(-> (all x (= (+ x 0) x)) (= (+ 3 0) 4))"),
        ("exi", "(-> (= 2 3) (ex y (= y y)))"),
        ("refl", "(= x y)"),
        ("all-dist", "(-> (all x (-> (= x 0) (= x x))) (-> (= x 0) (all x (= x x))))"),
        ("ex-elim", "(-> (all x (-> (= x y) (= x x))) (-> (ex x (= x y)) (= x x)))"),
        ("leibniz", "(-> (= x y) (-> (= (S x) 0) (= (S x) (S y))))"),
        ("nonsense", "(= x x)"),
    ],
)
def test_logical_axiom_non_instances(parse, scheme, text):
    assert match_logical_axiom(scheme, parse(text)) is not None


def test_induction_schema_membership(s12, parse):
    schema = s12.schemata[0]
    plain = schema.instance(parse("(= (+ 0 x) x)"), [Var("x")])
    assert s12.recognize(plain)

    with_parameter = schema.instance(parse("(= (+ y x) (+ x y))"), [Var("x")])
    assert s12.recognize(with_parameter)

    fake = parse("(-> (and (= 0 0) (all x (-> (= x x) (= (S x) (S x))))) (all x (= x 0)))")
    assert not s12.recognize(fake)


def test_numeral_instance_families(s12, parse):
    phi = parse("(= (+ x 0) x)")
    every = s12.extend("Every", families=[NumeralInstanceFamily(phi)])
    assert all_numeral_instances(every, phi)
    assert every.recognize(parse("(= (+ 7 0) 7)"))
    assert not all_numeral_instances(s12, phi)

    odd = s12.extend("Odd", families=[NumeralInstanceFamily(phi, modulus=2, residue=1)])
    assert not all_numeral_instances(odd, phi)
    assert odd.recognize(parse("(= (+ 3 0) 3)"))
    assert not odd.recognize(parse("(= (+ 4 0) 4)"))

    assert not all_numeral_instances(s12, parse("(= x y)"))
    assert not all_numeral_instances(every, s12.axioms[0])
    assert not all_numeral_instances(every, parse("(= (+ 7 0) 7)"))


@pytest.mark.parametrize("template", ["(= (+ x 0) x)", "(<= x (S x))", "(or (= x 0) (not (= x 0)))"])
def test_covered_templates_have_every_numeral_instance(s12, parse, template):
    phi = parse(template)
    theory = s12.extend("Every", families=[NumeralInstanceFamily(phi)])
    assert all_numeral_instances(theory, phi)
    for n in range(201):
        assert theory.recognize(substitute(phi, Var("x"), Numeral(n))), n


def test_induction_instances_with_a_parameter_cover_every_numeral(s12, parse):
    phi = s12.schemata[0].instantiate(parse("(= (+ y x) (+ x y))"), [Var("x")])
    assert free_variables(phi) == [Var("y")]
    assert all_numeral_instances(s12, phi)
    for n in range(201):
        assert s12.recognize(substitute(phi, Var("y"), Numeral(n))), n


def test_extensions_include_their_base(s12, parse):
    phi = parse("(= (* x 1) x)")
    family = NumeralInstanceFamily(phi)
    ext = s12.extend("Ext", axioms=[parse("(= 0 0)")], families=[family])
    assert ext.recognize(parse("(all x (= (+ x 0) x))"))
    assert ext.resolve("S12") is s12
    assert ext.resolve("Nowhere") is None
    assert len(finite_axioms(ext)) == len(s12.axioms) + 1
    assert list(iter_families(ext)) == [family]
    assert "schema induction" in s12.describe()


def test_open_formulas_are_never_axioms(s12, parse):
    assert not s12.recognize(parse("(not (= (S x) 0))"))
    assert s12.recognize(parse("(all y (not (= (S y) 0)))"))


def test_shared_subproofs_are_checked_once(s12, parse):
    a = parse("(= 0 0)")
    shared = refl(Numeral(0))
    p = mp(shared, mp(shared, taut(Implies(a, Implies(a, a)))))
    assert check_proof(p, s12).accepted
    assert Eq(Numeral(0), Numeral(0)) == p.conclusion
