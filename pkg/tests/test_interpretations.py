import pytest

from refleqt.builder import (
    by_tautology,
    exi_axiom,
    exists_elimination,
    forall_under_hypothesis,
    generalize,
    identity_derivation,
    instantiate,
    refl,
    taut,
    thy,
)
from refleqt.calculus import TheoryPresentation, check_proof, discharge
from refleqt.errors import BundleError, TranslationError
from refleqt.interpretations import (
    KIND_ADEQUACY,
    KIND_IDENTITY,
    KIND_ISOMORPHISM,
    ProofTranslator,
    Translation,
    WitnessBundle,
    check_bundle,
    compose,
    discharge_by_equality,
    discharge_trivially,
    identity_translation,
    translate_formula,
    translate_proof,
    translations_equivalent,
    witness_obligations,
)
from refleqt.syntax import (
    And,
    Atom,
    Eq,
    Exists,
    Forall,
    Implies,
    Signature,
    Var,
    alpha_equal,
    arithmetic_signature,
    parse_formula,
)

x, y, a, b = Var("x"), Var("y"), Var("a"), Var("b")


@pytest.fixture
def source() -> Signature:
    return Signature(name="Src", relations=(("E", 2),))


@pytest.fixture
def host_sig() -> Signature:
    return Signature(name="Host", relations=(("D", 1), ("R", 2)))


@pytest.fixture
def flip(source, host_sig) -> Translation:
    """E(a, b) read as R(b, a) inside the domain D."""
    return Translation("flip", source, host_sig, domain=(x, Atom("D", (x,))),
                       relation_map={"E": ((a, b), Atom("R", (b, a)))})


@pytest.fixture
def plain_flip(source, host_sig) -> Translation:
    return Translation("plain", source, host_sig, relation_map={"E": ((a, b), Atom("R", (b, a)))})


@pytest.fixture
def symmetric_axiom(source):
    return parse_formula("(all x (all y (-> (E x y) (E y x))))", source)


def _symmetry_proof(axiom):
    u, w = Var("u"), Var("w")
    return generalize(instantiate(thy(axiom), u, w), u, w)


def test_formula_translation_relativizes_quantifiers(flip, source):
    f = parse_formula("(all x (ex y (E x y)))", source)
    expected = Forall(x, Implies(Atom("D", (x,)), Exists(y, And(Atom("D", (y,)), Atom("R", (y, x))))))
    assert translate_formula(flip, f) == expected


def test_translation_validation(source, host_sig):
    with pytest.raises(TranslationError):
        Translation("stray", source, host_sig, relation_map={"E": ((a, b), Atom("R", (a, y)))})
    with pytest.raises(TranslationError):
        Translation("arity", source, host_sig, relation_map={"E": ((a,), Atom("D", (a,)))})
    with pytest.raises(TranslationError):
        Translation("unknown", source, host_sig, relation_map={"F": ((a,), Atom("D", (a,)))})
    with pytest.raises(TranslationError):
        Translation("ill", source, host_sig, domain=(x, Atom("Q", (x,))))


def test_unmapped_relation_and_wrong_language(source, host_sig, flip):
    bare = Translation("bare", source, host_sig)
    with pytest.raises(TranslationError):
        translate_formula(bare, parse_formula("(E x y)", source))
    with pytest.raises(TranslationError):
        translate_formula(flip, parse_formula("(R x y)", host_sig))


def test_composition(flip, host_sig, source):
    composed = compose(identity_translation(host_sig), flip)
    f = parse_formula("(all x (-> (E x x) (ex y (E y x))))", source)
    assert translations_equivalent(translate_formula(composed, f), translate_formula(flip, f))
    with pytest.raises(TranslationError):
        compose(flip, flip)


def test_relativization_through_nat(nat_translation, parse):
    f = parse("(all v (= (+ v 0) v))")
    out = translate_formula(nat_translation, f)
    assert isinstance(out, Forall)
    assert out.body.left == Atom("Nat", (Var("v"),))
    assert out.body.right == f.body


def test_proof_translation_checks_in_the_host(flip, source, host_sig, symmetric_axiom):
    src_theory = TheoryPresentation("SymSrc", source, axioms=(symmetric_axiom,))
    host = TheoryPresentation("SymHost", host_sig, axioms=(translate_formula(flip, symmetric_axiom),))
    proof = _symmetry_proof(symmetric_axiom)
    assert check_proof(proof, src_theory).accepted

    out, pending = translate_proof(flip, proof, host)
    assert pending == []
    assert alpha_equal(out.conclusion, translate_formula(flip, proof.conclusion))
    assert check_proof(out, host).accepted


def test_unprovable_steps_become_obligations(flip, source, host_sig, symmetric_axiom):
    host = TheoryPresentation("Empty", host_sig)
    out, pending = translate_proof(flip, _symmetry_proof(symmetric_axiom), host)
    assert pending == [translate_formula(flip, symmetric_axiom)]
    assert not check_proof(out, host).accepted

    with_axiom = TheoryPresentation("Full", host_sig, axioms=(pending[0],))
    closed = discharge(out, [thy(pending[0])])
    assert check_proof(closed, with_axiom).accepted


def test_tautologies_translate(plain_flip, source, host_sig):
    host = TheoryPresentation("Host", host_sig)
    proof = identity_derivation(parse_formula("(E x y)", source))
    out, pending = translate_proof(plain_flip, proof, host)
    assert pending == []
    assert check_proof(out, host).accepted


SOURCE_AXIOMS = (
    "(all x (all y (-> (E x y) (E y x))))",
    "(all x (-> (E x x) (E x x)))",
    "(all x (all y (-> (= x y) (-> (E x y) (E y y)))))",
)


def _translation_corpus(source):
    """Source proofs over Src; the flag marks proofs whose equality obligations need an unrelativized host."""
    u, w = Var("u"), Var("w")

    def f(text):
        return parse_formula(text, source)

    sym, triv, congruent = (f(text) for text in SOURCE_AXIOMS)
    swap = instantiate(thy(sym), u, w)
    return [
        ("id-atom", identity_derivation(f("(E x y)")), False),
        ("id-eq", identity_derivation(f("(= x y)")), False),
        ("id-all", identity_derivation(f("(all x (E x x))")), False),
        ("id-or", identity_derivation(f("(or (E x y) (not (E y x)))")), False),
        ("id-ex", identity_derivation(f("(ex y (E x y))")), False),
        ("sym-closed", generalize(swap, u, w), False),
        ("sym-open", swap, False),
        ("sym-diagonal", instantiate(thy(sym), u, u), False),
        ("gen-inner", generalize(identity_derivation(f("(E x y)")), x), False),
        ("gen-both", generalize(identity_derivation(f("(E x y)")), x, y), False),
        ("axiom-trivial", thy(triv), False),
        ("inst-trivial", instantiate(thy(triv), u), False),
        ("gen-trivial", generalize(instantiate(thy(triv), u), u), False),
        ("refl", refl(u), False),
        ("refl-closed", generalize(refl(u), u), False),
        ("sym-twice", by_tautology(f("(-> (E u w) (E u w))"), swap, instantiate(thy(sym), w, u)), False),
        ("all-dist", forall_under_hypothesis(taut(f("(-> (E u u) (or (E x y) (not (E x y))))")), x), False),
        ("ex-elim", exists_elimination(taut(f("(-> (E x u) (or (E u u) (not (E u u))))")), x), False),
        ("exi", exi_axiom(f("(ex y (E u y))"), w), False),
        ("congruent-open", instantiate(thy(congruent), u, w), True),
        ("congruent-closed", generalize(instantiate(thy(congruent), u, w), u, w), True),
    ]


def test_proof_corpus_translates_and_discharges(flip, plain_flip, source, host_sig):
    src_theory = TheoryPresentation("Src", source, axioms=tuple(parse_formula(t, source) for t in SOURCE_AXIOMS))
    sym = src_theory.axioms[0]
    hosts = {
        "plain": TheoryPresentation("PlainHost", host_sig, axioms=(translate_formula(plain_flip, sym),)),
        "flip": TheoryPresentation("FlipHost", host_sig,
                                   axioms=(translate_formula(flip, sym), Exists(x, Atom("D", (x,))))),
    }
    corpus = _translation_corpus(source)
    assert len(corpus) >= 20
    translated = 0
    for name, proof, needs_plain in corpus:
        assert check_proof(proof, src_theory).accepted, name
        for t in (plain_flip, flip):
            if needs_plain and t is flip:
                continue
            host = hosts[t.name]
            out, pending = translate_proof(t, proof, host)
            discharges = []
            for obligation in pending:
                found = discharge_trivially(obligation) or discharge_by_equality(obligation)
                assert found is not None, (name, t.name)
                discharges.append(found)
            closed = discharge(out, discharges)
            assert check_proof(closed, host).accepted, (name, t.name)
            expected = ProofTranslator(t, host).guarded(proof.conclusion)
            assert alpha_equal(closed.conclusion, expected), (name, t.name)
            translated += 1
    assert translated == 2 * len(corpus) - 2


def test_proof_translation_needs_relational_source(host_sig):
    arith = arithmetic_signature("arith", coding=False)
    t = Translation("lossy", arith, host_sig)
    with pytest.raises(TranslationError):
        ProofTranslator(t, TheoryPresentation("Host", host_sig))


def test_trivial_and_equational_discharge(host_sig):
    host = TheoryPresentation("Host", host_sig)
    taut_goal = parse_formula("(all x (-> (D x) (D x)))", host_sig)
    assert check_proof(discharge_trivially(taut_goal), host).accepted
    assert check_proof(discharge_trivially(parse_formula("(all x (= x x))", host_sig)), host).accepted
    assert discharge_trivially(parse_formula("(all x (D x))", host_sig)) is None

    for text in ("(all x (all y (-> (= x y) (= y x))))",
                 "(all x (ex y (= y x)))",
                 "(all x (all y (all z (-> (and (= x y) (= y z)) (= x z)))))",
                 "(all x (all y (-> (and (= x y) (D x)) (D y))))"):
        goal = parse_formula(text, host_sig)
        proof = discharge_by_equality(goal)
        assert proof is not None, text
        assert alpha_equal(proof.conclusion, goal)
        assert check_proof(proof, host).accepted, text

    assert discharge_by_equality(parse_formula("(all x (all y (= x y)))", host_sig)) is None


def _discharges(bundle):
    out = {}
    for obligation in witness_obligations(bundle):
        proof = discharge_trivially(obligation.formula) or discharge_by_equality(obligation.formula)
        if proof is not None:
            out[obligation.label] = proof
    return out


def test_identity_bundle(flip, source, host_sig):
    twin = Translation("twin", source, host_sig, domain=(y, Atom("D", (y,))),
                       relation_map={"E": ((b, a), Atom("R", (a, b)))})
    bundle = WitnessBundle(KIND_IDENTITY, {"tau": flip, "sigma": twin})
    labels = [o.label for o in witness_obligations(bundle)]
    assert labels == ["identity-domain", "identity-E"]

    host = TheoryPresentation("Host", host_sig)
    verdict = check_bundle(bundle, host)
    assert not verdict.accepted and verdict.failing_step.rule == "identity-domain"

    done = bundle.with_discharges(_discharges(bundle))
    assert check_bundle(done, host).accepted


def test_isomorphism_bundle(plain_flip, host_sig):
    host = TheoryPresentation("Host", host_sig)
    equal = ((a, b), Eq(a, b))
    bundle = WitnessBundle(KIND_ISOMORPHISM, {"tau": plain_flip, "sigma": plain_flip}, {"I": equal})
    obligations = witness_obligations(bundle)
    assert len(obligations) == 7
    assert check_bundle(bundle.with_discharges(_discharges(bundle)), host).accepted


def test_isomorphism_needs_a_functional_witness(plain_flip, host_sig):
    host = TheoryPresentation("Host", host_sig)
    total = ((a, b), And(Eq(a, a), Eq(b, b)))
    bundle = WitnessBundle(KIND_ISOMORPHISM, {"tau": plain_flip, "sigma": plain_flip}, {"I": total})
    verdict = check_bundle(bundle.with_discharges(_discharges(bundle)), host)
    assert not verdict.accepted
    assert verdict.failing_step.rule == "iso-5"


def test_bundle_validation(flip):
    with pytest.raises(BundleError):
        WitnessBundle("homotopy", {"tau": flip, "sigma": flip})
    with pytest.raises(BundleError):
        WitnessBundle(KIND_ISOMORPHISM, {"tau": flip, "sigma": flip})
    with pytest.raises(BundleError):
        WitnessBundle(KIND_ISOMORPHISM, {"tau": flip, "sigma": flip}, {"I": ((a, b), Eq(a, y))})


def test_wrong_discharge_is_rejected(plain_flip, host_sig):
    host = TheoryPresentation("Host", host_sig)
    bundle = WitnessBundle(KIND_IDENTITY, {"tau": plain_flip, "sigma": plain_flip})
    proofs = _discharges(bundle)
    proofs["identity-E"] = proofs["identity-domain"]
    verdict = check_bundle(bundle.with_discharges(proofs), host)
    assert "different sentence" in verdict.failing_step.reason


def test_adequacy_bundle_over_identities(source):
    same = identity_translation(source)
    bundle = WitnessBundle(KIND_ADEQUACY, {"N": same, "M": same, "F": same, "G": same})
    labels = [o.label for o in witness_obligations(bundle)]
    assert labels == ["F.identity-domain", "F.identity-E", "G.identity-domain", "G.identity-E"]

    theory = TheoryPresentation("Src", source)
    done = bundle.with_discharges(_discharges(bundle))
    assert check_bundle(done, {"tau": theory, "tau_prime": theory}).accepted
    with pytest.raises(BundleError):
        check_bundle(done, {"tau": theory})
