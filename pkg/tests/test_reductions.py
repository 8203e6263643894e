import random
from collections import Counter
from dataclasses import replace

import pytest

from refleqt.builder import identity_derivation, thy
from refleqt.calculus import RULE_AXIOM, RULE_MP, RULE_THEORY, Proof, check_proof, encode_proof
from refleqt.errors import MalformedProofError, TruthEliminationError
from refleqt.generators import gen_sc, gen_small_reflection_theory, truth, utb_instance
from refleqt.reductions import (
    CUBIC_BOUND,
    IDENTITY_BOUND,
    Polynomial,
    ReductionWitness,
    certify_bound,
    eliminate_truth,
    fit_bound,
    identity_witness,
    numeral_instance_proof,
    prove_small_reflection_instance,
    reduce_small_reflection_proof,
    small_reflection_corpus,
    small_reflection_witness,
    truth_corpus,
    truth_elimination_witness,
)
from refleqt.syntax import Eq, Not, Numeral, Var, alpha_equal, contains_relation


@pytest.fixture
def phi(parse):
    return parse("(= (+ v 0) v)")


@pytest.fixture
def smallref(s12, phi):
    return gen_small_reflection_theory(s12, phi)


def test_junk_proof_codes_are_refuted_by_computation(s12, phi):
    proof = prove_small_reflection_instance(s12, phi, 5, 3)
    assert check_proof(proof, s12).accepted


def test_real_proofs_are_spliced(s12, phi):
    inner = numeral_instance_proof(s12, phi, 3)
    assert check_proof(inner, s12).accepted
    for spliced in (True, False):
        proof = prove_small_reflection_instance(s12, phi, encode_proof(inner), 3, spliced=spliced)
        assert check_proof(proof, s12).accepted
        assert proof.conclusion.right == inner.conclusion


def test_reduction_keeps_conclusions(s12, smallref):
    for p in small_reflection_corpus(smallref, size=10, seed=3):
        assert check_proof(p, smallref).accepted
        out = reduce_small_reflection_proof(p, s12, smallref)
        assert alpha_equal(out.conclusion, p.conclusion)
        assert check_proof(out, s12).accepted


def test_reduction_rejects_foreign_leaves(s12, smallref, parse):
    foreign = thy(parse("(= 0 1)"))
    with pytest.raises(MalformedProofError):
        reduce_small_reflection_proof(foreign, s12, smallref)
    with pytest.raises(MalformedProofError):
        reduce_small_reflection_proof(foreign, s12)


def test_base_axioms_pass_through(s12, parse):
    leaf = thy(parse("(all x (= (+ x 0) x))"))
    assert reduce_small_reflection_proof(leaf, s12) == leaf


@pytest.mark.slow
def test_small_reflection_corpus_is_within_cubic_bound(s12, smallref):
    corpus = small_reflection_corpus(smallref, size=50, seed=0)
    report = certify_bound(small_reflection_witness(smallref, s12), corpus)
    assert report.within_bound
    assert len(report.samples) == 50
    assert report.verdict == "within-bound"


def test_linear_bound_is_violated(s12, smallref):
    corpus = small_reflection_corpus(smallref, size=5, seed=1)
    report = certify_bound(small_reflection_witness(smallref, s12, IDENTITY_BOUND), corpus)
    assert not report.within_bound
    assert report.verdict.startswith("violated(sample 0")
    assert "exceeds" in report.violations[0].reason
    assert "verdict: violated" in report.table()


def test_identity_witness(s12, parse):
    corpus = [identity_derivation(parse("(= x 0)")), thy(parse("(all x (= (* x 0) 0))"))]
    report = certify_bound(identity_witness(s12), corpus)
    assert report.within_bound
    assert all(n == m for n, m in report.samples)


def test_unchecked_corpus_entries_are_reported(s12, parse):
    report = certify_bound(identity_witness(s12), [thy(parse("(= 0 1)"))])
    assert not report.within_bound
    assert "does not check" in report.violations[0].reason


def test_transformer_failures_are_reported(s12, parse):
    def broken(p):
        raise TruthEliminationError("nothing to do")

    witness = ReductionWitness("broken", s12, s12, broken, CUBIC_BOUND)
    report = certify_bound(witness, [identity_derivation(parse("(= x 0)"))])
    assert "transformer failed" in report.violations[0].reason


def test_truth_elimination_on_a_few_proofs(s12):
    for p in truth_corpus(s12, size=4, seed=2):
        out = eliminate_truth(p, s12)
        assert alpha_equal(out.conclusion, p.conclusion)
        assert not any(contains_relation(node.conclusion, "T") for _, node in out.nodes())
        assert check_proof(out, s12).accepted


@pytest.mark.slow
def test_truth_corpus_is_within_cubic_bound(s12):
    sc = gen_sc(s12)
    corpus = truth_corpus(s12, size=20, seed=0)
    report = certify_bound(truth_elimination_witness(sc, s12), corpus)
    assert report.within_bound
    assert len(report.samples) == 20


def test_truth_in_the_conclusion_is_refused(s12, parse):
    instance = utb_instance(parse("(= v v)"))
    with pytest.raises(TruthEliminationError):
        eliminate_truth(thy(instance), s12)
    assert contains_relation(truth(Var("x")), "T")


def test_polynomials():
    assert str(CUBIC_BOUND) == "1n^3"
    assert CUBIC_BOUND(4) == 64
    assert IDENTITY_BOUND.degree == 1
    assert fit_bound([(2, 17), (1, 1)]) == Polynomial((0, 0, 0, 3))
    with pytest.raises(ValueError):
        Polynomial((1, -1))
    with pytest.raises(ValueError):
        Polynomial(())


def test_numeral_instance_proof_falls_back_to_reflexivity(s12, parse):
    proof = numeral_instance_proof(s12, parse("(= (S v) (S v))"), 4)
    assert proof.conclusion.left == Numeral(5)
    assert numeral_instance_proof(s12, parse("(= v 0)"), 2) is None


def _replace_at(p: Proof, path, node: Proof) -> Proof:
    if not path:
        return node
    premises = list(p.premises)
    premises[path[0]] = _replace_at(premises[path[0]], path[1:], node)
    return replace(p, premises=tuple(premises))


def _mutations(node: Proof):
    yield "negate", replace(node, conclusion=Not(node.conclusion))
    if node.rule == RULE_MP:
        yield "swap", replace(node, premises=node.premises[::-1])
    if node.rule in (RULE_AXIOM, RULE_THEORY):
        c = node.conclusion
        if not (isinstance(c, Eq) and c.left == c.right):
            yield "relabel", Proof(RULE_AXIOM, c, scheme="refl")


@pytest.mark.slow
def test_single_node_mutations_are_rejected(s12, smallref, phi, parse):
    sc = gen_sc(s12)
    corpus = [(p, smallref) for p in small_reflection_corpus(smallref, size=8, seed=5)]
    corpus += [(p, sc) for p in truth_corpus(s12, size=6, seed=5)]
    corpus += [
        (prove_small_reflection_instance(s12, phi, 5, 3), s12),
        (numeral_instance_proof(s12, phi, 3), s12),
        (identity_derivation(parse("(= x 0)")), s12),
    ]
    for proof, theory in corpus:
        assert check_proof(proof, theory).accepted

    rng = random.Random(11)
    kinds = Counter()
    while sum(kinds.values()) < 600:
        proof, theory = rng.choice(corpus)
        path, node = rng.choice(list(proof.nodes()))
        kind, changed = rng.choice(list(_mutations(node)))
        mutant = _replace_at(proof, path, changed)
        verdict = check_proof(mutant, theory)
        assert not verdict.accepted, (kind, path, theory.name)
        kinds[kind] += 1
    assert set(kinds) == {"negate", "swap", "relabel"}
