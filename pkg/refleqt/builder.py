"""
Proof builders
==============
Small proof-construction helpers shared by the dedicated provers.

Each helper returns a ``Proof`` whose conclusion is computed from its inputs;
misuse (modus ponens on a non-implication and the like) raises
``MalformedProofError`` before a tree is built.
"""

from __future__ import annotations

from .calculus import Proof, axiom_leaf, computation_leaf, gen_node, mp_node, theory_leaf
from .errors import MalformedProofError
from .syntax import (
    Eq,
    Exists,
    Forall,
    Formula,
    Implies,
    Term,
    Var,
    free_variables,
    implies_chain,
    substitute,
)


def taut(f: Formula) -> Proof:
    return axiom_leaf("taut", f)


def thy(f: Formula) -> Proof:
    return theory_leaf(f)


def comp(f: Formula) -> Proof:
    return computation_leaf(f)


def refl(t: Term) -> Proof:
    return axiom_leaf("refl", Eq(t, t))


def mp(antecedent: Proof, implication: Proof) -> Proof:
    imp = implication.conclusion
    if not isinstance(imp, Implies):
        raise MalformedProofError("modus ponens on a non-implication")
    return mp_node(imp.right, antecedent, implication)


def generalize(p: Proof, *variables: Var) -> Proof:
    """Generalize over ``variables`` so the first one ends up outermost."""
    out = p
    for v in reversed(variables):
        out = gen_node(Forall(v, out.conclusion), v, out)
    return out


def inst_axiom(universal: Formula, t: Term) -> Proof:
    if not isinstance(universal, Forall):
        raise MalformedProofError("instantiation of a non-universal formula")
    return axiom_leaf("inst", Implies(universal, substitute(universal.body, universal.var, t)))


def exi_axiom(existential: Formula, t: Term) -> Proof:
    if not isinstance(existential, Exists):
        raise MalformedProofError("witnessing a non-existential formula")
    return axiom_leaf("exi", Implies(substitute(existential.body, existential.var, t), existential))


def instantiate(p: Proof, *terms: Term) -> Proof:
    """Eliminate leading universal quantifiers of ``p`` with the given terms."""
    out = p
    for t in terms:
        out = mp(out, inst_axiom(out.conclusion, t))
    return out


def by_tautology(conclusion: Formula, *premises: Proof) -> Proof:
    """Derive ``conclusion`` from premises it follows from propositionally."""
    out = taut(implies_chain([p.conclusion for p in premises], conclusion))
    for p in premises:
        out = mp(p, out)
    return out


def leibniz(s: Term, t: Term, a: Formula, b: Formula) -> Proof:
    return axiom_leaf("leibniz", Implies(Eq(s, t), Implies(a, b)))


def symmetry_axiom(s: Term, t: Term) -> Proof:
    """A proof of s = t -> t = s."""
    step = leibniz(s, t, Eq(s, s), Eq(t, s))
    return by_tautology(Implies(Eq(s, t), Eq(t, s)), step, refl(s))


def identity_derivation(a: Formula) -> Proof:
    """A -> A from two weakening instances and one distribution instance."""
    aa = Implies(a, a)
    s_inst = taut(Implies(Implies(a, Implies(aa, a)), Implies(Implies(a, aa), aa)))
    k1 = taut(Implies(a, Implies(aa, a)))
    k2 = taut(Implies(a, aa))
    return mp(k2, mp(k1, s_inst))


def forall_under_hypothesis(p_imp: Proof, v: Var) -> Proof:
    """From A -> B with v not free in A conclude A -> (all v B)."""
    imp = p_imp.conclusion
    if not isinstance(imp, Implies) or v in free_variables(imp.left):
        raise MalformedProofError(f"cannot generalize {v} under the hypothesis")
    dist = axiom_leaf("all-dist", Implies(Forall(v, imp), Implies(imp.left, Forall(v, imp.right))))
    return mp(generalize(p_imp, v), dist)


def exists_elimination(p_imp: Proof, v: Var) -> Proof:
    """From A -> B with v not free in B conclude (ex v A) -> B."""
    imp = p_imp.conclusion
    if not isinstance(imp, Implies) or v in free_variables(imp.right):
        raise MalformedProofError(f"cannot eliminate {v} into the conclusion")
    elim = axiom_leaf("ex-elim", Implies(Forall(v, imp), Implies(Exists(v, imp.left), imp.right)))
    return mp(generalize(p_imp, v), elim)
