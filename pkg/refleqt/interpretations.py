"""
Relative interpretations
========================
Translations (δ, F) between signatures, formula and proof translation,
composition, and the witness obligations behind identity, isomorphism,
retract, bi-interpretation and adequacy claims.

A translated proof concludes the *guarded* form of each step,
``δ(x1) -> ... -> δ(xk) -> A^t`` over the free variables of ``A``; for a
sentence that is just ``A^t``. Steps the translator cannot derive become
obligation leaves to be discharged in the host theory.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

from .builder import (
    by_tautology,
    exi_axiom,
    exists_elimination,
    forall_under_hypothesis,
    generalize,
    inst_axiom,
    instantiate,
    leibniz,
    mp,
    refl,
    symmetry_axiom,
    taut,
)
from .calculus import (
    ACCEPTED,
    RULE_AXIOM,
    RULE_GEN,
    RULE_MP,
    FailingStep,
    Proof,
    TheoryPresentation,
    Verdict,
    axiom_leaf,
    check_proof,
    computation_leaf,
    instance_term,
    is_tautology,
    match_logical_axiom,
    obligation_leaf,
    obligations,
    theory_leaf,
)
from .errors import BundleError, OutOfFragmentError, SignatureError, TranslationError
from .evaluation import eval_closed_decidable
from .syntax import (
    GRAPH_PREFIX,
    And,
    Atom,
    BExists,
    BForall,
    Eq,
    Exists,
    Forall,
    Formula,
    Implies,
    Not,
    Or,
    Signature,
    Term,
    Var,
    alpha_equal,
    alpha_key,
    check_formula,
    closure,
    conj,
    free_variables,
    implies_chain,
    iff,
    relationalize,
    rename_free,
    split_iff,
    subformulas,
    substitute,
    term_variables,
    unfold_bounded,
)

logger = logging.getLogger("refleqt.interpretations")

EQUALITY = "="

# ==========================================
# Translations
# ==========================================


@dataclass(frozen=True, eq=False)
class Translation:
    """A relative translation from ``source`` into ``target``.

    ``domain`` is (variable, formula) or None for an unrelativized domain.
    ``relation_map`` sends each source relation (and optionally ``=``) to
    (parameter variables, target formula). With ``preserve_functions`` the
    source's function symbols are read as themselves and unmapped relations
    the target declares with the same arity translate to themselves.
    """

    name: str
    source: Signature
    target: Signature
    domain: Optional[Tuple[Var, Formula]] = None
    relation_map: Mapping[str, Tuple[Tuple[Var, ...], Formula]] = field(default_factory=dict)
    preserve_functions: bool = False

    def __post_init__(self) -> None:
        if self.domain is not None:
            var, formula = self.domain
            self._check_image("domain", (var,), formula)
        for symbol, (params, formula) in self.relation_map.items():
            arity = self.source_arity(symbol)
            if arity is None:
                raise TranslationError(f"{self.name}: {symbol} is not a relation of {self.source.name}")
            if arity != len(params):
                raise TranslationError(f"{self.name}: {symbol} has arity {arity}, image has {len(params)} parameters")
            self._check_image(symbol, params, formula)

    def _check_image(self, what: str, params: Sequence[Var], formula: Formula) -> None:
        extra = [v for v in free_variables(formula) if v not in params]
        if extra:
            raise TranslationError(f"{self.name}: image of {what} has stray free variables {', '.join(map(str, extra))}")
        try:
            check_formula(formula, self.target)
        except SignatureError as exc:
            raise TranslationError(f"{self.name}: image of {what} is ill-formed over {self.target.name}: {exc}") from exc

    def source_arity(self, symbol: str) -> Optional[int]:
        if symbol == EQUALITY:
            return 2
        if symbol.startswith(GRAPH_PREFIX):
            fn = symbol[len(GRAPH_PREFIX):]
            if self.source.is_constant(fn):
                return 1
            arity = self.source.function_arity(fn)
            return None if arity is None else arity + 1
        return self.source.relation_arity(symbol)

    def delta(self, t: Term) -> Optional[Formula]:
        """δ(t), or None when the domain is unrelativized."""
        if self.domain is None:
            return None
        var, formula = self.domain
        return substitute(formula, var, t)

    def delta_or_trivial(self, t: Term) -> Formula:
        d = self.delta(t)
        return Eq(t, t) if d is None else d

    def image(self, symbol: str, args: Sequence[Term]) -> Formula:
        if symbol in self.relation_map:
            params, formula = self.relation_map[symbol]
            return rename_free(formula, dict(zip(params, args)))
        if symbol == EQUALITY:
            return Eq(args[0], args[1])
        if self.preserve_functions and self.target.relation_arity(symbol) == len(args):
            return Atom(symbol, tuple(args))
        raise TranslationError(f"{self.name}: no image for relation {symbol}")

    def equality(self, s: Term, t: Term) -> Formula:
        """=^t(s, t)."""
        return self.image(EQUALITY, (s, t))

    def source_relations(self) -> List[Tuple[str, int]]:
        """Source relations the translation must account for (graph relations included)."""
        out = list(self.source.relation_symbols())
        for symbol, (params, _) in self.relation_map.items():
            if symbol != EQUALITY and all(symbol != s for s, _ in out):
                out.append((symbol, len(params)))
        return out


def identity_translation(sig: Signature, name: Optional[str] = None) -> Translation:
    return Translation(name or f"id[{sig.name}]", sig, sig, None, {}, preserve_functions=True)


def _needs_unfolding(t: Translation) -> bool:
    return t.domain is not None or not t.preserve_functions


def translate_formula(t: Translation, f: Formula) -> Formula:
    """f^t: atoms through F, connectives homomorphically, quantifiers relativized to δ."""
    try:
        check_formula(f, t.source)
    except SignatureError as exc:
        raise TranslationError(f"{t.name}: formula is not over {t.source.name}: {exc}") from exc
    g = f
    if _needs_unfolding(t):
        g = unfold_bounded(g)
    if not t.preserve_functions:
        g = relationalize(g)
    return _translate(t, g)


def _translate(t: Translation, f: Formula) -> Formula:
    if isinstance(f, Atom):
        return t.image(f.rel, f.args)
    if isinstance(f, Eq):
        return t.equality(f.left, f.right)
    if isinstance(f, Not):
        return Not(_translate(t, f.body))
    if isinstance(f, (And, Or, Implies)):
        return type(f)(_translate(t, f.left), _translate(t, f.right))
    if isinstance(f, (BForall, BExists)):
        return type(f)(f.var, f.bound, _translate(t, f.body))
    body = _translate(t, f.body)
    d = t.delta(f.var)
    if d is None:
        return type(f)(f.var, body)
    if isinstance(f, Forall):
        return Forall(f.var, Implies(d, body))
    return Exists(f.var, And(d, body))


def _variables(n: int, name: str = "x") -> Tuple[Var, ...]:
    return tuple(Var(name, i + 1) for i in range(n))


def compose(t2: Translation, t1: Translation, name: Optional[str] = None) -> Translation:
    """t2 ∘ t1: translate with t1 first, then t2."""
    if t1.target.name != t2.source.name and t1.target != t2.source:
        raise TranslationError(f"cannot compose {t2.name} after {t1.name}: {t1.target.name} is not {t2.source.name}")
    domain: Optional[Tuple[Var, Formula]]
    if t1.domain is None and t2.domain is None:
        domain = None
    elif t1.domain is None:
        domain = t2.domain
    else:
        v = t1.domain[0]
        inner = translate_formula(t2, t1.domain[1])
        d2 = t2.delta(v)
        domain = (v, inner if d2 is None else And(d2, inner))
    relation_map: Dict[str, Tuple[Tuple[Var, ...], Formula]] = {}
    for symbol, arity in t1.source_relations():
        params = _variables(arity)
        relation_map[symbol] = (params, translate_formula(t2, t1.image(symbol, params)))
    if EQUALITY in t1.relation_map or EQUALITY in t2.relation_map:
        params = _variables(2)
        relation_map[EQUALITY] = (params, translate_formula(t2, t1.equality(*params)))
    return Translation(
        name=name or f"{t2.name}.{t1.name}",
        source=t1.source,
        target=t2.target,
        domain=domain,
        relation_map=relation_map,
        preserve_functions=t1.preserve_functions and t2.preserve_functions,
    )


def normal_form(f: Formula) -> Formula:
    """Unfold bounded quantifiers, flatten conjunctions, curry conjunctive antecedents."""
    return _normal(unfold_bounded(f))


def _conjuncts(f: Formula) -> List[Formula]:
    if isinstance(f, And):
        return _conjuncts(f.left) + _conjuncts(f.right)
    return [f]


def _normal(f: Formula) -> Formula:
    if isinstance(f, (Atom, Eq)):
        return f
    if isinstance(f, Not):
        return Not(_normal(f.body))
    if isinstance(f, And):
        return conj(_conjuncts(And(_normal(f.left), _normal(f.right))))
    if isinstance(f, Or):
        return Or(_normal(f.left), _normal(f.right))
    if isinstance(f, Implies):
        return implies_chain(_conjuncts(_normal(f.left)), _normal(f.right))
    return type(f)(f.var, _normal(f.body))


def translations_equivalent(f: Formula, g: Formula) -> bool:
    return alpha_key(normal_form(f)) == alpha_key(normal_form(g))


# ==========================================
# Proof translation
# ==========================================


class ProofTranslator:
    """Maps a source proof to a host-theory proof of the guarded translation."""

    def __init__(self, t: Translation, host: TheoryPresentation):
        if not t.preserve_functions and (t.source.functions or t.source.constants or t.source.has_arithmetic):
            raise TranslationError(f"{t.name}: proof translation needs a relational source or preserved functions")
        self.t = t
        self.host = host
        self._cache: Dict[int, Proof] = {}

    def translate(self, f: Formula) -> Formula:
        return translate_formula(self.t, f)

    def guards(self, variables: Sequence[Var]) -> List[Formula]:
        if self.t.domain is None:
            return []
        return [self.t.delta(v) for v in variables]

    def guarded(self, f: Formula) -> Formula:
        return implies_chain(self.guards(free_variables(f)), self.translate(f))

    def run(self, proof: Proof) -> Proof:
        # Post-order without recursion; shared subproofs translate once.
        stack: List[Tuple[Proof, bool]] = [(proof, False)]
        while stack:
            node, expanded = stack.pop()
            if id(node) in self._cache:
                continue
            if expanded or not node.premises:
                self._cache[id(node)] = self.step(node)
                continue
            stack.append((node, True))
            for premise in node.premises:
                stack.append((premise, False))
        return self._cache[id(proof)]

    def step(self, node: Proof) -> Proof:
        if node.rule == RULE_MP:
            return self.modus_ponens(node)
        if node.rule == RULE_GEN:
            return self.generalization(node)
        if node.rule == RULE_AXIOM:
            return self.logical_axiom(node)
        return self.obligation(node.conclusion)

    def obligation(self, f: Formula) -> Proof:
        """A host leaf for closure(guarded f), instantiated back to the free variables."""
        g = self.guarded(f)
        closed = closure(g)
        if self.host.recognize(closed):
            leaf = theory_leaf(closed)
        else:
            leaf = obligation_leaf(closed)
            if not free_variables(g):
                try:
                    if eval_closed_decidable(closed, self.host, self.host.signature):
                        leaf = computation_leaf(closed)
                except OutOfFragmentError:
                    pass
        return instantiate(leaf, *free_variables(g))

    def weaken(self, p: Proof, f: Formula) -> Proof:
        g = self.guarded(f)
        if alpha_equal(p.conclusion, g):
            return p
        return by_tautology(g, p)

    def logical_axiom(self, node: Proof) -> Proof:
        f = node.conclusion
        image = self.translate(f)
        if match_logical_axiom(node.scheme or "", image) is None:
            return self.weaken(axiom_leaf(node.scheme or "", image), f)
        derived = None
        if isinstance(f, Implies):
            if node.scheme == "inst":
                derived = self._instantiation(f)
            elif node.scheme == "exi":
                derived = self._witness(f)
            elif node.scheme == "all-dist":
                derived = self._distribution(f)
            elif node.scheme == "ex-elim":
                derived = self._elimination(f)
        if derived is not None:
            return self.weaken(derived, f)
        logger.debug(f"{self.t.name}: {node.scheme} step left as an obligation")
        return self.obligation(f)

    def _instantiation(self, f: Implies) -> Optional[Proof]:
        universal = f.left
        if not isinstance(universal, Forall) or universal.var not in free_variables(universal.body):
            return None
        s = instance_term(universal.body, universal.var, f.right)
        if not isinstance(s, Var):
            return None
        return inst_axiom(self.translate(universal), s)

    def _witness(self, f: Implies) -> Optional[Proof]:
        existential = f.right
        if not isinstance(existential, Exists) or existential.var not in free_variables(existential.body):
            return None
        s = instance_term(existential.body, existential.var, f.left)
        if not isinstance(s, Var):
            return None
        return exi_axiom(self.translate(existential), s)

    def _distribution(self, f: Implies) -> Optional[Proof]:
        h = self.translate(f.left)
        if not (self.t.domain is not None and isinstance(f.left, Forall) and isinstance(f.left.body, Implies)):
            return None
        x = f.left.var
        c, d = self.translate(f.left.body.left), self.translate(f.left.body.right)
        dx = self.t.delta(x)
        s1 = inst_axiom(h, x)
        s2 = by_tautology(Implies(And(h, c), Implies(dx, d)), s1)
        s3 = forall_under_hypothesis(s2, x)
        return by_tautology(self.translate(f), s3)

    def _elimination(self, f: Implies) -> Optional[Proof]:
        h = self.translate(f.left)
        if not (self.t.domain is not None and isinstance(f.left, Forall) and isinstance(f.left.body, Implies)):
            return None
        x = f.left.var
        c, d = self.translate(f.left.body.left), self.translate(f.left.body.right)
        dx = self.t.delta(x)
        s1 = inst_axiom(h, x)
        s2 = by_tautology(Implies(And(dx, c), Implies(h, d)), s1)
        s3 = exists_elimination(s2, x)
        return by_tautology(self.translate(f), s3)

    def nonempty(self) -> Proof:
        """The host leaf for ∃x δ(x), an obligation unless the host has it as an axiom."""
        var, formula = self.t.domain
        claim = Exists(var, formula)
        if self.host.recognize(claim):
            return theory_leaf(claim)
        return obligation_leaf(claim)

    def modus_ponens(self, node: Proof) -> Proof:
        antecedent, implication = node.premises
        g1, g2 = self._cache[id(antecedent)], self._cache[id(implication)]
        if self.t.domain is None:
            return mp(g1, g2)
        a = node.conclusion
        kept = free_variables(a)
        extra = [v for v in free_variables(implication.conclusion) if v not in kept]
        extra += [v for v in free_variables(antecedent.conclusion) if v not in kept and v not in extra]
        image = self.translate(a)
        current = by_tautology(implies_chain(self.guards(kept + extra), image), g1, g2)
        while extra:
            e = extra.pop()
            rest = implies_chain(self.guards(kept + extra), image)
            rearranged = by_tautology(Implies(self.t.delta(e), rest), current)
            current = mp(self.nonempty(), exists_elimination(rearranged, e))
        return current

    def generalization(self, node: Proof) -> Proof:
        g = self._cache[id(node.premises[0])]
        x = node.var
        if self.t.domain is None:
            return generalize(g, x)
        body = self.translate(node.premises[0].conclusion)
        matrix = Implies(self.t.delta(x), body)
        outer = self.guards(free_variables(node.conclusion))
        if not outer:
            return generalize(by_tautology(matrix, g), x)
        hyp = conj(outer)
        s1 = by_tautology(Implies(hyp, matrix), g)
        s2 = forall_under_hypothesis(s1, x)
        return by_tautology(self.guarded(node.conclusion), s2)


def translate_proof(t: Translation, p: Proof, host: TheoryPresentation) -> Tuple[Proof, List[Formula]]:
    """Host-theory proof skeleton of the translated conclusion plus its open obligations."""
    out = ProofTranslator(t, host).run(p)
    pending = obligations(out)
    logger.info(f"Translated proof through {t.name}: {out.node_count} nodes, {len(pending)} obligations")
    return out, pending


# ==========================================
# Discharge helpers
# ==========================================


def discharge_trivially(f: Formula) -> Optional[Proof]:
    """Proof of ∀x⃗ M when M is a propositional tautology or a reflexivity instance."""
    prefix: List[Var] = []
    matrix = f
    while isinstance(matrix, Forall):
        prefix.append(matrix.var)
        matrix = matrix.body
    if is_tautology(matrix):
        return generalize(taut(matrix), *prefix)
    if isinstance(matrix, Eq) and matrix.left == matrix.right:
        return generalize(refl(matrix.left), *prefix)
    return None


class EqualityProver:
    """Small prover for obligations built from equations, conjunctions and witnesses.

    Goals are closed by chaining hypothesis equations with Leibniz steps,
    reflexivity, and existential witnesses read off equations in the body.
    """

    def __init__(self, witnesses: Sequence[Term] = ()):
        self.witnesses = tuple(witnesses)

    def prove(self, f: Formula) -> Optional[Proof]:
        prefix: List[Var] = []
        matrix = f
        while isinstance(matrix, Forall):
            prefix.append(matrix.var)
            matrix = matrix.body
        facts = self.facts(matrix, [])
        if facts is None:
            return None
        refls = [refl(a.left) for a in _reflexive_atoms(matrix)]
        premises = _unique(facts + refls)
        if not is_tautology(implies_chain([p.conclusion for p in premises], matrix)):
            return None
        return generalize(by_tautology(matrix, *premises), *prefix)

    def facts(self, goal: Formula, hyps: List[Formula]) -> Optional[List[Proof]]:
        if any(alpha_equal(goal, h) for h in hyps):
            return []
        if isinstance(goal, Implies):
            return self.facts(goal.right, hyps + _conjuncts(goal.left))
        sides = split_iff(goal)
        if sides is not None:
            forward = self.facts(sides[1], hyps + _conjuncts(sides[0]))
            backward = self.facts(sides[0], hyps + _conjuncts(sides[1]))
            if forward is None or backward is None:
                return None
            return forward + backward
        if isinstance(goal, And):
            left, right = self.facts(goal.left, hyps), self.facts(goal.right, hyps)
            if left is None or right is None:
                return None
            return left + right
        if isinstance(goal, Eq):
            return self.path(goal.left, goal.right, hyps)
        if isinstance(goal, Atom):
            return self.atom(goal, hyps)
        if isinstance(goal, Exists):
            for t in self.candidates(goal, hyps):
                instance = substitute(goal.body, goal.var, t)
                inner = self.facts(instance, hyps)
                if inner is not None:
                    return inner + [exi_axiom(goal, t)] + [refl(a.left) for a in _reflexive_atoms(instance)]
            return None
        return None

    def candidates(self, goal: Exists, hyps: Sequence[Formula]) -> List[Term]:
        out: List[Term] = []
        for node in _conjuncts(goal.body):
            if isinstance(node, Eq):
                for a, b in ((node.left, node.right), (node.right, node.left)):
                    if a == goal.var and goal.var not in term_variables(b) and b not in out:
                        out.append(b)
        for t in self.witnesses:
            if t not in out:
                out.append(t)
        if goal.var not in out:
            out.append(goal.var)
        return out

    def path(self, s: Term, t: Term, hyps: Sequence[Formula]) -> Optional[List[Proof]]:
        """Facts deriving s = t from the hypothesis equations (breadth-first)."""
        if s == t:
            return [refl(s)]
        edges: Dict[Term, List[Tuple[Term, Formula]]] = {}
        for h in hyps:
            if isinstance(h, Eq) and h.left != h.right:
                edges.setdefault(h.left, []).append((h.right, h))
                edges.setdefault(h.right, []).append((h.left, h))
        previous: Dict[Term, Tuple[Term, Formula]] = {}
        queue = deque([s])
        seen = {s}
        while queue:
            node = queue.popleft()
            if node == t:
                break
            for nxt, eq in edges.get(node, []):
                if nxt not in seen:
                    seen.add(nxt)
                    previous[nxt] = (node, eq)
                    queue.append(nxt)
        if t not in seen:
            return None
        hops: List[Tuple[Term, Term, Formula]] = []
        node = t
        while node != s:
            prior, eq = previous[node]
            hops.append((prior, node, eq))
            node = prior
        facts: List[Proof] = [refl(s)]
        for a, b, eq in reversed(hops):
            if eq.left != a:
                facts.append(symmetry_axiom(b, a))
            facts.append(leibniz(a, b, Eq(s, a), Eq(s, b)))
        return facts

    def atom(self, goal: Atom, hyps: Sequence[Formula]) -> Optional[List[Proof]]:
        for h in hyps:
            if not (isinstance(h, Atom) and h.rel == goal.rel and len(h.args) == len(goal.args)):
                continue
            facts: List[Proof] = []
            current = list(h.args)
            for i, target in enumerate(goal.args):
                if current[i] == target:
                    continue
                link = self.path(current[i], target, hyps)
                if link is None:
                    break
                before = Atom(goal.rel, tuple(current))
                current[i] = target
                facts += link + [leibniz(before.args[i], target, before, Atom(goal.rel, tuple(current)))]
            else:
                return facts
        return None


def _reflexive_atoms(f: Formula) -> List[Eq]:
    return [node for node in subformulas(f) if isinstance(node, Eq) and node.left == node.right]


def _unique(proofs: Sequence[Proof]) -> List[Proof]:
    out: List[Proof] = []
    keys = set()
    for p in proofs:
        key = alpha_key(p.conclusion)
        if key not in keys:
            keys.add(key)
            out.append(p)
    return out


def discharge_by_equality(f: Formula, witnesses: Sequence[Term] = ()) -> Optional[Proof]:
    return EqualityProver(witnesses).prove(f)


# ==========================================
# Witness bundles
# ==========================================

KIND_IDENTITY = "identity"
KIND_ISOMORPHISM = "isomorphism"
KIND_RETRACT = "retract"
KIND_BI_INTERPRETATION = "bi-interpretation"
KIND_ADEQUACY = "adequacy"

REQUIRED_ROLES: Dict[str, Tuple[Tuple[str, ...], Tuple[str, ...]]] = {
    KIND_IDENTITY: (("tau", "sigma"), ()),
    KIND_ISOMORPHISM: (("tau", "sigma"), ("I",)),
    KIND_RETRACT: (("tau", "sigma"), ("I",)),
    KIND_BI_INTERPRETATION: (("tau", "sigma"), ("I_source", "I_target")),
    KIND_ADEQUACY: (("N", "M", "F", "G"), ()),
}


@dataclass(frozen=True)
class Obligation:
    label: str
    formula: Formula
    host: str = "target"


@dataclass(frozen=True, eq=False)
class WitnessBundle:
    kind: str
    translations: Mapping[str, Translation]
    witnesses: Mapping[str, Tuple[Tuple[Var, Var], Formula]] = field(default_factory=dict)
    discharges: Mapping[str, Proof] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.kind not in REQUIRED_ROLES:
            raise BundleError(f"unknown bundle kind {self.kind}")
        roles, witness_roles = REQUIRED_ROLES[self.kind]
        missing = [r for r in roles if r not in self.translations]
        missing += [w for w in witness_roles if w not in self.witnesses]
        if missing:
            raise BundleError(f"{self.kind} bundle is missing {', '.join(missing)}")
        for role, (params, formula) in self.witnesses.items():
            if len(params) != 2 or any(v not in params for v in free_variables(formula)):
                raise BundleError(f"witness {role} must be a formula in its two declared variables")

    def with_discharges(self, discharges: Mapping[str, Proof]) -> "WitnessBundle":
        return WitnessBundle(self.kind, self.translations, self.witnesses, {**self.discharges, **discharges})


def _relation_vars(n: int, name: str) -> List[Var]:
    return [Var(name, i + 1) for i in range(n)]


def identity_obligations(tau: Translation, sigma: Translation, prefix: str = "", host: str = "target") -> List[Obligation]:
    """δτ ↔ δσ, then one guarded biconditional per source relation."""
    x = Var("x")
    out = [Obligation(f"{prefix}identity-domain",
                      Forall(x, iff(tau.delta_or_trivial(x), sigma.delta_or_trivial(x))), host)]
    for symbol, arity in tau.source_relations():
        xs = _relation_vars(arity, "x")
        body = iff(tau.image(symbol, xs), sigma.image(symbol, xs))
        body = implies_chain([conj([tau.delta_or_trivial(v) for v in xs])], body) if xs else body
        out.append(Obligation(f"{prefix}identity-{symbol}", _close(body, xs), host))
    return out


def _close(body: Formula, variables: Sequence[Var]) -> Formula:
    out = body
    for v in reversed(variables):
        out = Forall(v, out)
    return out


def isomorphism_obligations(tau: Translation, sigma: Translation, witness: Tuple[Tuple[Var, Var], Formula],
                            prefix: str = "", host: str = "target") -> List[Obligation]:
    """The seven isomorphism conditions, the last one per source relation."""
    (wx, wy), formula = witness

    def rel(a: Term, b: Term) -> Formula:
        return rename_free(formula, {wx: a, wy: b})

    x, y, u, v = Var("x"), Var("y"), Var("u"), Var("v")
    dt, ds = tau.delta_or_trivial, sigma.delta_or_trivial
    out = [
        Obligation(f"{prefix}iso-1", _close(Implies(rel(x, y), And(dt(x), ds(y))), [x, y]), host),
        Obligation(f"{prefix}iso-2", Forall(x, Implies(dt(x), Exists(y, And(ds(y), rel(x, y))))), host),
        Obligation(f"{prefix}iso-3", Forall(y, Implies(ds(y), Exists(x, And(dt(x), rel(x, y))))), host),
        Obligation(f"{prefix}iso-4", _close(Implies(conj([rel(x, y), tau.equality(x, u), sigma.equality(y, v)]),
                                                    rel(u, v)), [x, y, u, v]), host),
        Obligation(f"{prefix}iso-5", _close(Implies(And(rel(x, y), rel(x, v)), sigma.equality(y, v)), [x, y, v]), host),
        Obligation(f"{prefix}iso-6", _close(Implies(And(rel(x, y), rel(u, y)), tau.equality(x, u)), [x, y, u]), host),
    ]
    for symbol, arity in tau.source_relations():
        xs, ys = _relation_vars(arity, "x"), _relation_vars(arity, "y")
        body = iff(tau.image(symbol, xs), sigma.image(symbol, ys))
        if arity:
            body = Implies(conj([rel(a, b) for a, b in zip(xs, ys)]), body)
        out.append(Obligation(f"{prefix}iso-7-{symbol}", _close(body, xs + ys), host))
    return out


def witness_obligations(b: WitnessBundle) -> List[Obligation]:
    tr = b.translations
    if b.kind == KIND_IDENTITY:
        return identity_obligations(tr["tau"], tr["sigma"])
    if b.kind == KIND_ISOMORPHISM:
        return isomorphism_obligations(tr["tau"], tr["sigma"], b.witnesses["I"])
    if b.kind == KIND_RETRACT:
        return _retract(tr["tau"], tr["sigma"], b.witnesses["I"], "", "source")
    if b.kind == KIND_BI_INTERPRETATION:
        back = _retract(tr["tau"], tr["sigma"], b.witnesses["I_source"], "source.", "source")
        forth = isomorphism_obligations(identity_translation(tr["tau"].target), compose(tr["tau"], tr["sigma"]),
                                        b.witnesses["I_target"], "target.", "target")
        return back + forth
    n, m, f, g = tr["N"], tr["M"], tr["F"], tr["G"]
    return (identity_obligations(compose(f, n), m, "F.", "tau_prime")
            + identity_obligations(compose(g, m), n, "G.", "tau"))


def _retract(tau: Translation, sigma: Translation, witness, prefix: str, host: str) -> List[Obligation]:
    """Isomorphism between σ∘τ and the identity on τ's source."""
    return isomorphism_obligations(compose(sigma, tau), identity_translation(tau.source), witness, prefix, host)


def check_bundle(b: WitnessBundle, host: Union[TheoryPresentation, Mapping[str, TheoryPresentation]]) -> Verdict:
    """Accepted iff every obligation has a discharge proof that checks in its host."""
    for obligation in witness_obligations(b):
        theory = host if isinstance(host, TheoryPresentation) else host.get(obligation.host)
        if theory is None:
            raise BundleError(f"no host theory for role {obligation.host}")
        proof = b.discharges.get(obligation.label)
        if proof is None:
            return _bundle_reject(obligation, "no discharge proof")
        if not alpha_equal(proof.conclusion, obligation.formula):
            return _bundle_reject(obligation, "discharge proof concludes a different sentence")
        verdict = check_proof(proof, theory)
        if not verdict.accepted:
            return _bundle_reject(obligation, f"discharge rejected in {theory.name} at {verdict.failing_step}")
    return ACCEPTED


def _bundle_reject(obligation: Obligation, reason: str) -> Verdict:
    logger.info(f"Bundle obligation {obligation.label} failed: {reason}")
    return Verdict(False, FailingStep((), obligation.label, reason))
