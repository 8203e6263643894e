"""
Reductions
==========
Executable proof transformations between presentations: splicing away
small-reflection axioms, eliminating a truth predicate in favour of a finite
Tarski truth definition, and empirical certification of polynomial size bounds
for such transformers.
"""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .builder import (
    by_tautology,
    comp,
    exi_axiom,
    exists_elimination,
    generalize,
    instantiate,
    leibniz,
    refl,
    symmetry_axiom,
    thy,
)
from .calculus import (
    RULE_THEORY,
    Proof,
    TheoryPresentation,
    check_proof,
    decode_proof,
    encode_proof,
    instance_term,
    iter_families,
    proof_size,
    single_free_variable,
)
from .codec import CODING_SIGNATURE, axiom_relation, cantor_pair, encode_formula, proof_relation, quote
from .errors import CodecError, MalformedProofError, OutOfFragmentError, RefleqtError, TruthEliminationError
from .evaluation import Evaluator, eval_closed_decidable
from .generators import (
    DisquotationFamily,
    SmallReflectionFamily,
    TruthInclusionFamily,
    sub,
    tarski_truth_definition,
)
from .interpretations import Translation
from .syntax import (
    TRUTH_PREDICATE,
    And,
    Atom,
    Eq,
    Forall,
    Formula,
    Implies,
    Not,
    Numeral,
    Or,
    Var,
    all_variables,
    alpha_equal,
    alpha_key,
    contains_relation,
    fresh_variable,
    parse_formula,
    print_formula,
    replace_atoms,
    substitute,
)

logger = logging.getLogger("refleqt.reductions")

TEMPLATE_INJECTIVITY_TEXT = "(all c (all x (all y (-> (Tmpl c) (-> (= (sub c x) (sub c y)) (= x y))))))"
TEMPLATE_DISJOINTNESS_TEXT = "(all c (all d (all x (all y (-> (Dis c d) (not (= (sub c x) (sub d y))))))))"


def template_injectivity_axiom() -> Formula:
    return parse_formula(TEMPLATE_INJECTIVITY_TEXT, CODING_SIGNATURE)


def template_disjointness_axiom() -> Formula:
    return parse_formula(TEMPLATE_DISJOINTNESS_TEXT, CODING_SIGNATURE)


def _rebuild(proof: Proof, leaf: Callable[[Proof], Proof],
             conclusion: Callable[[Formula], Formula] = lambda f: f) -> Proof:
    """Post-order copy of ``proof`` with leaves mapped by ``leaf`` and inner conclusions by ``conclusion``."""
    done: Dict[int, Proof] = {}
    stack: List[Tuple[Proof, bool]] = [(proof, False)]
    while stack:
        node, expanded = stack.pop()
        if id(node) in done:
            continue
        if not node.premises:
            done[id(node)] = leaf(node)
            continue
        if not expanded:
            stack.append((node, True))
            stack.extend((p, False) for p in node.premises)
            continue
        premises = tuple(done[id(p)] for p in node.premises)
        done[id(node)] = Proof(node.rule, conclusion(node.conclusion), premises, node.scheme, node.var)
    return done[id(proof)]


# ==========================================
# Small reflection
# ==========================================


def _provability_split(s: Formula, theory: TheoryPresentation) -> Optional[Tuple[Atom, Formula]]:
    """The Proof_τ(a, X) -> ψ core of a small-reflection member, under any guards."""
    rel = proof_relation(theory.name)
    inner = s
    while isinstance(inner, Implies):
        if isinstance(inner.left, Atom) and inner.left.rel == rel:
            return inner.left, inner.right
        inner = inner.right
    return None


def _spliced_proof(theory: TheoryPresentation, n1: int, code: int) -> Optional[Proof]:
    try:
        proof = decode_proof(n1, theory.coding_signature)
    except CodecError:
        return None
    if encode_formula(proof.conclusion) != code or not check_proof(proof, theory).accepted:
        return None
    return proof


def prove_small_reflection_member(theory: TheoryPresentation, s: Formula,
                                  families: Sequence[SmallReflectionFamily] = ()) -> Proof:
    """A ``theory``-proof of one small-reflection axiom, unpaired or paired.

    When the first argument of the provability atom codes a checking proof of
    the quoted sentence, that proof is spliced in (with a computed rewrite of
    the numeral for paired members); otherwise the atom is refuted by a
    computation axiom.
    """
    split = _provability_split(s, theory)
    if split is None:
        raise MalformedProofError(f"not a small-reflection axiom over {theory.name}: {print_formula(s)}")
    atom, consequent = split
    evaluator = Evaluator(theory, theory.signature)
    try:
        n1 = evaluator.term(atom.args[0], {})
        code = evaluator.term(atom.args[1], {})
    except OutOfFragmentError as exc:
        raise MalformedProofError(f"provability atom is not computable: {exc}") from exc

    inner = _spliced_proof(theory, n1, code)
    if inner is None:
        return by_tautology(s, comp(Not(atom)))
    if alpha_equal(inner.conclusion, consequent):
        return by_tautology(s, inner)
    for family in families:
        spelled = instance_term(family.target, family.var, consequent)
        plain = instance_term(family.target, family.var, inner.conclusion)
        if spelled is None or not isinstance(plain, Numeral):
            continue
        equation = comp(Eq(plain, spelled))
        rewrite = leibniz(plain, spelled, inner.conclusion, consequent)
        return by_tautology(s, inner, equation, rewrite)
    raise MalformedProofError(f"spliced proof does not conclude the consequent of {print_formula(s)}")


def prove_small_reflection_instance(theory: TheoryPresentation, phi: Formula, n1: int, n2: int,
                                    translation: Optional[Translation] = None, spliced: bool = True) -> Proof:
    """A ``theory``-proof of Proof_τ(n̄1, ⌜φ(ṅ2)⌝) -> φ(n̄2)."""
    family = SmallReflectionFamily(theory, phi, translation)
    return prove_small_reflection_member(theory, family.instance(n1, n2, spliced), (family,))


def reduce_small_reflection_proof(p: Proof, theory: TheoryPresentation,
                                  source: Optional[TheoryPresentation] = None) -> Proof:
    """Replace every small-reflection leaf of a τ′-proof by its τ-proof.

    With ``source`` given, leaves must be recognized by one of its
    small-reflection families over ``theory``; without it any leaf of the
    unpaired shape is accepted.
    """
    families = [] if source is None else [
        f for f in iter_families(source) if isinstance(f, SmallReflectionFamily) and f.theory is theory
    ]
    cache: Dict[tuple, Proof] = {}
    replaced = 0

    def leaf(node: Proof) -> Proof:
        nonlocal replaced
        if node.rule != RULE_THEORY or theory.recognize(node.conclusion):
            return node
        key = alpha_key(node.conclusion)
        if key not in cache:
            if source is not None and not any(f.recognizes(node.conclusion) for f in families):
                raise MalformedProofError(
                    f"leaf is neither a {theory.name} axiom nor small reflection: {print_formula(node.conclusion)}"
                )
            cache[key] = prove_small_reflection_member(theory, node.conclusion, families)
        replaced += 1
        return cache[key]

    out = _rebuild(p, leaf)
    logger.debug(f"Reduced {replaced} small-reflection leaves into {theory.name}")
    return out


# ==========================================
# Truth elimination
# ==========================================


def _disjuncts(f: Formula, count: int) -> List[Formula]:
    out: List[Formula] = []
    while len(out) < count - 1:
        if not isinstance(f, Or):
            break
        out.append(f.left)
        f = f.right
    out.append(f)
    return out


class TruthEliminator:
    """Rewrites a UTB/SC proof into a base proof by reading T as a finite truth definition."""

    def __init__(self, theory: TheoryPresentation, embedding: Optional[Translation] = None):
        self.theory = theory
        self.disquotation = DisquotationFamily(theory, embedding)
        self.inclusion = TruthInclusionFamily(theory, embedding)
        self.psis: List[Formula] = []
        self.index: Dict[int, int] = {}
        self.definition: Optional[Formula] = None
        self.var = Var("z")
        self.bound = Var("y")

    # ------------------------------------------------------------------
    # Setup
    # ------------------------------------------------------------------

    def classify(self, s: Formula) -> Optional[Tuple[str, Formula]]:
        if self.theory.recognize(s):
            return None
        psi = self.disquotation.formula_of(s)
        if psi is not None:
            return "utb", psi
        phi = self.inclusion.template_of(s)
        if phi is not None and self.inclusion.recognizes(s):
            return "sc", phi
        raise TruthEliminationError(f"leaf is neither a {self.theory.name} axiom nor a truth axiom: {print_formula(s)}")

    def prepare(self, p: Proof) -> None:
        taken = set()
        for _, node in p.nodes():
            taken |= all_variables(node.conclusion)
            if node.var is not None:
                taken.add(node.var)
            if node.rule == RULE_THEORY:
                found = self.classify(node.conclusion)
                if found is not None:
                    self._register(found[1])
        for psi in self.psis:
            taken |= all_variables(psi)
        self.bound = fresh_variable(Var("y"), taken)
        self.var = fresh_variable(Var("z"), taken | {self.bound})
        if self.psis:
            self.definition = tarski_truth_definition(self.psis, self.var, self.bound)
            for axiom in (template_injectivity_axiom(), template_disjointness_axiom()):
                if not self.theory.recognize(axiom):
                    raise TruthEliminationError(f"{self.theory.name} lacks the template axiom {print_formula(axiom)}")
        else:
            self.definition = Not(Eq(self.var, self.var))
        logger.debug(f"Truth definition over {len(self.psis)} templates, bound variable {self.bound}")

    def _register(self, psi: Formula) -> None:
        code = encode_formula(psi)
        if code not in self.index:
            self.index[code] = len(self.psis)
            self.psis.append(psi)

    def truth_of(self, t) -> Formula:
        return substitute(self.definition, self.var, t)

    def translate(self, f: Formula) -> Formula:
        if not contains_relation(f, TRUTH_PREDICATE):
            return f
        return replace_atoms(f, TRUTH_PREDICATE, lambda args: self.truth_of(args[0]))

    # ------------------------------------------------------------------
    # Leaf proofs
    # ------------------------------------------------------------------

    def introduce(self, j: int, x: Var, psi_x: Formula) -> Proof:
        """ψj(x) -> 𝔗(sub(⌜ψj⌝, x)) by picking the j-th disjunct with witness x."""
        term = sub(quote(self.psis[j]), x)
        disjunct = _disjuncts(self.truth_of(term), len(self.psis))[j]
        return by_tautology(Implies(psi_x, self.truth_of(term)), exi_axiom(disjunct, x), refl(term))

    def case(self, i: int, j: int, x: Var, psi_x: Formula) -> Proof:
        """i-th disjunct of 𝔗(sub(⌜ψj⌝, x)) -> ψj(x)."""
        code_j, code_i = quote(self.psis[j]), quote(self.psis[i])
        term = sub(code_j, x)
        disjunct = _disjuncts(self.truth_of(term), len(self.psis))[i]
        y = disjunct.var
        body = disjunct.body
        if i == j:
            psi_y = substitute(self.psis[j], single_free_variable(self.psis[j]), y)
            injective = instantiate(thy(template_injectivity_axiom()), code_j, x, y)
            tmpl = comp(Atom("Tmpl", (code_j,)))
            step = by_tautology(Implies(body, psi_x), injective, tmpl, symmetry_axiom(x, y),
                                leibniz(y, x, psi_y, psi_x))
        else:
            clash = Atom("Dis", (code_j, code_i))
            if not eval_closed_decidable(clash, self.theory, self.theory.signature):
                raise TruthEliminationError(
                    f"templates {print_formula(self.psis[j])} and {print_formula(self.psis[i])} share a numeral instance"
                )
            disjoint = instantiate(thy(template_disjointness_axiom()), code_j, code_i, x, y)
            step = by_tautology(Implies(body, psi_x), disjoint, comp(clash))
        return exists_elimination(step, y)

    def disquotation_proof(self, s: Formula, psi: Formula) -> Proof:
        target = self.translate(s)
        x = target.var
        j = self.index[encode_formula(psi)]
        psi_x = substitute(psi, single_free_variable(psi), x)
        term = sub(quote(psi), x)
        cases = [self.case(i, j, x, psi_x) for i in range(len(self.psis))]
        forward = by_tautology(Implies(self.truth_of(term), psi_x), *cases)
        backward = self.introduce(j, x, psi_x)
        return generalize(by_tautology(target.body, forward, backward), x)

    def inclusion_proof(self, s: Formula, phi: Formula) -> Proof:
        target = self.translate(s)
        x = target.var
        v = single_free_variable(phi)
        closed = Forall(v, phi)
        if not self.theory.recognize(closed):
            raise TruthEliminationError(
                f"truth-inclusion template {print_formula(phi)} is not schematic in {self.theory.name}"
            )
        j = self.index[encode_formula(phi)]
        psi_x = substitute(phi, v, x)
        instance = instantiate(thy(closed), x)
        return generalize(by_tautology(target.body, instance, self.introduce(j, x, psi_x)), x)

    # ------------------------------------------------------------------

    def leaf(self, node: Proof) -> Proof:
        if node.rule == RULE_THEORY:
            found = self.classify(node.conclusion)
            if found is None:
                return node
            kind, psi = found
            if kind == "utb":
                return self.disquotation_proof(node.conclusion, psi)
            return self.inclusion_proof(node.conclusion, psi)
        return Proof(node.rule, self.translate(node.conclusion), (), node.scheme, node.var)

    def run(self, p: Proof) -> Proof:
        self.prepare(p)
        out = _rebuild(p, self.leaf, self.translate)
        if not alpha_equal(out.conclusion, p.conclusion):
            raise TruthEliminationError("eliminated proof changed its conclusion")
        return out


def eliminate_truth(p: Proof, theory: TheoryPresentation, embedding: Optional[Translation] = None) -> Proof:
    """A ``theory``-proof of the T-free conclusion of a UTB/SC proof."""
    if contains_relation(p.conclusion, TRUTH_PREDICATE):
        raise TruthEliminationError("the conclusion mentions the truth predicate")
    eliminator = TruthEliminator(theory, embedding)
    out = eliminator.run(p)
    logger.info(f"Eliminated truth over {len(eliminator.psis)} templates: {p.node_count} -> {out.node_count} nodes")
    return out


# ==========================================
# Witnesses and bounds
# ==========================================


@dataclass(frozen=True)
class Polynomial:
    """Non-negative integer coefficients, constant term first."""

    coeffs: Tuple[int, ...]

    def __post_init__(self) -> None:
        if not self.coeffs or any(c < 0 for c in self.coeffs):
            raise ValueError("a size bound needs at least one non-negative coefficient")

    def __call__(self, n: int) -> int:
        return sum(c * n**i for i, c in enumerate(self.coeffs))

    @property
    def degree(self) -> int:
        return max((i for i, c in enumerate(self.coeffs) if c), default=0)

    def __str__(self) -> str:
        terms = []
        for i, c in reversed(list(enumerate(self.coeffs))):
            if c == 0:
                continue
            terms.append(str(c) if i == 0 else f"{c}n" if i == 1 else f"{c}n^{i}")
        return " + ".join(terms) or "0"


IDENTITY_BOUND = Polynomial((0, 1))
CUBIC_BOUND = Polynomial((0, 0, 0, 1))


@dataclass(frozen=True, eq=False)
class ReductionWitness:
    name: str
    source: TheoryPresentation
    target: TheoryPresentation
    transformer: Callable[[Proof], Proof]
    claimed_bound: Polynomial
    provenance: str = ""


@dataclass(frozen=True)
class BoundViolation:
    index: int
    reason: str
    sizes: Optional[Tuple[int, int]] = None


@dataclass
class BoundReport:
    claimed_bound: Polynomial
    samples: List[Tuple[int, int]] = field(default_factory=list)
    violations: List[BoundViolation] = field(default_factory=list)

    @property
    def within_bound(self) -> bool:
        return not self.violations

    @property
    def verdict(self) -> str:
        if self.within_bound:
            return "within-bound"
        first = self.violations[0]
        return f"violated(sample {first.index}: {first.reason})"

    def table(self) -> str:
        rows = ["sample  input  output  bound"]
        for i, (n, m) in enumerate(self.samples):
            rows.append(f"{i:>6}  {n:>5}  {m:>6}  {self.claimed_bound(n)}")
        rows.append(f"verdict: {self.verdict}")
        return "\n".join(rows)


def certify_bound(w: ReductionWitness, corpus: Sequence[Proof]) -> BoundReport:
    """Run the transformer over ``corpus`` and test output size against the claimed bound."""
    report = BoundReport(w.claimed_bound)
    for i, p in enumerate(corpus):
        n = proof_size(p)
        if not check_proof(p, w.source).accepted:
            report.violations.append(BoundViolation(i, f"corpus proof does not check in {w.source.name}"))
            continue
        try:
            out = w.transformer(p)
        except RefleqtError as exc:
            report.violations.append(BoundViolation(i, f"transformer failed: {exc}"))
            continue
        m = proof_size(out)
        report.samples.append((n, m))
        if not alpha_equal(out.conclusion, p.conclusion):
            report.violations.append(BoundViolation(i, "conclusion changed", (n, m)))
        elif not check_proof(out, w.target).accepted:
            report.violations.append(BoundViolation(i, f"output does not check in {w.target.name}", (n, m)))
        elif m > w.claimed_bound(n):
            report.violations.append(BoundViolation(i, f"size {m} exceeds {w.claimed_bound(n)}", (n, m)))
    logger.info(f"[CERTIFY] {w.name}: {len(report.samples)} samples, {report.verdict}")
    return report


def fit_bound(samples: Sequence[Tuple[int, int]], degree: int = 3) -> Polynomial:
    """Smallest c with output <= c·input^degree on every sample."""
    c = 0
    for n, m in samples:
        scale = max(n, 1) ** degree
        c = max(c, -(-m // scale))
    return Polynomial((0,) * degree + (max(c, 1),))


def identity_witness(theory: TheoryPresentation) -> ReductionWitness:
    return ReductionWitness(f"id[{theory.name}]", theory, theory, lambda p: p, IDENTITY_BOUND, "identity")


def small_reflection_witness(source: TheoryPresentation, theory: TheoryPresentation,
                             bound: Polynomial = CUBIC_BOUND) -> ReductionWitness:
    return ReductionWitness(
        f"smallref[{source.name} -> {theory.name}]", source, theory,
        lambda p: reduce_small_reflection_proof(p, theory, source), bound, "small-reflection splicing",
    )


def truth_elimination_witness(source: TheoryPresentation, theory: TheoryPresentation,
                              bound: Polynomial = CUBIC_BOUND,
                              embedding: Optional[Translation] = None) -> ReductionWitness:
    return ReductionWitness(
        f"truth-elim[{source.name} -> {theory.name}]", source, theory,
        lambda p: eliminate_truth(p, theory, embedding), bound, "Tarski truth definition",
    )


# ==========================================
# Corpora
# ==========================================


def numeral_instance_proof(theory: TheoryPresentation, phi: Formula, n: int) -> Optional[Proof]:
    """A short proof of φ(n̄): instantiate ∀vφ when it is an axiom, or reflexivity."""
    v = single_free_variable(phi)
    instance = substitute(phi, v, Numeral(n))
    closed = Forall(v, phi)
    if theory.recognize(closed):
        return instantiate(thy(closed), Numeral(n))
    if isinstance(instance, Eq) and instance.left == instance.right:
        return refl(instance.left)
    return None


def small_reflection_corpus(source: TheoryPresentation, size: int = 50, seed: int = 0) -> List[Proof]:
    """``size`` source proofs built from the first small-reflection family of ``source``."""
    family = next((f for f in iter_families(source) if isinstance(f, SmallReflectionFamily)), None)
    if family is None:
        raise ValueError(f"{source.name} has no small-reflection family")
    theory = family.theory
    rng = random.Random(seed)
    base_axioms = [a for a in theory.axioms if not contains_relation(a, TRUTH_PREDICATE)]
    out: List[Proof] = []
    for i in range(size):
        n2 = rng.randrange(0, 40)
        inner = numeral_instance_proof(theory, family.target, n2)
        real = encode_proof(inner) if inner is not None else rng.randrange(0, 64)
        junk = rng.randrange(0, 64)
        shape = i % 5
        if shape == 0:
            out.append(thy(family.instance(junk, n2)))
        elif shape == 1:
            out.append(thy(family.instance(real, n2)))
        elif shape == 2:
            out.append(thy(family.instance(real, n2, spliced=False)))
        elif shape == 3:
            s1, s2 = family.instance(real, n2), family.instance(junk, rng.randrange(0, 40))
            out.append(by_tautology(And(s1, s2), thy(s1), thy(s2)))
        else:
            paired = substitute(family.template, family.pair_var, Numeral(cantor_pair(junk, n2)))
            leaves = [thy(paired)]
            if base_axioms:
                extra = base_axioms[rng.randrange(len(base_axioms))]
                leaves.append(thy(extra))
                out.append(by_tautology(And(paired, extra), *leaves))
            else:
                out.append(leaves[0])
    return out


TRUTH_POOL_TEXTS = (
    "(= v v)",
    "(<= v (S v))",
    "(not (= (S v) 0))",
    "(not (<= (S v) v))",
)
INDUCTION_TEMPLATE_TEXT = (
    "(-> (and (<= 0 (+ 0 v)) (all x (-> (<= x (+ x v)) (<= (S x) (+ (S x) v))))) (all x (<= x (+ x v))))"
)


def truth_pool(theory: TheoryPresentation) -> List[Formula]:
    sig = theory.signature
    return [parse_formula(text, sig) for text in TRUTH_POOL_TEXTS]


def induction_template(theory: TheoryPresentation) -> Formula:
    phi = parse_formula(INDUCTION_TEMPLATE_TEXT, theory.signature)
    if not theory.recognize(Forall(single_free_variable(phi), phi)):
        raise ValueError(f"{theory.name} has no induction schema covering {INDUCTION_TEMPLATE_TEXT}")
    return phi


def truth_corpus(theory: TheoryPresentation, size: int = 20, seed: int = 0) -> List[Proof]:
    """SC[τ]-proofs of T-free sentences: inclusion plus disquotation, round trips and swaps."""
    rng = random.Random(seed)
    utb = DisquotationFamily(theory)
    sc = TruthInclusionFamily(theory)
    pool = truth_pool(theory)
    induction = induction_template(theory)
    out: List[Proof] = []
    for i in range(size):
        shape = i % 4
        n = Numeral(rng.randrange(0, 25))
        if shape == 0:
            inclusion = sc.instance(induction)
            disquote = utb.instance(induction)
            code = sub(quote(induction), n)
            listed = comp(Atom(axiom_relation(theory.name), (code,)))
            instance = substitute(induction, single_free_variable(induction), n)
            out.append(by_tautology(instance, instantiate(thy(inclusion), n), listed,
                                    instantiate(thy(disquote), n)))
        elif shape == 1:
            psi = pool[rng.randrange(len(pool))]
            disquote = utb.instance(psi)
            x = disquote.var
            psi_x = substitute(psi, single_free_variable(psi), x)
            out.append(generalize(by_tautology(Implies(psi_x, psi_x), instantiate(thy(disquote), x)), x))
        elif shape == 2:
            a, b = rng.sample(pool, 2)
            at_a, at_b = instantiate(thy(utb.instance(a)), n), instantiate(thy(utb.instance(b)), n)
            left = substitute(a, single_free_variable(a), n)
            right = substitute(b, single_free_variable(b), n)
            out.append(by_tautology(Implies(And(left, right), And(right, left)), at_a, at_b))
        else:
            phi = pool[2]
            inclusion = sc.instance(phi)
            disquote = utb.instance(phi)
            x = inclusion.var
            listed = inclusion.body.left
            phi_x = substitute(phi, single_free_variable(phi), x)
            step = by_tautology(Implies(listed, phi_x), instantiate(thy(inclusion), x),
                                instantiate(thy(disquote), x))
            out.append(generalize(step, x))
    return out
