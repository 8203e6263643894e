"""
Schema generators
=================
Consistency statements, local/uniform/relativized reflection instances, the
small-reflection re-axiomatization (with the bridge from its paired form to
uniform reflection), the truth theories UTB, SC and CT over a base
presentation, and the explicit Tarski truth definition for finitely many
templates.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import List, Optional, Sequence, Tuple

from .builder import (
    by_tautology,
    exists_elimination,
    forall_under_hypothesis,
    inst_axiom,
    instantiate,
    comp,
    leibniz,
    thy,
)
from .calculus import (
    POLICY_NONE,
    AxiomFamily,
    Proof,
    SchemaDescriptor,
    TheoryPresentation,
    all_numeral_instances,
    instance_term,
    single_free_variable,
)
from .codec import CODING_SIGNATURE, axiom_relation, decode_formula, encode_formula, proof_relation, quote
from .errors import ArithmetizationError, ArityError, CodecError, SignatureError
from .interpretations import Translation, translate_formula
from .syntax import (
    TRUTH_PREDICATE,
    And,
    App,
    Atom,
    BExists,
    Eq,
    Exists,
    Forall,
    Formula,
    Implies,
    Not,
    Numeral,
    Term,
    Var,
    all_variables,
    alpha_equal,
    check_formula,
    disj,
    free_variables,
    fresh_variable,
    iff,
    make_app,
    parse_formula,
    split_iff,
    substitute,
)

logger = logging.getLogger("refleqt.generators")

FALSUM = Eq(Numeral(0), Numeral(1))

FST_AXIOM_TEXT = "(all p (all x (= (fst (pair p x)) p)))"
SND_AXIOM_TEXT = "(all p (all x (= (snd (pair p x)) x)))"
UTB_TEMPLATE_TEXT = "(all x (iff (T (sub @P x)) (P x)))"
UTB_QUOTE = "@P"


def fst_axiom() -> Formula:
    return parse_formula(FST_AXIOM_TEXT, CODING_SIGNATURE)


def snd_axiom() -> Formula:
    return parse_formula(SND_AXIOM_TEXT, CODING_SIGNATURE)


def require_arithmetization(theory: TheoryPresentation) -> None:
    if not theory.signature.has_coding and theory.interpretation is None:
        raise ArithmetizationError(f"{theory.name} has neither a coding profile nor a base interpretation")


def proves(theory_name: str, p: Term, x: Term) -> Atom:
    return Atom(proof_relation(theory_name), (p, x))


def sub(code: Term, t: Term) -> Term:
    return make_app("sub", (code, t))


def _fresh(base: str, avoid: Sequence[Formula], also: Sequence[Var] = ()) -> Var:
    taken = set(also)
    for f in avoid:
        taken |= all_variables(f)
    if Var(base) not in taken:
        return Var(base)
    return fresh_variable(Var(base), taken)


# ==========================================
# Consistency and reflection
# ==========================================


def gen_consistency(theory: TheoryPresentation, bound: Optional[int] = None) -> Formula:
    """¬∃p Proof(p, ⌜0=1⌝), or the version bounded by the numeral of ``bound``."""
    require_arithmetization(theory)
    p = Var("p")
    claim = proves(theory.name, p, quote(FALSUM))
    if bound is None:
        return Not(Exists(p, claim))
    if bound < 0:
        raise ValueError("consistency bound must be a natural number")
    return Not(BExists(p, Numeral(bound), claim))


class ReflectionTag(str, Enum):
    CON = "Con"
    CON_RESTRICTED = "Con-restricted"
    LOCAL = "Rfn"
    UNIFORM = "RFN"
    RELATIVIZED = "RFN-N"


@dataclass(frozen=True)
class ReflectionKind:
    tag: ReflectionTag
    bound: Optional[int] = None
    translation: Optional[Translation] = None

    def __post_init__(self) -> None:
        if self.tag is ReflectionTag.CON_RESTRICTED and self.bound is None:
            raise ValueError("restricted consistency needs a bound")
        if self.tag is ReflectionTag.RELATIVIZED:
            if self.translation is None or not self.translation.source.has_arithmetic:
                raise ValueError("relativized reflection needs a translation from the arithmetic profile")


CON = ReflectionKind(ReflectionTag.CON)
RFN_LOCAL = ReflectionKind(ReflectionTag.LOCAL)
RFN = ReflectionKind(ReflectionTag.UNIFORM)


def rfn_n(translation: Translation) -> ReflectionKind:
    return ReflectionKind(ReflectionTag.RELATIVIZED, translation=translation)


def relativized_formula(translation: Optional[Translation], phi: Formula) -> Formula:
    """φ read through N, or φ itself without a translation."""
    return phi if translation is None else translate_formula(translation, phi)


def gen_reflection_instance(kind: ReflectionKind, theory: TheoryPresentation,
                            phi: Optional[Formula] = None) -> Formula:
    require_arithmetization(theory)
    if kind.tag is ReflectionTag.CON:
        return gen_consistency(theory)
    if kind.tag is ReflectionTag.CON_RESTRICTED:
        return gen_consistency(theory, kind.bound)
    if phi is None:
        raise ArityError(f"{kind.tag.value} needs a formula")
    if kind.tag is ReflectionTag.LOCAL:
        if free_variables(phi):
            raise ArityError("local reflection needs a sentence")
        p = _fresh("p", [phi])
        return Implies(Exists(p, proves(theory.name, p, quote(phi))), phi)
    translation = kind.translation if kind.tag is ReflectionTag.RELATIVIZED else None
    target = relativized_formula(translation, phi)
    v = single_free_variable(target)
    code = quote(target)
    x = _fresh("x", [target])
    p = _fresh("p", [target], [x])
    claim: Formula = proves(theory.name, p, sub(code, x))
    guarded = translation is not None and translation.domain is not None
    if guarded:
        claim = And(translation.delta(p), claim)
    body: Formula = Implies(Exists(p, claim), substitute(target, v, x))
    if guarded:
        body = Implies(translation.delta(x), body)
    return Forall(x, body)


def rfn_from_uniform(theory: TheoryPresentation, phi: Formula, n: int) -> Proof:
    """A proof of RFN(φ) -> Rfn(φ(n̄)): instantiate, then read the code of φ(n̄) off a computation."""
    uniform = gen_reflection_instance(RFN, theory, phi)
    v = single_free_variable(phi)
    instance = substitute(phi, v, Numeral(n))
    local = gen_reflection_instance(RFN_LOCAL, theory, instance)
    step = inst_axiom(uniform, Numeral(n))
    hypothesis = step.conclusion.right.left
    p = hypothesis.var
    coded = sub(quote(phi), Numeral(n))
    equation = comp(Eq(quote(instance), coded))
    rewrite = leibniz(quote(instance), coded, Exists(p, proves(theory.name, p, quote(instance))), hypothesis)
    return by_tautology(Implies(uniform, local), step, equation, rewrite)


class ReflectionFamily(AxiomFamily):
    """Every uniform reflection instance over one presentation."""

    tag = "uniform-reflection"

    def __init__(self, over: TheoryPresentation):
        self.over = over

    def recognizes(self, s: Formula) -> bool:
        phi = reflected_formula(s, self.over)
        if phi is None:
            return False
        try:
            check_formula(phi, self.over.signature)
            return alpha_equal(gen_reflection_instance(RFN, self.over, phi), s)
        except (SignatureError, ArityError):
            return False

    def references(self) -> Sequence[TheoryPresentation]:
        return (self.over,)

    def describe(self) -> str:
        return f"RFN({self.over.name})"


def reflected_formula(s: Formula, theory: TheoryPresentation) -> Optional[Formula]:
    """The φ a uniform reflection instance over ``theory`` is about, decoded from its quote."""
    if not isinstance(s, Forall) or not isinstance(s.body, Implies):
        return None
    hypothesis = s.body.left
    if not isinstance(hypothesis, Exists) or not isinstance(hypothesis.body, Atom):
        return None
    atom = hypothesis.body
    if atom.rel != proof_relation(theory.name):
        return None
    coded = atom.args[1]
    if not (isinstance(coded, App) and coded.fn == "sub" and isinstance(coded.args[0], Numeral)):
        return None
    try:
        return decode_formula(coded.args[0].value, theory.coding_signature)
    except CodecError:
        return None


# ==========================================
# Small reflection
# ==========================================


class SmallReflectionFamily(AxiomFamily):
    """Proof_τ(n̄1, ⌜φ*(ṅ2)⌝) -> φ*(n̄2) for all n1, n2, plus the paired form θ(N̄).

    φ* is φ read through the optional translation N, whose domain then
    guards both numerals. The quoted position may carry the numeral code of
    φ*(n̄2) or the term sub(⌜φ*⌝, n̄2).
    """

    tag = "small-reflection"

    def __init__(self, theory: TheoryPresentation, phi: Formula, translation: Optional[Translation] = None):
        self.theory = theory
        self.phi = phi
        self.translation = translation
        self.target = relativized_formula(translation, phi)
        self.var = single_free_variable(self.target)
        self.code = quote(self.target)
        self.pair_var = _fresh("y", [self.target])

    def guard(self, a: Term, b: Term) -> Optional[Formula]:
        if self.translation is None or self.translation.domain is None:
            return None
        return And(self.translation.delta(a), self.translation.delta(b))

    def shape(self, a: Term, b: Term, coded: Term) -> Formula:
        body: Formula = Implies(proves(self.theory.name, a, coded), substitute(self.target, self.var, b))
        g = self.guard(a, b)
        return body if g is None else Implies(g, body)

    def instance(self, n1: int, n2: int, spliced: bool = True) -> Formula:
        """The unpaired member for (n1, n2); ``spliced`` quotes by numeral code rather than sub."""
        second = Numeral(n2)
        coded: Term = Numeral(self.instance_code(n2)) if spliced else sub(self.code, second)
        return self.shape(Numeral(n1), second, coded)

    def instance_code(self, n2: int) -> int:
        return encode_formula(substitute(self.target, self.var, Numeral(n2)))

    @cached_property
    def template(self) -> Formula:
        """θ(y): the paired template whose numeral instances are all members."""
        y = self.pair_var
        first, second = make_app("fst", (y,)), make_app("snd", (y,))
        return self.shape(first, second, sub(self.code, second))

    @cached_property
    def closure(self) -> Formula:
        return Forall(self.pair_var, self.template)

    def split(self, s: Formula):
        """(n1, n2, coded) read off an unpaired member candidate, or None."""
        inner = s
        if self.guard(Numeral(0), Numeral(0)) is not None:
            if not isinstance(inner, Implies):
                return None
            inner = inner.right
        if not (isinstance(inner, Implies) and isinstance(inner.left, Atom)
                and inner.left.rel == proof_relation(self.theory.name)):
            return None
        first, coded = inner.left.args
        if not isinstance(first, Numeral):
            return None
        if isinstance(coded, App) and coded.fn == "sub" and coded.args[0] == self.code:
            second = coded.args[1]
        else:
            second = instance_term(self.target, self.var, inner.right)
        if not isinstance(second, Numeral):
            return None
        return first.value, second.value, coded

    def recognizes(self, s: Formula) -> bool:
        parts = self.split(s)
        if parts is not None:
            n1, n2, coded = parts
            return alpha_equal(self.instance(n1, n2, spliced=isinstance(coded, Numeral)), s)
        paired = instance_term(self.template, self.pair_var, s)
        return isinstance(paired, Numeral)

    def covers_all_numerals(self, phi: Formula) -> bool:
        free = free_variables(phi)
        if len(free) != 1:
            return False
        return alpha_equal(substitute(phi, free[0], self.pair_var), self.template)

    def references(self) -> Sequence[TheoryPresentation]:
        return (self.theory,)

    def describe(self) -> str:
        via = f" through {self.translation.name}" if self.translation is not None else ""
        return f"small reflection over {self.theory.name}{via}"


def gen_small_reflection_theory(theory: TheoryPresentation, phi: Formula,
                                translation: Optional[Translation] = None,
                                name: Optional[str] = None) -> TheoryPresentation:
    require_arithmetization(theory)
    family = SmallReflectionFamily(theory, phi, translation)
    out = theory.extend(name or f"{theory.name}'", families=[family],
                        description=f"{theory.name} plus small reflection for one formula")
    logger.debug(f"Generated {out.name}: {family.describe()}")
    return out


def small_reflection_bridge(family: SmallReflectionFamily) -> Proof:
    """A proof of ∀yθ(y) -> RFN-instance, using only the pairing axioms.

    Instantiates the paired closure at pair(p, x), rewrites fst/snd away,
    then moves the proof variable into an existential and generalizes x.
    """
    kind = RFN if family.translation is None else rfn_n(family.translation)
    uniform = gen_reflection_instance(kind, family.theory, family.phi)
    closed = family.closure
    x = _fresh("x", [closed, uniform])
    p = _fresh("p", [closed, uniform], [x])
    paired = make_app("pair", (p, x))
    first, second = make_app("fst", (paired,)), make_app("snd", (paired,))

    at_pair = inst_axiom(closed, paired)
    eq_first = instantiate(thy(fst_axiom()), p, x)
    eq_second = instantiate(thy(snd_axiom()), p, x)
    theta_pair = at_pair.conclusion.right
    theta_first = family.shape(p, second, sub(family.code, second))
    theta_plain = family.shape(p, x, sub(family.code, x))
    step_first = leibniz(first, p, theta_pair, theta_first)
    step_second = leibniz(second, x, theta_first, theta_plain)
    unpaired = by_tautology(Implies(closed, theta_plain), at_pair, eq_first, eq_second, step_first, step_second)

    claim: Formula = proves(family.theory.name, p, sub(family.code, x))
    conclusion = substitute(family.target, family.var, x)
    guard_p = family.guard(p, x)
    if guard_p is None:
        witness_part, tail = claim, Implies(closed, conclusion)
    else:
        witness_part = And(guard_p.left, claim)
        tail = Implies(closed, Implies(guard_p.right, conclusion))
    rearranged = by_tautology(Implies(witness_part, tail), unpaired)
    eliminated = exists_elimination(rearranged, p)

    hypothesis = eliminated.conclusion.left
    if guard_p is None:
        body: Formula = Implies(hypothesis, conclusion)
    else:
        body = Implies(guard_p.right, Implies(hypothesis, conclusion))
    moved = by_tautology(Implies(closed, body), eliminated)
    bridge = forall_under_hypothesis(moved, x)
    if not alpha_equal(bridge.conclusion.right, uniform):
        raise ArityError("bridge conclusion does not match the reflection instance")
    return bridge


# ==========================================
# Truth theories
# ==========================================


class TruthTag(str, Enum):
    UTB = "UTB"
    SC = "SC"
    CT = "CT"


@dataclass(frozen=True)
class TruthTheoryKind:
    tag: TruthTag
    base: TheoryPresentation
    embedding: Optional[Translation] = None


def _require_truth_base(base: TheoryPresentation) -> None:
    if not base.signature.has_coding:
        raise ArithmetizationError(f"{base.name} needs the coding profile to carry a truth predicate")
    if base.signature.has_truth:
        raise ArithmetizationError(f"{base.name} already has a truth predicate")


def _relativize(base: TheoryPresentation, embedding: Optional[Translation], x: Var, body: Formula) -> Formula:
    translation = embedding if embedding is not None else base.interpretation
    if isinstance(translation, Translation) and translation.domain is not None:
        return Forall(x, Implies(translation.delta(x), body))
    return Forall(x, body)


def truth(t: Term) -> Atom:
    return Atom(TRUTH_PREDICATE, (t,))


def utb_schema(embedding: Optional[Translation] = None) -> SchemaDescriptor:
    sig = CODING_SIGNATURE
    template = parse_formula(UTB_TEMPLATE_TEXT, sig, extra_relations={"P": 1}, extra_constants=[UTB_QUOTE])
    if embedding is not None and embedding.domain is not None:
        template = Forall(template.var, Implies(embedding.delta(template.var), template.body))
    return SchemaDescriptor("UTB", template, placeholder="P", arity=1, policy=POLICY_NONE, quote=UTB_QUOTE)


class DisquotationFamily(AxiomFamily):
    """UTB instances ∀x(T(sub(⌜ψ⌝, x)) <-> ψ(x)) for T-free ψ of the base language."""

    tag = "utb"

    def __init__(self, base: TheoryPresentation, embedding: Optional[Translation] = None):
        self.base = base
        self.schema = utb_schema(embedding)
        self.signature = base.signature.with_truth()

    def formula_of(self, s: Formula) -> Optional[Formula]:
        psi = self.schema.find(s, self.signature)
        if psi is None or len(free_variables(psi)) != 1:
            return None
        try:
            check_formula(psi, self.base.signature)
        except SignatureError:
            return None
        return psi

    def recognizes(self, s: Formula) -> bool:
        return self.formula_of(s) is not None

    def instance(self, psi: Formula) -> Formula:
        single_free_variable(psi)
        return self.schema.instance(psi, free_variables(psi))

    def describe(self) -> str:
        return f"UTB over {self.base.name}"


def utb_instance(psi: Formula, embedding: Optional[Translation] = None) -> Formula:
    single_free_variable(psi)
    return utb_schema(embedding).instance(psi, free_variables(psi))


class TruthInclusionFamily(AxiomFamily):
    """∀x(Ax_τ(sub(⌜φ⌝, x)) -> T(sub(⌜φ⌝, x))) for every axiom template φ of τ."""

    tag = "sc"

    def __init__(self, base: TheoryPresentation, embedding: Optional[Translation] = None):
        self.base = base
        self.embedding = embedding

    def instance(self, phi: Formula) -> Formula:
        single_free_variable(phi)
        code = quote(phi)
        x = Var("x")
        body = Implies(Atom(axiom_relation(self.base.name), (sub(code, x),)), truth(sub(code, x)))
        return _relativize(self.base, self.embedding, x, body)

    def template_of(self, s: Formula) -> Optional[Formula]:
        body = s.body if isinstance(s, Forall) else None
        while isinstance(body, Implies) and not (isinstance(body.left, Atom)
                                                  and body.left.rel == axiom_relation(self.base.name)):
            body = body.right
        if not (isinstance(body, Implies) and isinstance(body.left, Atom)):
            return None
        coded = body.left.args[0]
        if not (isinstance(coded, App) and coded.fn == "sub" and isinstance(coded.args[0], Numeral)):
            return None
        try:
            return decode_formula(coded.args[0].value, self.base.coding_signature)
        except CodecError:
            return None

    def admits(self, phi: Formula) -> bool:
        free = free_variables(phi)
        if len(free) != 1:
            return False
        try:
            check_formula(phi, self.base.signature)
        except SignatureError:
            return False
        return self.base.recognize(Forall(free[0], phi)) or all_numeral_instances(self.base, phi)

    def recognizes(self, s: Formula) -> bool:
        phi = self.template_of(s)
        return phi is not None and self.admits(phi) and alpha_equal(self.instance(phi), s)

    def references(self) -> Sequence[TheoryPresentation]:
        return (self.base,)

    def describe(self) -> str:
        return f"{self.base.name} ⊆ T"


CT_CLAUSES = ("not", "and", "all")


def _argument_vars(names: Tuple[str, str], arity: int) -> List[Var]:
    if arity <= 2:
        return [Var(name) for name in names[:arity]]
    return [Var(names[0], i + 1) for i in range(arity)]


def ctp_axioms(base: TheoryPresentation) -> List[Formula]:
    """T(⌜R(u⃗)⌝[x⃗]) <-> R(x⃗) for equality and every relation of the base.

    A nullary R gets the plain T(⌜R⌝) <-> R. Otherwise ``sub2`` fills the
    first two argument places and each further one is filled by ``sub``.
    """
    primitives: List[Formula] = [Eq(Var("u"), Var("w"))]
    for symbol, arity in base.signature.relation_symbols():
        primitives.append(Atom(symbol, tuple(_argument_vars(("u", "w"), arity))))
    out: List[Formula] = []
    for atom in primitives:
        params = free_variables(atom)
        code = quote(atom)
        if not params:
            out.append(iff(truth(code), atom))
            continue
        bound = _argument_vars(("x", "y"), len(params))
        coded = sub(code, bound[0]) if len(bound) == 1 else make_app("sub2", (code, bound[0], bound[1]))
        for v in bound[2:]:
            coded = sub(coded, v)
        plain = atom
        for u, x in zip(params, bound):
            plain = substitute(plain, u, x)
        clause = iff(truth(coded), plain)
        for x in reversed(bound):
            clause = Forall(x, clause)
        out.append(clause)
    return out


def ct_instance(clause: str, phi: Formula, psi: Optional[Formula] = None) -> Formula:
    """The compositional axiom for one clause at the given coded formulas."""
    if clause == "not":
        free = free_variables(phi)
        if not free:
            return iff(truth(quote(Not(phi))), Not(truth(quote(phi))))
        single_free_variable(phi)
        x = Var("x")
        return Forall(x, iff(truth(sub(quote(Not(phi)), x)), Not(truth(sub(quote(phi), x)))))
    if clause == "and":
        if psi is None or free_variables(phi) or free_variables(psi):
            raise ArityError("the conjunction clause takes two sentences")
        return iff(truth(quote(And(phi, psi))), And(truth(quote(phi)), truth(quote(psi))))
    if clause == "all":
        if not isinstance(phi, Forall) or free_variables(phi):
            raise ArityError("the universal clause takes a universal sentence")
        x = Var("x")
        return iff(truth(quote(phi)), Forall(x, truth(sub(quote(phi.body), x))))
    raise ValueError(f"unknown compositional clause {clause}")


class CompositionalFamily(AxiomFamily):
    """One compositional clause, indexed by coded T-free formulas of the base."""

    def __init__(self, base: TheoryPresentation, clause: str):
        if clause not in CT_CLAUSES:
            raise ValueError(f"unknown compositional clause {clause}")
        self.base = base
        self.clause = clause
        self.tag = f"ct-{clause}"

    def _decode(self, t: Term) -> Optional[Formula]:
        if isinstance(t, App) and t.fn == "sub":
            t = t.args[0]
        if not isinstance(t, Numeral):
            return None
        try:
            f = decode_formula(t.value, self.base.coding_signature)
            check_formula(f, self.base.signature)
        except (CodecError, SignatureError):
            return None
        return f

    def recognizes(self, s: Formula) -> bool:
        body = s.body if isinstance(s, Forall) else s
        sides = split_iff(body)
        if sides is None or not isinstance(sides[0], Atom) or sides[0].rel != TRUTH_PREDICATE:
            return False
        coded = self._decode(sides[0].args[0])
        if coded is None:
            return False
        try:
            if self.clause == "not" and isinstance(coded, Not):
                expected = ct_instance("not", coded.body)
            elif self.clause == "and" and isinstance(coded, And):
                expected = ct_instance("and", coded.left, coded.right)
            elif self.clause == "all" and isinstance(coded, Forall):
                expected = ct_instance("all", coded)
            else:
                return False
        except ArityError:
            return False
        return alpha_equal(expected, s)

    def describe(self) -> str:
        return f"CT {self.clause} over {self.base.name}"


def gen_utb(base: TheoryPresentation, embedding: Optional[Translation] = None) -> TheoryPresentation:
    _require_truth_base(base)
    return base.extend(f"UTB[{base.name}]", families=[DisquotationFamily(base, embedding)],
                       signature=base.signature.with_truth(), description="uniform disquotation")


def gen_sc(base: TheoryPresentation, embedding: Optional[Translation] = None) -> TheoryPresentation:
    utb = gen_utb(base, embedding)
    return utb.extend(f"SC[{base.name}]", families=[TruthInclusionFamily(base, embedding)],
                      description="disquotation plus truth of the base axioms")


def gen_ct(base: TheoryPresentation) -> TheoryPresentation:
    _require_truth_base(base)
    families = [CompositionalFamily(base, clause) for clause in CT_CLAUSES]
    return base.extend(f"CT[{base.name}]", axioms=ctp_axioms(base), families=families,
                       signature=base.signature.with_truth(), description="compositional truth")


def gen_truth_theory(kind: TruthTheoryKind) -> TheoryPresentation:
    if kind.tag is TruthTag.UTB:
        return gen_utb(kind.base, kind.embedding)
    if kind.tag is TruthTag.SC:
        return gen_sc(kind.base, kind.embedding)
    return gen_ct(kind.base)


def tarski_truth_definition(psis: Sequence[Formula], var: Var = Var("z"),
                            bound: Optional[Var] = None) -> Formula:
    """𝔗(z): the disjunction over i of ∃y(z = sub(⌜ψi⌝, y) ∧ ψi(y))."""
    if not psis:
        raise ValueError("a truth definition needs at least one template")
    y = bound or _fresh("y", list(psis), [var])
    disjuncts = []
    for psi in psis:
        v = single_free_variable(psi)
        disjuncts.append(Exists(y, And(Eq(var, sub(quote(psi), y)), substitute(psi, v, y))))
    return disj(disjuncts)
