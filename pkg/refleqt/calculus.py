"""
Proof calculus
==============
Hilbert-style derivations (modus ponens and generalization over a fixed set of
logical axiom schemes), decidable theory presentations, and the proof checker.

Leaves of a proof are logical axioms, theory axioms (recognized by the target
presentation), computation axioms (closed decidable sentences that evaluate to
true) or obligations, which never check until discharged.
"""

from __future__ import annotations

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, Iterator, List, Mapping, Optional, Sequence, Set, Tuple, Union

from . import config
from .codec import CODING_SIGNATURE, CODING_TABLE, SCHEME_NAMES, decode_formula, encode_formula
from .errors import (
    ArityError,
    CodecError,
    OutOfFragmentError,
    ParseError,
    SignatureError,
    UnknownSymbolError,
)
from .evaluation import eval_closed_decidable
from .syntax import (
    And,
    App,
    Atom,
    BExists,
    BForall,
    Const,
    Eq,
    Exists,
    Forall,
    Formula,
    FormulaParser,
    Implies,
    Not,
    Numeral,
    Or,
    SAtom,
    Signature,
    SList,
    Term,
    Var,
    alpha_equal,
    alpha_key,
    check_formula,
    formula_tokens,
    free_variables,
    join_tokens,
    read_sexpr,
    rename_binders,
    rename_free,
    replace_atoms,
    replace_constant,
    split_iff,
    strip_foralls,
    substitute,
    term_variables,
)

logger = logging.getLogger("refleqt.calculus")

RULE_AXIOM = "axiom"
RULE_THEORY = "thy"
RULE_COMPUTATION = "comp"
RULE_OBLIGATION = "obl"
RULE_MP = "mp"
RULE_GEN = "gen"
LEAF_RULES = (RULE_AXIOM, RULE_THEORY, RULE_COMPUTATION, RULE_OBLIGATION)

# ==========================================
# Proofs
# ==========================================


@dataclass(frozen=True)
class Proof:
    """One node of a derivation tree; ``conclusion`` is what the node proves.

    ``mp`` nodes list the antecedent proof first and the implication second;
    ``gen`` nodes carry the generalized variable in ``var``.
    """

    rule: str
    conclusion: Formula
    premises: Tuple["Proof", ...] = ()
    scheme: Optional[str] = None
    var: Optional[Var] = None

    def nodes(self) -> Iterator[Tuple[Tuple[int, ...], "Proof"]]:
        """Preorder walk yielding (path, node) without recursion."""
        stack: List[Tuple[Tuple[int, ...], Proof]] = [((), self)]
        while stack:
            path, node = stack.pop()
            yield path, node
            for i in reversed(range(len(node.premises))):
                stack.append((path + (i,), node.premises[i]))

    def leaves(self) -> Iterator["Proof"]:
        for _, node in self.nodes():
            if not node.premises:
                yield node

    @property
    def node_count(self) -> int:
        return sum(1 for _ in self.nodes())


def axiom_leaf(scheme: str, f: Formula) -> Proof:
    return Proof(RULE_AXIOM, f, scheme=scheme)


def theory_leaf(f: Formula) -> Proof:
    return Proof(RULE_THEORY, f)


def computation_leaf(f: Formula) -> Proof:
    return Proof(RULE_COMPUTATION, f)


def obligation_leaf(f: Formula) -> Proof:
    return Proof(RULE_OBLIGATION, f)


def mp_node(f: Formula, antecedent: Proof, implication: Proof) -> Proof:
    return Proof(RULE_MP, f, (antecedent, implication))


def gen_node(f: Formula, var: Var, premise: Proof) -> Proof:
    return Proof(RULE_GEN, f, (premise,), var=var)


@dataclass(frozen=True)
class FailingStep:
    path: Tuple[int, ...]
    rule: str
    reason: str

    def __str__(self) -> str:
        where = "root" if not self.path else "root/" + "/".join(str(i) for i in self.path)
        return f"{where} ({self.rule}): {self.reason}"


@dataclass(frozen=True)
class Verdict:
    accepted: bool
    failing_step: Optional[FailingStep] = None

    def describe(self) -> str:
        if self.accepted:
            return "accepted"
        return f"rejected at {self.failing_step}"


ACCEPTED = Verdict(True)


# ==========================================
# Proof text and codes
# ==========================================


def proof_tokens(p: Proof) -> Iterator[str]:
    stack: List[Union[str, Proof]] = [p]
    while stack:
        item = stack.pop()
        if isinstance(item, str):
            yield item
            continue
        yield "("
        yield item.rule
        if item.rule == RULE_AXIOM:
            yield item.scheme or ""
        yield from formula_tokens(item.conclusion)
        if item.rule == RULE_GEN:
            yield str(item.var)
        stack.append(")")
        stack.extend(reversed(item.premises))


def print_proof(p: Proof) -> str:
    return join_tokens(proof_tokens(p))


def encode_proof(p: Proof) -> int:
    return CODING_TABLE.encode_tokens(proof_tokens(p))


def proof_size(p: Proof) -> int:
    """Bit-length of the proof's canonical code."""
    return encode_proof(p).bit_length()


def parse_proof(text: str, sig: Signature) -> Proof:
    node = read_sexpr(text)
    return _proof_from_sexpr(node, FormulaParser(sig, text))


def _proof_from_sexpr(node, parser: FormulaParser) -> Proof:
    if not isinstance(node, SList) or not node.items or not isinstance(node.items[0], SAtom):
        raise parser.fail(UnknownSymbolError, "expected a proof step", node.pos)
    label, rest = node.items[0].text, node.items[1:]

    def expect(count: int) -> None:
        if len(rest) != count:
            raise parser.fail(ArityError, f"{label} step expects {count} arguments, got {len(rest)}", node.pos)

    if label == RULE_AXIOM:
        expect(2)
        if not isinstance(rest[0], SAtom) or rest[0].text not in SCHEME_NAMES:
            raise parser.fail(UnknownSymbolError, "unknown logical axiom scheme", rest[0].pos)
        return axiom_leaf(rest[0].text, parser.formula(rest[1]))
    if label in (RULE_THEORY, RULE_COMPUTATION, RULE_OBLIGATION):
        expect(1)
        return Proof(label, parser.formula(rest[0]))
    if label == RULE_MP:
        expect(3)
        return mp_node(parser.formula(rest[0]), _proof_from_sexpr(rest[1], parser),
                       _proof_from_sexpr(rest[2], parser))
    if label == RULE_GEN:
        expect(3)
        return gen_node(parser.formula(rest[0]), parser.variable(rest[1]), _proof_from_sexpr(rest[2], parser))
    raise parser.fail(UnknownSymbolError, f"unknown proof step label {label}", node.pos)


def decode_proof(code: int, sig: Optional[Signature] = None) -> Proof:
    tokens = CODING_TABLE.decode_tokens(code)
    try:
        return parse_proof(join_tokens(tokens), sig or CODING_SIGNATURE)
    except ParseError as exc:
        raise CodecError(f"code {code} does not decode to a proof: {exc}") from exc


# ==========================================
# Logical axiom schemes
# ==========================================

_MISMATCH = object()


def propositional_skeleton(f: Formula, atoms: Dict[tuple, int]) -> tuple:
    if isinstance(f, Not):
        return ("not", propositional_skeleton(f.body, atoms))
    if isinstance(f, (And, Or, Implies)):
        return (type(f).__name__, propositional_skeleton(f.left, atoms), propositional_skeleton(f.right, atoms))
    key = alpha_key(f)
    if key not in atoms:
        atoms[key] = len(atoms)
    return ("atom", atoms[key])


def _partial_value(node: tuple, assignment: Mapping[int, bool]) -> Optional[bool]:
    op = node[0]
    if op == "atom":
        return assignment.get(node[1])
    if op == "not":
        v = _partial_value(node[1], assignment)
        return None if v is None else not v
    left, right = _partial_value(node[1], assignment), _partial_value(node[2], assignment)
    if op == "And":
        if left is False or right is False:
            return False
        return True if left and right else None
    if op == "Or":
        if left is True or right is True:
            return True
        return False if left is False and right is False else None
    if left is False or right is True:
        return True
    return False if left is True and right is False else None


def _unassigned(node: tuple, assignment: Mapping[int, bool]) -> Optional[int]:
    stack = [node]
    while stack:
        n = stack.pop()
        if n[0] == "atom":
            if n[1] not in assignment:
                return n[1]
        else:
            stack.extend(reversed(n[1:]))
    return None


def is_tautology(f: Formula, atom_limit: Optional[int] = None) -> bool:
    """Propositional validity, atoms identified up to alpha-equivalence.

    Formulas whose skeleton has more atoms than the configured limit are
    treated as non-tautologies.
    """
    atoms: Dict[tuple, int] = {}
    skeleton = propositional_skeleton(f, atoms)
    limit = config.tautology_atom_limit() if atom_limit is None else atom_limit
    if len(atoms) > limit:
        logger.warning(f"Tautology check skipped: {len(atoms)} atoms exceed the limit of {limit}")
        return False
    pending: List[Dict[int, bool]] = [{}]
    while pending:
        assignment = pending.pop()
        value = _partial_value(skeleton, assignment)
        if value is True:
            continue
        if value is False:
            return False
        atom = _unassigned(skeleton, assignment)
        if atom is None:
            return False
        pending.append({**assignment, atom: False})
        pending.append({**assignment, atom: True})
    return True


def _walk_term(a: Term, b: Term, var: Var, env_a: Mapping[Var, int], env_b: Mapping[Var, int]):
    if a == var and var not in env_a:
        if any(v in env_b for v in term_variables(b)):
            return _MISMATCH
        return b
    if isinstance(a, App) and isinstance(b, App) and a.fn == b.fn and len(a.args) == len(b.args):
        for x, y in zip(a.args, b.args):
            found = _walk_term(x, y, var, env_a, env_b)
            if found is not None:
                return found
    return None


def _walk_formula(a: Formula, b: Formula, var: Var, env_a: Dict[Var, int], env_b: Dict[Var, int], depth: int):
    if type(a) is not type(b):
        return None
    if isinstance(a, Atom):
        if a.rel != b.rel or len(a.args) != len(b.args):
            return None
        pairs = list(zip(a.args, b.args))
    elif isinstance(a, Eq):
        pairs = [(a.left, b.left), (a.right, b.right)]
    elif isinstance(a, Not):
        return _walk_formula(a.body, b.body, var, env_a, env_b, depth)
    elif isinstance(a, (And, Or, Implies)):
        found = _walk_formula(a.left, b.left, var, env_a, env_b, depth)
        if found is not None:
            return found
        return _walk_formula(a.right, b.right, var, env_a, env_b, depth)
    else:
        if isinstance(a, (BForall, BExists)):
            found = _walk_term(a.bound, b.bound, var, env_a, env_b)
            if found is not None:
                return found
        if a.var == var:
            return None
        inner_a, inner_b = dict(env_a), dict(env_b)
        inner_a[a.var] = depth
        inner_b[b.var] = depth
        return _walk_formula(a.body, b.body, var, inner_a, inner_b, depth + 1)
    for x, y in pairs:
        found = _walk_term(x, y, var, env_a, env_b)
        if found is not None:
            return found
    return None


def instance_term(body: Formula, var: Var, target: Formula) -> Optional[Term]:
    """A term t with body[var := t] alpha-equal to target, if one exists."""
    if var not in free_variables(body):
        return var if alpha_equal(body, target) else None
    found = _walk_formula(body, target, var, {}, {}, 0)
    if found is None or found is _MISMATCH:
        return None
    return found if alpha_equal(substitute(body, var, found), target) else None


def _terms_match(x: Term, y: Term, env_a: Mapping[Var, int], env_b: Mapping[Var, int]) -> bool:
    if isinstance(x, Var) and isinstance(y, Var):
        if x in env_a or y in env_b:
            return env_a.get(x) == env_b.get(y)
        return x == y
    if isinstance(x, App) and isinstance(y, App):
        return (x.fn == y.fn and len(x.args) == len(y.args)
                and all(_terms_match(a, b, env_a, env_b) for a, b in zip(x.args, y.args)))
    return x == y


def _replaceable(x: Term, y: Term, s: Term, t: Term, env_a: Mapping[Var, int], env_b: Mapping[Var, int]) -> bool:
    if _terms_match(x, y, env_a, env_b):
        return True
    if (x == s and y == t and not any(v in env_a for v in term_variables(s))
            and not any(v in env_b for v in term_variables(t))):
        return True
    if isinstance(x, App) and isinstance(y, App) and x.fn == y.fn and len(x.args) == len(y.args):
        return all(_replaceable(a, b, s, t, env_a, env_b) for a, b in zip(x.args, y.args))
    return False


def _leibniz_formula(a: Formula, b: Formula, s: Term, t: Term, env_a: Dict[Var, int],
                     env_b: Dict[Var, int], depth: int) -> bool:
    if type(a) is not type(b):
        return False
    if isinstance(a, Atom):
        return (a.rel == b.rel and len(a.args) == len(b.args)
                and all(_replaceable(x, y, s, t, env_a, env_b) for x, y in zip(a.args, b.args)))
    if isinstance(a, Eq):
        return (_replaceable(a.left, b.left, s, t, env_a, env_b)
                and _replaceable(a.right, b.right, s, t, env_a, env_b))
    if isinstance(a, Not):
        return _leibniz_formula(a.body, b.body, s, t, env_a, env_b, depth)
    if isinstance(a, (And, Or, Implies)):
        return (_leibniz_formula(a.left, b.left, s, t, env_a, env_b, depth)
                and _leibniz_formula(a.right, b.right, s, t, env_a, env_b, depth))
    if isinstance(a, (BForall, BExists)) and not _replaceable(a.bound, b.bound, s, t, env_a, env_b):
        return False
    inner_a, inner_b = dict(env_a), dict(env_b)
    inner_a[a.var] = depth
    inner_b[b.var] = depth
    return _leibniz_formula(a.body, b.body, s, t, inner_a, inner_b, depth + 1)


def match_logical_axiom(scheme: str, f: Formula) -> Optional[str]:
    """None when ``f`` is an instance of ``scheme``, else the reason it is not."""
    if scheme == "taut":
        return None if is_tautology(f) else "not a propositional tautology"
    if scheme == "refl":
        return None if isinstance(f, Eq) and f.left == f.right else "not of the form t = t"
    if scheme in ("ball", "bex"):
        sides = split_iff(f)
        if sides is None:
            return "not a biconditional"
        bounded, unfolded = sides
        want = BForall if scheme == "ball" else BExists
        if not isinstance(bounded, want):
            return f"left side is not a bounded {'universal' if scheme == 'ball' else 'existential'}"
        if bounded.var in term_variables(bounded.bound):
            return "quantified variable occurs in its own bound"
        guard = Atom("<=", (bounded.var, bounded.bound))
        if scheme == "ball":
            expected: Formula = Forall(bounded.var, Implies(guard, bounded.body))
        else:
            expected = Exists(bounded.var, And(guard, bounded.body))
        return None if alpha_equal(unfolded, expected) else "right side is not the unfolded quantifier"
    if not isinstance(f, Implies):
        return "not an implication"
    left, right = f.left, f.right
    if scheme == "inst":
        if not isinstance(left, Forall):
            return "antecedent is not universal"
        return None if instance_term(left.body, left.var, right) is not None else "consequent is not an instance"
    if scheme == "exi":
        if not isinstance(right, Exists):
            return "consequent is not existential"
        return None if instance_term(right.body, right.var, left) is not None else "antecedent is not an instance"
    if scheme == "all-dist":
        if not (isinstance(left, Forall) and isinstance(left.body, Implies) and isinstance(right, Implies)):
            return "not of the form (all x (A -> B)) -> (A -> all x B)"
        a, b = left.body.left, left.body.right
        if left.var in free_variables(a):
            return "quantified variable free in the antecedent"
        if alpha_equal(right.left, a) and alpha_equal(right.right, Forall(left.var, b)):
            return None
        return "does not distribute the quantifier"
    if scheme == "ex-elim":
        if not (isinstance(left, Forall) and isinstance(left.body, Implies) and isinstance(right, Implies)):
            return "not of the form (all x (A -> B)) -> ((ex x A) -> B)"
        a, b = left.body.left, left.body.right
        if left.var in free_variables(b):
            return "quantified variable free in the conclusion"
        if alpha_equal(right.left, Exists(left.var, a)) and alpha_equal(right.right, b):
            return None
        return "does not eliminate the existential"
    if scheme == "leibniz":
        if not (isinstance(left, Eq) and isinstance(right, Implies)):
            return "not of the form s = t -> (A -> B)"
        if _leibniz_formula(right.left, right.right, left.left, left.right, {}, {}, 0):
            return None
        return "consequent is not a replacement instance"
    return f"unknown scheme {scheme}"


# ==========================================
# Schemata and families
# ==========================================

POLICY_CLOSURE = "closure"
POLICY_NONE = "none"


@dataclass(frozen=True)
class SchemaDescriptor:
    """A template with a placeholder relation standing for a formula ψ.

    ``quote`` names a constant that stands for the code of ψ (used by
    disquotational schemata). Under the ``closure`` policy ψ may carry
    parameters, closed off by leading universal quantifiers.
    """

    name: str
    template: Formula
    placeholder: str = "P"
    arity: int = 1
    policy: str = POLICY_CLOSURE
    quote: Optional[str] = None

    def instantiate(self, psi: Formula, params: Sequence[Var]) -> Formula:
        """Replace every placeholder atom P(t...) by psi[params := t...]."""
        extra = set(free_variables(psi)) - set(params)
        template = rename_binders(self.template, extra | set(params))

        def build(args: Tuple[Term, ...]) -> Formula:
            return rename_free(psi, dict(zip(params, args)))

        out = replace_atoms(template, self.placeholder, build)
        if self.quote is not None:
            out = replace_constant(out, self.quote, Numeral(encode_formula(psi)))
        return out

    def instance(self, psi: Formula, params: Sequence[Var]) -> Formula:
        """The closed schema axiom for psi (universal closure over extra parameters)."""
        body = self.instantiate(psi, params)
        for v in reversed([v for v in free_variables(body) if v not in params]):
            body = Forall(v, body)
        return body

    def _candidates(self, template: Formula, cand: Formula, sig: Signature) -> Iterator[Tuple[Formula, List[Var]]]:
        found: List[Tuple[Formula, List[Var]]] = []
        _collect_psi(template, cand, self, sig, {}, {}, {}, 0, found)
        yield from found

    def find(self, s: Formula, sig: Signature, allow_free: bool = False) -> Optional[Formula]:
        """The ψ for which ``s`` is an instance, or None."""
        prefix, _ = strip_foralls(s)
        depths = range(len(prefix) + 1) if self.policy == POLICY_CLOSURE else range(1)
        for k in depths:
            _, body = strip_foralls(s, k)
            for psi, params in self._candidates(self.template, body, sig):
                extra = [v for v in free_variables(psi) if v not in params]
                if self.policy == POLICY_NONE and extra and not allow_free:
                    continue
                if alpha_equal(self.instantiate(psi, params), body):
                    return psi
        return None

    def matches(self, s: Formula, sig: Signature, allow_free: bool = False) -> bool:
        return self.find(s, sig, allow_free) is not None


def _collect_psi(t: Formula, c: Formula, schema: SchemaDescriptor, sig: Signature, env_t: Dict[Var, int],
                 env_c: Dict[Var, int], depth_c: Dict[int, Var], depth: int,
                 out: List[Tuple[Formula, List[Var]]]) -> None:
    """Collect candidate ψs from placeholder and quote positions of the template."""
    if isinstance(t, Atom) and t.rel == schema.placeholder:
        args = t.args
        if all(isinstance(a, Var) and a in env_t for a in args) and len(set(args)) == len(args):
            targets = [depth_c[env_t[a]] for a in args]
            params = [Var("_ph", i + 1) for i in range(len(targets))]
            psi = rename_binders(c, set(params))
            psi = rename_free(psi, dict(zip(targets, params))) if targets else psi
            out.append((psi, params))
        return
    if type(t) is not type(c):
        return
    if isinstance(t, (Atom, Eq)):
        t_terms = t.args if isinstance(t, Atom) else (t.left, t.right)
        c_terms = c.args if isinstance(c, Atom) else (c.left, c.right)
        if len(t_terms) != len(c_terms):
            return
        if schema.quote is not None:
            for a, b in zip(t_terms, c_terms):
                _collect_quoted(a, b, schema, sig, out)
        return
    if isinstance(t, Not):
        _collect_psi(t.body, c.body, schema, sig, env_t, env_c, depth_c, depth, out)
        return
    if isinstance(t, (And, Or, Implies)):
        _collect_psi(t.left, c.left, schema, sig, env_t, env_c, depth_c, depth, out)
        _collect_psi(t.right, c.right, schema, sig, env_t, env_c, depth_c, depth, out)
        return
    inner_t, inner_c, inner_d = dict(env_t), dict(env_c), dict(depth_c)
    inner_t[t.var] = depth
    inner_c[c.var] = depth
    inner_d[depth] = c.var
    _collect_psi(t.body, c.body, schema, sig, inner_t, inner_c, inner_d, depth + 1, out)


def _collect_quoted(a: Term, b: Term, schema: SchemaDescriptor, sig: Signature,
                    out: List[Tuple[Formula, List[Var]]]) -> None:
    if isinstance(a, Const) and a.name == schema.quote:
        if isinstance(b, Numeral):
            try:
                psi = decode_formula(b.value, CODING_SIGNATURE.union(sig))
            except (CodecError, SignatureError):
                return
            free = free_variables(psi)
            if len(free) >= schema.arity:
                out.append((psi, free[:schema.arity]))
        return
    if isinstance(a, App) and isinstance(b, App) and a.fn == b.fn and len(a.args) == len(b.args):
        for x, y in zip(a.args, b.args):
            _collect_quoted(x, y, schema, sig, out)


class AxiomFamily(ABC):
    """A generated, decidable family of axioms attached to a presentation."""

    tag: str = "family"

    @abstractmethod
    def recognizes(self, s: Formula) -> bool:
        """Decide membership of a closed sentence."""

    def covers_all_numerals(self, phi: Formula) -> bool:
        """Whether every numeral instance of the one-variable ``phi`` is a member."""
        return False

    def references(self) -> Sequence["TheoryPresentation"]:
        return ()

    def resolve(self, name: str) -> Optional["TheoryPresentation"]:
        for ref in self.references():
            found = ref.resolve(name)
            if found is not None:
                return found
        return None

    @abstractmethod
    def describe(self) -> str:
        """One-line human description."""


def single_free_variable(phi: Formula) -> Var:
    free = free_variables(phi)
    if len(free) != 1:
        raise ArityError(f"expected exactly one free variable, found {len(free)}")
    return free[0]


class NumeralInstanceFamily(AxiomFamily):
    """φ(n̄) for every n in one residue class."""

    tag = "numeral-instances"

    def __init__(self, template: Formula, modulus: int = 1, residue: int = 0):
        self.template = template
        self.var = single_free_variable(template)
        self.modulus = modulus
        self.residue = residue % modulus

    def recognizes(self, s: Formula) -> bool:
        t = instance_term(self.template, self.var, s)
        return isinstance(t, Numeral) and t.value % self.modulus == self.residue

    def covers_all_numerals(self, phi: Formula) -> bool:
        free = free_variables(phi)
        if self.modulus != 1 or len(free) != 1:
            return False
        return alpha_equal(substitute(phi, free[0], self.var), self.template)

    def describe(self) -> str:
        return f"numeral instances (n = {self.residue} mod {self.modulus})"


# ==========================================
# Presentations
# ==========================================


@dataclass(frozen=True, eq=False)
class TheoryPresentation:
    """A decidable axiom recognizer over a signature.

    Presentations double as the coding oracle for computation axioms: the
    ``Proof:``/``Ax:`` relations of every theory reachable through
    ``references`` and family references are decided here.
    """

    name: str
    signature: Signature
    axioms: Tuple[Formula, ...] = ()
    schemata: Tuple[SchemaDescriptor, ...] = ()
    families: Tuple[AxiomFamily, ...] = ()
    interpretation: Optional[object] = None
    references: Tuple["TheoryPresentation", ...] = ()
    description: str = ""

    @cached_property
    def _axiom_keys(self) -> Set[tuple]:
        return {alpha_key(a) for a in self.axioms}

    @cached_property
    def coding_signature(self) -> Signature:
        return CODING_SIGNATURE.union(self.signature)

    def extend(self, name: str, axioms: Sequence[Formula] = (), schemata: Sequence[SchemaDescriptor] = (),
               families: Sequence[AxiomFamily] = (), signature: Optional[Signature] = None,
               description: str = "") -> "TheoryPresentation":
        """A presentation recognizing everything this one does, plus more.

        This presentation is included as a family, so its schemata keep ranging
        over its own signature when ``signature`` widens the language.
        """
        return TheoryPresentation(
            name=name,
            signature=signature or self.signature,
            axioms=tuple(axioms),
            schemata=tuple(schemata),
            families=(IncludedTheory(self),) + tuple(families),
            interpretation=self.interpretation,
            references=(self,),
            description=description,
        )

    def recognize(self, s: Formula) -> bool:
        if free_variables(s):
            return False
        try:
            check_formula(s, self.signature)
        except SignatureError:
            return False
        if alpha_key(s) in self._axiom_keys:
            return True
        if any(schema.matches(s, self.signature) for schema in self.schemata):
            return True
        return any(family.recognizes(s) for family in self.families)

    def resolve(self, name: str) -> Optional["TheoryPresentation"]:
        if self.name == name:
            return self
        for ref in self.references:
            found = ref.resolve(name)
            if found is not None:
                return found
        for family in self.families:
            found = family.resolve(name)
            if found is not None:
                return found
        return None

    def _require(self, name: str) -> "TheoryPresentation":
        theory = self.resolve(name)
        if theory is None:
            raise OutOfFragmentError(f"theory {name} is not reachable from {self.name}")
        return theory

    def proof_holds(self, theory: str, proof_code: int, formula_code: int) -> bool:
        target = self._require(theory)
        try:
            proof = decode_proof(proof_code, target.coding_signature)
        except CodecError:
            return False
        if encode_formula(proof.conclusion) != formula_code:
            return False
        return check_proof(proof, target).accepted

    def axiom_holds(self, theory: str, formula_code: int) -> bool:
        target = self._require(theory)
        try:
            f = decode_formula(formula_code, target.coding_signature)
        except CodecError:
            return False
        return target.recognize(f)

    def describe(self) -> str:
        parts = [f"{len(self.axioms)} finite axioms"]
        parts += [f"schema {s.name}" for s in self.schemata]
        parts += [fam.describe() for fam in self.families]
        return f"{self.name}: " + "; ".join(parts)


def recognize_axiom(theory: TheoryPresentation, s: Formula) -> bool:
    return theory.recognize(s)


def all_numeral_instances(theory: TheoryPresentation, phi: Formula) -> bool:
    """Decide, by inspecting schemata and families, that φ(n̄) is an axiom for every n.

    Formulas without exactly one free variable have no numeral instances to
    speak of and get ``False``.
    """
    if len(free_variables(phi)) != 1:
        return False
    for family in theory.families:
        if family.covers_all_numerals(phi):
            return True
    for schema in theory.schemata:
        if schema.policy == POLICY_CLOSURE and schema.matches(phi, theory.signature, allow_free=True):
            return True
    return False


# ==========================================
# Checking
# ==========================================


class ProofChecker:
    def __init__(self, theory: TheoryPresentation):
        self.theory = theory
        self._seen: Dict[int, Optional[str]] = {}

    def local_reason(self, node: Proof) -> Optional[str]:
        try:
            check_formula(node.conclusion, self.theory.coding_signature
                          if node.rule == RULE_COMPUTATION else self.theory.signature)
        except SignatureError as exc:
            return f"ill-formed over {self.theory.signature.name}: {exc}"
        rule = node.rule
        if rule == RULE_AXIOM:
            if node.premises:
                return "axiom leaf with premises"
            return match_logical_axiom(node.scheme or "", node.conclusion)
        if rule == RULE_THEORY:
            if self.theory.recognize(node.conclusion):
                return None
            return f"not an axiom of {self.theory.name}"
        if rule == RULE_COMPUTATION:
            try:
                holds = eval_closed_decidable(node.conclusion, self.theory, self.theory.signature)
            except OutOfFragmentError as exc:
                return f"outside the decidable fragment: {exc}"
            return None if holds else "computation axiom evaluates to false"
        if rule == RULE_OBLIGATION:
            return "undischarged obligation"
        if rule == RULE_MP:
            if len(node.premises) != 2:
                return "modus ponens needs two premises"
            antecedent, implication = node.premises
            if alpha_equal(implication.conclusion, Implies(antecedent.conclusion, node.conclusion)):
                return None
            return "premises do not match modus ponens"
        if rule == RULE_GEN:
            if len(node.premises) != 1 or node.var is None:
                return "generalization needs one premise and a variable"
            if alpha_equal(node.conclusion, Forall(node.var, node.premises[0].conclusion)):
                return None
            return "conclusion is not the generalized premise"
        return f"unknown rule {rule}"

    def run(self, proof: Proof) -> Verdict:
        for path, node in proof.nodes():
            key = id(node)
            if key in self._seen:
                reason = self._seen[key]
            else:
                reason = self.local_reason(node)
                self._seen[key] = reason
            if reason is not None:
                step = FailingStep(path, node.rule, reason)
                logger.info(f"Proof rejected in {self.theory.name} at {step}")
                return Verdict(False, step)
        return ACCEPTED


def check_proof(proof: Proof, theory: TheoryPresentation) -> Verdict:
    return ProofChecker(theory).run(proof)


# ==========================================
# Rewriting proofs
# ==========================================


def map_leaves(proof: Proof, fn) -> Proof:
    """Rebuild ``proof`` with every leaf replaced by ``fn(leaf)`` (same conclusion expected)."""
    if not proof.premises:
        return fn(proof)
    premises = tuple(map_leaves(p, fn) for p in proof.premises)
    if all(a is b for a, b in zip(premises, proof.premises)):
        return proof
    return Proof(proof.rule, proof.conclusion, premises, proof.scheme, proof.var)


def obligations(proof: Proof) -> List[Formula]:
    out: List[Formula] = []
    keys: Set[tuple] = set()
    for leaf in proof.leaves():
        if leaf.rule == RULE_OBLIGATION:
            key = alpha_key(leaf.conclusion)
            if key not in keys:
                keys.add(key)
                out.append(leaf.conclusion)
    return out


def discharge(skeleton: Proof, proofs: Union[Mapping[tuple, Proof], Sequence[Proof]]) -> Proof:
    """Replace obligation leaves by supplied proofs of the same sentence."""
    if isinstance(proofs, Mapping):
        table = dict(proofs)
    else:
        table = {alpha_key(p.conclusion): p for p in proofs}

    def swap(leaf: Proof) -> Proof:
        if leaf.rule == RULE_OBLIGATION:
            return table.get(alpha_key(leaf.conclusion), leaf)
        return leaf

    return map_leaves(skeleton, swap)


class IncludedTheory(AxiomFamily):
    """All axioms of another presentation, recognized over that presentation's signature."""

    tag = "included"

    def __init__(self, theory: TheoryPresentation):
        self.theory = theory

    def recognizes(self, s: Formula) -> bool:
        return self.theory.recognize(s)

    def covers_all_numerals(self, phi: Formula) -> bool:
        return all_numeral_instances(self.theory, phi)

    def references(self) -> Sequence[TheoryPresentation]:
        return (self.theory,)

    def describe(self) -> str:
        return f"axioms of {self.theory.name}"


def iter_families(theory: TheoryPresentation) -> Iterator[AxiomFamily]:
    """Families of ``theory`` and, through inclusions, of every presentation it extends."""
    stack: List[TheoryPresentation] = [theory]
    seen: Set[int] = set()
    while stack:
        current = stack.pop()
        if id(current) in seen:
            continue
        seen.add(id(current))
        for family in current.families:
            if isinstance(family, IncludedTheory):
                stack.append(family.theory)
            else:
                yield family


def finite_axioms(theory: TheoryPresentation) -> List[Formula]:
    """Finite axioms of ``theory`` and of every presentation it includes."""
    out: List[Formula] = []
    stack: List[TheoryPresentation] = [theory]
    while stack:
        current = stack.pop()
        out.extend(current.axioms)
        stack.extend(f.theory for f in reversed(current.families) if isinstance(f, IncludedTheory))
    return out
