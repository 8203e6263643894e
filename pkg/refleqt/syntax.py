"""
Syntax kernel
=============
First-order signatures, terms and formulas; S-expression parsing and printing;
capture-avoiding substitution; alpha-equivalence; bounded-class bookkeeping.

All values are immutable. Variables are name+serial pairs and structural
equality of formulas is taken up to renaming of bound variables
(``alpha_equal``).
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Set, Tuple, Union

from .errors import ArityError, LexicalError, ParseError, SignatureError, UnknownSymbolError

logger = logging.getLogger("refleqt.syntax")

# ==========================================
# Signatures
# ==========================================

ARITHMETIC_CONSTANTS: Tuple[str, ...] = ("0",)
ARITHMETIC_FUNCTIONS: Tuple[Tuple[str, int], ...] = (
    ("S", 1), ("+", 2), ("*", 2), ("len", 1), ("#", 2), ("half", 1),
)
ARITHMETIC_RELATIONS: Tuple[Tuple[str, int], ...] = (("<=", 2),)
CODING_FUNCTIONS: Tuple[Tuple[str, int], ...] = (
    ("pair", 2), ("fst", 1), ("snd", 1), ("sub", 2), ("sub2", 3),
)
CODING_RELATIONS: Tuple[Tuple[str, int], ...] = (("Tmpl", 1), ("Dis", 2))
PROOF_PREFIX = "Proof:"
AXIOM_PREFIX = "Ax:"
TRUTH_PREDICATE = "T"
COMMITMENT_RELATIONS: Tuple[Tuple[str, int], ...] = (("I", 1), ("J", 2))

KEYWORDS = ("not", "and", "or", "->", "all", "ex", "ball", "bex", "=", "iff")


@dataclass(frozen=True)
class Signature:
    """A finite first-order signature with optional built-in profiles.

    ``has_arithmetic`` adds 0, S, +, *, len, #, half and <=; ``has_coding``
    adds the arithmetized-syntax vocabulary (pairing, numeral substitution,
    template predicates and the theory-indexed ``Proof:``/``Ax:`` relations).
    """

    name: str
    relations: Tuple[Tuple[str, int], ...] = ()
    functions: Tuple[Tuple[str, int], ...] = ()
    constants: Tuple[str, ...] = ()
    has_arithmetic: bool = False
    has_coding: bool = False
    has_truth: bool = False
    has_commitment: bool = False

    def __post_init__(self) -> None:
        seen: Set[str] = set()
        for symbol in self.static_symbols():
            if symbol in seen:
                raise SignatureError(f"symbol {symbol!r} declared twice in signature {self.name}")
            if symbol in KEYWORDS:
                raise SignatureError(f"symbol {symbol!r} is a reserved keyword")
            seen.add(symbol)
        for symbol, arity in self.relations + self.functions:
            if arity < 0:
                raise SignatureError(f"negative arity for {symbol}")

    def static_symbols(self) -> List[str]:
        symbols = [s for s, _ in self.relations] + [s for s, _ in self.functions] + list(self.constants)
        if self.has_arithmetic:
            symbols += list(ARITHMETIC_CONSTANTS) + [s for s, _ in ARITHMETIC_FUNCTIONS]
            symbols += [s for s, _ in ARITHMETIC_RELATIONS]
        if self.has_coding:
            symbols += [s for s, _ in CODING_FUNCTIONS] + [s for s, _ in CODING_RELATIONS]
        if self.has_truth:
            symbols.append(TRUTH_PREDICATE)
        if self.has_commitment:
            symbols += [s for s, _ in COMMITMENT_RELATIONS]
        return symbols

    def relation_arity(self, symbol: str) -> Optional[int]:
        for name, arity in self.relations:
            if name == symbol:
                return arity
        if self.has_arithmetic and symbol == "<=":
            return 2
        if self.has_coding:
            for name, arity in CODING_RELATIONS:
                if name == symbol:
                    return arity
            if symbol.startswith(PROOF_PREFIX) and len(symbol) > len(PROOF_PREFIX):
                return 2
            if symbol.startswith(AXIOM_PREFIX) and len(symbol) > len(AXIOM_PREFIX):
                return 1
        if self.has_truth and symbol == TRUTH_PREDICATE:
            return 1
        if self.has_commitment:
            for name, arity in COMMITMENT_RELATIONS:
                if name == symbol:
                    return arity
        return None

    def function_arity(self, symbol: str) -> Optional[int]:
        table = list(self.functions)
        if self.has_arithmetic:
            table += list(ARITHMETIC_FUNCTIONS)
        if self.has_coding:
            table += list(CODING_FUNCTIONS)
        for name, arity in table:
            if name == symbol:
                return arity
        return None

    def is_constant(self, symbol: str) -> bool:
        if self.has_arithmetic and symbol in ARITHMETIC_CONSTANTS:
            return True
        return symbol in self.constants

    def relation_symbols(self) -> List[Tuple[str, int]]:
        """Declared relations (user + built-in profiles), excluding equality."""
        out = list(self.relations)
        if self.has_arithmetic:
            out += list(ARITHMETIC_RELATIONS)
        if self.has_coding:
            out += list(CODING_RELATIONS)
        if self.has_truth:
            out.append((TRUTH_PREDICATE, 1))
        if self.has_commitment:
            out += list(COMMITMENT_RELATIONS)
        return out

    def extend(self, name: Optional[str] = None, relations: Sequence[Tuple[str, int]] = (),
               functions: Sequence[Tuple[str, int]] = (), constants: Sequence[str] = (),
               truth: Optional[bool] = None, commitment: Optional[bool] = None) -> "Signature":
        return Signature(
            name=name or self.name,
            relations=self.relations + tuple(r for r in relations if r not in self.relations),
            functions=self.functions + tuple(f for f in functions if f not in self.functions),
            constants=self.constants + tuple(c for c in constants if c not in self.constants),
            has_arithmetic=self.has_arithmetic,
            has_coding=self.has_coding,
            has_truth=self.has_truth if truth is None else truth,
            has_commitment=self.has_commitment if commitment is None else commitment,
        )

    def with_truth(self) -> "Signature":
        return self.extend(name=f"{self.name}+T", truth=True)

    def union(self, other: "Signature") -> "Signature":
        merged = self.extend(
            name=self.name if self.name == other.name else f"{self.name}|{other.name}",
            relations=other.relations, functions=other.functions, constants=other.constants,
            truth=self.has_truth or other.has_truth,
            commitment=self.has_commitment or other.has_commitment,
        )
        if other.has_arithmetic or other.has_coding:
            merged = Signature(
                merged.name, merged.relations, merged.functions, merged.constants,
                merged.has_arithmetic or other.has_arithmetic, merged.has_coding or other.has_coding,
                merged.has_truth, merged.has_commitment,
            )
        return merged


def arithmetic_signature(name: str = "arith", coding: bool = True, **extra) -> Signature:
    return Signature(name=name, has_arithmetic=True, has_coding=coding, **extra)


def relational_signature(name: str, relations: Mapping[str, int]) -> Signature:
    return Signature(name=name, relations=tuple(relations.items()))


# ==========================================
# Terms
# ==========================================


@dataclass(frozen=True)
class Var:
    name: str
    serial: int = 0

    def __str__(self) -> str:
        return self.name if self.serial == 0 else f"{self.name}.{self.serial}"


@dataclass(frozen=True)
class Const:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Numeral:
    """The dyadic numeral for ``value``, kept folded.

    Semantically this node *is* the closed term built from 0, S, +, * by the
    parity recursion; it prints and encodes in that expanded form.
    """

    value: int

    def __post_init__(self) -> None:
        if self.value < 0:
            raise ValueError("numerals denote naturals")

    def expand(self) -> "Term":
        """The explicit 0/S/+/* term tree (intended for small values)."""
        one = App("S", (Numeral(0),))
        if self.value == 0:
            return self
        if self.value == 1:
            return one
        two = App("+", (one, one))
        if self.value % 2 == 1:
            return App("S", (App("*", (two, Numeral((self.value - 1) // 2).expand())),))
        return App("*", (two, Numeral(self.value // 2).expand()))

    def __str__(self) -> str:
        return " ".join(numeral_tokens(self.value))


@dataclass(frozen=True)
class App:
    fn: str
    args: Tuple["Term", ...]

    def __str__(self) -> str:
        return join_tokens(term_tokens(self))


Term = Union[Var, Const, Numeral, App]

_ONE_TOKENS = ("(", "S", "0", ")")


def numeral_tokens(value: int) -> Iterator[str]:
    """Tokens of the expanded dyadic numeral, produced without recursion."""
    prefixes: List[Tuple[str, ...]] = []
    closers: List[int] = []
    n = value
    while n > 1:
        if n % 2 == 1:
            prefixes.append(("(", "S", "(", "*", "(", "+") + _ONE_TOKENS + _ONE_TOKENS + (")",))
            closers.append(2)
            n = (n - 1) // 2
        else:
            prefixes.append(("(", "*", "(", "+") + _ONE_TOKENS + _ONE_TOKENS + (")",))
            closers.append(1)
            n //= 2
    for prefix in prefixes:
        yield from prefix
    if n == 0:
        yield "0"
    else:
        yield from _ONE_TOKENS
    for count in reversed(closers):
        for _ in range(count):
            yield ")"


def numeral_symbol_count(value: int) -> int:
    """Number of 0/S/+/* symbol occurrences in the expanded numeral."""
    count = 0
    n = value
    while n > 1:
        if n % 2 == 1:
            count += 7
            n = (n - 1) // 2
        else:
            count += 6
            n //= 2
    return count + (1 if n == 0 else 2)


def zero() -> Numeral:
    return Numeral(0)


def succ(t: Term) -> Term:
    return make_app("S", (t,))


def make_app(fn: str, args: Sequence[Term]) -> Term:
    """Build an application, folding canonical numeral shapes into ``Numeral``."""
    args = tuple(args)
    if fn == "S" and len(args) == 1 and isinstance(args[0], Numeral) and args[0].value == 0:
        return Numeral(1)
    if fn in ("S", "*") and len(args) in (1, 2):
        folded = _fold_numeral_app(fn, args)
        if folded is not None:
            return folded
    return App(fn, args)


def _is_two(t: Term) -> bool:
    return (isinstance(t, App) and t.fn == "+" and len(t.args) == 2
            and t.args[0] == Numeral(1) and t.args[1] == Numeral(1))


def _fold_numeral_app(fn: str, args: Tuple[Term, ...]) -> Optional[Numeral]:
    if fn == "*" and len(args) == 2 and _is_two(args[0]) and isinstance(args[1], Numeral):
        if args[1].value >= 1:
            return Numeral(2 * args[1].value)
    if fn == "S" and len(args) == 1:
        inner = args[0]
        if (isinstance(inner, App) and inner.fn == "*" and len(inner.args) == 2
                and _is_two(inner.args[0]) and isinstance(inner.args[1], Numeral)
                and inner.args[1].value >= 1):
            return Numeral(2 * inner.args[1].value + 1)
    return None


# ==========================================
# Formulas
# ==========================================


@dataclass(frozen=True)
class Atom:
    rel: str
    args: Tuple[Term, ...] = ()


@dataclass(frozen=True)
class Eq:
    left: Term
    right: Term


@dataclass(frozen=True)
class Not:
    body: "Formula"


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Implies:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Forall:
    var: Var
    body: "Formula"


@dataclass(frozen=True)
class Exists:
    var: Var
    body: "Formula"


@dataclass(frozen=True)
class BForall:
    var: Var
    bound: Term
    body: "Formula"


@dataclass(frozen=True)
class BExists:
    var: Var
    bound: Term
    body: "Formula"


Formula = Union[Atom, Eq, Not, And, Or, Implies, Forall, Exists, BForall, BExists]
Quantifier = (Forall, Exists, BForall, BExists)
Binary = (And, Or, Implies)


def iff(a: Formula, b: Formula) -> Formula:
    return And(Implies(a, b), Implies(b, a))


def split_iff(f: Formula) -> Optional[Tuple[Formula, Formula]]:
    if (isinstance(f, And) and isinstance(f.left, Implies) and isinstance(f.right, Implies)
            and alpha_equal(f.left.left, f.right.right) and alpha_equal(f.left.right, f.right.left)):
        return f.left.left, f.left.right
    return None


def conj(parts: Sequence[Formula]) -> Formula:
    """Right-nested conjunction; requires at least one part."""
    if not parts:
        raise ValueError("empty conjunction")
    out = parts[-1]
    for p in reversed(parts[:-1]):
        out = And(p, out)
    return out


def disj(parts: Sequence[Formula]) -> Formula:
    if not parts:
        raise ValueError("empty disjunction")
    out = parts[-1]
    for p in reversed(parts[:-1]):
        out = Or(p, out)
    return out


def implies_chain(premises: Sequence[Formula], conclusion: Formula) -> Formula:
    out = conclusion
    for p in reversed(premises):
        out = Implies(p, out)
    return out


def closure(f: Formula) -> Formula:
    """Universal closure over the free variables in order of first occurrence."""
    out = f
    for v in reversed(free_variables(f)):
        out = Forall(v, out)
    return out


def strip_foralls(f: Formula, limit: Optional[int] = None) -> Tuple[List[Var], Formula]:
    prefix: List[Var] = []
    while isinstance(f, Forall) and (limit is None or len(prefix) < limit):
        prefix.append(f.var)
        f = f.body
    return prefix, f


# ==========================================
# Variables
# ==========================================


def term_variables(t: Term) -> List[Var]:
    out: List[Var] = []
    _collect_term_vars(t, out)
    return out


def _collect_term_vars(t: Term, out: List[Var]) -> None:
    if isinstance(t, Var):
        if t not in out:
            out.append(t)
    elif isinstance(t, App):
        for a in t.args:
            _collect_term_vars(a, out)


def free_variables(f: Formula) -> List[Var]:
    """Free variables ordered by first occurrence in the printed form."""
    out: List[Var] = []
    _collect_free(f, frozenset(), out)
    return out


def _collect_free(f: Formula, bound: frozenset, out: List[Var]) -> None:
    if isinstance(f, Atom):
        for a in f.args:
            for v in term_variables(a):
                if v not in bound and v not in out:
                    out.append(v)
    elif isinstance(f, Eq):
        for a in (f.left, f.right):
            for v in term_variables(a):
                if v not in bound and v not in out:
                    out.append(v)
    elif isinstance(f, Not):
        _collect_free(f.body, bound, out)
    elif isinstance(f, Binary):
        _collect_free(f.left, bound, out)
        _collect_free(f.right, bound, out)
    elif isinstance(f, (Forall, Exists)):
        _collect_free(f.body, bound | {f.var}, out)
    elif isinstance(f, (BForall, BExists)):
        for v in term_variables(f.bound):
            if v not in bound and v not in out:
                out.append(v)
        _collect_free(f.body, bound | {f.var}, out)
    else:
        raise TypeError(f"not a formula: {f!r}")


def all_variables(f: Formula) -> Set[Var]:
    out: Set[Var] = set()
    for node in subformulas(f):
        if isinstance(node, Quantifier):
            out.add(node.var)
        for t in atom_terms(node):
            out.update(term_variables(t))
    return out


def atom_terms(f: Formula) -> Tuple[Term, ...]:
    if isinstance(f, Atom):
        return f.args
    if isinstance(f, Eq):
        return (f.left, f.right)
    if isinstance(f, (BForall, BExists)):
        return (f.bound,)
    return ()


def is_sentence(f: Formula) -> bool:
    return not free_variables(f)


def fresh_variable(base: Var, avoid: Iterable[Var]) -> Var:
    top = base.serial
    for v in avoid:
        if v.name == base.name and v.serial > top:
            top = v.serial
    return Var(base.name, top + 1)


def subformulas(f: Formula) -> Iterator[Formula]:
    stack = [f]
    while stack:
        node = stack.pop()
        yield node
        if isinstance(node, Not):
            stack.append(node.body)
        elif isinstance(node, Binary):
            stack.append(node.right)
            stack.append(node.left)
        elif isinstance(node, Quantifier):
            stack.append(node.body)


def relations_in(f: Formula) -> Set[str]:
    return {node.rel for node in subformulas(f) if isinstance(node, Atom)}


def contains_relation(f: Formula, rel: str) -> bool:
    return any(isinstance(node, Atom) and node.rel == rel for node in subformulas(f))


# ==========================================
# Substitution
# ==========================================


def substitute_term(t: Term, v: Var, s: Term) -> Term:
    if isinstance(t, Var):
        return s if t == v else t
    if isinstance(t, App):
        return make_app(t.fn, tuple(substitute_term(a, v, s) for a in t.args))
    return t


def substitute(f: Formula, v: Var, t: Term) -> Formula:
    """Capture-avoiding substitution f[v := t].

    Bound variables are renamed to fresh serials only when they would capture
    a variable of ``t``.
    """
    return _subst(f, v, t, frozenset(term_variables(t)))


def _subst(f: Formula, v: Var, t: Term, fv_t: frozenset) -> Formula:
    if isinstance(f, Atom):
        return Atom(f.rel, tuple(substitute_term(a, v, t) for a in f.args))
    if isinstance(f, Eq):
        return Eq(substitute_term(f.left, v, t), substitute_term(f.right, v, t))
    if isinstance(f, Not):
        return Not(_subst(f.body, v, t, fv_t))
    if isinstance(f, Binary):
        return type(f)(_subst(f.left, v, t, fv_t), _subst(f.right, v, t, fv_t))
    if isinstance(f, Quantifier):
        bounded = isinstance(f, (BForall, BExists))
        bound = substitute_term(f.bound, v, t) if bounded else None
        var, body = f.var, f.body
        if var != v and v in free_variables(body):
            if var in fv_t:
                new = fresh_variable(var, set(fv_t) | all_variables(body) | {v})
                body = _subst(body, var, new, frozenset({new}))
                var = new
            body = _subst(body, v, t, fv_t)
        if bounded:
            return type(f)(var, bound, body)
        return type(f)(var, body)
    raise TypeError(f"not a formula: {f!r}")


def rename_free(f: Formula, mapping: Mapping[Var, Term]) -> Formula:
    """Simultaneous substitution through fresh intermediates."""
    avoid = all_variables(f)
    for t in mapping.values():
        avoid |= set(term_variables(t))
    temps: Dict[Var, Var] = {}
    out = f
    for v in mapping:
        tmp = fresh_variable(Var(f"_{v.name}"), avoid)
        avoid.add(tmp)
        temps[v] = tmp
        out = substitute(out, v, tmp)
    for v, tmp in temps.items():
        out = substitute(out, tmp, mapping[v])
    return out


def replace_atoms(f: Formula, rel: str, builder: Callable[[Tuple[Term, ...]], Formula]) -> Formula:
    """Replace every atom ``rel(args)`` by ``builder(args)``.

    The builder's result must have as free variables only those of ``args``;
    its own bound variables are then never captured by surrounding binders.
    """
    if isinstance(f, Atom):
        return builder(f.args) if f.rel == rel else f
    if isinstance(f, Eq):
        return f
    if isinstance(f, Not):
        return Not(replace_atoms(f.body, rel, builder))
    if isinstance(f, Binary):
        return type(f)(replace_atoms(f.left, rel, builder), replace_atoms(f.right, rel, builder))
    if isinstance(f, (Forall, Exists)):
        return type(f)(f.var, replace_atoms(f.body, rel, builder))
    if isinstance(f, (BForall, BExists)):
        return type(f)(f.var, f.bound, replace_atoms(f.body, rel, builder))
    raise TypeError(f"not a formula: {f!r}")


# ==========================================
# Alpha-equivalence
# ==========================================


def _term_key(t: Term, env: Mapping[Var, int]) -> tuple:
    if isinstance(t, Var):
        if t in env:
            return ("b", env[t])
        return ("v", t.name, t.serial)
    if isinstance(t, Numeral):
        return ("n", t.value)
    if isinstance(t, Const):
        return ("c", t.name)
    return ("f", t.fn) + tuple(_term_key(a, env) for a in t.args)


def alpha_key(f: Formula) -> tuple:
    """A hashable key equal for exactly the alpha-equivalent formulas."""
    return _alpha_key(f, {}, 0)


def _alpha_key(f: Formula, env: Dict[Var, int], depth: int) -> tuple:
    if isinstance(f, Atom):
        return ("R", f.rel) + tuple(_term_key(a, env) for a in f.args)
    if isinstance(f, Eq):
        return ("=", _term_key(f.left, env), _term_key(f.right, env))
    if isinstance(f, Not):
        return ("not", _alpha_key(f.body, env, depth))
    if isinstance(f, Binary):
        return (type(f).__name__, _alpha_key(f.left, env, depth), _alpha_key(f.right, env, depth))
    if isinstance(f, Quantifier):
        head: tuple = (type(f).__name__,)
        if isinstance(f, (BForall, BExists)):
            head += (_term_key(f.bound, env),)
        inner = dict(env)
        inner[f.var] = depth
        return head + (_alpha_key(f.body, inner, depth + 1),)
    raise TypeError(f"not a formula: {f!r}")


def alpha_equal(f: Formula, g: Formula) -> bool:
    if f is g:
        return True
    return alpha_key(f) == alpha_key(g)


# ==========================================
# Well-formedness
# ==========================================


def check_term(t: Term, sig: Signature) -> None:
    if isinstance(t, Numeral):
        if not sig.has_arithmetic:
            raise SignatureError(f"numeral {t.value} used outside an arithmetic signature")
    elif isinstance(t, Const):
        if not sig.is_constant(t.name):
            raise SignatureError(f"unknown constant {t.name}")
    elif isinstance(t, App):
        arity = sig.function_arity(t.fn)
        if arity is None:
            raise SignatureError(f"unknown function symbol {t.fn}")
        if arity != len(t.args):
            raise SignatureError(f"{t.fn} expects {arity} arguments, got {len(t.args)}")
        for a in t.args:
            check_term(a, sig)


def check_formula(f: Formula, sig: Signature) -> None:
    """Raise ``SignatureError`` unless ``f`` is well formed over ``sig``."""
    for node in subformulas(f):
        if isinstance(node, Atom):
            arity = sig.relation_arity(node.rel)
            if arity is None:
                raise SignatureError(f"unknown relation symbol {node.rel}")
            if arity != len(node.args):
                raise SignatureError(f"{node.rel} expects {arity} arguments, got {len(node.args)}")
        for t in atom_terms(node):
            check_term(t, sig)


# ==========================================
# Printing
# ==========================================

_FORMULA_HEADS = {Not: "not", And: "and", Or: "or", Implies: "->", Forall: "all", Exists: "ex",
                  BForall: "ball", BExists: "bex"}


def term_tokens(t: Term) -> Iterator[str]:
    if isinstance(t, Var):
        yield str(t)
    elif isinstance(t, Numeral):
        yield from numeral_tokens(t.value)
    elif isinstance(t, Const):
        yield t.name
    else:
        yield "("
        yield t.fn
        for a in t.args:
            yield from term_tokens(a)
        yield ")"


def formula_tokens(f: Formula) -> Iterator[str]:
    if isinstance(f, Atom):
        yield "("
        yield f.rel
        for a in f.args:
            yield from term_tokens(a)
        yield ")"
    elif isinstance(f, Eq):
        yield "("
        yield "="
        yield from term_tokens(f.left)
        yield from term_tokens(f.right)
        yield ")"
    elif isinstance(f, Not):
        yield "("
        yield "not"
        yield from formula_tokens(f.body)
        yield ")"
    elif isinstance(f, Binary):
        yield "("
        yield _FORMULA_HEADS[type(f)]
        yield from formula_tokens(f.left)
        yield from formula_tokens(f.right)
        yield ")"
    elif isinstance(f, Quantifier):
        yield "("
        yield _FORMULA_HEADS[type(f)]
        yield str(f.var)
        if isinstance(f, (BForall, BExists)):
            yield from term_tokens(f.bound)
        yield from formula_tokens(f.body)
        yield ")"
    else:
        raise TypeError(f"not a formula: {f!r}")


def join_tokens(tokens: Iterable[str]) -> str:
    parts: List[str] = []
    previous = "("
    for tok in tokens:
        if parts and tok != ")" and previous != "(":
            parts.append(" ")
        parts.append(tok)
        previous = tok
    return "".join(parts)


def print_formula(f: Formula) -> str:
    """Deterministic canonical S-expression text."""
    return join_tokens(formula_tokens(f))


def print_term(t: Term) -> str:
    return join_tokens(term_tokens(t))


# ==========================================
# Parsing
# ==========================================


@dataclass(frozen=True)
class SAtom:
    text: str
    pos: int


@dataclass(frozen=True)
class SList:
    items: Tuple[Union["SAtom", "SList"], ...]
    pos: int
    end: int = 0


SExpr = Union[SAtom, SList]

_VAR_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_']*(\.[0-9]+)?$")
_NAT_RE = re.compile(r"^[0-9]+$")


def _line_col(text: str, pos: int) -> Tuple[int, int]:
    line = text.count("\n", 0, pos) + 1
    start = text.rfind("\n", 0, pos) + 1
    return line, pos - start + 1


def _error(cls, message: str, text: str, pos: int) -> ParseError:
    line, col = _line_col(text, pos)
    return cls(message, position=pos, line=line, column=col)


def read_sexprs(text: str) -> List[SExpr]:
    """Read every S-expression in ``text`` (iteratively, so deep numerals are fine)."""
    stack: List[Tuple[int, List[SExpr]]] = []
    top: List[SExpr] = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
        elif ch == ";":
            while i < n and text[i] != "\n":
                i += 1
        elif ch == "(":
            stack.append((i, []))
            i += 1
        elif ch == ")":
            if not stack:
                raise _error(LexicalError, "unbalanced ')'", text, i)
            start, items = stack.pop()
            node = SList(tuple(items), start, i)
            (stack[-1][1] if stack else top).append(node)
            i += 1
        else:
            start = i
            while i < n and not text[i].isspace() and text[i] not in "();":
                i += 1
            (stack[-1][1] if stack else top).append(SAtom(text[start:i], start))
    if stack:
        raise _error(LexicalError, "unexpected end of input, missing ')'", text, n)
    return top


def read_sexpr(text: str) -> SExpr:
    items = read_sexprs(text)
    if not items:
        raise _error(LexicalError, "empty input", text, len(text))
    if len(items) > 1:
        raise _error(LexicalError, "trailing input after expression", text, items[1].pos)
    return items[0]


def _is_one(node: SExpr) -> bool:
    return (isinstance(node, SList) and len(node.items) == 2 and isinstance(node.items[0], SAtom)
            and node.items[0].text == "S" and isinstance(node.items[1], SAtom)
            and node.items[1].text == "0")


def _is_two_s(node: SExpr) -> bool:
    return (isinstance(node, SList) and len(node.items) == 3 and isinstance(node.items[0], SAtom)
            and node.items[0].text == "+" and _is_one(node.items[1]) and _is_one(node.items[2]))


def sexpr_numeral(node: SExpr) -> Optional[int]:
    """Value of a canonical expanded dyadic numeral, or None."""
    steps: List[int] = []
    while True:
        if isinstance(node, SAtom):
            if node.text == "0" and not steps:
                return 0
            if _NAT_RE.match(node.text) and not steps:
                return int(node.text)
            return None
        if _is_one(node):
            value = 1
            break
        items = node.items
        if (len(items) == 2 and isinstance(items[0], SAtom) and items[0].text == "S"
                and isinstance(items[1], SList) and len(items[1].items) == 3
                and isinstance(items[1].items[0], SAtom) and items[1].items[0].text == "*"
                and _is_two_s(items[1].items[1])):
            steps.append(1)
            node = items[1].items[2]
        elif (len(items) == 3 and isinstance(items[0], SAtom) and items[0].text == "*"
              and _is_two_s(items[1])):
            steps.append(0)
            node = items[2]
        else:
            return None
    for bit in reversed(steps):
        if value < 1:
            return None
        value = 2 * value + bit
    return value


class FormulaParser:
    """Converts S-expressions to terms and formulas over a signature.

    ``extra_relations``/``extra_constants`` admit schema placeholders and
    quote constants without widening the signature itself.
    """

    def __init__(self, sig: Signature, text: str = "", extra_relations: Optional[Mapping[str, int]] = None,
                 extra_constants: Iterable[str] = ()):
        self.sig = sig
        self.text = text
        self.extra_relations = dict(extra_relations or {})
        self.extra_constants = set(extra_constants)

    def fail(self, cls, message: str, pos: int) -> ParseError:
        return _error(cls, message, self.text, pos)

    def relation_arity(self, symbol: str) -> Optional[int]:
        if symbol in self.extra_relations:
            return self.extra_relations[symbol]
        return self.sig.relation_arity(symbol)

    def term(self, node: SExpr) -> Term:
        if self.sig.has_arithmetic:
            value = sexpr_numeral(node)
            if value is not None:
                return Numeral(value)
        if isinstance(node, SAtom):
            text = node.text
            if _NAT_RE.match(text):
                raise self.fail(UnknownSymbolError, f"numeral {text} needs an arithmetic signature", node.pos)
            if self.sig.is_constant(text) or text in self.extra_constants:
                return Const(text)
            if self.sig.function_arity(text) is not None or self.relation_arity(text) is not None:
                raise self.fail(ArityError, f"symbol {text} used without arguments", node.pos)
            if text in KEYWORDS:
                raise self.fail(UnknownSymbolError, f"keyword {text} in term position", node.pos)
            if not _VAR_RE.match(text):
                raise self.fail(UnknownSymbolError, f"unknown symbol {text}", node.pos)
            return parse_variable(text)
        if not node.items:
            raise self.fail(LexicalError, "empty list in term position", node.pos)
        head = node.items[0]
        if not isinstance(head, SAtom):
            raise self.fail(UnknownSymbolError, "function position must be a symbol", node.pos)
        arity = self.sig.function_arity(head.text)
        if arity is None:
            raise self.fail(UnknownSymbolError, f"unknown function symbol {head.text}", head.pos)
        args = node.items[1:]
        if len(args) != arity:
            raise self.fail(ArityError, f"{head.text} expects {arity} arguments, got {len(args)}", head.pos)
        return make_app(head.text, tuple(self.term(a) for a in args))

    def variable(self, node: SExpr) -> Var:
        if not isinstance(node, SAtom) or not _VAR_RE.match(node.text) or node.text in KEYWORDS:
            raise self.fail(UnknownSymbolError, "expected a variable", node.pos)
        if self.sig.is_constant(node.text) or self.sig.function_arity(node.text) is not None:
            raise self.fail(UnknownSymbolError, f"{node.text} is a signature symbol, not a variable", node.pos)
        return parse_variable(node.text)

    def formula(self, node: SExpr) -> Formula:
        if isinstance(node, SAtom):
            arity = self.relation_arity(node.text)
            if arity == 0:
                return Atom(node.text, ())
            raise self.fail(UnknownSymbolError, f"expected a formula, found {node.text}", node.pos)
        if not node.items:
            raise self.fail(LexicalError, "empty list in formula position", node.pos)
        head = node.items[0]
        if not isinstance(head, SAtom):
            raise self.fail(UnknownSymbolError, "formula head must be a symbol", node.pos)
        op, rest = head.text, node.items[1:]

        def expect(count: int) -> None:
            if len(rest) != count:
                raise self.fail(ArityError, f"{op} expects {count} arguments, got {len(rest)}", head.pos)

        if op == "not":
            expect(1)
            return Not(self.formula(rest[0]))
        if op in ("and", "or", "->", "iff"):
            expect(2)
            left, right = self.formula(rest[0]), self.formula(rest[1])
            if op == "iff":
                return iff(left, right)
            return {"and": And, "or": Or, "->": Implies}[op](left, right)
        if op in ("all", "ex"):
            expect(2)
            var = self.variable(rest[0])
            body = self.formula(rest[1])
            return Forall(var, body) if op == "all" else Exists(var, body)
        if op in ("ball", "bex"):
            expect(3)
            var = self.variable(rest[0])
            bound = self.term(rest[1])
            body = self.formula(rest[2])
            return BForall(var, bound, body) if op == "ball" else BExists(var, bound, body)
        if op == "=":
            expect(2)
            return Eq(self.term(rest[0]), self.term(rest[1]))
        arity = self.relation_arity(op)
        if arity is None:
            raise self.fail(UnknownSymbolError, f"unknown relation symbol {op}", head.pos)
        if len(rest) != arity:
            raise self.fail(ArityError, f"{op} expects {arity} arguments, got {len(rest)}", head.pos)
        return Atom(op, tuple(self.term(a) for a in rest))


def parse_variable(text: str) -> Var:
    if "." in text:
        name, serial = text.rsplit(".", 1)
        return Var(name, int(serial))
    return Var(text, 0)


def parse_formula(text: str, sig: Signature, extra_relations: Optional[Mapping[str, int]] = None,
                  extra_constants: Iterable[str] = ()) -> Formula:
    """Parse one formula; errors carry line/column positions."""
    node = read_sexpr(text)
    return FormulaParser(sig, text, extra_relations, extra_constants).formula(node)


def parse_term(text: str, sig: Signature) -> Term:
    node = read_sexpr(text)
    return FormulaParser(sig, text).term(node)


# ==========================================
# Bounded classes
# ==========================================


class BoundKind(str, Enum):
    SIGMA0 = "Sigma_0^b"
    SIGMA = "Sigma_n^b"
    PI = "Pi_n^b"
    DELTA0_SYNTACTIC = "Delta_0^b-syntactic"
    UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class BoundedClass:
    kind: BoundKind
    level: int = 0

    @property
    def rank(self) -> Tuple[int, int]:
        if self.kind is BoundKind.SIGMA0:
            return (0, 0)
        if self.kind in (BoundKind.SIGMA, BoundKind.PI):
            return (1, self.level)
        if self.kind is BoundKind.DELTA0_SYNTACTIC:
            return (2, 0)
        return (3, 0)

    def __str__(self) -> str:
        if self.kind is BoundKind.SIGMA:
            return f"Sigma_{self.level}^b"
        if self.kind is BoundKind.PI:
            return f"Pi_{self.level}^b"
        return self.kind.value


def is_sharply_bounded(bound: Term) -> bool:
    return isinstance(bound, App) and bound.fn == "len" and len(bound.args) == 1


def classify_formula(f: Formula) -> BoundedClass:
    """Sigma_0^b iff every quantifier is bounded by a length term; otherwise
    count alternating blocks of term-bounded quantifiers in front of a
    Sigma_0^b matrix. Bounded formulas outside that prenex shape are
    Delta_0^b-syntactic; any unbounded quantifier makes the formula unbounded."""
    nodes = list(subformulas(f))
    if any(isinstance(n, (Forall, Exists)) for n in nodes):
        return BoundedClass(BoundKind.UNBOUNDED)
    bounded = [n for n in nodes if isinstance(n, (BForall, BExists))]
    if all(is_sharply_bounded(n.bound) for n in bounded):
        return BoundedClass(BoundKind.SIGMA0)
    blocks: List[type] = []
    node = f
    while isinstance(node, (BForall, BExists)):
        if not is_sharply_bounded(node.bound):
            if not blocks or blocks[-1] is not type(node):
                blocks.append(type(node))
        node = node.body
    matrix_bounded = [n for n in subformulas(node) if isinstance(n, (BForall, BExists))]
    if any(not is_sharply_bounded(n.bound) for n in matrix_bounded):
        return BoundedClass(BoundKind.DELTA0_SYNTACTIC)
    kind = BoundKind.SIGMA if blocks[0] is BExists else BoundKind.PI
    return BoundedClass(kind, len(blocks))


# ==========================================
# Relationalization
# ==========================================

GRAPH_PREFIX = "graph:"


def graph_relation(fn: str) -> str:
    return f"{GRAPH_PREFIX}{fn}"


def relationalize(f: Formula) -> Formula:
    """Unnest function terms into graph relations ``graph:f(args..., value)``.

    Constants become unary graph relations; numerals are expanded first.
    """
    avoid = set(all_variables(f))

    def fresh() -> Var:
        v = fresh_variable(Var("z"), avoid)
        avoid.add(v)
        return v

    def flatten(t: Term, defs: List[Formula]) -> Var:
        if isinstance(t, Var):
            return t
        if isinstance(t, Numeral):
            expanded = t.expand()
            if isinstance(expanded, Numeral):
                z = fresh()
                defs.append(Atom(graph_relation("0"), (z,)))
                return z
            return flatten_app(expanded, defs)
        if isinstance(t, Const):
            z = fresh()
            defs.append(Atom(graph_relation(t.name), (z,)))
            return z
        return flatten_app(t, defs)

    def flatten_app(t: App, defs: List[Formula]) -> Var:
        arg_vars = [flatten(a, defs) for a in t.args]
        z = fresh()
        defs.append(Atom(graph_relation(t.fn), tuple(arg_vars) + (z,)))
        return z

    def wrap(core: Formula, defs: List[Formula], introduced: List[Var]) -> Formula:
        if not defs:
            return core
        body: Formula = And(conj(defs), core)
        for v in reversed(introduced):
            body = Exists(v, body)
        return body

    def go(g: Formula) -> Formula:
        if isinstance(g, (Atom, Eq)):
            defs: List[Formula] = []
            before = set(avoid)
            terms = g.args if isinstance(g, Atom) else (g.left, g.right)
            flat = tuple(flatten(t, defs) for t in terms)
            introduced = [v for v in _ordered_new(defs, before)]
            core: Formula = Atom(g.rel, flat) if isinstance(g, Atom) else Eq(flat[0], flat[1])
            return wrap(core, defs, introduced)
        if isinstance(g, Not):
            return Not(go(g.body))
        if isinstance(g, Binary):
            return type(g)(go(g.left), go(g.right))
        if isinstance(g, (Forall, Exists)):
            return type(g)(g.var, go(g.body))
        if isinstance(g, BForall):
            return go(Forall(g.var, Implies(Atom("<=", (g.var, g.bound)), g.body)))
        if isinstance(g, BExists):
            return go(Exists(g.var, And(Atom("<=", (g.var, g.bound)), g.body)))
        raise TypeError(f"not a formula: {g!r}")

    return go(f)


def _ordered_new(defs: List[Formula], before: Set[Var]) -> List[Var]:
    out: List[Var] = []
    for d in defs:
        for t in atom_terms(d):
            for v in term_variables(t):
                if v not in before and v not in out:
                    out.append(v)
    return out


def unfold_bounded(f: Formula) -> Formula:
    """Replace bounded quantifiers by their relativized unbounded forms."""
    if isinstance(f, (Atom, Eq)):
        return f
    if isinstance(f, Not):
        return Not(unfold_bounded(f.body))
    if isinstance(f, Binary):
        return type(f)(unfold_bounded(f.left), unfold_bounded(f.right))
    if isinstance(f, (Forall, Exists)):
        return type(f)(f.var, unfold_bounded(f.body))
    if isinstance(f, BForall):
        return Forall(f.var, Implies(Atom("<=", (f.var, f.bound)), unfold_bounded(f.body)))
    if isinstance(f, BExists):
        return Exists(f.var, And(Atom("<=", (f.var, f.bound)), unfold_bounded(f.body)))
    raise TypeError(f"not a formula: {f!r}")


def map_terms(f: Formula, fn: Callable[[Term], Term]) -> Formula:
    """Apply ``fn`` to every maximal term of ``f`` (atom arguments and bounds)."""
    if isinstance(f, Atom):
        return Atom(f.rel, tuple(fn(a) for a in f.args))
    if isinstance(f, Eq):
        return Eq(fn(f.left), fn(f.right))
    if isinstance(f, Not):
        return Not(map_terms(f.body, fn))
    if isinstance(f, Binary):
        return type(f)(map_terms(f.left, fn), map_terms(f.right, fn))
    if isinstance(f, (Forall, Exists)):
        return type(f)(f.var, map_terms(f.body, fn))
    if isinstance(f, (BForall, BExists)):
        return type(f)(f.var, fn(f.bound), map_terms(f.body, fn))
    raise TypeError(f"not a formula: {f!r}")


def replace_constant(f: Formula, name: str, value: Term) -> Formula:
    """Replace the constant ``name`` by a closed term everywhere in ``f``."""

    def swap(t: Term) -> Term:
        if isinstance(t, Const) and t.name == name:
            return value
        if isinstance(t, App):
            return make_app(t.fn, tuple(swap(a) for a in t.args))
        return t

    return map_terms(f, swap)


def rename_binders(f: Formula, avoid: Set[Var]) -> Formula:
    """Rename every bound variable that lies in ``avoid`` to a fresh serial."""
    if isinstance(f, (Atom, Eq)):
        return f
    if isinstance(f, Not):
        return Not(rename_binders(f.body, avoid))
    if isinstance(f, Binary):
        return type(f)(rename_binders(f.left, avoid), rename_binders(f.right, avoid))
    var, body = f.var, rename_binders(f.body, avoid)
    if var in avoid:
        new = fresh_variable(var, avoid | all_variables(body))
        body = substitute(body, var, new)
        var = new
    if isinstance(f, (BForall, BExists)):
        return type(f)(var, f.bound, body)
    return type(f)(var, body)
