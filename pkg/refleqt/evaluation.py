"""
Evaluation of closed decidable sentences
========================================
Direct computation of closed sentences built from arithmetic atoms, the coding
vocabulary, connectives and bounded quantifiers. This is the single trusted
evaluator behind computation-axiom leaves.
"""

from __future__ import annotations

import logging
from typing import Dict, List, Optional, Protocol, Tuple

from . import config
from .codec import (
    CODING_SIGNATURE,
    cantor_pair,
    cantor_unpair,
    decode_formula,
    encode_formula,
)
from .errors import CodecError, OutOfFragmentError
from .syntax import (
    AXIOM_PREFIX,
    PROOF_PREFIX,
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
    Implies,
    Not,
    Numeral,
    Or,
    Signature,
    Term,
    Var,
    free_variables,
    substitute,
)

logger = logging.getLogger("refleqt.evaluation")

# Largest exponent the smash function may produce before evaluation gives up.
SMASH_EXPONENT_LIMIT = 4096


class CodingOracle(Protocol):
    """What the evaluator needs from the theories named in ``Proof:``/``Ax:`` atoms."""

    def proof_holds(self, theory: str, proof_code: int, formula_code: int) -> bool: ...

    def axiom_holds(self, theory: str, formula_code: int) -> bool: ...


class Evaluator:
    def __init__(self, oracle: Optional[CodingOracle] = None, sig: Optional[Signature] = None):
        self.oracle = oracle
        self.sig = CODING_SIGNATURE.union(sig) if sig is not None else CODING_SIGNATURE
        self.ceiling = config.max_code()

    # ------------------------------------------------------------------
    # Coding helpers
    # ------------------------------------------------------------------

    def decode(self, code: int) -> Optional[Formula]:
        try:
            return decode_formula(code, self.sig)
        except CodecError:
            return None

    def substitute_code(self, code: int, values: List[int]) -> int:
        """Numeral substitution into the leading free variables of a coded formula."""
        f = self.decode(code)
        if f is None:
            return 0
        for v, n in zip(free_variables(f), values):
            f = substitute(f, v, Numeral(n))
        return encode_formula(f)

    def is_template(self, code: int) -> bool:
        f = self.decode(code)
        return f is not None and bool(free_variables(f))

    def disjoint_templates(self, c: int, d: int) -> bool:
        f, g = self.decode(c), self.decode(d)
        if f is None or g is None or not free_variables(f) or not free_variables(g):
            return False
        return templates_clash(f, free_variables(f)[0], g, free_variables(g)[0])

    # ------------------------------------------------------------------
    # Terms
    # ------------------------------------------------------------------

    def term(self, t: Term, env: Dict[Var, int]) -> int:
        if isinstance(t, Numeral):
            return t.value
        if isinstance(t, Var):
            if t not in env:
                raise OutOfFragmentError(f"free variable {t} in a sentence under evaluation")
            return env[t]
        if isinstance(t, Const):
            raise OutOfFragmentError(f"constant {t.name} has no computational meaning")
        args = [self.term(a, env) for a in t.args]
        fn = t.fn
        if fn == "S":
            return args[0] + 1
        if fn == "+":
            return args[0] + args[1]
        if fn == "*":
            return args[0] * args[1]
        if fn == "len":
            return args[0].bit_length()
        if fn == "half":
            return args[0] // 2
        if fn == "#":
            exponent = args[0].bit_length() * args[1].bit_length()
            if exponent > SMASH_EXPONENT_LIMIT:
                raise OutOfFragmentError(f"smash value 2^{exponent} is too large to compute")
            return 2**exponent
        if fn == "pair":
            return cantor_pair(args[0], args[1])
        if fn == "fst":
            return cantor_unpair(args[0])[0]
        if fn == "snd":
            return cantor_unpair(args[0])[1]
        if fn == "sub":
            return self.substitute_code(args[0], args[1:])
        if fn == "sub2":
            return self.substitute_code(args[0], args[1:])
        raise OutOfFragmentError(f"function symbol {fn} has no computational meaning")

    # ------------------------------------------------------------------
    # Formulas
    # ------------------------------------------------------------------

    def atom(self, f: Atom, env: Dict[Var, int]) -> bool:
        rel = f.rel
        if rel == "<=":
            return self.term(f.args[0], env) <= self.term(f.args[1], env)
        if rel == "Tmpl":
            return self.is_template(self.term(f.args[0], env))
        if rel == "Dis":
            return self.disjoint_templates(self.term(f.args[0], env), self.term(f.args[1], env))
        if rel.startswith(PROOF_PREFIX):
            if self.oracle is None:
                raise OutOfFragmentError(f"no theory available to decide {rel}")
            p, x = self.term(f.args[0], env), self.term(f.args[1], env)
            return self.oracle.proof_holds(rel[len(PROOF_PREFIX):], p, x)
        if rel.startswith(AXIOM_PREFIX):
            if self.oracle is None:
                raise OutOfFragmentError(f"no theory available to decide {rel}")
            return self.oracle.axiom_holds(rel[len(AXIOM_PREFIX):], self.term(f.args[0], env))
        raise OutOfFragmentError(f"relation {rel} is outside the decidable fragment")

    def bounded(self, f, env: Dict[Var, int]) -> bool:
        limit = self.term(f.bound, env)
        if limit > self.ceiling:
            logger.warning(f"Bounded quantifier limit {limit} exceeds REFLEQT_MAX_CODE={self.ceiling}")
            raise OutOfFragmentError(f"quantifier bound {limit} exceeds the enumeration ceiling {self.ceiling}")
        want_all = isinstance(f, BForall)
        inner = dict(env)
        for value in range(limit + 1):
            inner[f.var] = value
            if self.formula(f.body, inner) != want_all:
                return not want_all
        return want_all

    def formula(self, f: Formula, env: Dict[Var, int]) -> bool:
        if isinstance(f, Eq):
            return self.term(f.left, env) == self.term(f.right, env)
        if isinstance(f, Atom):
            return self.atom(f, env)
        if isinstance(f, Not):
            return not self.formula(f.body, env)
        if isinstance(f, And):
            return self.formula(f.left, env) and self.formula(f.right, env)
        if isinstance(f, Or):
            return self.formula(f.left, env) or self.formula(f.right, env)
        if isinstance(f, Implies):
            return (not self.formula(f.left, env)) or self.formula(f.right, env)
        if isinstance(f, (BForall, BExists)):
            return self.bounded(f, env)
        if isinstance(f, (Forall, Exists)):
            raise OutOfFragmentError("unbounded quantifier in a computation")
        raise TypeError(f"not a formula: {f!r}")


def eval_closed_decidable(s: Formula, oracle: Optional[CodingOracle] = None,
                          sig: Optional[Signature] = None) -> bool:
    """Truth value of a closed sentence of the decidable coding fragment.

    Raises ``OutOfFragmentError`` on free variables, unbounded quantifiers,
    uninterpreted symbols, or bounds over the configured enumeration ceiling.
    """
    free = free_variables(s)
    if free:
        raise OutOfFragmentError(f"not a sentence: free variables {', '.join(map(str, free))}")
    return Evaluator(oracle, sig).formula(s, {})


# ==========================================
# Template disjointness
# ==========================================

_NUMERAL_HEADS = ("S", "+", "*")


def _maybe_numeral(t: Term, hole: Var) -> bool:
    """Whether some instance of ``t`` could be syntactically a numeral."""
    if isinstance(t, Numeral) or t == hole:
        return True
    if isinstance(t, App) and t.fn in _NUMERAL_HEADS:
        return True
    return False


def templates_clash(f: Formula, hole_f: Var, g: Formula, hole_g: Var) -> bool:
    """True when f[hole_f:=m] and g[hole_g:=n] differ for every pair of numerals.

    The check walks both formulas in parallel and looks for a position outside
    the holes where they provably differ; anything undecided counts as overlap.
    """
    return _clash(f, g, (hole_f, hole_g), {}, {}, 0)


def _term_clash(s: Term, t: Term, holes: Tuple[Var, Var], env_f: Dict[Var, int],
                env_g: Dict[Var, int]) -> bool:
    s_hole, t_hole = s == holes[0] and s not in env_f, t == holes[1] and t not in env_g
    if s_hole or t_hole:
        other, other_hole = (t, holes[1]) if s_hole else (s, holes[0])
        if s_hole and t_hole:
            return False
        return not _maybe_numeral(other, other_hole)
    if isinstance(s, Numeral) and isinstance(t, Numeral):
        return s.value != t.value
    if isinstance(s, Numeral) or isinstance(t, Numeral):
        other = t if isinstance(s, Numeral) else s
        return isinstance(other, (Const, Var)) or (isinstance(other, App) and other.fn not in _NUMERAL_HEADS)
    if isinstance(s, Var) and isinstance(t, Var):
        if s in env_f or t in env_g:
            return env_f.get(s) != env_g.get(t)
        return s != t
    if type(s) is not type(t):
        return True
    if isinstance(s, Const):
        return s.name != t.name
    if s.fn != t.fn or len(s.args) != len(t.args):
        return True
    return any(_term_clash(a, b, holes, env_f, env_g) for a, b in zip(s.args, t.args))


def _clash(f: Formula, g: Formula, holes: Tuple[Var, Var], env_f: Dict[Var, int],
           env_g: Dict[Var, int], depth: int) -> bool:
    if type(f) is not type(g):
        return True
    if isinstance(f, Atom):
        if f.rel != g.rel or len(f.args) != len(g.args):
            return True
        return any(_term_clash(a, b, holes, env_f, env_g) for a, b in zip(f.args, g.args))
    if isinstance(f, Eq):
        return (_term_clash(f.left, g.left, holes, env_f, env_g)
                or _term_clash(f.right, g.right, holes, env_f, env_g))
    if isinstance(f, Not):
        return _clash(f.body, g.body, holes, env_f, env_g, depth)
    if isinstance(f, (And, Or, Implies)):
        return (_clash(f.left, g.left, holes, env_f, env_g, depth)
                or _clash(f.right, g.right, holes, env_f, env_g, depth))
    if isinstance(f, (BForall, BExists)) and _term_clash(f.bound, g.bound, holes, env_f, env_g):
        return True
    inner_f, inner_g = dict(env_f), dict(env_g)
    inner_f[f.var] = depth
    inner_g[g.var] = depth
    return _clash(f.body, g.body, holes, inner_f, inner_g, depth + 1)
