"""
Goedel codec
============
Shortlex codes for strings over {a, b}, code-level concatenation and
substitution, dyadic numerals, and the block encoding of formulas.

A string of length n with letters read as binary digits (a=0, b=1) and value v
gets the code 2^n - 1 + v, so ``code + 1`` is the string's bits behind a
leading 1. All operations below are closed forms over that representation.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, Iterable, Iterator, List, Optional, Tuple

from .errors import CodecError, EmptyPatternError, NumeralError, ParseError
from .syntax import (
    AXIOM_PREFIX,
    KEYWORDS,
    PROOF_PREFIX,
    App,
    Formula,
    Numeral,
    Signature,
    Term,
    arithmetic_signature,
    formula_tokens,
    join_tokens,
    numeral_tokens,
    parse_formula,
    term_tokens,
)

logger = logging.getLogger("refleqt.codec")

ALPHABET = "ab"

# ==========================================
# Shortlex strings
# ==========================================


def _check_string(s: str) -> None:
    if any(ch not in ALPHABET for ch in s):
        raise CodecError(f"string {s!r} is not over the alphabet {{a,b}}")


def encode_string(s: str) -> int:
    """Shortlex ordinal of ``s``: length first, then alphabetic."""
    _check_string(s)
    bits = s.replace("a", "0").replace("b", "1")
    return int("1" + bits, 2) - 1


def decode_string(c: int) -> str:
    if c < 0:
        raise CodecError(f"codes are naturals, got {c}")
    return bin(c + 1)[3:].replace("0", "a").replace("1", "b")


def code_length(c: int) -> int:
    """Length of the string coded by ``c`` without decoding it."""
    return (c + 1).bit_length() - 1


def length_band(n: int) -> Tuple[int, int]:
    """Inclusive code interval occupied by the strings of length ``n``."""
    return 2**n - 1, 2 ** (n + 1) - 2


def concat_codes(c1: int, c2: int) -> int:
    """Code of decode(c1) ++ decode(c2)."""
    n2 = code_length(c2)
    return ((c1 + 1) << n2) + (c2 + 1) - (1 << n2) - 1


def subst_codes(s: int, t: int, x: int) -> int:
    """Replace the leftmost non-overlapping occurrences of decode(x) by decode(t)."""
    pattern = decode_string(x)
    if not pattern:
        raise EmptyPatternError("substitution pattern decodes to the empty string")
    return encode_string(decode_string(s).replace(pattern, decode_string(t)))


def subst_growth_bound(s: int, t: int) -> int:
    """Bit-length ceiling for subst_codes(s, t, x), any nonempty x."""
    return s.bit_length() * max(1, t.bit_length())


# ==========================================
# Pairing
# ==========================================


def cantor_pair(x: int, y: int) -> int:
    return (x + y) * (x + y + 1) // 2 + y


def cantor_unpair(z: int) -> Tuple[int, int]:
    w = (math.isqrt(8 * z + 1) - 1) // 2
    y = z - w * (w + 1) // 2
    return w - y, y


# ==========================================
# Numerals
# ==========================================


def dyadic_numeral(n: int) -> Numeral:
    """The logarithmic-size numeral for ``n`` (1 is S(0); 2m and 2m+1 by parity)."""
    if n < 0:
        raise NumeralError(f"numerals denote naturals, got {n}")
    return Numeral(n)


def evaluate_numeral(t: Term) -> int:
    """Value of a closed 0/S/+/* term; anything else is outside the numeral fragment."""
    if isinstance(t, Numeral):
        return t.value
    if isinstance(t, App):
        if t.fn == "S" and len(t.args) == 1:
            return evaluate_numeral(t.args[0]) + 1
        if t.fn == "+" and len(t.args) == 2:
            return evaluate_numeral(t.args[0]) + evaluate_numeral(t.args[1])
        if t.fn == "*" and len(t.args) == 2:
            return evaluate_numeral(t.args[0]) * evaluate_numeral(t.args[1])
    raise NumeralError(f"term {t} is outside the numeral fragment")


def unary_numeral_tokens(n: int) -> Iterator[str]:
    for _ in range(n):
        yield "("
        yield "S"
    yield "0"
    for _ in range(n):
        yield ")"


# ==========================================
# Symbol tables
# ==========================================

STRUCTURAL = ("(", ")")
PROOF_LABELS = ("mp", "gen", "axiom", "thy", "comp", "obl")
SCHEME_NAMES = ("taut", "inst", "exi", "all-dist", "ex-elim", "ball", "bex", "refl", "leibniz")
SPELL_OPEN, SPELL_CLOSE = "{", "}"
NAME_CHARACTERS = tuple(chr(c) for c in range(33, 127) if chr(c) not in "(){} ")


@dataclass(frozen=True)
class SymbolTable:
    """Injective map from tokens to fixed-width {a,b} blocks.

    Tokens with no entry of their own are spelled character by character
    between ``{`` and ``}``, so every table encodes every rendering.
    """

    name: str
    entries: Tuple[str, ...]

    def __post_init__(self) -> None:
        if len(set(self.entries)) != len(self.entries):
            raise CodecError(f"symbol table {self.name} has duplicate entries")

    @cached_property
    def width(self) -> int:
        return max(1, math.ceil(math.log2(len(self.entries))))

    @cached_property
    def _index(self) -> Dict[str, int]:
        return {e: i for i, e in enumerate(self.entries)}

    @classmethod
    def for_signature(cls, sig: Signature) -> "SymbolTable":
        ordered: List[str] = []
        for group in (STRUCTURAL, KEYWORDS, PROOF_LABELS, SCHEME_NAMES, sorted(sig.static_symbols()),
                      (SPELL_OPEN, SPELL_CLOSE)):
            for token in group:
                if token not in ordered:
                    ordered.append(token)
        ordered += [f"char:{ch}" for ch in NAME_CHARACTERS]
        return cls(sig.name, tuple(ordered))

    def block(self, index: int) -> str:
        return format(index, f"0{self.width}b").replace("0", "a").replace("1", "b")

    def token_blocks(self, tokens: Iterable[str]) -> Iterator[str]:
        index = self._index
        for tok in tokens:
            if tok in index:
                yield self.block(index[tok])
                continue
            yield self.block(index[SPELL_OPEN])
            for ch in tok:
                key = f"char:{ch}"
                if key not in index:
                    raise CodecError(f"character {ch!r} cannot be encoded")
                yield self.block(index[key])
            yield self.block(index[SPELL_CLOSE])

    def encode_tokens(self, tokens: Iterable[str]) -> int:
        return encode_string("".join(self.token_blocks(tokens)))

    def token_count(self, tokens: Iterable[str]) -> int:
        """Number of blocks a token stream occupies."""
        return sum(1 for _ in self.token_blocks(tokens))

    def decode_tokens(self, code: int) -> List[str]:
        s = decode_string(code)
        w = self.width
        if len(s) % w:
            raise CodecError(f"code {code} is not a whole number of {w}-symbol blocks")
        tokens: List[str] = []
        spelling: Optional[List[str]] = None
        for i in range(0, len(s), w):
            idx = int(s[i:i + w].replace("a", "0").replace("b", "1"), 2)
            if idx >= len(self.entries):
                raise CodecError(f"block {s[i:i + w]} has no entry in table {self.name}")
            entry = self.entries[idx]
            if entry == SPELL_OPEN:
                if spelling is not None:
                    raise CodecError("nested spelling marker")
                spelling = []
            elif entry == SPELL_CLOSE:
                if not spelling:
                    raise CodecError("empty or unopened spelling")
                tokens.append("".join(spelling))
                spelling = None
            elif spelling is not None:
                if not entry.startswith("char:"):
                    raise CodecError("symbol block inside a spelling")
                spelling.append(entry[5:])
            elif entry.startswith("char:"):
                raise CodecError("character block outside a spelling")
            else:
                tokens.append(entry)
        if spelling is not None:
            raise CodecError("unterminated spelling")
        return tokens


#: Signature used for every arithmetized code (the values of corner quotes).
CODING_SIGNATURE = arithmetic_signature("coding", coding=True, has_truth=True, has_commitment=True)
CODING_TABLE = SymbolTable.for_signature(CODING_SIGNATURE)


def encode_term(t: Term, table: SymbolTable = CODING_TABLE) -> int:
    return table.encode_tokens(term_tokens(t))


def encode_formula(f: Formula, table: SymbolTable = CODING_TABLE) -> int:
    """Goedel code of the formula's block rendering."""
    return table.encode_tokens(formula_tokens(f))


def decode_formula(code: int, sig: Optional[Signature] = None, table: SymbolTable = CODING_TABLE) -> Formula:
    """Inverse of ``encode_formula``; raises ``CodecError`` on codes of non-formulas."""
    tokens = table.decode_tokens(code)
    try:
        return parse_formula(join_tokens(tokens), sig or CODING_SIGNATURE)
    except ParseError as exc:
        raise CodecError(f"code {code} does not decode to a formula: {exc}") from exc


def quote(f: Formula) -> Numeral:
    """The dyadic numeral of the formula's code."""
    return Numeral(encode_formula(f))


def numeral_code_bits(n: int, table: SymbolTable = CODING_TABLE) -> int:
    return table.encode_tokens(numeral_tokens(n)).bit_length()


def unary_numeral_code_bits(n: int, table: SymbolTable = CODING_TABLE) -> int:
    return table.encode_tokens(unary_numeral_tokens(n)).bit_length()


def proof_relation(theory: str) -> str:
    return f"{PROOF_PREFIX}{theory}"


def axiom_relation(theory: str) -> str:
    return f"{AXIOM_PREFIX}{theory}"
