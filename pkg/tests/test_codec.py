import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from refleqt.codec import (
    CODING_SIGNATURE,
    SymbolTable,
    cantor_pair,
    cantor_unpair,
    code_length,
    concat_codes,
    decode_formula,
    decode_string,
    dyadic_numeral,
    encode_formula,
    encode_string,
    evaluate_numeral,
    length_band,
    numeral_code_bits,
    quote,
    subst_codes,
    subst_growth_bound,
    unary_numeral_code_bits,
)
from refleqt.errors import CodecError, EmptyPatternError, NumeralError
from refleqt.syntax import App, Numeral, Var, parse_formula

strings = st.text(alphabet="ab", max_size=24)


def test_first_codes_follow_shortlex():
    assert [decode_string(c) for c in range(7)] == ["", "a", "b", "aa", "ab", "ba", "bb"]


@pytest.mark.slow
def test_exhaustive_round_trip_and_bands():
    expected = 0
    for n in range(15):
        lo, hi = length_band(n)
        assert (lo, hi) == (2**n - 1, 2 ** (n + 1) - 2)
        for letters in itertools.product("ab", repeat=n):
            s = "".join(letters)
            c = encode_string(s)
            assert c == expected
            assert lo <= c <= hi
            assert decode_string(c) == s
            expected += 1
        # strings of length <= n number 2^(n+1) - 1
        assert expected == 2 ** (n + 1) - 1


def test_rejects_foreign_letters_and_negative_codes():
    with pytest.raises(CodecError):
        encode_string("abc")
    with pytest.raises(CodecError):
        decode_string(-1)


@given(strings, strings)
@settings(max_examples=1000)
def test_concat_is_exact_and_lengths_add(x, y):
    c = concat_codes(encode_string(x), encode_string(y))
    assert decode_string(c) == x + y
    assert code_length(c) == len(x) + len(y)


@given(strings, strings, st.text(alphabet="ab", min_size=1, max_size=4))
@settings(max_examples=300)
def test_subst_replaces_leftmost_occurrences(s, t, x):
    out = subst_codes(encode_string(s), encode_string(t), encode_string(x))
    assert decode_string(out) == s.replace(x, t)
    assert code_length(out) <= len(s) * max(1, len(t))
    assert out.bit_length() <= subst_growth_bound(encode_string(s) + 1, encode_string(t) + 1)


def test_subst_with_empty_pattern():
    with pytest.raises(EmptyPatternError):
        subst_codes(encode_string("ab"), encode_string("b"), encode_string(""))


@given(st.integers(min_value=0, max_value=10**5))
@settings(max_examples=300)
def test_numeral_evaluation_inverts_construction(n):
    assert evaluate_numeral(dyadic_numeral(n).expand()) == n


def test_numeral_errors():
    with pytest.raises(NumeralError):
        dyadic_numeral(-1)
    with pytest.raises(NumeralError):
        evaluate_numeral(App("fst", (Numeral(3),)))
    with pytest.raises(NumeralError):
        evaluate_numeral(Var("x"))


def test_unary_numerals_are_exponentially_longer():
    n = 2**16
    assert unary_numeral_code_bits(n) >= 100 * numeral_code_bits(n)


@given(st.integers(min_value=0, max_value=5000), st.integers(min_value=0, max_value=5000))
def test_cantor_pairing_inverts(x, y):
    assert cantor_unpair(cantor_pair(x, y)) == (x, y)


def test_formula_codes_round_trip():
    f = parse_formula("(all x (-> (Tmpl x) (ex p (Proof:S12 p (sub x 7)))))", CODING_SIGNATURE)
    assert decode_formula(encode_formula(f)) == f
    assert quote(f) == Numeral(encode_formula(f))


def test_unknown_symbols_are_spelled_out():
    table = SymbolTable("tiny", ("(", ")", "{", "}", "char:a", "char:b"))
    code = table.encode_tokens(["(", "ab", ")"])
    assert table.decode_tokens(code) == ["(", "ab", ")"]


def test_malformed_formula_code():
    table = SymbolTable.for_signature(CODING_SIGNATURE)
    code = table.encode_tokens(["(", "="])
    with pytest.raises(CodecError):
        decode_formula(code)


def test_duplicate_table_entries():
    with pytest.raises(CodecError):
        SymbolTable("dup", ("a", "a"))
