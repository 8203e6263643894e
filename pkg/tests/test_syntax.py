import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from refleqt.errors import ArityError, LexicalError, SignatureError, UnknownSymbolError
from refleqt.syntax import (
    And,
    Atom,
    BoundKind,
    Eq,
    Exists,
    Forall,
    Implies,
    Numeral,
    Signature,
    Var,
    alpha_equal,
    check_formula,
    classify_formula,
    closure,
    contains_relation,
    free_variables,
    fresh_variable,
    iff,
    make_app,
    numeral_symbol_count,
    parse_formula,
    parse_term,
    print_formula,
    relationalize,
    rename_free,
    split_iff,
    substitute,
)


def test_parse_print_is_canonical(parse):
    text = "(all x (-> (<= x y) (ex z (= (+ x z) y))))"
    f = parse(text)
    assert print_formula(f) == text
    assert free_variables(f) == [Var("y")]


def test_numeral_atoms_fold_and_print_expanded(parse):
    f = parse("(= 5 (S (* (+ (S 0) (S 0)) (* (+ (S 0) (S 0)) (S 0)))))")
    assert isinstance(f, Eq)
    assert f.left == Numeral(5)
    assert f.right == Numeral(5)
    assert "5" not in print_formula(f)


def test_iff_is_sugar(parse):
    f = parse("(iff (= x 0) (= 0 x))")
    assert split_iff(f) == (parse("(= x 0)"), parse("(= 0 x)"))
    assert f == iff(parse("(= x 0)"), parse("(= 0 x)"))


def test_parse_errors_carry_positions(arith):
    with pytest.raises(LexicalError) as info:
        parse_formula("(= x\n  0", arith)
    assert info.value.line == 2

    with pytest.raises(ArityError) as info:
        parse_formula("(= x)", arith)
    assert info.value.position is not None

    with pytest.raises(UnknownSymbolError):
        parse_formula("(Frob x)", arith)


def test_capture_avoiding_substitution(parse):
    f = parse("(ex y (= x (S y)))")
    out = substitute(f, Var("x"), Var("y"))
    assert isinstance(out, Exists)
    assert out.var != Var("y")
    assert free_variables(out) == [Var("y")]
    assert alpha_equal(out, parse("(ex w (= y (S w)))"))


def test_substitution_leaves_bound_occurrences(parse):
    f = parse("(and (= x 0) (all x (= x x)))")
    out = substitute(f, Var("x"), Numeral(3))
    assert out == And(Eq(Numeral(3), Numeral(0)), Forall(Var("x"), Eq(Var("x"), Var("x"))))


def test_rename_free_is_simultaneous(parse):
    f = parse("(= x y)")
    swapped = rename_free(f, {Var("x"): Var("y"), Var("y"): Var("x")})
    assert swapped == parse("(= y x)")


def test_alpha_equality(parse):
    assert alpha_equal(parse("(all x (= x x))"), parse("(all y (= y y))"))
    assert not alpha_equal(parse("(all x (= x y))"), parse("(all y (= y y))"))


def test_fresh_variable_skips_used_serials():
    v = fresh_variable(Var("x"), [Var("x"), Var("x", 3), Var("y", 9)])
    assert v == Var("x", 4)


def test_closure_orders_by_first_occurrence(parse):
    f = closure(parse("(= (+ b a) b)"))
    assert isinstance(f, Forall) and f.var == Var("b")
    assert isinstance(f.body, Forall) and f.body.var == Var("a")


def test_signature_checks(graph_sig):
    f = parse_formula("(all x (-> (P x) (E x c)))", graph_sig)
    check_formula(f, graph_sig)
    with pytest.raises(SignatureError):
        check_formula(Atom("E", (Var("x"),)), graph_sig)
    with pytest.raises(SignatureError):
        Signature(name="bad", relations=(("and", 2),))


def test_dynamic_proof_relations(arith):
    f = parse_formula("(ex p (Proof:S12 p 0))", arith)
    assert contains_relation(f, "Proof:S12")
    plain = Signature(name="plain", has_arithmetic=True)
    with pytest.raises(UnknownSymbolError):
        parse_formula("(Proof:S12 0 0)", plain)


def test_coding_functions_are_not_folded(arith):
    t = parse_term("(fst (pair 3 4))", arith)
    assert t.fn == "fst"
    assert make_app("S", (Numeral(0),)) == Numeral(1)


def test_bounded_classes(parse):
    assert classify_formula(parse("(ball x (len y) (= x x))")).kind is BoundKind.SIGMA0
    assert classify_formula(parse("(bex x y (ball z (len x) (= z z)))")).kind is BoundKind.SIGMA
    assert classify_formula(parse("(ball x y (bex z x (= z z)))")).kind is BoundKind.PI
    assert classify_formula(parse("(all x (= x x))")).kind is BoundKind.UNBOUNDED


def test_relationalize_removes_function_terms(parse):
    f = relationalize(parse("(= (+ x 0) x)"))
    printed = print_formula(f)
    assert "graph:+" in printed and "graph:0" in printed
    assert free_variables(f) == [Var("x")]


@given(st.integers(min_value=0, max_value=10**5))
@settings(max_examples=300)
def test_dyadic_numeral_is_logarithmic(n):
    assert numeral_symbol_count(n) <= 8 * math.log2(n + 2)


@given(st.integers(min_value=0, max_value=2**20))
@settings(max_examples=100)
def test_numeral_text_round_trip(n):
    sig = Signature(name="a", has_arithmetic=True)
    f = Eq(Numeral(n), Var("x"))
    assert parse_formula(print_formula(f), sig) == f


def test_implication_structure(parse):
    f = parse("(-> (= x 0) (-> (= y 0) (= x y)))")
    assert isinstance(f, Implies) and isinstance(f.right, Implies)
