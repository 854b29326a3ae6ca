"""Grammar corpus, precedence oracle and round-trip properties for the expression parser."""

import math
import random

import pytest

from cosoliton.expr import (
    BinOp,
    Call,
    DomainError,
    EvaluationError,
    Neg,
    Num,
    ParseError,
    Var,
    evaluate,
    parse_expression,
    serialize,
    variables,
)


def ev(text, **bindings):
    return evaluate(parse_expression(text), bindings)


# ---------------------------------------------------------------------------
# Structure

def test_call_structure():
    assert parse_expression("exp(alpha*v)") == Call("exp", (BinOp("*", Var("alpha"), Var("v")),))


def test_unary_minus_binds_looser_than_power():
    assert parse_expression("-x^2") == Neg(BinOp("^", Var("x"), Num(2.0)))
    assert ev("-x^2", x=3.0) == -9.0


def test_power_right_associative():
    assert parse_expression("a^b^c") == BinOp("^", Var("a"), BinOp("^", Var("b"), Var("c")))
    assert ev("2^3^2") == 512.0


def test_left_associative_chains():
    assert parse_expression("a-b-c") == BinOp("-", BinOp("-", Var("a"), Var("b")), Var("c"))
    assert parse_expression("a/b/c") == BinOp("/", BinOp("/", Var("a"), Var("b")), Var("c"))


def test_whitespace_insensitive():
    assert parse_expression(" 2 * ( x + y ) / z ") == parse_expression("2*(x+y)/z")


# ---------------------------------------------------------------------------
# Evaluation oracles

def test_hand_evaluation_oracle():
    assert ev("2*(x+y)/z", x=1.0, y=2.0, z=3.0) == pytest.approx(2.0)


def test_exponential_cases():
    assert ev("exp(alpha*v)", alpha=0.0, v=7.0) == 1.0
    assert ev("exp(alpha*v)", alpha=1.0, v=0.0) == 1.0
    assert ev("exp(alpha*v)", alpha=0.5, v=2.0) == pytest.approx(math.e, rel=1e-15)


def test_constants_predeclared():
    assert ev("cos(pi)") == pytest.approx(-1.0)
    assert ev("log(e)") == pytest.approx(1.0)


def test_constants_read_only():
    with pytest.raises(EvaluationError):
        ev("pi+1", pi=3.0)


def test_precedence_value_oracle():
    rng = random.Random(11)
    e = parse_expression("a+b*c")
    for _ in range(200):
        a, b, c = (rng.uniform(-5, 5) for _ in range(3))
        assert evaluate(e, {"a": a, "b": b, "c": c}) == a + (b * c)


def test_evaluation_is_pure():
    e = parse_expression("sin(x)^2+cos(x)^2*exp(y/3)")
    b = {"x": 0.37, "y": -1.2}
    assert evaluate(e, b) == evaluate(e, b)


# ---------------------------------------------------------------------------
# Errors

def test_unbound_identifier():
    with pytest.raises(EvaluationError, match="unbound"):
        ev("x+q", x=1.0)


def test_domain_errors_raise_not_nan():
    with pytest.raises(DomainError):
        ev("log(x)", x=-1.0)
    with pytest.raises(DomainError):
        ev("log(x)", x=0.0)
    with pytest.raises(DomainError):
        ev("sqrt(x)", x=-4.0)
    with pytest.raises(DomainError):
        ev("1/x", x=0.0)
    with pytest.raises(DomainError):
        ev("x^0.5", x=-2.0)


def test_integer_power_of_negative_base_allowed():
    assert ev("x^3", x=-2.0) == -8.0


def test_empty_input():
    with pytest.raises(ParseError):
        parse_expression("")
    with pytest.raises(ParseError):
        parse_expression("   ")


def test_unknown_function_name():
    with pytest.raises(ParseError, match="unknown function"):
        parse_expression("foo(x)")


def test_wrong_arity():
    with pytest.raises(ParseError, match="argument"):
        parse_expression("exp(x, y)")


def test_error_byte_offsets():
    for text, offset in [
        ("2*)", 2),        # stray close paren
        ("(x+y", 4),       # unterminated paren: error at end
        ("x+*2", 2),       # operator where atom expected
        ("1 + ", 4),       # dangling operator
        ("a $ b", 2),      # illegal character
    ]:
        with pytest.raises(ParseError) as err:
            parse_expression(text)
        assert err.value.offset == offset, text


def test_byte_offset_counts_utf8_bytes():
    with pytest.raises(ParseError) as err:
        parse_expression("2*α")  # two-byte character at byte offset 2
    assert err.value.offset == 2


# ---------------------------------------------------------------------------
# 50-case grammar corpus: (text, bindings, expected value) or (text, offset)

VALUE_CASES = [
    ("0", {}, 0.0),
    ("3.5", {}, 3.5),
    (".5", {}, 0.5),
    ("2e3", {}, 2000.0),
    ("2.5e-2", {}, 0.025),
    ("1E+2", {}, 100.0),
    ("x", {"x": 4.25}, 4.25),
    ("foo_1", {"foo_1": 2.0}, 2.0),
    ("_v", {"_v": 3.0}, 3.0),
    ("1+2*3", {}, 7.0),
    ("(1+2)*3", {}, 9.0),
    ("2-3-4", {}, -5.0),
    ("2-(3-4)", {}, 3.0),
    ("12/4/3", {}, 1.0),
    ("12/(4/2)", {}, 6.0),
    ("2^3", {}, 8.0),
    ("2^3^2", {}, 512.0),
    ("(2^3)^2", {}, 64.0),
    ("-2^2", {}, -4.0),
    ("(-2)^2", {}, 4.0),
    ("2^-1", {}, 0.5),
    ("2^-x", {"x": 2.0}, 0.25),
    ("--5", {}, 5.0),
    ("-(-5)", {}, 5.0),
    ("-x*y", {"x": 2.0, "y": 3.0}, -6.0),
    ("-(x*y)", {"x": 2.0, "y": 3.0}, -6.0),
    ("2*-3", {}, -6.0),
    ("1--1", {}, 2.0),
    ("abs(-3.5)", {}, 3.5),
    ("sqrt(16)", {}, 4.0),
    ("exp(0)", {}, 1.0),
    ("log(1)", {}, 0.0),
    ("sin(0)", {}, 0.0),
    ("cos(0)", {}, 1.0),
    ("tan(0)", {}, 0.0),
    ("sinh(0)", {}, 0.0),
    ("cosh(0)", {}, 1.0),
    ("tanh(0)", {}, 0.0),
    ("exp(log(5))", {}, 5.0),
    ("sqrt(x^2)", {"x": -3.0}, 3.0),
    ("x*(y+z)^2", {"x": 2.0, "y": 1.0, "z": 2.0}, 18.0),
    ("1/2+1/2", {}, 1.0),
    ("pi/pi", {}, 1.0),
    ("e/e", {}, 1.0),
    ("exp(alpha*v)", {"alpha": 2.0, "v": 0.5}, math.e),
]

ERROR_CASES = [
    ("", 0),
    ("(", 1),
    (")", 0),
    ("1 2", 2),
    ("f(x)", 0),
]


def test_grammar_corpus():
    assert len(VALUE_CASES) + len(ERROR_CASES) == 50
    for text, bindings, expected in VALUE_CASES:
        assert ev(text, **bindings) == pytest.approx(expected, rel=1e-14, abs=1e-14), text
    for text, offset in ERROR_CASES:
        with pytest.raises(ParseError) as err:
            parse_expression(text)
        assert err.value.offset == offset, text


# ---------------------------------------------------------------------------
# Round-trip properties

def _random_tree(rng, depth):
    names = ["x", "y", "alpha", "v_1"]
    funcs = ["exp", "sin", "cos", "sqrt", "abs", "tanh"]
    if depth <= 0 or rng.random() < 0.3:
        if rng.random() < 0.5:
            return Num(round(rng.uniform(0, 100), 4))
        return Var(rng.choice(names))
    kind = rng.randrange(4)
    if kind == 0:
        return Neg(_random_tree(rng, depth - 1))
    if kind == 1:
        return Call(rng.choice(funcs), (_random_tree(rng, depth - 1),))
    op = rng.choice(["+", "-", "*", "/", "^"])
    return BinOp(op, _random_tree(rng, depth - 1), _random_tree(rng, depth - 1))


def test_round_trip_on_fuzzed_trees():
    rng = random.Random(20240803)
    for _ in range(1000):
        tree = _random_tree(rng, 5)
        text = serialize(tree)
        reparsed = parse_expression(text)
        assert reparsed == tree, text
        # serialize(parse(s)) parses to a tree equal to parse(s)
        assert parse_expression(serialize(reparsed)) == reparsed


def test_round_trip_on_source_strings():
    sources = [t for t, _, _ in VALUE_CASES]
    for text in sources:
        tree = parse_expression(text)
        assert parse_expression(serialize(tree)) == tree, text


def test_variables_helper():
    e = parse_expression("exp(alpha*v)+pi*x")
    assert variables(e) == {"alpha", "v", "x"}
