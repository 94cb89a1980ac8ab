import pytest

from lambda_asp.asp import (
    AspSyntaxError, Comparison, Constant, Constraint, DomainError, Literal, PuzzleDomain,
    Variable, background_module, encode_domain, generation_module, parse_program, parse_rule,
    rule_from_term, serialize, serialize_rule, term_from_rule, validate_rule,
)
from lambda_asp.corpus import data_path, load_pairs, load_puzzle
from lambda_asp.terms import parse_term


@pytest.fixture(scope="module")
def sample():
    return load_puzzle(data_path("puzzles/sample.puz"))


def test_encode_sample_domain(sample):
    text = [serialize_rule(r) for r in encode_domain(sample.domain)]
    assert "etype(4, rank)." in text
    assert "tuple(3, 3)." in text
    assert "index(1..4)." in text and "eindex(1..5)." in text
    assert "element(2, fire)." in text


def test_encode_tiny_domains():
    d = PuzzleDomain((("t", ("e1",)),))
    assert [serialize_rule(r) for r in encode_domain(d)] == [
        "index(1..1).", "eindex(1..1).", "etype(1, t).", "element(1, e1).", "tuple(1, e1)."]
    d = PuzzleDomain((("a", ("p", "q")), ("rank", (1, 2))))
    facts = [serialize_rule(r) for r in encode_domain(d)]
    assert sum(f.startswith("etype(") for f in facts) == 2
    assert sum(f.startswith("element(") for f in facts) == 4


def test_domain_validation():
    with pytest.raises(DomainError):
        PuzzleDomain((("a", ("p", "q")), ("b", ("r",))))
    with pytest.raises(DomainError):
        PuzzleDomain((("a", ("p", "p")),))
    with pytest.raises(DomainError):
        PuzzleDomain(())


def test_serialize_examples():
    r = Constraint((Literal("tuple", (Variable("I"), Constant("tony"))),
                    Literal("tuple", (Variable("J"), Constant(3))),
                    Comparison(Variable("I"), "!=", Variable("J"))))
    assert serialize_rule(r) == ":- tuple(I, tony), tuple(J, 3), I!=J."
    assert serialize_rule(parse_rule("etype(2, element).")) == "etype(2, element)."
    assert serialize_rule(generation_module()[0]) == "1{tuple(I,X):element(A,X)}1 :- eindex(I), index(A)."


def test_background_defines_maximum():
    text = serialize(background_module())
    assert "maximum(A, X) :- not notmax(A, X), element(A, X)." in text
    assert "notmax(A, X) :- element(A, X), element(A, Y), X!=Y, Y > X." in text


def test_round_trip_sample_encoding(sample):
    program = (encode_domain(sample.domain) + generation_module() + background_module()
               + sample.gold_rules())
    for r in program:
        assert parse_rule(serialize_rule(r)) == r
    assert parse_program(serialize(program)) == program


def test_round_trip_table3_gold():
    for p in load_pairs(data_path("table3.pairs")):
        assert parse_rule(serialize_rule(p.gold)) == p.gold


def test_unary_extremes_are_accepted():
    r = parse_rule(":- tuple(I,rosalyn), tuple(I,X), lowest(X).")
    assert serialize_rule(r) == ":- tuple(I, rosalyn), tuple(I, X), lowest(X)."


@pytest.mark.parametrize("bad", [":- tuple(I, a)", "tuple(I, a) :-", ":- tuple(I, a), X <> Y.", ""])
def test_parse_errors(bad):
    with pytest.raises(AspSyntaxError):
        parse_rule(bad)


def test_validate(sample):
    assert validate_rule(parse_rule(":- tuple(I, tony), tuple(J, 3), I!=J."), sample.domain)
    assert not validate_rule(parse_rule(":- tuple(I, zebra), tuple(J, 3), I!=J."), sample.domain)
    # Y only occurs in the comparison
    assert not validate_rule(parse_rule(":- tuple(I, earl), tuple(I, X), X > Y."), sample.domain)
    # ordered comparisons need the comparable type
    assert not validate_rule(parse_rule(":- tuple(I, earl), tuple(J, ox), tuple(I, X), tuple(J, Y), X < Y."),
                             sample.domain)
    assert not validate_rule(parse_rule(":- foo(I, earl)."), sample.domain)
    assert not validate_rule(parse_rule(":- tuple(I)."), sample.domain)


def test_term_conversion_round_trip():
    for p in load_pairs(data_path("table3.pairs")):
        assert rule_from_term(term_from_rule(p.gold)) == p.gold


def test_rule_from_non_rule_term():
    assert rule_from_term(parse_term("λx. tuple(x, earl)")) is None
    assert rule_from_term(parse_term(":- z@I, tuple(J, a).")) is None
